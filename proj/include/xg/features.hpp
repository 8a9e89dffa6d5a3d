#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "xg/shot_data.hpp"
#include "xg/zones.hpp"

namespace xg {

enum class Representation {
    SoftZones,
    HardZones,
    DistanceAngle,
    Constant,  // no features at all; used by the naive baseline
};

std::string_view to_string(Representation r);
Representation parse_representation(std::string_view text);

inline constexpr std::string_view kFootFeature = "bodypart_foot_a0";
inline constexpr std::string_view kHeadFeature = "bodypart_head_a0";
inline constexpr std::string_view kOtherFeature = "bodypart_other_a0";
inline constexpr std::string_view kPenaltyFeature = "type_shot_penalty_a0";
inline constexpr std::string_view kDistanceFeature = "start_dist_to_goal";
inline constexpr std::string_view kAngleFeature = "start_angle_to_goal";

class FeatureSpec {
public:
    /// Zone representations require a frozen zone model; the others reject one.
    FeatureSpec(Representation representation, std::optional<ZoneModel> zones = std::nullopt);

    Representation representation() const { return representation_; }
    const std::optional<ZoneModel>& zone_model() const { return zones_; }
    const std::vector<std::string>& feature_names() const { return names_; }
    std::size_t size() const { return names_.size(); }
    bool uses_zones() const {
        return representation_ == Representation::SoftZones ||
               representation_ == Representation::HardZones;
    }

    std::optional<std::size_t> index_of(std::string_view name) const;

    friend bool operator==(const FeatureSpec&, const FeatureSpec&) = default;

private:
    Representation representation_;
    std::optional<ZoneModel> zones_;
    std::vector<std::string> names_;
};

using FeatureVector = std::vector<double>;

/// Dense row-major matrix with named columns.
class FeatureMatrix {
public:
    FeatureMatrix() = default;
    FeatureMatrix(std::vector<std::string> names, std::size_t rows);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return names_.size(); }
    const std::vector<std::string>& names() const { return names_; }

    std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols(), cols()}; }
    std::span<double> row(std::size_t i) { return {data_.data() + i * cols(), cols()}; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols() + c]; }
    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols() + c]; }
    std::vector<double> column(std::size_t c) const;

    /// Copies the listed rows, in order.
    FeatureMatrix select(std::span<const std::size_t> rows) const;

private:
    std::vector<std::string> names_;
    std::size_t rows_ = 0;
    std::vector<double> data_;
};

FeatureVector featurize(const FeatureSpec& spec, const ShotRecord& shot);

struct LabeledMatrix {
    FeatureMatrix features;
    std::vector<double> labels;  // is_goal as 0 / 1
};

LabeledMatrix featurize_dataset(const FeatureSpec& spec, const Dataset& d);

/// CSV with the feature names as header, plus an is_goal column when labels
/// are given.
void write_feature_csv(const FeatureMatrix& m, std::span<const double> labels,
                       const std::filesystem::path& path);

} // namespace xg
