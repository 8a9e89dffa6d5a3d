#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "xg/features.hpp"

namespace xg {

inline double sigmoid(double score) { return 1.0 / (1.0 + std::exp(-score)); }
inline double logit(double p) { return std::log(p / (1.0 - p)); }

/// Index of the bin holding `v`: the number of cuts <= v. The outermost bins
/// are unbounded, so every real maps to exactly one bin.
std::size_t bin_of(std::span<const double> cuts, double v);

/// Piecewise-constant log-odds function over one feature or a feature pair.
/// Scores are stored row-major over the per-dimension bins.
struct BinnedFunction {
    std::vector<std::size_t> features;        // one index (main effect) or two (pair)
    std::vector<std::vector<double>> cuts;    // per dimension, strictly increasing
    std::vector<double> scores;
    std::vector<double> weights;              // training rows per bin

    std::size_t bins(std::size_t dim) const { return cuts[dim].size() + 1; }
    std::size_t bin_index(std::span<const double> row) const;
    double contribution(std::span<const double> row) const { return scores[bin_index(row)]; }
    bool is_pair() const { return features.size() == 2; }

    friend bool operator==(const BinnedFunction&, const BinnedFunction&) = default;
};

struct InteractionWhitelist {
    std::vector<std::pair<std::string, std::string>> pairs;

    std::size_t size() const { return pairs.size(); }
    bool contains(std::string_view a, std::string_view b) const;

    friend bool operator==(const InteractionWhitelist&, const InteractionWhitelist&) = default;
};

/// For zone representations: every penalty-area zone paired with the foot
/// indicator, then with the head indicator, then the penalty-spot zone with
/// the penalty indicator (25 pairs for the default table). Any other
/// representation is rejected with UnsupportedSpec.
InteractionWhitelist build_whitelist(const FeatureSpec& spec);

/// Quantile cut points for one column. Columns with at most `max_bins`
/// distinct values get one bin per value; constant columns get no cuts.
std::vector<double> quantile_cuts(std::span<const double> values, std::size_t max_bins);
std::vector<std::vector<double>> bin_features(const FeatureMatrix& m, std::size_t max_bins);

struct TrainConfig {
    double learning_rate = 0.01;
    std::size_t max_rounds = 5000;
    std::size_t outer_bags = 8;
    double validation_fraction = 0.15;
    std::size_t early_stopping_patience = 50;
    double early_stopping_tolerance = 0.0;
    std::size_t max_bins_main = 64;
    std::size_t max_bins_pair = 32;
    double min_hessian = 1e-4;
    std::size_t max_leaves = 3;  // per main-effect tree; pair trees have at most four leaves
    std::uint64_t seed = 2021;
    std::size_t threads = 0;  // 0: one per hardware thread; results do not depend on it

    void validate() const;

    friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

struct StageReport {
    // One entry per bag.
    std::vector<std::size_t> rounds_run;
    std::vector<std::size_t> best_round;
    std::vector<std::vector<double>> validation_loss;  // entry 0 is before the first round

    friend bool operator==(const StageReport&, const StageReport&) = default;
};

struct TrainingReport {
    std::size_t training_rows = 0;
    StageReport main_stage;
    StageReport pair_stage;
    std::vector<std::string> warnings;

    friend bool operator==(const TrainingReport&, const TrainingReport&) = default;
};

struct GamModel {
    double intercept = 0.0;
    double base_rate = 0.5;  // training goal rate
    std::vector<std::string> feature_names;
    std::vector<BinnedFunction> main_effects;
    std::vector<BinnedFunction> pairwise_effects;
    InteractionWhitelist whitelist;
    std::optional<FeatureSpec> spec;
    TrainConfig config;
    TrainingReport report;
    std::map<std::string, std::string> settings;  // effective run configuration, echoed

    std::string function_name(const BinnedFunction& f) const;

    /// intercept + main effects + pairwise effects, summed in that order.
    double score(std::span<const double> v) const;

    friend bool operator==(const GamModel&, const GamModel&) = default;
};

/// Cyclic boosting of small Newton trees over the bins on the logit scale,
/// main effects first and whitelisted pairs second, each bag with its own
/// validation split and early stopping. Bag tables are averaged and every function is centered into the
/// intercept. Single-class labels yield the constant model plus a warning.
GamModel fit_gam(const FeatureMatrix& x, std::span<const double> labels,
                 const InteractionWhitelist& whitelist, const TrainConfig& cfg);

/// Intercept-only model predicting `rate` for every shot.
GamModel constant_model(double rate, const FeatureSpec& spec);

double predict_proba(const GamModel& m, std::span<const double> v);
std::vector<double> predict_proba(const GamModel& m, const FeatureMatrix& x);

inline constexpr std::string_view kArtifactFormat = "xgoals-gam";
inline constexpr int kArtifactVersion = 1;

std::string serialize(const GamModel& m);
GamModel deserialize(std::string_view artifact);
void save_model(const GamModel& m, const std::filesystem::path& path);
GamModel load_model(const std::filesystem::path& path);

} // namespace xg
