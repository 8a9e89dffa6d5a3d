#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "xg/pitch.hpp"

namespace xg {

enum class BodyPart { Foot, Head, Other };

std::string_view to_string(BodyPart part);
/// Accepts "foot", "head", "other" (case-insensitive).
std::optional<BodyPart> parse_body_part(std::string_view text);

struct ShotRecord {
    double x = 0.0;  // metres along the pitch, goal at 105
    double y = 0.0;  // metres across the pitch
    BodyPart body_part = BodyPart::Foot;
    bool is_penalty = false;
    bool is_goal = false;
    std::string competition;
    std::string season;
    std::string match_id;
    std::string player_id;

    pitch::Point location() const { return {x, y}; }

    friend bool operator==(const ShotRecord&, const ShotRecord&) = default;
};

/// Throws InvalidValue / OutOfRangeCoordinate when a record breaks the
/// canonical-frame or penalty-implies-foot rules.
void validate(const ShotRecord& shot);

struct Dataset {
    std::vector<ShotRecord> records;
    std::string provenance;

    std::size_t size() const { return records.size(); }
    bool empty() const { return records.empty(); }
};

// ---------------------------------------------------------------------------
// CSV ingestion
// ---------------------------------------------------------------------------

enum class AttackDirection { LeftToRight, RightToLeft };

/// Describes how coordinates in a source file map onto the canonical
/// 105 x 68 frame: x' = x / x_range * 105, y' = y / y_range * 68, mirrored when
/// the source attacks right to left.
struct CoordSpec {
    double x_range = pitch::kLength;
    double y_range = pitch::kWidth;
    AttackDirection direction = AttackDirection::LeftToRight;
};

enum class RowPolicy {
    Strict,  // first bad row throws
    Skip,    // bad rows are dropped and listed in the report
};

struct RowIssue {
    std::size_t line = 0;  // 1-based data line, header excluded
    std::string code;
    std::string message;
};

struct IngestionReport {
    std::size_t rows_read = 0;
    std::size_t rows_accepted = 0;
    std::vector<RowIssue> rejected;
    std::vector<std::size_t> outside_attacking_half;  // data lines, accepted

    std::string to_text() const;
};

struct CsvLoad {
    Dataset dataset;
    IngestionReport report;
};

inline constexpr std::string_view kCsvHeader =
    "x,y,body_part,is_penalty,is_goal,competition,season,match_id,player_id";

CsvLoad load_csv(const std::filesystem::path& path, const CoordSpec& coords = {},
                 RowPolicy policy = RowPolicy::Strict);

/// Writes canonical coordinates with round-trip precision.
void write_csv(const Dataset& d, const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Splits and summary statistics
// ---------------------------------------------------------------------------

struct SeasonSplit {
    Dataset train;
    Dataset test;
};

/// Record order is preserved on both sides. Throws EmptyPartition when either
/// side ends up empty.
SeasonSplit split_by_season(const Dataset& d, const std::set<std::string>& test_seasons);

double class_rate(const Dataset& d);

// ---------------------------------------------------------------------------
// Synthetic shots with a known goal-probability surface
// ---------------------------------------------------------------------------

/// Logistic surface in distance to goal and visible goal angle with additive
/// body-part offsets; penalties score with a fixed probability. Setting
/// `constant_probability` replaces the surface with a constant.
struct SyntheticGroundTruth {
    double intercept = -1.6;
    double distance_coef = -0.105;  // per metre
    double angle_coef = 1.45;       // per radian
    double head_offset = -0.95;
    double other_offset = -0.6;
    double penalty_probability = 0.76;
    std::optional<double> constant_probability;

    // Sampling scheme. A share of shots are penalties from the spot. The rest
    // are placed at x = 105 - d with d ~ Gamma(depth_shape, depth_scale)
    // truncated to the attacking half, and y ~ N(34, lateral_base +
    // lateral_slope * d) truncated to the pitch. Headers are common inside the
    // penalty area and rare outside it.
    double penalty_share = 0.012;
    double depth_shape = 2.2;
    double depth_scale = 7.0;
    double lateral_base = 5.0;
    double lateral_slope = 0.35;
    double head_share_in_box = 0.24;
    double head_share_outside = 0.02;
    double other_share = 0.02;
    std::vector<std::string> seasons{"2017/2018", "2018/2019", "2019/2020"};
    std::vector<double> season_weights;  // empty means uniform
    std::vector<std::string> competitions{"Premier League", "Bundesliga", "LaLiga",
                                          "Serie A", "Ligue 1"};

    std::uint64_t seed = 2021;

    /// p*(shot) in (0, 1) unless a constant override is set.
    double probability(const ShotRecord& shot) const;
};

Dataset generate_synthetic(const SyntheticGroundTruth& gt, std::size_t n);

} // namespace xg
