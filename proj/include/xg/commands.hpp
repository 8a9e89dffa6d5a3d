#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "xg/gam.hpp"
#include "xg/metrics.hpp"
#include "xg/shot_data.hpp"
#include "xg/zones.hpp"

namespace xg {

enum class Approach { SoftZones, HardZones, DistanceAngle, Naive };

std::string_view to_string(Approach a);
Approach parse_approach(std::string_view text);

struct ApproachOptions {
    std::optional<ZoneModel> zone_table;  // defaults to default_centers()
    ZoneFitOptions zone_fit;
    TrainConfig train;
};

struct TrainedApproach {
    GamModel model;
    std::optional<ZoneFit> zone_fit;
};

/// Zone refinement (zone approaches only), featurization, whitelist and
/// boosting for one approach on a training set. The naive approach is the
/// constant model at the training goal rate.
TrainedApproach train_approach(const Dataset& train, Approach approach, const ApproachOptions& opts);

/// The constant the naive baseline predicts for a training goal rate: the
/// output of an intercept-only model, so a naive model normalizes to exactly 1.
double naive_prediction(double training_rate);

/// Everything a command can be told. Unused fields are ignored per command.
struct RunConfig {
    std::optional<std::uint64_t> seed;

    // generate
    std::size_t n = 10000;
    std::vector<std::string> seasons{"2017/2018", "2018/2019", "2019/2020", "2020/2021"};
    std::vector<double> season_weights;

    // data
    std::filesystem::path data;
    CoordSpec coords;
    RowPolicy row_policy = RowPolicy::Strict;
    std::set<std::string> test_seasons;

    // train
    Approach approach = Approach::SoftZones;
    std::optional<std::filesystem::path> zone_table;
    std::size_t cmeans_iterations = 1000;
    TrainConfig train;

    // evaluate
    std::vector<std::filesystem::path> models;
    std::optional<double> baseline_rate;
    std::size_t ece_bins = kDefaultEceBins;

    // explain
    std::vector<std::size_t> local;
    std::vector<std::string> features;
    std::vector<std::pair<std::string, std::string>> pairs;
    std::string reference = "train";  // train | test | all

    std::filesystem::path out = ".";

    /// Effective settings for `command` as strings; output locations excluded.
    std::map<std::string, std::string> settings(std::string_view command) const;
};

// Output file names under RunConfig::out.
inline constexpr std::string_view kShotsFile = "shots.csv";
inline constexpr std::string_view kGroundTruthFile = "ground_truth.csv";
inline constexpr std::string_view kModelFile = "model.json";
inline constexpr std::string_view kTrainingReportFile = "training_report.txt";
inline constexpr std::string_view kReportTextFile = "report.txt";
inline constexpr std::string_view kReportJsonFile = "report.json";
inline constexpr std::string_view kImportanceFile = "importance.csv";
inline constexpr std::string_view kShapesDir = "shapes";
inline constexpr std::string_view kInteractionsDir = "interactions";
inline constexpr std::string_view kLocalDir = "local";
inline constexpr std::string_view kConfigFile = "effective_config.json";

void cmd_generate(const RunConfig& cfg);
GamModel cmd_train(const RunConfig& cfg);
std::vector<NamedReport> cmd_evaluate(const RunConfig& cfg);
void cmd_explain(const RunConfig& cfg);

std::string training_report_text(const GamModel& m, const std::optional<ZoneFit>& zone_fit);

} // namespace xg
