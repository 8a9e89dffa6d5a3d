#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "xg/gam.hpp"

namespace xg {

struct ImportanceEntry {
    std::string name;  // feature, or "a & b" for a pair
    double importance = 0.0;
};

/// Mean absolute log-odds contribution of every function over a reference
/// set, sorted descending with ties broken by name.
struct GlobalImportanceReport {
    std::vector<ImportanceEntry> entries;
};

GlobalImportanceReport global_importance(const GamModel& m, const FeatureMatrix& reference);

struct ShapeRow {
    double bin_lo = 0.0;  // -inf for the first bin
    double bin_hi = 0.0;  // +inf for the last bin
    double score = 0.0;
    double density = 0.0;  // share of training rows in the bin
};

std::vector<ShapeRow> shape_table(const GamModel& m, std::string_view feature);

struct InteractionTable {
    std::string first;
    std::string second;
    std::vector<double> first_cuts;
    std::vector<double> second_cuts;
    std::vector<double> scores;  // row-major: first-feature bin, second-feature bin

    std::size_t rows() const { return first_cuts.size() + 1; }
    std::size_t cols() const { return second_cuts.size() + 1; }
    double at(std::size_t i, std::size_t j) const { return scores[i * cols() + j]; }
};

/// Throws UnknownFeature for names outside the model and NotWhitelisted for
/// pairs the model was not allowed to learn. Either argument order works.
InteractionTable interaction_table(const GamModel& m, std::string_view a, std::string_view b);

struct Contribution {
    std::string name;
    std::vector<double> values;  // the input value(s) the function reads
    double contribution = 0.0;   // log odds
};

struct LocalExplanation {
    std::string shot_id;
    double intercept = 0.0;
    std::vector<Contribution> contributions;  // sorted by |contribution| descending
    double score = 0.0;                       // model logit
    double probability = 0.0;

    /// intercept + sum of contributions.
    double reconstructed_score() const;
};

LocalExplanation explain_local(const GamModel& m, std::span<const double> v, std::string shot_id = {});

void write_importance_csv(const GlobalImportanceReport& r, const std::filesystem::path& path);
void write_shape_csv(std::string_view feature, std::span<const ShapeRow> rows, const std::filesystem::path& path);
void write_interaction_csv(const InteractionTable& t, const std::filesystem::path& path);
std::string to_text(const LocalExplanation& e);
std::string to_json(const LocalExplanation& e);

} // namespace xg
