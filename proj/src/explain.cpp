#include "xg/explain.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include <fmt/format.h>
#include <json.hpp>

#include "xg/error.hpp"

namespace xg {

namespace {

void check_width(const GamModel& m, std::size_t width) {
    if (width != m.feature_names.size()) {
        throw Error(ErrorCode::DimensionMismatch,
                    fmt::format("input has {} features, model expects {}", width, m.feature_names.size()));
    }
}

std::size_t feature_index(const GamModel& m, std::string_view name) {
    const auto it = std::find(m.feature_names.begin(), m.feature_names.end(), name);
    if (it == m.feature_names.end()) {
        throw Error(ErrorCode::UnknownFeature, fmt::format("feature '{}' is not in the model", name));
    }
    return static_cast<std::size_t>(it - m.feature_names.begin());
}

std::vector<const BinnedFunction*> all_functions(const GamModel& m) {
    std::vector<const BinnedFunction*> out;
    for (const auto& f : m.main_effects) out.push_back(&f);
    for (const auto& f : m.pairwise_effects) out.push_back(&f);
    return out;
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, fmt::format("cannot write '{}'", path.string()));
    return out;
}

} // namespace

GlobalImportanceReport global_importance(const GamModel& m, const FeatureMatrix& reference) {
    if (reference.rows() == 0) throw Error(ErrorCode::EmptyDataset, "importance needs a non-empty reference set");
    if (reference.names() != m.feature_names) {
        throw Error(ErrorCode::DimensionMismatch, "reference columns do not match the model features");
    }
    GlobalImportanceReport report;
    for (const auto* f : all_functions(m)) {
        double total = 0.0;
        for (std::size_t r = 0; r < reference.rows(); ++r) total += std::abs(f->contribution(reference.row(r)));
        report.entries.push_back({m.function_name(*f), total / static_cast<double>(reference.rows())});
    }
    std::stable_sort(report.entries.begin(), report.entries.end(), [](const auto& a, const auto& b) {
        if (a.importance != b.importance) return a.importance > b.importance;
        return a.name < b.name;
    });
    return report;
}

std::vector<ShapeRow> shape_table(const GamModel& m, std::string_view feature) {
    const std::size_t index = feature_index(m, feature);
    const auto it = std::find_if(m.main_effects.begin(), m.main_effects.end(),
                                 [&](const BinnedFunction& f) { return f.features[0] == index; });
    if (it == m.main_effects.end()) {
        return {{-std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(), 0.0, 1.0}};
    }
    double total = 0.0;
    for (double w : it->weights) total += w;
    std::vector<ShapeRow> rows;
    const auto& cuts = it->cuts[0];
    for (std::size_t b = 0; b < it->scores.size(); ++b) {
        rows.push_back({b == 0 ? -std::numeric_limits<double>::infinity() : cuts[b - 1],
                        b == cuts.size() ? std::numeric_limits<double>::infinity() : cuts[b], it->scores[b],
                        total > 0.0 ? it->weights[b] / total : 0.0});
    }
    return rows;
}

InteractionTable interaction_table(const GamModel& m, std::string_view a, std::string_view b) {
    const std::size_t ia = feature_index(m, a);
    const std::size_t ib = feature_index(m, b);
    if (!m.whitelist.contains(a, b)) {
        throw Error(ErrorCode::NotWhitelisted, fmt::format("pair ({}, {}) is not whitelisted", a, b));
    }
    for (const auto& f : m.pairwise_effects) {
        if ((f.features[0] == ia && f.features[1] == ib) || (f.features[0] == ib && f.features[1] == ia)) {
            return {m.feature_names[f.features[0]], m.feature_names[f.features[1]], f.cuts[0], f.cuts[1], f.scores};
        }
    }
    // Whitelisted but never fitted: the function is identically zero.
    return {std::string(a), std::string(b), {}, {}, {0.0}};
}

double LocalExplanation::reconstructed_score() const {
    double s = intercept;
    for (const auto& c : contributions) s += c.contribution;
    return s;
}

LocalExplanation explain_local(const GamModel& m, std::span<const double> v, std::string shot_id) {
    check_width(m, v.size());
    LocalExplanation e;
    e.shot_id = std::move(shot_id);
    e.intercept = m.intercept;
    for (const auto* f : all_functions(m)) {
        Contribution c{m.function_name(*f), {}, f->contribution(v)};
        for (auto i : f->features) c.values.push_back(v[i]);
        e.contributions.push_back(std::move(c));
    }
    std::stable_sort(e.contributions.begin(), e.contributions.end(), [](const auto& x, const auto& y) {
        if (std::abs(x.contribution) != std::abs(y.contribution)) return std::abs(x.contribution) > std::abs(y.contribution);
        return x.name < y.name;
    });
    e.score = m.score(v);
    e.probability = sigmoid(e.score);
    return e;
}

void write_importance_csv(const GlobalImportanceReport& r, const std::filesystem::path& path) {
    auto out = open_out(path);
    out << "feature,importance\n";
    for (const auto& e : r.entries) out << fmt::format("{},{}\n", e.name, e.importance);
}

void write_shape_csv(std::string_view feature, std::span<const ShapeRow> rows, const std::filesystem::path& path) {
    auto out = open_out(path);
    out << "feature,bin_lo,bin_hi,score,density\n";
    for (const auto& r : rows) {
        out << fmt::format("{},{},{},{},{}\n", feature, r.bin_lo, r.bin_hi, r.score, r.density);
    }
}

void write_interaction_csv(const InteractionTable& t, const std::filesystem::path& path) {
    auto out = open_out(path);
    out << "pair,bin_i,bin_j,score\n";
    for (std::size_t i = 0; i < t.rows(); ++i) {
        for (std::size_t j = 0; j < t.cols(); ++j) {
            out << fmt::format("{} & {},{},{},{}\n", t.first, t.second, i, j, t.at(i, j));
        }
    }
}

std::string to_text(const LocalExplanation& e) {
    std::string out = fmt::format("shot {}\nprobability {:.4f} (logit {:.6f})\nintercept {:+.6f}\n", e.shot_id,
                                  e.probability, e.score, e.intercept);
    for (const auto& c : e.contributions) {
        out += fmt::format("  {:<40} value {:<24} {:+.6f}\n", c.name, fmt::format("{}", fmt::join(c.values, ", ")),
                           c.contribution);
    }
    return out;
}

std::string to_json(const LocalExplanation& e) {
    nlohmann::json contributions = nlohmann::json::array();
    for (const auto& c : e.contributions) {
        contributions.push_back({{"name", c.name}, {"values", c.values}, {"contribution", c.contribution}});
    }
    nlohmann::json j{{"shot_id", e.shot_id},
                     {"intercept", e.intercept},
                     {"contributions", contributions},
                     {"score", e.score},
                     {"probability", e.probability}};
    return j.dump(2) + "\n";
}

} // namespace xg
