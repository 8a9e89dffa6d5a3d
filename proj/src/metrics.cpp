#include "xg/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/format.h>
#include <json.hpp>

#include "xg/error.hpp"

namespace xg {

namespace {

void check_sizes(std::span<const double> predictions, std::span<const double> labels) {
    if (predictions.size() != labels.size()) {
        throw Error(ErrorCode::DimensionMismatch,
                    fmt::format("{} predictions for {} labels", predictions.size(), labels.size()));
    }
    if (predictions.empty()) throw Error(ErrorCode::EmptyDataset, "no predictions to evaluate");
}

} // namespace

double auc_roc(std::span<const double> predictions, std::span<const double> labels) {
    check_sizes(predictions, labels);
    const std::size_t n = predictions.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return predictions[a] < predictions[b]; });

    double positive_rank_sum = 0.0;
    double positives = 0.0;
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j < n && predictions[order[j]] == predictions[order[i]]) ++j;
        const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);  // ranks i+1 .. j
        for (std::size_t k = i; k < j; ++k) {
            if (labels[order[k]] == 1.0) {
                positive_rank_sum += avg_rank;
                positives += 1.0;
            }
        }
        i = j;
    }
    const double negatives = static_cast<double>(n) - positives;
    if (positives == 0.0 || negatives == 0.0) {
        throw Error(ErrorCode::SingleClass, "AUC-ROC needs both goals and non-goals");
    }
    return (positive_rank_sum - positives * (positives + 1.0) / 2.0) / (positives * negatives);
}

double brier(std::span<const double> predictions, std::span<const double> labels) {
    check_sizes(predictions, labels);
    double total = 0.0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        const double d = predictions[i] - labels[i];
        total += d * d;
    }
    return total / static_cast<double>(predictions.size());
}

double log_loss(std::span<const double> predictions, std::span<const double> labels) {
    check_sizes(predictions, labels);
    double total = 0.0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        const double p = std::clamp(predictions[i], kLogLossEpsilon, 1.0 - kLogLossEpsilon);
        total -= labels[i] * std::log(p) + (1.0 - labels[i]) * std::log(1.0 - p);
    }
    return total / static_cast<double>(predictions.size());
}

double ece(std::span<const double> predictions, std::span<const double> labels, std::size_t bins) {
    check_sizes(predictions, labels);
    if (bins == 0) throw Error(ErrorCode::InvalidArgument, "ECE needs at least one bin");
    std::vector<double> count(bins, 0.0), label_sum(bins, 0.0), pred_sum(bins, 0.0);
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        const double p = predictions[i];
        const auto b = std::min(bins - 1, static_cast<std::size_t>(std::max(0.0, p) * static_cast<double>(bins)));
        count[b] += 1.0;
        label_sum[b] += labels[i];
        pred_sum[b] += p;
    }
    const double n = static_cast<double>(predictions.size());
    double total = 0.0;
    for (std::size_t b = 0; b < bins; ++b) {
        if (count[b] == 0.0) continue;
        total += count[b] / n * std::abs(label_sum[b] / count[b] - pred_sum[b] / count[b]);
    }
    return total;
}

double normalized(double value, double baseline) {
    if (baseline == 0.0) return value == 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
    return value / baseline;
}

EvalReport evaluate(std::span<const double> predictions, std::span<const double> labels, double baseline_rate,
                    std::size_t ece_bins) {
    if (!(baseline_rate > 0.0 && baseline_rate < 1.0)) {
        throw Error(ErrorCode::InvalidArgument, fmt::format("baseline rate {} outside (0, 1)", baseline_rate));
    }
    check_sizes(predictions, labels);
    const std::vector<double> baseline(predictions.size(), baseline_rate);

    EvalReport r;
    r.n = predictions.size();
    r.ece_bins = ece_bins;
    r.baseline_rate = baseline_rate;
    try {
        r.auc_roc = auc_roc(predictions, labels);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::SingleClass) throw;
    }
    r.bs = brier(predictions, labels);
    r.ll = log_loss(predictions, labels);
    r.ece = ece(predictions, labels, ece_bins);
    r.nbs = normalized(r.bs, brier(baseline, labels));
    r.nll = normalized(r.ll, log_loss(baseline, labels));
    r.nece = normalized(r.ece, ece(baseline, labels, ece_bins));
    return r;
}

namespace {

struct Column {
    const char* title;
    bool higher_is_better;
    std::optional<double> (*get)(const EvalReport&);
};

const Column kColumns[] = {
    {"AUC-ROC", true, [](const EvalReport& r) { return r.auc_roc; }},
    {"BS", false, [](const EvalReport& r) { return std::optional<double>(r.bs); }},
    {"NBS", false, [](const EvalReport& r) { return std::optional<double>(r.nbs); }},
    {"LL", false, [](const EvalReport& r) { return std::optional<double>(r.ll); }},
    {"NLL", false, [](const EvalReport& r) { return std::optional<double>(r.nll); }},
    {"ECE", false, [](const EvalReport& r) { return std::optional<double>(r.ece); }},
    {"NECE", false, [](const EvalReport& r) { return std::optional<double>(r.nece); }},
};

} // namespace

std::string format_table(std::span<const NamedReport> reports) {
    std::size_t name_width = 8;
    for (const auto& r : reports) name_width = std::max(name_width, r.name.size());

    std::string out = fmt::format("{:<{}}", "Approach", name_width);
    for (const auto& c : kColumns) out += fmt::format(" {:>9}", c.title);
    out += '\n';
    out += std::string(name_width + 10 * std::size(kColumns), '-') + '\n';

    std::vector<std::optional<double>> best(std::size(kColumns));
    for (std::size_t c = 0; c < std::size(kColumns); ++c) {
        for (const auto& r : reports) {
            const auto v = kColumns[c].get(r.report);
            if (!v) continue;
            const auto rounded = std::round(*v * 1e4) / 1e4;
            if (!best[c] || (kColumns[c].higher_is_better ? rounded > *best[c] : rounded < *best[c])) best[c] = rounded;
        }
    }
    for (const auto& r : reports) {
        out += fmt::format("{:<{}}", r.name, name_width);
        for (std::size_t c = 0; c < std::size(kColumns); ++c) {
            const auto v = kColumns[c].get(r.report);
            if (!v) {
                out += fmt::format(" {:>9}", "n/a");
                continue;
            }
            const bool is_best = reports.size() > 1 && best[c] && std::round(*v * 1e4) / 1e4 == *best[c];
            out += fmt::format(" {:>8.4f}{}", *v, is_best ? '*' : ' ');
        }
        out += '\n';
    }
    return out;
}

std::string format_json(std::span<const NamedReport> reports) {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& [name, r] : reports) {
        j.push_back({{"approach", name},
                     {"auc_roc", r.auc_roc ? nlohmann::json(*r.auc_roc) : nlohmann::json(nullptr)},
                     {"bs", r.bs},
                     {"nbs", r.nbs},
                     {"ll", r.ll},
                     {"nll", r.nll},
                     {"ece", r.ece},
                     {"nece", r.nece},
                     {"baseline_rate", r.baseline_rate},
                     {"n", r.n},
                     {"ece_bins", r.ece_bins}});
    }
    return j.dump(2) + "\n";
}

} // namespace xg
