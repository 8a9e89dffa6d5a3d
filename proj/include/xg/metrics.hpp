#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace xg {

inline constexpr double kLogLossEpsilon = 1e-15;
inline constexpr std::size_t kDefaultEceBins = 10;

/// Mann-Whitney AUC with average ranks for ties. Throws SingleClass unless
/// both labels occur.
double auc_roc(std::span<const double> predictions, std::span<const double> labels);
double brier(std::span<const double> predictions, std::span<const double> labels);
/// Predictions are clipped to [1e-15, 1 - 1e-15] before the logarithm.
double log_loss(std::span<const double> predictions, std::span<const double> labels);
/// Equal-width bins over [0, 1]; empty bins are skipped.
double ece(std::span<const double> predictions, std::span<const double> labels,
           std::size_t bins = kDefaultEceBins);

/// metric / baseline metric; 0 / 0 counts as 1 and x / 0 as +inf.
double normalized(double value, double baseline);

struct EvalReport {
    std::optional<double> auc_roc;  // absent when the labels hold a single class
    double bs = 0.0;
    double nbs = 0.0;
    double ll = 0.0;
    double nll = 0.0;
    double ece = 0.0;
    double nece = 0.0;
    double baseline_rate = 0.0;
    std::size_t n = 0;
    std::size_t ece_bins = kDefaultEceBins;
};

/// All seven metrics; the normalized ones divide by the same metric of the
/// constant predictor `baseline_rate` on the same labels.
EvalReport evaluate(std::span<const double> predictions, std::span<const double> labels,
                    double baseline_rate, std::size_t ece_bins = kDefaultEceBins);

struct NamedReport {
    std::string name;
    EvalReport report;
};

/// Fixed-width table in the column order AUC-ROC, BS, NBS, LL, NLL, ECE,
/// NECE; the best value per column carries a trailing '*'.
std::string format_table(std::span<const NamedReport> reports);
/// JSON document with one object per report.
std::string format_json(std::span<const NamedReport> reports);

} // namespace xg
