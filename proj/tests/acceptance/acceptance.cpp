// Acceptance suite. Prints one PASS/FAIL line per criterion and exits non-zero
// if any criterion fails. Criterion numbers given on the command line restrict
// the run to those criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <numbers>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include <fmt/format.h>

#include "xg/commands.hpp"
#include "xg/explain.hpp"
#include "xg/features.hpp"
#include "xg/gam.hpp"
#include "xg/metrics.hpp"
#include "xg/pitch.hpp"
#include "xg/shot_data.hpp"
#include "xg/zones.hpp"

namespace fs = std::filesystem;
using namespace xg;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// ---------------------------------------------------------------------------
// Brute-force metric oracles
// ---------------------------------------------------------------------------

double oracle_auc(const std::vector<double>& p, const std::vector<double>& y) {
    double wins = 0.0, pairs = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (y[i] != 1.0) continue;
        for (std::size_t j = 0; j < p.size(); ++j) {
            if (y[j] != 0.0) continue;
            pairs += 1.0;
            if (p[i] > p[j]) wins += 1.0;
            else if (p[i] == p[j]) wins += 0.5;
        }
    }
    return wins / pairs;
}

double oracle_brier(const std::vector<double>& p, const std::vector<double>& y) {
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) s += (y[i] - p[i]) * (y[i] - p[i]);
    return s / static_cast<double>(p.size());
}

double oracle_log_loss(const std::vector<double>& p, const std::vector<double>& y) {
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double q = std::min(std::max(p[i], 1e-15), 1.0 - 1e-15);
        s += y[i] == 1.0 ? -std::log(q) : -std::log(1.0 - q);
    }
    return s / static_cast<double>(p.size());
}

double oracle_ece(const std::vector<double>& p, const std::vector<double>& y, int bins) {
    double total = 0.0;
    for (int b = 0; b < bins; ++b) {
        const double lo = static_cast<double>(b) / bins;
        const double hi = static_cast<double>(b + 1) / bins;
        double n = 0.0, ys = 0.0, ps = 0.0;
        for (std::size_t i = 0; i < p.size(); ++i) {
            const bool inside = b == bins - 1 ? p[i] >= lo : (p[i] >= lo && p[i] < hi);
            if (!inside) continue;
            n += 1.0;
            ys += y[i];
            ps += p[i];
        }
        if (n > 0.0) total += n / static_cast<double>(p.size()) * std::abs(ys / n - ps / n);
    }
    return total;
}

Outcome metric_oracles() {
    const auto start = std::chrono::steady_clock::now();
    std::mt19937_64 rng(1);
    std::uniform_int_distribution<int> size(2, 200);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<int> grid(0, 64);
    double worst = 0.0;
    for (int instance = 0; instance < 1000; ++instance) {
        const auto n = static_cast<std::size_t>(size(rng));
        // Every other instance draws from a coarse grid so ties occur.
        const bool tied = instance % 2 == 1;
        const double rate = unit(rng);
        std::vector<double> p(n), y(n);
        for (std::size_t i = 0; i < n; ++i) {
            p[i] = tied ? grid(rng) / 64.0 : unit(rng);
            y[i] = unit(rng) < rate ? 1.0 : 0.0;
        }
        y[0] = 1.0;
        y[1] = 0.0;
        worst = std::max(worst, std::abs(auc_roc(p, y) - oracle_auc(p, y)));
        worst = std::max(worst, std::abs(brier(p, y) - oracle_brier(p, y)));
        worst = std::max(worst, std::abs(log_loss(p, y) - oracle_log_loss(p, y)));
        worst = std::max(worst, std::abs(ece(p, y, 10) - oracle_ece(p, y, 10)));
    }
    const double elapsed = seconds_since(start);
    return {worst <= 1e-12 && elapsed < 10.0,
            fmt::format("max |metric - oracle| {:.3g} over 1000 instances, {:.2f} s", worst, elapsed)};
}

// ---------------------------------------------------------------------------

Outcome table_consistency() {
    struct Pair {
        const char* name;
        double value, baseline, expected;
    };
    const Pair pairs[] = {{"NBS", 0.0825, 0.1016, 0.8120},
                          {"NLL", 0.2869, 0.3567, 0.8043},
                          {"NECE", 0.0020, 0.0095, 0.2105}};
    bool ok = true;
    std::string detail;
    for (const auto& p : pairs) {
        const double q = normalized(p.value, p.baseline);
        const double rounded = std::round(q * 1e4) / 1e4;
        ok = ok && std::abs(rounded - p.expected) < 1e-9;
        detail += fmt::format("{} {:.4f}/{:.4f} = {:.4f}; ", p.name, p.value, p.baseline, rounded);
    }
    detail.resize(detail.size() - 2);
    return {ok, detail};
}

// ---------------------------------------------------------------------------

Outcome naive_closed_forms() {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> unit(0.01, 0.99);
    double worst = 0.0;
    bool self_one = true;
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 1000;
        const auto goals = static_cast<std::size_t>(unit(rng) * n);
        const double r = static_cast<double>(goals) / n;
        const double p = unit(rng);
        std::vector<double> y(n, 0.0), pred(n, p);
        std::fill(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(goals), 1.0);
        const double bs = r * (1 - p) * (1 - p) + (1 - r) * p * p;
        const double ll = -(r * std::log(p) + (1 - r) * std::log(1 - p));
        worst = std::max({worst, std::abs(brier(pred, y) - bs), std::abs(log_loss(pred, y) - ll)});
        const auto report = evaluate(pred, y, p);
        self_one = self_one && report.nbs == 1.0 && report.nll == 1.0 && report.nece == 1.0;
    }

    // The trained naive approach must normalize to exactly one against the
    // baseline the evaluate command derives from it.
    SyntheticGroundTruth gt;
    gt.seed = 5;
    const auto data = generate_synthetic(gt, 5000);
    const auto naive = train_approach(data, Approach::Naive, {}).model;
    const auto x = featurize_dataset(*naive.spec, data);
    const auto pred = predict_proba(naive, x.features);
    const auto report = evaluate(pred, x.labels, naive_prediction(naive.base_rate));
    const bool model_one = report.nbs == 1.0 && report.nll == 1.0 && report.nece == 1.0;

    return {worst <= 1e-12 && self_one && model_one,
            fmt::format("max closed-form error {:.3g}; self-normalized metrics exactly 1: {}; naive model: "
                        "NBS {} NLL {} NECE {}",
                        worst, self_one ? "yes" : "no", report.nbs, report.nll, report.nece)};
}

// ---------------------------------------------------------------------------

Outcome membership_suite() {
    const auto start = std::chrono::steady_clock::now();
    const auto soft = default_centers();
    const auto hard = hard_variant(soft);
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> ux(0.0, pitch::kLength), uy(0.0, pitch::kWidth);
    double worst_sum = 0.0;
    bool in_unit = true;
    std::size_t argmax_mismatch = 0;
    for (int i = 0; i < 100000; ++i) {
        const pitch::Point p{ux(rng), uy(rng)};
        for (const auto* z : {&soft, &hard}) {
            const auto u = z->membership(p);
            double sum = 0.0;
            for (double v : u) {
                sum += v;
                in_unit = in_unit && v >= 0.0 && v <= 1.0;
            }
            worst_sum = std::max(worst_sum, std::abs(sum - 1.0));
        }
        const auto u = hard.membership(p);
        const auto argmax = static_cast<std::size_t>(std::distance(u.begin(), std::max_element(u.begin(), u.end())));
        std::size_t nearest = 0;
        for (std::size_t k = 1; k < kZoneCount; ++k) {
            if (pitch::squared_distance(hard.centers()[k], p) < pitch::squared_distance(hard.centers()[nearest], p)) {
                nearest = k;
            }
        }
        if (argmax != nearest) ++argmax_mismatch;
    }
    const double elapsed = seconds_since(start);
    return {worst_sum <= 1e-9 && in_unit && argmax_mismatch == 0 && elapsed < 5.0,
            fmt::format("max |sum - 1| {:.3g}; all in [0,1]: {}; hard argmax mismatches {}; {:.2f} s", worst_sum,
                        in_unit ? "yes" : "no", argmax_mismatch, elapsed)};
}

// ---------------------------------------------------------------------------

Outcome cmeans_monotone() {
    SyntheticGroundTruth gt;
    gt.seed = 10;
    const auto data = generate_synthetic(gt, 10000);
    ZoneFitOptions opts;
    opts.iterations = 1000;
    opts.tolerance = 0.0;
    const auto fit = fit_zones(default_centers(), data, opts);
    std::size_t increases = 0;
    double worst = 0.0;
    for (std::size_t i = 1; i < fit.objective.size(); ++i) {
        const double rise = fit.objective[i] - fit.objective[i - 1];
        if (rise > 0.0) {
            ++increases;
            worst = std::max(worst, rise);
        }
    }
    return {fit.iterations_run == 1000 && increases == 0,
            fmt::format("{} iterations, objective {:.6f} -> {:.6f}, {} increases (largest {:.3g})",
                        fit.iterations_run, fit.objective.front(), fit.objective.back(), increases, worst)};
}

// ---------------------------------------------------------------------------
// Shared synthetic benchmark: 150k training shots over three seasons and
// 40k test shots in a fourth, drawn from the default ground truth.
// ---------------------------------------------------------------------------

struct Benchmark {
    SeasonSplit split;
    std::vector<double> p_true;  // ground truth on the test split
    GamModel soft, hard, distance;
    double train_seconds = 0.0;
};

const Benchmark& benchmark() {
    static std::optional<Benchmark> cache;
    if (cache) return *cache;
    const auto start = std::chrono::steady_clock::now();
    SyntheticGroundTruth train_gt;
    train_gt.seed = 2021;
    train_gt.seasons = {"2017/2018", "2018/2019", "2019/2020"};
    SyntheticGroundTruth test_gt = train_gt;
    test_gt.seed = 2022;
    test_gt.seasons = {"2020/2021"};

    Dataset all = generate_synthetic(train_gt, 150000);
    const auto test_part = generate_synthetic(test_gt, 40000);
    all.records.insert(all.records.end(), test_part.records.begin(), test_part.records.end());

    Benchmark b;
    b.split = split_by_season(all, {"2020/2021"});
    for (const auto& r : b.split.test.records) b.p_true.push_back(test_gt.probability(r));
    ApproachOptions opts;
    b.soft = train_approach(b.split.train, Approach::SoftZones, opts).model;
    b.hard = train_approach(b.split.train, Approach::HardZones, opts).model;
    b.distance = train_approach(b.split.train, Approach::DistanceAngle, opts).model;
    b.train_seconds = seconds_since(start);
    cache = std::move(b);
    return *cache;
}

EvalReport score_on_test(const GamModel& m, const Benchmark& b) {
    const auto x = featurize_dataset(*m.spec, b.split.test);
    return evaluate(predict_proba(m, x.features), x.labels, naive_prediction(m.base_rate));
}

Outcome benchmark_ordering() {
    const auto& b = benchmark();
    const auto soft = score_on_test(b.soft, b);
    const auto hard = score_on_test(b.hard, b);
    const auto distance = score_on_test(b.distance, b);
    const bool ok = b.split.train.size() == 150000 && b.split.test.size() == 40000 && soft.ll < hard.ll &&
                    soft.ece < hard.ece && soft.ll - distance.ll < 0.01 && b.train_seconds < 600.0;
    return {ok, fmt::format("LL soft {:.5f} hard {:.5f} dist-angle {:.5f}; ECE soft {:.5f} hard {:.5f}; "
                            "{}/{} shots; trained in {:.0f} s",
                            soft.ll, hard.ll, distance.ll, soft.ece, hard.ece, b.split.train.size(),
                            b.split.test.size(), b.train_seconds)};
}

Outcome bayes_gap() {
    const auto& b = benchmark();
    const auto soft = score_on_test(b.soft, b);
    std::vector<double> labels;
    for (const auto& r : b.split.test.records) labels.push_back(r.is_goal ? 1.0 : 0.0);
    const double bayes = log_loss(b.p_true, labels);
    const double gap = soft.ll - bayes;
    return {gap < 0.02 && soft.ece < 0.01,
            fmt::format("soft LL {:.5f} - Bayes LL {:.5f} = {:.5f}; soft ECE {:.5f}", soft.ll, bayes, gap, soft.ece)};
}

Outcome additivity() {
    const auto& b = benchmark();
    SyntheticGroundTruth gt;
    gt.seed = 8;
    const auto shots = generate_synthetic(gt, 10000);
    double worst = 0.0;
    for (std::size_t i = 0; i < shots.size(); ++i) {
        const auto v = featurize(*b.soft.spec, shots.records[i]);
        const auto e = explain_local(b.soft, v);
        worst = std::max(worst, std::abs(logit(predict_proba(b.soft, v)) - e.reconstructed_score()));
    }
    return {worst < 1e-12, fmt::format("max |logit(p) - (intercept + sum of contributions)| {:.3g} over 10000 shots",
                                       worst)};
}

Outcome whitelist_conformance() {
    const auto& m = benchmark().soft;
    const auto& zones = *m.spec->zone_model();
    std::set<std::string> box;
    for (auto z : zones.penalty_area_zones()) box.insert(zone_name(z));
    const auto expected = build_whitelist(*m.spec);

    std::set<std::pair<std::string, std::string>> fitted;
    std::size_t outside = 0;
    for (const auto& f : m.pairwise_effects) {
        const auto& a = m.feature_names[f.features[0]];
        const auto& b = m.feature_names[f.features[1]];
        fitted.emplace(a, b);
        for (const auto& name : {a, b}) {
            if (name.rfind("zone_", 0) == 0 && !box.contains(name)) ++outside;
        }
    }
    const std::set<std::pair<std::string, std::string>> listed(expected.pairs.begin(), expected.pairs.end());
    std::size_t drifted = 0;
    for (auto z : zones.penalty_area_zones()) {
        if (!pitch::in_penalty_area(zones.centers()[z])) ++drifted;
    }
    const bool ok = m.pairwise_effects.size() == 25 && fitted == listed && m.whitelist == expected && outside == 0;
    return {ok, fmt::format("{} pairwise functions, {} distinct, match enumeration: {}, outside penalty area: {}"
                            " (refined centers of {} penalty-area zones now lie outside it)",
                            m.pairwise_effects.size(), fitted.size(), fitted == listed ? "yes" : "no", outside,
                            drifted)};
}

Outcome smoothness() {
    const auto& b = benchmark();
    std::vector<pitch::Point> centers;
    for (const auto* m : {&b.soft, &b.hard}) {
        const auto& c = m->spec->zone_model()->centers();
        centers.insert(centers.end(), c.begin(), c.end());
    }
    auto clear_of_centers = [&](pitch::Point p) {
        return std::all_of(centers.begin(), centers.end(),
                           [&](const pitch::Point& c) { return pitch::squared_distance(c, p) >= 0.25; });
    };

    std::mt19937_64 rng(10);
    std::uniform_int_distribution<std::size_t> pick(0, b.split.test.size() - 1);
    std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
    double soft_worst = 0.0, hard_worst = 0.0;
    std::size_t soft_violations = 0, hard_violations = 0, used = 0;
    while (used < 1000) {
        ShotRecord a = b.split.test.records[pick(rng)];
        if (a.is_penalty) continue;
        const double t = angle(rng);
        ShotRecord c = a;
        c.x = a.x + 0.1 * std::cos(t);
        c.y = a.y + 0.1 * std::sin(t);
        const pitch::Point pa{a.x, a.y}, pc{c.x, c.y};
        if (!pitch::on_pitch(pc) || !clear_of_centers(pa) || !clear_of_centers(pc)) continue;
        ++used;
        auto gap = [&](const GamModel& m) {
            return std::abs(predict_proba(m, featurize(*m.spec, a)) - predict_proba(m, featurize(*m.spec, c)));
        };
        const double s = gap(b.soft);
        soft_worst = std::max(soft_worst, s);
        if (s >= 0.05) ++soft_violations;
        const double h = gap(b.hard);
        hard_worst = std::max(hard_worst, h);
        if (h >= 0.05) ++hard_violations;
    }
    return {soft_worst < 0.05,
            fmt::format("soft max {:.4f} with {} pairs >= 0.05; hard max {:.4f} with {} pairs >= 0.05",
                        soft_worst, soft_violations, hard_worst, hard_violations)};
}

// ---------------------------------------------------------------------------

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

// Generate, train, evaluate and explain under `root`, using relative paths so
// the echoed configuration is identical between runs.
void pipeline(const fs::path& root) {
    fs::remove_all(root);
    fs::create_directories(root);
    const auto cwd = fs::current_path();
    fs::current_path(root);
    RunConfig cfg;
    cfg.seed = 11;
    cfg.n = 20000;
    cfg.out = "gen";
    cmd_generate(cfg);

    cfg.data = "gen/shots.csv";
    cfg.test_seasons = {"2020/2021"};
    cfg.out = "train";
    cmd_train(cfg);

    cfg.models = {"train/model.json"};
    cfg.out = "eval";
    cmd_evaluate(cfg);

    cfg.local = {0, 1, 2};
    cfg.out = "explain";
    cmd_explain(cfg);
    fs::current_path(cwd);
}

Outcome determinism() {
    const auto base = fs::temp_directory_path() / fmt::format("xgoals-acceptance-{}", ::getpid());
    pipeline(base / "a");
    pipeline(base / "b");
    std::size_t files = 0, differing = 0;
    std::set<fs::path> seen;
    for (const auto& side : {base / "a", base / "b"}) {
        for (const auto& entry : fs::recursive_directory_iterator(side)) {
            if (entry.is_regular_file()) seen.insert(fs::relative(entry.path(), side));
        }
    }
    for (const auto& rel : seen) {
        ++files;
        const auto pa = base / "a" / rel, pb = base / "b" / rel;
        if (!fs::exists(pa) || !fs::exists(pb) || read_file(pa) != read_file(pb)) ++differing;
    }
    fs::remove_all(base);
    const bool has_model = seen.contains(fs::path("train") / "model.json");
    return {files > 0 && has_model && differing == 0,
            fmt::format("{} files compared across two runs, {} differ", files, differing)};
}

struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
};

} // namespace

int main(int argc, char** argv) {
    const std::vector<Criterion> criteria{
        {1, "metric-oracle equivalence", metric_oracles},
        {2, "normalization consistency", table_consistency},
        {3, "naive-baseline closed forms", naive_closed_forms},
        {4, "membership suite", membership_suite},
        {5, "c-means monotonicity", cmeans_monotone},
        {6, "synthetic benchmark ordering", benchmark_ordering},
        {7, "Bayes gap", bayes_gap},
        {8, "additive faithfulness", additivity},
        {9, "whitelist conformance", whitelist_conformance},
        {10, "smoothness robustness", smoothness},
        {11, "determinism", determinism},
    };
    std::set<int> only;
    for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

    int failures = 0;
    for (const auto& c : criteria) {
        if (!only.empty() && !only.contains(c.id)) continue;
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, fmt::format("exception: {}", e.what())};
        }
        if (!o.pass) ++failures;
        fmt::print("criterion {:>2} {} {}: {}\n", c.id, o.pass ? "PASS" : "FAIL", c.name, o.detail);
        std::fflush(stdout);
    }
    fmt::print("{} criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
