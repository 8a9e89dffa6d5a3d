#include "xg/commands.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>

#include <fmt/format.h>
#include <json.hpp>

#include "xg/error.hpp"
#include "xg/explain.hpp"

namespace xg {

namespace fs = std::filesystem;

std::string_view to_string(Approach a) {
    switch (a) {
    case Approach::SoftZones: return "soft-zones";
    case Approach::HardZones: return "hard-zones";
    case Approach::DistanceAngle: return "distance-angle";
    case Approach::Naive: return "naive";
    }
    return "naive";
}

Approach parse_approach(std::string_view text) {
    for (auto a : {Approach::SoftZones, Approach::HardZones, Approach::DistanceAngle, Approach::Naive}) {
        if (text == to_string(a)) return a;
    }
    throw Error(ErrorCode::InvalidEnum,
                fmt::format("unknown approach '{}' (soft-zones, hard-zones, distance-angle, naive)", text));
}

double naive_prediction(double training_rate) { return sigmoid(logit(training_rate)); }

TrainedApproach train_approach(const Dataset& train, Approach approach, const ApproachOptions& opts) {
    if (train.empty()) throw Error(ErrorCode::EmptyDataset, "training set is empty");
    if (approach == Approach::Naive) {
        const double rate = std::clamp(class_rate(train), 1e-15, 1.0 - 1e-15);
        auto model = constant_model(rate, FeatureSpec(Representation::Constant));
        model.config = opts.train;
        model.report.training_rows = train.size();
        return {std::move(model), std::nullopt};
    }

    TrainedApproach result;
    std::optional<FeatureSpec> spec;
    if (approach == Approach::DistanceAngle) {
        spec.emplace(Representation::DistanceAngle);
    } else {
        ZoneModel table = opts.zone_table ? *opts.zone_table : default_centers();
        if (approach == Approach::HardZones) table = hard_variant(table);
        result.zone_fit = fit_zones(table, train, opts.zone_fit);
        spec.emplace(approach == Approach::HardZones ? Representation::HardZones : Representation::SoftZones,
                     result.zone_fit->model);
    }
    const auto data = featurize_dataset(*spec, train);
    const auto whitelist = spec->uses_zones() ? build_whitelist(*spec) : InteractionWhitelist{};
    result.model = fit_gam(data.features, data.labels, whitelist, opts.train);
    result.model.spec = std::move(spec);
    return result;
}

std::map<std::string, std::string> RunConfig::settings(std::string_view command) const {
    std::map<std::string, std::string> s;
    s["command"] = std::string(command);
    s["seed"] = seed ? std::to_string(*seed) : "";
    auto join_seasons = [](const auto& items) { return fmt::format("{}", fmt::join(items, ";")); };
    if (command == "generate") {
        s["n"] = std::to_string(n);
        s["seasons"] = join_seasons(seasons);
        s["season_weights"] = fmt::format("{}", fmt::join(season_weights, ";"));
        return s;
    }
    s["data"] = data.string();
    s["x_range"] = fmt::format("{}", coords.x_range);
    s["y_range"] = fmt::format("{}", coords.y_range);
    s["attack_direction"] = coords.direction == AttackDirection::LeftToRight ? "left-to-right" : "right-to-left";
    s["row_policy"] = row_policy == RowPolicy::Strict ? "strict" : "skip";
    s["test_seasons"] = join_seasons(test_seasons);
    if (command == "train") {
        s["approach"] = std::string(to_string(approach));
        s["zone_table"] = zone_table ? zone_table->string() : "";
        s["cmeans_iterations"] = std::to_string(cmeans_iterations);
        s["learning_rate"] = fmt::format("{}", train.learning_rate);
        s["max_rounds"] = std::to_string(train.max_rounds);
        s["outer_bags"] = std::to_string(train.outer_bags);
        s["validation_fraction"] = fmt::format("{}", train.validation_fraction);
        s["early_stopping_patience"] = std::to_string(train.early_stopping_patience);
        s["early_stopping_tolerance"] = fmt::format("{}", train.early_stopping_tolerance);
        s["min_hessian"] = fmt::format("{}", train.min_hessian);
        s["max_leaves"] = fmt::format("{}", train.max_leaves);
        s["max_bins_main"] = std::to_string(train.max_bins_main);
        s["max_bins_pair"] = std::to_string(train.max_bins_pair);
    } else if (command == "evaluate") {
        std::vector<std::string> names;
        for (const auto& m : models) names.push_back(m.string());
        s["models"] = join_seasons(names);
        s["baseline_rate"] = baseline_rate ? fmt::format("{}", *baseline_rate) : "";
        s["ece_bins"] = std::to_string(ece_bins);
    } else if (command == "explain") {
        s["model"] = models.empty() ? "" : models.front().string();
        s["local"] = fmt::format("{}", fmt::join(local, ";"));
        s["features"] = join_seasons(features);
        std::vector<std::string> pair_names;
        for (const auto& [a, b] : pairs) pair_names.push_back(a + "&" + b);
        s["pairs"] = join_seasons(pair_names);
        s["reference"] = reference;
    }
    return s;
}

namespace {

void write_text(const fs::path& path, std::string_view text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, fmt::format("cannot write '{}'", path.string()));
    out << text;
    if (!out) throw Error(ErrorCode::IoError, fmt::format("write to '{}' failed", path.string()));
}

void prepare_out(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error(ErrorCode::IoError, fmt::format("cannot create '{}': {}", dir.string(), ec.message()));
}

void write_settings(const fs::path& dir, const std::map<std::string, std::string>& settings) {
    write_text(dir / kConfigFile, nlohmann::json(settings).dump(2) + "\n");
}

std::uint64_t require_seed(const RunConfig& cfg, std::string_view command) {
    if (!cfg.seed) throw Error(ErrorCode::UsageError, fmt::format("{} requires --seed", command));
    return *cfg.seed;
}

Dataset load_data(const RunConfig& cfg) {
    if (cfg.data.empty()) throw Error(ErrorCode::UsageError, "--data is required");
    if (!fs::exists(cfg.data)) throw Error(ErrorCode::IoError, fmt::format("data file '{}' not found", cfg.data.string()));
    return load_csv(cfg.data, cfg.coords, cfg.row_policy).dataset;
}

GamModel load_compatible(const fs::path& path) {
    if (!fs::exists(path)) throw Error(ErrorCode::IoError, fmt::format("model file '{}' not found", path.string()));
    auto model = load_model(path);
    if (!model.spec || model.spec->feature_names() != model.feature_names) {
        throw Error(ErrorCode::IncompatibleArtifact,
                    fmt::format("model '{}' carries no usable feature spec", path.string()));
    }
    return model;
}

std::string shot_id(const Dataset& d, std::size_t i) {
    const auto& r = d.records[i];
    return fmt::format("{}:{}:{}", i, r.match_id, r.player_id);
}

} // namespace

std::string training_report_text(const GamModel& m, const std::optional<ZoneFit>& zone_fit) {
    std::string out;
    out += fmt::format("representation   {}\n", m.spec ? to_string(m.spec->representation()) : "unknown");
    out += fmt::format("training rows    {}\n", m.report.training_rows);
    out += fmt::format("base rate        {:.6f}\n", m.base_rate);
    out += fmt::format("intercept        {:.6f}\n", m.intercept);
    out += fmt::format("main effects     {}\n", m.main_effects.size());
    out += fmt::format("pairwise effects {}\n", m.pairwise_effects.size());
    if (zone_fit) {
        out += fmt::format("c-means          exponent {} iterations {} objective {:.6f} -> {:.6f}\n",
                           zone_fit->model.exponent(), zone_fit->iterations_run,
                           zone_fit->objective.empty() ? 0.0 : zone_fit->objective.front(),
                           zone_fit->objective.empty() ? 0.0 : zone_fit->objective.back());
    }
    for (const auto& w : m.report.warnings) out += fmt::format("warning          {}\n", w);

    auto stage = [&](std::string_view title, const StageReport& s) {
        if (s.rounds_run.empty()) return;
        out += fmt::format("\n{}\n  bag  rounds_run  early_stop_round  best_validation_loss\n", title);
        for (std::size_t b = 0; b < s.rounds_run.size(); ++b) {
            const auto& curve = s.validation_loss[b];
            const double best = curve.empty() ? 0.0 : curve[std::min(s.best_round[b], curve.size() - 1)];
            out += fmt::format("  {:>3}  {:>10}  {:>16}  {:>20.8f}\n", b, s.rounds_run[b], s.best_round[b], best);
        }
        out += "  validation loss (bag 0, every 25 rounds)\n";
        if (!s.validation_loss.empty()) {
            const auto& curve = s.validation_loss.front();
            for (std::size_t r = 0; r < curve.size(); r += 25) out += fmt::format("    {:>5}  {:.8f}\n", r, curve[r]);
        }
    };
    stage("main-effect boosting", m.report.main_stage);
    stage("pairwise boosting", m.report.pair_stage);
    return out;
}

void cmd_generate(const RunConfig& cfg) {
    SyntheticGroundTruth gt;
    gt.seed = require_seed(cfg, "generate");
    gt.seasons = cfg.seasons;
    gt.season_weights = cfg.season_weights;
    const auto d = generate_synthetic(gt, cfg.n);
    prepare_out(cfg.out);
    write_csv(d, cfg.out / kShotsFile);
    std::string truth = "row,p_true\n";
    for (std::size_t i = 0; i < d.size(); ++i) truth += fmt::format("{},{}\n", i, gt.probability(d.records[i]));
    write_text(cfg.out / kGroundTruthFile, truth);
    write_settings(cfg.out, cfg.settings("generate"));
}

GamModel cmd_train(const RunConfig& cfg) {
    ApproachOptions opts;
    opts.train = cfg.train;
    opts.train.seed = require_seed(cfg, "train");
    opts.zone_fit.iterations = cfg.cmeans_iterations;
    if (cfg.zone_table) opts.zone_table = load_zone_table(*cfg.zone_table);

    const auto data = load_data(cfg);
    const Dataset train = cfg.test_seasons.empty() ? data : split_by_season(data, cfg.test_seasons).train;
    auto trained = train_approach(train, cfg.approach, opts);
    trained.model.settings = cfg.settings("train");

    prepare_out(cfg.out);
    save_model(trained.model, cfg.out / kModelFile);
    write_text(cfg.out / kTrainingReportFile, training_report_text(trained.model, trained.zone_fit));
    write_settings(cfg.out, trained.model.settings);
    return trained.model;
}

std::vector<NamedReport> cmd_evaluate(const RunConfig& cfg) {
    if (cfg.models.empty()) throw Error(ErrorCode::UsageError, "evaluate needs at least one --model");
    std::vector<GamModel> models;
    for (const auto& path : cfg.models) models.push_back(load_compatible(path));
    const auto data = load_data(cfg);
    const Dataset test = cfg.test_seasons.empty() ? data : split_by_season(data, cfg.test_seasons).test;
    const double baseline = cfg.baseline_rate ? *cfg.baseline_rate : naive_prediction(models.front().base_rate);

    std::vector<NamedReport> reports;
    for (std::size_t i = 0; i < models.size(); ++i) {
        const auto& m = models[i];
        const auto features = featurize_dataset(*m.spec, test);
        const auto predictions = predict_proba(m, features.features);
        const auto it = m.settings.find("approach");
        std::string name = it != m.settings.end() ? it->second : cfg.models[i].stem().string();
        reports.push_back({std::move(name), evaluate(predictions, features.labels, baseline, cfg.ece_bins)});
    }

    prepare_out(cfg.out);
    write_text(cfg.out / kReportTextFile, format_table(reports));
    write_text(cfg.out / kReportJsonFile, format_json(reports));
    write_settings(cfg.out, cfg.settings("evaluate"));
    return reports;
}

void cmd_explain(const RunConfig& cfg) {
    if (cfg.models.empty()) throw Error(ErrorCode::UsageError, "explain needs --model");
    const auto model = load_compatible(cfg.models.front());
    const auto data = load_data(cfg);

    Dataset reference = data;
    Dataset local_set = data;
    if (!cfg.test_seasons.empty()) {
        auto split = split_by_season(data, cfg.test_seasons);
        if (cfg.reference == "train") reference = split.train;
        else if (cfg.reference == "test") reference = split.test;
        else if (cfg.reference != "all") throw Error(ErrorCode::UsageError, "--reference must be train, test or all");
        local_set = std::move(split.test);
    }
    for (auto i : cfg.local) {
        if (i >= local_set.size()) {
            throw Error(ErrorCode::InvalidArgument,
                        fmt::format("--local {} is out of range ({} shots)", i, local_set.size()));
        }
    }
    std::vector<std::string> features = cfg.features.empty() ? model.feature_names : cfg.features;
    for (const auto& f : features) shape_table(model, f);  // surfaces UnknownFeature before writing anything
    auto pairs = cfg.pairs.empty() ? model.whitelist.pairs : cfg.pairs;
    for (const auto& [a, b] : pairs) interaction_table(model, a, b);

    prepare_out(cfg.out);
    const auto ref = featurize_dataset(*model.spec, reference);
    write_importance_csv(global_importance(model, ref.features), cfg.out / kImportanceFile);

    prepare_out(cfg.out / kShapesDir);
    for (const auto& f : features) {
        write_shape_csv(f, shape_table(model, f), cfg.out / kShapesDir / fmt::format("{}.csv", f));
    }
    if (!pairs.empty()) prepare_out(cfg.out / kInteractionsDir);
    for (const auto& [a, b] : pairs) {
        const auto table = interaction_table(model, a, b);
        write_interaction_csv(table, cfg.out / kInteractionsDir / fmt::format("{}__{}.csv", table.first, table.second));
    }
    if (!cfg.local.empty()) prepare_out(cfg.out / kLocalDir);
    for (auto i : cfg.local) {
        const auto e = explain_local(model, featurize(*model.spec, local_set.records[i]), shot_id(local_set, i));
        write_text(cfg.out / kLocalDir / fmt::format("shot_{}.txt", i), to_text(e));
        write_text(cfg.out / kLocalDir / fmt::format("shot_{}.json", i), to_json(e));
    }
    write_settings(cfg.out, cfg.settings("explain"));
}

} // namespace xg
