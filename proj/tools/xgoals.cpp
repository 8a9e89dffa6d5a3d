// xgoals: generate synthetic shots, train the four expected-goals approaches,
// evaluate them side by side and export explanations.

#include <cstdio>
#include <iostream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "xg/commands.hpp"
#include "xg/error.hpp"

namespace {

void add_data_options(CLI::App& cmd, xg::RunConfig& cfg, std::vector<std::string>& test_seasons,
                      std::string& direction, std::string& policy) {
    cmd.add_option("--data", cfg.data, "Shot CSV file")->required();
    cmd.add_option("--test-season", test_seasons, "Season tag held out as the test set (repeatable)");
    cmd.add_option("--x-range", cfg.coords.x_range, "Input length range mapped onto 105 m");
    cmd.add_option("--y-range", cfg.coords.y_range, "Input width range mapped onto 68 m");
    cmd.add_option("--attack", direction, "Attack direction of the input")
        ->check(CLI::IsMember({"left-to-right", "right-to-left"}));
    cmd.add_option("--rows", policy, "strict: stop at the first bad row; skip: drop bad rows")
        ->check(CLI::IsMember({"strict", "skip"}));
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Explainable expected-goals models with fuzzy pitch zones"};
    app.require_subcommand(1);
    app.set_config("--config", "", "TOML/INI file with option values (flags take precedence)");

    xg::RunConfig cfg;
    std::vector<std::string> test_seasons;
    std::string direction = "left-to-right";
    std::string policy = "strict";
    std::string approach = "soft-zones";
    std::string zone_table;
    std::vector<std::string> pairs;
    std::uint64_t seed = 0;

    auto* generate = app.add_subcommand("generate", "Write a synthetic shot dataset and its ground truth");
    generate->add_option("--seed", seed, "Random seed")->required();
    generate->add_option("--n", cfg.n, "Number of shots")->check(CLI::PositiveNumber);
    generate->add_option("--seasons", cfg.seasons, "Season tags to draw from")->delimiter(',');
    generate->add_option("--season-weights", cfg.season_weights, "Relative season frequencies")->delimiter(',');
    generate->add_option("--out", cfg.out, "Output directory");

    auto* train = app.add_subcommand("train", "Train one approach and write the model artifact");
    add_data_options(*train, cfg, test_seasons, direction, policy);
    train->add_option("--seed", seed, "Random seed")->required();
    train->add_option("--approach", approach, "Approach to train")
        ->check(CLI::IsMember({"soft-zones", "hard-zones", "distance-angle", "naive"}));
    train->add_option("--zone-table", zone_table, "CSV with name,x,y rows overriding the default zone centers")
        ->check(CLI::ExistingFile);
    train->add_option("--cmeans-iterations", cfg.cmeans_iterations, "C-means refinement iterations (0 keeps centers)");
    train->add_option("--learning-rate", cfg.train.learning_rate);
    train->add_option("--max-rounds", cfg.train.max_rounds);
    train->add_option("--outer-bags", cfg.train.outer_bags);
    train->add_option("--validation-fraction", cfg.train.validation_fraction);
    train->add_option("--patience", cfg.train.early_stopping_patience);
    train->add_option("--tolerance", cfg.train.early_stopping_tolerance, "Minimum validation improvement that resets patience");
    train->add_option("--min-hessian", cfg.train.min_hessian);
    train->add_option("--max-leaves", cfg.train.max_leaves);
    train->add_option("--max-bins", cfg.train.max_bins_main);
    train->add_option("--max-pair-bins", cfg.train.max_bins_pair);
    train->add_option("--threads", cfg.train.threads, "Worker threads for bagging (0: all cores)");
    train->add_option("--out", cfg.out, "Output directory");

    auto* evaluate = app.add_subcommand("evaluate", "Score one or more models on the test seasons");
    add_data_options(*evaluate, cfg, test_seasons, direction, policy);
    evaluate->add_option("--model", cfg.models, "Model artifact (repeatable)")->required();
    evaluate->add_option("--baseline-rate", cfg.baseline_rate, "Naive-baseline constant (default: training goal rate)");
    evaluate->add_option("--ece-bins", cfg.ece_bins)->check(CLI::PositiveNumber);
    evaluate->add_option("--out", cfg.out, "Output directory");

    auto* explain = app.add_subcommand("explain", "Export importances, shape tables, interactions and local explanations");
    add_data_options(*explain, cfg, test_seasons, direction, policy);
    explain->add_option("--model", cfg.models, "Model artifact")->required()->expected(1);
    explain->add_option("--local", cfg.local, "Test-set shot index to explain (repeatable)");
    explain->add_option("--feature", cfg.features, "Feature whose shape table to export (default: all)");
    explain->add_option("--pair", pairs, "Pair 'a,b' whose interaction table to export (default: all)");
    explain->add_option("--reference", cfg.reference, "Set used for global importance")
        ->check(CLI::IsMember({"train", "test", "all"}));
    explain->add_option("--out", cfg.out, "Output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::fprintf(stderr, "error: UsageError: %s\n", e.what());
        return 2;
    }

    try {
        if (generate->parsed() || train->parsed()) cfg.seed = seed;
        cfg.test_seasons = {test_seasons.begin(), test_seasons.end()};
        cfg.coords.direction = direction == "left-to-right" ? xg::AttackDirection::LeftToRight
                                                            : xg::AttackDirection::RightToLeft;
        cfg.row_policy = policy == "strict" ? xg::RowPolicy::Strict : xg::RowPolicy::Skip;
        cfg.approach = xg::parse_approach(approach);
        if (!zone_table.empty()) cfg.zone_table = zone_table;
        for (const auto& p : pairs) {
            const auto comma = p.find(',');
            if (comma == std::string::npos) throw xg::Error(xg::ErrorCode::UsageError, "--pair expects 'a,b'");
            cfg.pairs.emplace_back(p.substr(0, comma), p.substr(comma + 1));
        }

        if (generate->parsed()) {
            xg::cmd_generate(cfg);
        } else if (train->parsed()) {
            const auto model = xg::cmd_train(cfg);
            for (const auto& w : model.report.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
        } else if (evaluate->parsed()) {
            const auto reports = xg::cmd_evaluate(cfg);
            std::cout << xg::format_table(reports);
        } else if (explain->parsed()) {
            xg::cmd_explain(cfg);
        }
    } catch (const xg::Error& e) {
        std::fprintf(stderr, "error: %s: %s\n", std::string(xg::to_string(e.code())).c_str(), e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: Internal: %s\n", e.what());
        return 1;
    }
    return 0;
}
