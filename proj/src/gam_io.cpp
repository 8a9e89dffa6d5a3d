#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "xg/error.hpp"
#include "xg/gam.hpp"

// Artifact layout (JSON, keys sorted):
//   format            "xgoals-gam"
//   version           integer, currently 1
//   intercept         log-odds
//   base_rate         training goal rate
//   feature_names     ordered feature names
//   feature_spec      {representation, zone_model | null}
//   main_effects      [{features:[name], cuts:[[...]], scores:[...], weights:[...]}]
//   pairwise_effects  same, two features, scores row-major over (first, second)
//   whitelist         [[name, name], ...]
//   train_config      boosting settings
//   training_report   rounds, early-stop rounds and validation curves per bag
//   settings          effective run configuration as strings

namespace xg {

using nlohmann::json;

namespace {

json zone_model_to_json(const ZoneModel& z) {
    json centers = json::array();
    for (std::size_t i = 0; i < kZoneCount; ++i) {
        centers.push_back({{"name", zone_name(i)}, {"x", z.centers()[i].x}, {"y", z.centers()[i].y}});
    }
    json box = json::array();
    for (auto i : z.penalty_area_zones()) box.push_back(zone_name(i));
    return {{"exponent", z.exponent()},
            {"frozen", z.frozen()},
            {"centers", centers},
            {"penalty_area_zones", box},
            {"penalty_spot_zone", zone_name(z.penalty_spot_zone())}};
}

std::size_t zone_index(const std::string& name) {
    for (std::size_t i = 0; i < kZoneCount; ++i) {
        if (zone_name(i) == name) return i;
    }
    throw Error(ErrorCode::CorruptArtifact, fmt::format("unknown zone '{}'", name));
}

ZoneModel zone_model_from_json(const json& j) {
    ZoneCenters centers{};
    const auto& rows = j.at("centers");
    if (rows.size() != kZoneCount) throw Error(ErrorCode::CorruptArtifact, "zone model needs 16 centers");
    for (const auto& row : rows) {
        centers[zone_index(row.at("name").get<std::string>())] = {row.at("x").get<double>(),
                                                                   row.at("y").get<double>()};
    }
    std::vector<std::size_t> box;
    for (const auto& name : j.at("penalty_area_zones")) box.push_back(zone_index(name.get<std::string>()));
    return ZoneModel(centers, j.at("exponent").get<double>(), std::move(box),
                     zone_index(j.at("penalty_spot_zone").get<std::string>()), j.at("frozen").get<bool>());
}

json function_to_json(const BinnedFunction& f, const std::vector<std::string>& names) {
    json features = json::array();
    for (auto i : f.features) features.push_back(names.at(i));
    return {{"features", features}, {"cuts", f.cuts}, {"scores", f.scores}, {"weights", f.weights}};
}

BinnedFunction function_from_json(const json& j, const std::vector<std::string>& names, std::size_t dims) {
    BinnedFunction f;
    for (const auto& name : j.at("features")) {
        const auto it = std::find(names.begin(), names.end(), name.get<std::string>());
        if (it == names.end()) throw Error(ErrorCode::CorruptArtifact, "function references an unknown feature");
        f.features.push_back(static_cast<std::size_t>(it - names.begin()));
    }
    f.cuts = j.at("cuts").get<std::vector<std::vector<double>>>();
    f.scores = j.at("scores").get<std::vector<double>>();
    f.weights = j.at("weights").get<std::vector<double>>();
    std::size_t cells = 1;
    for (const auto& c : f.cuts) {
        if (!std::is_sorted(c.begin(), c.end()) || std::adjacent_find(c.begin(), c.end()) != c.end()) {
            throw Error(ErrorCode::CorruptArtifact, "bin cuts must be strictly increasing");
        }
        cells *= c.size() + 1;
    }
    if (f.features.size() != dims || f.cuts.size() != dims || f.scores.size() != cells ||
        f.weights.size() != cells) {
        throw Error(ErrorCode::CorruptArtifact, "function tables have inconsistent sizes");
    }
    return f;
}

json stage_to_json(const StageReport& s) {
    return {{"rounds_run", s.rounds_run}, {"best_round", s.best_round}, {"validation_loss", s.validation_loss}};
}

StageReport stage_from_json(const json& j) {
    return {j.at("rounds_run").get<std::vector<std::size_t>>(), j.at("best_round").get<std::vector<std::size_t>>(),
            j.at("validation_loss").get<std::vector<std::vector<double>>>()};
}

json config_to_json(const TrainConfig& c) {
    return {{"learning_rate", c.learning_rate},
            {"max_rounds", c.max_rounds},
            {"outer_bags", c.outer_bags},
            {"validation_fraction", c.validation_fraction},
            {"early_stopping_patience", c.early_stopping_patience},
            {"early_stopping_tolerance", c.early_stopping_tolerance},
            {"max_bins_main", c.max_bins_main},
            {"max_bins_pair", c.max_bins_pair},
            {"min_hessian", c.min_hessian},
            {"max_leaves", c.max_leaves},
            {"seed", c.seed}};
}

TrainConfig config_from_json(const json& j) {
    TrainConfig c;
    c.learning_rate = j.at("learning_rate").get<double>();
    c.max_rounds = j.at("max_rounds").get<std::size_t>();
    c.outer_bags = j.at("outer_bags").get<std::size_t>();
    c.validation_fraction = j.at("validation_fraction").get<double>();
    c.early_stopping_patience = j.at("early_stopping_patience").get<std::size_t>();
    c.early_stopping_tolerance = j.at("early_stopping_tolerance").get<double>();
    c.max_bins_main = j.at("max_bins_main").get<std::size_t>();
    c.max_bins_pair = j.at("max_bins_pair").get<std::size_t>();
    c.min_hessian = j.at("min_hessian").get<double>();
    c.max_leaves = j.at("max_leaves").get<std::size_t>();
    c.seed = j.at("seed").get<std::uint64_t>();
    return c;
}

} // namespace

std::string serialize(const GamModel& m) {
    json j;
    j["format"] = kArtifactFormat;
    j["version"] = kArtifactVersion;
    j["intercept"] = m.intercept;
    j["base_rate"] = m.base_rate;
    j["feature_names"] = m.feature_names;
    if (m.spec) {
        j["feature_spec"] = {{"representation", to_string(m.spec->representation())},
                             {"zone_model", m.spec->zone_model() ? zone_model_to_json(*m.spec->zone_model())
                                                                 : json(nullptr)}};
    } else {
        j["feature_spec"] = nullptr;
    }
    j["main_effects"] = json::array();
    for (const auto& f : m.main_effects) j["main_effects"].push_back(function_to_json(f, m.feature_names));
    j["pairwise_effects"] = json::array();
    for (const auto& f : m.pairwise_effects) j["pairwise_effects"].push_back(function_to_json(f, m.feature_names));
    j["whitelist"] = json::array();
    for (const auto& [a, b] : m.whitelist.pairs) j["whitelist"].push_back({a, b});
    j["train_config"] = config_to_json(m.config);
    j["training_report"] = {{"training_rows", m.report.training_rows},
                            {"main_stage", stage_to_json(m.report.main_stage)},
                            {"pair_stage", stage_to_json(m.report.pair_stage)},
                            {"warnings", m.report.warnings}};
    j["settings"] = m.settings;
    return j.dump(1) + "\n";
}

GamModel deserialize(std::string_view artifact) {
    json j;
    try {
        j = json::parse(artifact.begin(), artifact.end());
    } catch (const json::exception& e) {
        throw Error(ErrorCode::CorruptArtifact, fmt::format("model artifact is not valid JSON: {}", e.what()));
    }
    try {
        if (!j.is_object() || j.value("format", "") != kArtifactFormat) {
            throw Error(ErrorCode::CorruptArtifact, "not an xgoals model artifact");
        }
        const int version = j.at("version").get<int>();
        if (version != kArtifactVersion) {
            throw Error(ErrorCode::VersionMismatch,
                        fmt::format("artifact version {} is not supported (expected {})", version, kArtifactVersion));
        }
        GamModel m;
        m.intercept = j.at("intercept").get<double>();
        m.base_rate = j.at("base_rate").get<double>();
        m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
        if (!j.at("feature_spec").is_null()) {
            const auto& spec = j.at("feature_spec");
            std::optional<ZoneModel> zones;
            if (!spec.at("zone_model").is_null()) zones = zone_model_from_json(spec.at("zone_model"));
            m.spec.emplace(parse_representation(spec.at("representation").get<std::string>()), std::move(zones));
            if (m.spec->feature_names() != m.feature_names) {
                throw Error(ErrorCode::CorruptArtifact, "feature spec disagrees with feature_names");
            }
        }
        for (const auto& f : j.at("main_effects")) m.main_effects.push_back(function_from_json(f, m.feature_names, 1));
        for (const auto& f : j.at("pairwise_effects")) {
            m.pairwise_effects.push_back(function_from_json(f, m.feature_names, 2));
        }
        for (const auto& p : j.at("whitelist")) {
            m.whitelist.pairs.emplace_back(p.at(0).get<std::string>(), p.at(1).get<std::string>());
        }
        for (const auto& f : m.pairwise_effects) {
            if (!m.whitelist.contains(m.feature_names[f.features[0]], m.feature_names[f.features[1]])) {
                throw Error(ErrorCode::CorruptArtifact, "pairwise function outside the whitelist");
            }
        }
        m.config = config_from_json(j.at("train_config"));
        const auto& report = j.at("training_report");
        m.report.training_rows = report.at("training_rows").get<std::size_t>();
        m.report.main_stage = stage_from_json(report.at("main_stage"));
        m.report.pair_stage = stage_from_json(report.at("pair_stage"));
        m.report.warnings = report.at("warnings").get<std::vector<std::string>>();
        m.settings = j.at("settings").get<std::map<std::string, std::string>>();
        return m;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::CorruptArtifact, fmt::format("model artifact is malformed: {}", e.what()));
    } catch (const Error& e) {
        if (e.code() == ErrorCode::VersionMismatch || e.code() == ErrorCode::CorruptArtifact) throw;
        throw Error(ErrorCode::CorruptArtifact, fmt::format("model artifact is inconsistent: {}", e.what()));
    }
}

void save_model(const GamModel& m, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, fmt::format("cannot write '{}'", path.string()));
    out << serialize(m);
    if (!out) throw Error(ErrorCode::IoError, fmt::format("write to '{}' failed", path.string()));
}

GamModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, fmt::format("cannot open model '{}'", path.string()));
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return deserialize(buffer.str());
}

} // namespace xg
