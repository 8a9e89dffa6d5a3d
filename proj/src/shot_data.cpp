#include "xg/shot_data.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include <fmt/format.h>

#include "xg/error.hpp"

namespace xg {

std::string_view to_string(BodyPart part) {
    switch (part) {
    case BodyPart::Foot: return "foot";
    case BodyPart::Head: return "head";
    case BodyPart::Other: return "other";
    }
    return "foot";
}

std::optional<BodyPart> parse_body_part(std::string_view text) {
    std::string lower(text);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (lower == "foot") return BodyPart::Foot;
    if (lower == "head") return BodyPart::Head;
    if (lower == "other") return BodyPart::Other;
    return std::nullopt;
}

void validate(const ShotRecord& shot) {
    if (!std::isfinite(shot.x) || !std::isfinite(shot.y) || !pitch::on_pitch(shot.location())) {
        throw Error(ErrorCode::OutOfRangeCoordinate,
                    fmt::format("location ({}, {}) outside [0,105]x[0,68]", shot.x, shot.y));
    }
    if (shot.is_penalty && shot.body_part != BodyPart::Foot) {
        throw Error(ErrorCode::InvalidValue, "penalty shot must be taken with the foot");
    }
}

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

// Comma-separated fields; a field may be double-quoted with "" as an escaped quote.
std::vector<std::string> split_fields(std::string_view line) {
    std::vector<std::string> fields;
    std::string current;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                current += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                current += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.emplace_back(trim(current));
            current.clear();
        } else {
            current += c;
        }
    }
    fields.emplace_back(trim(current));
    return fields;
}

std::string quote_if_needed(const std::string& s) {
    if (s.find_first_of(",\"") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

double parse_number(std::string_view text, std::string_view column) {
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(value)) {
        throw Error(ErrorCode::InvalidValue,
                    fmt::format("column '{}': '{}' is not a finite number", column, text));
    }
    return value;
}

bool parse_flag(std::string_view text, std::string_view column) {
    if (text == "1") return true;
    if (text == "0") return false;
    throw Error(ErrorCode::InvalidValue,
                fmt::format("column '{}': expected 0 or 1, got '{}'", column, text));
}

constexpr std::string_view kColumns[] = {"x",           "y",      "body_part",
                                         "is_penalty",  "is_goal", "competition",
                                         "season",      "match_id", "player_id"};

} // namespace

std::string IngestionReport::to_text() const {
    std::string out = fmt::format("rows_read={} rows_accepted={} rows_rejected={} "
                                  "outside_attacking_half={}\n",
                                  rows_read, rows_accepted, rejected.size(),
                                  outside_attacking_half.size());
    for (const auto& issue : rejected) {
        out += fmt::format("rejected line={} code={} message=\"{}\"\n", issue.line, issue.code,
                           issue.message);
    }
    for (auto line : outside_attacking_half) {
        out += fmt::format("flag line={} code=OutsideAttackingHalf\n", line);
    }
    return out;
}

CsvLoad load_csv(const std::filesystem::path& path, const CoordSpec& coords, RowPolicy policy) {
    if (!(coords.x_range > 0.0) || !(coords.y_range > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "coordinate ranges must be positive");
    }
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, fmt::format("cannot open '{}'", path.string()));

    std::string line;
    if (!std::getline(in, line)) {
        throw Error(ErrorCode::MissingColumn, fmt::format("'{}' has no header row", path.string()));
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto header = split_fields(line);
    std::map<std::string_view, std::size_t> column_index;
    for (auto name : kColumns) {
        const auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) {
            throw Error(ErrorCode::MissingColumn,
                        fmt::format("'{}' lacks required column '{}'", path.string(), name));
        }
        column_index[name] = static_cast<std::size_t>(it - header.begin());
    }

    CsvLoad result;
    result.dataset.provenance = path.string();
    auto& report = result.report;
    std::size_t data_line = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        ++data_line;
        if (trim(line).empty()) continue;
        ++report.rows_read;
        try {
            const auto fields = split_fields(line);
            if (fields.size() < header.size()) {
                throw Error(ErrorCode::MissingColumn,
                            fmt::format("expected {} fields, found {}", header.size(), fields.size()));
            }
            auto field = [&](std::string_view name) -> const std::string& {
                return fields[column_index.at(name)];
            };
            ShotRecord shot;
            shot.x = parse_number(field("x"), "x") / coords.x_range * pitch::kLength;
            shot.y = parse_number(field("y"), "y") / coords.y_range * pitch::kWidth;
            if (coords.direction == AttackDirection::RightToLeft) {
                shot.x = pitch::kLength - shot.x;
                shot.y = pitch::kWidth - shot.y;
            }
            const auto part = parse_body_part(field("body_part"));
            if (!part) {
                throw Error(ErrorCode::InvalidEnum,
                            fmt::format("unknown body_part '{}'", field("body_part")));
            }
            shot.body_part = *part;
            shot.is_penalty = parse_flag(field("is_penalty"), "is_penalty");
            shot.is_goal = parse_flag(field("is_goal"), "is_goal");
            shot.competition = field("competition");
            shot.season = field("season");
            shot.match_id = field("match_id");
            shot.player_id = field("player_id");
            validate(shot);
            if (shot.x < pitch::kLength / 2.0) report.outside_attacking_half.push_back(data_line);
            result.dataset.records.push_back(std::move(shot));
        } catch (const Error& e) {
            if (policy == RowPolicy::Strict) {
                throw Error(e.code(), fmt::format("{}: line {}: {}", path.string(), data_line, e.what()));
            }
            report.rejected.push_back({data_line, std::string(to_string(e.code())), e.what()});
        }
    }
    report.rows_accepted = result.dataset.size();
    return result;
}

void write_csv(const Dataset& d, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, fmt::format("cannot write '{}'", path.string()));
    out << kCsvHeader << '\n';
    for (const auto& s : d.records) {
        out << fmt::format("{},{},{},{:d},{:d},{},{},{},{}\n", s.x, s.y, to_string(s.body_part),
                           static_cast<int>(s.is_penalty), static_cast<int>(s.is_goal),
                           quote_if_needed(s.competition), quote_if_needed(s.season),
                           quote_if_needed(s.match_id), quote_if_needed(s.player_id));
    }
    if (!out) throw Error(ErrorCode::IoError, fmt::format("write to '{}' failed", path.string()));
}

SeasonSplit split_by_season(const Dataset& d, const std::set<std::string>& test_seasons) {
    SeasonSplit split;
    split.train.provenance = d.provenance + " [train]";
    split.test.provenance = d.provenance + " [test]";
    for (const auto& r : d.records) {
        (test_seasons.contains(r.season) ? split.test : split.train).records.push_back(r);
    }
    if (split.train.empty() || split.test.empty()) {
        throw Error(ErrorCode::EmptyPartition,
                    fmt::format("season split leaves {} empty (train={}, test={})",
                                split.train.empty() ? "train" : "test", split.train.size(),
                                split.test.size()));
    }
    return split;
}

double class_rate(const Dataset& d) {
    if (d.empty()) throw Error(ErrorCode::EmptyDataset, "class rate of an empty dataset");
    const auto goals = std::count_if(d.records.begin(), d.records.end(),
                                     [](const ShotRecord& r) { return r.is_goal; });
    return static_cast<double>(goals) / static_cast<double>(d.size());
}

double SyntheticGroundTruth::probability(const ShotRecord& shot) const {
    if (constant_probability) return *constant_probability;
    if (shot.is_penalty) return penalty_probability;
    double logit = intercept + distance_coef * pitch::distance_to_goal(shot.location()) +
                   angle_coef * pitch::goal_angle(shot.location());
    if (shot.body_part == BodyPart::Head) logit += head_offset;
    if (shot.body_part == BodyPart::Other) logit += other_offset;
    return 1.0 / (1.0 + std::exp(-logit));
}

Dataset generate_synthetic(const SyntheticGroundTruth& gt, std::size_t n) {
    if (n == 0) throw Error(ErrorCode::InvalidArgument, "synthetic dataset size must be >= 1");
    if (gt.constant_probability && !(*gt.constant_probability >= 0.0 && *gt.constant_probability <= 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "constant probability must lie in [0, 1]");
    }
    if (gt.seasons.empty() || gt.competitions.empty()) {
        throw Error(ErrorCode::InvalidArgument, "synthetic generator needs seasons and competitions");
    }
    if (!gt.season_weights.empty() && gt.season_weights.size() != gt.seasons.size()) {
        throw Error(ErrorCode::InvalidArgument, "season_weights must match seasons");
    }

    std::mt19937_64 rng(gt.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::gamma_distribution<double> depth(gt.depth_shape, gt.depth_scale);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const std::vector<double> uniform_weights(gt.seasons.size(), 1.0);
    const auto& sw = gt.season_weights.empty() ? uniform_weights : gt.season_weights;
    std::discrete_distribution<std::size_t> season_pick(sw.begin(), sw.end());
    std::uniform_int_distribution<std::size_t> competition_pick(0, gt.competitions.size() - 1);
    std::uniform_int_distribution<int> player_pick(0, 1999);

    Dataset d;
    d.provenance = fmt::format("synthetic seed={} n={}", gt.seed, n);
    d.records.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        ShotRecord s;
        if (unit(rng) < gt.penalty_share) {
            s.x = pitch::kPenaltySpotX;
            s.y = pitch::kPenaltySpotY;
            s.is_penalty = true;
            s.body_part = BodyPart::Foot;
        } else {
            double dx = 0.0;
            do {
                dx = depth(rng);
            } while (dx > pitch::kLength / 2.0);
            double y = 0.0;
            do {
                y = pitch::kGoalY + (gt.lateral_base + gt.lateral_slope * dx) * gauss(rng);
            } while (y < 0.0 || y > pitch::kWidth);
            s.x = pitch::kLength - dx;
            s.y = y;
            const double head_share =
                pitch::in_penalty_area(s.location()) ? gt.head_share_in_box : gt.head_share_outside;
            const double u = unit(rng);
            s.body_part = u < head_share                   ? BodyPart::Head
                          : u < head_share + gt.other_share ? BodyPart::Other
                                                            : BodyPart::Foot;
        }
        s.season = gt.seasons[season_pick(rng)];
        s.competition = gt.competitions[competition_pick(rng)];
        s.match_id = fmt::format("m{}-{}", gt.seed, i / 25);
        s.player_id = fmt::format("p{}", player_pick(rng));
        s.is_goal = unit(rng) < gt.probability(s);
        d.records.push_back(std::move(s));
    }
    return d;
}

} // namespace xg
