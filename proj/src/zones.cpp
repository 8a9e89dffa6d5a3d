#include "xg/zones.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include <fmt/format.h>

#include "xg/error.hpp"

namespace xg {

namespace {

constexpr double kCoincident = 1e-24;  // squared distance, i.e. 1e-12 m

void check_exponent(double m) {
    if (!(m > 1.0) || !std::isfinite(m)) {
        throw Error(ErrorCode::InvalidArgument, fmt::format("membership exponent must be > 1, got {}", m));
    }
}

// Shared membership kernel. Returns sum_i u_i^m d_i^2 for the point.
double membership_kernel(std::span<const pitch::Point> centers, pitch::Point p, double exponent, std::span<double> out) {
    const std::size_t k = centers.size();
    const double m = exponent;
    double d2[kZoneCount * 4];
    std::vector<double> spill;
    double* dist = d2;
    if (k > std::size(d2)) {
        spill.resize(k);
        dist = spill.data();
    }
    for (std::size_t i = 0; i < k; ++i) {
        const double dx = centers[i].x - p.x;
        const double dy = centers[i].y - p.y;
        dist[i] = dx * dx + dy * dy;
        if (dist[i] < kCoincident) {
            std::fill(out.begin(), out.end(), 0.0);
            out[i] = 1;
            return 0;
        }
    }
    if (exponent == 2.0) {
        double total = 0;
        for (std::size_t i = 0; i < k; ++i) {
            out[i] = 1 / dist[i];
            total += out[i];
        }
        double objective = 0;
        for (std::size_t i = 0; i < k; ++i) {
            out[i] /= total;
            objective += out[i] * out[i] * dist[i];
        }
        return objective;
    }
    // u_i = softmax_i(-ln(d_i^2) / (m - 1)). Terms more than 746 below the top
    // exponentiate to zero, so they are skipped without log/exp/pow.
    const double underflow = 746.0;
    const double scale = 1 / (m - 1);
    const double nearest = *std::min_element(dist, dist + k);
    const double cutoff = nearest * std::exp(underflow / scale);
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < k; ++i) {
        if (dist[i] > cutoff) continue;
        out[i] = -scale * std::log(dist[i]);
        top = std::max(top, out[i]);
    }
    double total = 0;
    for (std::size_t i = 0; i < k; ++i) {
        out[i] = dist[i] > cutoff ? 0.0 : std::exp(out[i] - top);
        total += out[i];
    }
    double objective = 0;
    for (std::size_t i = 0; i < k; ++i) {
        if (out[i] == 0) continue;
        out[i] /= total;
        objective += std::pow(out[i], m) * dist[i];
    }
    return objective;
}

} // namespace

std::string zone_name(std::size_t index) { return fmt::format("zone_{}", index + 1); }

void fuzzy_membership(std::span<const pitch::Point> centers, pitch::Point p, double exponent,
                      std::span<double> out) {
    check_exponent(exponent);
    if (centers.empty() || out.size() != centers.size()) {
        throw Error(ErrorCode::DimensionMismatch, "membership output must match the center count");
    }
    membership_kernel(centers, p, exponent, out);
}

ZoneModel::ZoneModel(const ZoneCenters& centers, double exponent,
                     std::vector<std::size_t> penalty_area_zones, std::size_t penalty_spot_zone,
                     bool frozen)
    : centers_(centers), exponent_(exponent), penalty_area_zones_(std::move(penalty_area_zones)),
      penalty_spot_zone_(penalty_spot_zone), frozen_(frozen) {
    check_exponent(exponent_);
    for (const auto& c : centers_) {
        if (!std::isfinite(c.x) || !std::isfinite(c.y) || !pitch::on_pitch(c)) {
            throw Error(ErrorCode::OutOfRangeCoordinate,
                        fmt::format("zone center ({}, {}) is off the pitch", c.x, c.y));
        }
    }
    std::sort(penalty_area_zones_.begin(), penalty_area_zones_.end());
    const bool unique =
        std::adjacent_find(penalty_area_zones_.begin(), penalty_area_zones_.end()) ==
        penalty_area_zones_.end();
    if (penalty_area_zones_.size() != kPenaltyAreaZoneCount || !unique ||
        penalty_area_zones_.back() >= kZoneCount) {
        throw Error(ErrorCode::InvalidArgument,
                    fmt::format("exactly {} distinct penalty-area zones required, got {}",
                                kPenaltyAreaZoneCount, penalty_area_zones_.size()));
    }
    if (!std::binary_search(penalty_area_zones_.begin(), penalty_area_zones_.end(), penalty_spot_zone_)) {
        throw Error(ErrorCode::InvalidArgument, "penalty-spot zone must be a penalty-area zone");
    }
}

ZoneModel ZoneModel::from_centers(const ZoneCenters& centers, double exponent) {
    std::vector<std::size_t> in_box;
    for (std::size_t i = 0; i < kZoneCount; ++i) {
        if (pitch::in_penalty_area(centers[i])) in_box.push_back(i);
    }
    std::size_t spot = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < kZoneCount; ++i) {
        const double d = pitch::squared_distance(centers[i], {pitch::kPenaltySpotX, pitch::kPenaltySpotY});
        if (d < best) {
            best = d;
            spot = i;
        }
    }
    return ZoneModel(centers, exponent, std::move(in_box), spot, false);
}

Membership ZoneModel::membership(pitch::Point p) const {
    Membership u{};
    membership_kernel(centers_, p, exponent_, std::span<double>(u));
    return u;
}

std::size_t ZoneModel::nearest_zone(pitch::Point p) const {
    std::size_t best = 0;
    for (std::size_t i = 1; i < kZoneCount; ++i) {
        if (pitch::squared_distance(centers_[i], p) < pitch::squared_distance(centers_[best], p)) best = i;
    }
    return best;
}

ZoneModel ZoneModel::with_exponent(double exponent) const {
    return ZoneModel(centers_, exponent, penalty_area_zones_, penalty_spot_zone_, frozen_);
}

ZoneModel ZoneModel::with_centers(const ZoneCenters& centers, bool frozen) const {
    return ZoneModel(centers, exponent_, penalty_area_zones_, penalty_spot_zone_, frozen);
}

ZoneModel default_centers() {
    // clang-format off
    const ZoneCenters centers{{
        {101.0, 34.0},  // zone_1   six-yard box, central
        {100.0, 25.0},  // zone_2   beside the six-yard box, left
        {100.0, 43.0},  // zone_3   beside the six-yard box, right
        {96.0, 17.5},   // zone_4   deep channel, left
        {96.0, 50.5},   // zone_5   deep channel, right
        {94.5, 34.0},   // zone_6   penalty spot
        {91.5, 25.0},   // zone_7   left of the spot
        {91.5, 43.0},   // zone_8   right of the spot
        {84.0, 34.0},   // zone_9   edge of the area, central
        {84.0, 18.0},   // zone_10  outside the area, left
        {84.0, 50.0},   // zone_11  outside the area, right
        {105.0, 31.0},  // zone_12  goal line, near post (left)
        {105.0, 37.0},  // zone_13  goal line, near post (right)
        {73.0, 34.0},   // zone_14  long range
        {105.0, 20.0},  // zone_15  goal line, wide left
        {105.0, 48.0},  // zone_16  goal line, wide right
    }};
    // clang-format on
    return ZoneModel::from_centers(centers, kSoftExponent);
}

double fuzzy_objective(std::span<const pitch::Point> centers, std::span<const pitch::Point> points,
                       double exponent) {
    check_exponent(exponent);
    std::vector<double> u(centers.size());
    long double total = 0;
    for (const auto& p : points) total += membership_kernel(centers, p, exponent, std::span<double>(u));
    return static_cast<double>(total);
}

ZoneFit fit_zones(const ZoneModel& z, std::span<const pitch::Point> points, const ZoneFitOptions& opts) {
    if (z.frozen()) throw Error(ErrorCode::InvalidArgument, "zone model is already frozen");
    if (points.empty()) throw Error(ErrorCode::EmptyDataset, "c-means fit needs at least one shot");

    const double m = z.exponent();
    ZoneCenters centers = z.centers();
    ZoneFit result{z.with_centers(centers, true), 0, {}};
    if (opts.iterations == 0) return result;

    result.objective.reserve(opts.iterations + 1);
    std::array<double, kZoneCount> u{};
    for (std::size_t it = 0; it < opts.iterations; ++it) {
        std::array<long double, kZoneCount> wx{}, wy{}, w{};
        long double objective = 0;
        for (const auto& p : points) {
            objective += membership_kernel(centers, p, m, std::span<double>(u));
            for (std::size_t i = 0; i < kZoneCount; ++i) {
                if (u[i] == 0.0) continue;
                const long double um = m == 2.0 ? u[i] * u[i] : std::pow(u[i], m);
                w[i] += um;
                wx[i] += um * p.x;
                wy[i] += um * p.y;
            }
        }
        result.objective.push_back(static_cast<double>(objective));

        double shift = 0.0;
        for (std::size_t i = 0; i < kZoneCount; ++i) {
            if (!(w[i] > 0)) continue;
            const pitch::Point next{static_cast<double>(wx[i] / w[i]), static_cast<double>(wy[i] / w[i])};
            shift = std::max(shift, std::sqrt(pitch::squared_distance(next, centers[i])));
            centers[i] = next;
        }
        result.iterations_run = it + 1;
        if (shift < opts.tolerance) break;
    }
    result.objective.push_back(fuzzy_objective(centers, points, m));
    result.model = z.with_centers(centers, true);
    return result;
}

ZoneFit fit_zones(const ZoneModel& z, const Dataset& train, const ZoneFitOptions& opts) {
    std::vector<pitch::Point> points;
    points.reserve(train.size());
    for (const auto& r : train.records) points.push_back(r.location());
    return fit_zones(z, points, opts);
}

ZoneModel hard_variant(const ZoneModel& z) { return z.with_exponent(kHardExponent); }

ZoneModel load_zone_table(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, fmt::format("cannot open zone table '{}'", path.string()));
    std::string line;
    std::getline(in, line);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "name,x,y") {
        throw Error(ErrorCode::MissingColumn,
                    fmt::format("zone table '{}' must start with header name,x,y", path.string()));
    }
    std::map<std::string, pitch::Point> rows;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string name, xs, ys;
        std::getline(ss, name, ',');
        std::getline(ss, xs, ',');
        std::getline(ss, ys, ',');
        try {
            rows[name] = {std::stod(xs), std::stod(ys)};
        } catch (const std::exception&) {
            throw Error(ErrorCode::InvalidValue,
                        fmt::format("zone table '{}': line {}: bad coordinates", path.string(), line_no));
        }
    }
    ZoneCenters centers{};
    for (std::size_t i = 0; i < kZoneCount; ++i) {
        const auto it = rows.find(zone_name(i));
        if (it == rows.end()) {
            throw Error(ErrorCode::MissingColumn,
                        fmt::format("zone table '{}' lacks {}", path.string(), zone_name(i)));
        }
        centers[i] = it->second;
    }
    if (rows.size() != kZoneCount) {
        throw Error(ErrorCode::InvalidValue,
                    fmt::format("zone table '{}' must list exactly {} zones", path.string(), kZoneCount));
    }
    return ZoneModel::from_centers(centers, kSoftExponent);
}

void save_zone_table(const ZoneModel& z, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, fmt::format("cannot write '{}'", path.string()));
    out << "name,x,y\n";
    for (std::size_t i = 0; i < kZoneCount; ++i) {
        out << fmt::format("{},{},{}\n", zone_name(i), z.centers()[i].x, z.centers()[i].y);
    }
}

} // namespace xg
