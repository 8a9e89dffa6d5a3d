#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "xg/pitch.hpp"
#include "xg/shot_data.hpp"

namespace xg {

inline constexpr std::size_t kZoneCount = 16;
inline constexpr std::size_t kPenaltyAreaZoneCount = 12;
inline constexpr double kSoftExponent = 2.0;
inline constexpr double kHardExponent = 1.001;

using Membership = std::array<double, kZoneCount>;
using ZoneCenters = std::array<pitch::Point, kZoneCount>;

/// "zone_1" ... "zone_16" for indices 0 ... 15.
std::string zone_name(std::size_t index);

/// Fuzzy c-means membership of `p` to each of `centers`:
///   u_i = 1 / sum_k (d_i / d_k)^(2 / (m - 1)).
/// Evaluated in log space so exponents near 1 neither overflow nor lose the
/// sum-to-one property. A point within 1e-12 m of a center is assigned to it
/// outright. `out` must have one slot per center.
void fuzzy_membership(std::span<const pitch::Point> centers, pitch::Point p, double exponent,
                      std::span<double> out);

/// Sixteen named zone centers with their fuzzifier. Zone identity (which
/// zones sit in the penalty area, which holds the penalty spot) is fixed by
/// the table the model was built from and survives center refinement.
class ZoneModel {
public:
    ZoneModel(const ZoneCenters& centers, double exponent,
              std::vector<std::size_t> penalty_area_zones, std::size_t penalty_spot_zone,
              bool frozen);

    /// Derives penalty-area and penalty-spot zones from the center geometry.
    static ZoneModel from_centers(const ZoneCenters& centers, double exponent = kSoftExponent);

    const ZoneCenters& centers() const { return centers_; }
    double exponent() const { return exponent_; }
    bool frozen() const { return frozen_; }
    const std::vector<std::size_t>& penalty_area_zones() const { return penalty_area_zones_; }
    std::size_t penalty_spot_zone() const { return penalty_spot_zone_; }

    Membership membership(pitch::Point p) const;
    std::size_t nearest_zone(pitch::Point p) const;

    ZoneModel with_exponent(double exponent) const;
    ZoneModel with_centers(const ZoneCenters& centers, bool frozen) const;

    friend bool operator==(const ZoneModel&, const ZoneModel&) = default;

private:
    ZoneCenters centers_;
    double exponent_;
    std::vector<std::size_t> penalty_area_zones_;
    std::size_t penalty_spot_zone_;
    bool frozen_;
};

/// The shipped center table: eight grid zones inside the penalty area, four
/// grid zones outside it and four on the goal line. zone_1 sits in front of
/// goal, zone_6 on the penalty spot, zone_14 furthest out. Exponent 2, not
/// frozen.
ZoneModel default_centers();

inline Membership membership(const ZoneModel& z, pitch::Point p) { return z.membership(p); }

struct ZoneFitOptions {
    std::size_t iterations = 1000;
    double tolerance = 1e-9;  // stop once no center moves further than this (m); 0 disables
};

struct ZoneFit {
    ZoneModel model;                 // frozen
    std::size_t iterations_run = 0;
    std::vector<double> objective;   // sum u^m d^2 before each update, then the final value
};

/// Alternating c-means refinement starting from `z`'s centers. iterations = 0
/// freezes the centers unchanged.
ZoneFit fit_zones(const ZoneModel& z, std::span<const pitch::Point> points, const ZoneFitOptions& opts = {});
ZoneFit fit_zones(const ZoneModel& z, const Dataset& train, const ZoneFitOptions& opts = {});

/// Sum over points and zones of u^m d^2 for the given centers.
double fuzzy_objective(std::span<const pitch::Point> centers, std::span<const pitch::Point> points,
                       double exponent);

/// Same centers, exponent 1.001.
ZoneModel hard_variant(const ZoneModel& z);

/// Center table file: header "name,x,y" and one row per zone.
ZoneModel load_zone_table(const std::filesystem::path& path);
void save_zone_table(const ZoneModel& z, const std::filesystem::path& path);

} // namespace xg
