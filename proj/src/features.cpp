#include "xg/features.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <fmt/format.h>

#include "xg/error.hpp"

namespace xg {

std::string_view to_string(Representation r) {
    switch (r) {
    case Representation::SoftZones: return "soft-zones";
    case Representation::HardZones: return "hard-zones";
    case Representation::DistanceAngle: return "distance-angle";
    case Representation::Constant: return "constant";
    }
    return "constant";
}

Representation parse_representation(std::string_view text) {
    for (auto r : {Representation::SoftZones, Representation::HardZones,
                   Representation::DistanceAngle, Representation::Constant}) {
        if (text == to_string(r)) return r;
    }
    throw Error(ErrorCode::InvalidEnum, fmt::format("unknown representation '{}'", text));
}

FeatureSpec::FeatureSpec(Representation representation, std::optional<ZoneModel> zones)
    : representation_(representation), zones_(std::move(zones)) {
    if (uses_zones()) {
        if (!zones_ || !zones_->frozen()) {
            throw Error(ErrorCode::MissingZoneModel,
                        fmt::format("{} features need a frozen zone model", to_string(representation_)));
        }
        for (std::size_t i = 0; i < kZoneCount; ++i) names_.push_back(zone_name(i));
    } else {
        if (zones_) {
            throw Error(ErrorCode::InvalidArgument,
                        fmt::format("{} features take no zone model", to_string(representation_)));
        }
        if (representation_ == Representation::Constant) return;
        names_.emplace_back(kDistanceFeature);
        names_.emplace_back(kAngleFeature);
    }
    for (auto name : {kFootFeature, kHeadFeature, kOtherFeature, kPenaltyFeature}) {
        names_.emplace_back(name);
    }
}

std::optional<std::size_t> FeatureSpec::index_of(std::string_view name) const {
    const auto it = std::find(names_.begin(), names_.end(), name);
    if (it == names_.end()) return std::nullopt;
    return static_cast<std::size_t>(it - names_.begin());
}

FeatureMatrix::FeatureMatrix(std::vector<std::string> names, std::size_t rows)
    : names_(std::move(names)), rows_(rows), data_(rows * names_.size(), 0.0) {}

std::vector<double> FeatureMatrix::column(std::size_t c) const {
    std::vector<double> out(rows_);
    for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
    return out;
}

FeatureMatrix FeatureMatrix::select(std::span<const std::size_t> rows) const {
    FeatureMatrix out(names_, rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto src = row(rows[i]);
        std::copy(src.begin(), src.end(), out.row(i).begin());
    }
    return out;
}

namespace {

void featurize_into(const FeatureSpec& spec, const ShotRecord& shot, std::span<double> out) {
    if (!std::isfinite(shot.x) || !std::isfinite(shot.y)) {
        throw Error(ErrorCode::NonFiniteFeature, fmt::format("shot location ({}, {}) is not finite", shot.x, shot.y));
    }
    std::size_t k = 0;
    switch (spec.representation()) {
    case Representation::Constant:
        return;
    case Representation::SoftZones:
    case Representation::HardZones: {
        const auto u = spec.zone_model()->membership(shot.location());
        for (double v : u) out[k++] = v;
        break;
    }
    case Representation::DistanceAngle:
        out[k++] = pitch::distance_to_goal(shot.location());
        out[k++] = pitch::goal_angle(shot.location());
        break;
    }
    out[k++] = shot.body_part == BodyPart::Foot ? 1.0 : 0.0;
    out[k++] = shot.body_part == BodyPart::Head ? 1.0 : 0.0;
    out[k++] = shot.body_part == BodyPart::Other ? 1.0 : 0.0;
    out[k++] = shot.is_penalty ? 1.0 : 0.0;
}

} // namespace

FeatureVector featurize(const FeatureSpec& spec, const ShotRecord& shot) {
    FeatureVector v(spec.size(), 0.0);
    featurize_into(spec, shot, v);
    return v;
}

LabeledMatrix featurize_dataset(const FeatureSpec& spec, const Dataset& d) {
    if (d.empty()) throw Error(ErrorCode::EmptyDataset, "cannot featurize an empty dataset");
    LabeledMatrix out{FeatureMatrix(spec.feature_names(), d.size()), std::vector<double>(d.size())};
    for (std::size_t i = 0; i < d.size(); ++i) {
        try {
            featurize_into(spec, d.records[i], out.features.row(i));
        } catch (const Error& e) {
            throw Error(e.code(), fmt::format("row {}: {}", i, e.what()));
        }
        out.labels[i] = d.records[i].is_goal ? 1.0 : 0.0;
    }
    return out;
}

void write_feature_csv(const FeatureMatrix& m, std::span<const double> labels,
                       const std::filesystem::path& path) {
    if (!labels.empty() && labels.size() != m.rows()) {
        throw Error(ErrorCode::DimensionMismatch, "label count differs from matrix rows");
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, fmt::format("cannot write '{}'", path.string()));
    out << fmt::format("{}", fmt::join(m.names(), ","));
    if (!labels.empty()) out << (m.cols() ? ",is_goal" : "is_goal");
    out << '\n';
    for (std::size_t r = 0; r < m.rows(); ++r) {
        out << fmt::format("{}", fmt::join(m.row(r), ","));
        if (!labels.empty()) out << (m.cols() ? "," : "") << labels[r];
        out << '\n';
    }
}

} // namespace xg
