#include "xg/gam.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <numeric>
#include <random>
#include <thread>

#include <fmt/format.h>

#include "xg/error.hpp"

namespace xg {

std::size_t bin_of(std::span<const double> cuts, double v) {
    return static_cast<std::size_t>(std::upper_bound(cuts.begin(), cuts.end(), v) - cuts.begin());
}

std::size_t BinnedFunction::bin_index(std::span<const double> row) const {
    std::size_t index = 0;
    for (std::size_t d = 0; d < features.size(); ++d) {
        index = index * bins(d) + bin_of(cuts[d], row[features[d]]);
    }
    return index;
}

bool InteractionWhitelist::contains(std::string_view a, std::string_view b) const {
    return std::any_of(pairs.begin(), pairs.end(), [&](const auto& p) {
        return (p.first == a && p.second == b) || (p.first == b && p.second == a);
    });
}

InteractionWhitelist build_whitelist(const FeatureSpec& spec) {
    if (!spec.uses_zones()) {
        throw Error(ErrorCode::UnsupportedSpec,
                    fmt::format("no interaction whitelist is defined for {} features",
                                to_string(spec.representation())));
    }
    const auto& zones = *spec.zone_model();
    InteractionWhitelist w;
    for (auto zone : zones.penalty_area_zones()) w.pairs.emplace_back(zone_name(zone), kFootFeature);
    for (auto zone : zones.penalty_area_zones()) w.pairs.emplace_back(zone_name(zone), kHeadFeature);
    w.pairs.emplace_back(zone_name(zones.penalty_spot_zone()), kPenaltyFeature);
    return w;
}

std::vector<double> quantile_cuts(std::span<const double> values, std::size_t max_bins) {
    if (max_bins == 0) throw Error(ErrorCode::InvalidArgument, "max_bins must be >= 1");
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    std::vector<double> distinct = sorted;
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    if (distinct.size() <= 1) return {};
    if (distinct.size() <= max_bins) return {distinct.begin() + 1, distinct.end()};

    const std::size_t n = sorted.size();
    std::vector<double> cuts;
    for (std::size_t k = 1; k < max_bins; ++k) {
        const std::size_t idx = (k * n + max_bins / 2) / max_bins;
        if (idx == 0 || idx >= n) continue;
        const double c = sorted[idx];
        if (c <= sorted.front()) continue;
        if (!cuts.empty() && c <= cuts.back()) continue;
        cuts.push_back(c);
    }
    return cuts;
}

std::vector<std::vector<double>> bin_features(const FeatureMatrix& m, std::size_t max_bins) {
    if (m.rows() == 0) throw Error(ErrorCode::EmptyDataset, "cannot bin an empty matrix");
    std::vector<std::vector<double>> cuts;
    cuts.reserve(m.cols());
    for (std::size_t c = 0; c < m.cols(); ++c) cuts.push_back(quantile_cuts(m.column(c), max_bins));
    return cuts;
}

void TrainConfig::validate() const {
    auto fail = [](const std::string& msg) { throw Error(ErrorCode::InvalidArgument, msg); };
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) fail("learning rate must be > 0");
    if (!(validation_fraction > 0.0 && validation_fraction < 1.0)) fail("validation fraction must lie in (0, 1)");
    if (max_bins_main < 1 || max_bins_main > 64) fail("main-effect bins must lie in [1, 64]");
    if (max_bins_pair < 1 || max_bins_pair > 32) fail("pairwise bins must lie in [1, 32]");
    if (outer_bags < 1) fail("at least one bag is required");
    if (early_stopping_patience < 1) fail("early-stopping patience must be >= 1");
    if (!(min_hessian >= 0.0)) fail("min_hessian must be >= 0");
    if (max_leaves < 2) fail("trees need at least two leaves");
    if (!(early_stopping_tolerance >= 0.0)) fail("early-stopping tolerance must be >= 0");
}

std::string GamModel::function_name(const BinnedFunction& f) const {
    if (f.is_pair()) {
        return fmt::format("{} & {}", feature_names.at(f.features[0]), feature_names.at(f.features[1]));
    }
    return feature_names.at(f.features[0]);
}

double GamModel::score(std::span<const double> v) const {
    double s = intercept;
    for (const auto& f : main_effects) s += f.contribution(v);
    for (const auto& f : pairwise_effects) s += f.contribution(v);
    return s;
}

double predict_proba(const GamModel& m, std::span<const double> v) {
    if (v.size() != m.feature_names.size()) {
        throw Error(ErrorCode::DimensionMismatch,
                    fmt::format("feature vector has {} values, model expects {}", v.size(),
                                m.feature_names.size()));
    }
    return sigmoid(m.score(v));
}

std::vector<double> predict_proba(const GamModel& m, const FeatureMatrix& x) {
    if (x.names() != m.feature_names) {
        throw Error(ErrorCode::DimensionMismatch, "matrix columns do not match the model features");
    }
    std::vector<double> out(x.rows());
    for (std::size_t r = 0; r < x.rows(); ++r) out[r] = sigmoid(m.score(x.row(r)));
    return out;
}

GamModel constant_model(double rate, const FeatureSpec& spec) {
    if (!(rate > 0.0 && rate < 1.0)) {
        throw Error(ErrorCode::InvalidArgument, fmt::format("constant rate {} outside (0, 1)", rate));
    }
    GamModel m;
    m.intercept = logit(rate);
    m.base_rate = rate;
    m.feature_names = spec.feature_names();
    m.spec = spec;
    return m;
}

namespace {

// A boosted term: one main effect or one pair, with every row's flat bin index.
struct Term {
    std::size_t bins = 1;
    std::vector<std::size_t> sizes;    // bins per dimension, row-major flattening
    std::vector<std::uint16_t> index;  // per training row of the full matrix
};

// Best single cut of the sequence g[k*stride], h[k*stride], k < n. Both sides
// need hessian above the floor. `gain` is the summed G^2/H of the two sides,
// or of the unsplit sequence when no cut is allowed (cut == 0).
struct Cut {
    std::size_t cut = 0;
    double gain = 0.0;
    double g = 0.0, h = 0.0;
};

Cut best_cut(const double* g, const double* h, std::size_t stride, std::size_t n, double min_h) {
    Cut c;
    for (std::size_t k = 0; k < n; ++k) {
        c.g += g[k * stride];
        c.h += h[k * stride];
    }
    c.gain = c.h > min_h ? c.g * c.g / c.h : 0.0;
    double gl = 0.0, hl = 0.0;
    for (std::size_t k = 1; k < n; ++k) {
        gl += g[(k - 1) * stride];
        hl += h[(k - 1) * stride];
        const double gr = c.g - gl, hr = c.h - hl;
        if (hl <= min_h || hr <= min_h) continue;
        const double gain = gl * gl / hl + gr * gr / hr;
        if (gain > c.gain) {
            c.gain = gain;
            c.cut = k;
        }
    }
    return c;
}

double leaf_value(double g, double h, double min_h, double lr) { return h > min_h ? lr * g / h : 0.0; }

// Greedy tree over the ordered bins of a main effect: the leaf whose best cut
// gains most is split until `max_leaves` leaves exist or nothing helps.
void main_tree(std::span<const double> g, std::span<const double> h, const TrainConfig& cfg,
               std::span<double> update) {
    struct Leaf {
        std::size_t lo, hi;
        Cut cut;
    };
    auto make = [&](std::size_t lo, std::size_t hi) {
        return Leaf{lo, hi, best_cut(g.data() + lo, h.data() + lo, 1, hi - lo, cfg.min_hessian)};
    };
    std::vector<Leaf> leaves{make(0, g.size())};
    if (leaves[0].cut.h <= cfg.min_hessian) {
        std::fill(update.begin(), update.end(), 0.0);
        return;
    }
    while (leaves.size() < cfg.max_leaves) {
        std::size_t pick = leaves.size();
        double best = 0.0;
        for (std::size_t l = 0; l < leaves.size(); ++l) {
            const auto& c = leaves[l].cut;
            if (c.cut == 0) continue;
            const double gain = c.gain - c.g * c.g / c.h;
            if (gain > best) {
                best = gain;
                pick = l;
            }
        }
        if (pick == leaves.size()) break;
        const Leaf parent = leaves[pick];
        const std::size_t mid = parent.lo + parent.cut.cut;
        leaves[pick] = make(parent.lo, mid);
        leaves.push_back(make(mid, parent.hi));
    }
    for (const auto& leaf : leaves) {
        const double v = leaf_value(leaf.cut.g, leaf.cut.h, cfg.min_hessian, cfg.learning_rate);
        std::fill(update.begin() + static_cast<std::ptrdiff_t>(leaf.lo),
                  update.begin() + static_cast<std::ptrdiff_t>(leaf.hi), v);
    }
}

// Pair tree: one cut along either dimension, then one cut along the other
// dimension on each side, so at most four rectangular leaves.
void pair_tree(std::span<const double> g, std::span<const double> h, std::size_t rows, std::size_t cols,
               const TrainConfig& cfg, std::span<double> update) {
    std::fill(update.begin(), update.end(), 0.0);
    const double min_h = cfg.min_hessian;
    struct Best {
        double gain = -1.0;
        int axis = 0;
        std::size_t cut = 0, cut_lo = 0, cut_hi = 0;
    } best;
    // axis 0 cuts rows then columns; axis 1 cuts columns then rows.
    for (int axis = 0; axis < 2; ++axis) {
        const std::size_t outer = axis == 0 ? rows : cols, inner = axis == 0 ? cols : rows;
        const std::size_t outer_stride = axis == 0 ? cols : 1, inner_stride = axis == 0 ? 1 : cols;
        std::vector<double> gt(inner, 0.0), ht(inner, 0.0), gl(inner, 0.0), hl(inner, 0.0), gr(inner), hr(inner);
        for (std::size_t o = 0; o < outer; ++o) {
            for (std::size_t i = 0; i < inner; ++i) {
                gt[i] += g[o * outer_stride + i * inner_stride];
                ht[i] += h[o * outer_stride + i * inner_stride];
            }
        }
        for (std::size_t c = 1; c < outer; ++c) {
            for (std::size_t i = 0; i < inner; ++i) {
                gl[i] += g[(c - 1) * outer_stride + i * inner_stride];
                hl[i] += h[(c - 1) * outer_stride + i * inner_stride];
                gr[i] = gt[i] - gl[i];
                hr[i] = ht[i] - hl[i];
            }
            const Cut lo = best_cut(gl.data(), hl.data(), 1, inner, min_h);
            const Cut hi = best_cut(gr.data(), hr.data(), 1, inner, min_h);
            if (lo.h <= min_h || hi.h <= min_h) continue;
            const double gain = lo.gain + hi.gain;
            if (gain > best.gain) best = {gain, axis, c, lo.cut, hi.cut};
        }
    }
    if (best.gain < 0.0) return;
    const std::size_t outer = best.axis == 0 ? rows : cols, inner = best.axis == 0 ? cols : rows;
    auto flat = [&](std::size_t o, std::size_t i) { return best.axis == 0 ? o * cols + i : i * cols + o; };
    // Each side of the first cut is one or two leaves along the inner axis.
    for (int side = 0; side < 2; ++side) {
        const std::size_t o_lo = side == 0 ? 0 : best.cut, o_hi = side == 0 ? best.cut : outer;
        const std::size_t split = side == 0 ? best.cut_lo : best.cut_hi;
        std::array<std::pair<std::size_t, std::size_t>, 2> parts{{{0, split}, {split, inner}}};
        if (split == 0) parts = {{{0, inner}, {inner, inner}}};
        for (const auto& [i_lo, i_hi] : parts) {
            double gs = 0.0, hs = 0.0;
            for (std::size_t o = o_lo; o < o_hi; ++o) {
                for (std::size_t i = i_lo; i < i_hi; ++i) {
                    gs += g[flat(o, i)];
                    hs += h[flat(o, i)];
                }
            }
            const double v = leaf_value(gs, hs, min_h, cfg.learning_rate);
            for (std::size_t o = o_lo; o < o_hi; ++o) {
                for (std::size_t i = i_lo; i < i_hi; ++i) update[flat(o, i)] = v;
            }
        }
    }
}

double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

double mean_log_loss(std::span<const double> scores, std::span<const double> labels) {
    double total = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) total += softplus(scores[i]) - labels[i] * scores[i];
    return total / static_cast<double>(scores.size());
}

struct StageResult {
    std::vector<std::vector<double>> tables;
    std::size_t rounds_run = 0;
    std::size_t best_round = 0;
    std::vector<double> curve;
};

// Boosts `terms` cyclically over one bag. Scores start at `train_base` /
// `val_base` (logits from everything fitted before this stage).
StageResult boost_stage(const std::vector<const Term*>& terms, std::span<const std::size_t> train_rows,
                        std::span<const std::size_t> val_rows, std::span<const double> labels,
                        std::vector<double> train_score, std::vector<double> val_score,
                        const TrainConfig& cfg) {
    StageResult result;
    result.tables.resize(terms.size());
    for (std::size_t t = 0; t < terms.size(); ++t) result.tables[t].assign(terms[t]->bins, 0.0);
    if (terms.empty()) return result;

    const std::size_t nt = train_rows.size();
    const std::size_t nv = val_rows.size();
    // Bag-local contiguous copies of bin indices and labels.
    std::vector<std::vector<std::uint16_t>> tb(terms.size()), vb(terms.size());
    for (std::size_t t = 0; t < terms.size(); ++t) {
        tb[t].resize(nt);
        vb[t].resize(nv);
        for (std::size_t i = 0; i < nt; ++i) tb[t][i] = terms[t]->index[train_rows[i]];
        for (std::size_t i = 0; i < nv; ++i) vb[t][i] = terms[t]->index[val_rows[i]];
    }
    std::vector<double> ty(nt), vy(nv);
    for (std::size_t i = 0; i < nt; ++i) ty[i] = labels[train_rows[i]];
    for (std::size_t i = 0; i < nv; ++i) vy[i] = labels[val_rows[i]];

    // e = exp(-score) is carried multiplicatively so a step costs no exp per row.
    std::vector<double> e(nt);
    std::vector<double> grad(terms[0]->bins, 0.0), hess(terms[0]->bins, 0.0);
    for (std::size_t i = 0; i < nt; ++i) {
        e[i] = std::exp(-train_score[i]);
        const double p = 1.0 / (1.0 + e[i]);
        grad[tb[0][i]] += ty[i] - p;
        hess[tb[0][i]] += p * (1.0 - p);
    }

    const bool early_stop = nv > 0;
    double best_loss = early_stop ? mean_log_loss(val_score, vy) : 0.0;
    if (early_stop) result.curve.push_back(best_loss);
    auto best_tables = result.tables;

    std::vector<double> update, factor, next_grad, next_hess;
    for (std::size_t round = 1; round <= cfg.max_rounds; ++round) {
        for (std::size_t t = 0; t < terms.size(); ++t) {
            const std::size_t bins = terms[t]->bins;
            update.assign(bins, 0.0);
            factor.assign(bins, 1.0);
            if (terms[t]->sizes.size() == 1) {
                main_tree(grad, hess, cfg, update);
            } else {
                pair_tree(grad, hess, terms[t]->sizes[0], terms[t]->sizes[1], cfg, update);
            }
            for (std::size_t b = 0; b < bins; ++b) {
                if (update[b] == 0.0) continue;
                factor[b] = std::exp(-update[b]);
                result.tables[t][b] += update[b];
            }
            const std::size_t next = (t + 1) % terms.size();
            next_grad.assign(terms[next]->bins, 0.0);
            next_hess.assign(terms[next]->bins, 0.0);
            const std::uint16_t* cur = tb[t].data();
            const std::uint16_t* nxt = tb[next].data();
            for (std::size_t i = 0; i < nt; ++i) {
                const std::uint16_t b = cur[i];
                train_score[i] += update[b];
                e[i] *= factor[b];
                const double p = 1.0 / (1.0 + e[i]);
                next_grad[nxt[i]] += ty[i] - p;
                next_hess[nxt[i]] += p * (1.0 - p);
            }
            for (std::size_t i = 0; i < nv; ++i) val_score[i] += update[vb[t][i]];
            grad.swap(next_grad);
            hess.swap(next_hess);
        }
        result.rounds_run = round;
        if (!early_stop) continue;
        const double loss = mean_log_loss(val_score, vy);
        result.curve.push_back(loss);
        if (loss < best_loss - cfg.early_stopping_tolerance) {
            best_loss = loss;
            result.best_round = round;
            best_tables = result.tables;
        } else if (round - result.best_round >= cfg.early_stopping_patience) {
            break;
        }
    }
    if (early_stop) {
        result.tables = std::move(best_tables);
    } else {
        result.best_round = result.rounds_run;
    }
    return result;
}

struct BagResult {
    std::vector<std::vector<double>> main_tables;
    std::vector<std::vector<double>> pair_tables;
    StageResult main_stage;
    StageResult pair_stage;
};

BagResult run_bag(std::size_t bag, const std::vector<Term>& main_terms, const std::vector<Term>& pair_terms,
                  std::span<const double> labels, double intercept, const TrainConfig& cfg) {
    const std::size_t n = labels.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::seed_seq seq{static_cast<std::uint32_t>(cfg.seed), static_cast<std::uint32_t>(cfg.seed >> 32),
                      static_cast<std::uint32_t>(bag)};
    std::mt19937_64 rng(seq);
    std::shuffle(order.begin(), order.end(), rng);

    std::size_t n_val = static_cast<std::size_t>(std::llround(cfg.validation_fraction * static_cast<double>(n)));
    if (n >= 2) n_val = std::clamp<std::size_t>(n_val, 1, n - 1);
    else n_val = 0;
    std::vector<std::size_t> val_rows(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_val));
    std::vector<std::size_t> train_rows(order.begin() + static_cast<std::ptrdiff_t>(n_val), order.end());
    std::sort(val_rows.begin(), val_rows.end());
    std::sort(train_rows.begin(), train_rows.end());

    auto active = [](const std::vector<Term>& terms) {
        std::vector<const Term*> out;
        for (const auto& t : terms) {
            if (t.bins > 1) out.push_back(&t);
        }
        return out;
    };
    const auto main_active = active(main_terms);
    const auto pair_active = active(pair_terms);

    BagResult bag_result;
    bag_result.main_stage = boost_stage(main_active, train_rows, val_rows, labels,
                                        std::vector<double>(train_rows.size(), intercept),
                                        std::vector<double>(val_rows.size(), intercept), cfg);

    auto expand = [](const std::vector<Term>& terms, const std::vector<const Term*>& act,
                     const std::vector<std::vector<double>>& tables) {
        std::vector<std::vector<double>> full(terms.size());
        std::size_t k = 0;
        for (std::size_t t = 0; t < terms.size(); ++t) {
            if (k < act.size() && act[k] == &terms[t]) full[t] = tables[k++];
            else full[t].assign(terms[t].bins, 0.0);
        }
        return full;
    };
    bag_result.main_tables = expand(main_terms, main_active, bag_result.main_stage.tables);

    auto base_scores = [&](std::span<const std::size_t> rows) {
        std::vector<double> s(rows.size(), intercept);
        for (std::size_t t = 0; t < main_terms.size(); ++t) {
            for (std::size_t i = 0; i < rows.size(); ++i) {
                s[i] += bag_result.main_tables[t][main_terms[t].index[rows[i]]];
            }
        }
        return s;
    };
    bag_result.pair_stage = boost_stage(pair_active, train_rows, val_rows, labels, base_scores(train_rows),
                                        base_scores(val_rows), cfg);
    bag_result.pair_tables = expand(pair_terms, pair_active, bag_result.pair_stage.tables);
    return bag_result;
}

Term make_term(const std::vector<std::vector<std::uint16_t>>& dims, const std::vector<std::size_t>& sizes) {
    Term term;
    term.sizes = sizes;
    term.bins = 1;
    for (auto s : sizes) term.bins *= s;
    const std::size_t n = dims.front().size();
    term.index.assign(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t idx = 0;
        for (std::size_t d = 0; d < dims.size(); ++d) idx = idx * sizes[d] + dims[d][i];
        term.index[i] = static_cast<std::uint16_t>(idx);
    }
    return term;
}

std::vector<std::uint16_t> bin_column(const FeatureMatrix& x, std::size_t c, std::span<const double> cuts) {
    std::vector<std::uint16_t> out(x.rows());
    for (std::size_t r = 0; r < x.rows(); ++r) out[r] = static_cast<std::uint16_t>(bin_of(cuts, x(r, c)));
    return out;
}

void accumulate_stage(StageReport& report, const StageResult& stage) {
    report.rounds_run.push_back(stage.rounds_run);
    report.best_round.push_back(stage.best_round);
    report.validation_loss.push_back(stage.curve);
}

} // namespace

GamModel fit_gam(const FeatureMatrix& x, std::span<const double> labels,
                 const InteractionWhitelist& whitelist, const TrainConfig& cfg) {
    cfg.validate();
    const std::size_t n = x.rows();
    if (n == 0) throw Error(ErrorCode::EmptyDataset, "cannot fit a model on zero rows");
    if (labels.size() != n) {
        throw Error(ErrorCode::DimensionMismatch,
                    fmt::format("{} labels for {} feature rows", labels.size(), n));
    }
    for (std::size_t r = 0; r < n; ++r) {
        if (labels[r] != 0.0 && labels[r] != 1.0) {
            throw Error(ErrorCode::InvalidValue, fmt::format("row {}: label must be 0 or 1", r));
        }
        for (std::size_t c = 0; c < x.cols(); ++c) {
            if (!std::isfinite(x(r, c))) {
                throw Error(ErrorCode::NonFiniteFeature,
                            fmt::format("row {}: feature '{}' is not finite", r, x.names()[c]));
            }
        }
    }

    GamModel model;
    model.feature_names = x.names();
    model.whitelist = whitelist;
    model.config = cfg;
    model.report.training_rows = n;

    std::vector<std::pair<std::size_t, std::size_t>> pair_index;
    for (const auto& [a, b] : whitelist.pairs) {
        auto find = [&](const std::string& name) {
            const auto it = std::find(x.names().begin(), x.names().end(), name);
            if (it == x.names().end()) {
                throw Error(ErrorCode::UnknownFeature,
                            fmt::format("whitelisted feature '{}' is not a model feature", name));
            }
            return static_cast<std::size_t>(it - x.names().begin());
        };
        pair_index.emplace_back(find(a), find(b));
    }

    const double positives = std::accumulate(labels.begin(), labels.end(), 0.0);
    model.base_rate = positives / static_cast<double>(n);

    // Bins and per-bin training weights.
    const auto main_cuts = bin_features(x, cfg.max_bins_main);
    std::vector<Term> main_terms;
    std::vector<std::vector<std::uint16_t>> main_bins(x.cols());
    for (std::size_t c = 0; c < x.cols(); ++c) {
        main_bins[c] = bin_column(x, c, main_cuts[c]);
        main_terms.push_back(make_term({main_bins[c]}, {main_cuts[c].size() + 1}));
    }
    std::vector<Term> pair_terms;
    std::vector<std::array<std::vector<double>, 2>> pair_cuts;
    for (const auto& [a, b] : pair_index) {
        std::array<std::vector<double>, 2> cuts{quantile_cuts(x.column(a), cfg.max_bins_pair),
                                               quantile_cuts(x.column(b), cfg.max_bins_pair)};
        pair_terms.push_back(make_term({bin_column(x, a, cuts[0]), bin_column(x, b, cuts[1])},
                                       {cuts[0].size() + 1, cuts[1].size() + 1}));
        pair_cuts.push_back(std::move(cuts));
    }

    auto weights_of = [n](const Term& term) {
        std::vector<double> w(term.bins, 0.0);
        for (std::size_t i = 0; i < n; ++i) w[term.index[i]] += 1.0;
        return w;
    };
    for (std::size_t c = 0; c < x.cols(); ++c) {
        model.main_effects.push_back(
            {{c}, {main_cuts[c]}, std::vector<double>(main_terms[c].bins, 0.0), weights_of(main_terms[c])});
    }
    for (std::size_t p = 0; p < pair_index.size(); ++p) {
        model.pairwise_effects.push_back({{pair_index[p].first, pair_index[p].second},
                                          {pair_cuts[p][0], pair_cuts[p][1]},
                                          std::vector<double>(pair_terms[p].bins, 0.0),
                                          weights_of(pair_terms[p])});
    }

    if (positives == 0.0 || positives == static_cast<double>(n)) {
        const double clipped = std::clamp(model.base_rate, 1e-15, 1.0 - 1e-15);
        model.intercept = logit(clipped);
        model.report.warnings.push_back(fmt::format(
            "DegenerateLabels: all {} labels are {}; fitted the constant model", n, positives == 0.0 ? 0 : 1));
        return model;
    }
    model.intercept = logit(model.base_rate);

    // Bags are independent; results are merged in bag order.
    std::vector<BagResult> bags(cfg.outer_bags);
    const std::size_t workers = std::max<std::size_t>(
        1, std::min(cfg.outer_bags, cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency())));
    for (std::size_t start = 0; start < cfg.outer_bags; start += workers) {
        std::vector<std::future<BagResult>> pending;
        const std::size_t stop = std::min(cfg.outer_bags, start + workers);
        for (std::size_t b = start; b < stop; ++b) {
            pending.push_back(std::async(workers > 1 ? std::launch::async : std::launch::deferred, run_bag, b,
                                         std::cref(main_terms), std::cref(pair_terms), labels, model.intercept,
                                         std::cref(cfg)));
        }
        for (std::size_t b = start; b < stop; ++b) bags[b] = pending[b - start].get();
    }

    const double inv_bags = 1.0 / static_cast<double>(cfg.outer_bags);
    auto average = [&](std::vector<double>& target, auto pick) {
        for (const auto& bag : bags) {
            const auto& table = pick(bag);
            for (std::size_t b = 0; b < target.size(); ++b) target[b] += table[b];
        }
        for (auto& s : target) s *= inv_bags;
    };
    for (std::size_t t = 0; t < model.main_effects.size(); ++t) {
        average(model.main_effects[t].scores, [t](const BagResult& r) -> const auto& { return r.main_tables[t]; });
    }
    for (std::size_t t = 0; t < model.pairwise_effects.size(); ++t) {
        average(model.pairwise_effects[t].scores, [t](const BagResult& r) -> const auto& { return r.pair_tables[t]; });
    }
    for (const auto& bag : bags) {
        accumulate_stage(model.report.main_stage, bag.main_stage);
        accumulate_stage(model.report.pair_stage, bag.pair_stage);
    }

    // Center every function on the training distribution; the mean moves into the intercept.
    auto center = [&](BinnedFunction& f) {
        double mean = 0.0;
        for (std::size_t b = 0; b < f.scores.size(); ++b) mean += f.weights[b] * f.scores[b];
        mean /= static_cast<double>(n);
        for (auto& s : f.scores) s -= mean;
        model.intercept += mean;
    };
    for (auto& f : model.main_effects) center(f);
    for (auto& f : model.pairwise_effects) center(f);
    return model;
}

} // namespace xg
