#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "agriconn/ei.hpp"
#include "agriconn/landscape.hpp"
#include "agriconn/params.hpp"
#include "agriconn/rng.hpp"

namespace agriconn {

enum class PieceKind { MarginArc, HabitatCell, FullHabitat };

// A candidate intervention unit: a boundary arc, an interior habitat cell, or
// an existing habitat plot kept as one indivisible piece.
struct Piece {
    int id = -1;
    PieceKind kind = PieceKind::MarginArc;
    int plot_id = -1;
    Polyline arc;      // MarginArc geometry
    Polygon cell;      // HabitatCell / FullHabitat geometry
    double length = 0.0;  // meters; 0 for non-arcs
    double area = 0.0;    // hectares; 0 for arcs
    Point centroid;
    double radius = 0.0;  // bounding radius around the centroid, meters

    Shape shape() const {
        return kind == PieceKind::MarginArc ? Shape::chain(arc) : Shape::ring(cell);
    }
    bool fixed_selected() const { return kind == PieceKind::FullHabitat; }
};

inline Piece make_margin_arc(int id, int plot_id, Polyline geometry) {
    Piece p;
    p.id = id;
    p.kind = PieceKind::MarginArc;
    p.plot_id = plot_id;
    p.length = polyline_length(geometry);
    if (p.length <= 0.0)
        throw std::invalid_argument("margin arc with zero length (plot " +
                                    std::to_string(plot_id) + ")");
    p.centroid = polyline_centroid(geometry);
    for (const Point& q : geometry) p.radius = std::max(p.radius, distance(p.centroid, q));
    p.arc = std::move(geometry);
    return p;
}

inline Piece make_cell(int id, int plot_id, Polygon geometry, PieceKind kind) {
    Piece p;
    p.id = id;
    p.kind = kind;
    p.plot_id = plot_id;
    const double area_m2 = polygon_area(geometry);
    if (area_m2 <= 0.0)
        throw std::invalid_argument("habitat piece with zero area (plot " +
                                    std::to_string(plot_id) + ")");
    p.area = area_m2 / kSqMetersPerHectare;
    p.centroid = polygon_centroid(geometry);
    for (const Point& q : geometry) p.radius = std::max(p.radius, distance(p.centroid, q));
    p.cell = std::move(geometry);
    return p;
}

struct ECConfig {
    int boundary_segments = 4;  // arcs per agricultural plot
    int interior_cells = 4;     // target habitat cells per agricultural plot
    double d_adj = 0.0;         // meters; pieces at or under this distance connect
    double alpha_al = 1e-9;     // area-length interaction factor
    double w_margin = 50.0;     // margin score weight per meter
    double rho_max = 0.2;       // max tolerated farm NPV loss ratio
    double d_neib = 1000.0;     // meters; service reach for yield effects
    double eps_sol = 1e-6;      // annealing improvement tolerance
    double anneal_initial_temp = 0.0;  // 0 = derive from piece scores
    double anneal_cooling = 0.95;
    int anneal_sweeps = 200;
    int anneal_restarts = 3;
    int oracle_cap = 20;  // max free binaries the exhaustive oracle accepts
    std::uint64_t seed = 0;

    void validate() const {
        if (boundary_segments < 1 || interior_cells < 1)
            throw std::invalid_argument("ec: discretization counts must be >= 1");
        if (rho_max < 0.0 || rho_max >= 1.0)
            throw std::invalid_argument("ec: rho_max must be in [0, 1)");
        if (d_adj < 0.0 || d_neib < 0.0) throw std::invalid_argument("ec: negative distance");
        if (anneal_cooling <= 0.0 || anneal_cooling >= 1.0)
            throw std::invalid_argument("ec: cooling factor must be in (0,1)");
    }
};

// Splits every agricultural plot into boundary arcs plus interior habitat
// cells (Voronoi on random interior points) and lifts habitat plots into
// single indivisible pieces. Deterministic for a fixed seed.
inline std::vector<Piece> discretize(const LandscapeConfiguration& config, const ECConfig& ec,
                                     std::uint64_t seed) {
    ec.validate();
    std::vector<Piece> pieces;
    for (const Plot& plot : config.plots) {
        if (plot.geometry.size() < 3 || polygon_area(plot.geometry) <= 0.0)
            throw std::invalid_argument("discretize: degenerate polygon on plot " +
                                        std::to_string(plot.id));
        if (!plot.agricultural()) {
            pieces.push_back(make_cell(static_cast<int>(pieces.size()), plot.id, plot.geometry,
                                       PieceKind::FullHabitat));
            continue;
        }
        for (auto& arc : split_boundary_arcs(plot.geometry, ec.boundary_segments)) {
            pieces.push_back(
                make_margin_arc(static_cast<int>(pieces.size()), plot.id, std::move(arc)));
        }
        RngStream rng(derive_seed(seed, "discretize", static_cast<std::uint64_t>(plot.id)));
        std::vector<Polygon> cells;
        if (ec.interior_cells == 1) {
            cells.push_back(plot.geometry);
        } else {
            const auto cell_seeds =
                detail::sample_voronoi_seeds(plot.geometry, ec.interior_cells, rng);
            cells = voronoi_partition(plot.geometry, cell_seeds);
        }
        const double min_area = 1e-9 * polygon_area(plot.geometry);
        for (auto& cell : cells) {
            if (cell.size() < 3 || polygon_area(cell) <= min_area) continue;
            pieces.push_back(make_cell(static_cast<int>(pieces.size()), plot.id, std::move(cell),
                                       PieceKind::HabitatCell));
        }
    }
    return pieces;
}

inline double piece_score(const Piece& piece, const ECConfig& ec) {
    return piece.kind == PieceKind::MarginArc ? ec.w_margin * piece.length : piece.area;
}

inline double connection_weight(const Piece& a, const Piece& b, double alpha_al) {
    return a.length * b.length + a.area * b.area +
           alpha_al * (a.area * b.length + b.area * a.length);
}

struct AdjacencyPair {
    int i = 0;
    int j = 0;
    double weight = 0.0;
};

// Structural adjacency: geometric distance at or below d_adj (plus a small
// tolerance), over unordered piece pairs.
inline std::vector<AdjacencyPair> build_adjacency(const std::vector<Piece>& pieces, double d_adj,
                                                  double alpha_al) {
    std::vector<AdjacencyPair> adj;
    const double limit = d_adj + kTouchTolerance;
    for (std::size_t i = 0; i < pieces.size(); ++i) {
        for (std::size_t j = i + 1; j < pieces.size(); ++j) {
            const double centroid_gap = distance(pieces[i].centroid, pieces[j].centroid) -
                                        pieces[i].radius - pieces[j].radius;
            if (centroid_gap > limit) continue;
            if (shape_distance(pieces[i].shape(), pieces[j].shape()) <= limit) {
                adj.push_back({static_cast<int>(i), static_cast<int>(j),
                               connection_weight(pieces[i], pieces[j], alpha_al)});
            }
        }
    }
    return adj;
}

// Connectivity selection problem over discretized pieces: quadratic
// pseudo-Boolean objective plus one NPV floor per farm.
struct ECProblem {
    const LandscapeConfiguration* config = nullptr;
    const EIParams* params = nullptr;
    ECConfig ec;
    std::vector<Piece> pieces;
    std::vector<AdjacencyPair> adjacency;
    std::vector<double> score;                  // s_i per piece
    std::vector<std::vector<int>> piece_adj;    // piece -> indices into adjacency
    std::vector<std::vector<int>> plot_arcs;    // plot id -> arc piece ids
    std::vector<std::vector<int>> plot_cells;   // plot id -> habitat cell piece ids
    std::map<int, double> farm_npv_base;        // from the upstream allocation stage
    std::vector<double> base_margin;            // per plot: upstream m_p
    std::vector<double> base_habitat;           // per plot: upstream h_p

    // Piece-resolved NPV model, mirroring the EI structure.
    struct PlotEcon {
        bool agricultural = false;
        int farm_id = -1;
        double base = 0.0;          // fixed annual costs, discounted
        double cost_margin = 0.0;   // per unit F_m
        double cost_habitat = 0.0;  // per unit F_h
        double revenue_scale = 0.0; // price * area * base yield
        double annuity = 0.0;
        double habitat_npv = 0.0;   // for habitat plots: constant upkeep NPV
        double perimeter = 0.0;
        double area = 0.0;
    };
    std::vector<PlotEcon> plot_econ;
    // reach[q] = plots within d_neib of piece q's centroid, with coefficient.
    struct Reach {
        int plot_id = 0;
        double coef = 0.0;
    };
    std::vector<std::vector<Reach>> reach;

    std::size_t n_pieces() const { return pieces.size(); }
    std::vector<int> free_piece_ids() const {
        std::vector<int> out;
        for (const Piece& p : pieces)
            if (!p.fixed_selected()) out.push_back(p.id);
        return out;
    }
};

// Assembles the selection problem. `baseline` supplies the upstream per-plot
// fractions and farm NPVs; pass an all-zero EISolution for standalone use.
inline ECProblem build_ec_problem(const LandscapeConfiguration& config, const EIParams& params,
                                  const ECConfig& ec, std::vector<Piece> pieces,
                                  const EISolution& baseline) {
    ec.validate();
    params.validate();
    ECProblem prob;
    prob.config = &config;
    prob.params = &params;
    prob.ec = ec;
    prob.pieces = std::move(pieces);
    prob.adjacency = build_adjacency(prob.pieces, ec.d_adj, ec.alpha_al);
    prob.piece_adj.resize(prob.pieces.size());
    for (std::size_t e = 0; e < prob.adjacency.size(); ++e) {
        prob.piece_adj[static_cast<std::size_t>(prob.adjacency[e].i)].push_back(
            static_cast<int>(e));
        prob.piece_adj[static_cast<std::size_t>(prob.adjacency[e].j)].push_back(
            static_cast<int>(e));
    }
    prob.score.resize(prob.pieces.size());
    for (std::size_t q = 0; q < prob.pieces.size(); ++q)
        prob.score[q] = piece_score(prob.pieces[q], ec);

    prob.plot_arcs.resize(config.plots.size());
    prob.plot_cells.resize(config.plots.size());
    for (const Piece& piece : prob.pieces) {
        if (piece.kind == PieceKind::MarginArc)
            prob.plot_arcs[static_cast<std::size_t>(piece.plot_id)].push_back(piece.id);
        else if (piece.kind == PieceKind::HabitatCell)
            prob.plot_cells[static_cast<std::size_t>(piece.plot_id)].push_back(piece.id);
    }

    prob.farm_npv_base = baseline.farm_npv;
    prob.base_margin.assign(config.plots.size(), 0.0);
    prob.base_habitat.assign(config.plots.size(), 0.0);
    if (!baseline.decisions.margin.empty()) {
        prob.base_margin = baseline.decisions.margin;
        prob.base_habitat = baseline.decisions.habitat;
    }

    const EconomicParams& econ = params.econ;
    const double annuity = annuity_factor(econ.discount_rate, econ.horizon_years);
    prob.plot_econ.resize(config.plots.size());
    std::map<double, double> disc_cache;
    const auto discounted_accumulation = [&](double rate) {
        const auto it = disc_cache.find(rate);
        if (it != disc_cache.end()) return it->second;
        double acc = 0.0;
        for (int t = 1; t <= econ.horizon_years; ++t)
            acc += time_accumulation(rate, static_cast<double>(t)) *
                   std::pow(1.0 + econ.discount_rate, -t);
        disc_cache[rate] = acc;
        return acc;
    };

    for (const Plot& plot : config.plots) {
        ECProblem::PlotEcon pe;
        pe.agricultural = plot.agricultural();
        pe.farm_id = plot.farm_id;
        pe.annuity = annuity;
        pe.perimeter = plot.perimeter;
        pe.area = plot.area;
        if (plot.agricultural()) {
            const CropParams& cp = params.crop(plot.label);
            pe.base = -annuity * plot.area * econ.c_ag_maint;
            pe.cost_margin = plot.area * (econ.c_margin_impl + annuity * econ.c_margin_maint);
            pe.cost_habitat =
                plot.area * (econ.c_habitat_impl +
                             annuity * (econ.c_habitat_maint - econ.c_ag_maint));
            pe.revenue_scale = cp.price * plot.area * plot.base_yield;
        } else {
            pe.habitat_npv = -annuity * plot.area * econ.c_exist_habitat;
        }
        prob.plot_econ[static_cast<std::size_t>(plot.id)] = pe;
    }

    prob.reach.resize(prob.pieces.size());
    for (const Piece& piece : prob.pieces) {
        const Plot& home = config.plots[static_cast<std::size_t>(piece.plot_id)];
        double fraction = 1.0;
        if (piece.kind == PieceKind::MarginArc)
            fraction = piece.length / home.perimeter;
        else if (piece.kind == PieceKind::HabitatCell)
            fraction = piece.area / home.area;
        for (const Plot& plot : config.plots) {
            if (!plot.agricultural()) continue;
            if (params.restrict_to_own_farm && plot.farm_id != home.farm_id) continue;
            const double d = distance(piece.centroid, plot.centroid);
            if (d > ec.d_neib) continue;
            const CropParams& cp = params.crop(plot.label);
            double coef = 0.0;
            if (piece.kind == PieceKind::MarginArc) {
                coef = fraction * (cp.alpha * std::exp(-cp.beta * d) *
                                       discounted_accumulation(cp.gamma) +
                                   cp.delta * std::exp(-cp.epsilon * d) *
                                       discounted_accumulation(cp.zeta));
            } else {
                coef = fraction * (cp.alpha_h * std::exp(-cp.beta_h * d) *
                                       discounted_accumulation(cp.gamma_h) +
                                   cp.delta_h * std::exp(-cp.epsilon_h * d) *
                                       discounted_accumulation(cp.zeta_h));
            }
            if (coef != 0.0)
                prob.reach[static_cast<std::size_t>(piece.id)].push_back({plot.id, coef});
        }
    }
    return prob;
}

inline ECProblem build_ec_problem(const LandscapeConfiguration& config, const EIParams& params,
                                  const ECConfig& ec, const EISolution& baseline) {
    return build_ec_problem(config, params, ec, discretize(config, ec, ec.seed), baseline);
}

// Z = sum_i s_i x_i + sum_{(i,j) in A} w_ij x_i x_j.
inline double objective_z(const std::vector<std::uint8_t>& x, const ECProblem& prob) {
    double z = 0.0;
    for (std::size_t q = 0; q < prob.pieces.size(); ++q)
        if (x[q]) z += prob.score[q];
    for (const AdjacencyPair& e : prob.adjacency)
        if (x[static_cast<std::size_t>(e.i)] && x[static_cast<std::size_t>(e.j)]) z += e.weight;
    return z;
}

// Same objective with the y variables kept explicit and set to their optimal
// linearized values (y <= x_i, y <= x_j, y >= x_i + x_j - 1).
inline double objective_z_linearized(const std::vector<std::uint8_t>& x, const ECProblem& prob) {
    double z = 0.0;
    for (std::size_t q = 0; q < prob.pieces.size(); ++q)
        if (x[q]) z += prob.score[q];
    for (const AdjacencyPair& e : prob.adjacency) {
        const int y = std::min(x[static_cast<std::size_t>(e.i)], x[static_cast<std::size_t>(e.j)]);
        z += e.weight * static_cast<double>(y);
    }
    return z;
}

inline std::pair<double, double> effective_fractions(const std::vector<std::uint8_t>& x,
                                                     int plot_id, const ECProblem& prob) {
    const auto& pe = prob.plot_econ[static_cast<std::size_t>(plot_id)];
    double len = 0.0, area = 0.0;
    for (int q : prob.plot_arcs[static_cast<std::size_t>(plot_id)])
        if (x[static_cast<std::size_t>(q)]) len += prob.pieces[static_cast<std::size_t>(q)].length;
    for (int q : prob.plot_cells[static_cast<std::size_t>(plot_id)])
        if (x[static_cast<std::size_t>(q)]) area += prob.pieces[static_cast<std::size_t>(q)].area;
    return {len / pe.perimeter, area / pe.area};
}

// Incremental state for flip-based search: selection, per-plot effective
// fractions and service sums, plot/farm NPVs, and the running objective.
class ECEvaluator {
public:
    explicit ECEvaluator(const ECProblem& prob) : prob_(&prob) {
        const std::size_t np = prob.pieces.size();
        const std::size_t nplots = prob.config->plots.size();
        x_.assign(np, 0);
        sel_len_.assign(nplots, 0.0);
        sel_area_.assign(nplots, 0.0);
        service_.assign(nplots, 0.0);
        plot_npv_.assign(nplots, 0.0);
        for (const Farm& farm : prob.config->farms) {
            farm_index_[farm.id] = static_cast<int>(farm_npv_.size());
            farm_npv_.push_back(0.0);
            farm_base_.push_back(prob.farm_npv_base.count(farm.id)
                                     ? prob.farm_npv_base.at(farm.id)
                                     : 0.0);
        }
        for (std::size_t p = 0; p < nplots; ++p) {
            plot_npv_[p] = plot_npv_value(static_cast<int>(p));
            farm_npv_[farm_slot(static_cast<int>(p))] += plot_npv_[p];
        }
        z_ = 0.0;
        for (const Piece& piece : prob.pieces)
            if (piece.fixed_selected()) flip(piece.id);
    }

    const std::vector<std::uint8_t>& selection() const { return x_; }
    double z() const { return z_; }
    bool selected(int q) const { return x_[static_cast<std::size_t>(q)] != 0; }

    // Objective change a flip of q would cause.
    double flip_delta_z(int q) const {
        const std::size_t qi = static_cast<std::size_t>(q);
        double delta = prob_->score[qi];
        for (int e : prob_->piece_adj[qi]) {
            const AdjacencyPair& pair = prob_->adjacency[static_cast<std::size_t>(e)];
            const int other = pair.i == q ? pair.j : pair.i;
            if (x_[static_cast<std::size_t>(other)]) delta += pair.weight;
        }
        return x_[qi] ? -delta : delta;
    }

    void flip(int q) {
        const std::size_t qi = static_cast<std::size_t>(q);
        z_ += flip_delta_z(q);
        const double sign = x_[qi] ? -1.0 : 1.0;
        x_[qi] ^= 1;
        const Piece& piece = prob_->pieces[qi];
        touch_plot(piece.plot_id, [&] {
            sel_len_[static_cast<std::size_t>(piece.plot_id)] += sign * piece.length;
            sel_area_[static_cast<std::size_t>(piece.plot_id)] += sign * piece.area;
        });
        for (const auto& r : prob_->reach[qi]) {
            touch_plot(r.plot_id, [&] {
                service_[static_cast<std::size_t>(r.plot_id)] += sign * r.coef;
            });
        }
    }

    double plot_npv(int plot_id) const { return plot_npv_[static_cast<std::size_t>(plot_id)]; }
    double farm_npv(int farm_id) const { return farm_npv_[slot(farm_id)]; }
    double farm_base(int farm_id) const { return farm_base_[slot(farm_id)]; }

    // Worst slack of N_f_new - (1 - rho) N_f_base across farms; >= 0 iff feasible.
    double worst_farm_slack() const {
        double worst = std::numeric_limits<double>::infinity();
        for (std::size_t f = 0; f < farm_npv_.size(); ++f)
            worst = std::min(worst, farm_npv_[f] - (1.0 - prob_->ec.rho_max) * farm_base_[f]);
        return worst;
    }

    int most_violating_farm() const {
        int worst_farm = -1;
        double worst = 0.0;
        for (const auto& [fid, slot_idx] : farm_index_) {
            const double slack =
                farm_npv_[static_cast<std::size_t>(slot_idx)] -
                (1.0 - prob_->ec.rho_max) * farm_base_[static_cast<std::size_t>(slot_idx)];
            if (slack < worst) {
                worst = slack;
                worst_farm = fid;
            }
        }
        return worst_farm;
    }

    bool feasible() const { return worst_farm_slack() >= -1e-9; }

    double fraction_margin(int plot_id) const {
        return sel_len_[static_cast<std::size_t>(plot_id)] /
               prob_->plot_econ[static_cast<std::size_t>(plot_id)].perimeter;
    }
    double fraction_habitat(int plot_id) const {
        return sel_area_[static_cast<std::size_t>(plot_id)] /
               prob_->plot_econ[static_cast<std::size_t>(plot_id)].area;
    }
    double service_sum(int plot_id) const {
        return service_[static_cast<std::size_t>(plot_id)];
    }

    void set_selection(const std::vector<std::uint8_t>& x) {
        for (std::size_t q = 0; q < x.size(); ++q)
            if (x_[q] != x[q]) flip(static_cast<int>(q));
    }

private:
    std::size_t slot(int farm_id) const {
        return static_cast<std::size_t>(farm_index_.at(farm_id));
    }
    std::size_t farm_slot(int plot_id) const {
        return slot(prob_->config->plots[static_cast<std::size_t>(plot_id)].farm_id);
    }

    double plot_npv_value(int plot_id) const {
        const auto& pe = prob_->plot_econ[static_cast<std::size_t>(plot_id)];
        if (!pe.agricultural) return pe.habitat_npv;
        const std::size_t p = static_cast<std::size_t>(plot_id);
        const double fm = sel_len_[p] / pe.perimeter;
        const double fh = sel_area_[p] / pe.area;
        return pe.base - pe.cost_margin * fm - pe.cost_habitat * fh +
               pe.revenue_scale * (1.0 - fh) * (pe.annuity + service_[p]);
    }

    template <typename Fn>
    void touch_plot(int plot_id, Fn&& update) {
        const std::size_t p = static_cast<std::size_t>(plot_id);
        const double before = plot_npv_[p];
        update();
        plot_npv_[p] = plot_npv_value(plot_id);
        farm_npv_[farm_slot(plot_id)] += plot_npv_[p] - before;
    }

    const ECProblem* prob_;
    std::vector<std::uint8_t> x_;
    std::vector<double> sel_len_, sel_area_, service_, plot_npv_;
    std::map<int, int> farm_index_;
    std::vector<double> farm_npv_, farm_base_;
    double z_ = 0.0;
};

struct FarmReportRow {
    int farm_id = 0;
    double npv_base = 0.0;
    double npv_new = 0.0;
    double loss_ratio = 0.0;  // (base - new) / |base|
    bool feasible = true;
};

struct ECSolution {
    std::vector<std::uint8_t> x;
    double z = 0.0;
    std::vector<double> fraction_margin;   // per plot
    std::vector<double> fraction_habitat;  // per plot
    std::vector<double> yield_factor;      // discounted-average yield multiplier
    std::vector<double> plot_npv;
    std::map<int, double> farm_npv;
    std::vector<FarmReportRow> farm_report;
    bool feasible = true;
};

inline std::pair<std::vector<double>, std::map<int, double>> recalc_npv(
    const std::vector<std::uint8_t>& x, const ECProblem& prob) {
    ECEvaluator eval(prob);
    eval.set_selection(x);
    std::vector<double> plot_npv(prob.config->plots.size());
    for (const Plot& plot : prob.config->plots) plot_npv[static_cast<std::size_t>(plot.id)] =
        eval.plot_npv(plot.id);
    std::map<int, double> farm_npv;
    for (const Farm& farm : prob.config->farms) farm_npv[farm.id] = eval.farm_npv(farm.id);
    return {std::move(plot_npv), std::move(farm_npv)};
}

inline ECSolution make_solution(const ECEvaluator& eval, const ECProblem& prob) {
    ECSolution sol;
    sol.x = eval.selection();
    // Recompute from scratch: the incremental z can carry fp drift after long walks.
    sol.z = objective_z(sol.x, prob);
    const std::size_t nplots = prob.config->plots.size();
    sol.fraction_margin.resize(nplots, 0.0);
    sol.fraction_habitat.resize(nplots, 0.0);
    sol.yield_factor.resize(nplots, 1.0);
    sol.plot_npv.resize(nplots, 0.0);
    for (const Plot& plot : prob.config->plots) {
        const std::size_t p = static_cast<std::size_t>(plot.id);
        sol.plot_npv[p] = eval.plot_npv(plot.id);
        if (!plot.agricultural()) continue;
        sol.fraction_margin[p] = eval.fraction_margin(plot.id);
        sol.fraction_habitat[p] = eval.fraction_habitat(plot.id);
        const auto& pe = prob.plot_econ[p];
        sol.yield_factor[p] = (pe.annuity + eval.service_sum(plot.id)) / pe.annuity;
    }
    sol.feasible = true;
    for (const Farm& farm : prob.config->farms) {
        FarmReportRow row;
        row.farm_id = farm.id;
        row.npv_base = eval.farm_base(farm.id);
        row.npv_new = eval.farm_npv(farm.id);
        row.loss_ratio = row.npv_base != 0.0
                             ? (row.npv_base - row.npv_new) / std::abs(row.npv_base)
                             : 0.0;
        row.feasible =
            row.npv_new >= (1.0 - prob.ec.rho_max) * row.npv_base - 1e-9;
        sol.feasible = sol.feasible && row.feasible;
        sol.farm_npv[farm.id] = row.npv_new;
        sol.farm_report.push_back(row);
    }
    return sol;
}

namespace detail {

inline int round_half_up(double v) { return static_cast<int>(std::floor(v + 0.5)); }

// All k-subsets of {0..n-1}, in lexicographic order.
inline std::vector<std::vector<int>> k_subsets(int n, int k) {
    std::vector<std::vector<int>> out;
    std::vector<int> idx(static_cast<std::size_t>(k));
    std::iota(idx.begin(), idx.end(), 0);
    if (k == 0) {
        out.push_back({});
        return out;
    }
    if (k > n) return out;
    while (true) {
        out.push_back(idx);
        int pos = k - 1;
        while (pos >= 0 && idx[static_cast<std::size_t>(pos)] == n - k + pos) --pos;
        if (pos < 0) break;
        ++idx[static_cast<std::size_t>(pos)];
        for (int t = pos + 1; t < k; ++t)
            idx[static_cast<std::size_t>(t)] = idx[static_cast<std::size_t>(t - 1)] + 1;
    }
    return out;
}

}  // namespace detail

// Re-places the upstream per-plot intervention amounts on the discretized
// grid: round(m_p * S_b) arcs and round(h_p * S_c) cells per plot, chosen to
// maximize Z by per-plot exhaustive best response to convergence.
inline ECSolution reposition(const ECProblem& prob) {
    ECEvaluator eval(prob);
    const auto plot_count = prob.config->plots.size();

    struct PlotChoice {
        int plot_id = 0;
        std::vector<std::vector<int>> combos;  // each combo: piece ids to select
        int current = -1;
    };
    std::vector<PlotChoice> choices;
    for (std::size_t p = 0; p < plot_count; ++p) {
        const Plot& plot = prob.config->plots[p];
        if (!plot.agricultural()) continue;
        const auto& arcs = prob.plot_arcs[p];
        const auto& cells = prob.plot_cells[p];
        const int want_arcs = std::min<int>(
            static_cast<int>(arcs.size()),
            detail::round_half_up(prob.base_margin[p] * prob.ec.boundary_segments));
        const int want_cells = std::min<int>(
            static_cast<int>(cells.size()),
            detail::round_half_up(prob.base_habitat[p] * prob.ec.interior_cells));
        PlotChoice choice;
        choice.plot_id = plot.id;
        const auto arc_sets = detail::k_subsets(static_cast<int>(arcs.size()), want_arcs);
        const auto cell_sets = detail::k_subsets(static_cast<int>(cells.size()), want_cells);
        for (const auto& as : arc_sets) {
            for (const auto& cs : cell_sets) {
                std::vector<int> combo;
                for (int a : as) combo.push_back(arcs[static_cast<std::size_t>(a)]);
                for (int c : cs) combo.push_back(cells[static_cast<std::size_t>(c)]);
                choice.combos.push_back(std::move(combo));
            }
        }
        if (!choice.combos.empty()) choices.push_back(std::move(choice));
    }

    const auto apply_combo = [&](PlotChoice& choice, int combo_idx) {
        if (choice.current == combo_idx) return;
        if (choice.current >= 0)
            for (int q : choice.combos[static_cast<std::size_t>(choice.current)]) eval.flip(q);
        for (int q : choice.combos[static_cast<std::size_t>(combo_idx)]) eval.flip(q);
        choice.current = combo_idx;
    };

    for (auto& choice : choices) apply_combo(choice, 0);

    // Best-response sweeps across plots until Z stops improving.
    for (int pass = 0; pass < 50; ++pass) {
        bool improved = false;
        for (auto& choice : choices) {
            if (choice.combos.size() < 2) continue;
            int best_idx = choice.current;
            double best_z = eval.z();
            const int saved = choice.current;
            for (int c = 0; c < static_cast<int>(choice.combos.size()); ++c) {
                if (c == saved) continue;
                apply_combo(choice, c);
                if (eval.z() > best_z + 1e-12) {
                    best_z = eval.z();
                    best_idx = c;
                }
            }
            apply_combo(choice, best_idx);
            improved = improved || best_idx != saved;
        }
        if (!improved) break;
    }
    return make_solution(eval, prob);
}

// Exhaustive search over all free selections; refuses instances above the
// configured cap. Returns the best feasible solution (all-fixed selection if
// nothing else is feasible and itself feasible).
inline ECSolution enumerate_oracle(const ECProblem& prob) {
    const auto free_ids = prob.free_piece_ids();
    if (static_cast<int>(free_ids.size()) > prob.ec.oracle_cap)
        throw std::invalid_argument("enumerate_oracle: " + std::to_string(free_ids.size()) +
                                    " free pieces exceed the cap of " +
                                    std::to_string(prob.ec.oracle_cap));
    ECEvaluator eval(prob);
    bool have_best = false;
    double best_z = -std::numeric_limits<double>::infinity();
    std::vector<std::uint8_t> best_x = eval.selection();
    if (eval.feasible()) {
        have_best = true;
        best_z = eval.z();
    }
    const std::size_t n = free_ids.size();
    // Gray-code walk: exactly one flip per visited assignment.
    const std::uint64_t total = 1ULL << n;
    std::uint64_t prev_gray = 0;
    for (std::uint64_t k = 1; k < total; ++k) {
        const std::uint64_t gray = k ^ (k >> 1);
        const std::uint64_t changed = gray ^ prev_gray;
        prev_gray = gray;
        int bit = 0;
        while (!((changed >> bit) & 1ULL)) ++bit;
        eval.flip(free_ids[static_cast<std::size_t>(bit)]);
        if (eval.feasible() && (!have_best || eval.z() > best_z + 1e-12)) {
            have_best = true;
            best_z = eval.z();
            best_x = eval.selection();
        }
    }
    eval.set_selection(best_x);
    auto sol = make_solution(eval, prob);
    sol.feasible = have_best;
    return sol;
}

// Heuristic connectivity maximization under the per-farm NPV floors:
// greedy construction, 1-flip and swap local search, then simulated
// annealing restarts with feasibility repair. Deterministic given ec.seed.
inline ECSolution optimize_connectivity(const ECProblem& prob) {
    for (const Farm& farm : prob.config->farms) {
        const auto it = prob.farm_npv_base.find(farm.id);
        const double base = it == prob.farm_npv_base.end() ? 0.0 : it->second;
        if (base <= 0.0)
            throw std::invalid_argument(
                "optimize_connectivity: farm " + std::to_string(farm.id) +
                " has non-positive baseline NPV; the loss-ratio constraint is undefined");
    }

    const auto free_ids = prob.free_piece_ids();
    ECEvaluator eval(prob);

    const auto repair = [&](std::vector<int>* journal) {
        // Deselect the lowest-marginal-Z selected piece on the most violating
        // farm until feasible.
        int guard = 0;
        while (!eval.feasible() && guard++ < static_cast<int>(prob.pieces.size()) + 1) {
            const int farm = eval.most_violating_farm();
            int victim = -1;
            double victim_delta = std::numeric_limits<double>::infinity();
            for (int q : free_ids) {
                if (!eval.selected(q)) continue;
                const Piece& piece = prob.pieces[static_cast<std::size_t>(q)];
                if (prob.config->plots[static_cast<std::size_t>(piece.plot_id)].farm_id != farm)
                    continue;
                const double delta = -eval.flip_delta_z(q);  // Z lost by removing q
                if (delta < victim_delta) {
                    victim_delta = delta;
                    victim = q;
                }
            }
            if (victim < 0) break;
            eval.flip(victim);
            if (journal) journal->push_back(victim);
        }
    };

    // Free pieces in descending static score order, as the greedy visit order.
    std::vector<int> greedy_order = free_ids;
    std::sort(greedy_order.begin(), greedy_order.end(), [&](int a, int b) {
        const double sa = prob.score[static_cast<std::size_t>(a)];
        const double sb = prob.score[static_cast<std::size_t>(b)];
        if (sa != sb) return sa > sb;
        return a < b;
    });

    const auto greedy_fill = [&]() {
        for (int pass = 0; pass < 20; ++pass) {
            bool changed = false;
            for (int q : greedy_order) {
                if (eval.selected(q)) continue;
                if (eval.flip_delta_z(q) <= 0.0) continue;
                eval.flip(q);
                if (eval.feasible())
                    changed = true;
                else
                    eval.flip(q);
            }
            if (!changed) break;
        }
    };

    const auto local_search = [&]() {
        for (int pass = 0; pass < 30; ++pass) {
            bool improved = false;
            for (int add : greedy_order) {
                if (eval.selected(add)) continue;
                const double gain = eval.flip_delta_z(add);
                if (gain <= 1e-12) continue;
                eval.flip(add);
                if (eval.feasible()) {
                    improved = true;
                    continue;
                }
                // Swap: drop a cheaper selected piece on the violating farm.
                const int farm = eval.most_violating_farm();
                bool swapped = false;
                for (int drop : free_ids) {
                    if (drop == add || !eval.selected(drop)) continue;
                    const Piece& piece = prob.pieces[static_cast<std::size_t>(drop)];
                    if (prob.config->plots[static_cast<std::size_t>(piece.plot_id)].farm_id !=
                        farm)
                        continue;
                    const double loss = -eval.flip_delta_z(drop);
                    if (loss >= gain) continue;
                    eval.flip(drop);
                    if (eval.feasible()) {
                        swapped = true;
                        break;
                    }
                    eval.flip(drop);
                }
                if (swapped)
                    improved = true;
                else
                    eval.flip(add);
            }
            if (!improved) break;
        }
    };

    // Candidate starts: repositioned layout (repaired) and empty selection.
    std::vector<std::uint8_t> best_x;
    double best_z = -std::numeric_limits<double>::infinity();
    bool have_best = false;
    const auto consider = [&]() {
        if (eval.feasible() && (!have_best || eval.z() > best_z)) {
            best_z = eval.z();
            best_x = eval.selection();
            have_best = true;
        }
    };

    {
        const ECSolution repo = reposition(prob);
        eval.set_selection(repo.x);
        repair();
        greedy_fill();
        local_search();
        consider();
    }

    ECEvaluator fresh(prob);
    eval.set_selection(fresh.selection());
    greedy_fill();
    local_search();
    consider();

    // Simulated annealing restarts around the incumbent.
    double t0 = prob.ec.anneal_initial_temp;
    if (t0 <= 0.0) {
        double mean_score = 0.0;
        for (int q : free_ids) mean_score += prob.score[static_cast<std::size_t>(q)];
        t0 = free_ids.empty() ? 1.0 : std::max(1e-3, mean_score / static_cast<double>(free_ids.size()));
    }
    for (int restart = 0; restart < prob.ec.anneal_restarts && !free_ids.empty(); ++restart) {
        RngStream rng(derive_seed(prob.ec.seed, "ec-anneal", static_cast<std::uint64_t>(restart)));
        if (have_best) eval.set_selection(best_x);
        double temp = t0;
        double stage_best = eval.feasible() ? eval.z() : -std::numeric_limits<double>::infinity();
        int stale_stages = 0;
        for (int sweep = 0; sweep < prob.ec.anneal_sweeps; ++sweep) {
            for (std::size_t step = 0; step < free_ids.size(); ++step) {
                const int q =
                    free_ids[static_cast<std::size_t>(rng.uniform_int(
                        0, static_cast<int>(free_ids.size()) - 1))];
                const double before_z = eval.z();
                const auto before_x = eval.selection();
                eval.flip(q);
                if (!eval.feasible()) repair();
                const double delta = eval.z() - before_z;
                if (delta >= 0.0 || rng.uniform() < std::exp(delta / temp)) {
                    consider();
                } else {
                    eval.set_selection(before_x);
                }
            }
            temp *= prob.ec.anneal_cooling;
            if (have_best && best_z > stage_best + prob.ec.eps_sol) {
                stage_best = best_z;
                stale_stages = 0;
            } else if (++stale_stages >= 40) {
                break;
            }
        }
        if (have_best) {
            eval.set_selection(best_x);
            local_search();
            consider();
        }
    }

    if (have_best) eval.set_selection(best_x);
    auto sol = make_solution(eval, prob);
    sol.feasible = have_best && sol.feasible;
    return sol;
}

}  // namespace agriconn
