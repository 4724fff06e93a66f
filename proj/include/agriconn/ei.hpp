#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "agriconn/landscape.hpp"
#include "agriconn/params.hpp"
#include "agriconn/rng.hpp"

namespace agriconn {

// Fraction of the asymptotic service effect reached after t years.
inline double time_accumulation(double rate, double t) {
    return 1.0 - std::exp(-rate * t);
}

// Discount factor sum over the horizon: sum_t (1+r)^-t.
inline double annuity_factor(double rate, int years) {
    double acc = 0.0;
    for (int t = 1; t <= years; ++t) acc += std::pow(1.0 + rate, -t);
    return acc;
}

// Per-plot intervention fractions, indexed by plot id. Entries for habitat
// plots stay zero.
struct EIDecision {
    std::vector<double> margin;
    std::vector<double> habitat;

    static EIDecision zeros(std::size_t n_plots) {
        return {std::vector<double>(n_plots, 0.0), std::vector<double>(n_plots, 0.0)};
    }
};

namespace detail {

// Neighbor list for service sums: agricultural contributors and existing
// habitat plots, respecting the own-farm restriction.
struct ServiceNeighbors {
    std::vector<int> contributors;  // agricultural, includes i itself
    std::vector<int> habitats;      // existing habitat plots in N(i)
};

inline ServiceNeighbors service_neighbors(const LandscapeConfiguration& config, int i,
                                          bool restrict_to_own_farm) {
    ServiceNeighbors out;
    const Plot& self = config.plots[static_cast<std::size_t>(i)];
    out.contributors.push_back(i);
    for (int j : config.neighbor_sets[static_cast<std::size_t>(i)]) {
        const Plot& other = config.plots[static_cast<std::size_t>(j)];
        if (restrict_to_own_farm && other.farm_id != self.farm_id) continue;
        if (other.agricultural())
            out.contributors.push_back(j);
        else
            out.habitats.push_back(j);
    }
    return out;
}

}  // namespace detail

// Fractional yield increase from pollination services reaching plot i at year t.
inline double pollination_effect(int i, const EIDecision& decisions, double t,
                                 const LandscapeConfiguration& config, const EIParams& params) {
    const Plot& plot = config.plots[static_cast<std::size_t>(i)];
    const CropParams& cp = params.crop(plot.label);
    const auto nbrs = detail::service_neighbors(config, i, params.restrict_to_own_farm);
    const double margin_t = time_accumulation(cp.gamma, t);
    const double habitat_t = time_accumulation(cp.gamma_h, t);
    double acc = 0.0;
    for (int j : nbrs.contributors) {
        const double d = config.dist(i, j);
        acc += cp.alpha * decisions.margin[static_cast<std::size_t>(j)] *
               std::exp(-cp.beta * d) * margin_t;
        acc += cp.alpha_h * decisions.habitat[static_cast<std::size_t>(j)] *
               std::exp(-cp.beta_h * d) * habitat_t;
    }
    for (int k : nbrs.habitats) {
        const double d = config.dist(i, k);
        acc += cp.alpha_h * std::exp(-cp.beta_h * d) * habitat_t;
    }
    return acc;
}

// Fractional yield increase from pest suppression; same structure with the
// pest-control parameter set.
inline double pest_effect(int i, const EIDecision& decisions, double t,
                          const LandscapeConfiguration& config, const EIParams& params) {
    const Plot& plot = config.plots[static_cast<std::size_t>(i)];
    const CropParams& cp = params.crop(plot.label);
    const auto nbrs = detail::service_neighbors(config, i, params.restrict_to_own_farm);
    const double margin_t = time_accumulation(cp.zeta, t);
    const double habitat_t = time_accumulation(cp.zeta_h, t);
    double acc = 0.0;
    for (int j : nbrs.contributors) {
        const double d = config.dist(i, j);
        acc += cp.delta * decisions.margin[static_cast<std::size_t>(j)] *
               std::exp(-cp.epsilon * d) * margin_t;
        acc += cp.delta_h * decisions.habitat[static_cast<std::size_t>(j)] *
               std::exp(-cp.epsilon_h * d) * habitat_t;
    }
    for (int k : nbrs.habitats) {
        const double d = config.dist(i, k);
        acc += cp.delta_h * std::exp(-cp.epsilon_h * d) * habitat_t;
    }
    return acc;
}

inline double combined_yield(int i, const EIDecision& decisions, double t,
                             const LandscapeConfiguration& config, const EIParams& params) {
    const Plot& plot = config.plots[static_cast<std::size_t>(i)];
    return plot.base_yield * (1.0 + pollination_effect(i, decisions, t, config, params) +
                              pest_effect(i, decisions, t, config, params));
}

// Discounted cash flow of an agricultural plot: one-time implementation cost
// at t=0, then annual revenue minus maintenance over the horizon.
inline double plot_npv_agricultural(int i, const EIDecision& decisions,
                                    const LandscapeConfiguration& config,
                                    const EIParams& params) {
    const Plot& plot = config.plots[static_cast<std::size_t>(i)];
    const EconomicParams& econ = params.econ;
    const CropParams& cp = params.crop(plot.label);
    const double m = decisions.margin[static_cast<std::size_t>(i)];
    const double h = decisions.habitat[static_cast<std::size_t>(i)];
    const double area = plot.area;
    double npv = -area * (m * econ.c_margin_impl + h * econ.c_habitat_impl);
    const double maint =
        area * (m * econ.c_margin_maint + h * econ.c_habitat_maint + (1.0 - h) * econ.c_ag_maint);
    for (int t = 1; t <= econ.horizon_years; ++t) {
        const double yield = combined_yield(i, decisions, static_cast<double>(t), config, params);
        const double revenue = yield * cp.price * area * (1.0 - h);
        npv += (revenue - maint) * std::pow(1.0 + econ.discount_rate, -t);
    }
    return npv;
}

// Existing habitat plots only carry their annual upkeep.
inline double plot_npv_habitat(int k, const LandscapeConfiguration& config,
                               const EconomicParams& econ) {
    const Plot& plot = config.plots[static_cast<std::size_t>(k)];
    return -plot.area * econ.c_exist_habitat * annuity_factor(econ.discount_rate, econ.horizon_years);
}

inline double ei_objective(const LandscapeConfiguration& config, const EIDecision& decisions,
                           const EIParams& params) {
    double acc = 0.0;
    for (const Plot& plot : config.plots) {
        if (plot.agricultural()) {
            acc += plot_npv_agricultural(plot.id, decisions, config, params);
            const double m = decisions.margin[static_cast<std::size_t>(plot.id)];
            const double h = decisions.habitat[static_cast<std::size_t>(plot.id)];
            acc -= params.econ.lambda * (m * m + h * h);
        } else {
            acc += plot_npv_habitat(plot.id, config, params.econ);
        }
    }
    return acc;
}

// Policy-induced modifications to the baseline economics. Defaults are the
// identity: applying them changes nothing, bit for bit.
struct EIAdjustments {
    std::vector<double> price_mult;         // per plot; eco-premium factor
    std::vector<double> margin_impl_mult;   // per plot; (1 - establishment subsidy)
    std::vector<double> habitat_impl_mult;  // per plot
    double margin_maint_mult = 1.0;         // (1 - maintenance subsidy)
    double habitat_maint_mult = 1.0;
    double habitat_payment_per_ha = 0.0;    // annual USD/ha on converted area
    std::vector<double> margin_lower_bound; // per plot; mandated minimum m_i
    std::map<int, double> farm_min_habitat_area;  // farm_id -> ha
    double mandate_penalty_weight = 1e6;    // USD per squared hectare of deficit

    static EIAdjustments identity(std::size_t n_plots) {
        EIAdjustments adj;
        adj.price_mult.assign(n_plots, 1.0);
        adj.margin_impl_mult.assign(n_plots, 1.0);
        adj.habitat_impl_mult.assign(n_plots, 1.0);
        adj.margin_lower_bound.assign(n_plots, 0.0);
        return adj;
    }
};

struct EISolution {
    EIDecision decisions;
    std::vector<double> plot_npv;      // per plot id
    std::map<int, double> farm_npv;    // farm_id -> sum of member plot NPVs
    double objective = 0.0;
    int iterations = 0;
    double projected_gradient_norm = 0.0;
    int restarts = 0;
    bool converged = false;
};

// Precomputed quadratic form of the EI objective over the packed decision
// vector [m_0..m_{A-1}, h_0..h_{A-1}] (agricultural plots only). The service
// sums collapse into distance-decayed coupling coefficients with the time
// accumulation folded into discounted-sum factors.
class EIModel {
public:
    struct MandateBlock {
        double min_area = 0.0;
        std::vector<int> ag_positions;
        std::vector<double> areas;
    };

    EIModel(const LandscapeConfiguration& config, const EIParams& params)
        : EIModel(config, params, EIAdjustments::identity(config.plots.size())) {}

    EIModel(const LandscapeConfiguration& config, const EIParams& params, EIAdjustments adj)
        : config_(&config), params_(&params), adj_(std::move(adj)) {
        params.validate();
        const EconomicParams& econ = params.econ;
        annuity_ = annuity_factor(econ.discount_rate, econ.horizon_years);

        const std::size_t n = config.plots.size();
        ag_index_.assign(n, -1);
        for (const Plot& plot : config.plots) {
            if (plot.agricultural()) {
                ag_index_[static_cast<std::size_t>(plot.id)] = static_cast<int>(ag_plots_.size());
                ag_plots_.push_back(plot.id);
            }
        }
        const std::size_t na = ag_plots_.size();
        revenue_scale_.resize(na);
        service_const_.resize(na);
        cost_margin_.resize(na);
        cost_habitat_.resize(na);
        payment_.resize(na);
        base_.resize(na);
        couple_margin_.resize(na);
        couple_habitat_.resize(na);
        couple_targets_.resize(na);

        habitat_base_npv_ = 0.0;
        for (const Plot& plot : config.plots) {
            if (!plot.agricultural())
                habitat_base_npv_ += -plot.area * econ.c_exist_habitat * annuity_;
        }

        for (std::size_t a = 0; a < na; ++a) {
            const int i = ag_plots_[a];
            const Plot& plot = config.plots[static_cast<std::size_t>(i)];
            const CropParams& cp = params.crop(plot.label);
            const double pm = adj_.price_mult[static_cast<std::size_t>(i)];
            revenue_scale_[a] = cp.price * pm * plot.area * plot.base_yield;
            cost_margin_[a] =
                plot.area * (econ.c_margin_impl * adj_.margin_impl_mult[static_cast<std::size_t>(i)] +
                             annuity_ * econ.c_margin_maint * adj_.margin_maint_mult);
            cost_habitat_[a] =
                plot.area * (econ.c_habitat_impl * adj_.habitat_impl_mult[static_cast<std::size_t>(i)] +
                             annuity_ * (econ.c_habitat_maint * adj_.habitat_maint_mult -
                                         econ.c_ag_maint));
            payment_[a] = adj_.habitat_payment_per_ha * plot.area * annuity_;
            base_[a] = -annuity_ * plot.area * econ.c_ag_maint;

            const auto nbrs = detail::service_neighbors(config, i, params.restrict_to_own_farm);
            const double d_gamma = discounted_accumulation(cp.gamma);
            const double d_gamma_h = discounted_accumulation(cp.gamma_h);
            const double d_zeta = discounted_accumulation(cp.zeta);
            const double d_zeta_h = discounted_accumulation(cp.zeta_h);

            service_const_[a] = annuity_;
            for (int k : nbrs.habitats) {
                const double d = config.dist(i, k);
                service_const_[a] += cp.alpha_h * std::exp(-cp.beta_h * d) * d_gamma_h +
                                     cp.delta_h * std::exp(-cp.epsilon_h * d) * d_zeta_h;
            }
            for (int j : nbrs.contributors) {
                const double d = config.dist(i, j);
                const double cm = cp.alpha * std::exp(-cp.beta * d) * d_gamma +
                                  cp.delta * std::exp(-cp.epsilon * d) * d_zeta;
                const double ch = cp.alpha_h * std::exp(-cp.beta_h * d) * d_gamma_h +
                                  cp.delta_h * std::exp(-cp.epsilon_h * d) * d_zeta_h;
                couple_targets_[a].push_back(ag_index_[static_cast<std::size_t>(j)]);
                couple_margin_[a].push_back(cm);
                couple_habitat_[a].push_back(ch);
            }
        }

        for (const Farm& farm : config.farms) {
            const auto it = adj_.farm_min_habitat_area.find(farm.id);
            if (it == adj_.farm_min_habitat_area.end() || it->second <= 0.0) continue;
            MandateBlock block;
            block.min_area = it->second;
            double total = 0.0;
            for (int pid : farm.plot_ids) {
                const int a = ag_index_[static_cast<std::size_t>(pid)];
                if (a < 0) continue;
                block.ag_positions.push_back(a);
                block.areas.push_back(config.plots[static_cast<std::size_t>(pid)].area);
                total += config.plots[static_cast<std::size_t>(pid)].area;
            }
            if (total < block.min_area)
                throw std::invalid_argument("mandate infeasible: farm " + std::to_string(farm.id) +
                                            " has " + std::to_string(total) +
                                            " ha of cropland, mandate needs " +
                                            std::to_string(block.min_area));
            mandates_.push_back(std::move(block));
        }
    }

    std::size_t n_ag() const { return ag_plots_.size(); }
    const std::vector<int>& ag_plot_ids() const { return ag_plots_; }
    int ag_position(int plot_id) const { return ag_index_[static_cast<std::size_t>(plot_id)]; }
    double annuity() const { return annuity_; }
    const EIAdjustments& adjustments() const { return adj_; }

    double lower_bound(std::size_t a) const {
        return adj_.margin_lower_bound[static_cast<std::size_t>(ag_plots_[a])];
    }

    // x = [m..., h...] packed over agricultural plots.
    double objective(std::span<const double> x) const {
        const std::size_t na = ag_plots_.size();
        double acc = habitat_base_npv_;
        for (std::size_t a = 0; a < na; ++a) {
            const double m = x[a];
            const double h = x[na + a];
            acc += plot_npv_packed(a, x);
            acc -= params_->econ.lambda * (m * m + h * h);
        }
        for (const MandateBlock& blk : mandates_) {
            const double deficit = mandate_deficit(blk, x);
            acc -= adj_.mandate_penalty_weight * deficit * deficit;
        }
        return acc;
    }

    void gradient(std::span<const double> x, std::span<double> grad) const {
        const std::size_t na = ag_plots_.size();
        std::fill(grad.begin(), grad.end(), 0.0);
        for (std::size_t a = 0; a < na; ++a) {
            const double h = x[na + a];
            const double w = revenue_scale_[a] * (1.0 - h);
            const auto& targets = couple_targets_[a];
            for (std::size_t t = 0; t < targets.size(); ++t) {
                const std::size_t b = static_cast<std::size_t>(targets[t]);
                grad[b] += w * couple_margin_[a][t];
                grad[na + b] += w * couple_habitat_[a][t];
            }
            grad[a] += -cost_margin_[a] - 2.0 * params_->econ.lambda * x[a];
            grad[na + a] += -cost_habitat_[a] + payment_[a] -
                            2.0 * params_->econ.lambda * h -
                            revenue_scale_[a] * (service_const_[a] + coupling_sum(a, x));
        }
        for (const MandateBlock& blk : mandates_) {
            const double deficit = mandate_deficit(blk, x);
            if (deficit <= 0.0) continue;
            for (std::size_t t = 0; t < blk.ag_positions.size(); ++t) {
                grad[na + static_cast<std::size_t>(blk.ag_positions[t])] +=
                    2.0 * adj_.mandate_penalty_weight * deficit * blk.areas[t];
            }
        }
    }

    double plot_npv_packed(std::size_t a, std::span<const double> x) const {
        const std::size_t na = ag_plots_.size();
        const double m = x[a];
        const double h = x[na + a];
        return base_[a] - cost_margin_[a] * m - cost_habitat_[a] * h + payment_[a] * h +
               revenue_scale_[a] * (1.0 - h) * (service_const_[a] + coupling_sum(a, x));
    }

    // Residual mandated habitat area for each farm at decisions x, in ha.
    double mandate_deficit(const MandateBlock& blk, std::span<const double> x) const {
        const std::size_t na = ag_plots_.size();
        double converted = 0.0;
        for (std::size_t t = 0; t < blk.ag_positions.size(); ++t)
            converted += x[na + static_cast<std::size_t>(blk.ag_positions[t])] * blk.areas[t];
        return std::max(0.0, blk.min_area - converted);
    }

    const std::vector<MandateBlock>& mandates() const { return mandates_; }

    const LandscapeConfiguration& config() const { return *config_; }
    const EIParams& params() const { return *params_; }

private:
    double coupling_sum(std::size_t a, std::span<const double> x) const {
        const std::size_t na = ag_plots_.size();
        const auto& targets = couple_targets_[a];
        double acc = 0.0;
        for (std::size_t t = 0; t < targets.size(); ++t) {
            const std::size_t b = static_cast<std::size_t>(targets[t]);
            acc += couple_margin_[a][t] * x[b] + couple_habitat_[a][t] * x[na + b];
        }
        return acc;
    }

    // sum_t (1 - e^{-rate t}) (1+r)^-t, cached per rate.
    double discounted_accumulation(double rate) {
        const auto it = disc_cache_.find(rate);
        if (it != disc_cache_.end()) return it->second;
        double acc = 0.0;
        for (int t = 1; t <= params_->econ.horizon_years; ++t)
            acc += time_accumulation(rate, static_cast<double>(t)) *
                   std::pow(1.0 + params_->econ.discount_rate, -t);
        disc_cache_[rate] = acc;
        return acc;
    }

    const LandscapeConfiguration* config_;
    const EIParams* params_;
    EIAdjustments adj_;
    double annuity_ = 0.0;
    double habitat_base_npv_ = 0.0;
    std::vector<int> ag_plots_;   // ag position -> plot id
    std::vector<int> ag_index_;   // plot id -> ag position or -1
    std::vector<double> revenue_scale_, service_const_, cost_margin_, cost_habitat_, payment_,
        base_;
    std::vector<std::vector<int>> couple_targets_;
    std::vector<std::vector<double>> couple_margin_, couple_habitat_;
    std::vector<MandateBlock> mandates_;
    std::map<double, double> disc_cache_;
};

// Analytic gradient of the EI objective in per-plot layout, for tests and
// external checks. Habitat entries stay zero.
inline std::pair<std::vector<double>, std::vector<double>> ei_gradient(
    const LandscapeConfiguration& config, const EIDecision& decisions, const EIParams& params) {
    EIModel model(config, params);
    const std::size_t na = model.n_ag();
    std::vector<double> x(2 * na, 0.0);
    for (std::size_t a = 0; a < na; ++a) {
        const std::size_t pid = static_cast<std::size_t>(model.ag_plot_ids()[a]);
        x[a] = decisions.margin[pid];
        x[na + a] = decisions.habitat[pid];
    }
    std::vector<double> g(2 * na, 0.0);
    model.gradient(x, g);
    std::vector<double> gm(config.plots.size(), 0.0), gh(config.plots.size(), 0.0);
    for (std::size_t a = 0; a < na; ++a) {
        const std::size_t pid = static_cast<std::size_t>(model.ag_plot_ids()[a]);
        gm[pid] = g[a];
        gh[pid] = g[na + a];
    }
    return {std::move(gm), std::move(gh)};
}

namespace detail {

struct PgResult {
    std::vector<double> x;
    double objective = 0.0;
    int iterations = 0;
    double pg_norm = 0.0;
    bool converged = false;
};

// Projected gradient ascent with Armijo backtracking along the projected arc.
inline PgResult projected_gradient_ascent(const EIModel& model, std::vector<double> x,
                                          const SolverConfig& solver) {
    const std::size_t dim = x.size();
    const std::size_t na = model.n_ag();
    const auto project = [&](std::vector<double>& v) {
        for (std::size_t a = 0; a < na; ++a) {
            v[a] = std::clamp(v[a], model.lower_bound(a), 1.0);
            v[na + a] = std::clamp(v[na + a], 0.0, 1.0);
        }
    };
    project(x);
    std::vector<double> grad(dim), trial(dim);
    PgResult res;
    double fx = model.objective(x);
    double step = solver.initial_step;
    int it = 0;
    for (; it < solver.max_iterations; ++it) {
        model.gradient(x, grad);
        // Step-1 projected gradient as the stationarity measure.
        double pg_norm = 0.0;
        for (std::size_t d = 0; d < dim; ++d) trial[d] = x[d] + grad[d];
        project(trial);
        for (std::size_t d = 0; d < dim; ++d)
            pg_norm = std::max(pg_norm, std::abs(trial[d] - x[d]));
        res.pg_norm = pg_norm;
        if (pg_norm <= solver.tolerance * (1.0 + std::abs(fx))) {
            res.converged = true;
            break;
        }
        bool accepted = false;
        int backtracks = 0;
        while (step > 1e-18) {
            for (std::size_t d = 0; d < dim; ++d) trial[d] = x[d] + step * grad[d];
            project(trial);
            double dir_deriv = 0.0;
            for (std::size_t d = 0; d < dim; ++d) dir_deriv += grad[d] * (trial[d] - x[d]);
            const double ft = model.objective(trial);
            if (ft >= fx + solver.armijo_c1 * dir_deriv) {
                x = trial;
                fx = ft;
                accepted = true;
                break;
            }
            step *= solver.backtrack_shrink;
            ++backtracks;
        }
        if (!accepted) break;  // line search exhausted; treat as stationary
        if (backtracks == 0) step = std::min(step * 2.0, 1e6);
    }
    res.x = std::move(x);
    res.objective = fx;
    res.iterations = it;
    return res;
}

}  // namespace detail

// Multistart projected-gradient solve of the EI allocation problem.
inline EISolution solve_ei(const LandscapeConfiguration& config, const EIParams& params,
                           const SolverConfig& solver,
                           const EIAdjustments* adjustments = nullptr) {
    solver.validate();
    EIModel model =
        adjustments ? EIModel(config, params, *adjustments) : EIModel(config, params);
    const std::size_t na = model.n_ag();
    if (na == 0) throw std::invalid_argument("solve_ei: configuration has no agricultural plots");
    const std::size_t dim = 2 * na;

    RngStream rng(derive_seed(solver.seed, "ei-multistart", 0));
    std::vector<std::vector<double>> starts;
    const double corners[4][2] = {{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}, {1.0, 1.0}};
    for (int s = 0; s < solver.multistarts; ++s) {
        std::vector<double> x(dim);
        if (s < 4) {
            for (std::size_t a = 0; a < na; ++a) {
                x[a] = corners[s][0];
                x[na + a] = corners[s][1];
            }
        } else {
            for (std::size_t d = 0; d < dim; ++d) x[d] = rng.uniform();
        }
        starts.push_back(std::move(x));
    }

    detail::PgResult best;
    bool have_best = false;
    int total_iterations = 0;
    for (auto& start : starts) {
        auto res = detail::projected_gradient_ascent(model, std::move(start), solver);
        total_iterations += res.iterations;
        if (!have_best || res.objective > best.objective) {
            best = std::move(res);
            have_best = true;
        }
    }

    // Mandate feasibility projection: raise habitat fractions on the plots
    // where the current gradient says conversion is least damaging.
    for (const auto& blk : model.mandates()) {
        double deficit = model.mandate_deficit(blk, best.x);
        if (deficit <= 1e-12) continue;
        std::vector<double> grad(dim);
        model.gradient(best.x, grad);
        std::vector<std::size_t> order(blk.ag_positions.size());
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](std::size_t lhs, std::size_t rhs) {
            const double gl = grad[na + static_cast<std::size_t>(blk.ag_positions[lhs])];
            const double gr = grad[na + static_cast<std::size_t>(blk.ag_positions[rhs])];
            if (gl != gr) return gl > gr;
            return blk.ag_positions[lhs] < blk.ag_positions[rhs];
        });
        for (std::size_t t : order) {
            if (deficit <= 1e-12) break;
            const std::size_t a = static_cast<std::size_t>(blk.ag_positions[t]);
            const double area = blk.areas[t];
            const double headroom = (1.0 - best.x[na + a]) * area;
            const double add = std::min(headroom, deficit);
            best.x[na + a] += add / area;
            deficit -= add;
        }
        best.objective = model.objective(best.x);
    }

    EISolution sol;
    sol.decisions = EIDecision::zeros(config.plots.size());
    for (std::size_t a = 0; a < na; ++a) {
        const std::size_t pid = static_cast<std::size_t>(model.ag_plot_ids()[a]);
        sol.decisions.margin[pid] = best.x[a];
        sol.decisions.habitat[pid] = best.x[na + a];
    }
    sol.objective = best.objective;
    sol.iterations = total_iterations;
    sol.projected_gradient_norm = best.pg_norm;
    sol.restarts = solver.multistarts;
    sol.converged = best.converged;

    sol.plot_npv.assign(config.plots.size(), 0.0);
    for (const Plot& plot : config.plots) {
        const std::size_t pid = static_cast<std::size_t>(plot.id);
        if (plot.agricultural()) {
            const int a = model.ag_position(plot.id);
            sol.plot_npv[pid] = model.plot_npv_packed(static_cast<std::size_t>(a), best.x);
        } else {
            sol.plot_npv[pid] = plot_npv_habitat(plot.id, config, params.econ);
        }
    }
    for (const Farm& farm : config.farms) {
        double acc = 0.0;
        for (int pid : farm.plot_ids) acc += sol.plot_npv[static_cast<std::size_t>(pid)];
        sol.farm_npv[farm.id] = acc;
    }
    return sol;
}

struct SensitivityRow {
    std::string parameter;
    double multiplier = 1.0;
    double mean_margin = 0.0;
    double mean_habitat = 0.0;
    double pearson_r = 0.0;  // NaN when the response has no variance
};

namespace detail {

inline void scale_parameter(EIParams& params, const std::string& name, double mult) {
    const auto colon = name.find(':');
    if (colon != std::string::npos) {
        const std::string field = name.substr(0, colon);
        const std::string crop = name.substr(colon + 1);
        CropParams& cp = params.crops.at(crop);
        if (field == "price")
            cp.price *= mult;
        else if (field == "alpha")
            cp.alpha *= mult;
        else if (field == "delta")
            cp.delta *= mult;
        else
            throw std::invalid_argument("unknown sensitivity parameter " + name);
        return;
    }
    if (name == "c_margin_impl")
        params.econ.c_margin_impl *= mult;
    else if (name == "c_habitat_impl")
        params.econ.c_habitat_impl *= mult;
    else if (name == "c_margin_maint")
        params.econ.c_margin_maint *= mult;
    else if (name == "c_habitat_maint")
        params.econ.c_habitat_maint *= mult;
    else if (name == "c_ag_maint")
        params.econ.c_ag_maint *= mult;
    else
        throw std::invalid_argument("unknown sensitivity parameter " + name);
}

inline double pearson_or_nan(const std::vector<double>& xs, const std::vector<double>& ys) {
    const std::size_t n = xs.size();
    if (n < 2) return std::numeric_limits<double>::quiet_NaN();
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        syy += (ys[i] - my) * (ys[i] - my);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    if (sxx <= 0.0 || syy <= 0.0) return std::numeric_limits<double>::quiet_NaN();
    return sxy / std::sqrt(sxx * syy);
}

}  // namespace detail

inline std::vector<std::string> default_sensitivity_parameters(
    const LandscapeConfiguration& config) {
    std::vector<std::string> names;
    std::vector<std::string> crops;
    for (const Plot& plot : config.plots) {
        if (!plot.agricultural()) continue;
        if (std::find(crops.begin(), crops.end(), plot.label) == crops.end())
            crops.push_back(plot.label);
    }
    std::sort(crops.begin(), crops.end());
    for (const auto& c : crops) {
        names.push_back("price:" + c);
        names.push_back("alpha:" + c);
        names.push_back("delta:" + c);
    }
    for (const char* econ : {"c_margin_impl", "c_habitat_impl", "c_margin_maint",
                             "c_habitat_maint", "c_ag_maint"})
        names.emplace_back(econ);
    return names;
}

// Re-solves the EI model under single-parameter multipliers and reports mean
// intervention fractions plus the per-parameter Pearson correlation between
// the multiplier and the mean total intervention.
inline std::vector<SensitivityRow> sensitivity_sweep(
    const LandscapeConfiguration& config, const EIParams& params, const SolverConfig& solver,
    const std::vector<std::string>& parameter_names, double mult_lo = 0.5, double mult_hi = 2.0,
    int n_samples = 8) {
    if (n_samples < 2) throw std::invalid_argument("sensitivity_sweep: need >= 2 samples");
    std::vector<SensitivityRow> rows;
    for (const std::string& name : parameter_names) {
        std::vector<double> mults, responses;
        std::vector<SensitivityRow> local;
        for (int s = 0; s < n_samples; ++s) {
            const double mult =
                mult_lo + (mult_hi - mult_lo) * static_cast<double>(s) /
                              static_cast<double>(n_samples - 1);
            EIParams tweaked = params;
            detail::scale_parameter(tweaked, name, mult);
            const EISolution sol = solve_ei(config, tweaked, solver);
            double sum_m = 0.0, sum_h = 0.0;
            std::size_t na = 0;
            for (const Plot& plot : config.plots) {
                if (!plot.agricultural()) continue;
                sum_m += sol.decisions.margin[static_cast<std::size_t>(plot.id)];
                sum_h += sol.decisions.habitat[static_cast<std::size_t>(plot.id)];
                ++na;
            }
            SensitivityRow row;
            row.parameter = name;
            row.multiplier = mult;
            row.mean_margin = na ? sum_m / static_cast<double>(na) : 0.0;
            row.mean_habitat = na ? sum_h / static_cast<double>(na) : 0.0;
            mults.push_back(mult);
            responses.push_back(row.mean_margin + row.mean_habitat);
            local.push_back(std::move(row));
        }
        const double r = detail::pearson_or_nan(mults, responses);
        for (auto& row : local) {
            row.pearson_r = r;
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

}  // namespace agriconn
