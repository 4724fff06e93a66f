#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>

#include "json.hpp"

#include "agriconn/landscape.hpp"

namespace agriconn {

// Ecosystem-service response of one crop: strength / distance-decay / time-
// accumulation triples for pollination and pest control, from margins and
// from habitat, plus the crop price.
struct CropParams {
    double alpha = 0.05;    // margin pollination strength
    double beta = 0.01;     // 1/m
    double gamma = 0.2;     // 1/yr
    double delta = 0.05;    // margin pest-control strength
    double epsilon = 0.01;  // 1/m
    double zeta = 0.2;      // 1/yr
    double alpha_h = 0.05;
    double beta_h = 0.005;
    double gamma_h = 0.2;
    double delta_h = 0.05;
    double epsilon_h = 0.005;
    double zeta_h = 0.2;
    double price = 200.0;  // USD/tonne

    void validate(const std::string& crop) const {
        const double rates[] = {alpha, beta,  gamma,   delta,   epsilon,   zeta,
                                alpha_h, beta_h, gamma_h, delta_h, epsilon_h, zeta_h};
        for (double v : rates)
            if (v < 0.0) throw std::invalid_argument("crop " + crop + ": negative parameter");
        if (price <= 0.0) throw std::invalid_argument("crop " + crop + ": price must be > 0");
    }
};

struct EconomicParams {
    double discount_rate = 0.05;  // per year
    int horizon_years = 20;
    double c_margin_impl = 400.0;   // USD/ha, one-time
    double c_habitat_impl = 300.0;  // USD/ha, one-time
    double c_margin_maint = 60.0;   // USD/ha/yr
    double c_habitat_maint = 70.0;  // USD/ha/yr
    double c_ag_maint = 100.0;      // USD/ha/yr
    double c_exist_habitat = 0.0;   // USD/ha/yr
    double lambda = 1e3;            // quadratic decision penalty
    double d_neib = 1000.0;         // meters

    void validate() const {
        if (discount_rate <= 0.0) throw std::invalid_argument("economic: discount rate must be > 0");
        if (horizon_years < 1) throw std::invalid_argument("economic: horizon must be >= 1 year");
        const double costs[] = {c_margin_impl, c_habitat_impl, c_margin_maint,
                                c_habitat_maint, c_ag_maint, c_exist_habitat};
        for (double c : costs)
            if (c < 0.0) throw std::invalid_argument("economic: negative cost");
        if (lambda < 0.0) throw std::invalid_argument("economic: negative lambda");
        if (d_neib < 0.0) throw std::invalid_argument("economic: negative d_neib");
    }
};

inline std::map<std::string, CropParams> default_crop_params() {
    std::map<std::string, CropParams> crops;
    CropParams base;  // cereal profile
    crops["Spring wheat"] = base;
    CropParams barley = base;
    barley.price = 120.0;
    crops["Barley"] = barley;
    CropParams canola = base;
    canola.alpha = 0.20;
    canola.delta = 0.10;
    canola.price = 1100.0;
    crops["Canola/rapeseed"] = canola;
    CropParams corn = base;
    corn.price = 190.0;
    crops["Corn"] = corn;
    CropParams oats = base;
    oats.delta = 0.0;
    oats.price = 95.0;
    crops["Oats"] = oats;
    CropParams soybeans = base;
    soybeans.alpha = 0.10;
    soybeans.delta = 0.10;
    soybeans.price = 370.0;
    crops["Soybeans"] = soybeans;
    return crops;
}

struct EIParams {
    std::map<std::string, CropParams> crops = default_crop_params();
    EconomicParams econ;
    // Whether service terms sum over every plot in the configuration or only
    // over plots of the same farm.
    bool restrict_to_own_farm = false;

    const CropParams& crop(const std::string& label) const {
        const auto it = crops.find(label);
        if (it == crops.end())
            throw std::invalid_argument("no parameters for crop \"" + label + "\"");
        return it->second;
    }

    void validate() const {
        econ.validate();
        for (const auto& [label, cp] : crops) cp.validate(label);
    }
};

struct SolverConfig {
    int max_iterations = 10000;
    double tolerance = 1e-8;      // projected-gradient scale, relative to 1+|objective|
    double armijo_c1 = 1e-4;
    double backtrack_shrink = 0.5;
    double initial_step = 1e-3;
    int multistarts = 8;
    std::uint64_t seed = 0;

    void validate() const {
        if (max_iterations < 1 || multistarts < 1)
            throw std::invalid_argument("solver: counts must be positive");
        if (tolerance <= 0.0 || armijo_c1 <= 0.0 || initial_step <= 0.0)
            throw std::invalid_argument("solver: tolerances must be positive");
        if (backtrack_shrink <= 0.0 || backtrack_shrink >= 1.0)
            throw std::invalid_argument("solver: backtrack shrink must be in (0,1)");
    }
};

inline void from_json_partial(const nlohmann::json& j, CropParams& cp) {
    cp.alpha = j.value("alpha", cp.alpha);
    cp.beta = j.value("beta", cp.beta);
    cp.gamma = j.value("gamma", cp.gamma);
    cp.delta = j.value("delta", cp.delta);
    cp.epsilon = j.value("epsilon", cp.epsilon);
    cp.zeta = j.value("zeta", cp.zeta);
    cp.alpha_h = j.value("alpha_h", cp.alpha_h);
    cp.beta_h = j.value("beta_h", cp.beta_h);
    cp.gamma_h = j.value("gamma_h", cp.gamma_h);
    cp.delta_h = j.value("delta_h", cp.delta_h);
    cp.epsilon_h = j.value("epsilon_h", cp.epsilon_h);
    cp.zeta_h = j.value("zeta_h", cp.zeta_h);
    cp.price = j.value("price", cp.price);
}

inline nlohmann::ordered_json to_json(const CropParams& cp) {
    return {{"alpha", cp.alpha},     {"beta", cp.beta},
            {"gamma", cp.gamma},     {"delta", cp.delta},
            {"epsilon", cp.epsilon}, {"zeta", cp.zeta},
            {"alpha_h", cp.alpha_h}, {"beta_h", cp.beta_h},
            {"gamma_h", cp.gamma_h}, {"delta_h", cp.delta_h},
            {"epsilon_h", cp.epsilon_h}, {"zeta_h", cp.zeta_h},
            {"price", cp.price}};
}

inline void from_json_partial(const nlohmann::json& j, EconomicParams& e) {
    e.discount_rate = j.value("discount_rate", e.discount_rate);
    e.horizon_years = j.value("horizon_years", e.horizon_years);
    e.c_margin_impl = j.value("c_margin_impl", e.c_margin_impl);
    e.c_habitat_impl = j.value("c_habitat_impl", e.c_habitat_impl);
    e.c_margin_maint = j.value("c_margin_maint", e.c_margin_maint);
    e.c_habitat_maint = j.value("c_habitat_maint", e.c_habitat_maint);
    e.c_ag_maint = j.value("c_ag_maint", e.c_ag_maint);
    e.c_exist_habitat = j.value("c_exist_habitat", e.c_exist_habitat);
    e.lambda = j.value("lambda", e.lambda);
    e.d_neib = j.value("d_neib", e.d_neib);
}

inline nlohmann::ordered_json to_json(const EconomicParams& e) {
    return {{"discount_rate", e.discount_rate},
            {"horizon_years", e.horizon_years},
            {"c_margin_impl", e.c_margin_impl},
            {"c_habitat_impl", e.c_habitat_impl},
            {"c_margin_maint", e.c_margin_maint},
            {"c_habitat_maint", e.c_habitat_maint},
            {"c_ag_maint", e.c_ag_maint},
            {"c_exist_habitat", e.c_exist_habitat},
            {"lambda", e.lambda},
            {"d_neib", e.d_neib}};
}

inline void from_json_partial(const nlohmann::json& j, EIParams& p) {
    if (j.contains("crops")) {
        for (const auto& [label, block] : j["crops"].items()) {
            CropParams cp = p.crops.count(label) ? p.crops[label] : CropParams{};
            from_json_partial(block, cp);
            p.crops[label] = cp;
        }
    }
    if (j.contains("economic")) from_json_partial(j["economic"], p.econ);
    p.restrict_to_own_farm = j.value("restrict_to_own_farm", p.restrict_to_own_farm);
}

inline nlohmann::ordered_json to_json(const EIParams& p) {
    nlohmann::ordered_json crops;
    for (const auto& [label, cp] : p.crops) crops[label] = to_json(cp);
    return {{"crops", crops},
            {"economic", to_json(p.econ)},
            {"restrict_to_own_farm", p.restrict_to_own_farm}};
}

inline void from_json_partial(const nlohmann::json& j, SolverConfig& s) {
    s.max_iterations = j.value("max_iterations", s.max_iterations);
    s.tolerance = j.value("tolerance", s.tolerance);
    s.armijo_c1 = j.value("armijo_c1", s.armijo_c1);
    s.backtrack_shrink = j.value("backtrack_shrink", s.backtrack_shrink);
    s.initial_step = j.value("initial_step", s.initial_step);
    s.multistarts = j.value("multistarts", s.multistarts);
    s.seed = j.value("seed", s.seed);
}

}  // namespace agriconn
