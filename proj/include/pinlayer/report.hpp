#pragma once

#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "pinlayer/config.hpp"
#include "pinlayer/evans.hpp"
#include "pinlayer/simulate.hpp"
#include "pinlayer/spectrum.hpp"
#include "pinlayer/validate.hpp"

namespace pinlayer {

using Json = nlohmann::ordered_json;

// ---- serialization helpers -------------------------------------------------

inline std::string fmt_full(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline void write_csv(const std::string& path, const std::vector<std::string>& header,
                      const std::vector<std::vector<double>>& columns) {
    std::ofstream out(path);
    if (!out) throw Error("IoError", "cannot write " + path);
    for (std::size_t i = 0; i < header.size(); ++i)
        out << header[i] << (i + 1 < header.size() ? "," : "\n");
    const std::size_t rows = columns.empty() ? 0 : columns.front().size();
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < columns.size(); ++c)
            out << fmt_full(columns[c][r]) << (c + 1 < columns.size() ? "," : "\n");
}

inline void write_json_file(const std::string& path, const Json& j) {
    std::ofstream out(path);
    if (!out) throw Error("IoError", "cannot write " + path);
    out << j.dump(2) << "\n";
}

inline Json complex_json(Complex z) { return Json{{"re", z.real()}, {"im", z.imag()}}; }

// ---- pipeline --------------------------------------------------------------

// Shared intermediate results of the validate -> branch -> layer -> steady
// chain; each stage is computed once and reused by the later ones.
struct Pipeline {
    RunConfig cfg;
    BistableModel model;
    BranchData branch;
    double alpha = 0.0;
    ValidationReport assumptions;

    explicit Pipeline(const RunConfig& c) : cfg(c), model(c.make_model()) {
        assumptions = validate_assumptions(model, cfg.params);
        branch = find_v_star(model);
        alpha = cfg.alpha.value_or(branch.midpoint());
    }

    FrontProfile make_profile() const { return front_profile(model, branch, alpha); }

    LayerGeometry make_geometry(const FrontProfile& prof) const {
        return geometry(branch, prof, cfg.params, cfg.orientation);
    }

    CompositeApprox make_composite(const FrontProfile& prof, const LayerGeometry& geo) const {
        return composite(branch, geo, prof, cfg.params, cfg.n);
    }

    SteadyState make_steady(const CompositeApprox& comp) const {
        return refine(model, cfg.params, comp);
    }

    SimConfig sim_config() const {
        SimConfig sc;
        sc.dt = cfg.dt;
        sc.t_end = cfg.t_end;
        sc.theta = cfg.theta;
        sc.perturbation_amplitude = cfg.perturbation_amplitude;
        sc.seed = cfg.seed;
        return sc;
    }
};

struct SpectrumResult {
    AsymptoticEigen asymptotic;
    Complex lambda_direct;
    Complex lambda_evans;
    double direct_constraint = 0.0;
    double case2_min_g = 0.0;
    Complex H1, H2;
    bool evans_found = false;

    Json to_json(double epsilon) const {
        Json j;
        j["kappa_star"] = asymptotic.kappa_star;
        j["lambda_asymptotic"] = asymptotic.lambda(epsilon);
        j["lambda_direct"] = complex_json(lambda_direct);
        j["lambda_evans"] = complex_json(lambda_evans);
        j["verdict"] = asymptotic.stable() ? "stable" : "unstable";
        j["case2_min_g"] = case2_min_g;
        j["case3"] = Json{{"H1", complex_json(H1)}, {"H2", complex_json(H2)}};
        j["W_energy"] = asymptotic.W_energy;
        j["fv_integral"] = asymptotic.fv_integral;
        j["slope_integral"] = asymptotic.slope_integral;
        j["direct_constraint"] = direct_constraint;
        // These regime boundaries are conventions of this tool, not sharp
        // thresholds of the underlying theory.
        j["regime_conventions"] = Json{{"case1", "|lambda| <= 5 eps"},
                                       {"case2", "eps*omega in (5 eps, 0.5)"},
                                       {"case3", "|lambda| = O(1), Re >= 0"}};
        return j;
    }
};

inline SpectrumResult run_spectrum_stage(const Pipeline& pl, const FrontProfile& prof,
                                         const LayerGeometry& geo, const SteadyState& steady) {
    SpectrumResult r;
    r.asymptotic = kappa_star(pl.model, pl.branch, prof, geo);

    LinearizedOperator op(pl.model, steady);
    const auto modes = direct_spectrum(op, 8);
    const EigenMode* lead = leading_constrained(modes);
    if (!lead) throw Error("SpectrumFailure", "no constrained eigenvalue found near zero");
    r.lambda_direct = lead->lambda;
    r.direct_constraint = std::abs(lead->constraint);

    r.lambda_evans = evans_zero_search(pl.model, pl.cfg.params, steady,
                                       Complex(r.asymptotic.lambda(pl.cfg.params.epsilon), 0.0));
    r.evans_found = true;

    const double eps = pl.cfg.params.epsilon;
    std::vector<double> omegas;
    for (double mag : {0.12, 0.2, 0.35})
        if (mag > 5.0 * eps && mag < 0.5) omegas.push_back(mag / eps);
    if (!omegas.empty())
        r.case2_min_g = case2_sampling(pl.model, pl.cfg.params, steady, omegas).min_abs_g;

    const auto c3 = case3_nonvanishing(pl.model, pl.branch, prof, geo, pl.cfg.params,
                                       Complex(0.5, 0.0));
    r.H1 = c3.H1;
    r.H2 = c3.H2;
    return r;
}

struct ReportResult {
    Json json;
    int exit_code = 0;
};

// Consolidated pipeline: validate -> branch -> layer -> steady -> spectrum ->
// simulate, with the four stability indicators compared pairwise.
inline ReportResult run_report(const RunConfig& cfg) {
    Pipeline pl(cfg);
    if (!pl.assumptions.a1_bistable || !pl.assumptions.a2_balanced ||
        !pl.assumptions.a4_mass_admissible) {
        std::string msg = "assumption validation failed:";
        for (const auto& m : pl.assumptions.messages) msg += " " + m;
        throw ValidationError({"assumptions"}, msg);
    }

    const FrontProfile prof = pl.make_profile();
    const LayerGeometry geo = pl.make_geometry(prof);
    const CompositeApprox comp = pl.make_composite(prof, geo);
    const SteadyState steady = pl.make_steady(comp);

    // The simulation experiment is independent of the spectral stage once the
    // steady state is known; run it concurrently.
    auto sim_future = std::async(std::launch::async, [&]() {
        return run_stability_experiment(pl.model, cfg.params, steady, pl.sim_config());
    });
    const SpectrumResult spectral = run_spectrum_stage(pl, prof, geo, steady);
    const SimReport sim = sim_future.get();

    const double indicators[4] = {spectral.asymptotic.lambda(cfg.params.epsilon),
                                  spectral.lambda_direct.real(), spectral.lambda_evans.real(),
                                  sim.growth_rate_fit};
    const char* names[4] = {"asymptotic", "direct", "evans", "simulation"};
    bool all_agree = true;
    Json agreement;
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j) {
            const bool agree = (indicators[i] < 0) == (indicators[j] < 0);
            agreement[std::string(names[i]) + "_vs_" + names[j]] = agree;
            all_agree = all_agree && agree;
        }

    Json j;
    j["assumptions"] = Json{{"A1_bistable", pl.assumptions.a1_bistable},
                            {"A2_balanced", pl.assumptions.a2_balanced},
                            {"A3_cross_inequality", pl.assumptions.a3_cross_inequality},
                            {"A4_mass_admissible", pl.assumptions.a4_mass_admissible},
                            {"derivatives_ok", pl.assumptions.derivatives_ok}};
    j["v_star"] = pl.branch.v_star;
    j["J_prime"] = pl.branch.J_prime_star;
    j["x0"] = geo.x0;
    j["x1"] = geo.x1;
    j["lambda_asymptotic"] = indicators[0];
    j["lambda_evans"] = spectral.lambda_evans.real();
    j["lambda_direct"] = spectral.lambda_direct.real();
    j["sim_growth_rate"] = sim.growth_rate_fit;
    j["verdict"] = indicators[0] < 0 ? "stable" : "unstable";
    j["agreement_matrix"] = agreement;
    j["spectrum"] = spectral.to_json(cfg.params.epsilon);
    j["steady"] = Json{{"C", steady.C},
                       {"residual_inf", steady.residual_inf},
                       {"newton_iters", steady.newton_iters},
                       {"layer_position_detected",
                        detect_crossing(steady.x_grid, steady.u, pl.alpha)}};
    j["simulate"] = Json{{"mass_drift_max", sim.mass_drift_max},
                         {"growth_rate_fit", sim.growth_rate_fit},
                         {"fit_r2", sim.fit_r2},
                         {"final_layer_position", sim.final_layer_position}};
    j["meta"] = Json{{"model", pl.model.label},
                     {"epsilon", cfg.params.epsilon},
                     {"D", cfg.params.D},
                     {"xi", cfg.params.xi},
                     {"seed", cfg.seed},
                     {"alpha", pl.alpha},
                     {"orientation", to_string(cfg.orientation)}};

    ReportResult res;
    res.json = std::move(j);
    res.exit_code = all_agree ? 0 : 2;
    return res;
}

} // namespace pinlayer
