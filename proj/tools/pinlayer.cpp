#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>

#include "pinlayer/pinlayer.hpp"

namespace fs = std::filesystem;
using namespace pinlayer;

namespace {

struct GlobalOpts {
    std::string config_path;
    std::string out_dir;
    std::string format;
    long seed = -1;
};

RunConfig load_config(const GlobalOpts& g) {
    RunConfig cfg = parse_config(g.config_path);
    if (!g.out_dir.empty()) cfg.out_dir = g.out_dir;
    if (!g.format.empty()) cfg.formats = g.format;
    if (g.seed >= 0) cfg.seed = static_cast<unsigned>(g.seed);
    fs::create_directories(cfg.out_dir);
    return cfg;
}

bool want_json(const RunConfig& c) { return c.formats == "json" || c.formats == "both"; }
bool want_csv(const RunConfig& c) { return c.formats == "csv" || c.formats == "both"; }

std::string join(const RunConfig& c, const std::string& name) {
    return (fs::path(c.out_dir) / name).string();
}

int cmd_branch(const RunConfig& cfg) {
    Pipeline pl(cfg);
    const int samples = 101;
    std::vector<double> vs, hm, h0, hp, js;
    const double margin = 1e-6 * (pl.model.v_hi - pl.model.v_lo);
    for (int i = 0; i < samples; ++i) {
        const double v = pl.model.v_lo + margin +
                         (pl.model.v_hi - pl.model.v_lo - 2 * margin) * i / (samples - 1.0);
        const auto h = roots_at(pl.model, v);
        vs.push_back(v);
        hm.push_back(h[0]);
        h0.push_back(h[1]);
        hp.push_back(h[2]);
        js.push_back(balance_J(pl.model, v));
    }
    if (want_csv(cfg))
        write_csv(join(cfg, "branch.csv"), {"v", "h_minus", "h_zero", "h_plus", "J"},
                  {vs, hm, h0, hp, js});
    if (want_json(cfg))
        write_json_file(join(cfg, "branch.json"),
                        Json{{"v_star", pl.branch.v_star},
                             {"J_prime_star", pl.branch.J_prime_star}});
    std::cout << "v_star = " << pl.branch.v_star << ", J'(v_star) = " << pl.branch.J_prime_star
              << "\n";
    return 0;
}

int cmd_layer(const RunConfig& cfg) {
    Pipeline pl(cfg);
    const FrontProfile prof = pl.make_profile();
    const LayerGeometry geo = pl.make_geometry(prof);
    const CompositeApprox comp = pl.make_composite(prof, geo);
    const MatchReport match = matching_identities(pl.model, pl.branch, prof, geo);
    if (want_csv(cfg))
        write_csv(join(cfg, "layer.csv"), {"x", "u", "v"}, {comp.x_grid, comp.u, comp.v});
    if (want_json(cfg)) {
        Json j;
        j["x0"] = geo.x0;
        j["x1"] = geo.x1;
        j["beta0"] = geo.beta0;
        j["alpha"] = geo.alpha;
        j["orientation"] = to_string(geo.orientation);
        j["match_residuals"] =
            Json{{"phi0", match.phi0}, {"K", match.K}, {"M", match.M}, {"R", match.R}};
        write_json_file(join(cfg, "layer.json"), j);
    }
    std::cout << "x0 = " << geo.x0 << ", x1 = " << geo.x1 << ", layer at "
              << comp.layer_position << "\n";
    return 0;
}

int cmd_steady(const RunConfig& cfg) {
    Pipeline pl(cfg);
    const FrontProfile prof = pl.make_profile();
    const LayerGeometry geo = pl.make_geometry(prof);
    const SteadyState s = pl.make_steady(pl.make_composite(prof, geo));
    if (want_csv(cfg)) write_csv(join(cfg, "steady.csv"), {"x", "u", "v"}, {s.x_grid, s.u, s.v});
    if (want_json(cfg))
        write_json_file(join(cfg, "steady.json"),
                        Json{{"C", s.C},
                             {"residual_inf", s.residual_inf},
                             {"newton_iters", s.newton_iters},
                             {"layer_position_detected",
                              detect_crossing(s.x_grid, s.u, pl.alpha)}});
    std::cout << "steady state: residual_inf = " << s.residual_inf << " after "
              << s.newton_iters << " Newton steps\n";
    return 0;
}

int cmd_spectrum(const RunConfig& cfg) {
    Pipeline pl(cfg);
    const FrontProfile prof = pl.make_profile();
    const LayerGeometry geo = pl.make_geometry(prof);
    const SteadyState s = pl.make_steady(pl.make_composite(prof, geo));
    const SpectrumResult r = run_spectrum_stage(pl, prof, geo, s);
    if (want_json(cfg))
        write_json_file(join(cfg, "spectrum.json"), r.to_json(cfg.params.epsilon));
    if (want_csv(cfg) && cfg.contour_samples > 0) {
        std::vector<Complex> lams;
        const int nlam = cfg.contour_samples;
        for (int i = 0; i < nlam; ++i)
            for (int k = 0; k < nlam; ++k) {
                const double re = -cfg.lambda_max + 2.0 * cfg.lambda_max * i / (nlam - 1.0);
                const double im = -cfg.lambda_max + 2.0 * cfg.lambda_max * k / (nlam - 1.0);
                lams.emplace_back(re, im);
            }
        auto samples = parallel_map(lams, [&](const Complex& lam) {
            return evans_value(pl.model, cfg.params, s, lam, 2.0 * cfg.lambda_max);
        });
        std::vector<double> re, im, mag;
        for (const auto& smp : samples) {
            re.push_back(smp.lambda.real());
            im.push_back(smp.lambda.imag());
            mag.push_back(std::abs(smp.g_value));
        }
        write_csv(join(cfg, "spectrum_contour.csv"), {"re_lambda", "im_lambda", "abs_g"},
                  {re, im, mag});
    }
    std::cout << "kappa_star = " << r.asymptotic.kappa_star
              << ", lambda_direct = " << r.lambda_direct.real()
              << ", lambda_evans = " << r.lambda_evans.real() << "\n";
    return 0;
}

int cmd_simulate(const RunConfig& cfg) {
    Pipeline pl(cfg);
    const FrontProfile prof = pl.make_profile();
    const LayerGeometry geo = pl.make_geometry(prof);
    const SteadyState s = pl.make_steady(pl.make_composite(prof, geo));
    const SimReport rep = run_stability_experiment(pl.model, cfg.params, s, pl.sim_config());
    if (want_csv(cfg)) {
        std::vector<double> t, mass, pos, dev;
        for (const auto& smp : rep.series) {
            t.push_back(smp.t);
            mass.push_back(smp.mass);
            pos.push_back(smp.layer_position);
            dev.push_back(smp.deviation);
        }
        write_csv(join(cfg, "simulate.csv"), {"t", "mass", "layer_position", "deviation_norm"},
                  {t, mass, pos, dev});
    }
    if (want_json(cfg))
        write_json_file(join(cfg, "simulate.json"),
                        Json{{"mass_drift_max", rep.mass_drift_max},
                             {"final_layer_position", rep.final_layer_position},
                             {"growth_rate_fit", rep.growth_rate_fit},
                             {"fit_r2", rep.fit_r2},
                             {"converged", rep.converged}});
    std::cout << "growth_rate_fit = " << rep.growth_rate_fit
              << ", mass_drift_max = " << rep.mass_drift_max << "\n";
    return 0;
}

int cmd_report(const RunConfig& cfg) {
    const ReportResult res = run_report(cfg);
    write_json_file(join(cfg, "report.json"), res.json);
    std::cout << res.json["verdict"].get<std::string>()
              << (res.exit_code == 0 ? " (all indicators agree)" : " (indicator disagreement)")
              << "\n";
    return res.exit_code;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"pinlayer: transition-layer construction and stability for mass-conserving "
                 "bistable reaction-diffusion systems"};
    app.require_subcommand(1);
    app.fallthrough(); // global flags may follow the subcommand name

    GlobalOpts g;
    app.add_option("--config", g.config_path, "config file (TOML)")->required();
    app.add_option("--out", g.out_dir, "output directory (overrides config)");
    app.add_option("--format", g.format, "json|csv|both (overrides config)");
    app.add_option("--seed", g.seed, "RNG seed (overrides config)");

    int (*handler)(const RunConfig&) = nullptr;
    app.add_subcommand("branch", "equilibrium branches and the balance function")
        ->callback([&]() { handler = cmd_branch; });
    app.add_subcommand("layer", "matched-asymptotic layer construction")
        ->callback([&]() { handler = cmd_layer; });
    app.add_subcommand("steady", "Newton-refined finite-eps steady state")
        ->callback([&]() { handler = cmd_steady; });
    app.add_subcommand("spectrum", "asymptotic, Evans and direct spectra")
        ->callback([&]() { handler = cmd_spectrum; });
    app.add_subcommand("simulate", "mass-conserving time integration")
        ->callback([&]() { handler = cmd_simulate; });
    app.add_subcommand("report", "full pipeline with consolidated verdict")
        ->callback([&]() { handler = cmd_report; });

    CLI11_PARSE(app, argc, argv);

    try {
        const RunConfig cfg = load_config(g);
        return handler(cfg);
    } catch (const Error& e) {
        Json err;
        err["error"] = Json{{"type", e.kind}, {"message", e.what()}};
        std::cout << err.dump(2) << "\n";
        return 1;
    } catch (const std::exception& e) {
        Json err;
        err["error"] = Json{{"type", "Unexpected"}, {"message", e.what()}};
        std::cout << err.dump(2) << "\n";
        return 1;
    }
}
