// cavcool: cavity-cooling rate reports, detuning sweeps, optimal-curve
// tracing, cooling trajectories and numerical cross-checks.
//
// Exit codes: 0 ok, 2 invalid input, 3 singular point, 4 tolerance failure,
// 5 numerical failure.

#include <cmath>
#include <complex>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "cavcool/io.hpp"
#include "cavcool/oracle.hpp"
#include "cavcool/rate_equation.hpp"
#include "cavcool/sweep.hpp"

namespace {

constexpr int exit_ok = 0;
constexpr int exit_invalid = 2;
constexpr int exit_singular = 3;
constexpr int exit_tolerance = 4;
constexpr int exit_numerical = 5;

// Fig. 3 caption set; delta defaults onto the optimal curve at delta_c = 0.5.
cavcool::SystemParams default_params() {
    cavcool::SystemParams p;
    p.g = 7.0;
    p.omega = 1.0;
    p.gamma = 10.0;
    p.kappa = 0.01;
    p.eta = 0.1;
    p.phi_l = p.phi_c = std::sqrt(0.5);
    p.alpha = 0.4;
    p.delta_c = 0.5;
    p.delta = cavcool::delta_opt(0.5, p);
    return p;
}

struct CommonOpts {
    std::string params_file;
    std::vector<std::string> sets;
    std::string out;
    std::string format = "text";
    double tolerance = -1.0;
};

void add_common(CLI::App* cmd, CommonOpts& c) {
    cmd->add_option("--params", c.params_file, "JSON parameter file (trap units or \"units\":\"si\")");
    cmd->add_option("--set", c.sets, "override parameter, key=value (repeatable)");
    cmd->add_option("--out", c.out, "output path (default: stdout)");
    cmd->add_option("--format", c.format, "output format: text|csv|json")
        ->check(CLI::IsMember({"text", "csv", "json"}));
    cmd->add_option("--tolerance", c.tolerance, "tolerance for check mode");
}

cavcool::SystemParams resolve_params(const CommonOpts& c) {
    cavcool::SystemParams p = c.params_file.empty() ? default_params()
                                                    : cavcool::load_params_file(c.params_file);
    for (const std::string& kv : c.sets) cavcool::apply_override(p, kv);
    return p;
}

void require_valid(const cavcool::SystemParams& p) {
    const auto rep = cavcool::validate(p);
    if (!rep.valid()) {
        for (const auto& v : rep.violations) std::cerr << "invalid parameters: " << v << "\n";
        std::exit(exit_invalid);
    }
    for (const auto& w : rep.warnings) std::cerr << "warning: " << w << "\n";
}

std::ofstream open_out(const std::string& path) {
    std::ofstream f(path);
    if (!f) {
        std::cerr << "cannot open output file: " << path << "\n";
        std::exit(exit_invalid);
    }
    return f;
}

void write_sidecar(const std::string& out, const std::string& command,
                   const cavcool::SystemParams& p, cavcool::json extra) {
    if (out.empty()) return;
    cavcool::json j{{"command", command}, {"params", cavcool::params_to_json(p)}};
    j.update(extra);
    std::ofstream f(out + ".config.json");
    f << j.dump(2) << "\n";
}

cavcool::json amplitude_to_json(const cavcool::AmplitudeSet& a) {
    auto c = [](cavcool::cd z) {
        return cavcool::json{{"re", z.real()}, {"im", z.imag()}, {"abs", std::abs(z)}};
    };
    return cavcool::json{{"t_s", c(a.t_s)},
                         {"t_l_gamma", c(a.t_l_gamma)},
                         {"t_l_kappa", c(a.t_l_kappa)},
                         {"t_c_gamma", c(a.t_c_gamma)},
                         {"t_c_kappa", c(a.t_c_kappa)}};
}

int cmd_rates(const CommonOpts& c, bool use_opt) {
    cavcool::SystemParams p = resolve_params(c);
    if (use_opt) p.delta = cavcool::delta_opt(p.delta_c, p);
    require_valid(p);
    const auto ap = cavcool::amplitudes(p, cavcool::Sideband::heating);
    const auto am = cavcool::amplitudes(p, cavcool::Sideband::cooling);
    const auto r = cavcool::rates(p);
    const auto sup = cavcool::suppression_report(p);

    std::ostream* os = &std::cout;
    std::ofstream f;
    if (!c.out.empty()) {
        f = open_out(c.out);
        os = &f;
    }
    if (c.format == "json") {
        cavcool::json j{{"params", cavcool::params_to_json(p)},
                        {"amplitudes_heating", amplitude_to_json(ap)},
                        {"amplitudes_cooling", amplitude_to_json(am)},
                        {"a_plus", r.a_plus},
                        {"a_minus", r.a_minus},
                        {"w", r.w},
                        {"regime", cavcool::regime_name(r.regime)},
                        {"weak_drive_warning", r.weak_drive_warning}};
        j["nbar_ss"] = r.nbar_ss ? cavcool::json(*r.nbar_ss) : cavcool::json(nullptr);
        cavcool::json flags = cavcool::json::array();
        for (const auto& e : sup.entries)
            if (e.suppressed)
                flags.push_back({{"amplitude", e.amplitude},
                                 {"channel", e.channel},
                                 {"magnitude", e.magnitude}});
        j["suppressed"] = flags;
        *os << j.dump(2) << "\n";
    } else {
        auto line = [&](const char* name, cavcool::cd z) {
            *os << "  " << name << " = " << cavcool::format_g17(z.real()) << " + "
                << cavcool::format_g17(z.imag()) << "i  (|.| = "
                << cavcool::format_g17(std::abs(z)) << ")\n";
        };
        *os << "point: delta_c = " << cavcool::format_g17(p.delta_c)
            << ", delta = " << cavcool::format_g17(p.delta) << "\n";
        *os << "heating amplitudes (upper sign):\n";
        line("T_S        ", ap.t_s);
        line("T_L^gamma,+", ap.t_l_gamma);
        line("T_L^kappa,+", ap.t_l_kappa);
        line("T_c^gamma,+", ap.t_c_gamma);
        line("T_c^kappa,+", ap.t_c_kappa);
        *os << "cooling amplitudes (lower sign):\n";
        line("T_L^gamma,-", am.t_l_gamma);
        line("T_L^kappa,-", am.t_l_kappa);
        line("T_c^gamma,-", am.t_c_gamma);
        line("T_c^kappa,-", am.t_c_kappa);
        *os << "A+ = " << cavcool::format_g17(r.a_plus)
            << "\nA- = " << cavcool::format_g17(r.a_minus) << "\nregime = "
            << cavcool::regime_name(r.regime) << "\n";
        if (r.nbar_ss) *os << "nbar_ss = " << cavcool::format_g17(*r.nbar_ss) << "\n";
        *os << "W = " << cavcool::format_g17(r.w) << "\n";
        for (const auto& e : sup.entries)
            if (e.suppressed)
                *os << "suppressed: " << e.amplitude << " (" << e.channel
                    << "), |T|/Omega = " << cavcool::format_g17(e.magnitude) << "\n";
        if (r.weak_drive_warning)
            *os << "warning: |T_S|^2 > 0.01, weak-drive closed forms strained\n";
    }
    return exit_ok;
}

int cmd_sweep(const CommonOpts& c, cavcool::SweepSpec spec, const std::string& heatmap) {
    spec.params = resolve_params(c);
    require_valid(spec.params);
    const auto records = cavcool::run_sweep(spec);  // complete before any output
    std::ostream* os = &std::cout;
    std::ofstream f;
    if (!c.out.empty()) {
        f = open_out(c.out);
        os = &f;
    }
    cavcool::write_sweep_csv(records, *os);
    if (!heatmap.empty()) {
        std::ofstream hf = open_out(heatmap);
        cavcool::write_heatmap_svg(records, spec, hf);
    }
    write_sidecar(c.out, "sweep", spec.params,
                  {{"dc", {spec.dc_min, spec.dc_max, spec.dc_step}},
                   {"delta", {spec.dl_min, spec.dl_max, spec.dl_step}}});
    return exit_ok;
}

int cmd_opt_curve(const CommonOpts& c, double lo, double hi, double step) {
    cavcool::SystemParams p = resolve_params(c);
    require_valid(p);
    const auto grid = cavcool::grid_values(lo, hi, step);
    const auto records = cavcool::run_opt_curve(grid, p);
    std::ostream* os = &std::cout;
    std::ofstream f;
    if (!c.out.empty()) {
        f = open_out(c.out);
        os = &f;
    }
    cavcool::write_opt_curve_csv(records, *os);
    write_sidecar(c.out, "opt-curve", p, {{"dc", {lo, hi, step}}});
    return exit_ok;
}

int cmd_cool(const CommonOpts& c, double nbar0, int fock_n, double t_final, std::size_t samples) {
    cavcool::SystemParams p = resolve_params(c);
    require_valid(p);
    const auto r = cavcool::rates(p);
    if (t_final <= 0.0) {
        if (std::abs(r.w) < 1e-14) {
            std::cerr << "no phonon dynamics (W = 0); give --t-final explicitly\n";
            return exit_invalid;
        }
        t_final = 6.0 / std::abs(r.w);
    }
    cavcool::RateEquationOptions opts;
    opts.samples = samples;
    const std::size_t trunc = cavcool::default_truncation(fock_n >= 0 ? double(fock_n) : nbar0);
    const cavcool::PopulationVector p0 =
        fock_n >= 0 ? cavcool::fock_state(std::size_t(fock_n), std::max<std::size_t>(trunc, std::size_t(fock_n) + 2))
                    : cavcool::thermal_state(nbar0, trunc);
    const auto traj = cavcool::evolve(p0, r, p.eta, t_final, opts);
    std::ostream* os = &std::cout;
    std::ofstream f;
    if (!c.out.empty()) {
        f = open_out(c.out);
        os = &f;
    }
    cavcool::trajectory_to_csv(traj, *os);
    write_sidecar(c.out, "cool", p,
                  {{"t_final", t_final},
                   {"initial", fock_n >= 0 ? cavcool::json{{"fock", fock_n}}
                                           : cavcool::json{{"thermal_nbar", nbar0}}}});
    return exit_ok;
}

int cmd_check(const CommonOpts& c, const std::string& mode, double omega_override, int cavity_dim,
              int motion_dim, double nbar0) {
    cavcool::SystemParams p = resolve_params(c);
    require_valid(p);
    if (omega_override >= 0.0) p.omega = omega_override;
    bool ok = true;
    cavcool::json out = cavcool::json::array();
    if (mode == "trace" || mode == "both") {
        const double tol = c.tolerance > 0.0 ? c.tolerance : 1e-2;
        cavcool::SpaceLayout l;
        l.cavity_dim = cavity_dim;
        l.motion_dim = 0;
        const auto pairing = cavcool::sign_convention_probe(p, l);
        auto rep = cavcool::trace_formula_rates(p, l, {pairing, true});
        auto j = cavcool::oracle_report_to_json(rep);
        j["tolerance"] = tol;
        j["pass"] = rep.max_rel_err() < tol;
        ok = ok && rep.max_rel_err() < tol;
        out.push_back(j);
    }
    if (mode == "lindblad" || mode == "both") {
        if (p.eta <= 0.0) {
            std::cerr << "lindblad check: degenerate input, eta must be > 0\n";
            return exit_invalid;
        }
        const double tol = c.tolerance > 0.0 ? c.tolerance : 0.15;
        cavcool::SpaceLayout l;
        l.cavity_dim = cavity_dim;
        l.motion_dim = motion_dim;
        cavcool::LindbladFitOptions opts;
        opts.initial_thermal_nbar = nbar0;
        auto rep = cavcool::lindblad_rates(p, l, opts);
        const double w_ana = p.eta * p.eta * (rep.a_minus_analytic - rep.a_plus_analytic);
        const double w_err = std::abs(rep.w_numeric - w_ana) /
                             std::max(std::abs(w_ana), cavcool::rel_err_floor);
        auto j = cavcool::oracle_report_to_json(rep);
        j["tolerance"] = tol;
        j["w_rel_err"] = w_err;
        j["pass"] = w_err < tol;
        ok = ok && w_err < tol;
        out.push_back(j);
    }
    std::ostream* os = &std::cout;
    std::ofstream f;
    if (!c.out.empty()) {
        f = open_out(c.out);
        os = &f;
    }
    *os << out.dump(2) << "\n";
    return ok ? exit_ok : exit_tolerance;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"cavity cooling of a trapped atom: rates, sweeps, oracles"};
    app.require_subcommand(1);

    CommonOpts c_rates, c_sweep, c_opt, c_cool, c_check;

    auto* rates_cmd = app.add_subcommand("rates", "single-point rate report");
    add_common(rates_cmd, c_rates);
    bool use_opt = false;
    rates_cmd->add_flag("--opt", use_opt, "set delta = Delta_opt(delta_c)");

    auto* sweep_cmd = app.add_subcommand("sweep", "detuning-grid sweep, CSV + optional heatmap");
    add_common(sweep_cmd, c_sweep);
    cavcool::SweepSpec spec;
    std::vector<double> dc_range{spec.dc_min, spec.dc_max, spec.dc_step};
    std::vector<double> dl_range{spec.dl_min, spec.dl_max, spec.dl_step};
    std::string heatmap;
    sweep_cmd->add_option("--dc", dc_range, "delta_c grid: MIN MAX STEP")->expected(3);
    sweep_cmd->add_option("--delta", dl_range, "delta grid: MIN MAX STEP")->expected(3);
    sweep_cmd->add_option("--heatmap", heatmap, "write an SVG heatmap of nbar");

    auto* opt_cmd = app.add_subcommand("opt-curve", "rates along Delta_opt(delta_c)");
    add_common(opt_cmd, c_opt);
    std::vector<double> oc_range{0.0, 1.0, 0.05};
    opt_cmd->add_option("--dc", oc_range, "delta_c grid: MIN MAX STEP")->expected(3);

    auto* cool_cmd = app.add_subcommand("cool", "cooling trajectory export");
    add_common(cool_cmd, c_cool);
    double nbar0 = 2.0, t_final = 0.0;
    int fock_n = -1;
    std::size_t samples = 200;
    cool_cmd->add_option("--nbar0", nbar0, "initial thermal mean phonon number");
    cool_cmd->add_option("--fock", fock_n, "initial Fock state |n> (overrides --nbar0)");
    cool_cmd->add_option("--t-final", t_final, "final time [1/nu]; default 6/W");
    cool_cmd->add_option("--samples", samples, "number of samples");

    auto* check_cmd = app.add_subcommand("check", "compare analytic rates against oracles");
    add_common(check_cmd, c_check);
    std::string mode = "trace";
    double omega_override = -1.0;
    int cavity_dim = 3, motion_dim = 8;
    double check_nbar0 = 2.0;
    check_cmd->add_option("--mode", mode, "trace|lindblad|both")
        ->check(CLI::IsMember({"trace", "lindblad", "both"}));
    check_cmd->add_option("--omega", omega_override, "drive used by the oracle");
    check_cmd->add_option("--cavity-dim", cavity_dim, "cavity truncation");
    check_cmd->add_option("--motion-dim", motion_dim, "motional truncation (lindblad)");
    check_cmd->add_option("--nbar0", check_nbar0, "initial thermal occupation (lindblad)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (rates_cmd->parsed()) return cmd_rates(c_rates, use_opt);
        if (sweep_cmd->parsed()) {
            spec.dc_min = dc_range[0]; spec.dc_max = dc_range[1]; spec.dc_step = dc_range[2];
            spec.dl_min = dl_range[0]; spec.dl_max = dl_range[1]; spec.dl_step = dl_range[2];
            return cmd_sweep(c_sweep, spec, heatmap);
        }
        if (opt_cmd->parsed()) return cmd_opt_curve(c_opt, oc_range[0], oc_range[1], oc_range[2]);
        if (cool_cmd->parsed()) return cmd_cool(c_cool, nbar0, fock_n, t_final, samples);
        if (check_cmd->parsed())
            return cmd_check(c_check, mode, omega_override, cavity_dim, motion_dim, check_nbar0);
    } catch (const cavcool::singular_point_error& e) {
        std::cerr << "singular point: " << e.what() << "\n";
        return exit_singular;
    } catch (const std::domain_error& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return exit_invalid;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return exit_numerical;
    }
    return exit_ok;
}
