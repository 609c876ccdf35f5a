#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "cavcool/io.hpp"
#include "cavcool/oracle.hpp"

using namespace cavcool;

namespace {

SystemParams fig3(double delta_c, double omega = 1.0) {
    SystemParams p;
    p.g = 7.0;
    p.omega = omega;
    p.gamma = 10.0;
    p.kappa = 0.01;
    p.eta = 0.1;
    p.phi_l = p.phi_c = std::sqrt(0.5);
    p.alpha = 0.4;
    p.delta_c = delta_c;
    p.delta = delta_opt(delta_c, p);
    return p;
}

// small, non-stiff point used for the motional-oracle tests
SystemParams cheap(double omega, double eta) {
    SystemParams p;
    p.g = 2.0;
    p.gamma = 1.0;
    p.kappa = 0.1;
    p.omega = omega;
    p.eta = eta;
    p.phi_l = p.phi_c = std::sqrt(0.5);
    p.alpha = 0.4;
    p.delta_c = 0.5;
    p.delta = delta_opt(0.5, p);
    return p;
}

constexpr SpaceLayout internal3{.cavity_dim = 3, .motion_dim = 0};

}  // namespace

TEST_CASE("trace formula: zero drive gives zero rates") {
    SystemParams p = fig3(0.5, 0.0);
    const OracleReport rep = trace_formula_rates(p, internal3);
    CHECK(std::abs(rep.a_plus_numeric) < 1e-14);
    CHECK(std::abs(rep.a_minus_numeric) < 1e-14);
    CHECK(rep.rel_err_plus < 1e-2);  // floored comparison of 0 vs 0
}

TEST_CASE("trace formula matches the free-space closed form") {
    SystemParams p = cheap(0.01, 0.05);
    p.g = 0.0;
    p.phi_c = 0.0;
    p.delta = -1.0;
    p.delta_c = 0.3;
    p.gamma = 2.0;
    const OracleReport rep = trace_formula_rates(p, {.cavity_dim = 2, .motion_dim = 0});
    const double o2 = p.omega * p.omega;
    const double carrier = p.alpha * p.gamma * o2 / (p.delta * p.delta + 0.25 * p.gamma * p.gamma);
    const double ap = carrier + p.phi_l * p.phi_l * p.gamma * o2 /
                                    ((p.delta - 1.0) * (p.delta - 1.0) + 0.25 * p.gamma * p.gamma);
    const double am = carrier + p.phi_l * p.phi_l * p.gamma * o2 /
                                    ((p.delta + 1.0) * (p.delta + 1.0) + 0.25 * p.gamma * p.gamma);
    CHECK(relative_error(rep.a_plus_numeric, ap) < 1e-3);
    CHECK(relative_error(rep.a_minus_numeric, am) < 1e-3);
}

TEST_CASE("trace formula at the reference cooling point") {
    const SystemParams p = fig3(0.5, 0.01);
    const OracleReport rep = trace_formula_rates(p, internal3);
    CHECK(rep.max_rel_err() < 1e-3);
    CHECK(rep.converged);
}

TEST_CASE("trace formula error decreases monotonically with the drive") {
    double prev = 1e9;
    for (double omega : {0.3, 0.1, 0.03, 0.01}) {
        SystemParams p = fig3(0.7, omega);
        p.delta = 10.0;
        const OracleReport rep = trace_formula_rates(p, {.cavity_dim = 4, .motion_dim = 0});
        CHECK(rep.max_rel_err() < prev);
        prev = rep.max_rel_err();
    }
    CHECK(prev < 1e-3);
}

TEST_CASE("diffusive term consistency: excited population vs |T_S|^2") {
    SystemParams p = fig3(0.7, 0.01);
    p.delta = 10.0;
    detail::TraceFormulaEngine eng(p, internal3);
    const double ts2 = std::norm(amplitudes(p, Sideband::heating).t_s);
    CHECK(std::abs(eng.excited_population / ts2 - 1.0) < 1e-2);
}

TEST_CASE("sign convention probe resolves and is deterministic") {
    const SystemParams p = fig3(0.5, 0.01);
    const SignPairing a = sign_convention_probe(p, internal3);
    const SignPairing b = sign_convention_probe(p, internal3);
    CHECK(a.heating_shift == b.heating_shift);
    CHECK(a.heating_shift == cd(0.0, -1.0));
    CHECK(a.cooling_shift == cd(0.0, +1.0));

    // free-space limit: the red-sideband branch must maximize A-
    SystemParams fs = cheap(0.01, 0.05);
    fs.g = 0.0;
    fs.phi_c = 0.0;
    fs.delta = -1.0;
    fs.delta_c = 0.3;
    const SignPairing c = sign_convention_probe(fs, {.cavity_dim = 2, .motion_dim = 0});
    CHECK(c.cooling_shift == cd(0.0, +1.0));
}

TEST_CASE("sign convention probe rejects symmetric points") {
    // free space at delta = 0: A+ = A- by symmetry
    SystemParams p = cheap(0.01, 0.05);
    p.g = 0.0;
    p.phi_c = 0.0;
    p.delta = 0.0;
    p.delta_c = 0.3;
    CHECK_THROWS_AS(sign_convention_probe(p, {.cavity_dim = 2, .motion_dim = 0}),
                    ambiguous_match_error);
}

TEST_CASE("convergence sweep: weak drive converges by Nc = 3, strong drive does not") {
    const SystemParams weak = fig3(0.5, 0.01);
    const auto rows = convergence_sweep(weak, {2, 3, 4});
    REQUIRE(rows.size() == 3);
    CHECK(rows[2].converged);  // 3 -> 4 change below 1e-6

    const SystemParams strong = fig3(0.5, 7.0);  // Omega = g
    const auto srows = convergence_sweep(strong, {2, 3, 4});
    CHECK_FALSE(srows[1].converged);
    CHECK_FALSE(srows[2].converged);

    CHECK_FALSE(convergence_sweep(weak, {3}).front().converged);  // ladder of one
}

TEST_CASE("lindblad oracle: eta = 0 reports no dynamics") {
    SystemParams p = cheap(0.3, 0.0);
    LindbladFitOptions opts;
    opts.span = 20.0;
    opts.samples = 16;
    const OracleReport rep = lindblad_rates(p, {.cavity_dim = 2, .motion_dim = 4}, opts);
    CHECK(rep.w_numeric == 0.0);
    CHECK(rep.a_plus_numeric == 0.0);
    CHECK(rep.a_minus_numeric == 0.0);
}

TEST_CASE("lindblad oracle: heating regime sign matches the analytic classification") {
    SystemParams p = cheap(0.3, 0.05);
    p.delta = (p.g * p.g + 0.25 * p.gamma * p.kappa) / (p.delta_c - 1.0) + 1.0;  // Re f(-nu)=0
    const RateResult ana = rates(p);
    REQUIRE(ana.regime == Regime::heating);
    const OracleReport rep = lindblad_rates(p, {.cavity_dim = 2, .motion_dim = 6});
    CHECK(rep.w_numeric < 0.0);
    CHECK(rep.a_plus_numeric > rep.a_minus_numeric);
}

TEST_CASE("lindblad oracle: fitted W matches the analytic rate at weak drive") {
    const SystemParams p = cheap(0.15, 0.05);
    const OracleReport rep = lindblad_rates(p, {.cavity_dim = 3, .motion_dim = 5});
    const double w_ana = p.eta * p.eta * (rep.a_minus_analytic - rep.a_plus_analytic);
    CHECK(std::abs(rep.w_numeric - w_ana) < 0.10 * w_ana);
    CHECK(rep.fit_residual < 2e-3);
}

TEST_CASE("lindblad oracle: fitted W scales as eta^2") {
    const double etas[] = {0.02, 0.05, 0.1};
    double w[3];
    for (int i = 0; i < 3; ++i) {
        SystemParams p = cheap(0.3, etas[i]);
        LindbladFitOptions opts;
        opts.samples = 60;
        const OracleReport rep = lindblad_rates(p, {.cavity_dim = 2, .motion_dim = 5}, opts);
        w[i] = rep.w_numeric;
    }
    // least-squares slope of log W vs log eta
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = 0; i < 3; ++i) {
        const double x = std::log(etas[i]), y = std::log(w[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double slope = (3 * sxy - sx * sy) / (3 * sxx - sx * sx);
    CHECK(slope == Catch::Approx(2.0).margin(0.05));
}

TEST_CASE("recoil diffusion shifts A+ by gamma alpha |T_S|^2") {
    const SystemParams p = cheap(0.3, 0.05);
    const SpaceLayout l{.cavity_dim = 3, .motion_dim = 6};
    LindbladFitOptions opts;
    opts.samples = 60;

    double a_plus[2];
    int k = 0;
    for (bool diffusion : {true, false}) {
        opts.include_recoil_diffusion = diffusion;
        const OracleReport rep = lindblad_rates(p, l, opts);
        const MotionalSteadyState ss = motional_steady_ratio(p, l, diffusion);
        double mean = 0.0;
        for (std::size_t m = 0; m < ss.populations.size(); ++m)
            mean += double(m) * ss.populations[m];
        a_plus[k++] = mean * rep.w_numeric / (p.eta * p.eta);
    }
    const double measured = a_plus[0] - a_plus[1];
    const double expected = p.gamma * p.alpha * std::norm(amplitudes(p, Sideband::heating).t_s);
    CHECK(measured == Catch::Approx(expected).epsilon(0.15));
}

TEST_CASE("steady-state motional populations are geometric with ratio A+/A-") {
    const SystemParams p = cheap(0.15, 0.05);
    const MotionalSteadyState ss = motional_steady_ratio(p, {.cavity_dim = 3, .motion_dim = 6});
    const RateResult ana = rates(p);
    CHECK(ss.ratio == Catch::Approx(ana.a_plus / ana.a_minus).epsilon(0.10));
}

TEST_CASE("oracle report serializes all fields") {
    const SystemParams p = fig3(0.5, 0.01);
    const OracleReport rep = trace_formula_rates(p, internal3);
    const json j = oracle_report_to_json(rep);
    for (const char* key :
         {"method", "a_plus_numeric", "a_minus_numeric", "a_plus_analytic", "a_minus_analytic",
          "rel_err_plus", "rel_err_minus", "cavity_dim", "motion_dim", "converged",
          "weak_drive_warning", "omega", "w_numeric", "nbar_inf_numeric", "fit_residual"})
        CHECK(j.contains(key));
    CHECK(j["method"] == "trace");
}
