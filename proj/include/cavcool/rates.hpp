#pragma once

// Analytic sideband scattering amplitudes, heating/cooling rates A+-,
// steady-state observables and the optimal-detuning relation. Everything
// here is closed-form complex arithmetic in trap units (nu = 1).

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cavcool/errors.hpp"
#include "cavcool/params.hpp"

namespace cavcool {

using cd = std::complex<double>;

enum class Sideband { heating, cooling };  // heating: upper sign (+), cooling: lower (-)

inline int sideband_sign(Sideband s) { return s == Sideband::heating ? +1 : -1; }

// f(x) = (x + delta_c + i kappa/2)(x + Delta + i gamma/2) - g^2
inline cd denominator_f(double x, const SystemParams& p) {
    return (cd(x + p.delta_c, 0.5 * p.kappa)) * (cd(x + p.delta, 0.5 * p.gamma)) - p.g * p.g;
}

namespace detail {

inline double parameter_scale(const SystemParams& p) {
    return std::max({1.0, std::abs(p.delta), std::abs(p.delta_c), p.g, p.gamma, p.kappa});
}

inline void check_pole(cd value, double scale2, const char* name) {
    if (std::abs(value) < 1e-12 * scale2)
        throw singular_point_error(name, std::string("amplitudes: denominator ") + name +
                                             " vanishes (dressed-state pole)");
}

}  // namespace detail

// The five dimensionless amplitudes for one sideband sign. The heating
// channel (upper sign) carries f(-nu), the cooling channel f(+nu).
struct AmplitudeSet {
    Sideband sign = Sideband::heating;
    cd t_s;        // carrier (diffusive) amplitude
    cd t_l_gamma;  // laser recoil, photon lost by spontaneous emission
    cd t_l_kappa;  // laser recoil, photon lost through the cavity mirror
    cd t_c_gamma;  // cavity-mediated recoil, spontaneous emission
    cd t_c_kappa;  // cavity-mediated recoil, cavity decay
};

inline AmplitudeSet amplitudes(const SystemParams& p, Sideband sb) {
    const double s = sideband_sign(sb);
    const cd f0 = denominator_f(0.0, p);
    const cd fs = denominator_f(-s, p);  // f(-nu) for heating, f(+nu) for cooling
    const double scale = detail::parameter_scale(p);
    const double scale2 = scale * scale;
    detail::check_pole(f0, scale2, "f(0)");
    detail::check_pole(fs, scale2, s > 0 ? "f(-nu)" : "f(+nu)");

    const cd i(0.0, 1.0);
    AmplitudeSet a;
    a.sign = sb;
    a.t_s = p.omega * cd(p.delta_c, 0.5 * p.kappa) / f0;
    a.t_l_gamma = i * p.omega * cd(p.delta_c - s, 0.5 * p.kappa) / fs;
    a.t_l_kappa = i * p.omega * p.g / fs;
    a.t_c_gamma = -p.omega * p.g * p.g * cd(2.0 * p.delta_c - s, p.kappa) / (f0 * fs);
    a.t_c_kappa = -p.omega * p.g *
                  (cd(p.delta - s, 0.5 * p.gamma) * cd(p.delta_c, 0.5 * p.kappa) + p.g * p.g) /
                  (f0 * fs);
    return a;
}

enum class Regime { cooling, heating, marginal };

inline const char* regime_name(Regime r) {
    switch (r) {
        case Regime::cooling: return "cooling";
        case Regime::heating: return "heating";
        default: return "marginal";
    }
}

struct RateResult {
    double a_plus = 0.0;            // heating coefficient [nu]
    double a_minus = 0.0;           // cooling coefficient [nu]
    std::optional<double> nbar_ss;  // present only when cooling
    double w = 0.0;                 // eta^2 (A- - A+)
    Regime regime = Regime::marginal;
    bool weak_drive_warning = false;  // |T_S|^2 > 0.01: closed forms strained
};

inline double rate_from_amplitudes(const AmplitudeSet& a, const SystemParams& p) {
    const double t_gamma = std::norm(p.phi_l * a.t_l_gamma + p.phi_c * a.t_c_gamma);
    const double t_kappa = std::norm(p.phi_l * a.t_l_kappa + p.phi_c * a.t_c_kappa);
    return p.gamma * p.alpha * std::norm(a.t_s) + p.gamma * t_gamma + p.kappa * t_kappa;
}

inline constexpr double marginal_rel_tolerance = 1e-12;

inline RateResult rates(const SystemParams& p) {
    const AmplitudeSet ap = amplitudes(p, Sideband::heating);
    const AmplitudeSet am = amplitudes(p, Sideband::cooling);
    RateResult r;
    r.a_plus = rate_from_amplitudes(ap, p);
    r.a_minus = rate_from_amplitudes(am, p);
    r.w = p.eta * p.eta * (r.a_minus - r.a_plus);
    r.weak_drive_warning = std::norm(ap.t_s) > 0.01;
    const double tol = marginal_rel_tolerance * std::max({r.a_minus, r.a_plus, 1.0});
    if (std::abs(r.a_minus - r.a_plus) < tol) {
        r.regime = Regime::marginal;
    } else if (r.a_minus > r.a_plus) {
        r.regime = Regime::cooling;
        r.nbar_ss = r.a_plus / (r.a_minus - r.a_plus);
    } else {
        r.regime = Regime::heating;
    }
    return r;
}

// (Gamma_{n -> n+1}, Gamma_{n -> n-1}) = eta^2 ((n+1) A+, n A-)
inline std::pair<double, double> phonon_transition_rates(int n, const RateResult& r, double eta) {
    if (n < 0) throw std::domain_error("phonon_transition_rates: n must be >= 0");
    const double e2 = eta * eta;
    return {e2 * (n + 1) * r.a_plus, e2 * n * r.a_minus};
}

// Delta_opt(delta_c) = (g^2 + gamma kappa / 4) / (delta_c + nu) - nu,
// the Re f(nu) = 0 condition.
inline double delta_opt(double delta_c, const SystemParams& p) {
    const double scale = std::max(1.0, std::abs(delta_c));
    if (std::abs(delta_c + 1.0) < 1e-12 * scale)
        throw singular_point_error("delta_c + nu",
                                   "delta_opt: singular at delta_c = -nu");
    return (p.g * p.g + 0.25 * p.gamma * p.kappa) / (delta_c + 1.0) - 1.0;
}

struct OptCurvePoint {
    double delta_c = 0.0;
    double delta = std::numeric_limits<double>::quiet_NaN();
    bool singular = false;  // grid point too close to delta_c = -nu
};

inline std::vector<OptCurvePoint> opt_curve(const std::vector<double>& delta_c_grid,
                                            const SystemParams& p) {
    std::vector<OptCurvePoint> out;
    out.reserve(delta_c_grid.size());
    for (double dc : delta_c_grid) {
        OptCurvePoint pt;
        pt.delta_c = dc;
        try {
            pt.delta = delta_opt(dc, p);
        } catch (const singular_point_error&) {
            pt.singular = true;
        }
        out.push_back(pt);
    }
    return out;
}

// A channel magnitude (normalized by Omega, so the report is drive-independent)
// and whether it falls below the suppression threshold.
struct SuppressionEntry {
    std::string amplitude;  // e.g. "t_c_gamma(+)"
    std::string channel;    // physical channel name
    double magnitude = 0.0;  // |T| / Omega
    bool suppressed = false;
};

struct SuppressionReport {
    double threshold = 0.0;
    std::vector<SuppressionEntry> entries;
};

inline SuppressionReport suppression_report(const SystemParams& p, double threshold = 1e-3) {
    SystemParams unit = p;
    unit.omega = 1.0;  // amplitudes are exactly linear in Omega
    const AmplitudeSet ap = amplitudes(unit, Sideband::heating);
    const AmplitudeSet am = amplitudes(unit, Sideband::cooling);
    SuppressionReport rep;
    rep.threshold = threshold;
    auto add = [&](std::string name, std::string channel, cd t) {
        const double mag = std::abs(t);
        rep.entries.push_back({std::move(name), std::move(channel), mag, mag < threshold});
    };
    add("t_s", "diffusive carrier scattering", ap.t_s);
    add("t_l_gamma(+)", "heating via laser recoil, spontaneous emission", ap.t_l_gamma);
    add("t_l_gamma(-)", "cooling via laser recoil, spontaneous emission", am.t_l_gamma);
    add("t_l_kappa(+)", "heating via laser recoil, cavity decay", ap.t_l_kappa);
    add("t_l_kappa(-)", "cooling via laser recoil, cavity decay", am.t_l_kappa);
    add("t_c_gamma(+)", "heating via cavity coupling, spontaneous emission", ap.t_c_gamma);
    add("t_c_gamma(-)", "cooling via cavity coupling, spontaneous emission", am.t_c_gamma);
    add("t_c_kappa(+)", "heating via cavity coupling, cavity decay", ap.t_c_kappa);
    add("t_c_kappa(-)", "cooling via cavity coupling, cavity decay", am.t_c_kappa);
    return rep;
}

}  // namespace cavcool
