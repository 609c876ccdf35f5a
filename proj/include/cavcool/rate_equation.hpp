#pragma once

// Birth-death rate equation for the vibrational populations:
//   dp_n/dt = eta^2 A+ [n p_{n-1} - (n+1) p_n] + eta^2 A- [(n+1) p_{n+1} - n p_n]
// with adaptive Dormand-Prince stepping and automatic truncation growth.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <ostream>
#include <vector>

#include "cavcool/errors.hpp"
#include "cavcool/format.hpp"
#include "cavcool/rates.hpp"

namespace cavcool {

struct PopulationVector {
    std::vector<double> p;

    std::size_t truncation() const { return p.size(); }
    double sum() const {
        double s = 0.0;
        for (double v : p) s += v;
        return s;
    }
    double mean() const {
        double m = 0.0;
        for (std::size_t n = 0; n < p.size(); ++n) m += double(n) * p[n];
        return m;
    }
    double ground() const { return p.empty() ? 0.0 : p.front(); }
    double leakage() const { return p.empty() ? 0.0 : p.back(); }
    double min_value() const {
        double m = 0.0;
        for (double v : p) m = std::min(m, v);
        return m;
    }
};

inline PopulationVector thermal_state(double nbar, std::size_t truncation) {
    if (!(nbar >= 0.0)) throw std::domain_error("thermal_state: nbar must be >= 0");
    if (truncation == 0) throw std::domain_error("thermal_state: empty truncation");
    PopulationVector v;
    v.p.resize(truncation);
    const double r = nbar / (1.0 + nbar);
    double w = 1.0, s = 0.0;
    for (std::size_t n = 0; n < truncation; ++n, w *= r) {
        v.p[n] = w;
        s += w;
    }
    for (double& x : v.p) x /= s;
    return v;
}

inline PopulationVector fock_state(std::size_t n, std::size_t truncation) {
    if (n >= truncation) throw std::domain_error("fock_state: n outside truncation");
    PopulationVector v;
    v.p.assign(truncation, 0.0);
    v.p[n] = 1.0;
    return v;
}

struct CoolingTrajectory {
    std::vector<double> times;
    std::vector<double> mean_n;
    std::vector<double> ground_occupation;
    std::vector<double> leakage;
    std::vector<PopulationVector> populations;  // filled when requested
};

struct RateEquationOptions {
    double abs_tol = 1e-10;
    double rel_tol = 1e-8;
    double leak_bound = 1e-8;          // p_{N-1} during evolution
    std::size_t max_truncation = 1 << 14;
    std::size_t samples = 200;
    bool store_populations = false;
};

inline std::size_t default_truncation(double initial_mean) {
    return std::max<std::size_t>(20, std::size_t(std::ceil(10.0 * initial_mean)));
}

namespace detail {

struct BirthDeathRhs {
    double up;    // eta^2 A+
    double down;  // eta^2 A-
    void operator()(const std::vector<double>& p, std::vector<double>& dp) const {
        const std::size_t N = p.size();
        for (std::size_t n = 0; n < N; ++n) {
            double v = -(up * (n + 1) + down * n) * p[n];
            if (n > 0) v += up * n * p[n - 1];
            if (n + 1 < N) v += down * (n + 1) * p[n + 1];
            dp[n] = v;
        }
    }
};

// Dormand-Prince 5(4) on std::vector<double>. Calls `sample` at each
// requested time; returns false if the leak check aborts the run.
template <typename Rhs, typename Sample>
bool integrate_dp54(const Rhs& rhs, std::vector<double> y, const std::vector<double>& t_grid,
                    double abs_tol, double rel_tol, double leak_bound, const Sample& sample) {
    static const double a21 = 1.0 / 5;
    static const double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static const double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static const double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                        a54 = -212.0 / 729;
    static const double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                        a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static const double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                        b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static const double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                        e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

    const std::size_t N = y.size();
    std::vector<double> k1(N), k2(N), k3(N), k4(N), k5(N), k6(N), k7(N), tmp(N), y5(N);
    double t = t_grid.front();
    if (!sample(t, y)) return false;
    rhs(y, k1);
    double h = 1e-4;
    for (std::size_t gi = 1; gi < t_grid.size(); ++gi) {
        const double t_target = t_grid[gi];
        while (t < t_target) {
            h = std::min(h, t_target - t);
            for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + h * a21 * k1[i];
            rhs(tmp, k2);
            for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
            rhs(tmp, k3);
            for (std::size_t i = 0; i < N; ++i)
                tmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
            rhs(tmp, k4);
            for (std::size_t i = 0; i < N; ++i)
                tmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
            rhs(tmp, k5);
            for (std::size_t i = 0; i < N; ++i)
                tmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] +
                                     a65 * k5[i]);
            rhs(tmp, k6);
            for (std::size_t i = 0; i < N; ++i)
                y5[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
            rhs(y5, k7);
            double err = 0.0;
            for (std::size_t i = 0; i < N; ++i) {
                const double e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] +
                                      e6 * k6[i] + e7 * k7[i]);
                const double sc = abs_tol + rel_tol * std::max(std::abs(y[i]), std::abs(y5[i]));
                err = std::max(err, std::abs(e) / sc);
            }
            if (err <= 1.0) {
                t += h;
                y.swap(y5);
                k1.swap(k7);
            }
            const double grow = err > 0.0 ? 0.9 * std::pow(err, -0.2) : 5.0;
            h *= std::clamp(grow, 0.2, 5.0);
            if (!(h > 1e-14 * std::max(1.0, std::abs(t))))
                throw numerical_error("rate equation: step size collapsed");
            if (y.back() > leak_bound) return false;  // caller grows truncation
        }
        if (!sample(t, y)) return false;
    }
    return true;
}

}  // namespace detail

inline std::vector<double> uniform_times(double t_final, std::size_t samples) {
    if (!(t_final > 0.0)) throw std::domain_error("t_final must be > 0");
    std::vector<double> out(samples + 1);
    for (std::size_t i = 0; i <= samples; ++i) out[i] = t_final * double(i) / double(samples);
    return out;
}

inline CoolingTrajectory evolve(const PopulationVector& p0, const RateResult& r, double eta,
                                const std::vector<double>& sample_times,
                                const RateEquationOptions& opts = {}) {
    if (sample_times.size() < 2 || sample_times.front() != 0.0)
        throw std::domain_error("evolve: sample times must start at 0");
    for (std::size_t i = 1; i < sample_times.size(); ++i)
        if (!(sample_times[i] > sample_times[i - 1]))
            throw std::domain_error("evolve: sample times must be strictly increasing");
    const double e2 = eta * eta;
    detail::BirthDeathRhs rhs{e2 * r.a_plus, e2 * r.a_minus};

    std::size_t N = std::max(p0.truncation(), default_truncation(p0.mean()));
    while (true) {
        std::vector<double> y(N, 0.0);
        std::copy(p0.p.begin(), p0.p.end(), y.begin());
        if (y.back() > opts.leak_bound) {
            if (2 * N > opts.max_truncation)
                throw truncation_leak_error("evolve: initial state leaks at max truncation");
            N *= 2;
            continue;
        }
        CoolingTrajectory traj;
        auto record = [&](double t, const std::vector<double>& p) {
            traj.times.push_back(t);
            PopulationVector pv{p};
            traj.mean_n.push_back(pv.mean());
            traj.ground_occupation.push_back(pv.ground());
            traj.leakage.push_back(pv.leakage());
            if (opts.store_populations) traj.populations.push_back(std::move(pv));
            return true;
        };
        const bool done = detail::integrate_dp54(rhs, y, sample_times, opts.abs_tol,
                                                 opts.rel_tol, opts.leak_bound, record);
        if (done) return traj;
        if (2 * N > opts.max_truncation)
            throw truncation_leak_error("evolve: truncation leak bound exceeded at max truncation");
        N *= 2;
    }
}

inline CoolingTrajectory evolve(const PopulationVector& p0, const RateResult& r, double eta,
                                double t_final, const RateEquationOptions& opts = {}) {
    return evolve(p0, r, eta, uniform_times(t_final, opts.samples), opts);
}

// Geometric steady state p_n ~ (A+/A-)^n, truncated and renormalized.
inline PopulationVector steady_state(const RateResult& r, std::size_t truncation) {
    if (r.regime != Regime::cooling)
        throw no_steady_state_error("steady_state: no normalizable steady state unless cooling");
    const double ratio = r.a_plus / r.a_minus;
    PopulationVector v;
    v.p.resize(truncation);
    double w = 1.0, s = 0.0;
    for (std::size_t n = 0; n < truncation; ++n, w *= ratio) {
        v.p[n] = w;
        s += w;
    }
    for (double& x : v.p) x /= s;
    return v;
}

// p0(infinity) = 1 - A+/A-, cross-checked against the truncated distribution.
inline double ground_state_occupation(const RateResult& r, std::size_t truncation = 256) {
    if (r.regime != Regime::cooling)
        throw no_steady_state_error("ground_state_occupation: requires cooling regime");
    const double ratio = r.a_plus / r.a_minus;
    const double closed = 1.0 - ratio;
    const double truncated = steady_state(r, truncation).ground();
    const double trunc_err = std::pow(ratio, double(truncation));
    if (std::abs(closed - truncated) > 1e-9 + 2.0 * trunc_err)
        throw numerical_error("ground_state_occupation: closed form and truncation disagree");
    return closed;
}

// Smallest time with ground occupation >= target, located by sampling the
// trajectory and bisecting the bracketing interval.
inline double time_to_occupation(const PopulationVector& p0, const RateResult& r, double eta,
                                 double target_p0, const RateEquationOptions& opts = {}) {
    if (p0.ground() >= target_p0) return 0.0;
    if (r.regime != Regime::cooling)
        throw unreachable_target_error("time_to_occupation: not in the cooling regime");
    const double p0_inf = 1.0 - r.a_plus / r.a_minus;
    if (!(target_p0 < p0_inf))
        throw unreachable_target_error("time_to_occupation: target above steady-state occupation");
    const double w = eta * eta * (r.a_minus - r.a_plus);

    // horizon from the mean-phonon closed form, then extend if needed
    double horizon = 8.0 / w;
    for (int attempt = 0; attempt < 4; ++attempt, horizon *= 4.0) {
        auto opts2 = opts;
        opts2.samples = std::max<std::size_t>(opts.samples, 400);
        opts2.store_populations = true;
        const CoolingTrajectory traj = evolve(p0, r, eta, horizon, opts2);
        for (std::size_t i = 1; i < traj.times.size(); ++i) {
            if (traj.ground_occupation[i] >= target_p0) {
                double lo = traj.times[i - 1], hi = traj.times[i];
                PopulationVector state = traj.populations[i - 1];
                while (hi - lo > 1e-9 * hi) {
                    const double mid = 0.5 * (lo + hi);
                    auto local = opts;
                    local.samples = 2;
                    local.store_populations = true;
                    const CoolingTrajectory leg =
                        evolve(state, r, eta, {0.0, mid - lo}, local);
                    if (leg.ground_occupation.back() >= target_p0) {
                        hi = mid;
                    } else {
                        state = leg.populations.back();
                        lo = mid;
                    }
                }
                return hi;
            }
        }
    }
    throw unreachable_target_error("time_to_occupation: target not reached within horizon");
}

inline void trajectory_to_csv(const CoolingTrajectory& traj, std::ostream& os) {
    os << "time,mean_n,p0,leakage\n";
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        os << format_g17(traj.times[i]) << ',' << format_g17(traj.mean_n[i]) << ','
           << format_g17(traj.ground_occupation[i]) << ',' << format_g17(traj.leakage[i])
           << '\n';
    }
}

}  // namespace cavcool
