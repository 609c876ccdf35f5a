#pragma once

// Least-squares fit of y(t) = c + b exp(-w t) on uniformly spaced samples.
// Seeded by the AR(1) relation y_{k+1} = A + R y_k, then polished with a few
// Gauss-Newton iterations on (c, b, w). Works for decay (w > 0) and growth
// (w < 0).

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "cavcool/errors.hpp"

namespace cavcool {

struct ExpFitResult {
    double c = 0.0;  // asymptote
    double b = 0.0;  // amplitude
    double w = 0.0;  // rate
    double rel_residual = 0.0;  // rms residual / fitted amplitude
    bool constant = false;      // data flat within tolerance; c = mean, w = 0
};

inline ExpFitResult fit_exponential(const std::vector<double>& t, const std::vector<double>& y,
                                    double flat_tol = 1e-12) {
    const std::size_t n = t.size();
    if (n < 4 || y.size() != n) throw fit_error("fit_exponential: need >= 4 samples");
    const double dt = t[1] - t[0];
    for (std::size_t i = 1; i < n; ++i)
        if (std::abs((t[i] - t[i - 1]) - dt) > 1e-9 * std::max(1.0, std::abs(dt)))
            throw fit_error("fit_exponential: samples must be uniformly spaced");

    double ymin = y[0], ymax = y[0], ymean = 0.0;
    for (double v : y) {
        ymin = std::min(ymin, v);
        ymax = std::max(ymax, v);
        ymean += v;
    }
    ymean /= double(n);
    if (ymax - ymin <= flat_tol * std::max(1.0, std::abs(ymean)))
        return {ymean, 0.0, 0.0, 0.0, true};

    // AR(1) seed
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double m = double(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        sx += y[i];
        sy += y[i + 1];
        sxx += y[i] * y[i];
        sxy += y[i] * y[i + 1];
    }
    const double denom = m * sxx - sx * sx;
    if (std::abs(denom) < 1e-300) throw fit_error("fit_exponential: degenerate AR(1) system");
    const double R = (m * sxy - sx * sy) / denom;
    const double A = (sy - R * sx) / m;
    if (!(R > 0.0)) throw fit_error("fit_exponential: non-exponential data (AR ratio <= 0)");
    double w = -std::log(R) / dt;
    double c = std::abs(1.0 - R) > 1e-14 ? A / (1.0 - R) : ymean;
    double b = y[0] - c;

    // Gauss-Newton on (c, b, w)
    for (int it = 0; it < 8; ++it) {
        Eigen::Matrix3d jtj = Eigen::Matrix3d::Zero();
        Eigen::Vector3d jtr = Eigen::Vector3d::Zero();
        for (std::size_t i = 0; i < n; ++i) {
            const double e = std::exp(-w * (t[i] - t[0]));
            const double r = y[i] - c - b * e;
            const Eigen::Vector3d j(1.0, e, -b * (t[i] - t[0]) * e);
            jtj += j * j.transpose();
            jtr += j * r;
        }
        const Eigen::Vector3d step = jtj.ldlt().solve(jtr);
        c += step(0);
        b += step(1);
        w += step(2);
        if (step.cwiseAbs().maxCoeff() < 1e-14 * std::max({std::abs(c), std::abs(b), 1.0}))
            break;
    }
    // b was fit relative to t[0]; convert to absolute-time convention
    const double b0 = b * std::exp(w * t[0]);

    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = y[i] - c - b0 * std::exp(-w * t[i]);
        ss += r * r;
    }
    const double amp = std::max(std::abs(b), 1e-300);
    return {c, b0, w, std::sqrt(ss / double(n)) / amp, false};
}

}  // namespace cavcool
