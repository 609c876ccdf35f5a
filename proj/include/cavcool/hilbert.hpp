#pragma once

// Dense operator and superoperator algebra on truncated atom (x) cavity
// (x) optional motion spaces: Hamiltonians, Lindblad dissipators, steady
// states, resolvent solves and time evolution.
//
// Conventions (fixed; resolvent right-hand sides depend on them):
//   * basis index i = (a * N_c + c) * N_m + m, atom a in {g=0, e=1}
//   * vectorization stacks columns: vec(A X B) = (B^T kron A) vec(X)

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "cavcool/errors.hpp"
#include "cavcool/params.hpp"
#include "cavcool/rates.hpp"

namespace cavcool {

using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

struct SpaceLayout {
    static constexpr int atom_dim = 2;
    int cavity_dim = 3;
    int motion_dim = 0;  // 0 = motion absent

    bool has_motion() const { return motion_dim > 0; }
    int motion_factor() const { return std::max(motion_dim, 1); }
    int dim() const { return atom_dim * cavity_dim * motion_factor(); }
    void check() const {
        if (cavity_dim < 2) throw std::domain_error("SpaceLayout: cavity_dim must be >= 2");
        if (motion_dim < 0) throw std::domain_error("SpaceLayout: motion_dim must be >= 0");
    }
    friend bool operator==(const SpaceLayout&, const SpaceLayout&) = default;
};

struct OperatorMatrix {
    SpaceLayout layout;
    Mat m;

    bool is_hermitian(double tol = 1e-12) const {
        return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol * std::max(1.0, m.cwiseAbs().maxCoeff());
    }
};

struct SuperoperatorMatrix {
    SpaceLayout layout;
    Mat m;  // dim()^2 x dim()^2
};

struct DensityOperator {
    SpaceLayout layout;
    Mat rho;

    double hermiticity_defect() const { return (rho - rho.adjoint()).cwiseAbs().maxCoeff(); }
    double trace_defect() const { return std::abs(rho.trace() - cd(1.0, 0.0)); }
    double min_eigenvalue() const {
        Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (rho + rho.adjoint()),
                                              Eigen::EigenvaluesOnly);
        return es.eigenvalues().minCoeff();
    }
    void check_valid(double herm_tol = 1e-10, double trace_tol = 1e-10,
                     double eig_floor = -1e-8) const {
        if (hermiticity_defect() > herm_tol)
            throw numerical_error("DensityOperator: Hermiticity defect exceeds tolerance");
        if (trace_defect() > trace_tol)
            throw numerical_error("DensityOperator: trace defect exceeds tolerance");
        if (min_eigenvalue() < eig_floor)
            throw numerical_error("DensityOperator: negative eigenvalue below floor");
    }
};

// ---- elementary operators -------------------------------------------------

inline Mat annihilation(int n) {
    Mat a = Mat::Zero(n, n);
    for (int k = 1; k < n; ++k) a(k - 1, k) = std::sqrt(double(k));
    return a;
}

inline Mat kron(const Mat& a, const Mat& b) {
    Mat out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

// Embed atom/cavity/motion factors (any may be identity) into the full space.
inline Mat embed(const SpaceLayout& l, const Mat& atom, const Mat& cav, const Mat& mot) {
    return kron(kron(atom, cav), mot);
}

inline Mat sigma_op(const SpaceLayout& l) {  // |g><e| on the atom factor
    Mat s = Mat::Zero(2, 2);
    s(0, 1) = 1.0;
    return embed(l, s, Mat::Identity(l.cavity_dim, l.cavity_dim),
                 Mat::Identity(l.motion_factor(), l.motion_factor()));
}

inline Mat cavity_annihilation(const SpaceLayout& l) {
    return embed(l, Mat::Identity(2, 2), annihilation(l.cavity_dim),
                 Mat::Identity(l.motion_factor(), l.motion_factor()));
}

inline Mat motion_annihilation(const SpaceLayout& l) {
    return embed(l, Mat::Identity(2, 2), Mat::Identity(l.cavity_dim, l.cavity_dim),
                 annihilation(l.motion_factor()));
}

inline Mat excited_projector(const SpaceLayout& l) {
    Mat pe = Mat::Zero(2, 2);
    pe(1, 1) = 1.0;
    return embed(l, pe, Mat::Identity(l.cavity_dim, l.cavity_dim),
                 Mat::Identity(l.motion_factor(), l.motion_factor()));
}

inline Mat phonon_number_op(const SpaceLayout& l) {
    const Mat b = annihilation(l.motion_factor());
    return embed(l, Mat::Identity(2, 2), Mat::Identity(l.cavity_dim, l.cavity_dim),
                 b.adjoint() * b);
}

// ---- vectorization --------------------------------------------------------

inline Vec vectorize(const Mat& m) {
    return Eigen::Map<const Vec>(m.data(), m.size());
}

inline Mat unvectorize(const Vec& v, int d) {
    return Eigen::Map<const Mat>(v.data(), d, d);
}

namespace detail {

// dst += coeff * kron(a, b) without materializing the Kronecker product.
inline void add_kron(Mat& dst, cd coeff, const Mat& a, const Mat& b) {
    const Eigen::Index q = b.rows();
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            const cd w = coeff * a(i, j);
            if (w != cd(0.0, 0.0)) dst.block(i * q, j * q, q, q) += w * b;
        }
}

}  // namespace detail

// -i [H, .] as a superoperator acting on column-stacked rho.
inline void add_commutator(Mat& L, const Mat& h) {
    const Eigen::Index d = h.rows();
    const Mat id = Mat::Identity(d, d);
    detail::add_kron(L, cd(0, -1), id, h);
    detail::add_kron(L, cd(0, +1), h.transpose(), id);
}

// rate * (C rho C^+ - 1/2 {C^+ C, rho})
inline void add_dissipator(Mat& L, double rate, const Mat& c) {
    const Eigen::Index d = c.rows();
    const Mat id = Mat::Identity(d, d);
    const Mat cdc = c.adjoint() * c;
    detail::add_kron(L, rate, c.conjugate(), c);
    detail::add_kron(L, -0.5 * rate, id, cdc);
    detail::add_kron(L, -0.5 * rate, cdc.transpose(), id);
}

// ---- model builders -------------------------------------------------------

// H0 = -Delta sigma^+ sigma - delta_c a^+ a + [sigma^+ (Omega + g a) + h.c.]
inline OperatorMatrix build_h0(const SystemParams& p, const SpaceLayout& l) {
    l.check();
    const Mat s = sigma_op(l);
    const Mat a = cavity_annihilation(l);
    const int d = l.dim();
    Mat h = -p.delta * (s.adjoint() * s) - p.delta_c * (a.adjoint() * a);
    const Mat drive = p.omega * Mat::Identity(d, d) + p.g * a;
    h += s.adjoint() * drive + drive.adjoint() * s;
    return {l, std::move(h)};
}

// Internal factor of the mechanical coupling, V_L + V_c. The sign of the
// laser term is chosen so that the Liouvillian built from this operator
// reproduces the closed-form sideband amplitudes of the rates module (the
// two conventions differ by the relabeling phi_l -> -phi_l; the geometry
// factors are signed inputs).
inline OperatorMatrix build_v(const SystemParams& p, const SpaceLayout& l) {
    l.check();
    const Mat s = sigma_op(l);
    const Mat a = cavity_annihilation(l);
    const cd i(0.0, 1.0);
    Mat v = i * p.phi_l * p.omega * (s - s.adjoint()) +
            p.phi_c * p.g * (a * s.adjoint() + a.adjoint() * s);
    return {l, std::move(v)};
}

// H_mec = n_b + 1/2 (trap units)
inline OperatorMatrix build_hmec(const SpaceLayout& l) {
    l.check();
    const int d = l.dim();
    Mat h = phonon_number_op(l) + 0.5 * Mat::Identity(d, d);
    return {l, std::move(h)};
}

// L0I = -i[H0, .] + kappa D[a] + gamma D[sigma], motion absent.
inline SuperoperatorMatrix build_liouvillian_internal(const SystemParams& p,
                                                      const SpaceLayout& l) {
    l.check();
    if (l.has_motion())
        throw std::domain_error("build_liouvillian_internal: layout must have motion_dim = 0");
    const int d = l.dim();
    Mat L = Mat::Zero(d * d, d * d);
    add_commutator(L, build_h0(p, l).m);
    add_dissipator(L, p.kappa, cavity_annihilation(l));
    add_dissipator(L, p.gamma, sigma_op(l));
    return {l, std::move(L)};
}

// Full generator L = L0 + eta L1 + eta^2 L2 on atom (x) cavity (x) motion.
// L2 keeps only the recoil-diffusion part, as a Lindblad channel with
// collapse (b + b^+) sigma at rate gamma alpha eta^2.
inline SuperoperatorMatrix build_liouvillian_full(const SystemParams& p, const SpaceLayout& l,
                                                  bool include_recoil_diffusion = true) {
    l.check();
    if (l.motion_dim < 2)
        throw std::domain_error("build_liouvillian_full: motion_dim must be >= 2");
    const int d = l.dim();
    const Mat b = motion_annihilation(l);
    const Mat x = b + b.adjoint();
    const Mat s = sigma_op(l);
    Mat h = build_h0(p, l).m + build_hmec(l).m + p.eta * (build_v(p, l).m * x);
    Mat L = Mat::Zero(d * d, d * d);
    add_commutator(L, h);
    add_dissipator(L, p.kappa, cavity_annihilation(l));
    add_dissipator(L, p.gamma, s);
    if (include_recoil_diffusion)
        add_dissipator(L, p.gamma * p.alpha * p.eta * p.eta, x * s);
    return {l, std::move(L)};
}

// ---- solves ---------------------------------------------------------------

namespace detail {

inline Vec solve_with_trace_row(const Mat& L, int d, Eigen::Index replaced_row) {
    Mat M = L;
    M.row(replaced_row).setZero();
    for (int i = 0; i < d; ++i) M(replaced_row, i * d + i) = 1.0;
    Vec rhs = Vec::Zero(L.rows());
    rhs(replaced_row) = 1.0;
    return Eigen::PartialPivLU<Mat>(M).solve(rhs);
}

}  // namespace detail

// Normalized null-space solution of a trace-preserving generator. Solved by
// replacing one row with the trace functional; a second solve with a
// different row replaced probes for null-space degeneracy.
inline DensityOperator steady_state_solve(const SuperoperatorMatrix& L,
                                          double residual_tol = 1e-10) {
    const int d = L.layout.dim();
    const Vec x1 = detail::solve_with_trace_row(L.m, d, 0);
    const Vec x2 = detail::solve_with_trace_row(L.m, d, L.m.rows() - 1);
    const double scale = std::max(1.0, L.m.cwiseAbs().maxCoeff());
    if ((x1 - x2).cwiseAbs().maxCoeff() > 1e-8)
        throw degenerate_steady_state_error(
            "steady_state_solve: null space is not one-dimensional");
    if ((L.m * x1).cwiseAbs().maxCoeff() > residual_tol * scale)
        throw numerical_error("steady_state_solve: residual above tolerance");
    Mat rho = unvectorize(x1, d);
    rho = 0.5 * (rho + rho.adjoint()).eval();
    rho /= rho.trace().real();
    DensityOperator out{L.layout, std::move(rho)};
    if (out.min_eigenvalue() < -1e-8)
        throw numerical_error("steady_state_solve: solution not positive semidefinite");
    return out;
}

// x with (L + shift I) x = rhs.
inline Vec resolvent_solve(const SuperoperatorMatrix& L, cd shift, const Vec& rhs,
                           double residual_tol = 1e-10) {
    Mat M = L.m;
    M.diagonal().array() += shift;
    const Vec x = Eigen::PartialPivLU<Mat>(M).solve(rhs);
    const double scale = std::max(1.0, rhs.cwiseAbs().maxCoeff());
    if ((M * x - rhs).cwiseAbs().maxCoeff() > residual_tol * scale)
        throw singular_point_error("L + shift",
                                   "resolvent_solve: system singular or ill-conditioned");
    return x;
}

// ---- time evolution -------------------------------------------------------

struct EvolveTolerances {
    double abs_tol = 1e-10;
    double rel_tol = 1e-8;
    double trace_drift = 1e-9;
    double herm_drift = 1e-9;
};

// Dormand-Prince 5(4) for d rho/dt = rhs(rho). `Rhs` computes out = L(in).
template <typename Rhs>
std::vector<Mat> integrate_master(const Rhs& rhs, Mat rho, const std::vector<double>& t_grid,
                                  const EvolveTolerances& tol = {}) {
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

    if (t_grid.size() < 2) throw std::domain_error("integrate_master: need at least 2 times");
    for (std::size_t i = 1; i < t_grid.size(); ++i)
        if (!(t_grid[i] > t_grid[i - 1]))
            throw std::domain_error("integrate_master: time grid must be increasing");

    const Eigen::Index d = rho.rows();
    Mat k1(d, d), k2(d, d), k3(d, d), k4(d, d), k5(d, d), k6(d, d), k7(d, d), tmp(d, d),
        y5(d, d);
    std::vector<Mat> snapshots;
    snapshots.reserve(t_grid.size());
    snapshots.push_back(rho);
    double t = t_grid.front();
    rhs(rho, k1);
    double h = 1e-3;
    for (std::size_t gi = 1; gi < t_grid.size(); ++gi) {
        const double t_target = t_grid[gi];
        while (t < t_target) {
            h = std::min(h, t_target - t);
            tmp = rho + h * a21 * k1;
            rhs(tmp, k2);
            tmp = rho + h * (a31 * k1 + a32 * k2);
            rhs(tmp, k3);
            tmp = rho + h * (a41 * k1 + a42 * k2 + a43 * k3);
            rhs(tmp, k4);
            tmp = rho + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
            rhs(tmp, k5);
            tmp = rho + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
            rhs(tmp, k6);
            y5 = rho + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
            rhs(y5, k7);
            tmp = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
            const double ymax = std::max(rho.cwiseAbs().maxCoeff(), y5.cwiseAbs().maxCoeff());
            const double err = tmp.cwiseAbs().maxCoeff() / (tol.abs_tol + tol.rel_tol * ymax);
            if (err <= 1.0) {
                t += h;
                rho.swap(y5);
                k1.swap(k7);
            }
            const double grow = err > 0.0 ? 0.9 * std::pow(err, -0.2) : 5.0;
            h *= std::clamp(grow, 0.2, 5.0);
            if (!(h > 1e-14 * std::max(1.0, std::abs(t))))
                throw numerical_error("integrate_master: step size collapsed");
        }
        snapshots.push_back(rho);
    }
    return snapshots;
}

// Dense-superoperator right-hand side (fine for internal-only spaces).
struct SuperoperatorRhs {
    const Mat* L;
    void operator()(const Mat& in, Mat& out) const {
        const Eigen::Index d = in.rows();
        Eigen::Map<Vec> ov(out.data(), out.size());
        ov = (*L) * Eigen::Map<const Vec>(in.data(), in.size());
        (void)d;
    }
};

// Structure-exploiting right-hand side:
//   L rho = -(G rho + rho G^+) + sum_j C_j rho C_j^+,  G = iH + 1/2 sum C^+C
struct LindbladRhs {
    Mat g_eff;
    std::vector<Mat> collapse;
    mutable Mat scratch;

    LindbladRhs(const Mat& h, std::vector<Mat> collapse_ops)
        : collapse(std::move(collapse_ops)) {
        const Eigen::Index d = h.rows();
        g_eff = cd(0, 1) * h;
        for (const Mat& c : collapse) g_eff += 0.5 * (c.adjoint() * c);
        scratch.resize(d, d);
    }

    static LindbladRhs from_params(const SystemParams& p, const SpaceLayout& l,
                                   bool include_recoil_diffusion = true) {
        const Mat b = motion_annihilation(l);
        const Mat x = b + b.adjoint();
        const Mat s = sigma_op(l);
        Mat h = build_h0(p, l).m + build_hmec(l).m + p.eta * (build_v(p, l).m * x);
        std::vector<Mat> cs;
        cs.push_back(std::sqrt(p.kappa) * cavity_annihilation(l));
        cs.push_back(std::sqrt(p.gamma) * s);
        if (include_recoil_diffusion)
            cs.push_back(std::sqrt(p.gamma * p.alpha) * p.eta * (x * s));
        return LindbladRhs(h, std::move(cs));
    }

    void operator()(const Mat& in, Mat& out) const {
        out.noalias() = -(g_eff * in);
        out.noalias() -= in * g_eff.adjoint();
        for (const Mat& c : collapse) {
            scratch.noalias() = c * in;
            out.noalias() += scratch * c.adjoint();
        }
    }
};

// Spec-level evolve: dense superoperator, validated snapshots.
inline std::vector<DensityOperator> evolve_density(const SuperoperatorMatrix& L,
                                                   const DensityOperator& rho0,
                                                   const std::vector<double>& t_grid,
                                                   const EvolveTolerances& tol = {}) {
    if (!(rho0.layout == L.layout))
        throw std::domain_error("evolve_density: layout mismatch");
    SuperoperatorRhs rhs{&L.m};
    auto mats = integrate_master(rhs, rho0.rho, t_grid, tol);
    std::vector<DensityOperator> out;
    out.reserve(mats.size());
    for (auto& m : mats) {
        DensityOperator d{L.layout, std::move(m)};
        if (d.hermiticity_defect() > tol.herm_drift)
            throw numerical_error("evolve_density: Hermiticity drift beyond bound");
        if (d.trace_defect() > tol.trace_drift)
            throw numerical_error("evolve_density: trace drift beyond bound");
        out.push_back(std::move(d));
    }
    return out;
}

inline cd expectation(const OperatorMatrix& op, const DensityOperator& rho) {
    if (!(op.layout == rho.layout)) throw std::domain_error("expectation: layout mismatch");
    return (op.m * rho.rho).trace();
}

}  // namespace cavcool
