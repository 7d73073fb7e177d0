#pragma once
// Reference implementations used only by tests. Dense matrices and plain
// loops, written from the definitions, no FFTs and no library internals.

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using cd = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RVec = Eigen::VectorXd;

inline constexpr double pi = 3.14159265358979323846;

inline cd expj(double x) { return {std::cos(x), std::sin(x)}; }

// unitary DFT, F[m,n] = exp(-j 2 pi m n / N) / sqrt(N)
inline CMat dft(int n) {
    CMat f(n, n);
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) f(r, c) = expj(-2.0 * pi * double((long long)r * c % n) / n) / std::sqrt(double(n));
    return f;
}

inline CMat diag(const CVec& d) { return d.asDiagonal(); }

inline CVec ramp(int n, double step) {
    CVec d(n);
    for (int i = 0; i < n; ++i) d[i] = expj(2.0 * pi * step * i);
    return d;
}

// a D_I(f) F^-1 D_R^*(tau) S D_v(f), with tau, f normalized and alpha the CP ratio
inline CMat path_matrix(cd a, double tau, double f, double alpha, const CMat& s) {
    const int nc = int(s.rows()), ns = int(s.cols());
    const CMat fi = dft(nc).adjoint();
    return a * diag(ramp(nc, f / nc)) * fi * diag(ramp(nc, tau)).conjugate() * s * diag(ramp(ns, f * alpha));
}

// same without the ICI phase
inline CMat path_matrix_clean(cd a, double tau, double f, double alpha, const CMat& s) {
    const int nc = int(s.rows()), ns = int(s.cols());
    return a * dft(nc).adjoint() * diag(ramp(nc, tau)).conjugate() * s * diag(ramp(ns, f * alpha));
}

// F^-1 ((F Y) ./ S) F_Nsym, no erasures
inline CMat rv_image(const CMat& y, const CMat& s) {
    const int nc = int(y.rows()), ns = int(y.cols());
    const CMat fy = dft(nc) * y;
    return dft(nc).adjoint() * fy.cwiseQuotient(s) * dft(ns);
}

inline CVec stack_columns(const CMat& m) {
    CVec v(m.size());
    for (Eigen::Index c = 0; c < m.cols(); ++c) v.segment(c * m.rows(), m.rows()) = m.col(c);
    return v;
}

// argmin_a ||y - a xi||^2 over a square grid centred at `centre`
inline cd amplitude_grid_search(const CVec& y, const CVec& xi, cd centre, double half_width, int steps) {
    cd best = centre;
    double best_r = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= steps; ++i)
        for (int k = 0; k <= steps; ++k) {
            const cd a = centre + cd(-half_width + 2.0 * half_width * i / steps, -half_width + 2.0 * half_width * k / steps);
            const double r = (y - a * xi).squaredNorm();
            if (r < best_r) best_r = r, best = a;
        }
    return best;
}

// ---- beamforming references ------------------------------------------------------

inline double sinr(const CMat& h, const CMat& v, double noise, int k) {
    double interf = noise;
    for (int p = 0; p < v.cols(); ++p)
        if (p != k) interf += std::norm(h.col(k).dot(v.col(p)));
    return std::norm(h.col(k).dot(v.col(k))) / interf;
}

inline double sum_rate(const CMat& h, const CMat& v, const RVec& noise) {
    double r = 0.0;
    for (int k = 0; k < v.cols(); ++k) r += std::log1p(sinr(h, v, noise[k], k));
    return r;
}

// Power allocation over interference-free streams with linear sensing
// constraint: max sum log(1 + p_k g_k) s.t. sum p_k <= P, sum p_k c_k >= G.
// Returns an empty vector when no allocation meets the constraint.
inline RVec constrained_waterfill(const RVec& g, const RVec& c, double power, double need) {
    const int k = int(g.size());
    if (c.maxCoeff() * power < need) return RVec();
    // p_k(lam, mu) = max(0, 1/(lam - mu c_k) - 1/g_k)
    auto alloc = [&](double lam, double mu) {
        RVec p(k);
        for (int i = 0; i < k; ++i) {
            const double d = lam - mu * c[i];
            p[i] = d > 0 ? std::max(0.0, 1.0 / d - 1.0 / g[i]) : std::numeric_limits<double>::infinity();
        }
        return p;
    };
    auto fill = [&](double mu) {
        double lo = mu * c.maxCoeff(), hi = lo + 1.0;
        while (alloc(hi, mu).sum() > power) hi = lo + 2.0 * (hi - lo);
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            (alloc(mid, mu).sum() > power ? lo : hi) = mid;
        }
        return alloc(hi, mu);
    };
    RVec p = fill(0.0);
    if (p.dot(c) >= need) return p;
    double lo = 0.0, hi = 1.0;
    while (fill(hi).dot(c) < need) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e300) return RVec();
    }
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (fill(mid).dot(c) < need ? lo : hi) = mid;
    }
    return fill(hi);
}

// Zero-forcing baseline. Each user's beam lives in the null space of the other
// users' channels and leans toward the focal direction by a common weight t;
// powers come from constrained water-filling. Best rate over a grid of t, or
// -inf when no t is feasible.
inline double zf_baseline_rate(const CMat& h, const RVec& noise, const CVec& a, double n_c, double power,
                               double gain_req) {
    const int nt = int(h.rows()), k = int(h.cols());
    std::vector<CMat> proj(k);
    for (int u = 0; u < k; ++u) {
        CMat others(nt, k - 1);
        for (int j = 0, c = 0; j < k; ++j)
            if (j != u) others.col(c++) = h.col(j);
        CMat p = CMat::Identity(nt, nt);
        if (k > 1) p -= others * (others.adjoint() * others).inverse() * others.adjoint();
        proj[u] = p;
    }
    double best = -std::numeric_limits<double>::infinity();
    for (int i = 0; i <= 400; ++i) {
        const double t = i == 0 ? 0.0 : std::pow(10.0, -3.0 + 6.0 * (i - 1) / 399.0);
        CMat w(nt, k);
        RVec g(k), c(k);
        for (int u = 0; u < k; ++u) {
            CVec d = proj[u] * (h.col(u) / h.col(u).norm() + t * a / a.norm());
            w.col(u) = d / d.norm();
            g[u] = std::norm(h.col(u).dot(w.col(u))) / noise[u];
            c[u] = std::norm(a.dot(w.col(u))) / n_c;
        }
        const RVec p = constrained_waterfill(g, c, power, gain_req);
        if (p.size() == 0) continue;
        CMat v = w;
        for (int u = 0; u < k; ++u) v.col(u) *= std::sqrt(p[u]);
        best = std::max(best, sum_rate(h, v, noise));
    }
    return best;
}

// ---- detection references ------------------------------------------------------------

// CA-CFAR by direct window sums on squared magnitudes, circular in both axes.
inline std::vector<std::pair<int, int>> cfar_direct(const Eigen::MatrixXd& mag, int guard, int train, double alpha) {
    const int rows = int(mag.rows()), cols = int(mag.cols());
    const int outer = guard + train;
    std::vector<std::pair<int, int>> out;
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) {
            double sum = 0.0;
            int n = 0;
            for (int dr = -outer; dr <= outer; ++dr)
                for (int dc = -outer; dc <= outer; ++dc) {
                    if (std::abs(dr) <= guard && std::abs(dc) <= guard) continue;
                    const double m = mag((r + dr + rows) % rows, (c + dc + cols) % cols);
                    sum += m * m;
                    ++n;
                }
            if (mag(r, c) * mag(r, c) > alpha * sum / n) out.push_back({r, c});
        }
    return out;
}

}  // namespace oracle

namespace oracle {

// Maximizer of sum_k 2 sqrt(1+beta_k) Re(xi_k^* h_k^H v_k) - |xi_k|^2 sum_p |h_k^H v_p|^2
// over ||V||_F^2 <= power, by accelerated projected gradient ascent.
inline CMat projected_ascent(const CMat& h, const RVec& beta, const CVec& xi, double power, int iters = 200000) {
    const int nt = int(h.rows()), k = int(h.cols());
    CMat a = CMat::Zero(nt, nt), c(nt, k);
    for (int p = 0; p < k; ++p) {
        a += std::norm(xi[p]) * h.col(p) * h.col(p).adjoint();
        c.col(p) = xi[p] * std::sqrt(1.0 + beta[p]) * h.col(p);
    }
    const double lip = Eigen::SelfAdjointEigenSolver<CMat>(a).eigenvalues().maxCoeff();
    const double step = 1.0 / (2.0 * lip);
    auto proj = [&](CMat v) {
        const double n = v.squaredNorm();
        if (n > power) v *= std::sqrt(power / n);
        return v;
    };
    CMat v = CMat::Zero(nt, k), prev = v, y = v;
    double t = 1.0;
    for (int it = 0; it < iters; ++it) {
        prev = v;
        v = proj(y + step * 2.0 * (c - a * y));
        const double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        y = v + ((t - 1.0) / tn) * (v - prev);
        t = tn;
        if ((v - prev).norm() < 1e-15 * (1.0 + v.norm())) break;
    }
    return v;
}

}  // namespace oracle
