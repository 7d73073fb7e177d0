#include "isac/tx_beamformer.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <random>
#include <thread>

#include <Eigen/Eigenvalues>

namespace isac {

namespace {

struct Eig {
    RVec val;
    CMat vec;
};

Eig hermitian_eig(const CMat& m) {
    Eigen::SelfAdjointEigenSolver<CMat> es(m);
    if (es.info() != Eigen::Success) throw Error(ErrorCode::Internal, "eigendecomposition failed");
    return {es.eigenvalues(), es.eigenvectors()};
}

// sum_p |xi_p|^2 h_p h_p^H
CMat interference_matrix(const SubcarrierProblem& sp, const CVec& xi) {
    const Eigen::Index nt = sp.h.rows();
    CMat a = CMat::Zero(nt, nt);
    for (Eigen::Index p = 0; p < sp.h.cols(); ++p) a += std::norm(xi[p]) * sp.h.col(p) * sp.h.col(p).adjoint();
    return a;
}

// columns c_k = xi_k sqrt(1+beta_k) h_k
CMat rhs(const SubcarrierProblem& sp, const RVec& beta, const CVec& xi) {
    CMat c = sp.h;
    for (Eigen::Index k = 0; k < c.cols(); ++k) c.col(k) *= xi[k] * std::sqrt(1.0 + beta[k]);
    return c;
}

CMat sensing_matrix(const SubcarrierProblem& sp, const RVec& mu, int skip = -1) {
    const Eigen::Index nt = sp.h.rows();
    CMat s = CMat::Zero(nt, nt);
    for (size_t l = 0; l < sp.focal.size(); ++l) {
        if (static_cast<int>(l) == skip) continue;
        s += mu[static_cast<Eigen::Index>(l)] * sp.focal[l] * sp.focal[l].adjoint();
    }
    return s / sp.n_c;
}

double eig_tol(const RVec& val, double shift) {
    return 1e-12 * std::max(val.cwiseAbs().maxCoeff() + std::abs(shift), std::numeric_limits<double>::min());
}

// E diag(1/(val+shift)) E^H c with pseudo-inversion of silent null directions.
CMat eig_solve(const Eig& e, double shift, const CMat& c) {
    const CMat proj = e.vec.adjoint() * c;
    const double tol = eig_tol(e.val, shift);
    const double cnorm = c.squaredNorm();
    CMat scaled = proj;
    for (Eigen::Index i = 0; i < proj.rows(); ++i) {
        const double d = e.val[i] + shift;
        if (std::abs(d) <= tol) {
            if (proj.row(i).squaredNorm() > 1e-28 * cnorm)
                throw Error(ErrorCode::Singular, "beamformer matrix is singular along a signal direction");
            scaled.row(i).setZero();
        } else {
            scaled.row(i) /= d;
        }
    }
    return e.vec * scaled;
}

CVec principal_direction(const SubcarrierProblem& sp) {
    const Eigen::Index nt = sp.h.rows();
    CMat s = CMat::Zero(nt, nt);
    for (const auto& a : sp.focal) s += a * a.adjoint();
    const Eig e = hermitian_eig(s);
    return e.vec.col(nt - 1);
}

double min_gain_ratio(const SubcarrierProblem& sp, const CMat& v) {
    if (sp.gain_req <= 0.0) return std::numeric_limits<double>::infinity();
    double r = std::numeric_limits<double>::infinity();
    for (const auto& a : sp.focal) r = std::min(r, beampattern_gain(v, a, sp.n_c) / sp.gain_req);
    return r;
}

// Full-power point that already meets the gain requirement: users' matched
// filters are rotated toward the principal sensing direction just far enough.
CMat initial_point(const SubcarrierProblem& sp) {
    const int k_users = static_cast<int>(sp.h.cols());
    const CVec w = principal_direction(sp);
    const double amp = std::sqrt(sp.power / k_users);
    auto at = [&](double theta) {
        CMat v(sp.h.rows(), k_users);
        for (int k = 0; k < k_users; ++k) {
            CVec hk = sp.h.col(k);
            const double hn = hk.norm();
            if (hn > 0) hk /= hn;
            // align w's phase with h_k so the mix never cancels
            const cd ph = w.dot(hk);
            const cd rot = std::abs(ph) > 0 ? ph / std::abs(ph) : cd(1.0, 0.0);
            CVec d = std::cos(theta) * hk + std::sin(theta) * rot * w;
            const double dn = d.norm();
            v.col(k) = dn > 0 ? CVec(amp * d / dn) : CVec(amp * w);
        }
        return v;
    };
    constexpr int kSteps = 256;
    for (int i = 0; i <= kSteps; ++i) {
        const CMat v = at(0.5 * kPi * i / kSteps);
        if (min_gain_ratio(sp, v) >= 1.0 + 1e-9) return v;
    }
    return at(0.5 * kPi);
}

}  // namespace

// ---- channels ---------------------------------------------------------------

CommChannelSet gen_channels(const SystemConfig& cfg, const UserChannelSpec& spec) {
    if (spec.count < 1) throw Error(ErrorCode::InvalidArgument, "gen_channels: need at least one user");
    if (spec.clusters < 1 || spec.rays_per_cluster < 1)
        throw Error(ErrorCode::InvalidArgument, "gen_channels: clusters and rays must be >= 1");
    if (!(spec.range_m > 0)) throw Error(ErrorCode::InvalidArgument, "gen_channels: range must be positive");

    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    std::normal_distribution<double> n01(0.0, 1.0);

    const double wavelength = kSpeedOfLight / cfg.carrier_freq;
    const double path_amp = wavelength / (4.0 * kPi * spec.range_m);

    struct Ray {
        cd g;
        double angle;
        double delay;  // excess over LOS
    };

    CommChannelSet ch;
    ch.h.assign(static_cast<size_t>(cfg.n_subcarriers), CMat::Zero(cfg.n_tx, spec.count));
    ch.noise_var = RVec::Constant(spec.count, cfg.noise_var);

    for (int k = 0; k < spec.count; ++k) {
        const double bearing = (uni(rng) * 2.0 - 1.0) * kPi / 3.0;
        std::vector<double> cpow(static_cast<size_t>(spec.clusters));
        cpow[0] = 1.0;
        for (int c = 1; c < spec.clusters; ++c) cpow[static_cast<size_t>(c)] = (0.05 + 0.25 * uni(rng)) * std::exp(-c);
        double tot = 0.0;
        for (double p : cpow) tot += p;

        std::vector<Ray> rays;
        rays.push_back({std::sqrt(cpow[0] / tot) * cis(2.0 * kPi * uni(rng)), bearing, 0.0});
        for (int c = 1; c < spec.clusters; ++c) {
            const double center = bearing + (uni(rng) * 2.0 - 1.0) * kPi / 6.0;
            const double excess = 5e-9 + 95e-9 * uni(rng);
            const double ray_amp = std::sqrt(cpow[static_cast<size_t>(c)] / tot / spec.rays_per_cluster);
            for (int r = 0; r < spec.rays_per_cluster; ++r) {
                const cd g = ray_amp * cd(n01(rng), n01(rng)) / std::sqrt(2.0);
                rays.push_back({g, center + spec.angle_spread_rad * n01(rng), excess});
            }
        }
        for (const auto& ray : rays) {
            const CVec a = steering_vector(ray.angle, cfg.n_tx, cfg.antenna_sep);
            for (int n = 0; n < cfg.n_subcarriers; ++n) {
                const double cyc = std::fmod(n * cfg.subcarrier_spacing * ray.delay, 1.0);
                ch.h[static_cast<size_t>(n)].col(k) += path_amp * ray.g * cis(-2.0 * kPi * cyc) * a;
            }
        }
    }
    return ch;
}

SubcarrierProblem make_subproblem(const CommChannelSet& ch, int n, const std::vector<double>& focal_rad,
                                  const SystemConfig& cfg) {
    if (n < 0 || n >= ch.subcarriers()) throw Error(ErrorCode::OutOfRange, "subcarrier index out of range");
    SubcarrierProblem sp;
    sp.h = ch.h[static_cast<size_t>(n)];
    if (sp.h.rows() != cfg.n_tx) throw Error(ErrorCode::DimensionMismatch, "channel length != n_tx");
    sp.noise = ch.noise_var * static_cast<double>(cfg.n_subcarriers);
    for (double phi : focal_rad) sp.focal.push_back(steering_vector(phi, cfg.n_tx, cfg.antenna_sep));
    sp.n_c = cfg.n_subcarriers;
    sp.power = cfg.power_budget / cfg.n_subcarriers;
    sp.gain_req = cfg.sensing_gain_req / cfg.n_subcarriers;
    return sp;
}

// ---- metrics ----------------------------------------------------------------

double user_sinr(const SubcarrierProblem& sp, const CMat& v, int k) {
    const CVec hv = sp.h.col(k).adjoint() * v;  // h_k^H v_p for every p
    const double sig = std::norm(hv[k]);
    const double interf = hv.squaredNorm() - sig;
    return sig / (std::max(interf, 0.0) + sp.noise[k]);
}

double user_sinr(const CommChannelSet& ch, const TxSolution& sol, int k, int n, const SystemConfig& cfg) {
    SubcarrierProblem sp;
    sp.h = ch.h.at(static_cast<size_t>(n));
    sp.noise = ch.noise_var * static_cast<double>(cfg.n_subcarriers);
    return user_sinr(sp, sol.v.at(static_cast<size_t>(n)), k);
}

double sum_rate(const SubcarrierProblem& sp, const CMat& v) {
    double r = 0.0;
    for (Eigen::Index k = 0; k < sp.h.cols(); ++k) r += std::log1p(user_sinr(sp, v, static_cast<int>(k)));
    return r;
}

double beampattern_gain(const CMat& v, const CVec& a, double n_c) {
    return (a.adjoint() * v).squaredNorm() / n_c;
}

double beampattern_gain(const TxSolution& sol, double angle_rad, int n, const SystemConfig& cfg) {
    const CVec a = steering_vector(angle_rad, cfg.n_tx, cfg.antenna_sep);
    return beampattern_gain(sol.v.at(static_cast<size_t>(n)), a, cfg.n_subcarriers);
}

double reformulated_objective(const SubcarrierProblem& sp, const CMat& v, const RVec& beta, const CVec& xi) {
    double g = 0.0;
    for (Eigen::Index k = 0; k < sp.h.cols(); ++k) {
        const CVec hv = sp.h.col(k).adjoint() * v;
        const double denom = hv.squaredNorm() + sp.noise[k];
        g += std::log1p(beta[k]) - beta[k] + 2.0 * std::sqrt(1.0 + beta[k]) * std::real(std::conj(xi[k]) * hv[k]) -
             std::norm(xi[k]) * denom;
    }
    return g;
}

// ---- alternating steps ------------------------------------------------------

RVec update_beta(const SubcarrierProblem& sp, const CMat& v) {
    RVec b(sp.h.cols());
    for (Eigen::Index k = 0; k < b.size(); ++k) b[k] = user_sinr(sp, v, static_cast<int>(k));
    return b;
}

CVec update_xi(const SubcarrierProblem& sp, const CMat& v, const RVec& beta) {
    CVec xi(sp.h.cols());
    for (Eigen::Index k = 0; k < xi.size(); ++k) {
        const CVec hv = sp.h.col(k).adjoint() * v;
        xi[k] = std::sqrt(1.0 + beta[k]) * hv[k] / (hv.squaredNorm() + sp.noise[k]);
    }
    return xi;
}

CMat update_v(const SubcarrierProblem& sp, const RVec& beta, const CVec& xi, const Multipliers& m) {
    RVec mu = m.mu.size() ? m.mu : RVec::Zero(static_cast<Eigen::Index>(sp.focal.size()));
    const Eig e = hermitian_eig(interference_matrix(sp, xi) - sensing_matrix(sp, mu));
    return eig_solve(e, m.lambda, rhs(sp, beta, xi));
}

double solve_power_equation(const RVec& eig, const RVec& ups, double power) {
    if (eig.size() != ups.size()) throw Error(ErrorCode::DimensionMismatch, "power equation: size mismatch");
    if (!(power > 0)) throw Error(ErrorCode::InvalidArgument, "power equation: budget must be positive");
    // round-off negatives of a PSD matrix are not indefiniteness
    const double neg = -eig.minCoeff();
    const double lo = neg > eig_tol(eig, 0.0) ? neg : 0.0;
    const double ups_tot = ups.sum();
    const double ups_tol = 1e-28 * ups_tot;

    // value at lo+: silent null directions drop out, loud ones diverge
    const double tol = eig_tol(eig, lo);
    auto value = [&](double lam) {
        double s = 0.0;
        for (Eigen::Index i = 0; i < eig.size(); ++i) {
            if (ups[i] <= ups_tol) continue;
            const double d = eig[i] + lam;
            if (d <= tol) return std::numeric_limits<double>::infinity();
            s += ups[i] / (d * d);
        }
        return s;
    };
    const double at_lo = value(lo);
    if (at_lo <= power) {
        if (lo == 0.0) return 0.0;
        throw Error(ErrorCode::Infeasible, "power equation has no root above the indefiniteness bound");
    }
    double step = 1.0;
    double hi = lo + step;
    int guard = 0;
    while (value(hi) >= power) {
        step *= 2.0;
        hi = lo + step;
        if (++guard > 2000) throw Error(ErrorCode::Infeasible, "power equation bracket diverged");
    }
    double a = lo;
    double b = hi;
    for (int it = 0; it < 100; ++it) {
        const double mid = 0.5 * (a + b);
        if (value(mid) > power)
            a = mid;
        else
            b = mid;
        if (b - a <= 1e-15 * b) break;
    }
    return b;
}

double solve_lambda(const SubcarrierProblem& sp, const RVec& beta, const CVec& xi, const RVec& mu) {
    const RVec m = mu.size() ? mu : RVec::Zero(static_cast<Eigen::Index>(sp.focal.size()));
    const Eig e = hermitian_eig(interference_matrix(sp, xi) - sensing_matrix(sp, m));
    const CMat proj = e.vec.adjoint() * rhs(sp, beta, xi);
    const RVec ups = proj.rowwise().squaredNorm();
    return solve_power_equation(e.val, ups, sp.power);
}

double solve_mu(const SubcarrierProblem& sp, const RVec& beta, const CVec& xi, double lambda, const RVec& mu,
                int l) {
    if (l < 0 || l >= static_cast<int>(sp.focal.size())) throw Error(ErrorCode::OutOfRange, "focal index out of range");
    if (sp.gain_req <= 0.0) return 0.0;
    const CVec& a = sp.focal[static_cast<size_t>(l)];
    const Eig e = hermitian_eig(interference_matrix(sp, xi) - sensing_matrix(sp, mu, l));
    const CMat c = rhs(sp, beta, xi);

    // gain with mu_l = 0
    const CMat v0 = eig_solve(e, lambda, c);
    if (beampattern_gain(v0, a, sp.n_c) >= sp.gain_req) return 0.0;

    if ((e.val.array() + lambda).minCoeff() <= eig_tol(e.val, lambda))
        throw Error(ErrorCode::Singular, "solve_mu: the remaining matrix is not positive definite");
    const CVec xa = eig_solve(e, lambda, a);
    const double s = std::real(a.dot(xa));
    const double g0 = (xa.adjoint() * c).squaredNorm();  // sum_k |a^H Xi^-1 c_k|^2
    if (g0 <= 0.0) throw Error(ErrorCode::Infeasible, "solve_mu: focal direction carries no signal");
    const double r = std::sqrt(g0 / (sp.n_c * sp.gain_req));
    // roots n_c (1 -+ r) / s; r < 1 here so the smaller one is positive
    return sp.n_c * (1.0 - r) / s;
}

namespace {

// Gain at focal angle l once lambda has been eliminated for the given mu.
// A power equation without an admissible root means the critical direction
// can absorb any power, so the gain is unbounded there.
double eliminated_gain(const SubcarrierProblem& sp, const RVec& beta, const CVec& xi, const RVec& mu, int l,
                       double* lambda_out) {
    double lam = 0.0;
    try {
        lam = solve_lambda(sp, beta, xi, mu);
        if (lambda_out) *lambda_out = lam;
        const CMat v = update_v(sp, beta, xi, Multipliers{lam, mu});
        return beampattern_gain(v, sp.focal[static_cast<size_t>(l)], sp.n_c);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::Infeasible && e.code() != ErrorCode::Singular) throw;
        return std::numeric_limits<double>::infinity();
    }
}

// Smallest mu_l >= 0 whose eliminated gain reaches the requirement. The dual
// is convex in mu_l along this path, so the gain is nondecreasing in mu_l.
double mu_line_search(const SubcarrierProblem& sp, const RVec& beta, const CVec& xi, RVec mu, int l) {
    mu[l] = 0.0;
    if (eliminated_gain(sp, beta, xi, mu, l, nullptr) >= sp.gain_req) return 0.0;
    double lo = 0.0;
    double hi = 1e-6 * std::max(interference_matrix(sp, xi).trace().real(), 1e-300) * sp.n_c;
    for (int i = 0;; ++i) {
        mu[l] = hi;
        if (eliminated_gain(sp, beta, xi, mu, l, nullptr) >= sp.gain_req) break;
        lo = hi;
        hi *= 4.0;
        if (i > 400) throw Error(ErrorCode::Infeasible, "beampattern multiplier bracket diverged");
    }
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
        mu[l] = 0.5 * (lo + hi);
        const double g = eliminated_gain(sp, beta, xi, mu, l, nullptr);
        if (g >= sp.gain_req) {
            hi = mu[l];
            if (g <= sp.gain_req * (1.0 + 1e-12)) break;
        } else {
            lo = mu[l];
        }
    }
    return hi;
}

}  // namespace

Multipliers solve_multipliers(const SubcarrierProblem& sp, const RVec& beta, const CVec& xi, const Multipliers& warm) {
    const auto n_l = static_cast<Eigen::Index>(sp.focal.size());
    Multipliers m;
    m.mu = warm.mu.size() == n_l ? warm.mu : RVec::Zero(n_l);
    if (n_l == 0 || sp.gain_req <= 0.0) {
        m.mu.setZero();
        m.lambda = solve_lambda(sp, beta, xi, m.mu);
        return m;
    }
    if (n_l == 1) m.mu.setZero();
    // cyclic over focal angles; a single angle needs one pass
    const int sweeps = n_l == 1 ? 1 : 200;
    for (int it = 0; it < sweeps; ++it) {
        const RVec prev = m.mu;
        for (Eigen::Index l = 0; l < n_l; ++l) m.mu[l] = mu_line_search(sp, beta, xi, m.mu, static_cast<int>(l));
        if ((m.mu - prev).cwiseAbs().maxCoeff() <= 1e-12 * (1.0 + m.mu.cwiseAbs().maxCoeff())) break;
    }
    m.lambda = solve_lambda(sp, beta, xi, m.mu);
    return m;
}

// ---- full solver ------------------------------------------------------------

namespace {

// When the unconstrained surrogate optimum fits the budget but misses the gain
// target and A is rank deficient, null-space components of A are free: the
// objective ignores them. Adds the cheapest such component toward a (L = 1).
bool complete_in_null_space(const SubcarrierProblem& sp, const CVec& xi, CMat& v) {
    if (sp.focal.size() != 1) return false;
    const Eig e = hermitian_eig(interference_matrix(sp, xi));
    const double tol = eig_tol(e.val, 0.0);
    const CVec& a = sp.focal[0];
    CVec a_null = CVec::Zero(a.size());
    for (Eigen::Index i = 0; i < e.val.size(); ++i)
        if (std::abs(e.val[i]) <= tol) a_null += e.vec.col(i) * e.vec.col(i).dot(a);
    const double b = a_null.norm();
    if (b <= 1e-9 * a.norm()) return false;

    const CVec w = (a.adjoint() * v).transpose();  // a^H v_k
    const double xn = w.norm();
    const double need = std::sqrt(sp.n_c * sp.gain_req);
    const double t = std::max(0.0, (need - xn) / b) * (1.0 + 1e-9);
    if (v.squaredNorm() + t * t > sp.power) return false;
    for (Eigen::Index k = 0; k < v.cols(); ++k) {
        double share = 0.0;
        cd ph(1.0, 0.0);
        if (xn > 0) {
            share = std::abs(w[k]) / xn;
            if (std::abs(w[k]) > 0) ph = w[k] / std::abs(w[k]);
        } else if (k == 0) {
            share = 1.0;
        }
        v.col(k) += (t * share / b) * ph * a_null;
    }
    return true;
}

}  // namespace

VStep solve_v_step(const SubcarrierProblem& sp, const RVec& beta, const CVec& xi, const Multipliers& warm) {
    const auto n_l = static_cast<Eigen::Index>(sp.focal.size());
    VStep out;
    out.mult.mu = RVec::Zero(n_l);
    out.mult.lambda = solve_lambda(sp, beta, xi, out.mult.mu);
    out.v = update_v(sp, beta, xi, out.mult);
    if (sp.gain_req <= 0.0 || min_gain_ratio(sp, out.v) >= 1.0) return out;
    if (out.mult.lambda == 0.0) {
        CMat v = out.v;
        if (complete_in_null_space(sp, xi, v)) {
            out.v = std::move(v);
            out.null_completed = true;
            return out;
        }
    }
    out.mult = solve_multipliers(sp, beta, xi, warm);
    out.v = update_v(sp, beta, xi, out.mult);
    return out;
}


double max_sensing_gain(const SubcarrierProblem& sp) {
    if (sp.focal.empty()) return 0.0;
    const Eigen::Index nt = sp.h.rows();
    CMat s = CMat::Zero(nt, nt);
    for (const auto& a : sp.focal) s += a * a.adjoint();
    return sp.power * hermitian_eig(s).val.maxCoeff() / sp.n_c;
}

TxSolution optimize_subcarrier(const SubcarrierProblem& sp, const TxOptions& opt) {
    TxSolution sol;
    sol.max_gain = max_sensing_gain(sp);
    if (sp.focal.size() == 1 && sp.gain_req > sol.max_gain * (1.0 + 1e-12))
        throw Error(ErrorCode::Infeasible, "sensing gain requirement " + std::to_string(sp.gain_req) +
                                               " exceeds the achievable " + std::to_string(sol.max_gain));
    const auto k_users = sp.h.cols();
    const auto n_l = static_cast<Eigen::Index>(sp.focal.size());

    if (opt.sensing_only) {
        CMat v = CMat::Zero(sp.h.rows(), k_users);
        if (n_l > 0) v.col(0) = std::sqrt(sp.power) * principal_direction(sp);
        sol.v = {v};
        sol.beta = {update_beta(sp, v)};
        sol.xi = {update_xi(sp, v, sol.beta[0])};
        sol.mult = {Multipliers{0.0, RVec::Zero(n_l)}};
        sol.trace = {{sum_rate(sp, v)}};
        return sol;
    }

    CMat v = initial_point(sp);
    if (sp.focal.size() > 1 && min_gain_ratio(sp, v) < 1.0)
        throw Error(ErrorCode::Infeasible, "no feasible starting point meets every focal gain requirement");

    std::vector<double> trace{sum_rate(sp, v)};
    Multipliers mult{0.0, RVec::Zero(n_l)};
    RVec beta;
    CVec xi;
    int iters = 0;
    for (; iters < opt.max_iter; ++iters) {
        beta = update_beta(sp, v);
        xi = update_xi(sp, v, beta);
        const double g0 = reformulated_objective(sp, v, beta, xi);
        CMat vn;
        Multipliers mn;
        try {
            VStep st = solve_v_step(sp, beta, xi, mult);
            vn = std::move(st.v);
            mn = st.mult;
        } catch (const Error&) {
            ++sol.safeguard_hits;
            break;
        }
        const double g1 = reformulated_objective(sp, vn, beta, xi);
        if (g1 < g0 - 1e-9 * (1.0 + std::abs(g0))) {
            ++sol.safeguard_hits;
            break;
        }
        // the sum-rate only grows when every beam is scaled up, so spend any
        // budget the surrogate left unused
        const double pw = vn.squaredNorm();
        if (pw > 0.0 && pw < sp.power) vn *= std::sqrt(sp.power / pw);
        v = std::move(vn);
        mult = mn;
        const double r = sum_rate(sp, v);
        const double prev = trace.back();
        trace.push_back(r);
        if (std::abs(r - prev) <= opt.tol * std::max(std::abs(prev), 1e-12)) {
            ++iters;
            break;
        }
    }
    beta = update_beta(sp, v);
    xi = update_xi(sp, v, beta);
    sol.v = {v};
    sol.beta = {beta};
    sol.xi = {xi};
    sol.mult = {mult};
    sol.trace = {trace};
    sol.iterations = iters;
    return sol;
}

TxSolution optimize(const CommChannelSet& ch, const SystemConfig& cfg, const std::vector<double>& focal_rad,
                    const TxOptions& opt) {
    if (ch.users() < 1) throw Error(ErrorCode::InvalidArgument, "optimize: no users");
    if (ch.subcarriers() != cfg.n_subcarriers)
        throw Error(ErrorCode::DimensionMismatch, "optimize: one channel matrix per subcarrier required");
    const int nc = cfg.n_subcarriers;

    {
        const SubcarrierProblem sp0 = make_subproblem(ch, 0, focal_rad, cfg);
        const double mg = max_sensing_gain(sp0);
        if (!focal_rad.empty() && sp0.gain_req > mg * (1.0 + 1e-12))
            throw Error(ErrorCode::Infeasible, "sensing gain requirement " + std::to_string(cfg.sensing_gain_req) +
                                                   " W exceeds the achievable " + std::to_string(mg * nc) + " W");
    }

    std::vector<TxSolution> parts(static_cast<size_t>(nc));
    const unsigned workers = std::max(1u, std::min<unsigned>(std::thread::hardware_concurrency(), 16u));
    std::vector<std::future<void>> jobs;
    for (unsigned w = 0; w < workers; ++w) {
        jobs.push_back(std::async(std::launch::async, [&, w] {
            for (int n = static_cast<int>(w); n < nc; n += static_cast<int>(workers))
                parts[static_cast<size_t>(n)] = optimize_subcarrier(make_subproblem(ch, n, focal_rad, cfg), opt);
        }));
    }
    for (auto& j : jobs) j.get();

    TxSolution sol;
    size_t longest = 0;
    for (auto& p : parts) {
        sol.v.push_back(std::move(p.v[0]));
        sol.beta.push_back(std::move(p.beta[0]));
        sol.xi.push_back(std::move(p.xi[0]));
        sol.mult.push_back(std::move(p.mult[0]));
        longest = std::max(longest, p.trace[0].size());
        sol.trace.push_back(std::move(p.trace[0]));
        sol.iterations = std::max(sol.iterations, p.iterations);
        sol.safeguard_hits += p.safeguard_hits;
        sol.max_gain = p.max_gain;
    }
    sol.total_trace.assign(longest, 0.0);
    for (const auto& t : sol.trace)
        for (size_t i = 0; i < longest; ++i) sol.total_trace[i] += t[std::min(i, t.size() - 1)];
    return sol;
}

}  // namespace isac
