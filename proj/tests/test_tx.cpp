#include <doctest.h>

#include <cmath>
#include <random>

#include "common.hpp"
#include "isac/tx_beamformer.hpp"
#include "oracles.hpp"

using namespace isac;
using namespace testing_support;

namespace {

SubcarrierProblem random_problem(int nt, int k, std::uint64_t seed, double power, double gain_frac,
                                 double focal = 0.3, double n_c = 16.0) {
    SubcarrierProblem sp;
    sp.h = gaussian(nt, k, seed);
    sp.noise = RVec::Constant(k, 0.1);
    sp.focal = {steering_vector(focal, nt, 0.5)};
    sp.n_c = n_c;
    sp.power = power;
    sp.gain_req = gain_frac * power * nt / n_c;
    return sp;
}

double power_of(const SubcarrierProblem& sp, const RVec& beta, const CVec& xi, const Multipliers& m) {
    return update_v(sp, beta, xi, m).squaredNorm();
}

}  // namespace

TEST_CASE("user_sinr") {
    SubcarrierProblem sp;
    sp.h = CMat::Zero(2, 1);
    sp.h(0, 0) = 1.0;
    sp.noise = RVec::Constant(1, 1.0);
    CMat v = CMat::Zero(2, 1);
    v(0, 0) = std::sqrt(2.0);
    CHECK(user_sinr(sp, v, 0) == doctest::Approx(2.0));

    SubcarrierProblem orth;
    orth.h = CMat::Identity(3, 2);
    orth.noise = RVec::Constant(2, 0.5);
    CMat vo = CMat::Identity(3, 2) * 2.0;
    CHECK(user_sinr(orth, vo, 0) == doctest::Approx(4.0 / 0.5));

    const SubcarrierProblem r = random_problem(6, 3, 1, 1.0, 0.0);
    const CMat vr = gaussian(6, 3, 2);
    for (int k = 0; k < 3; ++k) CHECK(user_sinr(r, vr, k) == doctest::Approx(oracle::sinr(r.h, vr, r.noise[k], k)));
    CHECK(sum_rate(r, vr) == doctest::Approx(oracle::sum_rate(r.h, vr, r.noise)));
}

TEST_CASE("beampattern_gain") {
    const int nt = 8;
    const double n_c = 16.0, p = 3.0;
    const CVec a = steering_vector(0.4, nt, 0.5);
    CMat v = a / a.norm() * std::sqrt(p);
    CHECK(beampattern_gain(v, a, n_c) == doctest::Approx(p * nt / n_c));

    CVec w = gaussian(nt, 1, 3).col(0);
    w -= a * (a.dot(w) / a.squaredNorm());
    CHECK(beampattern_gain(w, a, n_c) < 1e-24);

    // averaged over a full period of spatial frequency the pattern returns the radiated power
    const CMat vv = gaussian(nt, 2, 4);
    const int m = 4 * nt;
    double mean = 0.0;
    for (int i = 0; i < m; ++i) {
        const double u = -1.0 + 2.0 * i / m;  // sin(angle), half-wavelength spacing
        mean += n_c * beampattern_gain(vv, steering_vector(std::asin(u), nt, 0.5), n_c) / m;
    }
    CHECK(mean == doctest::Approx(vv.squaredNorm()).epsilon(1e-10));
}

TEST_CASE("update_beta is the SINR and maximizes the dual form") {
    const SubcarrierProblem sp = random_problem(4, 2, 5, 1.0, 0.0);
    const CMat v = gaussian(4, 2, 6);
    const RVec beta = update_beta(sp, v);
    for (int k = 0; k < 2; ++k) CHECK(beta[k] == doctest::Approx(user_sinr(sp, v, k)));
    CHECK(update_beta(sp, CMat::Zero(4, 2)).cwiseAbs().maxCoeff() == 0.0);

    // scan beta_0 with xi at its optimum for each beta
    double best = -1e300, arg = -1;
    for (int i = 0; i <= 10000; ++i) {
        RVec b = beta;
        b[0] = 10.0 * i / 10000;
        const double f = reformulated_objective(sp, v, b, update_xi(sp, v, b));
        if (f > best) best = f, arg = b[0];
    }
    if (beta[0] <= 10.0) CHECK(std::abs(arg - beta[0]) <= 1e-3 + 1e-12);
}

TEST_CASE("update_xi recovers the fractional objective") {
    const SubcarrierProblem sp = random_problem(5, 3, 7, 1.0, 0.0);
    const CMat v = gaussian(5, 3, 8);
    RVec beta(3);
    beta << 0.3, 2.0, 0.0;
    const CVec xi = update_xi(sp, v, beta);
    double frac = 0.0;
    for (int k = 0; k < 3; ++k) {
        const double g = oracle::sinr(sp.h, v, sp.noise[k], k);
        frac += std::log1p(beta[k]) - beta[k] + (1.0 + beta[k]) * g / (1.0 + g);
    }
    CHECK(reformulated_objective(sp, v, beta, xi) == doctest::Approx(frac).epsilon(1e-10));
    CHECK(update_xi(sp, CMat::Zero(5, 3), beta).norm() == 0.0);

    SubcarrierProblem one;
    one.h = CMat::Constant(1, 1, cd(2.0, 0));
    one.noise = RVec::Constant(1, 1.0);
    const CMat v1 = CMat::Constant(1, 1, cd(1.0, 0));
    const RVec b1 = update_beta(one, v1);
    const double g = b1[0];
    CHECK(reformulated_objective(one, v1, b1, update_xi(one, v1, b1)) ==
          doctest::Approx(std::log1p(g) - g + (1 + g) * g / (1 + g)));
}

TEST_CASE("update_v closed form") {
    SubcarrierProblem sp = random_problem(4, 1, 9, 1.0, 0.0);
    sp.focal.clear();
    RVec beta = RVec::Constant(1, 1.5);
    CVec xi = CVec::Constant(1, cd(0.4, -0.2));
    const CMat v = update_v(sp, beta, xi, Multipliers{0.7, RVec()});
    const cd ratio = v(0, 0) / sp.h(0, 0);
    CHECK((v.col(0) - ratio * sp.h.col(0)).norm() < 1e-12 * v.norm());
    CHECK(update_v(sp, beta, xi, Multipliers{1e12, RVec()}).norm() < 1e-10);
}

TEST_CASE("update_v with lambda matches projected ascent") {
    for (std::uint64_t seed : {11u, 12u, 13u}) {
        SubcarrierProblem sp = random_problem(4, 2, seed, 0.05, 0.0);
        sp.focal.clear();
        const CMat v0 = gaussian(4, 2, seed + 100) * 0.1;
        const RVec beta = update_beta(sp, v0);
        const CVec xi = update_xi(sp, v0, beta);
        const double lam = solve_lambda(sp, beta, xi, RVec());
        const CMat v = update_v(sp, beta, xi, Multipliers{lam, RVec()});
        const CMat ref = oracle::projected_ascent(sp.h, beta, xi, sp.power);
        CHECK((v - ref).norm() <= 1e-6 * ref.norm());
    }
}

TEST_CASE("solve_power_equation") {
    CHECK(solve_power_equation(RVec::Constant(1, 0.0), RVec::Constant(1, 1.0), 4.0) == doctest::Approx(0.5));
    CHECK(solve_power_equation(RVec::Constant(1, 1.0), RVec::Constant(1, 1.0), 4.0) == 0.0);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int t = 0; t < 50; ++t) {
        RVec e(6), y(6);
        for (int i = 0; i < 6; ++i) e[i] = u(rng), y[i] = u(rng);
        const double p = 0.1 + u(rng);
        const double lam = solve_power_equation(e, y, p);
        const double val = (y.array() / (e.array() + lam).square()).sum();
        if (lam > 0) CHECK(std::abs(val - p) <= 1e-8 * p);
        else CHECK(val <= p);
    }
    // indefinite spectrum: the root sits above -min eigenvalue
    RVec e(2), y(2);
    e << -1.0, 2.0;
    y << 1.0, 1.0;
    const double lam = solve_power_equation(e, y, 1.0);
    CHECK(lam > 1.0);
    // a silent negative direction cannot be balanced
    y << 0.0, 1.0;
    CHECK_THROWS_AS(solve_power_equation(e, y, 10.0), Error);
}

TEST_CASE("solve_lambda residual") {
    for (std::uint64_t seed = 20; seed < 30; ++seed) {
        SubcarrierProblem sp = random_problem(6, 2, seed, 0.01, 0.0);
        const CMat v = gaussian(6, 2, seed);
        const RVec beta = update_beta(sp, v);
        const CVec xi = update_xi(sp, v, beta);
        const RVec mu = RVec::Zero(1);
        const double lam = solve_lambda(sp, beta, xi, mu);
        const double pw = power_of(sp, beta, xi, Multipliers{lam, mu});
        if (lam > 0) CHECK(std::abs(pw - sp.power) <= 1e-8 * sp.power);
        else CHECK(pw <= sp.power * (1 + 1e-12));
    }
    // a generous budget leaves lambda at zero
    SubcarrierProblem big = random_problem(6, 2, 31, 1e9, 0.0);
    const CMat v = gaussian(6, 2, 31);
    const RVec beta = update_beta(big, v);
    CHECK(solve_lambda(big, beta, update_xi(big, v, beta), RVec::Zero(1)) == 0.0);
}

TEST_CASE("Sherman-Morrison identity") {
    const int n = 6;
    const CMat g = gaussian(n, n, 40);
    const CMat xi = g * g.adjoint() + CMat::Identity(n, n);
    const CVec a = steering_vector(0.2, n, 0.5);
    const double c = 0.5 / std::real(a.dot(xi.inverse() * a));
    const CMat direct = (xi - c * a * a.adjoint()).inverse();
    const CMat xinv = xi.inverse();
    const CMat sm = xinv + c * xinv * a * a.adjoint() * xinv / (1.0 - c * std::real(a.dot(xinv * a)));
    CHECK((direct - sm).norm() < 1e-10 * direct.norm());
}

TEST_CASE("solve_mu meets the gain with lambda fixed") {
    int active = 0;
    for (std::uint64_t seed = 50; seed < 70; ++seed) {
        for (int nt : {2, 6}) {
            SubcarrierProblem sp = random_problem(nt, 1, seed, 1.0, 0.5, 0.4, 4.0);
            const CMat v = gaussian(nt, 1, seed + 7);
            const RVec beta = update_beta(sp, v);
            const CVec xi = update_xi(sp, v, beta);
            const double lam = 0.3;
            const RVec mu0 = RVec::Zero(1);
            const double g0 = beampattern_gain(update_v(sp, beta, xi, Multipliers{lam, mu0}), sp.focal[0], sp.n_c);
            const double mu = solve_mu(sp, beta, xi, lam, mu0, 0);
            if (g0 >= sp.gain_req) {
                CHECK(mu == 0.0);
                continue;
            }
            ++active;
            CHECK(mu > 0.0);
            RVec m(1);
            m[0] = mu;
            const double g = beampattern_gain(update_v(sp, beta, xi, Multipliers{lam, m}), sp.focal[0], sp.n_c);
            CHECK(std::abs(g - sp.gain_req) <= 1e-6 * sp.gain_req);
        }
    }
    CHECK(active > 0);
}

TEST_CASE("joint multipliers satisfy KKT") {
    for (std::uint64_t seed = 80; seed < 100; ++seed) {
        SubcarrierProblem sp = random_problem(8, 2, seed, 1.0, 0.6);
        const CMat v = gaussian(8, 2, seed + 3);
        const RVec beta = update_beta(sp, v);
        const CVec xi = update_xi(sp, v, beta);
        const VStep st = solve_v_step(sp, beta, xi, Multipliers{});
        const double pw = st.v.squaredNorm();
        const double g = beampattern_gain(st.v, sp.focal[0], sp.n_c);
        CHECK(pw <= sp.power * (1 + 1e-6));
        CHECK(g >= sp.gain_req * (1 - 1e-6));
        CHECK(st.mult.lambda >= 0.0);
        CHECK(st.mult.mu[0] >= 0.0);
        if (!st.null_completed) {
            CHECK(st.mult.lambda * (sp.power - pw) <= 1e-6 * sp.power);
            CHECK(st.mult.mu[0] * (g - sp.gain_req) <= 1e-6 * sp.gain_req * (1 + st.mult.mu[0]));
        }
        // the surrogate at the step beats random feasible points
        const double f = reformulated_objective(sp, st.v, beta, xi);
        std::mt19937_64 rng(seed);
        for (int t = 0; t < 200; ++t) {
            CMat w = gaussian(8, 2, seed * 1000 + t);
            w *= std::sqrt(sp.power) / w.norm();
            if (beampattern_gain(w, sp.focal[0], sp.n_c) < sp.gain_req) continue;
            CHECK(reformulated_objective(sp, w, beta, xi) <= f + 1e-9 * (1 + std::abs(f)));
        }
    }
}

TEST_CASE("optimize_subcarrier invariants") {
    for (std::uint64_t seed = 200; seed < 210; ++seed) {
        SubcarrierProblem sp = random_problem(8, 2, seed, 1.0, 0.4);
        TxOptions opt;
        opt.max_iter = 200;
        opt.tol = 1e-12;
        const TxSolution s = optimize_subcarrier(sp, opt);
        const auto& tr = s.trace[0];
        for (size_t i = 1; i < tr.size(); ++i) CHECK(tr[i] >= tr[i - 1] - 1e-9);
        const CMat& v = s.v[0];
        CHECK(v.squaredNorm() <= sp.power * (1 + 1e-6));
        CHECK(beampattern_gain(v, sp.focal[0], sp.n_c) >= sp.gain_req * (1 - 1e-6));
        CHECK(s.safeguard_hits == 0);
        // fixed point: one more round leaves the auxiliaries alone
        const RVec beta = update_beta(sp, v);
        const CVec xi = update_xi(sp, v, beta);
        CHECK((beta - s.beta[0]).norm() <= 1e-6 * (1 + beta.norm()));
        CHECK((xi - s.xi[0]).norm() <= 1e-6 * (1 + xi.norm()));
    }
}

TEST_CASE("no sensing requirement keeps mu at zero") {
    SubcarrierProblem sp = random_problem(6, 2, 300, 1.0, 0.0);
    sp.gain_req = 0.0;
    const TxSolution s = optimize_subcarrier(sp, TxOptions{});
    CHECK(s.mult[0].mu.cwiseAbs().maxCoeff() == 0.0);
    const auto& tr = s.trace[0];
    for (size_t i = 1; i < tr.size(); ++i) CHECK(tr[i] >= tr[i - 1] - 1e-9);
}

TEST_CASE("sensing-only mode reaches the maximal gain") {
    SubcarrierProblem sp = random_problem(8, 2, 301, 2.0, 0.9);
    TxOptions opt;
    opt.sensing_only = true;
    const TxSolution s = optimize_subcarrier(sp, opt);
    const double g = beampattern_gain(s.v[0], sp.focal[0], sp.n_c);
    CHECK(g == doctest::Approx(sp.power * 8 / sp.n_c).epsilon(1e-10));
    CHECK(g == doctest::Approx(max_sensing_gain(sp)).epsilon(1e-10));
}

TEST_CASE("small problems beat zero forcing") {
    int wins = 0;
    for (std::uint64_t seed = 400; seed < 410; ++seed) {
        SubcarrierProblem sp = random_problem(4, 2, seed, 1.0, 0.3);
        const TxSolution s = optimize_subcarrier(sp, TxOptions{});
        const double zf = oracle::zf_baseline_rate(sp.h, sp.noise, sp.focal[0], sp.n_c, sp.power, sp.gain_req);
        if (sum_rate(sp, s.v[0]) >= zf - 1e-9) ++wins;
    }
    CHECK(wins >= 9);
}

TEST_CASE("scaling channels and noise together keeps the SINRs") {
    SubcarrierProblem sp = random_problem(6, 2, 500, 1.0, 0.3);
    const TxSolution a = optimize_subcarrier(sp, TxOptions{});
    SubcarrierProblem sc = sp;
    sc.h *= 3.0;
    sc.noise *= 9.0;
    const TxSolution b = optimize_subcarrier(sc, TxOptions{});
    CHECK(sum_rate(sp, a.v[0]) == doctest::Approx(sum_rate(sc, b.v[0])).epsilon(1e-6));
}

TEST_CASE("infeasible requirement is reported") {
    SubcarrierProblem sp = random_problem(4, 2, 600, 1.0, 1.5);
    try {
        optimize_subcarrier(sp, TxOptions{});
        FAIL("expected throw");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::Infeasible);
        CHECK(std::string(e.what()).find("achievable") != std::string::npos);
    }
}

TEST_CASE("optimize over a channel set") {
    SystemConfig cfg = small_cfg(8, 4, 8, 8);
    UserChannelSpec us;
    us.count = 2;
    const CommChannelSet ch = gen_channels(cfg, us);
    CHECK(ch.subcarriers() == 8);
    CHECK(ch.users() == 2);
    CHECK(gen_channels(cfg, us).h[3] == ch.h[3]);
    const TxSolution s = optimize(ch, cfg, {0.3});
    REQUIRE(s.v.size() == 8);
    for (size_t i = 1; i < s.total_trace.size(); ++i) CHECK(s.total_trace[i] >= s.total_trace[i - 1] - 1e-9);
    for (int n = 0; n < 8; ++n) {
        CHECK(s.v[n].squaredNorm() <= cfg.power_budget / 8 * (1 + 1e-6));
        CHECK(beampattern_gain(s, 0.3, n, cfg) >= cfg.sensing_gain_req / 8 * (1 - 1e-6));
        CHECK(user_sinr(ch, s, 0, n, cfg) > 0.0);
    }
    SystemConfig bad = cfg;
    bad.sensing_gain_req = 2.0 * cfg.n_tx * cfg.power_budget;
    CHECK_THROWS_AS(optimize(ch, bad, {0.3}), Error);
}

TEST_CASE("two focal angles") {
    SystemConfig cfg = small_cfg(4, 4, 8, 8);
    SystemConfig raw = cfg;
    raw.sensing_gain_req = 0.15 * cfg.n_tx * cfg.power_budget / cfg.n_subcarriers;
    cfg = derive_config(raw);
    UserChannelSpec us;
    us.count = 2;
    const CommChannelSet ch = gen_channels(cfg, us);
    const TxSolution s = optimize(ch, cfg, {-0.4, 0.5});
    for (int n = 0; n < 4; ++n)
        for (double phi : {-0.4, 0.5}) CHECK(beampattern_gain(s, phi, n, cfg) >= cfg.sensing_gain_req / 4 * (1 - 1e-6));
    for (size_t i = 1; i < s.total_trace.size(); ++i) CHECK(s.total_trace[i] >= s.total_trace[i - 1] - 1e-9);
}
