#include <doctest.h>

#include <cmath>

#include "common.hpp"
#include "isac/rx_beamformer.hpp"

using namespace isac;
using namespace testing_support;

namespace {

TxSolution tx_of(std::vector<CMat> v) {
    TxSolution t;
    t.v = std::move(v);
    return t;
}

}  // namespace

TEST_CASE("build_B structure") {
    const SystemConfig cfg = small_cfg(4, 4, 6, 5);
    const double phi = 0.35;
    const CVec at = steering_vector(phi, cfg.n_tx, cfg.antenna_sep);
    const CVec ar = steering_vector(phi, cfg.n_rx, cfg.antenna_sep);
    std::vector<CMat> v(4, CMat(at / std::sqrt(double(cfg.n_tx))));
    const CMat b = build_B(tx_of(v), {phi}, RVec(), cfg);
    // a_T^H v = sqrt(N_T) on each of 4 subcarriers
    const CMat expect = 4.0 * cfg.n_tx * ar * ar.adjoint();
    CHECK((b - expect).norm() < 1e-12 * expect.norm());
    Eigen::SelfAdjointEigenSolver<CMat> es(b);
    CHECK(es.eigenvalues()[cfg.n_rx - 2] < 1e-9 * es.eigenvalues()[cfg.n_rx - 1]);

    const CMat zero = build_B(tx_of(std::vector<CMat>(4, CMat::Zero(6, 2))), {phi, -0.2}, RVec(), cfg);
    CHECK(zero.norm() == 0.0);

    std::vector<CMat> rnd;
    for (int n = 0; n < 4; ++n) rnd.push_back(gaussian(6, 2, 10 + n));
    RVec g(2);
    g << 0.5, 2.0;
    const CMat br = build_B(tx_of(rnd), {0.1, -0.6}, g, cfg);
    CHECK((br - br.adjoint()).norm() < 1e-12 * br.norm());
    const CMat sum = 0.5 * focal_term(tx_of(rnd), 0.1, cfg) + 2.0 * focal_term(tx_of(rnd), -0.6, cfg);
    CHECK((br - sum).norm() < 1e-12 * br.norm());
    CHECK(Eigen::SelfAdjointEigenSolver<CMat>(br).eigenvalues().minCoeff() > -1e-9 * br.norm());

    CHECK_THROWS_AS(build_B(tx_of(rnd), {0.1}, g, cfg), Error);
    CHECK_THROWS_AS(build_B(tx_of({gaussian(3, 2, 1)}), {0.1}, RVec(), cfg), Error);
}

TEST_CASE("principal_eigvec examples") {
    CMat d = CMat::Zero(2, 2);
    d(0, 0) = 2.0;
    d(1, 1) = 1.0;
    const RxSolution s = principal_eigvec(d);
    CHECK(std::abs(std::abs(s.u[0]) - 1.0) < 1e-12);
    CHECK(std::abs(s.u[1]) < 1e-12);
    CHECK(s.eigenvalue == doctest::Approx(2.0));

    const CVec b = gaussian(5, 1, 3).col(0);
    const RxSolution r1 = principal_eigvec(b * b.adjoint());
    CHECK(std::abs(std::abs(r1.u.dot(b)) - b.norm()) < 1e-10 * b.norm());

    const RxSolution z = principal_eigvec(CMat::Zero(3, 3));
    CHECK(z.degenerate);
    CHECK(z.u.norm() == doctest::Approx(1.0));
    CHECK_THROWS_AS(principal_eigvec(CMat::Zero(2, 3)), Error);
}

TEST_CASE("principal_eigvec maximizes the Rayleigh quotient") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const CMat g = gaussian(8, 8, seed);
        const CMat bm = g * g.adjoint();
        const RxSolution s = principal_eigvec(bm);
        CHECK(std::abs(s.u.norm() - 1.0) < 1e-12);
        CHECK((bm * s.u - s.eigenvalue * s.u).norm() <= 1e-8 * bm.norm());
        const double q = std::real(s.u.dot(bm * s.u));
        double best = 0.0;
        for (int t = 0; t < 10000; ++t) {
            CVec w = gaussian(8, 1, seed * 100000 + t).col(0);
            w.normalize();
            best = std::max(best, std::real(w.dot(bm * w)));
        }
        CHECK(q >= best);
        // any phase rotation gives the same quotient
        const CVec ur = s.u * cis(1.1);
        CHECK(std::real(ur.dot(bm * ur)) == doctest::Approx(q).epsilon(1e-12));
    }
}

TEST_CASE("design_rx gain equals the eigenvalue for one angle") {
    const SystemConfig cfg = small_cfg(4, 4, 6, 6);
    std::vector<CMat> v;
    for (int n = 0; n < 4; ++n) v.push_back(gaussian(6, 2, 50 + n));
    const RxSolution s = design_rx(tx_of(v), {0.2}, RVec(), cfg);
    REQUIRE(s.gain.size() == 1);
    CHECK(s.gain[0] == doctest::Approx(s.eigenvalue).epsilon(1e-8));
    const CVec ar = steering_vector(0.2, 6, cfg.antenna_sep);
    CHECK(std::abs(s.u.dot(ar)) == doctest::Approx(ar.norm()).epsilon(1e-10));

    const RxSolution two = design_rx(tx_of(v), {0.2, -0.5}, RVec(), cfg);
    CHECK(two.gain.sum() == doctest::Approx(two.eigenvalue).epsilon(1e-8));
}
