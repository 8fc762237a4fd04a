#include "crfem/nfun.hpp"

#include "property_suites.hpp"
#include "support.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <iostream>

using namespace crfem;
using Catch::Approx;

TEST_CASE("phi closed form") {
    CHECK(phi(PDelta(2.0, 0.7), 2.0) == Approx(2.0).epsilon(1e-14)); // p = 2: quadratic regardless of delta
    CHECK(phi(PDelta(3.0, 0.0), 1.0) == Approx(1.0 / 3.0).epsilon(1e-14));
    CHECK(phi(PDelta(1.5, 1e-4), 0.0) == 0.0);

    // frozen from the quadrature oracle of the defining integral
    const double frozen = 2.3252648070549673;
    CHECK(phi(PDelta(1.5, 1e-4), 2.3) == Approx(frozen).epsilon(1e-10));
    CHECK(oracle::phi_by_quadrature(PDelta(1.5, 1e-4), 2.3) == Approx(frozen).epsilon(1e-10));

    CHECK_THROWS_AS(phi(PDelta(1.5, 1e-4), -1.0), std::domain_error);
}

TEST_CASE("phi is strictly increasing") {
    for (double p : {1.25, 2.0, 3.5})
        for (double delta : {0.0, 1e-4, 0.3}) {
            const PDelta pd(p, delta);
            double prev = 0.0;
            for (double t = 0.125; t <= 8.0; t += 0.125) {
                const double cur = phi(pd, t);
                CHECK(cur > prev);
                prev = cur;
            }
        }
}

TEST_CASE("phi_prime") {
    CHECK(phi_prime(PDelta(2.0, 0.0), 5.0) == Approx(5.0));
    CHECK(phi_prime(PDelta(4.0, 0.0), 2.0) == Approx(8.0));
    CHECK(phi_prime(PDelta(1.25, 0.0), 0.0) == 0.0); // continuous extension
    CHECK_THROWS_AS(phi_prime(PDelta(2.0, 0.0), -0.1), std::domain_error);
}

TEST_CASE("phi_prime_inv") {
    CHECK(phi_prime_inv(PDelta(2.0, 0.0), 3.0) == Approx(3.0));
    CHECK(phi_prime_inv(PDelta(3.0, 0.0), 4.0) == Approx(2.0));
    const double t = phi_prime_inv(PDelta(1.5, 1e-4), 0.37);
    CHECK(std::abs(phi_prime(PDelta(1.5, 1e-4), t) - 0.37) <= 1e-12);

    oracle::Rng rng(21);
    for (int i = 0; i < 2000; ++i) {
        const PDelta pd(rng.uniform(1.05, 4.5), rng.uniform(0.0, 0.5));
        const double s = rng.uniform(0.0, 50.0);
        const double inv = phi_prime_inv(pd, s);
        CHECK(std::abs(phi_prime(pd, inv) - s) <= 1e-12 * (1.0 + s));
    }
}

TEST_CASE("phi_conj") {
    CHECK(phi_conj(PDelta(2.0, 0.0), 1.0) == Approx(0.5));
    CHECK(phi_conj(PDelta(3.0, 0.0), 1.0) == Approx(2.0 / 3.0)); // s^{p'}/p' with p' = 3/2
    // frozen from the grid-maximization oracle
    CHECK(phi_conj(PDelta(2.5, 1e-4), 1.7) == Approx(1.4528335092863319).epsilon(1e-6));
    CHECK(oracle::conj_by_grid(PDelta(2.5, 1e-4), 1.7) == Approx(1.4528335092863319).epsilon(1e-6));
    CHECK_THROWS_AS(phi_conj(PDelta(2.0, 0.0), -1.0), std::domain_error);
}

TEST_CASE("phi_shifted") {
    CHECK(phi_shifted(PDelta(2.0, 0.0), 3.0, 2.0) == Approx(2.0)); // p = 2: shifts change nothing
    for (double t : {0.3, 1.0, 4.2})
        CHECK(phi_shifted(PDelta(2.7, 0.05), 0.0, t) == Approx(phi(PDelta(2.7, 0.05), t)));
    // (p=3, delta=0, a=1, t=1): defining integral int_0^1 (1+s)s ds = 5/6
    CHECK(phi_shifted(PDelta(3.0, 0.0), 1.0, 1.0) == Approx(5.0 / 6.0).epsilon(1e-10));
    CHECK(oracle::phi_shifted_by_quadrature(PDelta(3.0, 0.0), 1.0, 1.0) == Approx(5.0 / 6.0).epsilon(1e-10));
    // quadrature oracle at a generic point
    const PDelta pd(1.5, 1e-4);
    CHECK(phi_shifted(pd, 0.7, 2.3) ==
          Approx(oracle::phi_shifted_by_quadrature(pd, 0.7, 2.3)).epsilon(1e-10));
    CHECK_THROWS_AS(phi_shifted(pd, -1.0, 1.0), std::domain_error);
}

TEST_CASE("phi_shifted_conj") {
    CHECK(phi_shifted_conj(PDelta(2.0, 0.0), 5.0, 1.0) == Approx(0.5));
    for (double s : {0.3, 1.0, 4.2})
        CHECK(phi_shifted_conj(PDelta(3.0, 1e-4), 0.0, s) == Approx(phi_conj(PDelta(3.0, 1e-4), s)));
    // frozen from the grid oracle of sup(st - phi_a(t))
    CHECK(phi_shifted_conj(PDelta(3.0, 1e-4), 0.5, 2.0) == Approx(1.4642063990464099).epsilon(1e-6));
    CHECK(oracle::conj_shifted_by_grid(PDelta(3.0, 1e-4), 0.5, 2.0) ==
          Approx(1.4642063990464099).epsilon(1e-6));
}

TEST_CASE("op_a") {
    const Vec2 r = op_a(PDelta(2.0, 0.31), {3.0, -4.0});
    CHECK(r.x == Approx(3.0));
    CHECK(r.y == Approx(-4.0));
    const Vec2 q = op_a(PDelta(3.0, 0.0), {1.0, 1.0});
    CHECK(q.x == Approx(std::sqrt(2.0)));
    CHECK(q.y == Approx(std::sqrt(2.0)));
    const Vec2 z = op_a(PDelta(1.25, 0.0), {0.0, 0.0});
    CHECK(z.x == 0.0);
    CHECK(z.y == 0.0);
}

TEST_CASE("op_a_inv") {
    const Vec2 r = op_a_inv(PDelta(2.0, 0.0), {7.0, 0.0});
    CHECK(r.x == Approx(7.0));
    const Vec2 q = op_a_inv(PDelta(3.0, 0.0), {4.0, 0.0});
    CHECK(q.x == Approx(2.0));

    const auto round = suites::roundtrip_a();
    INFO("max roundtrip error " << round.observed);
    CHECK(round.pass);
}

TEST_CASE("op_da") {
    const Mat2 id = op_da(PDelta(2.0, 0.0), {0.3, -0.9});
    CHECK(id.a11 == Approx(1.0));
    CHECK(id.a22 == Approx(1.0));
    CHECK(id.a12 == Approx(0.0).margin(1e-15));

    const Mat2 m = op_da(PDelta(4.0, 0.0), {1.0, 0.0});
    CHECK(m.a11 == Approx(3.0));
    CHECK(m.a22 == Approx(1.0));
    CHECK(m.a12 == Approx(0.0).margin(1e-15));

    CHECK_THROWS_AS(op_da(PDelta(1.5, 0.0), {0.0, 0.0}), std::domain_error);
    const Mat2 at0 = op_da(PDelta(3.0, 0.0), {0.0, 0.0});
    CHECK(at0.a11 == 0.0);

    const auto fd = suites::da_finite_difference();
    INFO("max finite-difference deviation " << fd.observed);
    CHECK(fd.pass);
}

TEST_CASE("op_da eigenvalue bounds depend only on p") {
    oracle::Rng rng(22);
    for (double p : suites::sweep_p())
        for (double delta : suites::sweep_delta()) {
            const PDelta pd(p, delta);
            for (int i = 0; i < 500; ++i) {
                Vec2 a = rng.vec_in_ball(10.0);
                if (a.norm() < 1e-6) a = {0.3, 0.1};
                const Mat2 m = op_da(pd, a);
                const double scale = std::pow(delta + a.norm(), p - 2.0);
                // eigenvalues of the rank-one-plus-identity structure
                const double lam1 = scale;
                const double lam2 = scale + (p - 2.0) * std::pow(delta + a.norm(), p - 3.0) * a.norm();
                const double tr = m.a11 + m.a22;
                const double det = m.a11 * m.a22 - m.a12 * m.a21;
                CHECK(tr == Approx(lam1 + lam2).epsilon(1e-10));
                CHECK(det == Approx(lam1 * lam2).epsilon(1e-10));
                CHECK(std::min(lam1, lam2) > 0.0);
                // C_0, C_1 with constants depending only on p
                const double c0 = std::min(1.0, p - 1.0), c1 = std::max(1.0, p - 1.0);
                CHECK(std::min(lam1, lam2) >= 0.49 * c0 * scale);
                CHECK(std::max(lam1, lam2) <= 2.01 * c1 * scale);
            }
        }
}

TEST_CASE("map_f and map_f_star") {
    for (double delta : {0.0, 0.2}) {
        const PDelta pd(2.0, delta);
        const Vec2 a{1.2, -0.4};
        CHECK((map_f(pd, a) - a).norm() == Approx(0.0).margin(1e-15));
        CHECK((map_f_star(pd, a) - a).norm() <= 1e-12 * a.norm() + 1e-15);
    }
    const Vec2 f = map_f(PDelta(4.0, 0.0), {2.0, 0.0});
    CHECK(f.x == Approx(4.0));
    const Vec2 fs = map_f_star(PDelta(4.0, 0.0), {8.0, 0.0});
    CHECK(fs.x == Approx(4.0));
}

TEST_CASE("Fenchel-Young identity over the sweep") {
    const auto fy = suites::fenchel_young();
    INFO("max relative residual " << fy.observed);
    CHECK(fy.pass);
}

TEST_CASE("epsilon-Young constants are finite and stable") {
    for (double p : suites::sweep_p())
        for (double delta : suites::sweep_delta())
            for (double eps : {1e-2, 1e-1, 1.0}) {
                const PDelta pd(p, delta);
                const double c = suites::young_constant(pd, eps);
                INFO("p=" << p << " delta=" << delta << " eps=" << eps << " c_eps=" << c);
                CHECK(std::isfinite(c));
                // c_eps grows like eps^(1 - p') (exact for delta = 0:
                // sup_t (ts - eps phi(t)) = eps^(1-p') (1 - 1/p) p'^(p'-1) phi*(s)),
                // so the flat cap only applies where that stays below it
                const double growth = std::pow(eps, 1.0 - pd.p_conj());
                if (growth < 1e5)
                    CHECK(c < 1e6);
                else
                    CHECK(c < 1e2 * growth);
            }
}

TEST_CASE("equivalence suite (natural distance expressions)") {
    const auto eq = suites::equivalence();
    std::cout << "[nfun] equivalence: max pairwise ratio " << eq.max_ratio << ", conjugate-pair ratio "
              << eq.max_ratio_conj << "\n";
    CHECK(eq.monotone);
    CHECK(eq.max_ratio <= 200.0);
    CHECK(eq.max_ratio_conj <= 200.0);
}

TEST_CASE("change of shift with eps = 0.1") {
    for (double p : suites::sweep_p())
        for (double delta : suites::sweep_delta()) {
            const auto sc = suites::shift_change_constant(PDelta(p, delta), 0.1);
            INFO("p=" << p << " delta=" << delta << " c_direct=" << sc.c_direct
                      << " c_conj=" << sc.c_conj);
            CHECK(std::isfinite(sc.c_direct));
            CHECK(sc.c_direct < 1e6);
            CHECK(std::isfinite(sc.c_conj));
            CHECK(sc.c_conj < 1e6);
        }
}

TEST_CASE("PDelta invariants") {
    const PDelta pd(1.5, 0.1);
    CHECK(std::abs(1.0 / pd.p + 1.0 / pd.p_conj() - 1.0) <= 1e-14);
    CHECK_THROWS_AS(PDelta(1.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(PDelta(2.0, -0.1), std::invalid_argument);
}
