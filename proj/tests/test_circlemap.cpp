#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "qpwalk/circlemap.hpp"
#include "qpwalk/frequency.hpp"
#include "qpwalk/rng.hpp"

using namespace qpwalk;

TEST_CASE("eval basics") {
    CircleMap sin8 = CircleMap::harmonic(4, 0.0, 1.0); // sin(8 pi x)
    CHECK(sin8.eval(1.0 / 16.0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(CircleMap::constant(0.5).eval(0.37) == 0.5);
    CircleMap cosmap = CircleMap::harmonic(1, 1.0, 0.0);
    CHECK(cosmap.eval(1.0 / 3.0) == doctest::Approx(-0.5).epsilon(1e-14));
}

TEST_CASE("1-periodicity at random points") {
    CircleMap f = CircleMap::trig({0.1, 0.3, -0.2, 0.05, 0.4});
    RngStream rng(42, 0);
    for (int i = 0; i < 100; ++i) {
        double x = 10.0 * (rng.next_unit() - 0.5);
        CHECK(std::abs(f.eval(x) - f.eval(x + 1.0)) < 1e-12);
    }
}

TEST_CASE("trig polynomial has 2d+1 coefficients") {
    CircleMap f = CircleMap::harmonic(3, 0.5, 0.5);
    CHECK(f.trig_degree() == 3);
    CHECK(f.trig_coeffs().size() == 7);
    CHECK_THROWS_AS(CircleMap::trig({1.0, 2.0}), Error);
}

TEST_CASE("integrate: trig exact, piecewise by quadrature") {
    CHECK(CircleMap::harmonic(1, 1.0, 0.0).integrate() == 0.0);
    CHECK(CircleMap::constant(0.37).integrate() == 0.37);

    using P = CircleMap::Piece;
    std::vector<P> ps{
        {P::Kind::constant, 0.0, 0.3, 0.0, 0.0},
        {P::Kind::smoothstep, 0.3, 0.5, 0.0, 1.0},
        {P::Kind::constant, 0.5, 0.8, 1.0, 0.0},
        {P::Kind::smoothstep, 0.8, 1.0, 1.0, 0.0},
    };
    CircleMap bumpy = CircleMap::piecewise(ps);
    double direct = bumpy.integrate();
    // shift invariance (quadrature splits move with the map)
    CHECK(std::abs(bumpy.shifted(0.37).integrate() - direct) < 1e-12);
    CHECK(std::abs(bumpy.shifted(-1.73).integrate() - direct) < 1e-12);
    // smoothstep halves are symmetric, so the ramps average to width/2
    CHECK(direct == doctest::Approx(0.3 + 0.1 + 0.1).epsilon(1e-10));
}

TEST_CASE("composite algebra folds trig exactly") {
    CircleMap f = CircleMap::harmonic(1, 0.2, -0.1, 0.5);
    CircleMap g = f.shifted(0.3);
    CHECK(g.is_trig());
    for (double x : {0.0, 0.11, 0.77}) {
        CHECK(g.eval(x) == doctest::Approx(f.eval(x + 0.3)).epsilon(1e-14));
    }
    CircleMap d = f.dilated(3);
    CHECK(d.is_trig());
    CHECK(d.eval(0.21) == doctest::Approx(f.eval(0.63)).epsilon(1e-13));
    CircleMap s = (f + g).scaled(2.0);
    CHECK(s.is_trig());
    CHECK(s.eval(0.4) == doctest::Approx(2.0 * (f.eval(0.4) + g.eval(0.4))).epsilon(1e-13));
}

TEST_CASE("rational-orbit mode annihilation for q > 2d") {
    CircleMap f = CircleMap::trig({0.3, 0.5, -0.7, 0.2, 0.1, -0.05, 0.4});
    const int d = 3;
    for (long q : {2L * d + 1L, 16L, 37L}) {
        double x = 0.2345;
        double avg = 0.0;
        for (long j = 0; j < q; ++j)
            avg += f.eval(x + static_cast<double>(j) / static_cast<double>(q));
        avg /= static_cast<double>(q);
        CHECK(std::abs(avg - 0.3) < 1e-13);
    }
}

TEST_CASE("solve_cohomological on the golden rotation") {
    Frequency golden = Frequency::golden();
    CircleMap h = CircleMap::harmonic(1, 1.0, 0.0);
    CohomSolution sol = solve_cohomological(h, golden, CohomMode::symmetric);
    CHECK(sol.c == 0.0);
    CHECK(sol.residual_sup < 1e-12);

    // re-applying the difference operator reproduces h - c on a grid
    double alpha = golden.value();
    double res = 0.0;
    for (int i = 0; i < 512; ++i) {
        double x = i / 512.0;
        res = std::max(res, std::abs(sol.psi.eval(x + alpha) - sol.psi.eval(x) -
                                     h.eval(x)));
    }
    CHECK(res < 1e-10);
}

TEST_CASE("solve_cohomological trivial and asymmetric modes") {
    Frequency golden = Frequency::golden();
    CohomSolution zero = solve_cohomological(CircleMap::constant(0.0), golden,
                                             CohomMode::symmetric);
    CHECK(zero.c == 0.0);
    CHECK(zero.residual_sup < 1e-15);

    CircleMap h = CircleMap::harmonic(1, 1.0, 0.0, 0.3);
    CohomSolution asym = solve_cohomological(h, golden, CohomMode::asymmetric);
    CHECK(asym.c == doctest::Approx(0.3).epsilon(1e-14));
    CHECK(asym.residual_sup < 1e-12);

    CHECK_THROWS_AS(solve_cohomological(h, golden, CohomMode::symmetric), Error);
}

TEST_CASE("small divisor detection") {
    // alpha surrogate 2/5: mode k=5 gives e^{2 pi i k alpha} = 1
    Frequency f = Frequency::from_quotients({BigInt(2), BigInt(2)});
    CircleMap h = CircleMap::harmonic(5, 1.0, 0.0);
    CHECK_THROWS_AS(solve_cohomological(h, f, CohomMode::symmetric),
                    SmallDivisorError);
}

TEST_CASE("birkhoff_rational_check") {
    BirkhoffCheck c0 = birkhoff_rational_check(CircleMap::constant(0.0), 10, 0.123);
    CHECK(c0.sum_value == doctest::Approx(10.0).epsilon(1e-15));
    CHECK(c0.defect < 1e-12);

    CircleMap v = CircleMap::harmonic(1, 1.0, 0.0);
    BirkhoffCheck c64 = birkhoff_rational_check(v, 64, 0.0);
    CHECK(c64.defect < 1e-12);

    BirkhoffCheck c2 = birkhoff_rational_check(v, 2, 0.0);
    CHECK(c2.defect > 0.1); // q below the interacting mode degrees
}

TEST_CASE("fourier truncation recovers trig coefficients") {
    CircleMap f = CircleMap::harmonic(1, 0.1, 0.0, 0.5);
    CircleMap t = fourier_truncate([&](double x) { return f.eval(x); }, 3);
    const std::vector<double>& c = t.trig_coeffs();
    CHECK(std::abs(c[0] - 0.5) < 1e-12);
    CHECK(std::abs(c[1] - 0.1) < 1e-12);
    for (size_t i = 2; i < c.size(); ++i) CHECK(std::abs(c[i]) < 1e-12);
}

TEST_CASE("JSON round-trip is value-exact for trig polynomials") {
    CircleMap f = CircleMap::trig({0.1, 0.3, -0.2, 1e-17, 0.4});
    CircleMap g = CircleMap::from_json(f.to_json());
    REQUIRE(g.is_trig());
    const auto& a = f.trig_coeffs();
    const auto& b = g.trig_coeffs();
    REQUIRE(a.size() == b.size());
    for (size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
}

TEST_CASE("JSON round-trip composite and piecewise") {
    using P = CircleMap::Piece;
    std::vector<P> ps{
        {P::Kind::sine8, 0.0, 0.5, 1.0, 0.0},
        {P::Kind::smoothstep, 0.5, 1.0, 0.0, 0.0},
    };
    CircleMap f = CircleMap::piecewise(ps).dilated(7).scaled(0.25) +
                  CircleMap::harmonic(2, 0.3, 0.0);
    CircleMap g = CircleMap::from_json(f.to_json());
    for (double x : {0.01, 0.3, 0.777, 0.999})
        CHECK(f.eval(x) == g.eval(x));

    CircleMap lg = CircleMap::logistic_of(CircleMap::harmonic(1, -0.3, 0.0));
    CircleMap lg2 = CircleMap::from_json(lg.to_json());
    CHECK(lg.eval(0.2) == lg2.eval(0.2));
}

TEST_CASE("quadrature budget error on a degenerate integrand") {
    // a needle the adaptive rule cannot resolve to 1e-12 within budget
    auto needle = [](double x) {
        double d = x - 0.5;
        return 1.0 / (1e-30 + d * d);
    };
    CHECK_THROWS_AS(integrate_fn(needle, {}, 1e-12), QuadratureError);
}
