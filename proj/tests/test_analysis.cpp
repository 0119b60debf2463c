#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "qpwalk/analysis.hpp"
#include "qpwalk/constructions.hpp"

using namespace qpwalk;

TEST_CASE("moments closed forms") {
    Environment fair = Environment::periodic({0.5});
    Moments m2 = moments(evolve_exact(fair, 2, -4, 4, 0));
    CHECK(m2.mean == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(m2.variance == doctest::Approx(2.0).epsilon(1e-14));

    Moments point = moments(evolve_exact(fair, 0, -4, 14, 10), 1e-12);
    CHECK(point.mean == 10.0);
    CHECK(point.variance == 0.0);

    Environment p23 = Environment::periodic({2.0 / 3.0});
    Moments m = moments(evolve_exact(p23, 1000, -1001, 1001, 0));
    CHECK(std::abs(m.mean - 1000.0 / 3.0) < 1e-9);
    CHECK(std::abs(m.variance - 1000.0 * 8.0 / 9.0) < 1e-6);

    // leakage budget enforced
    LatticeDistribution tight = evolve_exact(fair, 100, -5, 5, 0);
    CHECK_THROWS_AS(moments(tight, 1e-9), Error);
}

TEST_CASE("ks_phi basics") {
    // discretized normal with matching (mu, sigma): below grid resolution
    double sigma = 100.0;
    LatticeDistribution d;
    d.lo = -800;
    d.hi = 800;
    d.mass.resize(1601);
    for (long long s = -800; s <= 800; ++s)
        d.mass[static_cast<size_t>(s + 800)] =
            normal_cdf((s + 0.5) / sigma) - normal_cdf((s - 0.5) / sigma);
    CHECK(ks_phi(d, 0.0, sigma) < 0.01);

    LatticeDistribution point;
    point.lo = point.hi = 3;
    point.mass = {1.0};
    CHECK(ks_phi(point, 0.0, 1.0) >= 0.5);

    // simple walk at T = 10^4 vs (0, sqrt(T))
    Environment fair = Environment::periodic({0.5});
    LatticeDistribution w = evolve_exact(fair, 10000, -10001, 10001, 0);
    CHECK(ks_phi(w, 0.0, 100.0) < 0.01);
}

TEST_CASE("ks_phi shift consistency") {
    Environment fair = Environment::periodic({0.5});
    LatticeDistribution d = evolve_exact(fair, 500, -501, 501, 0);
    double base = ks_phi(d, 3.0, 30.0);
    LatticeDistribution shifted = d;
    shifted.lo += 17;
    shifted.hi += 17;
    CHECK(ks_phi(shifted, 20.0, 30.0) == doctest::Approx(base).epsilon(1e-14));
}

TEST_CASE("localization verdict on the C1 trap") {
    Environment trap = Environment::procedural({2.0 / 3.0}, 0, 2.0 / 3.0, 1.0 / 3.0);
    ScenarioVerdict v = scenario_verdict("localization", trap, 64);
    CHECK(v.pass);
    CHECK(v.T == 8); // ceil(e^2)
    CHECK(v.details["tail_prob"].get<double>() < 1.0 / 64.0);

    ScenarioConfig mc;
    mc.engine = "mc";
    mc.n_traj = 20000;
    ScenarioVerdict vmc = scenario_verdict("localization", trap, 64, mc);
    CHECK(vmc.pass);
}

TEST_CASE("one-sided verdict on the period-2 environment") {
    Environment env = Environment::periodic({0.7, 0.45});
    ScenarioConfig cfg;
    cfg.epsilon = 0.25;
    cfg.T_override = 2000; // desk-size for the unit suite
    ScenarioVerdict v = scenario_verdict("one-sided", env, 2000, cfg);
    CHECK(v.details["ks"].get<double>() < 0.08);
    CHECK(v.details["renewal"]["p_right"].get<double>() ==
          doctest::Approx(0.65618).epsilon(1e-3));
}

TEST_CASE("reflection covariance of the one-sided prediction") {
    Environment env = Environment::periodic({0.7, 0.45});
    Environment refl = env.reflected();
    RenewalStats a = renewal_stats(env);
    RenewalStats b = renewal_stats(refl);
    CHECK(a.predict_mu(1000.0) == doctest::Approx(-b.predict_mu(1000.0)).epsilon(1e-9));
    CHECK(a.predict_sigma(1000.0) ==
          doctest::Approx(b.predict_sigma(1000.0)).epsilon(1e-9));

    LatticeDistribution de = evolve_exact(env, 400, -401, 401, 0);
    LatticeDistribution dr = evolve_exact(refl, 400, -401, 401, 0);
    double ka = ks_phi(de, a.predict_mu(400.0), a.predict_sigma(400.0));
    double kb = ks_phi(dr, b.predict_mu(400.0), b.predict_sigma(400.0));
    CHECK(ka == doctest::Approx(kb).epsilon(1e-10));
}

TEST_CASE("u_and_drift closed forms") {
    DriftPoint u23 = u_and_drift(CircleMap::constant(2.0 / 3.0), Frequency::golden(),
                                 0.2, 10000.0);
    CHECK(u23.u == doctest::Approx(3.0).epsilon(1e-9));
    CHECK(std::abs(static_cast<double>(u23.b_t) - 10000.0 / 3.0) <= 1.0);

    DriftPoint u34 = u_and_drift(CircleMap::constant(0.75), Frequency::golden(),
                                 0.0, 1000.0);
    CHECK(u34.u == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(std::abs(static_cast<double>(u34.b_t) - 500.0) <= 1.0);

    // constant-environment identity u = 1/(p - q)
    for (double p : {0.6, 2.0 / 3.0, 0.8}) {
        DriftPoint u = u_and_drift(CircleMap::constant(p), Frequency::silver(),
                                   0.0, 10.0);
        CHECK(u.u == doctest::Approx(1.0 / (2.0 * p - 1.0)).epsilon(1e-9));
    }

    CHECK_THROWS_AS(u_and_drift(CircleMap::constant(1.0 / 3.0), Frequency::golden(),
                                0.0, 100.0),
                    Error);
}

TEST_CASE("drift recursion agrees with the direct series along the orbit") {
    CircleMap p = CircleMap::logistic_of(CircleMap::harmonic(1, 0.2, 0.0, -0.3));
    Frequency golden = Frequency::golden();
    double alpha = golden.value();
    DriftPoint base = u_and_drift(p, golden, 0.1, 1.0);
    double x25 = 0.1 + 25.0 * alpha;
    DriftPoint direct = u_and_drift(p, golden, x25 - std::floor(x25), 1.0);
    // recursion G(y) = lam(y)(1 + G(y - alpha)) iterated from x
    double g = 0.5 * (base.u - 1.0);
    double y = 0.1;
    for (int k = 1; k <= 25; ++k) {
        y += alpha;
        if (y >= 1.0) y -= 1.0;
        double pv = p.eval(y);
        g = (1.0 - pv) / pv * (1.0 + g);
    }
    CHECK(1.0 + 2.0 * g == doctest::Approx(direct.u).epsilon(1e-8));
}

TEST_CASE("drift vs Monte Carlo displacement") {
    CircleMap p = CircleMap::harmonic(1, 0.05, 0.0, 2.0 / 3.0);
    Frequency golden = Frequency::golden();
    DriftPoint dp = u_and_drift(p, golden, 0.0, 2000.0);
    Environment env = Environment::quasiperiodic(p, golden, BigRat(0));
    SimulateResult mc = simulate(env, 2000, 4000, 99);
    double se = std::sqrt(mc.variance / 4000.0);
    CHECK(std::abs(mc.mean - static_cast<double>(dp.b_t)) < 3.0 * se + 8.0);
}

TEST_CASE("stationary density closed forms and residuals") {
    StationaryDensity s23 = stationary_density(CircleMap::constant(2.0 / 3.0),
                                               Frequency::golden(), 64);
    for (double r : s23.rho) CHECK(r == doctest::Approx(3.0).epsilon(1e-9));
    CHECK(s23.eqim_residual < 1e-8);
    CHECK(s23.flux_defect < 1e-8);

    StationaryDensity s34 = stationary_density(CircleMap::constant(0.75),
                                               Frequency::golden(), 64);
    for (double r : s34.rho) CHECK(r == doctest::Approx(2.0).epsilon(1e-9));

    CircleMap logi = CircleMap::logistic_of(CircleMap::harmonic(1, -0.2, 0.0, -0.3));
    StationaryDensity sd = stationary_density(logi, Frequency::golden(), 512, 1e-10);
    CHECK(sd.eqim_residual < 1e-9);
    CHECK(sd.flux_defect < 1e-9);

    // u(x) = rho(x) for constant environments (both equal 1/speed)
    DriftPoint u = u_and_drift(CircleMap::constant(2.0 / 3.0), Frequency::golden(),
                               0.0, 1.0);
    CHECK(u.u == doctest::Approx(s23.rho[0]).epsilon(1e-9));
}

TEST_CASE("stationary density rejects near-symmetric environments") {
    CHECK_THROWS_AS(stationary_density(CircleMap::constant(0.5), Frequency::golden(), 32),
                    Error);
}

TEST_CASE("tail certification rejects wild oscillation") {
    // mean drift 0.01 but the 64-step products swing far above 1
    CircleMap p = CircleMap::logistic_of(CircleMap::harmonic(1, 5.0, 0.0, -0.01));
    CHECK_THROWS_AS(u_and_drift(p, Frequency::golden(), 0.0, 100.0), Error);
}

TEST_CASE("misc error paths") {
    Environment fair = Environment::periodic({0.5});
    CHECK_THROWS_AS(evolve_exact(fair, 10, 1, 5, 0), Error); // start outside
    CHECK_THROWS_AS(renewal_stats(Environment::tabulated({0.5, 0.6}, 0)), Error);
    ScenarioConfig cfg; // no witnesses supplied
    CHECK_THROWS_AS(scenario_verdict("two-sided", fair, 100, cfg), Error);
    CHECK_THROWS_AS(scenario_verdict("bogus", fair, 100, cfg), Error);
}

TEST_CASE("grid evaluations: serial == openmp bitwise") {
    CircleMap p = CircleMap::logistic_of(CircleMap::harmonic(1, 0.2, 0.0, -0.4));
    Frequency golden = Frequency::golden();
    DriftProfile a = drift_profile(p, golden, 64, 500.0, 1e-9, Exec::serial);
    DriftProfile b = drift_profile(p, golden, 64, 500.0, 1e-9, Exec::openmp);
    for (size_t i = 0; i < a.x.size(); ++i) {
        CHECK(a.u[i] == b.u[i]);
        CHECK(a.b_t[i] == b.b_t[i]);
    }
    StationaryDensity sa = stationary_density(p, golden, 128, 1e-9, Exec::serial);
    StationaryDensity sb = stationary_density(p, golden, 128, 1e-9, Exec::openmp);
    for (size_t i = 0; i < sa.rho.size(); ++i) CHECK(sa.rho[i] == sb.rho[i]);
    CHECK(sa.eqim_residual == sb.eqim_residual);
}
