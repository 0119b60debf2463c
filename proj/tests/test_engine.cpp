#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>

#include "qpwalk/analysis.hpp"
#include "qpwalk/constructions.hpp"
#include "qpwalk/engine.hpp"
#include "qpwalk/rng.hpp"

using namespace qpwalk;

namespace {

Environment random_elliptic(uint64_t seed, long long half_width) {
    RngStream rng(seed, 0);
    std::vector<double> vals(static_cast<size_t>(2 * half_width + 1));
    for (double& v : vals) v = 0.1 + 0.8 * rng.next_unit();
    return Environment::tabulated(std::move(vals), -half_width);
}

} // namespace

TEST_CASE("simulate endpoints at T=0 and strong drift") {
    Environment fair = Environment::periodic({0.5});
    SimulateResult r0 = simulate(fair, 0, 500, 7);
    CHECK(r0.endpoint_count[static_cast<size_t>(0 - r0.endpoint_lo)] == 500);
    CHECK(r0.mean == 0.0);
    CHECK(r0.variance == 0.0);

    Environment drift = Environment::periodic({0.999});
    SimulateResult r1 = simulate(drift, 10, 2000, 7);
    CHECK(r1.mean > 9.9);
    for (size_t i = 0; i < r1.endpoint_count.size(); ++i)
        if (r1.endpoint_count[i])
            CHECK(std::abs(r1.endpoint_lo + static_cast<long long>(i)) <= 10);
}

TEST_CASE("simple-walk variance: Var(Z_T)/T within the 3-sigma band") {
    Environment fair = Environment::periodic({0.5});
    SimulateResult r = simulate(fair, 10000, 100000, 12345);
    CHECK(r.variance / 10000.0 > 0.97);
    CHECK(r.variance / 10000.0 < 1.03);
    CHECK(std::abs(r.mean) < 3.0 * std::sqrt(10000.0 / 100000.0));
}

TEST_CASE("simulate is independent of sharding") {
    Environment env = random_elliptic(5, 200);
    SimulateResult a = simulate(env, 200, 4000, 99, RecordMode::endpoints, 0,
                                Exec::serial, true);
    SimulateResult b = simulate(env, 200, 4000, 99, RecordMode::endpoints, 0,
                                Exec::openmp, true);
    CHECK(a.mean == b.mean);
    CHECK(a.variance == b.variance);
    REQUIRE(a.endpoint_count.size() == b.endpoint_count.size());
    for (size_t i = 0; i < a.endpoint_count.size(); ++i)
        CHECK(a.endpoint_count[i] == b.endpoint_count[i]);
    for (size_t i = 0; i < a.endpoints.size(); ++i)
        CHECK(a.endpoints[i] == b.endpoints[i]);

    // worker cap via QPWALK_THREADS must not change anything either
    setenv("QPWALK_THREADS", "2", 1);
    SimulateResult c = simulate(env, 200, 4000, 99, RecordMode::endpoints, 0,
                                Exec::openmp, true);
    unsetenv("QPWALK_THREADS");
    for (size_t i = 0; i < a.endpoints.size(); ++i)
        CHECK(a.endpoints[i] == c.endpoints[i]);
}

TEST_CASE("evolve_exact closed forms and parity") {
    Environment fair = Environment::periodic({0.5});
    LatticeDistribution d2 = evolve_exact(fair, 2, -8, 8, 0);
    CHECK(d2.mass_at(-2) == 0.25);
    CHECK(d2.mass_at(0) == 0.5);
    CHECK(d2.mass_at(2) == 0.25);
    CHECK(d2.mass_at(1) == 0.0);
    CHECK(d2.mass_at(-1) == 0.0);

    Environment env = random_elliptic(9, 10);
    LatticeDistribution d1 = evolve_exact(env, 1, -4, 4, 0);
    CHECK(d1.mass_at(1) == env.p(0));
    CHECK(d1.mass_at(-1) == doctest::Approx(1.0 - env.p(0)).epsilon(1e-15));

    LatticeDistribution d9 = evolve_exact(env, 9, -10, 10, 0);
    CHECK(d9.total_mass() + d9.leakage() == doctest::Approx(1.0).epsilon(1e-12));
    for (long long j = -8; j <= 8; j += 2) CHECK(d9.mass_at(j) == 0.0); // wrong parity
}

TEST_CASE("trap environment: leakage stays tiny") {
    Environment trap = generic_env("localization", 0).env;
    LatticeDistribution d = evolve_exact(trap, 200, -64, 64, 0);
    CHECK(d.leakage() < 1e-10);
}

TEST_CASE("evolve serial == openmp bitwise (large window)") {
    Environment env = Environment::periodic({0.52, 0.48, 0.5, 0.55});
    // window wide enough to engage the parallel stencil path
    LatticeDistribution a = evolve_exact(env, 24, -140000, 140000, 0, Exec::serial);
    LatticeDistribution b = evolve_exact(env, 24, -140000, 140000, 0, Exec::openmp);
    REQUIRE(a.mass.size() == b.mass.size());
    for (size_t i = 0; i < a.mass.size(); ++i) CHECK(a.mass[i] == b.mass[i]);
    CHECK(a.leak_left == b.leak_left);
    CHECK(a.leak_right == b.leak_right);
}

TEST_CASE("snapshots equal separate runs bitwise") {
    Environment env = random_elliptic(31, 80);
    std::vector<LatticeDistribution> snaps =
        evolve_exact_snapshots(env, {10, 25, 60}, -70, 70, 0);
    for (long long t : {10LL, 25LL, 60LL}) {
        LatticeDistribution single = evolve_exact(env, t, -70, 70, 0);
        const LatticeDistribution& snap =
            snaps[t == 10 ? 0 : (t == 25 ? 1 : 2)];
        for (size_t i = 0; i < single.mass.size(); ++i)
            CHECK(single.mass[i] == snap.mass[i]);
        CHECK(single.leakage() == snap.leakage());
    }
}

TEST_CASE("exit_solve closed forms") {
    Environment fair = Environment::periodic({0.5});
    ExitStats st = exit_solve(fair, -10, 10, 0);
    CHECK(st.p_exit_right == doctest::Approx(0.5).epsilon(1e-13));
    CHECK(st.m1 == doctest::Approx(100.0).epsilon(1e-11));
    // r_0 = 1/2 * 1/10 + 1/2 * 1/10 = 1/10
    CHECK(st.return_escape[static_cast<size_t>(0 - (-10) - 1)] ==
          doctest::Approx(0.1).epsilon(1e-12));

    Environment third = Environment::periodic({1.0 / 3.0});
    ExitStats st3 = exit_solve(third, 0, 5, 1);
    CHECK(st3.p_exit_right == doctest::Approx(1.0 / 31.0).epsilon(1e-12));
    CHECK(st3.p_exit_right ==
          doctest::Approx(hit_prob(third, 0, 1, 5)).epsilon(1e-12));
}

TEST_CASE("occupation sums to m1 and moments are sane") {
    Environment env = random_elliptic(41, 30);
    ExitStats st = exit_solve(env, -25, 20, 0);
    double occ = 0.0;
    for (double g : st.occupation) occ += g;
    CHECK(occ == doctest::Approx(st.m1).epsilon(1e-10));
    CHECK(st.m2 >= st.m1 * st.m1);
    CHECK(st.m1 >= 20.0); // at least the distance to the nearer wall
    CHECK(st.m1_right <= st.m1);
    CHECK(st.m1_right >= 0.0);
}

TEST_CASE("martingale property sitewise") {
    Environment env = random_elliptic(43, 60);
    PotentialTable pt(env, -60, 60);
    RngStream rng(77, 0);
    for (int k = 0; k < 100; ++k) {
        long long j = -59 + static_cast<long long>(rng.next_unit() * 118);
        // p(j) e^{Sigma(j)} = q(j) e^{Sigma(j-1)} is the martingale identity
        double lhs = env.p(j) * std::exp(pt.sigma(j) - pt.sigma(j - 1));
        CHECK(lhs == doctest::Approx(1.0 - env.p(j)).epsilon(1e-12));
    }
}

TEST_CASE("oracle triangle at desk scale") {
    Environment env = random_elliptic(51, 40);
    long long a = -35, b = 30, start = 0;
    double h = hit_prob(env, a, start, b);
    ExitStats st = exit_solve(env, a, b, start);
    CHECK(std::abs(h - st.p_exit_right) < 1e-10);

    ExitSample mc = simulate_exit(env, a, b, start, 20000, 4242);
    CHECK(std::abs(mc.p_right_hat - h) <
          3.0 * std::sqrt(std::log(20000.0) / 20000.0));
    CHECK(std::abs(mc.mean_tau - st.m1) < 4.0 * std::sqrt(st.m2) / std::sqrt(20000.0));

    // absorbed evolution drains into the exit split (mild env so the deepest
    // trap empties within the horizon)
    RngStream rng(52, 0);
    std::vector<double> vals(61);
    for (double& v : vals) v = 0.4 + 0.2 * rng.next_unit();
    Environment mild = Environment::tabulated(std::move(vals), -30);
    ExitStats stm = exit_solve(mild, -28, 25, 0);
    LatticeDistribution d = evolve_exact(mild, 1500000, -27, 24, 0);
    CHECK(d.total_mass() < 1e-13);
    CHECK(std::abs(d.leak_right - stm.p_exit_right) < 1e-10);
}

TEST_CASE("renewal stats closed forms and dual oracle") {
    RenewalStats rs = renewal_stats(Environment::periodic({0.5}), 10);
    CHECK(rs.mu_hat == doctest::Approx(100.0).epsilon(1e-11));
    CHECK(rs.p_right == doctest::Approx(0.5).epsilon(1e-13));

    Environment p23 = Environment::periodic({2.0 / 3.0});
    RenewalStats rs23 = renewal_stats(p23, 10);
    CHECK(rs23.p_right == doctest::Approx(1024.0 / 1025.0).epsilon(1e-12));
    CHECK(rs23.p_right ==
          doctest::Approx(hit_prob(p23, -10, 0, 10)).epsilon(1e-12));
}

TEST_CASE("renewal moments match the absorbed-time distribution") {
    // independent oracle: accumulate E tau, E tau^2, E|tau-mu|^3 directly from
    // the absorbed chain, reimplemented here
    Environment env = Environment::periodic({0.7, 0.45});
    const long long L = 4;
    RenewalStats rs = renewal_stats(env, L);
    std::vector<double> pv = env.window_values(-L + 1, L - 1);
    size_t n = pv.size();
    std::vector<double> cur(n, 0.0), nxt(n, 0.0);
    cur[static_cast<size_t>(L - 1)] = 1.0;
    double m1 = 0.0, m2 = 0.0, gamma = 0.0, survival = 1.0;
    long long t = 0;
    while (survival > 1e-15 && t < 100000) {
        ++t;
        double absorbed = (1.0 - pv[0]) * cur[0] + pv[n - 1] * cur[n - 1];
        for (size_t j = 0; j < n; ++j) {
            double m = 0.0;
            if (j > 0) m += pv[j - 1] * cur[j - 1];
            if (j + 1 < n) m += (1.0 - pv[j + 1]) * cur[j + 1];
            nxt[j] = m;
        }
        std::swap(cur, nxt);
        double td = static_cast<double>(t);
        m1 += absorbed * td;
        m2 += absorbed * td * td;
        gamma += absorbed * std::pow(std::abs(td - rs.mu_hat), 3.0);
        survival -= absorbed;
    }
    CHECK(m1 == doctest::Approx(rs.mu_hat).epsilon(1e-10));
    CHECK(m2 - m1 * m1 == doctest::Approx(rs.v_hat).epsilon(1e-9));
    CHECK(gamma == doctest::Approx(rs.gamma_hat).epsilon(1e-9));
}

TEST_CASE("renewal moments match Monte Carlo within 3 sigma") {
    Environment env = Environment::periodic({0.7, 0.45});
    RenewalStats rs = renewal_stats(env, 8);
    const uint64_t n = 200000;
    ExitSample mc = simulate_exit(env, -8, 8, 0, n, 1717);
    double se = std::sqrt(rs.v_hat / static_cast<double>(n));
    CHECK(std::abs(mc.mean_tau - rs.mu_hat) < 3.0 * se);
    CHECK(rs.gamma_hat > 0.0);
    CHECK(rs.v_hat >= 1.0); // Var(tau) >= 1 per the exit-time lemma
}

TEST_CASE("renewal-reward prediction degenerates to the one-sided formula") {
    RenewalStats rs;
    rs.L = 4;
    rs.mu_hat = 23.0;
    rs.m2 = 700.0;
    rs.v_hat = rs.m2 - rs.mu_hat * rs.mu_hat;
    rs.p_right = 1.0;
    rs.e_u = 4.0;
    rs.e_tau_u = 4.0 * 23.0; // E[tau U] = L mu when U = L a.s.
    double simple = 4.0 * std::sqrt(rs.v_hat * 1000.0 / std::pow(23.0, 3.0));
    CHECK(rs.predict_sigma(1000.0) == doctest::Approx(simple).epsilon(1e-12));
    CHECK(rs.predict_mu(1000.0) == doctest::Approx(4.0 * 1000.0 / 23.0).epsilon(1e-12));
}

TEST_CASE("Wald consistency for the periodic renewal decomposition") {
    Environment env = Environment::periodic({0.7, 0.45});
    RenewalStats rs = renewal_stats(env);
    const long long M = 50;
    long long tstar = static_cast<long long>(std::llround(M * rs.mu_hat));
    LatticeDistribution d = evolve_exact(env, tstar, -tstar - 1, tstar + 1, 0);
    Moments m = moments(d, 1e-12);
    double rhs = static_cast<double>(M) * rs.e_u;
    double lorden = std::abs(rs.speed()) * (rs.v_hat / rs.mu_hat + rs.mu_hat) + 2.0;
    CHECK(std::abs(m.mean - rhs) <= lorden);
}
