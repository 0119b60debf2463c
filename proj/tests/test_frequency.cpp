#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "qpwalk/frequency.hpp"

using namespace qpwalk;

TEST_CASE("golden convergents and eta") {
    Frequency g = Frequency::golden();
    CHECK(g.q(0) == 1);
    CHECK(g.p(1) == 1);
    CHECK(g.q(1) == 2);
    CHECK(g.p(2) == 2);
    CHECK(g.q(2) == 3);
    CHECK(g.p(3) == 3);
    CHECK(g.q(3) == 5);
    CHECK(g.p(4) == 5);
    CHECK(g.q(4) == 8);

    // |8 alpha - 5| and |2 alpha - 1| against the exact golden conjugate
    double phi = 0.6180339887498948482;
    CHECK(to_double(g.eta(4)) == doctest::Approx(std::abs(8 * phi - 5)).epsilon(1e-9));
    CHECK(to_double(g.eta(1)) == doctest::Approx(std::abs(2 * phi - 1)).epsilon(1e-9));
}

TEST_CASE("silver convergents") {
    Frequency s = Frequency::silver();
    CHECK(s.q(0) == 1);
    CHECK(s.q(1) == 2);
    CHECK(s.q(2) == 5);
    CHECK(s.q(3) == 12);
    CHECK(s.q(4) == 29);
}

TEST_CASE("standard CF recursion and gcd") {
    Frequency f = Frequency::from_quotients(
        {BigInt(3), BigInt(8), BigInt(80), BigInt(50), BigInt(60)});
    for (int n = 2; n <= f.depth(); ++n) {
        // q_{n+1} = a q_n + q_{n-1} holds along the stored list
        CHECK(boost::multiprecision::gcd(f.p(n), f.q(n)) == 1);
    }
    CHECK(f.q(1) == 3);
    CHECK(f.q(2) == 25);
    CHECK(f.q(3) == 2003);
}

TEST_CASE("exact eta inequalities") {
    for (Frequency f : {Frequency::golden(20), Frequency::silver(16)}) {
        for (int n = 0; n <= f.depth() - 3; ++n) {
            BigRat eta = f.eta(n);
            CHECK(eta * f.q(n + 1) < 1);
            CHECK(eta * (f.q(n) + f.q(n + 1)) > 1);
            if (n >= 1) CHECK(f.eta(n) < f.eta(n - 1));
        }
    }
}

TEST_CASE("liouville schedule verified exactly") {
    Frequency f = Frequency::liouville({1, 2, 3, 4});
    REQUIRE(f.notes().size() == 4);
    for (const std::string& s : f.notes())
        CHECK(s.find("verified") != std::string::npos);
    for (int n = 1; n <= 4; ++n) {
        BigRat bound(BigInt(1),
                     boost::multiprecision::pow(f.q(n), static_cast<unsigned>(n)));
        CHECK(f.eta(n) < bound);
    }
}

TEST_CASE("liouville bit budget") {
    CHECK_THROWS_AS(Frequency::liouville({9, 9, 9, 9, 9}), Error);
}

TEST_CASE("orbit points are exact rationals") {
    Frequency g = Frequency::golden(20);
    // full period of the depth-6 surrogate (q = 21)
    CHECK(g.q(6) == 21);
    auto o = g.orbit_point(BigRat(0), 21, 6);
    CHECK(o.x == BigRat(0));
    CHECK(o.err_bound == doctest::Approx(21.0 * to_double(g.eta(6))).epsilon(1e-12));

    auto o0 = g.orbit_point(BigRat(1, 4), 0, 6);
    CHECK(o0.x == BigRat(1, 4));
    CHECK(o0.err_bound == 0.0);

    auto o1 = g.orbit_point(BigRat(0), 1, 6);
    CHECK(o1.x == BigRat(13, 21));
    CHECK(o1.err_bound == doctest::Approx(to_double(g.eta(6))).epsilon(1e-12));

    // surrogate periodicity and additive error bounds
    auto oa = g.orbit_point(BigRat(1, 3), 5, 6);
    auto ob = g.orbit_point(BigRat(1, 3), 5 + 21, 6);
    CHECK(oa.x == ob.x);
}

TEST_CASE("orbit precision budget") {
    Frequency g = Frequency::golden(20);
    CHECK_THROWS_AS(g.orbit_point_checked(BigRat(0), 1000000, 1e-12, 4),
                    PrecisionError);
}

TEST_CASE("parse and JSON round-trip") {
    Frequency a = Frequency::parse("quotients:1,1,1,1,1,1,1,1");
    CHECK(a.q(1) == 2);
    Frequency b = Frequency::parse("golden");
    CHECK(b.depth() >= 30);
    Frequency c = Frequency::from_json(a.to_json());
    CHECK(c.q(c.depth()) == a.q(a.depth()));
    CHECK_THROWS_AS(Frequency::parse("nonsense"), Error);
}
