#pragma once

// Rotation numbers represented by continued-fraction convergents in exact
// arithmetic. Irrationality is emulated by the deepest convergent p_D/q_D;
// every orbit statement carries the substitution error |j| * eta.

#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>
#include <json.hpp>

#include "qpwalk/circlemap.hpp"

namespace qpwalk {

using BigInt = boost::multiprecision::cpp_int;
using BigRat = boost::multiprecision::cpp_rational;

struct PrecisionError : Error {
    using Error::Error;
};

class Frequency {
public:
    struct Convergent {
        BigInt p, q;
        BigRat eta;   // |q alpha* - p| against the deepest convergent
        int eta_sign; // sign of (q alpha* - p)
    };

    // quotients a_1, a_2, ... (all >= 1). Indexing: convergent(0) is the last
    // convergent with denominator 1, so golden gives (1,2),(2,3),(3,5),... at
    // n = 1,2,3,...
    static Frequency from_quotients(std::vector<BigInt> quotients);
    static Frequency golden(int depth = 40);
    static Frequency silver(int depth = 30);

    // Choose a_{n+1} large enough that eta_n < q_n^{-sigma(n)} for each listed
    // exponent; verified by exact rational comparison (see notes()).
    static Frequency liouville(const std::vector<unsigned>& exponents,
                               unsigned bit_budget = 4096);

    // "golden" | "silver" | "quotients:a1,a2,..." | "liouville:s1,s2,..."
    static Frequency parse(const std::string& spec);

    int depth() const { return static_cast<int>(conv_p_.size()) - 1; }

    Convergent convergent(int n) const; // n in [0, depth()]
    const BigInt& p(int n) const;
    const BigInt& q(int n) const;
    // |q_n alpha* - p_n| against the deepest convergent. The strict CF bounds
    // 1/(q_n+q_{n+1}) < eta_n < 1/q_{n+1} hold for n <= depth()-3 (and at
    // depth()-2 unless the final quotient is 1, where the lower bound is tight).
    BigRat eta(int n) const;
    int eta_sign(int n) const;

    BigRat surrogate() const; // p_D / q_D
    double value() const;

    struct OrbitPoint {
        BigRat x;         // x + j p_d/q_d mod 1, exact
        double err_bound; // |j| * eta_d
    };
    OrbitPoint orbit_point(const BigRat& x, long long j, int depth = -1) const;
    // throws PrecisionError when the certified error exceeds max_err
    OrbitPoint orbit_point_checked(const BigRat& x, long long j, double max_err,
                                   int depth = -1) const;

    const std::vector<BigInt>& quotients() const { return quotients_; }
    // Liouville-schedule verification records (one per requested inequality)
    const std::vector<std::string>& notes() const { return notes_; }

    nlohmann::json to_json() const;
    static Frequency from_json(const nlohmann::json& j);

private:
    std::vector<BigInt> quotients_;
    std::vector<BigInt> conv_p_, conv_q_;
    std::vector<std::string> notes_;
};

double to_double(const BigRat& r);
BigRat mod1(const BigRat& r);

} // namespace qpwalk
