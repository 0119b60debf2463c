#pragma once

// Lattice environments p: Z -> [kappa, 1-kappa] in the flavors used here:
// quasi-periodic (circle map sampled along a rotation orbit), periodic,
// tabulated with an extension rule, and procedural (tabulated core with
// constant tails). Read-only after construction.

#include <cstdint>
#include <optional>
#include <vector>

#include "qpwalk/circlemap.hpp"
#include "qpwalk/frequency.hpp"

namespace qpwalk {

struct EllipticityError : Error {
    using Error::Error;
};

class Environment {
public:
    enum class Kind { quasiperiodic, periodic, tabulated, procedural };

    // fair-coin environment
    Environment() : kind_(Kind::periodic), kappa_(0.5), values_{0.5} {}

    // p(j) = pmap(x + j alpha), stepping by alpha's convergent at `depth`
    // (default: full depth). The surrogate period q_depth is recorded.
    static Environment quasiperiodic(CircleMap pmap, Frequency alpha, BigRat x,
                                     int depth = -1);
    static Environment periodic(std::vector<double> values);
    // values over the window [lo, lo+values.size()-1]
    static Environment tabulated(std::vector<double> values, long long lo,
                                 bool constant_extend = true);
    // tabulated core plus constant tails (the appendix-style builders)
    static Environment procedural(std::vector<double> core, long long lo,
                                  double left_const, double right_const);

    double p(long long j) const;
    double q(long long j) const { return 1.0 - p(j); }

    // the environment with p'(j) = 1 - p(-j)
    Environment reflected() const;

    // certified ellipticity: exact over period/window/tails, circle-grid scan
    // for the quasiperiodic kind
    double kappa() const { return kappa_; }
    Kind kind() const { return kind_; }

    // inclusive window [a, b], fast incremental path
    std::vector<double> window_values(long long a, long long b) const;

    // constant Sigma-increments outside [head_lo, head_hi], when certifiable
    struct TailRule {
        long long head_lo, head_hi;
        double left_value, right_value; // the constant site probabilities
    };
    std::optional<TailRule> tail_rule() const;

    long long period() const;            // periodic: L; quasiperiodic: throws if > 2^62
    const Frequency* frequency() const;  // quasiperiodic only, else nullptr
    const CircleMap* circle_map() const;
    const BigRat& phase() const;
    int orbit_depth() const { return depth_; }

    nlohmann::json to_json() const;
    static Environment from_json(const nlohmann::json& j);

private:
    void certify();

    Kind kind_;
    double kappa_ = 0.0;

    // quasiperiodic
    std::optional<CircleMap> pmap_;
    std::optional<Frequency> alpha_;
    BigRat x_ = 0;
    int depth_ = -1;
    bool reflect_ = false;
    BigInt phase_num_, phase_step_, phase_den_; // phase_j = (num + j step)/den mod 1

    // periodic / tabulated / procedural
    std::vector<double> values_;
    long long lo_ = 0;
    bool constant_extend_ = true;
    double left_const_ = 0.5, right_const_ = 0.5;
};

// int ln p - int ln q over the circle; ~0 classifies the walk as symmetric
double symmetry_defect(const CircleMap& p, double tol = 1e-12);

// min over j in [a,b] of min(p(j), 1-p(j))
double ellipticity(const Environment& env, long long a, long long b);

} // namespace qpwalk
