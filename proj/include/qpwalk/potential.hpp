#pragma once

// The potential Sigma, the martingale M (kept as sign + log-magnitude),
// hitting/recurrence formulas, trap detection, and the C1/C2/C3 criteria
// checkers with desk-scale threshold relaxation tracking.

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "qpwalk/environment.hpp"

namespace qpwalk {

inline constexpr long long kMinusInfSite = std::numeric_limits<long long>::min();
inline constexpr long long kPlusInfSite = std::numeric_limits<long long>::max();

// log(e^a + e^b), safe for -inf
double log_add_exp(double a, double b);

class PotentialTable {
public:
    PotentialTable(const Environment& env, long long a, long long b);

    long long lo() const { return a_; }
    long long hi() const { return b_; }

    double sigma(long long n) const;            // Sigma(n)
    double sigma_range(long long j, long long k) const { return sigma(k) - sigma(j); }
    double log_abs_mart(long long n) const;     // log|M(n)|; M(0)=0 -> -inf
    int mart_sign(long long n) const { return n > 0 ? 1 : (n < 0 ? -1 : 0); }
    double mart(long long n) const;             // e^{log|M|} * sign (may overflow)

    const Environment& env() const { return *env_; }

private:
    const Environment* env_;
    long long a_, b_;
    std::vector<double> sigma_; // index n - a_
    std::vector<double> logm_;
};

// P(reach b before a | start), via the martingale formula in log-space.
// a = kMinusInfSite / b = kPlusInfSite accepted when the corresponding tail
// limit is certifiable (eventually-constant or periodic Sigma increments).
double hit_prob(const Environment& env, long long a, long long start, long long b);

struct RecurrenceReport {
    long long horizon;
    double log_abs_m_plus, log_abs_m_minus; // at +-horizon
    bool limits_certified;
    // log of the finite limits; absent entry means the limit is +infinity
    std::optional<double> log_m_plus_limit, log_m_minus_limit;
    std::string verdict; // "recurrent" / "transient-right" / "transient-left" /
                         // "transient-two-sided", "-at-horizon" when uncertified
    std::optional<double> escape_right_prob; // P(Z_t -> +inf)
    nlohmann::json to_json() const;
};

RecurrenceReport recurrence_report(const Environment& env, long long horizon);

struct Trap {
    long long left, bottom, right; // crest, minimum, crest sites
    double depth;                  // min of the two barrier heights
};

// Local minima of Sigma whose barriers on both sides (rise before any dip
// below the minimum) exceed depth_threshold.
std::vector<Trap> find_traps(const Environment& env, long long a, long long b,
                             double depth_threshold);

struct CriterionThresholds {
    // replaces the sqrt(N)/sqrt(L) barrier targets when >= 0
    double barrier = -1.0;
    // A is searched over [A_min, A_max] unless fixed
    double A_min = 1.0, A_max = 20.0;
    std::optional<double> A;
    std::optional<long long> L;             // C2 block length
    std::vector<long long> L_candidates;    // searched in increasing order
    double c2c_tol = 1e-9;                  // replaces N^{-1/eps^3}
    std::optional<long long> Q;             // C3 comparison period
    double c3_per_tol = -1.0;               // replaces Q^{-1/2} when >= 0
    std::optional<double> u, v, wm, wp, up, vp, wpm, wpp; // C3 witnesses
};

struct CriterionWitness {
    double A = 0.0;
    long long L = 0, Q = 0;
    double u = 0, v = 0, wm = 0, wp = 0, up = 0, vp = 0, wpm = 0, wpp = 0;
};

struct CriterionReport {
    std::string kind; // "c1" | "c2" | "c3"
    bool holds;
    CriterionWitness witness;
    double margin; // worst slack among the defining inequalities
    std::vector<std::string> relaxations;
    nlohmann::json to_json() const;
};

// base: optional reference environment supplying Sigma_bar for (C3c).
CriterionReport check_criterion(const std::string& kind, const Environment& env,
                                long long N, double eps,
                                const CriterionThresholds& thr = {},
                                const Environment* base = nullptr);

} // namespace qpwalk
