#pragma once

// Statistical verdicts for the localization / one-sided / two-sided / CLT
// mechanisms, plus the asymmetric-walk quantities u(x), b_t(x), rho(x).

#include <optional>
#include <string>
#include <vector>

#include "qpwalk/engine.hpp"
#include "qpwalk/potential.hpp"

namespace qpwalk {

struct Moments {
    double mean, variance;
    double leakage;
};

// mean/variance of the normalized truncated law; throws when leakage exceeds
// the budget
Moments moments(const LatticeDistribution& dist, double leakage_budget = 1e-9);

double normal_cdf(double z);

// sup-distance between the standardized lattice CDF and Phi, over all atoms
double ks_phi(const LatticeDistribution& dist, double mu, double sigma);
double ks_phi_hist(const std::vector<uint64_t>& counts, long long lo,
                   double mu, double sigma);

struct ScenarioConfig {
    double epsilon = 0.1;
    std::string engine = "exact"; // localization tail: "exact" | "mc"
    double leakage_budget = 1e-9;
    double ks_threshold = 0.05;
    double mass_threshold = 0.1; // two-sided window mass target
    long long T_override = -1;
    uint64_t n_traj = 100000;
    uint64_t seed = 1;
    std::optional<CriterionWitness> witness; // two-sided
    const Environment* base = nullptr;       // criterion base, if any
};

struct ScenarioVerdict {
    std::string kind;
    long long T = 0;
    bool pass = false;
    double leakage = 0.0;
    nlohmann::json details;
    nlohmann::json to_json() const;
};

ScenarioVerdict scenario_verdict(const std::string& kind, const Environment& env,
                                 long long N, const ScenarioConfig& cfg = {});

// ------------------------------------------------- asymmetric quantities

struct DriftPoint {
    double u;          // u(x)
    long long b_t;     // first b with sum_{k<=b} u(x+k alpha) >= t
    double tail_bound; // certified truncation tail for u
};

// Requires symmetry_defect(p) > 0 (right drift); reflect the environment
// otherwise. Tail certified by a window-product contraction bound.
DriftPoint u_and_drift(const CircleMap& p, const Frequency& alpha, double x,
                       double t, double tol = 1e-10);

struct DriftProfile {
    std::vector<double> x;
    std::vector<double> u;
    std::vector<long long> b_t;
};

DriftProfile drift_profile(const CircleMap& p, const Frequency& alpha,
                           int grid, double t, double tol = 1e-10,
                           Exec exec = default_exec());

struct StationaryDensity {
    std::vector<double> x, rho;
    double eqim_residual;  // max |rho(x) - p(x-a)rho(x-a) - q(x+a)rho(x+a)|
    double flux_defect;    // max |p(x)rho(x) - q(x+a)rho(x+a) - 1|
    double tail_bound;
};

StationaryDensity stationary_density(const CircleMap& p, const Frequency& alpha,
                                     int grid, double tol = 1e-10,
                                     Exec exec = default_exec());

} // namespace qpwalk
