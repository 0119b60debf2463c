#pragma once

// The explicit builders: the tilde-e band/bump family and its delta-balancing,
// coboundary approximants, the perturbed circle maps with their U interval
// families, the asymmetric plateau perturbation g, and the appendix-style
// deterministic environments.

#include <optional>
#include <string>

#include "qpwalk/analysis.hpp"
#include "qpwalk/engine.hpp"
#include "qpwalk/environment.hpp"
#include "qpwalk/potential.hpp"

namespace qpwalk {

// The 1-periodic band map: sin(8 pi x) on the four side bands, 0 on
// [-1/4,1/4], smoothstep connectors of width 1/n^2, exactly 0 and flat at
// +-3/8. delta >= 0 scales the positive part by 1+delta, delta < 0 scales the
// negative part by 1-delta. Zero mean holds exactly for delta = 0.
CircleMap tilde_e(int n, double delta);

struct IntervalFamily {
    std::vector<std::pair<double, double>> base; // pattern coords in [-1/2, 1/2)
    long long q = 1;                             // replication factor
    double measure() const;
    bool contains(double x) const;
};

struct BalanceResult {
    double delta;
    double defect; // symmetry defect at the returned delta
    int iterations;
};

// Bisection on delta in [-1/n, 1/n] driving the symmetry defect of
// p_bar + q^{-s} tilde_e_{n,delta}(q x) below 1e-11.
BalanceResult balance_delta(const CircleMap& p_bar, int n, long long q_n,
                            double s);

struct PerturbationPlan {
    CircleMap p_bar;
    int n = 0;
    long long q_n = 0;
    double s = 2.0; // amplitude exponent: e_n = q^{-s} tilde_e_{n,delta}(q x)
    double delta_n = 0.0;
    CircleMap e_n;
    CircleMap p_n; // p_bar + e_n
    double defect = 0.0;
    double kappa = 0.0;
    IntervalFamily U1, U2, U3;

    nlohmann::json to_json() const;
    static PerturbationPlan from_json(const nlohmann::json& j);
};

PerturbationPlan perturbed_p(const CircleMap& p_bar, int n, long long q_n,
                             double s);

struct CoboundaryResult {
    CircleMap p_bar; // logistic of the truncated ln(q/p)
    CircleMap psi;   // ln(q_bar/p_bar) = c + psi(x+alpha) - psi(x)
    double c = 0.0;  // 0 in symmetric mode
    double residual_sup = 0.0; // of the coboundary relation, 1024-grid
    double A = 0.0;            // sup psi - inf psi = ln|g| + ln|1/g|
};

CoboundaryResult coboundary_from(const CircleMap& p, const Frequency& alpha,
                                 int degree, CohomMode mode, int depth = -1);

struct GnPerturbation {
    CircleMap g; // >= 0, plateau q^{-(s+1)} where {q x} in [0.86, 0.99]
    long long q_n = 0;
    double plateau = 0.0;
    IntervalFamily J;       // {q x} in [0, 0.84], measure 0.84
    IntervalFamily J_prime; // {q x} in [0.86, 0.98], measure 0.12
};

GnPerturbation g_perturbation(int n, long long q_n, double s);

struct GenericEnvResult {
    Environment env;
    double achieved_ratio = 1.0; // |M-|/|M+| (two-sided kind)
    bool balanced = true;
};

// kinds: "localization" (trap), "clt" (constant outward drift), "two-sided"
// (balanced double-transient). K < K1 < K2 for two-sided.
GenericEnvResult generic_env(const std::string& kind, long long K,
                             long long K1 = 0, long long K2 = 0,
                             double eps = 0.01, uint64_t base_seed = 12345);

// ------------------------------------------------------------- presets

struct ScenarioPreset {
    std::string kind;
    Environment env;
    std::optional<Environment> base_env;
    long long N = 0;
    std::optional<CriterionWitness> witness;
    std::optional<PerturbationPlan> plan;
    std::optional<GnPerturbation> gn;
    std::optional<CircleMap> p_map; // the circle map behind env, when any
    std::optional<Frequency> alpha;
    nlohmann::json meta;
};

// kinds: localization | one-sided | two-sided | asymmetric-drift |
// diophantine-window. config keys are preset-specific (see the CLI).
ScenarioPreset build_preset(const std::string& kind,
                            const nlohmann::json& config);

// Numeric check of the ergodic-sum estimate behind the constructions:
// Sigma_x(M) vs the integral main term plus Sigma_bar_x(M), with the
// R-term bound and the measured substitution terms as the budget.
struct MainEstimateCheck {
    double max_error = 0.0;
    double budget = 0.0;
    bool within = false;
    nlohmann::json details;
};

MainEstimateCheck check_main_estimate(const PerturbationPlan& plan,
                                      const Frequency& alpha, int samples,
                                      long long M_max, uint64_t seed = 7);

// Drift-split report for the plateau-perturbed asymmetric preset: b_t(x)
// sits in a measured O(1) band around b_ref on J and is elevated on J'.
struct AsymDriftReport {
    long long b_ref = 0;
    double u_bar_mean = 0.0;
    double U_emp = 0.0;          // max |b_t - b_ref| over J
    double U_cap = 0.0;          // measured band cap from Birkhoff deviations
    double margin = 0.0;         // min over J' of b_t - b_ref
    double predicted_ratio = 0.0;
    bool pass = false;
    DriftProfile profile;
    std::vector<uint8_t> in_J, in_Jp;
    nlohmann::json details;
};

AsymDriftReport asym_drift_report(const ScenarioPreset& preset, int grid,
                                  double tol = 1e-9);

} // namespace qpwalk
