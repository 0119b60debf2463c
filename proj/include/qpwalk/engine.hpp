#pragma once

// Two cross-validating computational engines: seeded Monte Carlo trajectory
// simulation (counter-based streams, shard-independent) and exact forward
// evolution of the lattice law, plus exact first-passage solvers and renewal
// statistics via tridiagonal linear algebra.

#include <cstdint>
#include <vector>

#include "qpwalk/environment.hpp"
#include "qpwalk/parallel.hpp"

namespace qpwalk {

struct LatticeDistribution {
    long long lo = 0, hi = 0; // live window, inclusive
    long long t = 0;
    long long start = 0;
    std::vector<double> mass; // index j - lo
    double leak_left = 0.0, leak_right = 0.0;
    bool point_start = true; // parity applies

    double leakage() const { return leak_left + leak_right; }
    double total_mass() const;
    double mass_at(long long j) const;
    double mass_in(long long a, long long b) const; // inclusive, clipped
};

enum class RecordMode { endpoints, max_excursion, full_path_sample };

struct SimulateResult {
    long long T = 0;
    uint64_t n_traj = 0, seed = 0;
    long long start = 0;
    long long endpoint_lo = 0;
    std::vector<uint64_t> endpoint_count; // endpoint histogram
    std::vector<uint64_t> max_abs_count;  // histogram of max_t |Z_t|
    double mean = 0.0, variance = 0.0;    // of the endpoint law
    std::vector<long long> endpoints;     // per trajectory, when kept
    std::vector<std::vector<long long>> sample_paths; // full_path_sample mode

    double endpoint_fraction_in(long long a, long long b) const;
};

SimulateResult simulate(const Environment& env, long long T, uint64_t n_traj,
                        uint64_t seed, RecordMode mode = RecordMode::endpoints,
                        long long start = 0, Exec exec = default_exec(),
                        bool keep_endpoints = false);

// One step: mass(j) -> p(j) to j+1, q(j) to j-1; mass stepping outside
// [window_lo, window_hi] is absorbed into the leakage counters.
LatticeDistribution evolve_exact(const Environment& env, long long T,
                                 long long window_lo, long long window_hi,
                                 long long start = 0, Exec exec = default_exec());

// Same evolution, snapshotting the law at each listed time (sorted ascending).
std::vector<LatticeDistribution> evolve_exact_snapshots(
    const Environment& env, const std::vector<long long>& times,
    long long window_lo, long long window_hi, long long start = 0,
    Exec exec = default_exec());

struct ExitStats {
    long long a = 0, b = 0, start = 0;
    double p_exit_right = 0.0;      // from the tridiagonal solve
    double m1 = 0.0, m2 = 0.0, m3 = 0.0; // raw moments of tau
    double m1_right = 0.0;          // E[tau; exit right]
    std::vector<double> occupation; // E[eta_k], k in [a+1, b-1]
    std::vector<double> return_escape; // r_k, k in [a+1, b-1]
};

ExitStats exit_solve(const Environment& env, long long a, long long b,
                     long long start);

struct RenewalStats {
    long long L = 0;
    double mu_hat = 0.0;    // E tau for the (-L, L) exit from 0
    double v_hat = 0.0;     // Var tau
    double gamma_hat = 0.0; // E|tau - mu|^3
    double p_right = 0.0;   // P(U = +L)
    double e_u = 0.0;       // E[U] = L (2 p_right - 1)
    double e_tau_u = 0.0;   // E[tau U]
    double m2 = 0.0;        // E[tau^2]

    // Renewal-reward CLT prediction over horizon N. When P(U=L) = 1 these
    // reduce to mu = L N / mu_hat and sigma = L sqrt(v_hat N / mu_hat^3).
    double speed() const { return e_u / mu_hat; }
    double predict_mu(double N) const;
    double predict_sigma(double N) const;
};

// env must be exactly L-periodic (L = env.period() unless overridden).
RenewalStats renewal_stats(const Environment& env, long long L_override = -1);

struct ExitSample {
    double p_right_hat = 0.0;
    double mean_tau = 0.0;
    uint64_t n = 0;
};

// Monte Carlo first-passage sampling; trajectories exceeding step_cap throw.
ExitSample simulate_exit(const Environment& env, long long a, long long b,
                         long long start, uint64_t n_traj, uint64_t seed,
                         uint64_t step_cap = 0, Exec exec = default_exec());

} // namespace qpwalk
