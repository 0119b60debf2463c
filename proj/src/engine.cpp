#include "qpwalk/engine.hpp"
#include "qpwalk/rng.hpp"

#include <algorithm>
#include <cmath>

namespace qpwalk {

// ----------------------------------------------------- LatticeDistribution

double LatticeDistribution::total_mass() const {
    double s = 0.0, c = 0.0;
    for (double v : mass) {
        double y = v - c, t2 = s + y;
        c = (t2 - s) - y;
        s = t2;
    }
    return s;
}

double LatticeDistribution::mass_at(long long j) const {
    if (j < lo || j > hi) return 0.0;
    return mass[static_cast<size_t>(j - lo)];
}

double LatticeDistribution::mass_in(long long a, long long b) const {
    a = std::max(a, lo);
    b = std::min(b, hi);
    double s = 0.0;
    for (long long j = a; j <= b; ++j) s += mass[static_cast<size_t>(j - lo)];
    return s;
}

// -------------------------------------------------------------- simulate

double SimulateResult::endpoint_fraction_in(long long a, long long b) const {
    uint64_t c = 0;
    for (size_t i = 0; i < endpoint_count.size(); ++i) {
        long long site = endpoint_lo + static_cast<long long>(i);
        if (site >= a && site <= b) c += endpoint_count[i];
    }
    return static_cast<double>(c) / static_cast<double>(n_traj);
}

SimulateResult simulate(const Environment& env, long long T, uint64_t n_traj,
                        uint64_t seed, RecordMode mode, long long start,
                        Exec exec, bool keep_endpoints) {
    if (T < 0 || n_traj < 1) throw Error("need T >= 0 and n_traj >= 1");
    SimulateResult res;
    res.T = T;
    res.n_traj = n_traj;
    res.seed = seed;
    res.start = start;
    res.endpoint_lo = start - T;
    if (keep_endpoints) res.endpoints.assign(n_traj, 0);

    const long long vlo = start - T, vhi = start + T;
    const std::vector<double> pv = env.window_values(vlo, vhi);
    const size_t nsites = pv.size();
    const size_t maxabs_bins = static_cast<size_t>(std::max(std::abs(vlo), std::abs(vhi))) + 1;

    int nthreads = exec == Exec::openmp ? worker_count() : 1;
    std::vector<std::vector<uint64_t>> end_loc(static_cast<size_t>(nthreads)),
        max_loc(static_cast<size_t>(nthreads));
    for (int th = 0; th < nthreads; ++th) {
        end_loc[static_cast<size_t>(th)].assign(nsites, 0);
        max_loc[static_cast<size_t>(th)].assign(maxabs_bins, 0);
    }

    const uint64_t n_paths_recorded =
        mode == RecordMode::full_path_sample ? std::min<uint64_t>(n_traj, 8) : 0;
    res.sample_paths.assign(n_paths_recorded, {});

#pragma omp parallel num_threads(nthreads) if (nthreads > 1)
    {
        int th = omp_get_thread_num();
        std::vector<uint64_t>& ec = end_loc[static_cast<size_t>(th)];
        std::vector<uint64_t>& mc = max_loc[static_cast<size_t>(th)];
#pragma omp for schedule(static)
        for (long long i = 0; i < static_cast<long long>(n_traj); ++i) {
            RngStream rng(seed, static_cast<uint64_t>(i));
            long long z = start;
            long long mx = std::abs(start);
            const bool record = static_cast<uint64_t>(i) < n_paths_recorded;
            std::vector<long long>* path = nullptr;
            if (record) {
                path = &res.sample_paths[static_cast<size_t>(i)];
                path->reserve(static_cast<size_t>(T) + 1);
                path->push_back(z);
            }
            for (long long t = 0; t < T; ++t) {
                double u = rng.next_unit();
                z += (u < pv[static_cast<size_t>(z - vlo)]) ? 1 : -1;
                long long az = std::abs(z);
                if (az > mx) mx = az;
                if (record) path->push_back(z);
            }
            ++ec[static_cast<size_t>(z - vlo)];
            ++mc[static_cast<size_t>(mx)];
            if (keep_endpoints) res.endpoints[static_cast<size_t>(i)] = z;
        }
    }

    res.endpoint_count.assign(nsites, 0);
    res.max_abs_count.assign(maxabs_bins, 0);
    for (int th = 0; th < nthreads; ++th) {
        for (size_t i = 0; i < nsites; ++i)
            res.endpoint_count[i] += end_loc[static_cast<size_t>(th)][i];
        for (size_t i = 0; i < maxabs_bins; ++i)
            res.max_abs_count[i] += max_loc[static_cast<size_t>(th)][i];
    }

    // endpoint moments from exact integer counts (shard-independent)
    double n = static_cast<double>(n_traj);
    double s1 = 0.0;
    for (size_t i = 0; i < nsites; ++i)
        s1 += static_cast<double>(res.endpoint_count[i]) *
              static_cast<double>(vlo + static_cast<long long>(i));
    res.mean = s1 / n;
    double s2 = 0.0;
    for (size_t i = 0; i < nsites; ++i) {
        double d = static_cast<double>(vlo + static_cast<long long>(i)) - res.mean;
        s2 += static_cast<double>(res.endpoint_count[i]) * d * d;
    }
    res.variance = s2 / n;
    return res;
}

// ----------------------------------------------------------- evolve_exact

std::vector<LatticeDistribution> evolve_exact_snapshots(
    const Environment& env, const std::vector<long long>& times,
    long long window_lo, long long window_hi, long long start, Exec exec) {
    if (window_lo > start || start > window_hi)
        throw Error("window must contain the start site");
    if (times.empty()) throw Error("no snapshot times");
    for (size_t i = 0; i + 1 < times.size(); ++i)
        if (times[i] >= times[i + 1]) throw Error("snapshot times must be increasing");
    if (times.front() < 0) throw Error("negative time");

    const size_t n = static_cast<size_t>(window_hi - window_lo + 1);
    std::vector<double> pv = env.window_values(window_lo, window_hi);
    std::vector<double> cur(n, 0.0), nxt(n, 0.0);
    cur[static_cast<size_t>(start - window_lo)] = 1.0;

    // per-step barriers only amortize over very wide windows
    const bool parallel = exec == Exec::openmp && n >= (1u << 18);
    double leak_l = 0.0, leak_r = 0.0;

    std::vector<LatticeDistribution> out;
    size_t next_snap = 0;
    auto snapshot = [&](long long t) {
        LatticeDistribution d;
        d.lo = window_lo;
        d.hi = window_hi;
        d.start = start;
        d.t = t;
        d.mass = cur;
        d.leak_left = leak_l;
        d.leak_right = leak_r;
        out.push_back(std::move(d));
    };

    const long long T = times.back();
    if (times[next_snap] == 0) {
        snapshot(0);
        ++next_snap;
    }

    if (parallel) {
        // one persistent team; per-step cost is two barriers, not a team spawn
        int nthreads = worker_count();
        double* curp = cur.data();
        double* nxtp = nxt.data();
#pragma omp parallel num_threads(nthreads)
        for (long long t = 0; t < T; ++t) {
#pragma omp single
            {
                leak_l += (1.0 - pv[0]) * curp[0];
                leak_r += pv[n - 1] * curp[n - 1];
            }
            const long long par = ((start - window_lo) + t + 1) & 1;
#pragma omp for schedule(static)
            for (long long jj = 0; jj < static_cast<long long>(n); ++jj) {
                size_t j = static_cast<size_t>(jj);
                if ((jj & 1) == par) {
                    double m = 0.0;
                    if (j > 0) m += pv[j - 1] * curp[j - 1];
                    if (j + 1 < n) m += (1.0 - pv[j + 1]) * curp[j + 1];
                    nxtp[j] = m;
                } else {
                    nxtp[j] = 0.0; // the opposite parity received no mass
                }
            }
#pragma omp single
            {
                std::swap(curp, nxtp);
                if (next_snap < times.size() && times[next_snap] == t + 1) {
                    if (curp != cur.data()) std::swap(cur, nxt);
                    snapshot(t + 1);
                    if (curp != cur.data()) std::swap(cur, nxt);
                    ++next_snap;
                }
            }
        }
        if (curp != cur.data()) std::swap(cur, nxt);
    } else {
        for (long long t = 0; t < T; ++t) {
            leak_l += (1.0 - pv[0]) * cur[0];
            leak_r += pv[n - 1] * cur[n - 1];
            // parity of occupied sites after t+1 steps from a point start
            const long long par = ((start - window_lo) + t + 1) & 1;
            for (long long jj = par; jj < static_cast<long long>(n); jj += 2) {
                size_t j = static_cast<size_t>(jj);
                double m = 0.0;
                if (j > 0) m += pv[j - 1] * cur[j - 1];
                if (j + 1 < n) m += (1.0 - pv[j + 1]) * cur[j + 1];
                nxt[j] = m;
            }
            // the opposite parity received no mass
            for (long long jj = 1 - par; jj < static_cast<long long>(n); jj += 2)
                nxt[static_cast<size_t>(jj)] = 0.0;
            std::swap(cur, nxt);
            if (next_snap < times.size() && times[next_snap] == t + 1) {
                snapshot(t + 1);
                ++next_snap;
            }
        }
    }
    return out;
}

LatticeDistribution evolve_exact(const Environment& env, long long T,
                                 long long window_lo, long long window_hi,
                                 long long start, Exec exec) {
    return std::move(
        evolve_exact_snapshots(env, {T}, window_lo, window_hi, start, exec)[0]);
}

// ------------------------------------------------------------- exit_solve

namespace {

// solve tridiagonal (diag 1, lower -lowp[i], upper -upp[i]) v = rhs
// rows i = 0..n-1, boundary values folded by caller
std::vector<double> thomas(const std::vector<double>& lowp,
                           const std::vector<double>& upp,
                           std::vector<double> rhs) {
    size_t n = rhs.size();
    std::vector<double> cp(n);
    cp[0] = -upp[0];
    rhs[0] = rhs[0];
    for (size_t i = 1; i < n; ++i) {
        double m = 1.0 - (-lowp[i]) * cp[i - 1];
        cp[i] = -upp[i] / m;
        rhs[i] = (rhs[i] - (-lowp[i]) * rhs[i - 1]) / m;
    }
    for (size_t i = n - 1; i-- > 0;) rhs[i] -= cp[i] * rhs[i + 1];
    return rhs;
}

} // namespace

ExitStats exit_solve(const Environment& env, long long a, long long b,
                     long long start) {
    if (!(a < start && start < b)) throw Error("need a < start < b");
    ExitStats st;
    st.a = a;
    st.b = b;
    st.start = start;

    const size_t n = static_cast<size_t>(b - a - 1); // interior sites a+1..b-1
    std::vector<double> pv = env.window_values(a + 1, b - 1);
    std::vector<double> qv(n);
    for (size_t i = 0; i < n; ++i) qv[i] = 1.0 - pv[i];

    // h: exit-right probability, h(a)=0, h(b)=1
    {
        std::vector<double> rhs(n, 0.0);
        rhs[n - 1] = pv[n - 1];
        std::vector<double> h = thomas(qv, pv, std::move(rhs));
        st.p_exit_right = h[static_cast<size_t>(start - a - 1)];
    }
    // raw moments: (I-P)m1 = 1; (I-P)m2 = 1 + 2 P m1; (I-P)m3 = 1 + 3P m1 + 3P m2
    auto applyP = [&](const std::vector<double>& v) {
        std::vector<double> out(n, 0.0);
        for (size_t i = 0; i < n; ++i) {
            double s = 0.0;
            if (i + 1 < n) s += pv[i] * v[i + 1];
            if (i > 0) s += qv[i] * v[i - 1];
            out[i] = s;
        }
        return out;
    };
    std::vector<double> m1 = thomas(qv, pv, std::vector<double>(n, 1.0));
    std::vector<double> pm1 = applyP(m1);
    std::vector<double> rhs2(n);
    for (size_t i = 0; i < n; ++i) rhs2[i] = 1.0 + 2.0 * pm1[i];
    std::vector<double> m2 = thomas(qv, pv, std::move(rhs2));
    std::vector<double> pm2 = applyP(m2);
    std::vector<double> rhs3(n);
    for (size_t i = 0; i < n; ++i) rhs3[i] = 1.0 + 3.0 * pm1[i] + 3.0 * pm2[i];
    std::vector<double> m3 = thomas(qv, pv, std::move(rhs3));
    size_t si = static_cast<size_t>(start - a - 1);
    st.m1 = m1[si];
    st.m2 = m2[si];
    st.m3 = m3[si];

    // E[tau; exit right]: (I-P)w = h
    {
        std::vector<double> rhs(n, 0.0);
        rhs[n - 1] = pv[n - 1];
        std::vector<double> h = thomas(qv, pv, std::move(rhs));
        std::vector<double> w = thomas(qv, pv, std::vector<double>(h));
        st.m1_right = w[si];
    }

    // occupation: g = delta_start + P^T g (mass flowing into each site)
    {
        std::vector<double> low(n, 0.0), up(n, 0.0), rhs(n, 0.0);
        // g(k) = delta(k=start) + p(k-1) g(k-1) + q(k+1) g(k+1)
        for (size_t i = 0; i < n; ++i) {
            low[i] = (i > 0) ? pv[i - 1] : 0.0;
            up[i] = (i + 1 < n) ? qv[i + 1] : 0.0;
        }
        rhs[si] = 1.0;
        st.occupation = thomas(low, up, std::move(rhs));
    }

    // r_k = p(k) P(from k+1 hit b before k) + q(k) P(from k-1 hit a before k)
    {
        st.return_escape.assign(n, 0.0);
        // dsr(j) = Sigma(j) - Sigma(anchor) accumulated over the interior
        // P(from k+1 -> b before k) = 1 / sum_{j=k}^{b-1} e^{Sigma(j)-Sigma(k)}
        // Build suffix log-sums of e^{Sigma(j)} relative to each k via a
        // right-to-left sweep in plain arithmetic with rescaling.
        // Simpler: direct per-k accumulation in log space, O(n^2) would be too
        // slow; use the recursive identity S(k) = 1 + e^{Sigma(k+1)-Sigma(k)} S(k+1).
        // where S(k) = sum_{j=k}^{b-1} e^{Sigma(j)-Sigma(k)}.
        std::vector<double> inc(n + 1); // inc[i] = ln q - ln p at site a+1+i... site j increment
        // Sigma(j+1)-Sigma(j) = ln q(j+1) - ln p(j+1), sites a+1..b-1 indexed 0..n-1
        // right sweep for S, left sweep for the mirrored T
        std::vector<double> S(n + 2, 0.0), Tb(n + 2, 0.0);
        // S over j = k..b-1 with k from b-1 down to a: S(b-1)=1 ... but j ranges to b-1,
        // e^{Sigma(j)-Sigma(k)} products of site increments k+1..j
        // S(k) = 1 + r(k+1) S(k+1), r(j) = q(j)/p(j)
        std::vector<double> Sk(n + 1); // Sk[i] = S at lattice point a+i (k = a+i), i=0..n
        Sk[n] = 1.0;                   // k = b-1: only j=b-1 term
        for (size_t i = n; i-- > 0;) {
            double r = qv[i] / pv[i]; // site a+1+i = k+1 when k = a+i
            Sk[i] = 1.0 + r * Sk[i + 1];
            if (!std::isfinite(Sk[i])) Sk[i] = std::numeric_limits<double>::infinity();
        }
        // T(k) = sum_{j=a}^{k-1} e^{Sigma(j)-Sigma(k-1)} : T at k satisfies
        // T(k) = 1 + (p(k-1)/q(k-1)) T(k-1) with T(a+1) = 1
        std::vector<double> Tk(n + 2);
        Tk[1] = 1.0; // k = a+1
        for (size_t i = 2; i <= n + 1; ++i) {
            double rp = pv[i - 2] / qv[i - 2]; // site k-1 = a+i-1 -> index i-2
            Tk[i] = 1.0 + rp * Tk[i - 1];
            if (!std::isfinite(Tk[i])) Tk[i] = std::numeric_limits<double>::infinity();
        }
        for (size_t i = 0; i < n; ++i) {
            // k = a+1+i ; P(from k+1 -> b before k) = 1/S(k), S at lattice k = a+1+i -> Sk[i+1]
            double pr_right = 1.0 / Sk[i + 1];
            double pr_left = 1.0 / Tk[i + 1];
            st.return_escape[i] = pv[i] * pr_right + qv[i] * pr_left;
        }
    }
    return st;
}

// ---------------------------------------------------------- renewal_stats

double RenewalStats::predict_mu(double N) const {
    return e_u * N / mu_hat;
}

double RenewalStats::predict_sigma(double N) const {
    double v = speed();
    double ll = static_cast<double>(L);
    double var_rate = ll * ll - 2.0 * v * e_tau_u + v * v * m2; // Var(U - v tau)
    return std::sqrt(std::max(var_rate, 0.0) * N / mu_hat);
}

RenewalStats renewal_stats(const Environment& env, long long L_override) {
    long long L = L_override > 0 ? L_override : env.period();
    if (env.kind() != Environment::Kind::periodic && L_override <= 0)
        throw Error("renewal_stats needs an exactly periodic environment");
    RenewalStats rs;
    rs.L = L;
    ExitStats st = exit_solve(env, -L, L, 0);
    rs.mu_hat = st.m1;
    rs.v_hat = st.m2 - st.m1 * st.m1;
    rs.p_right = st.p_exit_right;
    rs.e_u = static_cast<double>(L) * (2.0 * st.p_exit_right - 1.0);
    rs.m2 = st.m2;
    // E[tau U] = L (2 E[tau; right] - E[tau])
    rs.e_tau_u = static_cast<double>(L) * (2.0 * st.m1_right - st.m1);

    // E|tau-mu|^3 from the exact absorbed-time distribution
    const size_t n = static_cast<size_t>(2 * L - 1);
    std::vector<double> pv = env.window_values(-L + 1, L - 1);
    std::vector<double> cur(n, 0.0), nxt(n, 0.0);
    cur[static_cast<size_t>(L - 1)] = 1.0;
    double gamma = 0.0;
    double survival = 1.0;
    long long t = 0;
    const long long cap = 1000 * L * L + 100000;
    while (survival > 1e-16 && t < cap) {
        ++t;
        double absorbed = (1.0 - pv[0]) * cur[0] + pv[n - 1] * cur[n - 1];
        for (size_t j = 0; j < n; ++j) {
            double m = 0.0;
            if (j > 0) m += pv[j - 1] * cur[j - 1];
            if (j + 1 < n) m += (1.0 - pv[j + 1]) * cur[j + 1];
            nxt[j] = m;
        }
        std::swap(cur, nxt);
        double d = std::abs(static_cast<double>(t) - rs.mu_hat);
        gamma += absorbed * d * d * d;
        survival -= absorbed;
    }
    rs.gamma_hat = gamma;
    return rs;
}

// ---------------------------------------------------------- simulate_exit

ExitSample simulate_exit(const Environment& env, long long a, long long b,
                         long long start, uint64_t n_traj, uint64_t seed,
                         uint64_t step_cap, Exec exec) {
    if (!(a < start && start < b)) throw Error("need a < start < b");
    if (step_cap == 0) {
        long double w = static_cast<long double>(b - a);
        step_cap = static_cast<uint64_t>(std::min<long double>(
            1e12L, 1e7L + 10000.0L * w * w));
    }
    const long long vlo = a, vhi = b;
    const std::vector<double> pv = env.window_values(vlo, vhi);

    int nthreads = exec == Exec::openmp ? worker_count() : 1;
    std::vector<uint64_t> right_cnt(static_cast<size_t>(nthreads), 0);
    std::vector<uint64_t> tau_sum(static_cast<size_t>(nthreads), 0);
    std::vector<uint64_t> capped(static_cast<size_t>(nthreads), 0);

#pragma omp parallel num_threads(nthreads) if (nthreads > 1)
    {
        int th = omp_get_thread_num();
#pragma omp for schedule(static)
        for (long long i = 0; i < static_cast<long long>(n_traj); ++i) {
            RngStream rng(seed, static_cast<uint64_t>(i));
            long long z = start;
            uint64_t steps = 0;
            while (z > a && z < b && steps < step_cap) {
                double u = rng.next_unit();
                z += (u < pv[static_cast<size_t>(z - vlo)]) ? 1 : -1;
                ++steps;
            }
            if (z >= b) ++right_cnt[static_cast<size_t>(th)];
            if (steps >= step_cap && z > a && z < b) ++capped[static_cast<size_t>(th)];
            tau_sum[static_cast<size_t>(th)] += steps;
        }
    }
    // integer reductions keep the result independent of the worker count
    uint64_t right = 0, cap_total = 0, tsum = 0;
    for (int th = 0; th < nthreads; ++th) {
        right += right_cnt[static_cast<size_t>(th)];
        cap_total += capped[static_cast<size_t>(th)];
        tsum += tau_sum[static_cast<size_t>(th)];
    }
    if (cap_total > 0) throw Error("simulate_exit: step cap reached");
    ExitSample s;
    s.n = n_traj;
    s.p_right_hat = static_cast<double>(right) / static_cast<double>(n_traj);
    s.mean_tau = static_cast<double>(tsum) / static_cast<double>(n_traj);
    return s;
}

} // namespace qpwalk
