#include "qpwalk/analysis.hpp"

#include <algorithm>
#include <cmath>

namespace qpwalk {

// -------------------------------------------------------------- moments

Moments moments(const LatticeDistribution& dist, double leakage_budget) {
    double leak = dist.leakage();
    if (leak > leakage_budget)
        throw Error("leakage " + std::to_string(leak) + " exceeds budget");
    double total = dist.total_mass();
    if (total <= 0.0) throw Error("empty distribution");
    double s1 = 0.0;
    for (size_t i = 0; i < dist.mass.size(); ++i)
        s1 += dist.mass[i] * static_cast<double>(dist.lo + static_cast<long long>(i));
    double mean = s1 / total;
    double s2 = 0.0;
    for (size_t i = 0; i < dist.mass.size(); ++i) {
        double d = static_cast<double>(dist.lo + static_cast<long long>(i)) - mean;
        s2 += dist.mass[i] * d * d;
    }
    return {mean, s2 / total, leak};
}

// --------------------------------------------------------------- ks_phi

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

namespace {

double ks_core(const std::vector<std::pair<long long, double>>& atoms,
               double total, double mu, double sigma) {
    if (sigma <= 0.0) throw Error("sigma must be positive");
    double cum = 0.0, d = 0.0;
    for (const auto& [site, m] : atoms) {
        double z = (static_cast<double>(site) - mu) / sigma;
        double ph = normal_cdf(z);
        d = std::max(d, std::abs(cum / total - ph));
        cum += m;
        d = std::max(d, std::abs(cum / total - ph));
    }
    return d;
}

} // namespace

double ks_phi(const LatticeDistribution& dist, double mu, double sigma) {
    std::vector<std::pair<long long, double>> atoms;
    atoms.reserve(dist.mass.size());
    for (size_t i = 0; i < dist.mass.size(); ++i)
        if (dist.mass[i] > 0.0)
            atoms.emplace_back(dist.lo + static_cast<long long>(i), dist.mass[i]);
    if (atoms.empty()) throw Error("empty distribution");
    return ks_core(atoms, dist.total_mass(), mu, sigma);
}

double ks_phi_hist(const std::vector<uint64_t>& counts, long long lo, double mu,
                   double sigma) {
    std::vector<std::pair<long long, double>> atoms;
    double total = 0.0;
    for (size_t i = 0; i < counts.size(); ++i) {
        if (counts[i]) {
            atoms.emplace_back(lo + static_cast<long long>(i),
                               static_cast<double>(counts[i]));
            total += static_cast<double>(counts[i]);
        }
    }
    if (atoms.empty()) throw Error("empty histogram");
    return ks_core(atoms, total, mu, sigma);
}

// ----------------------------------------------------- scenario verdicts

nlohmann::json ScenarioVerdict::to_json() const {
    return {{"kind", kind}, {"T", T}, {"pass", pass}, {"leakage", leakage},
            {"details", details}};
}

namespace {

ScenarioVerdict localization_verdict(const Environment& env, long long N,
                                     const ScenarioConfig& cfg) {
    ScenarioVerdict v;
    v.kind = "localization";
    double t_formula = std::exp(std::sqrt(static_cast<double>(N)) / 4.0);
    long long T = cfg.T_override > 0
                      ? cfg.T_override
                      : static_cast<long long>(std::ceil(t_formula));
    if (T > 100000000LL) throw Error("localization horizon too large for desk scale");
    v.T = T;
    double lnT = std::log(static_cast<double>(T));
    double radius = 16.0 * lnT * lnT;
    long long wall = static_cast<long long>(std::floor(radius));
    double tail, var;
    if (cfg.engine == "mc") {
        SimulateResult sim = simulate(env, T, cfg.n_traj, cfg.seed,
                                      RecordMode::max_excursion);
        uint64_t over = 0;
        for (size_t i = static_cast<size_t>(wall) + 1; i < sim.max_abs_count.size(); ++i)
            over += sim.max_abs_count[i];
        tail = static_cast<double>(over) / static_cast<double>(cfg.n_traj);
        var = sim.variance;
    } else {
        LatticeDistribution walled = evolve_exact(env, T, -wall, wall, 0);
        tail = walled.leakage(); // P(max |Z_t| > radius), walls absorb just past it
        LatticeDistribution free = evolve_exact(env, T, -T - 1, T + 1, 0);
        var = moments(free, cfg.leakage_budget).variance;
        v.leakage = free.leakage();
    }
    double tail_bound = std::pow(static_cast<double>(T), -2.0);
    double var_bound = 300.0 * lnT * lnT * lnT * lnT;
    v.pass = tail < tail_bound && var < var_bound;
    v.details = {{"N", N},
                 {"T_formula", "ceil(exp(sqrt(N)/4))"},
                 {"radius", radius},
                 {"tail_prob", tail},
                 {"tail_bound", tail_bound},
                 {"variance", var},
                 {"variance_bound", var_bound},
                 {"engine", cfg.engine}};
    return v;
}

ScenarioVerdict one_sided_verdict(const Environment& env, long long N,
                                  const ScenarioConfig& cfg) {
    ScenarioVerdict v;
    v.kind = "one-sided";
    long long T = cfg.T_override > 0 ? cfg.T_override : N;
    v.T = T;
    RenewalStats rs = renewal_stats(env);
    double mu = rs.predict_mu(static_cast<double>(T));
    double sigma = rs.predict_sigma(static_cast<double>(T));
    LatticeDistribution dist = evolve_exact(env, T, -T - 1, T + 1, 0);
    v.leakage = dist.leakage();
    double ks = ks_phi(dist, mu, sigma);
    double lnT = std::log(static_cast<double>(T));
    bool drift_ok = mu > std::pow(static_cast<double>(T), 1.0 - cfg.epsilon);
    bool sigma_ok = std::abs(std::log(sigma) / lnT - 0.5) < cfg.epsilon;
    v.pass = ks < cfg.ks_threshold && drift_ok && sigma_ok;
    v.details = {{"N", N},
                 {"mu_predicted", mu},
                 {"sigma_predicted", sigma},
                 {"renewal", {{"mu_hat", rs.mu_hat}, {"v_hat", rs.v_hat},
                              {"gamma_hat", rs.gamma_hat}, {"p_right", rs.p_right}}},
                 {"ks", ks},
                 {"ks_threshold", cfg.ks_threshold},
                 {"epsilon", cfg.epsilon},
                 {"mu_exceeds_T_pow", drift_ok},
                 {"sigma_exponent_ok", sigma_ok}};
    return v;
}

ScenarioVerdict two_sided_verdict(const Environment& env, long long N,
                                  const ScenarioConfig& cfg) {
    if (!cfg.witness) throw Error("two-sided verdict needs criterion witnesses");
    const CriterionWitness& w = *cfg.witness;
    ScenarioVerdict v;
    v.kind = "two-sided";
    long long T = cfg.T_override > 0 ? cfg.T_override : 5 * N * N;
    v.T = T;
    auto idx = [&](double frac) {
        return static_cast<long long>(std::llround(frac * static_cast<double>(N)));
    };
    long long pad = std::max<long long>(16, N / 10);
    long long lo = -idx(w.wpp) - pad, hi = idx(w.wp) + pad;
    LatticeDistribution dist = evolve_exact(env, T, lo, hi, 0);
    v.leakage = dist.leakage();
    if (v.leakage > cfg.leakage_budget)
        throw Error("two-sided leakage above budget");
    double mass_right = dist.mass_in(idx(w.wm), idx(w.wp));
    double mass_left = dist.mass_in(-idx(w.wpp), -idx(w.wpm));
    double split_right = hit_prob(env, -idx(w.vp), 0, idx(w.v));
    double split_left = 1.0 - split_right;
    bool masses_ok = mass_right > cfg.mass_threshold && mass_left > cfg.mass_threshold;
    bool split_ok = split_right >= 0.11 && split_right <= 0.89 &&
                    split_left >= 0.11 && split_left <= 0.89;
    v.pass = masses_ok && split_ok;
    v.details = {{"N", N},
                 {"T_formula", "5 N^2 (desk stand-in for N^5)"},
                 {"mass_right", mass_right},
                 {"mass_left", mass_left},
                 {"mass_threshold", cfg.mass_threshold},
                 {"split_right", split_right},
                 {"split_left", split_left},
                 {"split_band", {0.11, 0.89}},
                 {"windows", {{"right", {idx(w.wm), idx(w.wp)}},
                              {"left", {-idx(w.wpp), -idx(w.wpm)}}}}};
    return v;
}

ScenarioVerdict diophantine_clt_verdict(const Environment& env, long long N,
                                        const ScenarioConfig& cfg) {
    ScenarioVerdict v;
    v.kind = "diophantine-clt";
    long long T0 = cfg.T_override > 0 ? cfg.T_override : N;
    std::vector<long long> times{T0, 2 * T0, 4 * T0, 8 * T0};
    v.T = times.back();
    std::vector<LatticeDistribution> snaps =
        evolve_exact_snapshots(env, times, -times.back() - 1, times.back() + 1, 0);
    double sigma_n =
        std::sqrt(moments(snaps[0], cfg.leakage_budget).variance /
                  static_cast<double>(T0));
    nlohmann::json ks_list = nlohmann::json::array();
    double ks_max = 0.0;
    for (size_t i = 0; i < snaps.size(); ++i) {
        double t = static_cast<double>(times[i]);
        double ks = ks_phi(snaps[i], 0.0, sigma_n * std::sqrt(t));
        ks_max = std::max(ks_max, ks);
        ks_list.push_back({{"t", times[i]}, {"ks", ks}});
    }
    v.leakage = snaps.back().leakage();
    v.pass = ks_max < cfg.ks_threshold;
    v.details = {{"N", N},
                 {"sigma_n", sigma_n},
                 {"grid", ks_list},
                 {"ks_max", ks_max},
                 {"ks_threshold", cfg.ks_threshold}};
    return v;
}

} // namespace

ScenarioVerdict scenario_verdict(const std::string& kind, const Environment& env,
                                 long long N, const ScenarioConfig& cfg) {
    if (kind == "localization") return localization_verdict(env, N, cfg);
    if (kind == "one-sided") return one_sided_verdict(env, N, cfg);
    if (kind == "two-sided") return two_sided_verdict(env, N, cfg);
    if (kind == "diophantine-clt") return diophantine_clt_verdict(env, N, cfg);
    throw Error("unknown scenario kind: " + kind);
}

// ------------------------------------------------ asymmetric quantities

namespace {

struct LambdaOrbit {
    const CircleMap* p;
    double alpha;
    double lam(double y) const {
        double pv = p->eval(y);
        return (1.0 - pv) / pv;
    }
};

struct TailCert {
    double lam_sup;    // sup lambda over a grid
    double block_max;  // max over start phases of a W-step product
    int W;
    // log of the tail constant C with tail <= term * C
    bool geometric() const { return lam_sup < 1.0 || block_max < 0.95; }
    double tail_factor() const {
        if (lam_sup < 1.0) return lam_sup / (1.0 - lam_sup);
        double growth = std::pow(std::max(1.0, lam_sup), W);
        return static_cast<double>(W) * growth / (1.0 - block_max);
    }
};

TailCert certify_tail(const LambdaOrbit& lo, bool backward) {
    TailCert c;
    c.W = 64;
    const int grid = 2048;
    double lam_sup = 0.0;
    for (int i = 0; i < grid; ++i)
        lam_sup = std::max(lam_sup, lo.lam((i + 0.5) / grid));
    c.lam_sup = lam_sup * (1.0 + 1e-9);
    double bmax = 0.0;
    double step = backward ? -lo.alpha : lo.alpha;
    for (int i = 0; i < grid; ++i) {
        double y = (i + 0.5) / grid;
        double prod = 1.0;
        for (int j = 0; j < c.W; ++j) {
            prod *= lo.lam(y);
            y += step;
        }
        bmax = std::max(bmax, prod);
    }
    c.block_max = bmax * (1.0 + 1e-6);
    if (!c.geometric())
        throw Error("tail not certifiably geometric (environment too close to symmetric)");
    return c;
}

// u(x) = 1 + 2 sum_{k>=0} prod_{j=0}^{k} lambda(x - j alpha)
double u_series(const LambdaOrbit& lo, const TailCert& cert, double x, double tol,
                double* tail_out) {
    double term = 1.0, sum = 0.0;
    double y = x;
    double cfac = cert.tail_factor();
    long k = 0;
    const long cap = 10000000L;
    while (k < cap) {
        term *= lo.lam(y);
        sum += term;
        if (term * cfac < 0.5 * tol) break;
        y -= lo.alpha;
        ++k;
    }
    if (k >= cap) throw Error("u series truncation cap reached");
    if (tail_out) *tail_out = term * cfac;
    return 1.0 + 2.0 * sum;
}

} // namespace

DriftPoint u_and_drift(const CircleMap& p, const Frequency& alpha, double x,
                       double t, double tol) {
    double defect = symmetry_defect(p);
    if (!(defect > 0.0))
        throw Error("u_and_drift needs a right-drifting environment "
                    "(symmetry defect > 0); reflect the environment first");
    LambdaOrbit lo{&p, alpha.value()};
    TailCert cert = certify_tail(lo, true);

    DriftPoint out;
    out.u = u_series(lo, cert, x, tol, &out.tail_bound);

    // forward recursion G(y) = lambda(y) (1 + G(y - alpha))
    double g = 0.5 * (out.u - 1.0);
    double acc = out.u;
    long long b = 0;
    double y = x;
    const long long cap = 4000000000LL;
    while (acc < t && b < cap) {
        ++b;
        y += lo.alpha;
        if (y >= 1.0) y -= 1.0;
        g = lo.lam(y) * (1.0 + g);
        acc += 1.0 + 2.0 * g;
    }
    if (b >= cap) throw Error("drift accumulation cap reached");
    out.b_t = b;
    return out;
}

DriftProfile drift_profile(const CircleMap& p, const Frequency& alpha, int grid,
                           double t, double tol, Exec exec) {
    if (grid < 1) throw Error("grid must be >= 1");
    double defect = symmetry_defect(p);
    if (!(defect > 0.0))
        throw Error("drift_profile needs a right-drifting environment");
    LambdaOrbit lo{&p, alpha.value()};
    TailCert cert = certify_tail(lo, true);

    DriftProfile prof;
    prof.x.resize(static_cast<size_t>(grid));
    prof.u.resize(static_cast<size_t>(grid));
    prof.b_t.resize(static_cast<size_t>(grid));
    int nthreads = exec == Exec::openmp ? worker_count() : 1;
    bool failed = false;
#pragma omp parallel for schedule(static) num_threads(nthreads) if (nthreads > 1)
    for (int i = 0; i < grid; ++i) {
        try {
            double x = static_cast<double>(i) / grid;
            double u0 = u_series(lo, cert, x, tol, nullptr);
            double g = 0.5 * (u0 - 1.0);
            double acc = u0;
            long long b = 0;
            double y = x;
            while (acc < t) { // u >= 1, so at most t iterations
                ++b;
                y += lo.alpha;
                if (y >= 1.0) y -= 1.0;
                g = lo.lam(y) * (1.0 + g);
                acc += 1.0 + 2.0 * g;
            }
            prof.x[static_cast<size_t>(i)] = x;
            prof.u[static_cast<size_t>(i)] = u0;
            prof.b_t[static_cast<size_t>(i)] = b;
        } catch (const std::exception&) {
#pragma omp atomic write
            failed = true;
        }
    }
    if (failed) throw Error("drift_profile: series truncation failed at a grid point");
    return prof;
}

StationaryDensity stationary_density(const CircleMap& p, const Frequency& alpha,
                                     int grid, double tol, Exec exec) {
    if (grid < 1) throw Error("grid must be >= 1");
    double defect = symmetry_defect(p);
    if (!(defect > 0.0))
        throw Error("stationary_density needs int ln p > int ln q; reflect first");
    LambdaOrbit lo{&p, alpha.value()};
    TailCert cert = certify_tail(lo, false);
    double cfac = cert.tail_factor();

    auto rho_at = [&](double y) {
        // rho(y) = (1/p(y)) sum_{k>=0} prod_{j=1}^{k} lambda(y + j alpha)
        double term = 1.0, sum = 1.0;
        double z = y;
        long k = 0;
        const long cap = 10000000L;
        while (k < cap) {
            z += lo.alpha;
            if (z >= 1.0) z -= 1.0;
            term *= lo.lam(z);
            sum += term;
            if (term * cfac < 0.5 * tol) break;
            ++k;
        }
        if (k >= cap) throw Error("rho series truncation cap reached");
        return sum / p.eval(y);
    };

    StationaryDensity sd;
    sd.x.resize(static_cast<size_t>(grid));
    sd.rho.resize(static_cast<size_t>(grid));
    std::vector<double> eqim(static_cast<size_t>(grid)), flux(static_cast<size_t>(grid));
    double a = lo.alpha;
    int nthreads = exec == Exec::openmp ? worker_count() : 1;
    bool failed = false;
#pragma omp parallel for schedule(static) num_threads(nthreads) if (nthreads > 1)
    for (int i = 0; i < grid; ++i) {
        try {
            double x = static_cast<double>(i) / grid;
            double r0 = rho_at(x);
            double rm = rho_at(x - a);
            double rp = rho_at(x + a);
            sd.x[static_cast<size_t>(i)] = x;
            sd.rho[static_cast<size_t>(i)] = r0;
            eqim[static_cast<size_t>(i)] =
                std::abs(r0 - p.eval(x - a) * rm - (1.0 - p.eval(x + a)) * rp);
            flux[static_cast<size_t>(i)] =
                std::abs(p.eval(x) * r0 - (1.0 - p.eval(x + a)) * rp - 1.0);
        } catch (const std::exception&) {
#pragma omp atomic write
            failed = true;
        }
    }
    if (failed) throw Error("stationary_density: series truncation failed");
    sd.eqim_residual = *std::max_element(eqim.begin(), eqim.end());
    sd.flux_defect = *std::max_element(flux.begin(), flux.end());
    sd.tail_bound = tol;
    return sd;
}

} // namespace qpwalk
