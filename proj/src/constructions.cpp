#include "qpwalk/constructions.hpp"
#include "qpwalk/rng.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace qpwalk {

namespace {

double frac(double x) {
    double y = x - std::floor(x);
    return (y >= 1.0) ? y - 1.0 : y;
}

double circle_kappa(const CircleMap& f) {
    double kappa = 0.5;
    const int grid = 1 << 15;
    for (int i = 0; i < grid; ++i) {
        double v = f.eval(static_cast<double>(i) / grid);
        if (!(v > 0.0 && v < 1.0)) throw EllipticityError("map leaves (0,1)");
        kappa = std::min(kappa, std::min(v, 1.0 - v));
    }
    for (double b : f.breakpoints())
        for (double d : {-1e-9, 0.0, 1e-9}) {
            double v = f.eval(b + d);
            if (!(v > 0.0 && v < 1.0)) throw EllipticityError("map leaves (0,1)");
            kappa = std::min(kappa, std::min(v, 1.0 - v));
        }
    return kappa;
}

} // namespace

// ---------------------------------------------------------------- tilde_e

CircleMap tilde_e(int n, double delta) {
    if (n < 5)
        throw Error("tilde_e needs n >= 5 (connector width 1/n^2 must fit the "
                    "1/8-wide sine bands)");
    if (std::abs(delta) > 1.0) throw Error("|delta| must be <= 1");
    const double w = 1.0 / (static_cast<double>(n) * n);
    const double fp = delta >= 0.0 ? 1.0 + delta : 1.0; // positive part scale
    const double fm = delta < 0.0 ? 1.0 - delta : 1.0;  // negative part scale
    const double sw = std::sin(8.0 * M_PI * w);

    using P = CircleMap::Piece;
    using K = P::Kind;
    std::vector<P> ps;
    auto step = [&](double x0, double x1, double a, double b) {
        ps.push_back(P{K::smoothstep, x0, x1, a, b});
    };
    auto band = [&](double x0, double x1, double amp) {
        ps.push_back(P{K::sine8, x0, x1, amp, 0.0});
    };
    // pattern on [-1/2, 1/2); every connector has one endpoint exactly 0, and
    // the map is 0 and flat at +-3/8 (the connectors split there)
    step(-0.5, -0.5 + w, 0.0, sw * fp);
    band(-0.5 + w, -0.375 - w, fp);
    step(-0.375 - w, -0.375, sw * fp, 0.0);
    step(-0.375, -0.375 + w, 0.0, -sw * fm);
    band(-0.375 + w, -0.25 - w, fm);
    step(-0.25 - w, -0.25, -sw * fm, 0.0);
    ps.push_back(P{K::constant, -0.25, 0.25, 0.0, 0.0});
    step(0.25, 0.25 + w, 0.0, sw * fp);
    band(0.25 + w, 0.375 - w, fp);
    step(0.375 - w, 0.375, sw * fp, 0.0);
    step(0.375, 0.375 + w, 0.0, -sw * fm);
    band(0.375 + w, 0.5 - w, fm);
    step(0.5 - w, 0.5, -sw * fm, 0.0);
    return CircleMap::piecewise(std::move(ps));
}

// ---------------------------------------------------------- IntervalFamily

double IntervalFamily::measure() const {
    double m = 0.0;
    for (const auto& [lo, hi] : base) m += hi - lo;
    return m;
}

bool IntervalFamily::contains(double x) const {
    double f = frac(static_cast<double>(q) * x);
    for (const auto& [lo, hi] : base)
        if ((f >= lo && f < hi) || (f + 1.0 >= lo && f + 1.0 < hi)) return true;
    return false;
}

// ------------------------------------------------------------ balance_delta

BalanceResult balance_delta(const CircleMap& p_bar, int n, long long q_n,
                            double s) {
    if (n < 5) throw Error("n must be >= 5");
    if (q_n < 1) throw Error("q_n must be >= 1");
    const double amp = std::pow(static_cast<double>(q_n), -s);
    const double margin = circle_kappa(p_bar);
    if (amp * (1.0 + 1.0 / n) >= margin) {
        std::ostringstream os;
        os << "perturbation amplitude " << amp * (1.0 + 1.0 / n)
           << " exceeds the ellipticity margin " << margin << " of p_bar";
        throw Error(os.str());
    }

    auto defect_at = [&](double delta) {
        CircleMap pn = p_bar + tilde_e(n, delta).dilated(q_n).scaled(amp);
        return symmetry_defect(pn, 1e-12);
    };

    double lo = -1.0 / n, hi = 1.0 / n;
    double flo = defect_at(lo), fhi = defect_at(hi);
    if (!(flo < 0.0 && fhi > 0.0)) {
        std::ostringstream os;
        os << "no sign change on the delta bracket: I(" << lo << ") = " << flo
           << ", I(" << hi << ") = " << fhi;
        throw Error(os.str());
    }

    BalanceResult res{0.0, 0.0, 0};
    double fmid = 0.0;
    for (int it = 0; it < 80; ++it) {
        double mid = 0.5 * (lo + hi);
        fmid = defect_at(mid);
        ++res.iterations;
        // the defect is increasing in delta (the ll3/ll4 mechanism)
        if (fmid < flo - 1e-13 || fmid > fhi + 1e-13)
            throw Error("defect not monotone in delta");
        res.delta = mid;
        res.defect = fmid;
        if (std::abs(fmid) < 1e-11) return res;
        if (fmid > 0.0) {
            hi = mid;
            fhi = fmid;
        } else {
            lo = mid;
            flo = fmid;
        }
        if (hi - lo < 1e-17) break;
    }
    if (std::abs(fmid) >= 1e-11)
        throw Error("delta bisection failed to reach |defect| < 1e-11");
    return res;
}

// -------------------------------------------------------------- perturbed_p

PerturbationPlan perturbed_p(const CircleMap& p_bar, int n, long long q_n,
                             double s) {
    PerturbationPlan plan;
    plan.p_bar = p_bar;
    plan.n = n;
    plan.q_n = q_n;
    plan.s = s;
    BalanceResult br = balance_delta(p_bar, n, q_n, s);
    plan.delta_n = br.delta;
    plan.defect = br.defect;
    const double amp = std::pow(static_cast<double>(q_n), -s);
    plan.e_n = tilde_e(n, br.delta).dilated(q_n).scaled(amp);
    plan.p_n = p_bar + plan.e_n;
    plan.kappa = circle_kappa(plan.p_n);

    const double r = 1.0 / 200.0;
    plan.U1 = IntervalFamily{{{0.375 - r, 0.375 + r}, {0.625 - r, 0.625 + r}}, q_n};
    plan.U2 = IntervalFamily{{{0.3125 - r, 0.3125 + r}, {0.5625 - r, 0.5625 + r}}, q_n};
    plan.U3 = IntervalFamily{{{1.0 - r, 1.0 + r}}, q_n};
    return plan;
}

nlohmann::json PerturbationPlan::to_json() const {
    return {{"p_bar", p_bar.to_json()}, {"n", n}, {"q_n", q_n}, {"s", s},
            {"delta_n", delta_n}};
}

PerturbationPlan PerturbationPlan::from_json(const nlohmann::json& j) {
    PerturbationPlan plan;
    plan.p_bar = CircleMap::from_json(j.at("p_bar"));
    plan.n = j.at("n").get<int>();
    plan.q_n = j.at("q_n").get<long long>();
    plan.s = j.at("s").get<double>();
    plan.delta_n = j.at("delta_n").get<double>();
    const double amp = std::pow(static_cast<double>(plan.q_n), -plan.s);
    plan.e_n = tilde_e(plan.n, plan.delta_n).dilated(plan.q_n).scaled(amp);
    plan.p_n = plan.p_bar + plan.e_n;
    plan.defect = symmetry_defect(plan.p_n, 1e-12);
    plan.kappa = circle_kappa(plan.p_n);
    const double r = 1.0 / 200.0;
    plan.U1 = IntervalFamily{{{0.375 - r, 0.375 + r}, {0.625 - r, 0.625 + r}}, plan.q_n};
    plan.U2 = IntervalFamily{{{0.3125 - r, 0.3125 + r}, {0.5625 - r, 0.5625 + r}}, plan.q_n};
    plan.U3 = IntervalFamily{{{1.0 - r, 1.0 + r}}, plan.q_n};
    return plan;
}

// ---------------------------------------------------------- coboundary_from

CoboundaryResult coboundary_from(const CircleMap& p, const Frequency& alpha,
                                 int degree, CohomMode mode, int depth) {
    circle_kappa(p); // validates 0 < p < 1
    auto h_fn = [&p](double x) {
        double v = p.eval(x);
        return std::log1p(-v) - std::log(v); // ln(q/p)
    };
    CircleMap h = fourier_truncate(h_fn, degree);
    if (mode == CohomMode::symmetric) {
        std::vector<double> c = h.trig_coeffs();
        if (std::abs(c[0]) > 1e-9)
            throw Error("symmetric coboundary mode needs a symmetric p "
                        "(mean of ln(q/p) is " + std::to_string(c[0]) + ")");
        c[0] = 0.0;
        h = CircleMap::trig(std::move(c));
    }
    CohomSolution sol = solve_cohomological(h, alpha, mode, depth);

    CoboundaryResult res;
    res.p_bar = CircleMap::logistic_of(h); // ln(q_bar/p_bar) = h exactly
    res.psi = sol.psi;
    res.c = sol.c;
    res.residual_sup = sol.residual_sup;
    double mx = -1e300, mn = 1e300;
    for (int i = 0; i < 4096; ++i) {
        double v = sol.psi.eval(static_cast<double>(i) / 4096.0);
        mx = std::max(mx, v);
        mn = std::min(mn, v);
    }
    res.A = mx - mn;
    return res;
}

// ---------------------------------------------------------- g_perturbation

GnPerturbation g_perturbation(int n, long long q_n, double s) {
    if (n < 2) throw Error("n must be >= 2");
    if (q_n < 1) throw Error("q_n must be >= 1");
    GnPerturbation gp;
    gp.q_n = q_n;
    gp.plateau = std::pow(static_cast<double>(q_n), -(s + 1.0));
    using P = CircleMap::Piece;
    using K = P::Kind;
    std::vector<P> ps{
        P{K::constant, 0.0, 0.85, 0.0, 0.0},
        P{K::smoothstep, 0.85, 0.86, 0.0, gp.plateau},
        P{K::constant, 0.86, 0.99, gp.plateau, 0.0},
        P{K::smoothstep, 0.99, 1.0, gp.plateau, 0.0},
    };
    gp.g = CircleMap::piecewise(std::move(ps)).dilated(q_n);
    gp.J = IntervalFamily{{{0.0, 0.84}}, q_n};
    gp.J_prime = IntervalFamily{{{0.86, 0.98}}, q_n};
    return gp;
}

// -------------------------------------------------------------- generic_env

namespace {

// log |M(+-inf)| for an environment with constant outward-drifting tails
// beyond [-K2, K2] (right p = 2/3, left p = 1/3)
std::pair<double, double> log_m_limits(const Environment& env, long long K2) {
    std::vector<double> sig(static_cast<size_t>(2 * K2 + 1));
    {
        std::vector<double> pv = env.window_values(-K2, K2);
        auto site = [&](long long j) { return pv[static_cast<size_t>(j + K2)]; };
        double acc = 0.0;
        sig[static_cast<size_t>(K2)] = 0.0;
        for (long long nn = 1; nn <= K2; ++nn) {
            double p = site(nn);
            acc += std::log1p(-p) - std::log(p);
            sig[static_cast<size_t>(nn + K2)] = acc;
        }
        acc = 0.0;
        for (long long nn = -1; nn >= -K2; --nn) {
            double p = site(nn + 1);
            acc += std::log(p) - std::log1p(-p);
            sig[static_cast<size_t>(nn + K2)] = acc;
        }
    }
    auto s = [&](long long nn) { return sig[static_cast<size_t>(nn + K2)]; };
    // right tail: e^{Sigma(K2+m)} = e^{Sigma(K2)} 2^{-m}, sums to e^{Sigma(K2)}
    double mp = -std::numeric_limits<double>::infinity();
    for (long long j = 0; j <= K2; ++j) mp = log_add_exp(mp, s(j));
    mp = log_add_exp(mp, s(K2));
    // left tail: the first step off the core uses site -K2 itself, so
    // e^{Sigma(-K2-1)} = e^{Sigma(-K2)} p(-K2)/q(-K2) and the geometric decay
    // starts afterwards; with a fair site at -K2 the tail sums to
    // 2 p(-K2)/q(-K2) e^{Sigma(-K2)}
    double mm = -std::numeric_limits<double>::infinity();
    for (long long j = -K2; j <= -1; ++j) mm = log_add_exp(mm, s(j));
    double pk = env.p(-K2);
    mm = log_add_exp(mm, s(-K2) + std::log(2.0 * pk / (1.0 - pk)));
    return {mp, mm};
}

} // namespace

GenericEnvResult generic_env(const std::string& kind, long long K, long long K1,
                             long long K2, double eps, uint64_t base_seed) {
    if (K < 0) throw Error("K must be >= 0");
    if (kind == "localization") {
        std::vector<double> core(static_cast<size_t>(2 * K + 1), 0.5);
        return {Environment::procedural(std::move(core), -K, 2.0 / 3.0, 1.0 / 3.0),
                1.0, true};
    }
    if (kind == "clt") {
        std::vector<double> core(static_cast<size_t>(2 * K + 1), 0.5);
        core.front() = 2.0 / 3.0;
        core.back() = 2.0 / 3.0;
        return {Environment::procedural(std::move(core), -K, 2.0 / 3.0, 2.0 / 3.0),
                1.0, true};
    }
    if (kind != "two-sided") throw Error("unknown generic env kind: " + kind);
    if (!(K < K1 && K1 < K2)) throw Error("need K < K1 < K2");

    std::vector<double> core(static_cast<size_t>(2 * K2 + 1), 0.5);
    auto at = [&](long long j) -> double& {
        return core[static_cast<size_t>(j + K2)];
    };
    for (long long j = -K; j <= K; ++j) {
        RngStream rng(base_seed, static_cast<uint64_t>(j + K2));
        at(j) = 0.47 + 0.06 * rng.next_unit();
    }
    const long long free_site = K + 1;

    auto ratio_at = [&](double pstar) {
        at(free_site) = pstar;
        Environment env = Environment::procedural(core, -K2, 1.0 / 3.0, 2.0 / 3.0);
        auto [mp, mm] = log_m_limits(env, K2);
        return mm - mp; // log |M-|/|M+|
    };

    double lo = 0.1, hi = 0.9;
    double flo = ratio_at(lo), fhi = ratio_at(hi);
    double best_p = flo * flo < fhi * fhi ? lo : hi;
    bool balanced = false;
    if (flo <= 0.0 && fhi >= 0.0) {
        for (int it = 0; it < 200; ++it) {
            double mid = 0.5 * (lo + hi);
            double fm = ratio_at(mid);
            best_p = mid;
            if (std::abs(fm) < 1e-9) break;
            if (fm < 0.0) lo = mid; else hi = mid;
        }
        balanced = true;
    }
    double log_ratio = ratio_at(best_p);
    Environment env = Environment::procedural(core, -K2, 1.0 / 3.0, 2.0 / 3.0);
    double ratio = std::exp(log_ratio);
    balanced = balanced && std::abs(ratio - 1.0) <= eps;
    return {std::move(env), ratio, balanced};
}

// ------------------------------------------------------------ presets

namespace {

// exact N_n = q_n * floor(1 / (q_n eta_n))
long long exact_N(const Frequency& f, int idx) {
    BigRat eta = f.eta(idx);
    BigInt num = boost::multiprecision::numerator(eta);
    BigInt den = boost::multiprecision::denominator(eta);
    BigInt fl = den / (f.q(idx) * num);
    return (fl * f.q(idx)).convert_to<long long>();
}

ScenarioPreset c3_style_preset(const nlohmann::json& config) {
    long long target_N = config.value("N", 2000LL);
    double s = config.value("s", 1.0);
    int n_e = config.value("n", 8);
    double base_amp = config.value("base_amp", 0.05);
    int base_deg = config.value("base_deg", 8);

    // prefix [3, 8] -> q_2 = 25; choose a_3 so that N_2 = target exactly
    const long long q2 = 25;
    if (target_N % q2 != 0) throw Error("two-sided preset needs 25 | N");
    long long k_target = target_N / q2;
    std::optional<Frequency> alpha;
    for (long long a3 = std::max<long long>(2, k_target - 3); a3 <= k_target + 3; ++a3) {
        Frequency f = Frequency::from_quotients(
            {BigInt(3), BigInt(8), BigInt(a3), BigInt(50), BigInt(60)});
        if (exact_N(f, 2) == target_N && f.eta_sign(2) > 0) {
            alpha = std::move(f);
            break;
        }
    }
    if (!alpha) throw Error("no quotient schedule hits the requested N exactly");

    CoboundaryResult cb = coboundary_from(
        CircleMap::harmonic(1, base_amp, 0.0, 0.5), *alpha, base_deg,
        CohomMode::symmetric);
    PerturbationPlan plan = perturbed_p(cb.p_bar, n_e, q2, s);

    ScenarioPreset ps;
    ps.kind = "two-sided";
    ps.env = Environment::quasiperiodic(plan.p_n, *alpha, BigRat(0));
    ps.base_env = Environment::quasiperiodic(cb.p_bar, *alpha, BigRat(0));
    ps.N = target_N;
    CriterionWitness w;
    w.A = cb.A + 0.5;
    w.Q = q2;
    w.u = 0.25;
    w.v = 0.375;
    w.wm = 0.26;
    w.wp = 0.49;
    w.up = 0.25;
    w.vp = 0.375;
    w.wpm = 0.26;
    w.wpp = 0.49;
    ps.witness = w;
    ps.plan = plan;
    ps.p_map = plan.p_n;
    ps.alpha = *alpha;
    ps.meta = {{"q_n", q2}, {"s", s}, {"delta_n", plan.delta_n},
               {"coboundary_A", cb.A}, {"epsilon", 0.12},
               {"eta_2", to_double(alpha->eta(2))}};
    return ps;
}

ScenarioPreset asymmetric_preset(const nlohmann::json& config) {
    long long t = config.value("t", 10000LL);
    double s = config.value("s", 1.0);
    int n_e = config.value("n", 8);
    double amp = config.value("base_amp", 0.05);
    int deg = config.value("base_deg", 6);
    long long a3 = config.value("a3", 30011LL);

    Frequency alpha = Frequency::from_quotients(
        {BigInt(3), BigInt(8), BigInt(a3), BigInt(50), BigInt(60)});
    const long long q2 = 25;

    CircleMap raw = CircleMap::harmonic(1, amp, 0.0, 2.0 / 3.0);
    CoboundaryResult cb = coboundary_from(raw, alpha, deg, CohomMode::asymmetric);
    GnPerturbation gn = g_perturbation(n_e, q2, s);
    CircleMap p_pert = cb.p_bar + gn.g;

    ScenarioPreset ps;
    ps.kind = "asymmetric-drift";
    ps.env = Environment::quasiperiodic(p_pert, alpha, BigRat(0));
    ps.base_env = Environment::quasiperiodic(cb.p_bar, alpha, BigRat(0));
    ps.N = t;
    ps.gn = gn;
    ps.p_map = p_pert;
    ps.alpha = alpha;
    ps.meta = {{"q_n", q2}, {"s", s}, {"plateau", gn.plateau},
               {"c", cb.c}, {"t", t},
               {"eta_2", to_double(alpha.eta(2))},
               {"p_bar", cb.p_bar.to_json()}};
    return ps;
}

} // namespace

ScenarioPreset build_preset(const std::string& kind, const nlohmann::json& config) {
    if (kind == "localization") {
        long long K = config.value("K", 0LL);
        ScenarioPreset ps;
        ps.kind = kind;
        ps.env = generic_env("localization", K).env;
        ps.N = config.value("N", 64LL);
        ps.meta = {{"K", K}};
        return ps;
    }
    if (kind == "one-sided") {
        std::vector<double> vals =
            config.value("values", std::vector<double>{0.7, 0.45});
        ScenarioPreset ps;
        ps.kind = kind;
        ps.env = Environment::periodic(vals);
        ps.N = config.value("N", 10000LL);
        ps.meta = {{"values", vals}};
        return ps;
    }
    if (kind == "two-sided" || kind == "c3") return c3_style_preset(config);
    if (kind == "asymmetric-drift") return asymmetric_preset(config);
    if (kind == "diophantine-window") {
        long long N = config.value("N", 4096LL);
        double amp = config.value("base_amp", 0.1);
        int deg = config.value("base_deg", 8);
        Frequency alpha = Frequency::golden(config.value("depth", 40));
        CoboundaryResult cb = coboundary_from(
            CircleMap::harmonic(1, amp, 0.0, 0.5), alpha, deg,
            CohomMode::symmetric);
        ScenarioPreset ps;
        ps.kind = kind;
        ps.env = Environment::quasiperiodic(cb.p_bar, alpha, BigRat(0));
        ps.N = N;
        ps.p_map = cb.p_bar;
        ps.alpha = alpha;
        ps.meta = {{"coboundary_A", cb.A}, {"residual", cb.residual_sup}};
        return ps;
    }
    throw Error("unknown preset kind: " + kind);
}

// ------------------------------------------------------ check_main_estimate

namespace {

double integrate_range(const CircleMap& f, double a, double b, double tol) {
    if (b <= a) return 0.0;
    // split at the map's breakpoints replicated over integer shifts
    std::vector<double> cuts{a, b};
    std::vector<double> bp = f.breakpoints();
    for (long k = static_cast<long>(std::floor(a)) - 1;
         k <= static_cast<long>(std::ceil(b)) + 1; ++k)
        for (double t : bp) {
            double c = t + static_cast<double>(k);
            if (c > a && c < b) cuts.push_back(c);
        }
    std::sort(cuts.begin(), cuts.end());
    double total = 0.0;
    for (size_t i = 0; i + 1 < cuts.size(); ++i) {
        double lo = cuts[i], hi = cuts[i + 1];
        if (hi - lo < 1e-15) continue;
        // rescale to [0,1) and reuse the circle quadrature on one cell
        total += integrate_fn(
            [&](double u) { return f.eval(lo + u * (hi - lo)); }, {},
            tol * std::max(hi - lo, 1e-6)) * (hi - lo);
    }
    return total;
}

} // namespace

// --------------------------------------------------------- asym drift

AsymDriftReport asym_drift_report(const ScenarioPreset& preset, int grid,
                                  double tol) {
    if (preset.kind != "asymmetric-drift" || !preset.gn || !preset.p_map ||
        !preset.base_env || !preset.alpha)
        throw Error("asym_drift_report needs an asymmetric-drift preset");
    const CircleMap& p_pert = *preset.p_map;
    const CircleMap& p_bar = *preset.base_env->circle_map();
    const Frequency& alpha = *preset.alpha;
    const GnPerturbation& gn = *preset.gn;
    const double t = static_cast<double>(preset.N);
    const double av = alpha.value();

    AsymDriftReport rep;
    rep.profile = drift_profile(p_pert, alpha, grid, t, tol);
    rep.in_J.resize(static_cast<size_t>(grid));
    rep.in_Jp.resize(static_cast<size_t>(grid));
    for (int i = 0; i < grid; ++i) {
        rep.in_J[static_cast<size_t>(i)] = gn.J.contains(rep.profile.x[static_cast<size_t>(i)]);
        rep.in_Jp[static_cast<size_t>(i)] =
            gn.J_prime.contains(rep.profile.x[static_cast<size_t>(i)]);
    }

    // u of the unperturbed coboundary environment
    auto u_bar = [&](double x) { return u_and_drift(p_bar, alpha, x, 1.0, tol).u; };
    double usum = 0.0, umin = 1e300, umax = 0.0;
    const int ug = 256;
    for (int i = 0; i < ug; ++i) {
        double u = u_bar(static_cast<double>(i) / ug);
        usum += u;
        umin = std::min(umin, u);
        umax = std::max(umax, u);
    }
    rep.u_bar_mean = usum / ug;
    rep.b_ref = std::max<long long>(
        0, static_cast<long long>(std::ceil(t / rep.u_bar_mean - 1.0 - 1e-12)));

    // measured Birkhoff deviation of the u_bar partial sums at b_ref
    double e_emp = 0.0;
    {
        auto lam = [&](double y) {
            double v = p_bar.eval(y);
            return (1.0 - v) / v;
        };
        int found = 0;
        for (int i = 0; i < grid && found < 16; ++i) {
            double x = static_cast<double>(i) / grid + 0.5 / grid;
            if (!gn.J.contains(x)) continue;
            ++found;
            double u0 = u_bar(x);
            double g = 0.5 * (u0 - 1.0);
            double acc = u0;
            double y = x;
            for (long long k = 1; k <= rep.b_ref; ++k) {
                y += av;
                if (y >= 1.0) y -= 1.0;
                g = lam(y) * (1.0 + g);
                acc += 1.0 + 2.0 * g;
            }
            e_emp = std::max(e_emp, std::abs(acc - (static_cast<double>(rep.b_ref) + 1.0) *
                                                       rep.u_bar_mean));
        }
    }
    rep.U_cap = (e_emp + umax) / umin + 2.0;

    double u_emp = 0.0;
    double margin = 1e300;
    int nj = 0, njp = 0;
    for (int i = 0; i < grid; ++i) {
        double dev = static_cast<double>(rep.profile.b_t[static_cast<size_t>(i)] -
                                         rep.b_ref);
        if (rep.in_J[static_cast<size_t>(i)]) {
            u_emp = std::max(u_emp, std::abs(dev));
            ++nj;
        }
        if (rep.in_Jp[static_cast<size_t>(i)]) {
            margin = std::min(margin, dev);
            ++njp;
        }
    }
    rep.U_emp = u_emp;
    rep.margin = margin;

    double k_min = 1e300;
    for (int i = 0; i < 4096; ++i) {
        double v = p_bar.eval(static_cast<double>(i) / 4096.0);
        k_min = std::min(k_min, 1.0 / v + 1.0 / (1.0 - v));
    }
    rep.predicted_ratio = (1.0 - std::exp(-k_min * gn.plateau)) * (1.0 - 1.0 / umin);

    rep.pass = rep.U_emp <= rep.U_cap &&
               rep.margin >= rep.predicted_ratio * static_cast<double>(rep.b_ref) &&
               gn.J.measure() > 0.8 && gn.J_prime.measure() > 0.1;
    rep.details = {{"b_ref", rep.b_ref},
                   {"u_bar_mean", rep.u_bar_mean},
                   {"U_emp", rep.U_emp},
                   {"U_cap", rep.U_cap},
                   {"E_emp", e_emp},
                   {"margin", rep.margin},
                   {"predicted_ratio", rep.predicted_ratio},
                   {"required_margin", rep.predicted_ratio * static_cast<double>(rep.b_ref)},
                   {"J_points", nj},
                   {"Jp_points", njp},
                   {"J_measure", gn.J.measure()},
                   {"Jp_measure", gn.J_prime.measure()}};
    return rep;
}

MainEstimateCheck check_main_estimate(const PerturbationPlan& plan,
                                      const Frequency& alpha, int samples,
                                      long long M_max, uint64_t seed) {
    const long long q = plan.q_n;
    const double amp = std::pow(static_cast<double>(q), -plan.s);
    int idx = -1;
    for (int i = 0; i <= alpha.depth(); ++i)
        if (alpha.q(i) == q) idx = i;
    if (idx < 0) throw Error("plan q_n is not a convergent denominator of alpha");
    const long long N_n = exact_N(alpha, idx);
    if (M_max > N_n) throw Error("M_max must be <= N_n");
    const double eta = to_double(alpha.eta(idx));

    CircleMap kmap_base = plan.p_bar;
    auto K_fn = [&](double x) {
        double v = kmap_base.eval(x);
        return 1.0 / v + 1.0 / (1.0 - v);
    };
    const double K_hat = integrate_fn(K_fn, kmap_base.breakpoints(), 1e-12);
    double tv_K = 0.0, sup_K = 0.0;
    {
        const int g = 1 << 14;
        double prev = K_fn(0.0);
        sup_K = prev;
        for (int i = 1; i <= g; ++i) {
            double cur = K_fn(static_cast<double>(i) / g);
            tv_K += std::abs(cur - prev);
            sup_K = std::max(sup_K, cur);
            prev = cur;
        }
    }
    CircleMap te = tilde_e(plan.n, plan.delta_n);
    const double sup_e = te.sup_abs();
    const double sup_de = te.sup_abs_derivative() * 1.5;
    const double kappa = circle_kappa(plan.p_bar);

    MainEstimateCheck chk;
    nlohmann::json rows = nlohmann::json::array();
    for (int si = 0; si < samples; ++si) {
        RngStream rng(seed, static_cast<uint64_t>(si));
        // exact dyadic phase
        uint64_t r = rng.next_u64() >> 12;
        BigRat x(BigInt(r), BigInt(1) << 52);
        double xd = to_double(x);
        Environment env = Environment::quasiperiodic(plan.p_n, alpha, x);
        Environment base = Environment::quasiperiodic(plan.p_bar, alpha, x);

        for (long long M : {M_max / 4, M_max / 2, M_max}) {
            if (M < q) continue;
            PotentialTable tp(env, -M, M);
            PotentialTable tb(base, -M, M);
            double ratio_M = static_cast<double>(M) / static_cast<double>(N_n);
            double sgn = alpha.eta_sign(idx) > 0 ? 1.0 : -1.0;
            // est_int: sum_{m=1..M} e_n K = K_hat q^{-s} N_n int_{qx}^{qx+M/N_n}
            // (the orbit sweeps the pattern forward when q alpha > p)
            double int_fwd = integrate_range(
                te, static_cast<double>(q) * xd,
                static_cast<double>(q) * xd + ratio_M, 1e-10);
            double int_bwd = integrate_range(
                te, static_cast<double>(q) * xd - ratio_M,
                static_cast<double>(q) * xd, 1e-10);
            if (sgn < 0) std::swap(int_fwd, int_bwd);
            double main_p = -K_hat * amp * static_cast<double>(N_n) * int_fwd;
            double main_m = K_hat * amp * static_cast<double>(N_n) * int_bwd;

            double err_p = std::abs(tp.sigma(M) - main_p - tb.sigma(M));
            double err_m = std::abs(tp.sigma(-M) - main_m - tb.sigma(-M));
            double err = std::max(err_p, err_m);

            double R_bound = 4.0 / (kappa * kappa) * static_cast<double>(M) *
                             amp * amp;
            double o_terms =
                amp * ((static_cast<double>(M) / q + 1.0) * (1.0 + 1.0 / plan.n) * tv_K +
                       K_hat * (static_cast<double>(M) * eta * sup_de / 2.0 + 2.0 * sup_e) +
                       K_hat * (static_cast<double>(q) + 1.0) * eta *
                           (static_cast<double>(M) * eta) * sup_e);
            double budget = R_bound + 1.5 * o_terms;
            chk.max_error = std::max(chk.max_error, err);
            chk.budget = std::max(chk.budget, budget);
            rows.push_back({{"x", xd}, {"M", M}, {"err", err}, {"budget", budget},
                            {"main_plus", main_p}, {"R_bound", R_bound}});
            if (err > budget) {
                chk.within = false;
                chk.details = {{"rows", rows}, {"K_hat", K_hat}, {"N_n", N_n}};
                return chk;
            }
        }
    }
    chk.within = true;
    chk.details = {{"rows", rows}, {"K_hat", K_hat}, {"N_n", N_n}};
    return chk;
}

} // namespace qpwalk
