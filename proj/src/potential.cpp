#include "qpwalk/potential.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace qpwalk {

double log_add_exp(double a, double b) {
    if (a == -std::numeric_limits<double>::infinity()) return b;
    if (b == -std::numeric_limits<double>::infinity()) return a;
    double hi = std::max(a, b), lo = std::min(a, b);
    return hi + std::log1p(std::exp(lo - hi));
}

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Sigma(n) for n in [lo, hi], anchored at Sigma(0) = 0.
std::vector<double> sigma_window(const Environment& env, long long lo, long long hi) {
    long long vlo = std::min(lo, 0LL), vhi = std::max(hi, 0LL);
    std::vector<double> pv = env.window_values(vlo, vhi);
    auto site = [&](long long j) { return pv[static_cast<size_t>(j - vlo)]; };

    std::vector<double> sig(static_cast<size_t>(hi - lo + 1));
    auto at = [&](long long n) -> double& { return sig[static_cast<size_t>(n - lo)]; };

    // walk up from 0, then down from 0; interior anchor always materialized
    double acc = 0.0;
    for (long long n = 1; n <= hi; ++n) {
        double p = site(n);
        acc += std::log1p(-p) - std::log(p);
        if (n >= lo) at(n) = acc;
    }
    if (lo <= 0 && hi >= 0) at(0) = 0.0;
    acc = 0.0;
    for (long long n = -1; n >= lo; --n) {
        double p = site(n + 1);
        acc += std::log(p) - std::log1p(-p);
        if (n <= hi) at(n) = acc;
    }
    return sig;
}

double max_rise_up(const std::vector<double>& sig, size_t i0, size_t i1) {
    double runmin = sig[i0], best = 0.0;
    for (size_t i = i0; i <= i1; ++i) {
        runmin = std::min(runmin, sig[i]);
        best = std::max(best, sig[i] - runmin);
    }
    return best;
}

double max_rise_down(const std::vector<double>& sig, size_t i0, size_t i1) {
    double runmax = sig[i0], best = 0.0;
    for (size_t i = i0; i <= i1; ++i) {
        runmax = std::max(runmax, sig[i]);
        best = std::max(best, runmax - sig[i]);
    }
    return best;
}

} // namespace

// ------------------------------------------------------- PotentialTable

PotentialTable::PotentialTable(const Environment& env, long long a, long long b)
    : env_(&env), a_(a), b_(b) {
    if (a > b) throw Error("empty potential window");
    sigma_ = sigma_window(env, a, b);
    logm_.assign(sigma_.size(), kNegInf);
    // M(n) = sum_{j=0}^{n-1} e^{Sigma(j)} for n>=1; -sum_{j=n}^{-1} for n<=-1
    double acc = kNegInf;
    for (long long n = 1; n <= b_; ++n) {
        acc = log_add_exp(acc, sigma(n - 1));
        if (n >= a_) logm_[static_cast<size_t>(n - a_)] = acc;
    }
    acc = kNegInf;
    for (long long n = -1; n >= a_; --n) {
        acc = log_add_exp(acc, sigma(n));
        if (n <= b_) logm_[static_cast<size_t>(n - a_)] = acc;
    }
}

double PotentialTable::sigma(long long n) const {
    if (n < a_ || n > b_) throw Error("site outside potential window");
    return sigma_[static_cast<size_t>(n - a_)];
}

double PotentialTable::log_abs_mart(long long n) const {
    if (n < a_ || n > b_) throw Error("site outside potential window");
    return logm_[static_cast<size_t>(n - a_)];
}

double PotentialTable::mart(long long n) const {
    return mart_sign(n) * std::exp(log_abs_mart(n));
}

// ------------------------------------------------------------ hit_prob

namespace {

// log sum_{j <= J} e^{Sigma(j) - Sigma(J)}; needs an eventually-constant or
// periodic left tail. Throws when the sum diverges is handled by caller via
// the returned +inf.
double log_tail_left_rel(const Environment& env, long long J) {
    if (auto tr = env.tail_rule()) {
        if (J > tr->head_lo - 1) throw Error("tail anchor inside the head");
        double r = tr->left_value / (1.0 - tr->left_value); // e^{Sigma(j-1)-Sigma(j)}
        if (r >= 1.0) return std::numeric_limits<double>::infinity();
        return -std::log1p(-r);
    }
    if (env.kind() == Environment::Kind::periodic) {
        long long L = env.period();
        std::vector<double> sig = sigma_window(env, J - 2 * L, std::max(J, L));
        auto s = [&](long long n) { return sig[static_cast<size_t>(n - (J - 2 * L))]; };
        double sigma_per = s(std::max(J, L)) - s(std::max(J, L) - L); // = Sigma(L)
        if (sigma_per <= 0.0) return std::numeric_limits<double>::infinity();
        double block = kNegInf;
        for (long long j = J - L + 1; j <= J; ++j)
            block = log_add_exp(block, s(j) - s(J));
        return block - std::log1p(-std::exp(-sigma_per));
    }
    throw Error("infinite boundary needs a certifiable tail (constant or periodic)");
}

// log sum_{j >= J} e^{Sigma(j) - Sigma(J)}
double log_tail_right_rel(const Environment& env, long long J) {
    if (auto tr = env.tail_rule()) {
        if (J < tr->head_hi + 1) throw Error("tail anchor inside the head");
        double r = (1.0 - tr->right_value) / tr->right_value;
        if (r >= 1.0) return std::numeric_limits<double>::infinity();
        return -std::log1p(-r);
    }
    if (env.kind() == Environment::Kind::periodic) {
        long long L = env.period();
        std::vector<double> sig = sigma_window(env, std::min(J, 0LL), J + 2 * L);
        auto s = [&](long long n) { return sig[static_cast<size_t>(n - std::min(J, 0LL))]; };
        double sigma_per = s(L) - s(0);
        if (sigma_per >= 0.0) return std::numeric_limits<double>::infinity();
        double block = kNegInf;
        for (long long j = J; j <= J + L - 1; ++j)
            block = log_add_exp(block, s(j) - s(J));
        return block - std::log1p(-std::exp(sigma_per));
    }
    throw Error("infinite boundary needs a certifiable tail (constant or periodic)");
}

} // namespace

double hit_prob(const Environment& env, long long a, long long start, long long b) {
    const bool a_inf = (a == kMinusInfSite), b_inf = (b == kPlusInfSite);
    if (!a_inf && !b_inf && !(a < start && start < b))
        throw Error("need a < start < b");
    if (a_inf && b_inf)
        ; // escape probability P(reach +inf before -inf)
    else if (a_inf && start >= b)
        throw Error("need start < b");
    else if (b_inf && start <= a)
        throw Error("need a < start");

    // anchor for the left end
    long long left_anchor;
    double log_left_tail = kNegInf; // log sum over j <= left_anchor, rel to Sigma(left_anchor)
    if (a_inf) {
        left_anchor = start - 1;
        if (auto tr = env.tail_rule()) left_anchor = std::min(left_anchor, tr->head_lo - 1);
        log_left_tail = log_tail_left_rel(env, left_anchor);
        if (std::isinf(log_left_tail) && log_left_tail > 0)
            return 1.0; // M(-inf) = -inf: the walk cannot reach -inf first
    } else {
        left_anchor = a;
    }

    long long right_end; // sums run over j in [left_anchor(+tail), right_end - 1]
    double log_right_tail = kNegInf;
    if (b_inf) {
        right_end = std::max(start, left_anchor + 1);
        if (auto tr = env.tail_rule()) right_end = std::max(right_end, tr->head_hi + 1);
        log_right_tail = log_tail_right_rel(env, right_end); // sum over j >= right_end
        if (std::isinf(log_right_tail) && log_right_tail > 0)
            return 0.0; // M(+inf) = +inf: reaching +inf before a finite/left target has prob 0
    } else {
        right_end = b;
    }

    // ds(j) = Sigma(j) - Sigma(left_anchor) for j in [left_anchor, right_end]
    std::vector<double> sig = sigma_window(env, left_anchor, right_end);
    double ref = sig[0];
    double log_num = kNegInf, log_den = kNegInf;
    if (a_inf) {
        log_num = log_left_tail;
        log_den = log_left_tail;
    }
    for (long long j = left_anchor + (a_inf ? 1 : 0); j <= right_end - 1; ++j) {
        double v = sig[static_cast<size_t>(j - left_anchor)] - ref;
        if (j <= start - 1) log_num = log_add_exp(log_num, v);
        log_den = log_add_exp(log_den, v);
    }
    if (b_inf) {
        double v = sig[static_cast<size_t>(right_end - left_anchor)] - ref + log_right_tail;
        log_den = log_add_exp(log_den, v);
    }
    return std::exp(log_num - log_den);
}

// ---------------------------------------------------- recurrence_report

RecurrenceReport recurrence_report(const Environment& env, long long horizon) {
    if (horizon < 1) throw Error("horizon must be >= 1");
    RecurrenceReport rep;
    rep.horizon = horizon;

    std::vector<double> sig = sigma_window(env, -horizon, horizon);
    auto s = [&](long long n) { return sig[static_cast<size_t>(n + horizon)]; };
    double mp = kNegInf, mm = kNegInf;
    for (long long j = 0; j <= horizon - 1; ++j) mp = log_add_exp(mp, s(j));
    for (long long j = -horizon; j <= -1; ++j) mm = log_add_exp(mm, s(j));
    rep.log_abs_m_plus = mp;
    rep.log_abs_m_minus = mm;

    bool certifiable = env.tail_rule().has_value() ||
                       env.kind() == Environment::Kind::periodic;
    rep.limits_certified = certifiable;
    if (!certifiable) {
        // at-horizon verdict: both |M| still growing means no escape seen
        rep.verdict = "recurrent-at-horizon";
        return rep;
    }

    auto right_limit = [&]() -> std::optional<double> {
        long long J = env.tail_rule() ? env.tail_rule()->head_hi + 1 : horizon;
        double t = log_tail_right_rel(env, J);
        if (std::isinf(t) && t > 0) return std::nullopt; // +infinity
        std::vector<double> ss = sigma_window(env, std::min(0LL, J), J);
        auto sv = [&](long long n) { return ss[static_cast<size_t>(n - std::min(0LL, J))]; };
        double acc = kNegInf;
        for (long long j = 0; j <= J - 1; ++j) acc = log_add_exp(acc, sv(j));
        return log_add_exp(acc, sv(J) + t);
    };
    auto left_limit = [&]() -> std::optional<double> {
        long long J = env.tail_rule() ? env.tail_rule()->head_lo - 1 : -horizon;
        double t = log_tail_left_rel(env, J);
        if (std::isinf(t) && t > 0) return std::nullopt;
        std::vector<double> ss = sigma_window(env, J, std::max(0LL, J));
        auto sv = [&](long long n) { return ss[static_cast<size_t>(n - J)]; };
        double acc = kNegInf;
        for (long long j = J + 1; j <= -1; ++j) acc = log_add_exp(acc, sv(j));
        return log_add_exp(acc, sv(J) + t);
    };

    rep.log_m_plus_limit = right_limit();
    rep.log_m_minus_limit = left_limit();
    bool pfin = rep.log_m_plus_limit.has_value();
    bool mfin = rep.log_m_minus_limit.has_value();
    if (!pfin && !mfin) {
        rep.verdict = "recurrent";
        rep.escape_right_prob = 0.0;
    } else if (pfin && mfin) {
        rep.verdict = "transient-two-sided";
        double lm = *rep.log_m_minus_limit, lp = *rep.log_m_plus_limit;
        rep.escape_right_prob = std::exp(lm - log_add_exp(lm, lp));
    } else if (pfin) {
        rep.verdict = "transient-right";
        rep.escape_right_prob = 1.0;
    } else {
        rep.verdict = "transient-left";
        rep.escape_right_prob = 0.0;
    }
    return rep;
}

nlohmann::json RecurrenceReport::to_json() const {
    nlohmann::json j{{"horizon", horizon},
                     {"log_abs_m_plus", log_abs_m_plus},
                     {"log_abs_m_minus", log_abs_m_minus},
                     {"limits_certified", limits_certified},
                     {"verdict", verdict}};
    if (log_m_plus_limit) j["log_m_plus_limit"] = *log_m_plus_limit;
    if (log_m_minus_limit) j["log_m_minus_limit"] = *log_m_minus_limit;
    if (escape_right_prob) j["escape_right_prob"] = *escape_right_prob;
    return j;
}

// ------------------------------------------------------------ find_traps

std::vector<Trap> find_traps(const Environment& env, long long a, long long b,
                             double depth_threshold) {
    std::vector<double> sig = sigma_window(env, a, b);
    auto s = [&](long long n) { return sig[static_cast<size_t>(n - a)]; };
    std::vector<Trap> traps;
    long long n = a + 1;
    while (n <= b - 1) {
        // detect a plateau-aware local minimum starting at n
        long long run_end = n;
        while (run_end + 1 <= b - 1 && s(run_end + 1) == s(n)) ++run_end;
        bool is_min = s(n - 1) > s(n) && (run_end + 1 <= b) && s(run_end + 1) > s(n);
        if (is_min) {
            long long bottom = run_end; // rightmost point of a plateau minimum
            double bottom_val = s(n);
            // left barrier: max rise before dipping below the bottom
            double left_max = 0.0;
            long long left_crest = n;
            for (long long j = n - 1; j >= a; --j) {
                if (s(j) < bottom_val) break;
                if (s(j) - bottom_val > left_max) {
                    left_max = s(j) - bottom_val;
                    left_crest = j;
                }
            }
            double right_max = 0.0;
            long long right_crest = run_end;
            for (long long j = run_end + 1; j <= b; ++j) {
                if (s(j) < bottom_val) break;
                if (s(j) - bottom_val > right_max) {
                    right_max = s(j) - bottom_val;
                    right_crest = j;
                }
            }
            double depth = std::min(left_max, right_max);
            if (depth > depth_threshold)
                traps.push_back({left_crest, bottom, right_crest, depth});
            n = run_end + 1;
        } else {
            n = run_end + 1;
        }
    }
    return traps;
}

// -------------------------------------------------------- check_criterion

namespace {

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

CriterionReport check_c1(const Environment& env, long long N,
                         const CriterionThresholds& thr) {
    CriterionReport rep;
    rep.kind = "c1";
    double barrier = thr.barrier >= 0 ? thr.barrier : std::sqrt(static_cast<double>(N));
    if (thr.barrier >= 0)
        rep.relaxations.push_back("barrier sqrt(N)=" + fmt(std::sqrt((double)N)) +
                                  " replaced by " + fmt(barrier));
    std::vector<double> sig = sigma_window(env, -N, N);
    double sp = sig[static_cast<size_t>(2 * N)], sm = sig[0];
    rep.margin = std::min(sp, sm) - barrier;
    rep.holds = sp > barrier && sm > barrier;
    return rep;
}

CriterionReport check_c2(const Environment& env, long long N, double eps,
                         const CriterionThresholds& thr) {
    CriterionReport rep;
    rep.kind = "c2";

    std::vector<long long> cands;
    if (thr.L) {
        cands.push_back(*thr.L);
    } else if (!thr.L_candidates.empty()) {
        cands = thr.L_candidates;
    } else if (env.kind() == Environment::Kind::periodic) {
        cands.push_back(env.period());
    } else if (env.frequency()) {
        const Frequency& f = *env.frequency();
        for (int n = 0; n <= f.depth(); ++n) {
            if (f.q(n) > 1 && f.q(n) <= std::min(N, 1LL << 40))
                cands.push_back(f.q(n).convert_to<long long>());
        }
    }
    if (cands.empty()) {
        rep.holds = false;
        rep.margin = -std::numeric_limits<double>::infinity();
        rep.relaxations.push_back("no L candidates supplied or derivable");
        return rep;
    }
    std::sort(cands.begin(), cands.end());

    std::vector<double> sig = sigma_window(env, -N, N);
    auto s = [&](long long n) { return sig[static_cast<size_t>(n + N)]; };
    double A_max = thr.A ? *thr.A : thr.A_max;
    double A_min = thr.A ? *thr.A : thr.A_min;

    // (C2b) is L-independent
    double rise = max_rise_up(sig, 0, sig.size() - 1);

    double best_margin = -std::numeric_limits<double>::infinity();
    for (long long L : cands) {
        if (L < 1 || L > N) continue;
        double barrier = thr.barrier >= 0 ? thr.barrier : std::sqrt(static_cast<double>(L));
        double margin_a = s(-L) - barrier;
        double margin_b = A_max - rise;
        // (C2c): |p(j+kL) - p(j)| over j in [0,L-1], k in [-N/L, N/L]
        long long kmax = N / L;
        std::vector<double> pv = env.window_values(-kmax * L, kmax * L + L - 1);
        auto p = [&](long long j) { return pv[static_cast<size_t>(j + kmax * L)]; };
        double maxdiff = 0.0;
        for (long long j = 0; j < L; ++j)
            for (long long k = -kmax; k <= kmax; ++k)
                maxdiff = std::max(maxdiff, std::abs(p(j + k * L) - p(j)));
        double margin_c = thr.c2c_tol - maxdiff;

        double m = std::min({margin_a, margin_b, margin_c});
        if (m > best_margin) {
            best_margin = m;
            rep.witness.L = L;
            rep.witness.A = std::max(A_min, rise + 1e-9);
        }
        if (margin_a > 0 && rise < A_max && maxdiff < thr.c2c_tol) {
            rep.holds = true;
            rep.witness.L = L;
            rep.witness.A = std::max(A_min, rise + 1e-9);
            best_margin = m;
            break; // lexicographically smallest (L, A)
        }
    }
    rep.margin = best_margin;

    // theoretical-scale relations, recorded when violated
    double A = rep.witness.A;
    long long L = rep.witness.L;
    if (!(A > 100))
        rep.relaxations.push_back("A>100 replaced by A in [" + fmt(A_min) + "," +
                                  fmt(A_max) + "] (A=" + fmt(A) + ")");
    if (L > 0 && !(std::exp(std::exp(std::min(A, 5.0))) < static_cast<double>(L) && A <= 5.0))
        rep.relaxations.push_back("e^{e^A} < L not enforced (desk scale)");
    if (L > 0 && !(static_cast<double>(L) <= std::pow(static_cast<double>(N), eps * eps)))
        rep.relaxations.push_back("L <= N^{eps^2} violated at desk scale");
    if (!(static_cast<double>(N) <=
          std::exp(std::pow(static_cast<double>(std::max(L, 1LL)), 0.1))))
        rep.relaxations.push_back("N <= e^{L^0.1} violated at desk scale");
    rep.relaxations.push_back("C2c threshold N^{-1/eps^3} replaced by " + fmt(thr.c2c_tol));
    return rep;
}

CriterionReport check_c3(const Environment& env, long long N, double eps,
                         const CriterionThresholds& thr, const Environment* base) {
    CriterionReport rep;
    rep.kind = "c3";

    // candidate witness tuples (lexicographic search when not supplied)
    struct W { double u, v, wm, wp, up, vp, wpm, wpp; };
    std::vector<W> cands;
    if (thr.v && thr.vp) {
        W w;
        w.v = *thr.v;
        w.vp = *thr.vp;
        w.u = thr.u ? *thr.u : std::max(0.2375, (0.225 + w.v - eps) / 2.0);
        w.up = thr.up ? *thr.up : std::max(0.2375, (0.225 + w.vp - eps) / 2.0);
        w.wm = thr.wm ? *thr.wm : w.v - eps / 2.0;
        w.wp = thr.wp ? *thr.wp : w.v + eps / 2.0;
        w.wpm = thr.wpm ? *thr.wpm : w.vp - eps / 2.0;
        w.wpp = thr.wpp ? *thr.wpp : w.vp + eps / 2.0;
        cands.push_back(w);
    } else {
        for (double v : {0.3, 0.325, 0.35, 0.375, 0.4})
            for (double vp : {0.3, 0.325, 0.35, 0.375, 0.4}) {
                W w;
                w.v = v;
                w.vp = vp;
                w.u = std::max(0.2375, (0.225 + v - eps) / 2.0);
                w.up = std::max(0.2375, (0.225 + vp - eps) / 2.0);
                w.wm = v - eps / 2.0;
                w.wp = v + eps / 2.0;
                w.wpm = vp - eps / 2.0;
                w.wpp = vp + eps / 2.0;
                cands.push_back(w);
            }
    }

    long long Q = thr.Q ? *thr.Q : 0;
    if (!Q && env.frequency()) {
        const Frequency& f = *env.frequency();
        double root = std::sqrt(static_cast<double>(N));
        for (int n = 0; n <= f.depth(); ++n)
            if (f.q(n) > 1 && f.q(n) < static_cast<long long>(root))
                Q = f.q(n).convert_to<long long>();
    }

    double A_max = thr.A ? *thr.A : thr.A_max;
    double A_min = thr.A ? *thr.A : thr.A_min;

    long long span = static_cast<long long>(std::llround(0.55 * static_cast<double>(N)));
    std::vector<double> sig = sigma_window(env, -span, span);
    auto s = [&](long long n) { return sig[static_cast<size_t>(n + span)]; };
    auto idx = [&](double frac) {
        return static_cast<long long>(std::llround(frac * static_cast<double>(N)));
    };

    std::vector<double> base_sig;
    if (base) base_sig = sigma_window(*base, -span, span);
    auto sbar = [&](long long n) {
        return base ? base_sig[static_cast<size_t>(n + span)] : s(n);
    };

    double best_margin = -std::numeric_limits<double>::infinity();
    bool found = false;
    for (const W& w : cands) {
        double barrier = thr.barrier >= 0 ? thr.barrier : std::sqrt(static_cast<double>(N));
        long long vN = idx(w.v), wpN = idx(w.wp), wmN = idx(w.wm);
        long long vpN = idx(w.vp), wppN = idx(w.wpp), wpmN = idx(w.wpm);
        long long uN = idx(w.u), upN = idx(w.up);

        // (C3a)
        double a1 = s(wpN) - s(vN) - barrier;
        double a2 = s(wmN) - s(vN) - barrier;
        double a3 = s(-wpmN) - s(-vpN) - barrier;
        double a4 = s(-wppN) - s(-vpN) - barrier;

        // (C3b)
        double rise_up = max_rise_up(sig, static_cast<size_t>(-upN + span),
                                     static_cast<size_t>(vN + span));
        double rise_dn = max_rise_down(sig, static_cast<size_t>(-vpN + span),
                                       static_cast<size_t>(uN + span));
        double b1 = A_max - rise_up;
        double b2 = A_max - rise_dn;

        // (C3c)
        double per_tol = thr.c3_per_tol >= 0
                             ? thr.c3_per_tol
                             : (Q > 0 ? 1.0 / std::sqrt(static_cast<double>(Q)) : 0.0);
        double c1m = -std::numeric_limits<double>::infinity();
        double c2m = -std::numeric_limits<double>::infinity();
        double c3m = -std::numeric_limits<double>::infinity();
        if (Q > 0) {
            double maxper = 0.0;
            for (long long k = 0; k <= Q; ++k)
                for (long long l = -vpN / Q; l <= vN / Q; ++l) {
                    long long kk = k + l * Q;
                    if (kk < -span || kk > span) continue;
                    maxper = std::max(maxper, std::abs(sbar(k) - sbar(kk)));
                }
            c1m = per_tol - maxper;
            double maxb0 = 0.0, maxbpos = 0.0;
            for (long long k = -upN; k <= uN; ++k)
                maxb0 = std::max(maxb0, std::abs(s(k) - sbar(k)));
            for (long long k = -vpN; k <= vN; ++k)
                maxbpos = std::max(maxbpos, s(k) - sbar(k));
            c2m = 1e-6 - maxb0;
            c3m = 1e-6 - maxbpos;
        }

        double m = std::min({a1, a2, a3, a4, b1, b2, c1m, c2m, c3m});
        if (m > best_margin) {
            best_margin = m;
            rep.witness = {std::max(A_min, std::max(rise_up, rise_dn) + 1e-9),
                           0, Q, w.u, w.v, w.wm, w.wp, w.up, w.vp, w.wpm, w.wpp};
        }
        if (m > 0 && !found) {
            found = true;
            rep.witness = {std::max(A_min, std::max(rise_up, rise_dn) + 1e-9),
                           0, Q, w.u, w.v, w.wm, w.wp, w.up, w.vp, w.wpm, w.wpp};
            best_margin = m;
            break;
        }
    }
    rep.holds = found;
    rep.margin = best_margin;
    if (!base) rep.relaxations.push_back("C3c checked with Sigma_bar := Sigma, B := 0 (no base env)");
    if (!(rep.witness.A > 100))
        rep.relaxations.push_back("A>100 replaced by A in [" + fmt(A_min) + "," +
                                  fmt(A_max) + "]");
    if (Q > 0)
        rep.relaxations.push_back("e^{e^A} < Q < N^{1/2} not enforced (desk scale, Q=" +
                                  std::to_string(Q) + ")");
    else
        rep.relaxations.push_back("no Q available: C3c fails by default");
    return rep;
}

} // namespace

nlohmann::json CriterionReport::to_json() const {
    nlohmann::json w{{"A", witness.A}};
    if (kind == "c2") w["L"] = witness.L;
    if (kind == "c3") {
        w["Q"] = witness.Q;
        w["u"] = witness.u;
        w["v"] = witness.v;
        w["w_minus"] = witness.wm;
        w["w_plus"] = witness.wp;
        w["u_prime"] = witness.up;
        w["v_prime"] = witness.vp;
        w["w_prime_minus"] = witness.wpm;
        w["w_prime_plus"] = witness.wpp;
    }
    return {{"kind", kind}, {"holds", holds}, {"witness", w},
            {"margin", margin}, {"relaxations", relaxations}};
}

CriterionReport check_criterion(const std::string& kind, const Environment& env,
                                long long N, double eps,
                                const CriterionThresholds& thr,
                                const Environment* base) {
    if (N < 1) throw Error("N must be >= 1");
    if (kind == "c1") return check_c1(env, N, thr);
    if (kind == "c2") return check_c2(env, N, eps, thr);
    if (kind == "c3") return check_c3(env, N, eps, thr, base);
    throw Error("unknown criterion kind: " + kind);
}

} // namespace qpwalk
