#include "qpwalk/environment.hpp"

#include <algorithm>
#include <cmath>

namespace qpwalk {

namespace {

void check_prob_open(double v, const char* what) {
    if (!(v > 0.0 && v < 1.0))
        throw EllipticityError(std::string(what) + " outside (0,1)");
}

} // namespace

Environment Environment::quasiperiodic(CircleMap pmap, Frequency alpha, BigRat x,
                                       int depth) {
    Environment e;
    e.kind_ = Kind::quasiperiodic;
    e.pmap_ = std::move(pmap);
    e.alpha_ = std::move(alpha);
    e.x_ = std::move(x);
    e.depth_ = depth < 0 ? e.alpha_->depth() : depth;
    if (e.depth_ > e.alpha_->depth()) throw Error("orbit depth exceeds frequency depth");

    // phase_j = (num + j*step)/den mod 1, exactly
    BigInt xd = boost::multiprecision::denominator(e.x_);
    BigInt xn = boost::multiprecision::numerator(e.x_);
    const BigInt& qd = e.alpha_->q(e.depth_);
    const BigInt& pd = e.alpha_->p(e.depth_);
    e.phase_den_ = xd * qd;
    e.phase_num_ = xn * qd % e.phase_den_;
    if (e.phase_num_ < 0) e.phase_num_ += e.phase_den_;
    e.phase_step_ = pd * xd % e.phase_den_;
    e.certify();
    return e;
}

Environment Environment::periodic(std::vector<double> values) {
    if (values.empty()) throw EllipticityError("empty period");
    Environment e;
    e.kind_ = Kind::periodic;
    e.values_ = std::move(values);
    e.certify();
    return e;
}

Environment Environment::tabulated(std::vector<double> values, long long lo,
                                   bool constant_extend) {
    if (values.empty()) throw EllipticityError("empty window");
    Environment e;
    e.kind_ = Kind::tabulated;
    e.values_ = std::move(values);
    e.lo_ = lo;
    e.constant_extend_ = constant_extend;
    e.left_const_ = e.values_.front();
    e.right_const_ = e.values_.back();
    e.certify();
    return e;
}

Environment Environment::procedural(std::vector<double> core, long long lo,
                                    double left_const, double right_const) {
    if (core.empty()) throw EllipticityError("empty core");
    Environment e;
    e.kind_ = Kind::procedural;
    e.values_ = std::move(core);
    e.lo_ = lo;
    e.left_const_ = left_const;
    e.right_const_ = right_const;
    e.certify();
    return e;
}

void Environment::certify() {
    double kappa = 0.5;
    if (kind_ == Kind::quasiperiodic) {
        const int grid = 1 << 15;
        for (int i = 0; i < grid; ++i) {
            double v = pmap_->eval(static_cast<double>(i) / grid);
            check_prob_open(v, "circle map value");
            kappa = std::min(kappa, std::min(v, 1.0 - v));
        }
        for (double b : pmap_->breakpoints()) {
            for (double d : {-1e-9, 0.0, 1e-9}) {
                double v = pmap_->eval(b + d);
                check_prob_open(v, "circle map value");
                kappa = std::min(kappa, std::min(v, 1.0 - v));
            }
        }
    } else {
        for (double v : values_) {
            check_prob_open(v, "site probability");
            kappa = std::min(kappa, std::min(v, 1.0 - v));
        }
        if (kind_ == Kind::procedural ||
            (kind_ == Kind::tabulated && constant_extend_)) {
            check_prob_open(left_const_, "left tail probability");
            check_prob_open(right_const_, "right tail probability");
            kappa = std::min({kappa, std::min(left_const_, 1.0 - left_const_),
                              std::min(right_const_, 1.0 - right_const_)});
        }
    }
    kappa_ = kappa;
}

Environment Environment::reflected() const {
    switch (kind_) {
    case Kind::quasiperiodic: {
        Environment e(*this);
        e.reflect_ = !e.reflect_;
        return e;
    }
    case Kind::periodic: {
        long long L = static_cast<long long>(values_.size());
        std::vector<double> v(static_cast<size_t>(L));
        for (long long i = 0; i < L; ++i)
            v[static_cast<size_t>(i)] = 1.0 - values_[static_cast<size_t>(((-i) % L + L) % L)];
        return periodic(std::move(v));
    }
    case Kind::tabulated:
    case Kind::procedural: {
        long long hi = lo_ + static_cast<long long>(values_.size()) - 1;
        std::vector<double> v(values_.size());
        for (size_t i = 0; i < values_.size(); ++i)
            v[i] = 1.0 - values_[values_.size() - 1 - i];
        if (kind_ == Kind::tabulated)
            return tabulated(std::move(v), -hi, constant_extend_);
        return procedural(std::move(v), -hi, 1.0 - right_const_, 1.0 - left_const_);
    }
    }
    throw Error("unreachable");
}

double Environment::p(long long j) const {
    switch (kind_) {
    case Kind::quasiperiodic: {
        long long jj = reflect_ ? -j : j;
        BigInt num = (phase_num_ + BigInt(jj) * phase_step_) % phase_den_;
        if (num < 0) num += phase_den_;
        double v = pmap_->eval(to_double(BigRat(num, phase_den_)));
        return reflect_ ? 1.0 - v : v;
    }
    case Kind::periodic: {
        long long L = static_cast<long long>(values_.size());
        long long r = j % L;
        if (r < 0) r += L;
        return values_[static_cast<size_t>(r)];
    }
    case Kind::tabulated:
    case Kind::procedural: {
        long long hi = lo_ + static_cast<long long>(values_.size()) - 1;
        if (j < lo_) {
            if (kind_ == Kind::tabulated && !constant_extend_)
                throw Error("site outside tabulated window");
            return left_const_;
        }
        if (j > hi) {
            if (kind_ == Kind::tabulated && !constant_extend_)
                throw Error("site outside tabulated window");
            return right_const_;
        }
        return values_[static_cast<size_t>(j - lo_)];
    }
    }
    return 0.5;
}

std::vector<double> Environment::window_values(long long a, long long b) const {
    if (a > b) throw Error("empty window");
    size_t n = static_cast<size_t>(b - a + 1);
    std::vector<double> out(n);
    if (kind_ == Kind::quasiperiodic) {
        // incremental exact stepping of the rational phase; a reflected
        // environment walks the orbit backwards and flips the value
        long long a0 = reflect_ ? -a : a;
        BigInt num = (phase_num_ + BigInt(a0) * phase_step_) % phase_den_;
        if (num < 0) num += phase_den_;
        BigInt step_big = reflect_ ? (phase_den_ - phase_step_) % phase_den_ : phase_step_;
        if (phase_den_ < (BigInt(1) << 62)) {
            uint64_t den = phase_den_.convert_to<uint64_t>();
            uint64_t step = step_big.convert_to<uint64_t>();
            uint64_t cur = num.convert_to<uint64_t>();
            double dden = static_cast<double>(den);
            for (size_t i = 0; i < n; ++i) {
                double v = pmap_->eval(static_cast<double>(cur) / dden);
                out[i] = reflect_ ? 1.0 - v : v;
                cur += step;
                if (cur >= den) cur -= den;
            }
        } else {
            BigInt cur = num;
            for (size_t i = 0; i < n; ++i) {
                double v = pmap_->eval(to_double(BigRat(cur, phase_den_)));
                out[i] = reflect_ ? 1.0 - v : v;
                cur += step_big;
                if (cur >= phase_den_) cur -= phase_den_;
            }
        }
    } else {
        for (size_t i = 0; i < n; ++i) out[i] = p(a + static_cast<long long>(i));
    }
    return out;
}

std::optional<Environment::TailRule> Environment::tail_rule() const {
    if (kind_ == Kind::procedural ||
        (kind_ == Kind::tabulated && constant_extend_)) {
        long long hi = lo_ + static_cast<long long>(values_.size()) - 1;
        return TailRule{lo_, hi, left_const_, right_const_};
    }
    return std::nullopt;
}

long long Environment::period() const {
    if (kind_ == Kind::periodic) return static_cast<long long>(values_.size());
    if (kind_ == Kind::quasiperiodic) {
        if (phase_den_ >= (BigInt(1) << 62))
            throw Error("surrogate period exceeds 2^62");
        return phase_den_.convert_to<long long>();
    }
    throw Error("environment has no period");
}

const Frequency* Environment::frequency() const {
    return alpha_ ? &*alpha_ : nullptr;
}

const CircleMap* Environment::circle_map() const {
    return pmap_ ? &*pmap_ : nullptr;
}

const BigRat& Environment::phase() const { return x_; }

nlohmann::json Environment::to_json() const {
    switch (kind_) {
    case Kind::quasiperiodic:
        return {{"kind", "quasiperiodic"},
                {"p", pmap_->to_json()},
                {"alpha", alpha_->to_json()},
                {"x_num", boost::multiprecision::numerator(x_).str()},
                {"x_den", boost::multiprecision::denominator(x_).str()},
                {"depth", depth_},
                {"reflect", reflect_}};
    case Kind::periodic:
        return {{"kind", "periodic"}, {"values", values_}};
    case Kind::tabulated:
        return {{"kind", "tabulated"}, {"values", values_}, {"lo", lo_},
                {"constant_extend", constant_extend_}};
    case Kind::procedural:
        return {{"kind", "procedural"}, {"values", values_}, {"lo", lo_},
                {"left", left_const_}, {"right", right_const_}};
    }
    throw Error("unreachable");
}

Environment Environment::from_json(const nlohmann::json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "quasiperiodic") {
        BigRat x(BigInt(j.at("x_num").get<std::string>()),
                 BigInt(j.at("x_den").get<std::string>()));
        Environment e = quasiperiodic(CircleMap::from_json(j.at("p")),
                                      Frequency::from_json(j.at("alpha")), x,
                                      j.value("depth", -1));
        if (j.value("reflect", false)) e = e.reflected();
        return e;
    }
    if (kind == "periodic")
        return periodic(j.at("values").get<std::vector<double>>());
    if (kind == "tabulated")
        return tabulated(j.at("values").get<std::vector<double>>(),
                         j.at("lo").get<long long>(),
                         j.value("constant_extend", true));
    if (kind == "procedural")
        return procedural(j.at("values").get<std::vector<double>>(),
                          j.at("lo").get<long long>(), j.at("left").get<double>(),
                          j.at("right").get<double>());
    throw Error("unknown environment kind: " + kind);
}

double symmetry_defect(const CircleMap& p, double tol) {
    const int grid = 1 << 12;
    for (int i = 0; i < grid; ++i) {
        double v = p.eval(static_cast<double>(i) / grid);
        if (!(v > 1e-13 && v < 1.0 - 1e-13))
            throw Error("p touches {0,1} within quadrature resolution");
    }
    return integrate_fn(
        [&p](double x) {
            double v = p.eval(x);
            return std::log(v) - std::log1p(-v);
        },
        p.breakpoints(), tol);
}

double ellipticity(const Environment& env, long long a, long long b) {
    std::vector<double> vals = env.window_values(a, b);
    double m = 0.5;
    for (double v : vals) m = std::min(m, std::min(v, 1.0 - v));
    return m;
}

} // namespace qpwalk
