#include "qpwalk/circlemap.hpp"
#include "qpwalk/frequency.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

namespace qpwalk {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

double mod1d(double x) {
    double y = x - std::floor(x);
    return (y >= 1.0) ? y - 1.0 : y;
}

double bump(double t) { return t > 0.0 ? std::exp(-1.0 / t) : 0.0; }

// Kahan-compensated accumulator
struct Accum {
    double sum = 0.0, comp = 0.0;
    void add(double v) {
        double y = v - comp;
        double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
};

} // namespace

double smoothstep(double t) {
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;
    double b0 = bump(t), b1 = bump(1.0 - t);
    return b0 / (b0 + b1);
}

// ---------------------------------------------------------------- Impl

struct CircleMap::Impl {
    enum class Kind { trig, piecewise, sum, scale, shift, dilate, logistic };
    Kind kind;
    std::vector<double> coeffs;   // trig: [a0, a1, b1, ...]
    std::vector<Piece> pieces;    // piecewise, sorted, covering length 1
    std::shared_ptr<const Impl> lhs, rhs;
    double param = 0.0;           // scale factor / shift amount
    long iparam = 1;              // dilation factor

    double eval(double x) const {
        switch (kind) {
        case Kind::trig: {
            double v = coeffs[0];
            int d = static_cast<int>((coeffs.size() - 1) / 2);
            double y = mod1d(x);
            for (int k = 1; k <= d; ++k) {
                double ang = kTwoPi * k * y;
                v += coeffs[2 * k - 1] * std::cos(ang) + coeffs[2 * k] * std::sin(ang);
            }
            return v;
        }
        case Kind::piecewise: {
            double lo = pieces.front().x0;
            double y = lo + mod1d(x - lo);
            size_t i = 0, j = pieces.size();
            while (j - i > 1) {
                size_t m = (i + j) / 2;
                if (pieces[m].x0 <= y) i = m; else j = m;
            }
            const Piece& p = pieces[i];
            switch (p.kind) {
            case Piece::Kind::constant: return p.a;
            case Piece::Kind::sine8: return p.a * std::sin(8.0 * M_PI * y);
            case Piece::Kind::smoothstep:
                return p.a + (p.b - p.a) * smoothstep((y - p.x0) / (p.x1 - p.x0));
            }
            return 0.0;
        }
        case Kind::sum: return lhs->eval(x) + rhs->eval(x);
        case Kind::scale: return param * lhs->eval(x);
        case Kind::shift: return lhs->eval(x + param);
        case Kind::dilate: return lhs->eval(static_cast<double>(iparam) * mod1d(x));
        case Kind::logistic: return 1.0 / (1.0 + std::exp(lhs->eval(x)));
        }
        return 0.0;
    }

    // Input of this node is (mult * x + off) where x is the root variable;
    // a leaf feature at t therefore sits at x = (t - off + r)/mult, r < mult.
    void collect_breakpoints(std::vector<double>& out, double off, long mult) const {
        switch (kind) {
        case Kind::trig:
            return;
        case Kind::piecewise:
            for (const Piece& p : pieces)
                for (long r = 0; r < mult; ++r)
                    out.push_back(mod1d((p.x0 - off + static_cast<double>(r)) /
                                        static_cast<double>(mult)));
            return;
        case Kind::sum:
            lhs->collect_breakpoints(out, off, mult);
            rhs->collect_breakpoints(out, off, mult);
            return;
        case Kind::scale:
        case Kind::logistic:
            lhs->collect_breakpoints(out, off, mult);
            return;
        case Kind::shift:
            lhs->collect_breakpoints(out, off + param, mult);
            return;
        case Kind::dilate:
            lhs->collect_breakpoints(out, off * static_cast<double>(iparam),
                                     mult * iparam);
            return;
        }
    }
};

// ------------------------------------------------------------ factories

CircleMap CircleMap::constant(double c) { return trig({c}); }

CircleMap CircleMap::trig(std::vector<double> coeffs) {
    if (coeffs.empty()) coeffs.push_back(0.0);
    if (coeffs.size() % 2 == 0)
        throw Error("trig polynomial needs 2d+1 coefficients");
    auto impl = std::make_shared<Impl>();
    impl->kind = Impl::Kind::trig;
    impl->coeffs = std::move(coeffs);
    return CircleMap(std::move(impl));
}

CircleMap CircleMap::harmonic(int k, double cos_coeff, double sin_coeff, double mean) {
    std::vector<double> c(2 * k + 1, 0.0);
    c[0] = mean;
    c[2 * k - 1] = cos_coeff;
    c[2 * k] = sin_coeff;
    return trig(std::move(c));
}

CircleMap CircleMap::piecewise(std::vector<Piece> pieces) {
    if (pieces.empty()) throw Error("piecewise map needs pieces");
    std::sort(pieces.begin(), pieces.end(),
              [](const Piece& a, const Piece& b) { return a.x0 < b.x0; });
    double cover = 0.0;
    for (size_t i = 0; i < pieces.size(); ++i) {
        if (pieces[i].x1 <= pieces[i].x0) throw Error("empty piecewise piece");
        cover += pieces[i].x1 - pieces[i].x0;
        if (i + 1 < pieces.size() && std::abs(pieces[i].x1 - pieces[i + 1].x0) > 1e-15)
            throw Error("piecewise pieces must be contiguous");
    }
    if (std::abs(cover - 1.0) > 1e-12)
        throw Error("piecewise pieces must cover one period");
    auto impl = std::make_shared<Impl>();
    impl->kind = Impl::Kind::piecewise;
    impl->pieces = std::move(pieces);
    return CircleMap(std::move(impl));
}

CircleMap CircleMap::logistic_of(const CircleMap& z) {
    auto impl = std::make_shared<Impl>();
    impl->kind = Impl::Kind::logistic;
    impl->lhs = z.impl_;
    return CircleMap(std::move(impl));
}

CircleMap CircleMap::shifted(double beta) const {
    if (impl_->kind == Impl::Kind::trig) {
        // exact fold: rotate each harmonic by 2 pi k beta
        const std::vector<double>& c = impl_->coeffs;
        std::vector<double> out(c.size());
        out[0] = c[0];
        int d = static_cast<int>((c.size() - 1) / 2);
        for (int k = 1; k <= d; ++k) {
            double ph = kTwoPi * k * beta;
            double cs = std::cos(ph), sn = std::sin(ph);
            out[2 * k - 1] = c[2 * k - 1] * cs + c[2 * k] * sn;
            out[2 * k] = -c[2 * k - 1] * sn + c[2 * k] * cs;
        }
        return trig(std::move(out));
    }
    auto impl = std::make_shared<Impl>();
    impl->kind = Impl::Kind::shift;
    impl->lhs = impl_;
    impl->param = beta;
    return CircleMap(std::move(impl));
}

CircleMap CircleMap::dilated(long q) const {
    if (q < 1) throw Error("dilation factor must be >= 1");
    if (q == 1) return *this;
    if (impl_->kind == Impl::Kind::trig) {
        int d = static_cast<int>((impl_->coeffs.size() - 1) / 2);
        if (static_cast<long>(d) * q <= 512) {
            std::vector<double> out(2 * d * q + 1, 0.0);
            out[0] = impl_->coeffs[0];
            for (int k = 1; k <= d; ++k) {
                out[2 * k * q - 1] = impl_->coeffs[2 * k - 1];
                out[2 * k * q] = impl_->coeffs[2 * k];
            }
            return trig(std::move(out));
        }
    }
    auto impl = std::make_shared<Impl>();
    impl->kind = Impl::Kind::dilate;
    impl->lhs = impl_;
    impl->iparam = q;
    return CircleMap(std::move(impl));
}

CircleMap CircleMap::scaled(double s) const {
    if (impl_->kind == Impl::Kind::trig) {
        std::vector<double> out(impl_->coeffs);
        for (double& v : out) v *= s;
        return trig(std::move(out));
    }
    auto impl = std::make_shared<Impl>();
    impl->kind = Impl::Kind::scale;
    impl->lhs = impl_;
    impl->param = s;
    return CircleMap(std::move(impl));
}

CircleMap operator+(const CircleMap& f, const CircleMap& g) {
    using K = CircleMap::Impl::Kind;
    if (f.impl_->kind == K::trig && g.impl_->kind == K::trig) {
        const auto& a = f.impl_->coeffs;
        const auto& b = g.impl_->coeffs;
        std::vector<double> out(std::max(a.size(), b.size()), 0.0);
        for (size_t i = 0; i < a.size(); ++i) out[i] += a[i];
        for (size_t i = 0; i < b.size(); ++i) out[i] += b[i];
        return CircleMap::trig(std::move(out));
    }
    auto impl = std::make_shared<CircleMap::Impl>();
    impl->kind = K::sum;
    impl->lhs = f.impl_;
    impl->rhs = g.impl_;
    return CircleMap(std::move(impl));
}

// ------------------------------------------------------------- queries

double CircleMap::eval(double x) const { return impl_->eval(x); }

bool CircleMap::is_trig() const { return impl_->kind == Impl::Kind::trig; }

int CircleMap::trig_degree() const {
    return static_cast<int>((trig_coeffs().size() - 1) / 2);
}

const std::vector<double>& CircleMap::trig_coeffs() const {
    if (impl_->kind != Impl::Kind::trig)
        throw Error("not a plain trig polynomial");
    return impl_->coeffs;
}

std::vector<double> CircleMap::breakpoints() const {
    std::vector<double> pts;
    impl_->collect_breakpoints(pts, 0.0, 1);
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end(),
                          [](double a, double b) { return std::abs(a - b) < 1e-15; }),
              pts.end());
    return pts;
}

double CircleMap::sup_abs(int grid) const {
    double m = 0.0;
    for (int i = 0; i < grid; ++i)
        m = std::max(m, std::abs(eval((i + 0.5) / grid)));
    return m;
}

double CircleMap::sup_abs_derivative(int grid) const {
    double h = 0.25 / grid;
    double m = 0.0;
    for (int i = 0; i < grid; ++i) {
        double x = (i + 0.5) / grid;
        m = std::max(m, std::abs(eval(x + h) - eval(x - h)) / (2.0 * h));
    }
    return m;
}

double CircleMap::integrate(double tol) const {
    if (impl_->kind == Impl::Kind::trig) return impl_->coeffs[0];
    const Impl* im = impl_.get();
    return integrate_fn([im](double x) { return im->eval(x); }, breakpoints(), tol);
}

// -------------------------------------------------------- quadrature

namespace {

struct SimpsonCtx {
    const std::function<double(double)>* f;
    long budget;
};

double simpson_rec(SimpsonCtx& ctx, double a, double b, double fa, double fm,
                   double fb, double whole, double tol, int depth) {
    double m = 0.5 * (a + b);
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = (*ctx.f)(lm), frm = (*ctx.f)(rm);
    double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    double delta = left + right - whole;
    if (std::abs(delta) > 15.0 * tol) {
        if (depth <= 0 || --ctx.budget <= 0)
            throw QuadratureError("quadrature failed to converge within the "
                                  "subdivision budget");
        return simpson_rec(ctx, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
               simpson_rec(ctx, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
    }
    return left + right + delta / 15.0;
}

} // namespace

double integrate_fn(const std::function<double(double)>& f,
                    const std::vector<double>& breakpoints, double tol) {
    std::vector<double> cuts(breakpoints);
    for (double& c : cuts) c = mod1d(c);
    cuts.push_back(0.0);
    cuts.push_back(1.0);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end(),
                           [](double a, double b) { return std::abs(a - b) < 1e-15; }),
               cuts.end());

    SimpsonCtx ctx{&f, 1L << 20};
    Accum total;
    for (size_t i = 0; i + 1 < cuts.size(); ++i) {
        double a = cuts[i], b = cuts[i + 1];
        if (b - a < 1e-15) continue;
        double m = 0.5 * (a + b);
        double fa = f(a + 1e-14 * (b - a)), fb = f(b - 1e-14 * (b - a)), fm = f(m);
        double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
        total.add(simpson_rec(ctx, a, b, fa, fm, fb, whole, tol * (b - a), 48));
    }
    return total.sum;
}

// --------------------------------------------------- fourier truncation

CircleMap fourier_truncate(const std::function<double(double)>& f, int degree,
                           int grid) {
    if (degree < 0) throw Error("negative truncation degree");
    int n = grid > 0 ? grid : std::max(1024, 8 * (degree + 1));
    std::vector<double> fx(n);
    for (int j = 0; j < n; ++j) fx[j] = f(static_cast<double>(j) / n);
    std::vector<double> coeffs(2 * degree + 1, 0.0);
    Accum mean;
    for (int j = 0; j < n; ++j) mean.add(fx[j]);
    coeffs[0] = mean.sum / n;
    for (int k = 1; k <= degree; ++k) {
        Accum ac, as;
        for (int j = 0; j < n; ++j) {
            double ang = kTwoPi * k * j / n;
            ac.add(fx[j] * std::cos(ang));
            as.add(fx[j] * std::sin(ang));
        }
        coeffs[2 * k - 1] = 2.0 * ac.sum / n;
        coeffs[2 * k] = 2.0 * as.sum / n;
    }
    return CircleMap::trig(std::move(coeffs));
}

// ------------------------------------------------- cohomological equation

CohomSolution solve_cohomological(const CircleMap& h, const Frequency& alpha,
                                  CohomMode mode, int depth,
                                  double divisor_floor) {
    const std::vector<double>& hc = h.trig_coeffs();
    int d = static_cast<int>((hc.size() - 1) / 2);
    double c = hc[0];
    if (mode == CohomMode::symmetric && std::abs(c) > 1e-12)
        throw Error("symmetric mode requires zero-mean h");

    if (depth < 0) depth = alpha.depth();
    double alpha_val = to_double(BigRat(alpha.p(depth), alpha.q(depth)));

    std::vector<double> psi(2 * std::max(d, 0) + 1, 0.0);
    for (int k = 1; k <= d; ++k) {
        // h_k = (a_k - i b_k)/2 ; psi_k = h_k / (e^{2 pi i k alpha} - 1)
        double ka = mod1d(static_cast<double>(k) * alpha_val);
        std::complex<double> div(std::cos(kTwoPi * ka) - 1.0, std::sin(kTwoPi * ka));
        if (std::abs(div) < divisor_floor)
            throw SmallDivisorError(k, "small divisor at Fourier mode " + std::to_string(k));
        std::complex<double> hk(0.5 * hc[2 * k - 1], -0.5 * hc[2 * k]);
        std::complex<double> pk = hk / div;
        psi[2 * k - 1] = 2.0 * pk.real();
        psi[2 * k] = -2.0 * pk.imag();
    }
    CircleMap psi_map = CircleMap::trig(std::move(psi));

    double res = 0.0;
    for (int i = 0; i < 1024; ++i) {
        double x = static_cast<double>(i) / 1024.0;
        double lhs = psi_map.eval(x + alpha_val) - psi_map.eval(x);
        res = std::max(res, std::abs(lhs - (h.eval(x) - c)));
    }
    return {mode == CohomMode::symmetric ? 0.0 : c, psi_map, res};
}

// --------------------------------------------------------- birkhoff check

BirkhoffCheck birkhoff_rational_check(const CircleMap& V, long q, double x) {
    if (q < 1) throw Error("q must be >= 1");
    Accum s;
    for (long j = 0; j < q; ++j)
        s.add(std::exp(V.eval(x + static_cast<double>(j) / static_cast<double>(q))));
    double integral = integrate_fn([&V](double t) { return std::exp(V.eval(t)); },
                                   V.breakpoints(), 1e-14);
    return {s.sum, std::abs(s.sum - static_cast<double>(q) * integral)};
}

// ------------------------------------------------------------- serialization

nlohmann::json CircleMap::to_json() const {
    const Impl& im = *impl_;
    using K = Impl::Kind;
    switch (im.kind) {
    case K::trig:
        return {{"kind", "trig"}, {"coeffs", im.coeffs}};
    case K::piecewise: {
        nlohmann::json pieces = nlohmann::json::array();
        for (const Piece& p : im.pieces) {
            const char* t = p.kind == Piece::Kind::constant ? "const"
                          : p.kind == Piece::Kind::sine8 ? "sin8"
                                                         : "step";
            pieces.push_back({{"type", t}, {"x0", p.x0}, {"x1", p.x1},
                              {"a", p.a}, {"b", p.b}});
        }
        return {{"kind", "piecewise"}, {"pieces", pieces}};
    }
    case K::sum:
        return {{"kind", "composite"}, {"op", "sum"},
                {"args", {CircleMap(im.lhs).to_json(), CircleMap(im.rhs).to_json()}}};
    case K::scale:
        return {{"kind", "composite"}, {"op", "scale"}, {"factor", im.param},
                {"args", {CircleMap(im.lhs).to_json()}}};
    case K::shift:
        return {{"kind", "composite"}, {"op", "shift"}, {"beta", im.param},
                {"args", {CircleMap(im.lhs).to_json()}}};
    case K::dilate:
        return {{"kind", "composite"}, {"op", "dilate"}, {"q", im.iparam},
                {"args", {CircleMap(im.lhs).to_json()}}};
    case K::logistic:
        return {{"kind", "composite"}, {"op", "logistic"},
                {"args", {CircleMap(im.lhs).to_json()}}};
    }
    throw Error("unreachable");
}

CircleMap CircleMap::from_json(const nlohmann::json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "trig")
        return trig(j.at("coeffs").get<std::vector<double>>());
    if (kind == "piecewise") {
        std::vector<Piece> pieces;
        for (const auto& pj : j.at("pieces")) {
            Piece p;
            const std::string t = pj.at("type").get<std::string>();
            p.kind = t == "const" ? Piece::Kind::constant
                   : t == "sin8" ? Piece::Kind::sine8
                   : Piece::Kind::smoothstep;
            p.x0 = pj.at("x0").get<double>();
            p.x1 = pj.at("x1").get<double>();
            p.a = pj.at("a").get<double>();
            p.b = pj.value("b", 0.0);
            pieces.push_back(p);
        }
        return piecewise(std::move(pieces));
    }
    if (kind == "composite") {
        const std::string op = j.at("op").get<std::string>();
        const auto& args = j.at("args");
        if (op == "sum") return from_json(args.at(0)) + from_json(args.at(1));
        if (op == "scale") return from_json(args.at(0)).scaled(j.at("factor").get<double>());
        if (op == "shift") return from_json(args.at(0)).shifted(j.at("beta").get<double>());
        if (op == "dilate") return from_json(args.at(0)).dilated(j.at("q").get<long>());
        if (op == "logistic") return logistic_of(from_json(args.at(0)));
        throw Error("unknown composite op: " + op);
    }
    throw Error("unknown CircleMap kind: " + kind);
}

} // namespace qpwalk
