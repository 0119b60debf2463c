#pragma once

// Real functions on the unit circle: trig polynomials, piecewise closed-form
// maps with smooth connectors, and composites. Immutable and shareable; all
// operations are pure.

#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace qpwalk {

class Frequency;

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct SmallDivisorError : Error {
    int mode;
    SmallDivisorError(int k, const std::string& msg) : Error(msg), mode(k) {}
};

struct QuadratureError : Error {
    using Error::Error;
};

// C-infinity step: 0 at t<=0, 1 at t>=1, flat at both ends.
double smoothstep(double t);

class CircleMap {
public:
    // One piece of a piecewise map, on [x0,x1) in pattern coordinates.
    //   constant:   value a
    //   sine8:      a * sin(8 pi x)
    //   smoothstep: a + (b-a) * smoothstep((x-x0)/(x1-x0))
    struct Piece {
        enum class Kind { constant, sine8, smoothstep };
        Kind kind;
        double x0, x1;
        double a = 0.0, b = 0.0;
    };

    CircleMap() : CircleMap(constant(0.0)) {}

    static CircleMap constant(double c);
    // coeffs = [a0, a1, b1, a2, b2, ...]; f = a0 + sum ak cos(2 pi k x) + bk sin(2 pi k x)
    static CircleMap trig(std::vector<double> coeffs);
    static CircleMap harmonic(int k, double cos_coeff, double sin_coeff, double mean = 0.0);
    // pieces must be sorted, contiguous, and cover an interval of length 1
    static CircleMap piecewise(std::vector<Piece> pieces);
    static CircleMap logistic_of(const CircleMap& z); // x -> 1/(1+exp(z(x)))

    CircleMap shifted(double beta) const;  // x -> f(x + beta)
    CircleMap dilated(long q) const;       // x -> f(q x)
    CircleMap scaled(double s) const;
    friend CircleMap operator+(const CircleMap& f, const CircleMap& g);

    double eval(double x) const; // f(x mod 1)
    double operator()(double x) const { return eval(x); }

    // exact for trig polynomials; adaptive quadrature otherwise (abs tol)
    double integrate(double tol = 1e-12) const;

    bool is_trig() const;
    int trig_degree() const;
    // [a0, a1, b1, ...]; throws unless is_trig()
    const std::vector<double>& trig_coeffs() const;

    // quadrature split points in [0,1) (piece edges of the full composite)
    std::vector<double> breakpoints() const;

    double sup_abs(int grid = 1 << 14) const;
    double sup_abs_derivative(int grid = 1 << 17) const; // finite-difference scan

    nlohmann::json to_json() const;
    static CircleMap from_json(const nlohmann::json& j);

private:
    struct Impl;
    explicit CircleMap(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
    std::shared_ptr<const Impl> impl_;
};

// Adaptive Simpson on [0,1) split at the given breakpoints; per-interval
// tolerance is proportional to interval width so the total is <= tol.
// Throws QuadratureError when the subdivision budget (2^20 intervals) is hit.
double integrate_fn(const std::function<double(double)>& f,
                    const std::vector<double>& breakpoints,
                    double tol = 1e-12);

// Fourier truncation by uniform-grid projection (spectrally accurate for
// smooth 1-periodic integrands; exact for trig input when grid is large enough).
CircleMap fourier_truncate(const std::function<double(double)>& f, int degree,
                           int grid = 0);

enum class CohomMode { symmetric, asymmetric };

struct CohomSolution {
    double c;            // mean removed in asymmetric mode (0 in symmetric)
    CircleMap psi;       // trig polynomial with psi(x+alpha)-psi(x) = h(x)-c
    double residual_sup; // sup over a 1024-grid
};

// Solve the cohomological equation per Fourier mode over alpha's convergent
// at `depth` (default: the frequency's full depth). Throws SmallDivisorError
// if |e^{2 pi i k alpha}-1| < divisor_floor for some mode k <= deg h.
CohomSolution solve_cohomological(const CircleMap& h, const Frequency& alpha,
                                  CohomMode mode, int depth = -1,
                                  double divisor_floor = 1e-14);

struct BirkhoffCheck {
    double sum_value; // sum_{j=0}^{q-1} e^{V(x+j/q)}
    double defect;    // |sum - q * int e^V|
};

// Rational-orbit Birkhoff sum of e^V: modes of degree < q are annihilated
// exactly, so the defect collapses once q exceeds the interacting degrees.
BirkhoffCheck birkhoff_rational_check(const CircleMap& V, long q, double x);

} // namespace qpwalk
