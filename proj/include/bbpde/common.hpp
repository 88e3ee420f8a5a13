#pragma once

#include <complex>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace bbpde {

using Cplx = std::complex<double>;

constexpr double kPi = 3.14159265358979323846;

/// Base class for all library errors; subclasses name the failure mode.
struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Evaluation point left the validity region (disc, wedge, or hull).
struct DomainError : Error { using Error::Error; };
/// A requested accuracy could not be reached (quadrature, stencil, fit).
struct AccuracyError : Error { using Error::Error; };
/// An assumption of the calling contract is violated by the data.
struct PreconditionError : Error { using Error::Error; };
/// Input data fails one of the standing structural assumptions.
struct SpecInvalidError : Error { using Error::Error; };
/// Coefficient tail does not decay; truncation unjustified.
struct TruncationError : Error { using Error::Error; };
/// mu(t)/t is not integrable near t = 0.
struct NonIntegrableWeightError : Error { using Error::Error; };
/// A characteristic left the x-disc before reaching the target time.
struct EscapeError : Error {
    EscapeError(const std::string& what, double exit_time)
        : Error(what), exit_time(exit_time) {}
    double exit_time;
};
/// Adaptive step size underflowed.
struct StiffnessError : Error { using Error::Error; };
/// Observed iteration ratio >= 1.
struct NoContractionError : Error {
    NoContractionError(const std::string& what, double ratio)
        : Error(what), ratio(ratio) {}
    double ratio = 0.0;
};
/// Iteration budget exhausted before the tolerance was met.
struct ConvergenceError : Error { using Error::Error; };
/// Domain-shrink retries exhausted.
struct ShrinkError : Error { using Error::Error; };
/// Seed radii or bracketing constants are inconsistent.
struct ConfigurationError : Error { using Error::Error; };
/// Iterate left the polydisc where the nonlinearity is defined.
struct RangeError : Error { using Error::Error; };
/// The candidate is not in the solution family (extrapolation diverges).
struct NonMemberError : Error { using Error::Error; };
/// A base solution failed its residual certificate.
struct InvalidBaseError : Error { using Error::Error; };

inline bool is_finite(Cplx z) {
    return std::isfinite(z.real()) && std::isfinite(z.imag());
}

/// Integer power with a possibly negative base.
inline double ipow(double base, int p) {
    double r = 1.0;
    for (int i = 0; i < p; ++i) r *= base;
    return r;
}

/// Least-squares slope and intercept of y against x.
inline void linear_fit(const std::vector<double>& x, const std::vector<double>& y,
                       double& slope, double& intercept) {
    const size_t n = x.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < n; ++i) {
        sx += x[i]; sy += y[i]; sxx += x[i] * x[i]; sxy += x[i] * y[i];
    }
    const double det = n * sxx - sx * sx;
    slope = (n * sxy - sx * sy) / det;
    intercept = (sy - slope * sx) / n;
}

/// Log-spaced samples on [lo, hi].
inline std::vector<double> log_spaced(double lo, double hi, int n) {
    std::vector<double> out(n);
    const double a = std::log(lo), b = std::log(hi);
    for (int i = 0; i < n; ++i)
        out[i] = std::exp(a + (b - a) * i / double(n - 1));
    return out;
}

/// n equally spaced points on the circle |x - center| = radius.
inline std::vector<Cplx> circle_nodes(Cplx center, double radius, int n) {
    std::vector<Cplx> out(n);
    for (int i = 0; i < n; ++i) {
        const double th = 2.0 * kPi * i / n;
        out[i] = center + radius * Cplx(std::cos(th), std::sin(th));
    }
    return out;
}

}  // namespace bbpde
