#pragma once

#include <vector>

#include "bbpde/common.hpp"

namespace bbpde {

/// Holomorphic germ at x = 0: finite Taylor coefficients plus a radius of
/// validity. Arithmetic is truncated power-series arithmetic; the radius of a
/// product is the min of the factor radii.
struct HoloGerm {
    std::vector<Cplx> coeffs;  // coeffs[k] multiplies x^k
    double radius = 1.0;

    HoloGerm() = default;
    HoloGerm(std::vector<Cplx> c, double r) : coeffs(std::move(c)), radius(r) {}

    static HoloGerm constant(Cplx c, double r = 1.0) { return HoloGerm({c}, r); }
    static HoloGerm zero(double r = 1.0) { return HoloGerm({}, r); }

    /// Sample a holomorphic function on a circle |x| = rho and recover its
    /// Taylor coefficients through degree-1 aliasing-free DFT inversion.
    static HoloGerm from_samples(const std::function<Cplx(Cplx)>& f, double rho,
                                 int degree, double radius);

    bool is_zero(double tol = 0.0) const {
        for (const Cplx& c : coeffs)
            if (std::abs(c) > tol) return false;
        return true;
    }

    int degree() const { return coeffs.empty() ? -1 : int(coeffs.size()) - 1; }

    Cplx eval(Cplx x) const {  // Horner
        Cplx acc = 0.0;
        for (size_t i = coeffs.size(); i-- > 0;) acc = acc * x + coeffs[i];
        return acc;
    }
    Cplx operator()(Cplx x) const { return eval(x); }

    HoloGerm derivative() const {
        if (coeffs.size() <= 1) return zero(radius);
        std::vector<Cplx> d(coeffs.size() - 1);
        for (size_t k = 1; k < coeffs.size(); ++k) d[k - 1] = double(k) * coeffs[k];
        return HoloGerm(std::move(d), radius);
    }

    /// max_k |c_k| r^k — cheap magnitude proxy on |x| <= r.
    double norm_at(double r) const {
        double m = 0.0, p = 1.0;
        for (const Cplx& c : coeffs) { m = std::max(m, std::abs(c) * p); p *= r; }
        return m;
    }

    void trim(double tol = 0.0) {
        while (!coeffs.empty() && std::abs(coeffs.back()) <= tol) coeffs.pop_back();
    }
};

HoloGerm germ_add(const HoloGerm& a, const HoloGerm& b);
HoloGerm germ_scale(const HoloGerm& a, Cplx s);
/// Truncated Cauchy product; degree capped at max_degree.
HoloGerm germ_mul(const HoloGerm& a, const HoloGerm& b, int max_degree = 32);
/// Power-series quotient a / b; requires b(0) != 0.
HoloGerm germ_div(const HoloGerm& a, const HoloGerm& b, int max_degree = 32);

/// Geometric-decay check of the coefficients: fits |c_k| ~ M r^k and reports
/// whether evaluation converges on |x| < radius.
bool germ_coefficients_decay(const HoloGerm& g, double* fitted_rate = nullptr);

}  // namespace bbpde
