#pragma once

#include <functional>
#include <vector>

#include "bbpde/common.hpp"
#include "bbpde/germ.hpp"
#include "bbpde/weight.hpp"

namespace bbpde {

/// A function f(t,x), continuous in real t on (0, t_max] and holomorphic in
/// complex x on |x| < x_radius. The carrier of every coefficient in the
/// library; evaluators are pure and safe to share across threads.
struct ScalarField {
    std::function<Cplx(double, Cplx)> eval;
    double t_max = 1.0;
    double x_radius = 1.0;

    ScalarField() = default;
    ScalarField(std::function<Cplx(double, Cplx)> f, double tmax, double xrad)
        : eval(std::move(f)), t_max(tmax), x_radius(xrad) {}

    Cplx operator()(double t, Cplx x) const { return eval(t, x); }

    static ScalarField constant(Cplx c, double tmax = 1.0, double xrad = 1.0) {
        return ScalarField([c](double, Cplx) { return c; }, tmax, xrad);
    }
    static ScalarField zero(double tmax = 1.0, double xrad = 1.0) {
        return constant(0.0, tmax, xrad);
    }
    bool valid() const { return bool(eval); }
};

/// order-th complex x-derivative of f(t,.) at x via an M-point trapezoid
/// discretization of the Cauchy integral on |z - x| = contour_radius.
/// Exact for polynomial degree < M; error otherwise decays geometrically in M.
/// contour_radius <= 0 picks 0.5 * (x_radius - |x|).
Cplx deriv_x(const ScalarField& f, double t, Cplx x, int order,
             int points = 64, double contour_radius = 0.0);

/// Same contour evaluation for a bare evaluator with a known analyticity disc.
Cplx deriv_x(const std::function<Cplx(double, Cplx)>& f, double t, Cplx x,
             int order, double x_radius, int points = 64,
             double contour_radius = 0.0);

struct HolomorphyReport {
    bool ok = false;
    double fitted_rate = 0.0;   // geometric decay rate of Taylor coefficients
    double contour_radius = 0.0;
};

/// Samples f(t,.) on a circle and checks geometric coefficient decay
/// (the numerical footprint of holomorphy on the disc).
HolomorphyReport check_holomorphy(const ScalarField& f, double t,
                                  double contour_radius = 0.0, int degree = 48);

struct NonlinearTerm {
    int j = 0;
    int alpha = 0;
    ScalarField coeff;  // a_{j,alpha}(t,x)
};

/// Normal form of the right side: F = a + lambda z1 + b z2 + sum a_{j,a} z1^j z2^a.
/// Shared container for both user-assembled problems and extractions from a
/// full F evaluator.
struct EquationSpec {
    ScalarField a, lambda, b;
    std::vector<NonlinearTerm> nonlinear;  // all terms have j + alpha >= 2
    double T0 = 0.3;
    double R0 = 1.0;
    double rho0 = 1.0;
    WeightFn weight;

    Cplx F(double t, Cplx x, Cplx z1, Cplx z2) const;
    /// Nonlinear remainder R(t,x,z1,z2) = sum_{j+alpha>=2} a_{j,a} z1^j z2^alpha.
    Cplx R(double t, Cplx x, Cplx z1, Cplx z2) const;
    Cplx R_z1(double t, Cplx x, Cplx z1, Cplx z2) const;
    Cplx R_z2(double t, Cplx x, Cplx z1, Cplx z2) const;
    /// c_{j,alpha}(t,x) of the Taylor re-expansion of R about (v, vx):
    /// R(v+w, vx+wx) - R(v, vx) = c10 w + c01 wx + sum_{j+a>=2} c_{ja} w^j wx^a.
    Cplx shifted_coeff(int j, int alpha, double t, Cplx x, Cplx v, Cplx vx) const;

    /// lambda(0,0) as the t->0 limit along t_k = 2^{-k} with Aitken acceleration.
    Cplx lambda00() const;
    /// lambda(0,.) as a germ at x = 0 (degree-`degree` Taylor data).
    HoloGerm lambda0_germ(double sample_radius = 0.0, int degree = 32) const;
};

/// t -> 0 limit of a field at fixed x (Aitken-accelerated dyadic ladder).
Cplx limit_t0(const ScalarField& f, Cplx x);

struct NormalFormOptions {
    int j_max = 4;
    int alpha_max = 4;
    double torus_radius = 0.0;  // <= 0: 0.5 * rho0
    int torus_points = 32;
    double tol = 1e-9;          // A2/A3 and tail tolerance (relative)
};

struct NormalFormResult {
    EquationSpec spec;
    double tail_bound = 0.0;       // norm of the last discarded coefficient shell
    double a2_defect = 0.0;        // sup |a(t->0, x)|
    double a3_defect = 0.0;        // sup |b(t->0, x)|
    double reconstruction_error = 0.0;
};

/// Taylor normal-form extraction of F(t,x,z1,z2) by bivariate Cauchy
/// integration over a torus |z1| = |z2| = torus_radius. Verifies the
/// structural assumptions (F(0,x,0,0) = 0 and F_{z2}(0,x,0,0) = 0) and that
/// the discarded tail is below tolerance.
NormalFormResult normal_form(
    const std::function<Cplx(double, Cplx, Cplx, Cplx)>& F, double T0, double R0,
    double rho0, const WeightFn& weight, const NormalFormOptions& opt = {});

}  // namespace bbpde
