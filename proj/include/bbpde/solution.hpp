#pragma once

#include <functional>
#include <string>

#include "bbpde/common.hpp"

namespace bbpde {

/// An evaluable solution u(t,x) with provenance, the claimed small-t growth
/// exponent d (|u|, |u_x| <= C t^d near t = 0; `exponent_sharp_below` marks
/// the case where only every exponent strictly below d is attained), and the
/// residual tolerance its producer certifies.
struct SolutionHandle {
    std::function<Cplx(double, Cplx)> eval;
    std::function<Cplx(double, Cplx)> eval_dx;
    double t_max = 1.0;
    double x_radius = 1.0;
    std::string provenance = "exact-formula";  // exact-formula | series | picard | sum
    double claimed_exponent = 0.0;
    bool exponent_sharp_below = false;
    double tolerance = 1e-8;

    Cplx operator()(double t, Cplx x) const { return eval(t, x); }
    Cplx dx(double t, Cplx x) const { return eval_dx(t, x); }
    bool valid() const { return bool(eval); }
};

/// Convenience builder: derivative evaluator from a numerical Cauchy contour
/// around the evaluation point.
SolutionHandle make_handle(std::function<Cplx(double, Cplx)> eval, double t_max,
                           double x_radius, std::string provenance,
                           double claimed_exponent, double tolerance);

inline SolutionHandle zero_solution(double t_max, double x_radius) {
    SolutionHandle h;
    h.eval = [](double, Cplx) { return Cplx(0.0); };
    h.eval_dx = [](double, Cplx) { return Cplx(0.0); };
    h.t_max = t_max;
    h.x_radius = x_radius;
    h.provenance = "exact-formula";
    h.claimed_exponent = std::numeric_limits<double>::infinity();
    h.tolerance = 0.0;
    return h;
}

}  // namespace bbpde
