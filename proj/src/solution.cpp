#include "bbpde/solution.hpp"

#include "bbpde/field.hpp"

namespace bbpde {

SolutionHandle make_handle(std::function<Cplx(double, Cplx)> eval, double t_max,
                           double x_radius, std::string provenance,
                           double claimed_exponent, double tolerance) {
    SolutionHandle h;
    h.eval = std::move(eval);
    h.t_max = t_max;
    h.x_radius = x_radius;
    h.provenance = std::move(provenance);
    h.claimed_exponent = claimed_exponent;
    h.tolerance = tolerance;
    auto f = h.eval;
    h.eval_dx = [f, x_radius](double t, Cplx x) {
        return deriv_x(f, t, x, 1, x_radius, 32);
    };
    return h;
}

}  // namespace bbpde
