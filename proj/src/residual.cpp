#include "bbpde/residual.hpp"

#include <cmath>

namespace bbpde {

std::vector<GridNode> make_diag_grid(double t_lo, double t_hi, int nt,
                                     double x_radius, int nx) {
    std::vector<GridNode> grid;
    grid.reserve(size_t(nt) * nx);
    for (double t : log_spaced(t_lo, t_hi, nt))
        for (Cplx x : circle_nodes(0.0, x_radius, nx)) grid.push_back({t, x});
    return grid;
}

ResidualReport residual(const EquationSpec& spec, const SolutionHandle& u,
                        const std::vector<GridNode>& grid,
                        const ResidualOptions& opt) {
    ResidualReport rep;
    rep.grid = grid;
    rep.residual_values.reserve(grid.size());
    const double h = opt.log_step;
    for (const GridNode& node : grid) {
        const double t = node.t;
        const Cplx x = node.x;
        if (!(t * std::exp(-2 * h) > 0) || t * std::exp(2 * h) > u.t_max)
            throw DomainError("residual: stencil exits the t-domain");
        // t du/dt = dw/dsigma at sigma = log t (4th-order central)
        const Cplx up2 = u(t * std::exp(2 * h), x), up1 = u(t * std::exp(h), x);
        const Cplx um1 = u(t * std::exp(-h), x), um2 = u(t * std::exp(-2 * h), x);
        const Cplx tut = (-up2 + 8.0 * up1 - 8.0 * um1 + um2) / (12.0 * h);
        const Cplx ux = deriv_x(u.eval, t, x, 1, u.x_radius, opt.contour_points,
                                opt.contour_radius);
        const Cplx uval = u(t, x);
        const Cplx res = tut - spec.F(t, x, uval, ux);
        rep.residual_values.push_back(res);
        rep.residual_sup = std::max(rep.residual_sup, std::abs(res));
        rep.relative_scale = std::max(rep.relative_scale, std::abs(tut));
    }
    return rep;
}

std::vector<GridNode> default_residual_grid(const EquationSpec& spec,
                                            const SolutionHandle& u) {
    const double t_hi = 0.8 * std::min(u.t_max, spec.T0);
    const double t_lo = std::max(1e-3, 1e-3 * t_hi);
    const double r = 0.5 * std::min(u.x_radius, spec.R0);
    return make_diag_grid(t_lo, t_hi, 10, r, 6);
}

}  // namespace bbpde
