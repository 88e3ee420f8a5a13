#pragma once

#include <vector>

#include "bbpde/field.hpp"
#include "bbpde/solution.hpp"

namespace bbpde {

struct GridNode {
    double t;
    Cplx x;
};

/// Tensor diagnostic grid: log-spaced t nodes times circle x nodes.
std::vector<GridNode> make_diag_grid(double t_lo, double t_hi, int nt,
                                     double x_radius, int nx);

/// PDE residual |t u_t - F(t,x,u,u_x)| per node plus the sup. t u_t is a
/// 4th-order central stencil in sigma = log t; u_x is a Cauchy contour.
struct ResidualReport {
    std::vector<GridNode> grid;
    std::vector<Cplx> residual_values;
    double residual_sup = 0.0;
    double relative_scale = 0.0;  // sup |t u_t| over the grid
};

struct ResidualOptions {
    double log_step = 1e-3;        // h of the sigma stencil
    int contour_points = 32;
    double contour_radius = 0.0;   // <= 0: half the remaining margin
};

ResidualReport residual(const EquationSpec& spec, const SolutionHandle& u,
                        const std::vector<GridNode>& grid,
                        const ResidualOptions& opt = {});

/// Default certification grid for a handle on its own domain.
std::vector<GridNode> default_residual_grid(const EquationSpec& spec,
                                            const SolutionHandle& u);

}  // namespace bbpde
