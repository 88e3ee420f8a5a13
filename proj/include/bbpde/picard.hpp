#pragma once

#include <optional>

#include "bbpde/field.hpp"
#include "bbpde/gridfn.hpp"
#include "bbpde/solution.hpp"

namespace bbpde {

/// Settings of the contraction engine. The equation is solved in the shifted
/// variable W = t^{-d_shift} u so that the effective linear part has
/// Re(lambda - d_shift) <= -delta; the iterate lives on an nt x nx
/// coefficient grid (powers of two for refinement comparisons).
struct PicardConfig {
    double d_shift = 0.0;      // 0: chosen from the data
    int nt = 128;
    int nx = 64;
    double t_lo = 1e-9;        // bottom of the stored grid
    double tol = 1e-10;        // sup-norm stop on the shifted iterate
    int max_iter = 40;
    int shrink_budget = 8;
    double delta = 0.05;       // uniform negativity margin
    double T_work = 0.0;       // 0: spec.T0
    double R_grid = 0.0;       // 0: 0.5 * spec.R0
    double march_step = 0.015;  // sigma step of the spectral march
    double t_floor = 1e-14;    // launch point of the decaying integral
    /// Override of the nonlinearity N(t, x, w, w_x); default is spec.R.
    std::function<Cplx(double, Cplx, Cplx, Cplx)> nonlin_override;
};

struct PicardDiagnostics {
    int iterations = 0;
    std::vector<double> ratios;   // ||dW_{n+1}|| / ||dW_n||
    int shrink_rounds = 0;
    double final_update = 0.0;
    double d_shift = 0.0;
    double T_used = 0.0;
    double R_used = 0.0;
    bool trivial = false;         // zero right side, one-step exit
};

/// Solves t u_t = rhs + lambda u + b u_x + R(t,x,u,u_x) (the spec's fields
/// with `rhs` in place of a) by Picard iteration on the decaying-particular
/// solve, with contraction monitoring and a T/2, 0.8R shrink schedule. The
/// returned evaluator re-applies the fixed-point map at the query point, so
/// its accuracy is set by the integrator rather than the grid.
SolutionHandle picard_solve(const EquationSpec& spec, const ScalarField& rhs,
                            const PicardConfig& config = {},
                            PicardDiagnostics* diag = nullptr);

}  // namespace bbpde
