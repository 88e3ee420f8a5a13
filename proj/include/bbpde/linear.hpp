#pragma once

#include "bbpde/field.hpp"
#include "bbpde/flow.hpp"
#include "bbpde/germ.hpp"
#include "bbpde/solution.hpp"

namespace bbpde {

/// Solvers for the linear operator L = t d/dt - lambda - b d/dx. All of them
/// transport data along characteristics and accumulate the integrating factor
/// in the same adaptive pass, in sigma = log t.

struct LinearSolveOptions {
    double rk_tol = 1e-12;
    double t_floor = 1e-14;   // truncation point standing in for t = 0
    int deriv_points = 32;
};

/// Backward Cauchy problem L w = g, w|_{t=T} = psi, solved on the hull of
/// characteristics through D_{R_seed} x {T}. The returned evaluator realizes
/// the transported-data formula with the Duhamel correction.
SolutionHandle solve_backward_cauchy(const ScalarField& lambda,
                                     const ScalarField& b, const ScalarField& g,
                                     const HoloGerm& psi, double T,
                                     const LinearSolveOptions& opt = {});

/// Flat initial problem L v = 0, v(0,x) = psi(x), for lambda vanishing at
/// t = 0: v = psi(flow to 0) * exp(int_0^t lambda/s ds).
SolutionHandle solve_flat_initial(const ScalarField& lambda, const ScalarField& b,
                                  const HoloGerm& psi, const WedgeDomain& W,
                                  const LinearSolveOptions& opt = {});

/// Singular initial problem L v = 0 with data t^{-lambda(0,x)} v -> psi.
/// Reduces to the flat problem for w = t^{-lambda(0,x)} v and returns
/// v = exp(lambda(0,x) log t) * w.
SolutionHandle solve_singular_initial(const ScalarField& lambda,
                                      const ScalarField& b, const HoloGerm& psi,
                                      const LinearSolveOptions& opt = {});

/// Decaying particular solution of L w = g for uniformly negative
/// Re lambda_eff: w = int_0^t exp[int_tau^t lambda_eff/s ds] g(tau,.)/tau dtau
/// along characteristics. w(t,.) -> 0 as t -> 0.
SolutionHandle solve_decaying_particular(const ScalarField& lambda_eff,
                                         const ScalarField& b,
                                         const ScalarField& g,
                                         const LinearSolveOptions& opt = {});

struct DecayBoundReport {
    bool precondition_ok = false;  // 0 < mu < a0 <= Re lambda on samples
    int nodes = 0;
    int violations = 0;
    int violations_dx = 0;
    double max_slack = -1e300;     // max over nodes of |w| - bound
    double max_slack_dx = -1e300;
};

/// Checks |w(t,x)| <= psi_bound (t/T)^{a0} + G t^mu / (a0 - mu) on the grid,
/// and the same bound with (psi_dx_bound, G_dx) for |w_x|.
DecayBoundReport check_decay_bound(const SolutionHandle& w, double psi_bound,
                                   double G, double mu, double a0, double T,
                                   const ScalarField& lambda,
                                   const std::vector<struct GridNode>& grid,
                                   double psi_dx_bound = -1.0, double G_dx = -1.0);

}  // namespace bbpde
