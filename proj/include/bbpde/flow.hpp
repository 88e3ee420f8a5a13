#pragma once

#include <optional>
#include <vector>

#include "bbpde/field.hpp"
#include "bbpde/weight.hpp"

namespace bbpde {

/// Wedge W_{T,R,r} = {(t,x) : 0 <= t <= T, phi(t)/r + |x| < R}, forward
/// invariant under the characteristic flow when r <= 1/B for the drift
/// bound |b| <= B mu(t).
struct WedgeDomain {
    double T;
    double R;
    double r;
    WeightFn weight;

    WedgeDomain(double T, double R, double r, WeightFn w,
                std::optional<double> drift_bound = std::nullopt);

    bool contains(double t, Cplx x) const {
        if (t < 0 || t > T) return false;
        const double p = t == 0.0 ? 0.0 : weight.phi(t);
        return p / r + std::abs(x) < R;
    }
    /// phi(t)/r + |x|, the quantity whose level set bounds the wedge.
    double level(double t, Cplx x) const {
        const double p = t == 0.0 ? 0.0 : weight.phi(t);
        return p / r + std::abs(x);
    }
};

/// Characteristic flow of dx/dtau = -b(tau,x)/tau, integrated as
/// dx/dsigma = -b(e^sigma, x) in sigma = log tau with adaptive Runge-Kutta.
struct FlowMap {
    ScalarField drift;          // b (possibly b + b1)
    double rk_tol = 1e-10;
    double t_floor = 1e-12;     // "t = 0" truncation point
    double escape_radius = 0.0; // <= 0: drift.x_radius

    /// x(t) through (t0, x0). t may be 0 (truncated at t_floor; the tail
    /// displacement is bounded by B * phi(t_floor) for admissible drifts).
    Cplx flow(double t0, Cplx x0, double t) const;

    /// x(t) and the accumulated integral int lambda(s, x(s))/s ds along the
    /// trajectory, in one adaptive pass.
    struct Transported {
        Cplx x;
        Cplx lambda_integral;
    };
    Transported flow_with_integral(const ScalarField& lambda, double t0, Cplx x0,
                                   double t) const;
};

Cplx flow(const FlowMap& fm, double t0, Cplx x0, double t);

struct InvarianceReport {
    bool precondition_ok = true;   // r <= 1/B held
    int samples = 0;
    int violations = 0;
    double max_level = 0.0;        // max phi(t)/r + |x(t)| along trajectories
};

/// Draw `samples` points of W, integrate each to t = 0, and check membership
/// at log-spaced intermediate times. When r > 1/B the report flags the failed
/// precondition instead of asserting invariance.
InvarianceReport invariance_check(const FlowMap& fm, const WedgeDomain& W,
                                  int samples, double drift_bound,
                                  uint64_t seed = 12345);

/// Characteristic hull D = union of trajectories seeded on |x| < R_seed at
/// t = T; membership is decided by flowing (t,x) forward to T.
struct CharacteristicHull {
    FlowMap fm;
    double T;
    double R_seed;
    double R_inner;  // (0,T] x D_{R_inner} is contained in the hull

    bool contains(double t, Cplx x) const;
    /// Seed point of the trajectory through (t, x).
    Cplx seed_of(double t, Cplx x) const;
};

/// Builds the hull; when bounds are supplied, validates the seed-radius
/// inequalities R + B phi(T) < R_seed < R0 - B phi(T).
CharacteristicHull hull(const FlowMap& fm, double T, double R_seed,
                        std::optional<double> drift_bound = std::nullopt,
                        std::optional<const WeightFn*> weight = std::nullopt);

struct InvertFlowResult {
    Cplx xi;
    int iterations = 0;
    double last_update = 0.0;
    double observed_ratio = 0.0;  // geometric ratio of the update sequence
};

/// Solve flow(T; ., t0) = x0 for the seed xi by successive approximations
/// xi_n = x0 - int_{t0}^T b(tau, flow(tau; T, xi_{n-1}))/tau dtau.
/// When the contraction constants are not supplied the precondition is
/// replaced by an empirical ratio probe over the first iterations.
InvertFlowResult invert_flow(const FlowMap& fm, double t0, Cplx x0, double T,
                             int budget = 50, double tol = 1e-10);

}  // namespace bbpde
