#pragma once

#include <map>
#include <optional>

#include "bbpde/field.hpp"
#include "bbpde/germ.hpp"
#include "bbpde/solution.hpp"

namespace bbpde {

/// psi_k = (1/(k lambda)) sum_{i+j=k-1} psi_i' psi_j', truncated Taylor
/// convolution at `work_degree`; returns psi_0..psi_K.
std::vector<HoloGerm> psi_recurrence(const HoloGerm& psi0, Cplx lambda, int K,
                                     int work_degree = 32);

/// The explicit one-parameter family for the reduced model equation
/// t w_t = lambda w + f(t) w_x + (w_x)^2:
///   W(psi)(t,x) = sum_{k<=K} psi_k(eta(t) + x) t^{(k+1) lambda},
///   eta(t) = int_0^t f(tau)/tau dtau.
struct SeriesSolution {
    Cplx lambda0;
    std::function<Cplx(double)> eta;
    std::vector<HoloGerm> psis;
    int K = 0;
    double t_max = 0.3;
    double x_radius = 0.5;

    Cplx eval(double t, Cplx x) const;
    Cplx eval_dx(double t, Cplx x) const;
    SolutionHandle to_handle(double tolerance = 1e-8) const;
};

SeriesSolution series_family(Cplx lambda, const std::function<Cplx(double)>& f,
                             const HoloGerm& psi, int K, double t_max = 0.3,
                             double x_radius = 0.5);

/// Benchmark model t u_t = x t^mu + lambda u + (u_x)^2 used throughout the
/// test and acceptance suites.
EquationSpec quadratic_model_spec(Cplx lambda, double mu, double T0 = 0.3,
                                  double R0 = 1.0, double rho0 = 1.0);

/// Printed closed-form base solution of the benchmark model, with the
/// resonant case splits (lambda = 2 mu picks up log t; lambda = mu picks up
/// log t and log^2 t).
SolutionHandle quadratic_model_base(Cplx lambda, double mu, double T0 = 0.3,
                                    double R0 = 1.0);

/// One term g(x) t^m (log t)^p of a finite power-log expansion in t.
struct PowerLogTerm {
    double m = 0.0;
    int p = 0;
    HoloGerm g;
};

/// Finite sums of power-log terms with germ coefficients; the arithmetic the
/// mode-structured ladder runs on.
class PowerLogSeries {
  public:
    PowerLogSeries() = default;
    explicit PowerLogSeries(std::vector<PowerLogTerm> terms);

    static PowerLogSeries zero() { return {}; }
    static PowerLogSeries single(double m, int p, HoloGerm g);

    const std::vector<PowerLogTerm>& terms() const { return terms_; }
    bool empty() const { return terms_.empty(); }
    double min_exponent() const;  // +inf when empty

    Cplx eval(double t, Cplx x) const;
    Cplx eval_dx(double t, Cplx x) const;
    PowerLogSeries dx() const;

    PowerLogSeries& add(const PowerLogSeries& other);
    PowerLogSeries& add_term(double m, int p, const HoloGerm& g);
    PowerLogSeries& scale(Cplx s);
    static PowerLogSeries mul(const PowerLogSeries& a, const PowerLogSeries& b,
                              int work_degree = 32);

    /// Drop terms negligible on (0, t_ref] x D_r at the given threshold.
    void prune(double t_ref, double r, double threshold);

    SolutionHandle to_handle(double t_max, double x_radius,
                             double tolerance = 1e-8) const;

  private:
    void normalize();
    std::vector<PowerLogTerm> terms_;  // sorted by (m, p), merged
};

/// Applies (t d/dt - lambda(x))^{-1} to g(x) t^m (log t)^p. Non-resonant
/// modes solve a triangular system in the log powers; a resonant mode
/// (m = lambda(0), constant lambda) gains one log factor.
PowerLogSeries solve_mode(double m, int p, const HoloGerm& g,
                          const HoloGerm& lambda, double resonance_tol = 1e-9,
                          int work_degree = 32);

/// Attempt to express a field as a single mode g(x) t^m (log t)^p; empty when
/// the field is not of that form to tolerance.
struct PowerModeDetection {
    bool is_zero = false;
    double m = 0.0;
    int p = 0;
    HoloGerm g;
};
std::optional<PowerModeDetection> detect_power_mode(const ScalarField& f,
                                                    double T0, double R0,
                                                    double rel_tol = 1e-8);

/// Is the field t-independent (to tolerance)? Returns the germ when it is.
std::optional<HoloGerm> detect_t_constant(const ScalarField& f, double T0,
                                          double R0, double rel_tol = 1e-10);

/// Finite reduction u = u_1 + ... + u_N + w: the ladder terms, the chosen
/// exponent d, and the transformed equation for the remainder w (whose `a`
/// slot carries the order-t^{(N+1)d} right side f).
struct ReductionLadder {
    std::vector<SolutionHandle> terms;
    int N = 0;
    double d = 0.0;
    bool resonant = false;
    EquationSpec residual_spec;
    ScalarField rhs;              // f of the transformed equation
    double rhs_exponent = 0.0;    // fitted decay exponent of f
    bool mode_path = false;       // mode-structured (true) or transport rungs
    double c1_bound = 0.0, c2_bound = 0.0;  // fitted C_i of |c_i| <= C_i t^d
};

struct LadderOptions {
    int work_degree = 32;
    double T_work = 0.0;          // <= 0: spec.T0
    double resonance_tol = 1e-9;
};

/// Builds the ladder for Re lambda(0,0) >= mu (passthrough ladder with N = 0
/// otherwise). Power-log structured coefficients take the exact mode path;
/// otherwise each rung is a backward transport solve with zero data at T.
ReductionLadder reduce_ladder(const EquationSpec& spec, double mu,
                              const LadderOptions& opt = {});

namespace detail_spec {
/// Normal form of the equation for w = u - v around a known v, with the
/// supplied right side in the `a` slot and the weight upgraded to
/// mu(t) + |log t| t^d.
EquationSpec shift_about(const EquationSpec& spec, const SolutionHandle& v,
                         const ScalarField& new_a, double d);
}  // namespace detail_spec

}  // namespace bbpde
