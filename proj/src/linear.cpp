#include "bbpde/linear.hpp"

#include <cmath>

#include "bbpde/detail/ode.hpp"
#include "bbpde/residual.hpp"

namespace bbpde {

namespace {

// Augmented characteristic state: x, Lambda = int lambda dsigma,
// D = int e^{-Lambda} g dsigma. One adaptive pass gives transport,
// integrating factor and Duhamel term together.
using Ode3 = detail::Dopri5<3>;

Ode3::State transport_pass(const ScalarField& lambda, const ScalarField& b,
                           const ScalarField* g, double s_from, Cplx x_from,
                           double s_to, double rk_tol, double esc_radius) {
    Ode3 ode;
    ode.abs_tol = ode.rel_tol = rk_tol;
    bool escaped = false;
    double exit_time = 0.0;
    ode.observer = [&](double s, const Ode3::State& y) {
        if (std::abs(y[0]) >= esc_radius) {
            escaped = true;
            exit_time = std::exp(s);
            return false;
        }
        return true;
    };
    auto rhs = [&](double s, const Ode3::State& y, Ode3::State& dy) {
        const double tau = std::exp(s);
        dy[0] = -b(tau, y[0]);
        dy[1] = lambda(tau, y[0]);
        dy[2] = g ? std::exp(-y[1]) * (*g)(tau, y[0]) : Cplx(0.0);
    };
    auto yf = ode.integrate(rhs, s_from, {x_from, Cplx(0.0), Cplx(0.0)}, s_to);
    if (escaped)
        throw EscapeError("characteristic left the x-disc", exit_time);
    return yf;
}

double sampled_decay_exponent(const ScalarField& g, double t_ref) {
    // local slope of log sup_x |g| at t_ref, used for the asymptotic launch
    const double f = 1.3;
    double s1 = 0.0, s2 = 0.0;
    for (Cplx x : circle_nodes(0.0, 0.3 * g.x_radius, 4)) {
        s1 = std::max(s1, std::abs(g(t_ref, x)));
        s2 = std::max(s2, std::abs(g(t_ref * f, x)));
    }
    if (s1 <= 0 || s2 <= 0) return 0.0;
    return std::log(s2 / s1) / std::log(f);
}

}  // namespace

SolutionHandle solve_backward_cauchy(const ScalarField& lambda,
                                     const ScalarField& b, const ScalarField& g,
                                     const HoloGerm& psi, double T,
                                     const LinearSolveOptions& opt) {
    if (!(T > 0) || T > lambda.t_max * (1 + 1e-12))
        throw ConfigurationError("solve_backward_cauchy: T outside (0, t_max]");
    const double esc = lambda.x_radius;
    const double psi_radius = psi.radius;
    auto lam = lambda;
    auto bb = b.valid() ? b : ScalarField::zero(lambda.t_max, lambda.x_radius);
    auto gg = g.valid() ? g : ScalarField::zero(lambda.t_max, lambda.x_radius);
    auto psi_ = psi;
    auto o = opt;

    auto eval = [lam, bb, gg, psi_, T, esc, psi_radius, o](double t, Cplx x) {
        if (!(t > 0) || t > T * (1 + 1e-12))
            throw DomainError("solve_backward_cauchy: t outside (0, T]");
        auto y = transport_pass(lam, bb, &gg, std::log(t), x, std::log(T),
                                o.rk_tol, esc);
        const Cplx seed = y[0];
        if (std::abs(seed) >= psi_radius)
            throw DomainError("solve_backward_cauchy: trajectory leaves the data disc");
        // w = psi(x_T) e^{-LambdaT} - int_t^T e^{-Lambda} g dsigma
        return psi_(seed) * std::exp(-y[1]) - y[2];
    };
    return make_handle(eval, T, lambda.x_radius, "exact-formula",
                       /*claimed_exponent=*/0.0, /*tolerance=*/1e-8);
}

SolutionHandle solve_flat_initial(const ScalarField& lambda, const ScalarField& b,
                                  const HoloGerm& psi, const WedgeDomain& W,
                                  const LinearSolveOptions& opt) {
    // lambda must vanish at t = 0 for flat data to make sense
    double scale = 1e-12;
    for (double t : {W.T, 0.5 * W.T})
        for (Cplx x : circle_nodes(0.0, 0.5 * W.R, 4))
            scale = std::max(scale, std::abs(lambda(t, x)));
    for (Cplx x : circle_nodes(0.0, 0.5 * W.R, 4))
        if (std::abs(limit_t0(lambda, x)) > 1e-8 * std::max(scale, 1.0))
            throw PreconditionError("solve_flat_initial: lambda(0,x) != 0");

    const double esc = lambda.x_radius;
    auto lam = lambda;
    auto bb = b.valid() ? b : ScalarField::zero(lambda.t_max, lambda.x_radius);
    auto psi_ = psi;
    auto o = opt;
    const double s_floor = std::log(o.t_floor);

    auto eval = [lam, bb, psi_, esc, o, s_floor](double t, Cplx x) {
        if (!(t > 0)) throw DomainError("solve_flat_initial: t must be positive");
        if (t <= o.t_floor) return psi_(x);
        auto y = transport_pass(lam, bb, nullptr, std::log(t), x, s_floor,
                                o.rk_tol, esc);
        const Cplx x0 = y[0];
        if (std::abs(x0) >= psi_.radius)
            throw DomainError("solve_flat_initial: trajectory leaves the data disc");
        // Lambda accumulated downward equals -int_0^t lambda/s ds (up to the
        // truncated tail, which the weight bound makes negligible).
        return psi_(x0) * std::exp(-y[1]);
    };
    auto h = make_handle(eval, W.T, lambda.x_radius, "exact-formula", 0.0, 1e-8);
    return h;
}

SolutionHandle solve_singular_initial(const ScalarField& lambda,
                                      const ScalarField& b, const HoloGerm& psi,
                                      const LinearSolveOptions& opt) {
    EquationSpec probe;  // only for the germ helper
    probe.lambda = lambda;
    probe.R0 = lambda.x_radius;
    probe.T0 = lambda.t_max;
    const HoloGerm lam0 = probe.lambda0_germ();
    const Cplx lam00 = lam0.coeffs.empty() ? Cplx(0.0) : lam0.coeffs[0];
    if (!(lam00.real() > 0))
        throw PreconditionError("solve_singular_initial: Re lambda(0,0) <= 0");
    const HoloGerm lam0x = lam0.derivative();

    const double t_cap = std::min(lambda.t_max, 0.99 / std::exp(1.0));
    auto bb = b.valid() ? b : ScalarField::zero(lambda.t_max, lambda.x_radius);

    // lambda_b(t,x) = (lambda - lambda(0,x)) + lambda_x(0,x) log(t) b(t,x)
    ScalarField lambda_b(
        [lambda, bb, lam0, lam0x](double t, Cplx x) {
            return (lambda(t, x) - lam0(x)) + lam0x(x) * std::log(t) * bb(t, x);
        },
        t_cap, lambda.x_radius);

    WedgeDomain W(t_cap, lambda.x_radius, 1.0, WeightFn::power(1.0, t_cap));
    SolutionHandle w = solve_flat_initial(lambda_b, bb, psi, W, opt);

    auto weval = w.eval;
    auto eval = [weval, lam0](double t, Cplx x) {
        // t^{lambda(0,x)} = exp(lambda(0,x) log t), single-valued for t > 0
        return std::exp(lam0(x) * std::log(t)) * weval(t, x);
    };
    auto h = make_handle(eval, t_cap, lambda.x_radius, "exact-formula",
                         /*claimed_exponent=*/lam00.real(), 1e-8);
    h.exponent_sharp_below = true;  // in X1^d for every d < Re lambda(0,0)
    return h;
}

SolutionHandle solve_decaying_particular(const ScalarField& lambda_eff,
                                         const ScalarField& b,
                                         const ScalarField& g,
                                         const LinearSolveOptions& opt) {
    // uniform negativity probe
    double max_re = -1e300;
    for (double t : log_spaced(1e-8, lambda_eff.t_max, 12))
        for (Cplx x : circle_nodes(0.0, 0.5 * lambda_eff.x_radius, 6))
            max_re = std::max(max_re, lambda_eff(t, x).real());
    if (!(max_re < -1e-6))
        throw PreconditionError(
            "solve_decaying_particular: Re lambda_eff not uniformly negative");

    const double esc = lambda_eff.x_radius;
    auto lam = lambda_eff;
    auto bb = b.valid() ? b : ScalarField::zero(lambda_eff.t_max, lambda_eff.x_radius);
    auto gg = g;
    auto o = opt;
    const double s_floor = std::log(o.t_floor);

    auto eval = [lam, bb, gg, esc, o, s_floor](double t, Cplx x) {
        if (!(t > 0) || t > lam.t_max * (1 + 1e-12))
            throw DomainError("solve_decaying_particular: t outside (0, t_max]");
        if (t <= o.t_floor) return Cplx(0.0);
        auto y = transport_pass(lam, bb, &gg, std::log(t), x, s_floor, o.rk_tol,
                                esc);
        // Downward pass: w = -D(floor) plus the asymptotic launch correction
        // e^{-Lambda(floor)} w(t_floor), w(t_floor) ~ g/(m - lambda_eff).
        Cplx w = -y[2];
        const Cplx kernel = std::exp(-y[1]);
        if (std::abs(kernel) > 0) {
            const double m = sampled_decay_exponent(gg, o.t_floor * 4);
            const Cplx lam_f = lam(o.t_floor, y[0]);
            if (std::abs(Cplx(m, 0.0) - lam_f) > 1e-6)
                w += kernel * gg(o.t_floor, y[0]) / (Cplx(m, 0.0) - lam_f);
        }
        return w;
    };
    return make_handle(eval, lambda_eff.t_max, lambda_eff.x_radius,
                       "exact-formula", 0.0, 1e-8);
}

DecayBoundReport check_decay_bound(const SolutionHandle& w, double psi_bound,
                                   double G, double mu, double a0, double T,
                                   const ScalarField& lambda,
                                   const std::vector<GridNode>& grid,
                                   double psi_dx_bound, double G_dx) {
    DecayBoundReport rep;
    if (psi_dx_bound < 0) psi_dx_bound = psi_bound;
    if (G_dx < 0) G_dx = G;
    // 0 < mu < a0 <= Re lambda must hold on samples
    double min_re = 1e300;
    for (double t : log_spaced(1e-6, T, 10))
        for (Cplx x : circle_nodes(0.0, 0.4 * lambda.x_radius, 6))
            min_re = std::min(min_re, lambda(t, x).real());
    rep.precondition_ok = (0 < mu && mu < a0 && a0 <= min_re + 1e-12);

    for (const GridNode& node : grid) {
        ++rep.nodes;
        const double bound =
            psi_bound * std::pow(node.t / T, a0) + G * std::pow(node.t, mu) / (a0 - mu);
        const double bound_dx =
            psi_dx_bound * std::pow(node.t / T, a0) +
            G_dx * std::pow(node.t, mu) / (a0 - mu);
        const double v = std::abs(w(node.t, node.x));
        const double vdx = std::abs(w.dx(node.t, node.x));
        rep.max_slack = std::max(rep.max_slack, v - bound);
        rep.max_slack_dx = std::max(rep.max_slack_dx, vdx - bound_dx);
        if (v > bound * (1 + 1e-9) + 1e-12) ++rep.violations;
        if (vdx > bound_dx * (1 + 1e-9) + 1e-10) ++rep.violations_dx;
    }
    return rep;
}

}  // namespace bbpde
