#include "bbpde/flow.hpp"

#include <cmath>
#include <random>

#include "bbpde/detail/ode.hpp"

namespace bbpde {

WedgeDomain::WedgeDomain(double T_, double R_, double r_, WeightFn w,
                         std::optional<double> drift_bound)
    : T(T_), R(R_), r(r_), weight(std::move(w)) {
    if (!(T > 0) || !(R > 0) || !(r > 0))
        throw ConfigurationError("wedge domain needs positive T, R, r");
    if (drift_bound && *drift_bound > 0 && r > 1.0 / *drift_bound + 1e-12)
        throw ConfigurationError("wedge domain violates r <= 1/B");
}

namespace {

double clamp_floor(double t, double floor) { return std::max(t, floor); }

}  // namespace

Cplx FlowMap::flow(double t0, Cplx x0, double t) const {
    const double esc = escape_radius > 0 ? escape_radius : drift.x_radius;
    const double s0 = std::log(clamp_floor(t0, t_floor));
    const double s1 = std::log(clamp_floor(t, t_floor));
    if (s0 == s1) return x0;

    detail::Dopri5<1> ode;
    ode.abs_tol = ode.rel_tol = rk_tol;
    double exit_time = 0.0;
    bool escaped = false;
    ode.observer = [&](double s, const detail::Dopri5<1>::State& y) {
        if (std::abs(y[0]) >= esc) {
            escaped = true;
            exit_time = std::exp(s);
            return false;
        }
        return true;
    };
    auto rhs = [this](double s, const detail::Dopri5<1>::State& y,
                      detail::Dopri5<1>::State& dy) {
        dy[0] = -drift(std::exp(s), y[0]);
    };
    auto yf = ode.integrate(rhs, s0, {x0}, s1);
    if (escaped)
        throw EscapeError("characteristic left the x-disc", exit_time);
    return yf[0];
}

Cplx flow(const FlowMap& fm, double t0, Cplx x0, double t) {
    return fm.flow(t0, x0, t);
}

FlowMap::Transported FlowMap::flow_with_integral(const ScalarField& lambda,
                                                 double t0, Cplx x0,
                                                 double t) const {
    const double esc = escape_radius > 0 ? escape_radius : drift.x_radius;
    const double s0 = std::log(clamp_floor(t0, t_floor));
    const double s1 = std::log(clamp_floor(t, t_floor));
    detail::Dopri5<2> ode;
    ode.abs_tol = ode.rel_tol = rk_tol;
    double exit_time = 0.0;
    bool escaped = false;
    ode.observer = [&](double s, const detail::Dopri5<2>::State& y) {
        if (std::abs(y[0]) >= esc) {
            escaped = true;
            exit_time = std::exp(s);
            return false;
        }
        return true;
    };
    auto rhs = [&](double s, const detail::Dopri5<2>::State& y,
                   detail::Dopri5<2>::State& dy) {
        const double tau = std::exp(s);
        dy[0] = -drift(tau, y[0]);
        dy[1] = lambda(tau, y[0]);
    };
    auto yf = ode.integrate(rhs, s0, {x0, Cplx(0.0)}, s1);
    if (escaped)
        throw EscapeError("characteristic left the x-disc", exit_time);
    return {yf[0], yf[1]};
}

InvarianceReport invariance_check(const FlowMap& fm, const WedgeDomain& W,
                                  int samples, double drift_bound,
                                  uint64_t seed) {
    InvarianceReport rep;
    if (drift_bound > 0 && W.r > 1.0 / drift_bound + 1e-12) {
        rep.precondition_ok = false;  // hypothesis fails; nothing to assert
        return rep;
    }
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    while (rep.samples < samples) {
        const double t0 = W.T * unif(rng);
        const double th = 2.0 * kPi * unif(rng);
        const Cplx x0 = W.R * std::sqrt(unif(rng)) * Cplx(std::cos(th), std::sin(th));
        if (t0 <= fm.t_floor || !W.contains(t0, x0)) continue;
        ++rep.samples;
        // membership along the trajectory at log-spaced times down to t = 0
        const auto ts = log_spaced(fm.t_floor, t0, 20);
        bool violated = false;
        for (double t : ts) {
            Cplx xt;
            try {
                xt = fm.flow(t0, x0, t);
            } catch (const EscapeError&) {
                violated = true;
                break;
            }
            const double lvl = W.level(t, xt);
            rep.max_level = std::max(rep.max_level, lvl);
            if (lvl >= W.R * (1.0 + 1e-9)) violated = true;
        }
        if (violated) ++rep.violations;
    }
    return rep;
}

bool CharacteristicHull::contains(double t, Cplx x) const {
    if (!(t > 0) || t > T) return false;
    try {
        return std::abs(fm.flow(t, x, T)) < R_seed;
    } catch (const EscapeError&) {
        return false;
    }
}

Cplx CharacteristicHull::seed_of(double t, Cplx x) const {
    return fm.flow(t, x, T);
}

CharacteristicHull hull(const FlowMap& fm, double T, double R_seed,
                        std::optional<double> drift_bound,
                        std::optional<const WeightFn*> weight) {
    CharacteristicHull h{fm, T, R_seed, R_seed};
    if (drift_bound && weight) {
        const double disp = *drift_bound * (*weight)->phi(T);
        const double R0 = fm.drift.x_radius;
        if (!(R_seed + disp < R0))
            throw ConfigurationError(
                "hull seed radius violates R_seed + B phi(T) < R0");
        h.R_inner = R_seed - disp;
        if (h.R_inner <= 0)
            throw ConfigurationError("hull seed radius leaves no inner disc");
    }
    return h;
}

InvertFlowResult invert_flow(const FlowMap& fm, double t0, Cplx x0, double T,
                             int budget, double tol) {
    // xi_n = x0 - int_{t0}^T b(tau, flow(tau; T, xi_{n-1}))/tau dtau,
    // with the integral accumulated along the trajectory in one pass.
    auto displacement = [&](Cplx xi) {
        detail::Dopri5<2> ode;
        ode.abs_tol = ode.rel_tol = fm.rk_tol;
        auto rhs = [&fm](double s, const detail::Dopri5<2>::State& y,
                         detail::Dopri5<2>::State& dy) {
            const double tau = std::exp(s);
            dy[0] = -fm.drift(tau, y[0]);
            dy[1] = fm.drift(tau, y[0]);
        };
        auto yf = ode.integrate(rhs, std::log(T), {xi, Cplx(0.0)}, std::log(t0));
        return -yf[1];  // int_{t0}^T G(tau, xi)/tau dtau in increasing time
    };

    InvertFlowResult res;
    Cplx xi = x0;
    double prev_update = 0.0;
    std::vector<double> ratios;
    for (int n = 1; n <= budget; ++n) {
        const Cplx xi_next = x0 - displacement(xi);
        const double upd = std::abs(xi_next - xi);
        xi = xi_next;
        res.iterations = n;
        res.last_update = upd;
        if (prev_update > 0 && upd > 0) {
            const double ratio = upd / prev_update;
            ratios.push_back(ratio);
            if (n >= 3 && ratio >= 1.0)
                throw NoContractionError("invert_flow iteration is not contracting",
                                         ratio);
        }
        if (upd < tol) {
            for (double r : ratios) res.observed_ratio = std::max(res.observed_ratio, r);
            res.xi = xi;
            return res;
        }
        prev_update = upd;
    }
    throw ConvergenceError("invert_flow budget exhausted");
}

}  // namespace bbpde
