#include "bbpde/picard.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <unordered_map>

#include "bbpde/detail/ode.hpp"

namespace bbpde {

namespace {

// zero out coefficients below the sampling noise floor; they are pure DFT
// noise and drift cascades amplify them exponentially in the degree
void floor_coeffs(std::vector<Cplx>& c, double scale) {
    for (Cplx& v : c)
        if (std::abs(v) <= 1e-14 * scale) v = 0.0;
}

double fit_rhs_exponent(const ScalarField& f, double T, double R) {
    std::vector<double> lt, lv;
    double top = 0.0;
    const auto ts = log_spaced(1e-6, 0.9 * T, 14);
    std::vector<double> sups;
    for (double t : ts) {
        double s = 0.0;
        for (Cplx x : circle_nodes(0.0, 0.5 * R, 4))
            s = std::max(s, std::abs(f(t, x)));
        sups.push_back(s);
        top = std::max(top, s);
    }
    if (top == 0.0) return std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < ts.size(); ++i)
        if (sups[i] > top * 1e-280) {
            lt.push_back(std::log(ts[i]));
            lv.push_back(std::log(sups[i]));
        }
    double slope, c;
    linear_fit(lt, lv, slope, c);
    return slope;
}

struct ShiftedProblem {
    ScalarField lambda, b, rhs;                       // original-scale fields
    std::function<Cplx(double, Cplx, Cplx, Cplx)> nonlin;  // N(t,x,w,wx)
    double d = 0.0;                                   // shift exponent
    double T = 0.0, R = 0.0;                          // working domain
    double rho0 = 0.0;                                // polydisc bound for w, wx
};

// Frame following the drift characteristic through (T, 0). Rows of the
// iterate are expanded around C(sigma), which removes the bulk transport
// from the coefficient dynamics: truncated Taylor shifts amplify noise
// exponentially in the degree, the frame does not. The frame freezes once
// |C| reaches the cap (beyond that only the residual drift remains, which
// matters only for x-dependent iterates).
struct FrameMap {
    bool active = false;
    double sigma_top = 0.0;
    double sigma_frozen = -1e300;
    Cplx c_frozen = 0.0;
    std::vector<detail::Dopri5<1>::Step> steps;  // recorded downward

    Cplx C(double sigma) const {
        if (!active || sigma >= sigma_top) return Cplx(0.0);
        if (sigma <= sigma_frozen) return c_frozen;
        // steps are ordered by decreasing sigma
        size_t lo = 0, hi = steps.size();
        while (lo + 1 < hi) {
            const size_t mid = (lo + hi) / 2;
            if (steps[mid].s0 >= sigma) lo = mid; else hi = mid;
        }
        const auto& st = steps[lo];
        if (sigma <= st.s1) return st.y1[0];
        if (sigma >= st.s0) return st.y0[0];
        return detail::Dopri5<1>::interp(st, sigma)[0];
    }
    bool frozen_at(double sigma) const {
        return !active || sigma <= sigma_frozen;
    }
};

FrameMap build_frame(const ScalarField& b, double T, double cap,
                     double sigma_floor, double rk_tol) {
    FrameMap fr;
    fr.sigma_top = std::log(T);
    // x-independence and magnitude probe
    double bmax = 0.0;
    for (double t : log_spaced(1e-6, T, 6))
        for (Cplx x : {Cplx(0.0), Cplx(0.3), Cplx(0.0, 0.3)})
            bmax = std::max(bmax, std::abs(b(t, x)));
    if (bmax < 1e-14) return fr;
    fr.active = true;

    detail::Dopri5<1> ode;
    ode.abs_tol = ode.rel_tol = rk_tol;
    bool saturated = false;
    double sat_sigma = sigma_floor;
    Cplx sat_val = 0.0;
    ode.observer = [&](double sgm, const detail::Dopri5<1>::State& y) {
        if (std::abs(y[0]) >= cap) {
            saturated = true;
            sat_sigma = sgm;
            sat_val = y[0];
            return false;
        }
        return true;
    };
    auto rhs = [&b](double sgm, const detail::Dopri5<1>::State& y,
                    detail::Dopri5<1>::State& dy) {
        dy[0] = -b(std::exp(sgm), y[0]);
    };
    auto yf = ode.integrate(rhs, fr.sigma_top, {Cplx(0.0)}, sigma_floor,
                            &fr.steps);
    if (saturated) {
        fr.sigma_frozen = sat_sigma;
        fr.c_frozen = sat_val;
    } else {
        fr.sigma_frozen = sigma_floor;
        fr.c_frozen = yf[0];
    }
    return fr;
}

// One linear sweep: march d/dsigma W = (lambda - d) W + b_res W_y + G in the
// moving frame y = x - C(sigma), where b_res = b(t, y+C) - b(t, C) is the
// residual drift. G = t^{-d} (rhs + N(w_prev)). Classical RK4 with steps
// aligned to the grid rows; the launch value at sigma_floor comes from the
// quasi-stationary balance W ~ G / (m_G - lambda_eff).
// rhs values are iteration independent; the stage grid repeats exactly
// across sweeps, so cache them keyed by the sigma bit pattern
using StageCache = std::unordered_map<uint64_t, std::vector<Cplx>>;

GridFunction sweep(const ShiftedProblem& pb, const FrameMap& frame,
                   const GridFunction* prev, double sigma_floor,
                   const PicardConfig& cfg, StageCache& rhs_cache) {
    const double sigma_lo = std::log(cfg.t_lo);
    const double sigma_hi = std::log(pb.T);
    GridFunction next(sigma_lo, sigma_hi, cfg.nt, pb.R, cfg.nx);
    const int K = cfg.nx;
    const double R = pb.R;

    std::vector<Cplx> ring(K);
    for (int j = 0; j < K; ++j) {
        const double th = 2.0 * kPi * j / K;
        ring[j] = R * Cplx(std::cos(th), std::sin(th));
    }

    // source G at the frame positions at time sigma
    std::vector<Cplx> pos(K);
    auto set_positions = [&](double sigma) {
        const Cplx cc = frame.C(sigma);
        for (int j = 0; j < K; ++j) pos[j] = ring[j] + cc;
    };
    auto source = [&](double sigma, std::vector<Cplx>& out) {
        const double t = std::exp(sigma);
        const double td = std::pow(t, pb.d);
        uint64_t key;
        static_assert(sizeof(key) == sizeof(sigma));
        std::memcpy(&key, &sigma, sizeof(key));
        auto it = rhs_cache.find(key);
        if (it == rhs_cache.end()) {
            std::vector<Cplx> r(K);
            for (int j = 0; j < K; ++j) r[j] = pb.rhs(t, pos[j]);
            it = rhs_cache.emplace(key, std::move(r)).first;
        }
        const std::vector<Cplx>& rv = it->second;
        for (int j = 0; j < K; ++j) {
            Cplx g = rv[j];
            if (prev) {
                const Cplx w = td * prev->eval(t, pos[j]);
                const Cplx wx = td * prev->eval_dx(t, pos[j]);
                g += pb.nonlin(t, pos[j], w, wx);
            }
            out[j] = g / td;
        }
    };

    // d/dsigma of the coefficient vector
    std::vector<Cplx> gbuf(K), vals(K), dvals(K);
    std::vector<Cplx> dcoef(K), prod(K);
    auto rhs_coeffs = [&](double sigma, const std::vector<Cplx>& c,
                          std::vector<Cplx>& dc) {
        const double t = std::exp(sigma);
        set_positions(sigma);
        vals = idft_values(c);
        for (int k = 1; k < K; ++k) dcoef[k - 1] = double(k) * c[k] / R;
        dcoef[K - 1] = 0.0;
        dvals = idft_values(dcoef);
        source(sigma, gbuf);
        const Cplx b_applied =
            frame.frozen_at(sigma) ? Cplx(0.0)
                                   : pb.b(t, frame.C(sigma));
        double pmax = 0.0;
        for (int j = 0; j < K; ++j) {
            const Cplx lam = pb.lambda(t, pos[j]) - pb.d;
            const Cplx bres = pb.b(t, pos[j]) - b_applied;
            prod[j] = lam * vals[j] + bres * dvals[j] + gbuf[j];
            pmax = std::max(pmax, std::abs(prod[j]));
        }
        dc = dft_coeffs(prod);
        floor_coeffs(dc, pmax);
    };

    // launch at sigma_floor: W ~ G / (m - lambda_eff) with m the local slope
    std::vector<Cplx> c(K, 0.0);
    {
        std::vector<Cplx> g0(K), g1(K);
        set_positions(sigma_floor);
        source(sigma_floor, g0);
        source(sigma_floor + 0.5, g1);  // frame moves negligibly down here
        double n0 = 0.0, n1 = 0.0;
        for (int j = 0; j < K; ++j) {
            n0 = std::max(n0, std::abs(g0[j]));
            n1 = std::max(n1, std::abs(g1[j]));
        }
        if (n0 > 0 && n1 > 0) {
            const double m = std::log(n1 / n0) / 0.5;
            std::vector<Cplx> w0(K);
            const double t0 = std::exp(sigma_floor);
            set_positions(sigma_floor);
            for (int j = 0; j < K; ++j) {
                const Cplx le = pb.lambda(t0, pos[j]) - pb.d;
                const Cplx den = Cplx(m) - le;
                w0[j] = std::abs(den) > 1e-8 ? g0[j] / den : Cplx(0.0);
            }
            c = dft_coeffs(w0);
            double wmax = 0.0;
            for (const Cplx& v : w0) wmax = std::max(wmax, std::abs(v));
            floor_coeffs(c, wmax);
        }
    }

    // march: fixed RK4 steps, row-aligned above sigma_lo; the pre-row span
    // carries only the asymptotic tail and takes coarser steps
    double sigma = sigma_floor;
    int next_row = 0;
    const double coarse_step = 5.0 * cfg.march_step;
    std::vector<Cplx> k1(K), k2(K), k3(K), k4(K), tmp(K);
    auto step = [&](double h) {
        rhs_coeffs(sigma, c, k1);
        for (int j = 0; j < K; ++j) tmp[j] = c[j] + 0.5 * h * k1[j];
        rhs_coeffs(sigma + 0.5 * h, tmp, k2);
        for (int j = 0; j < K; ++j) tmp[j] = c[j] + 0.5 * h * k2[j];
        rhs_coeffs(sigma + 0.5 * h, tmp, k3);
        for (int j = 0; j < K; ++j) tmp[j] = c[j] + h * k3[j];
        rhs_coeffs(sigma + h, tmp, k4);
        for (int j = 0; j < K; ++j)
            c[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        sigma += h;
    };

    std::vector<Cplx> centers(cfg.nt);
    while (next_row < cfg.nt) {
        const double target = next.sigma_of_row(next_row);
        if (sigma >= target - 1e-13) {
            next.row(next_row) = c;
            centers[next_row] = frame.C(target);
            ++next_row;
            continue;
        }
        const double span = target - sigma;
        const double hstep = next_row == 0 ? coarse_step : cfg.march_step;
        const int nsub = std::max(1, int(std::ceil(span / hstep)));
        const double h = span / nsub;
        for (int i = 0; i < nsub; ++i) step(h);
        sigma = target;
        next.row(next_row) = c;
        centers[next_row] = frame.C(target);
        ++next_row;
    }
    next.set_centers(std::move(centers));
    next.fit_tail_decay();
    return next;
}

}  // namespace

SolutionHandle picard_solve(const EquationSpec& spec, const ScalarField& rhs,
                            const PicardConfig& config, PicardDiagnostics* diag) {
    PicardDiagnostics local_diag;
    PicardDiagnostics& dg = diag ? *diag : local_diag;

    double T = config.T_work > 0 ? config.T_work : spec.T0;
    double R = config.R_grid > 0 ? config.R_grid : 0.5 * spec.R0;

    // trivial right side: zero solution in one iteration
    const double m_rhs = fit_rhs_exponent(rhs, T, spec.R0);
    if (std::isinf(m_rhs)) {
        dg.trivial = true;
        dg.iterations = 1;
        auto h = zero_solution(T, R);
        h.provenance = "picard";
        return h;
    }

    PicardConfig cfg = config;
    for (int round = 0;; ++round) {
        // shift selection: Re lambda(0,0) < d < m_rhs with margin delta
        double a1 = -1e300;
        for (double t : log_spaced(1e-6, T, 8))
            for (Cplx x : circle_nodes(0.0, 0.7 * R, 6))
                a1 = std::max(a1, spec.lambda(t, x).real());
        double d = cfg.d_shift > 0 ? cfg.d_shift : 0.5 * (a1 + m_rhs);
        const bool feasible = (a1 + cfg.delta < d) && (d < m_rhs + 0.5);

        if (feasible) {
            ShiftedProblem pb;
            pb.lambda = spec.lambda;
            pb.b = spec.b;
            pb.rhs = rhs;
            pb.d = d;
            pb.T = T;
            pb.R = R;
            pb.rho0 = spec.rho0;
            auto spec_copy = spec;
            pb.nonlin = cfg.nonlin_override
                            ? cfg.nonlin_override
                            : [spec_copy](double t, Cplx x, Cplx w, Cplx wx) {
                                  return spec_copy.R(t, x, w, wx);
                              };

            const double sigma_floor =
                std::min(std::log(cfg.t_floor), std::log(cfg.t_lo) - 2.0);
            const FrameMap frame =
                build_frame(pb.b, T, 0.75 * R, sigma_floor, 1e-12);

            GridFunction W(std::log(cfg.t_lo), std::log(T), cfg.nt, R, cfg.nx);
            StageCache rhs_cache;
            double prev_update = -1.0;
            bool converged = false, diverged = false;
            dg.ratios.clear();
            for (int it = 1; it <= cfg.max_iter; ++it) {
                GridFunction Wn = sweep(pb, frame, it == 1 ? nullptr : &W, sigma_floor, cfg, rhs_cache);
                const double upd = GridFunction::sup_diff(Wn, W);
                dg.iterations = it;
                dg.final_update = upd;
                if (std::getenv("BBPDE_TRACE")) {
                    std::fprintf(stderr,
                                 "picard it=%d d=%.3f T=%.3f sup=%.3e upd=%.3e\n",
                                 it, d, T, Wn.sup_abs(), upd);
                    if (std::getenv("BBPDE_TRACE_ROWS")) {
                        double gmax = 0.0;
                        int imax = 0, kmax = 0;
                        for (int i = 0; i < Wn.rows(); ++i)
                            for (int k = 0; k < Wn.coeffs_per_row(); ++k) {
                                const double dd =
                                    std::abs(Wn.row(i)[k] - W.row(i)[k]);
                                if (dd > gmax) { gmax = dd; imax = i; kmax = k; }
                            }
                        std::fprintf(stderr,
                                     "  max coeff diff=%.3e at row %d (sigma=%.2f) k=%d\n",
                                     gmax, imax, Wn.sigma_of_row(imax), kmax);
                    }
                }

                const double sup = Wn.sup_abs();
                if (!std::isfinite(sup) || sup > 1e8) {
                    diverged = true;  // geometry too large; shrink and retry
                    break;
                }
                W = std::move(Wn);
                if (prev_update > 0 && upd > 0) {
                    const double ratio = upd / prev_update;
                    if (upd > cfg.tol * 10) dg.ratios.push_back(ratio);
                    if (it > 3 && ratio >= 1.0 && upd > cfg.tol * 100) {
                        diverged = true;
                        break;
                    }
                }
                prev_update = upd;
                if (upd < cfg.tol) {
                    converged = true;
                    break;
                }
            }

            if (converged) {
                // polydisc range check on the unshifted iterate
                const double td = std::pow(T, d);
                if (W.sup_abs() * td > pb.rho0 * 4.0)
                    throw RangeError("picard_solve: iterate left the polydisc");
            }

            if (converged) {
                dg.d_shift = d;
                dg.T_used = T;
                dg.R_used = R;
                dg.shrink_rounds = round;

                // The returned evaluator applies the fixed-point map once more
                // at the query point: a decaying-particular integral along the
                // characteristic with the converged grid as source.
                auto Wg = std::make_shared<GridFunction>(std::move(W));
                auto pb_copy = pb;
                const double t_floor = cfg.t_floor;
                auto eval = [Wg, pb_copy, t_floor](double t, Cplx x) -> Cplx {
                    if (t <= t_floor) return Cplx(0.0);
                    if (!(t <= pb_copy.T * (1 + 1e-12)))
                        throw DomainError("picard evaluator: t outside (0, T]");
                    detail::Dopri5<3> ode;
                    ode.abs_tol = ode.rel_tol = 1e-12;
                    auto rhs_ode = [&pb_copy, Wg](double s,
                                                  const detail::Dopri5<3>::State& y,
                                                  detail::Dopri5<3>::State& dy) {
                        const double tau = std::exp(s);
                        const double td = std::pow(tau, pb_copy.d);
                        dy[0] = -pb_copy.b(tau, y[0]);
                        dy[1] = pb_copy.lambda(tau, y[0]) - pb_copy.d;
                        const Cplx w = td * Wg->eval(tau, y[0]);
                        const Cplx wx = td * Wg->eval_dx(tau, y[0]);
                        const Cplx g =
                            (pb_copy.rhs(tau, y[0]) +
                             pb_copy.nonlin(tau, y[0], w, wx)) / td;
                        dy[2] = std::exp(-y[1]) * g;
                    };
                    auto yf = ode.integrate(rhs_ode, std::log(t),
                                            {x, Cplx(0.0), Cplx(0.0)},
                                            std::log(t_floor));
                    Cplx w = -yf[2];
                    // asymptotic launch closes the truncated tail below the
                    // floor: W(floor) ~ G/(m - lambda_eff)
                    const Cplx kernel = std::exp(-yf[1]);
                    if (std::abs(kernel) > 0) {
                        auto gval = [&](double tau, Cplx xx) {
                            const double td = std::pow(tau, pb_copy.d);
                            const Cplx ww = td * Wg->eval(tau, xx);
                            const Cplx wwx = td * Wg->eval_dx(tau, xx);
                            return (pb_copy.rhs(tau, xx) +
                                    pb_copy.nonlin(tau, xx, ww, wwx)) / td;
                        };
                        const Cplx g0 = gval(t_floor, yf[0]);
                        const Cplx g1 = gval(t_floor * 1.6487, yf[0]);  // e^{1/2}
                        if (std::abs(g0) > 0 && std::abs(g1) > 0) {
                            const double m =
                                std::log(std::abs(g1) / std::abs(g0)) / 0.5;
                            const Cplx le = pb_copy.lambda(t_floor, yf[0]) - pb_copy.d;
                            const Cplx den = Cplx(m) - le;
                            if (std::abs(den) > 1e-8) w += kernel * g0 / den;
                        }
                    }
                    return std::pow(t, pb_copy.d) * w;
                };
                auto Wg2 = Wg;
                const double dshift = d;
                auto eval_dx = [Wg2, dshift](double t, Cplx x) {
                    return std::pow(t, dshift) * Wg2->eval_dx(t, x);
                };
                SolutionHandle h;
                h.eval = eval;
                h.eval_dx = eval_dx;
                h.t_max = T;
                h.x_radius = R;
                h.provenance = "picard";
                h.claimed_exponent = d;
                h.tolerance = 1e-6;
                return h;
            }
            if (!diverged && dg.final_update >= cfg.tol && round >= cfg.shrink_budget)
                throw ConvergenceError("picard_solve: iteration budget exhausted");
        }

        if (round >= cfg.shrink_budget) {
            const double last_ratio = dg.ratios.empty() ? 0.0 : dg.ratios.back();
            throw NoContractionError(
                "picard_solve: shrink budget exhausted without contraction",
                last_ratio);
        }
        T *= 0.5;
        R *= 0.8;
    }
}

}  // namespace bbpde
