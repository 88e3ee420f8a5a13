#include "bbpde/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "bbpde/gridfn.hpp"
#include "bbpde/linear.hpp"
#include "bbpde/residual.hpp"

namespace bbpde {

SolutionHandle sum_handles(const SolutionHandle& a, const SolutionHandle& b) {
    SolutionHandle h;
    auto ae = a, be = b;
    h.eval = [ae, be](double t, Cplx x) { return ae(t, x) + be(t, x); };
    h.eval_dx = [ae, be](double t, Cplx x) { return ae.dx(t, x) + be.dx(t, x); };
    h.t_max = std::min(a.t_max, b.t_max);
    h.x_radius = std::min(a.x_radius, b.x_radius);
    h.provenance = "sum";
    h.claimed_exponent = std::min(a.claimed_exponent, b.claimed_exponent);
    h.exponent_sharp_below =
        a.claimed_exponent <= b.claimed_exponent ? a.exponent_sharp_below
                                                 : b.exponent_sharp_below;
    h.tolerance = std::max(a.tolerance, b.tolerance);
    return h;
}

SolutionHandle solve_u0(const EquationSpec& spec, SolveDiagnostics* diag,
                        const PicardConfig& pcfg) {
    SolveDiagnostics local;
    SolveDiagnostics& dg = diag ? *diag : local;
    dg.conditions = check_conditions(spec);
    if (!dg.conditions.all_ok())
        throw PreconditionError("solve_u0: coefficient conditions c1-c3 fail");
    const double mu = dg.conditions.mu_exponent;
    dg.mu = mu;
    if (std::isinf(mu)) return zero_solution(spec.T0, spec.R0);  // a == 0

    const Cplx lam00 = spec.lambda00();
    if (!(lam00.real() > 0))
        throw PreconditionError("solve_u0: Re lambda(0,0) <= 0");

    const bool at_threshold = std::abs(lam00.real() - mu) < 1e-9;

    if (lam00.real() < mu - 1e-9) {
        // below threshold: single shifted contraction solve
        dg.ladder_path = false;
        SolutionHandle u = picard_solve(spec, spec.a, pcfg, &dg.picard);
        u.claimed_exponent = mu;
        u.exponent_sharp_below = false;
        return u;
    }

    dg.ladder_path = true;
    ReductionLadder lad = reduce_ladder(spec, mu);
    dg.ladder_N = lad.N;
    dg.ladder_d = lad.d;

    SolutionHandle w;
    if (std::isinf(lad.rhs_exponent)) {
        w = zero_solution(lad.residual_spec.T0, lad.residual_spec.R0);
        w.provenance = "picard";
    } else {
        w = picard_solve(lad.residual_spec, lad.rhs, pcfg, &dg.picard);
    }

    SolutionHandle u = w;
    for (const auto& term : lad.terms) u = sum_handles(u, term);
    u.provenance = "sum";
    u.claimed_exponent = mu;
    u.exponent_sharp_below = at_threshold;
    u.tolerance = std::max(w.tolerance, 1e-8);
    u.t_max = std::min(u.t_max, lad.residual_spec.T0);
    return u;
}

EquationSpec reduce_about(const EquationSpec& spec, const SolutionHandle& u0) {
    if (!(u0.claimed_exponent > 0))
        throw InvalidBaseError("reduce_about: base solution must decay, d > 0");
    // base certificate check
    {
        auto grid = default_residual_grid(spec, u0);
        auto rep = residual(spec, u0, grid);
        const double cert = std::max(u0.tolerance, 1e-8);
        if (rep.residual_sup > 20.0 * cert + 1e-12 * rep.relative_scale)
            throw InvalidBaseError("reduce_about: base residual above certificate");
    }
    const double d_raw = u0.claimed_exponent;
    const double d = u0.exponent_sharp_below ? 0.9 * d_raw : d_raw;
    EquationSpec out = detail_spec::shift_about(
        spec, u0, ScalarField::zero(std::min(spec.T0, u0.t_max), spec.R0), d);
    // sampled |c_i| <= C_i t^d sanity fit
    for (double t : log_spaced(1e-5, 0.9 * out.T0, 6))
        for (Cplx x : circle_nodes(0.0, 0.4 * out.R0, 4)) {
            const Cplx v = u0(t, x), vx = u0.dx(t, x);
            const Cplx c1 = spec.R_z1(t, x, v, vx), c2 = spec.R_z2(t, x, v, vx);
            if (!is_finite(c1) || !is_finite(c2))
                throw InvalidBaseError("reduce_about: shifted coefficients blow up");
        }
    return out;
}

namespace {

// grid cache of an exact handle, used inside contraction sweeps
SolutionHandle cache_on_grid(const SolutionHandle& h, double T, double R,
                             int nt, int nx, double t_lo) {
    auto g = std::make_shared<GridFunction>(GridFunction::from_values(
        std::log(t_lo), std::log(T), nt, R, nx, h.eval));
    SolutionHandle out = h;
    out.eval = [g](double t, Cplx x) { return g->eval(t, x); };
    out.eval_dx = [g](double t, Cplx x) { return g->eval_dx(t, x); };
    out.t_max = T;
    out.x_radius = R;
    return out;
}

}  // namespace

FamilyMember solve_family(const EquationSpec& spec0, const HoloGerm& psi,
                          const FamilyOptions& opt) {
    // the family lives on the a == 0 equation
    {
        double amax = 0.0;
        for (double t : log_spaced(1e-6, spec0.T0, 6))
            for (Cplx x : circle_nodes(0.0, 0.5 * spec0.R0, 4))
                amax = std::max(amax, std::abs(spec0.a(t, x)));
        if (amax > 1e-10)
            throw PreconditionError("solve_family: spec must have a == 0");
    }
    const Cplx lam00 = spec0.lambda00();
    if (!(lam00.real() > 0))
        throw PreconditionError("solve_family: Re lambda(0,0) <= 0");

    // exponent bracket 0 < d < a0 <= Re lambda <= a1 < 2d on a possibly
    // shrunk domain
    double T = std::min(spec0.T0, 0.99 / std::exp(1.0));
    double R = spec0.R0;
    double a0 = 0, a1 = 0;
    for (int round = 0;; ++round) {
        a0 = 1e300;
        a1 = -1e300;
        for (double t : log_spaced(1e-7, T, 10))
            for (Cplx x : circle_nodes(0.0, 0.6 * R, 8)) {
                const double re = spec0.lambda(t, x).real();
                a0 = std::min(a0, re);
                a1 = std::max(a1, re);
            }
        const double d = 0.75 * lam00.real();
        if (a0 > d && a1 < 2 * d && a0 > 0) break;
        if (round >= opt.shrink_budget)
            throw ConfigurationError(
                "solve_family: exponent bracket unsatisfiable after shrinking");
        T *= 0.5;
        R *= 0.8;
    }

    FamilyMember fm;
    fm.psi = psi;

    // trivial member
    if (psi.is_zero()) {
        fm.u = zero_solution(T, 0.5 * R);
        fm.v_part = fm.u;
        fm.w_part = fm.u;
        for (int k = opt.k_lo; k <= opt.k_hi; ++k)
            fm.limit_error_curve.push_back({std::pow(2.0, -k), 0.0});
        return fm;
    }

    // cap the working horizon so the drift displacement stays a small
    // fraction of the disc; the transported data and the iterate grids then
    // both fit inside the domain with margin
    double C_max = 0.0;
    {
        FlowMap fmb{ScalarField(spec0.b.eval, T, R)};
        fmb.rk_tol = 1e-10;
        for (int tries = 0; tries < opt.shrink_budget; ++tries) {
            C_max = 0.0;
            for (double t : {1e-6, 0.01 * T, 0.2 * T})
                C_max = std::max(C_max, std::abs(fmb.flow(T, 0.0, t)));
            if (C_max <= 0.15 * R + 1e-12) break;
            T *= 0.5;
        }
    }

    ScalarField lam_cap(spec0.lambda.eval, T, R);
    ScalarField b_cap(spec0.b.eval, T, R);
    LinearSolveOptions lopt;
    lopt.rk_tol = 1e-12;
    lopt.t_floor = 1e-11;  // weight-bounded tails below this are ~1e-10
    fm.v_part = solve_singular_initial(lam_cap, b_cap, psi, lopt);
    fm.v_part.t_max = std::min(fm.v_part.t_max, T);

    // cached copy of v for the sweeps; the cache circle must cover the
    // drift displacement so sweeps never extrapolate off the contour
    PicardConfig pcfg = opt.picard;
    const double R_grid = pcfg.R_grid > 0 ? pcfg.R_grid : 0.5 * R;
    const double T_pic = fm.v_part.t_max;
    const double R_v = std::min(R_grid + C_max + 0.07, 0.9 * R - C_max);
    if (!(R_v > R_grid))
        throw ConfigurationError("solve_family: no room between grid and domain");
    // cache the slowly varying factor t^{-lambda00} v; the power factor is
    // restored analytically, so the sigma-interpolation error stays tiny
    SolutionHandle v_cached;
    {
        auto vp = fm.v_part;
        const Cplx l00 = lam00;
        auto flat = [vp, l00](double t, Cplx x) {
            return std::exp(-l00 * std::log(t)) * vp(t, x);
        };
        auto g = std::make_shared<GridFunction>(GridFunction::from_values(
            std::log(pcfg.t_lo), std::log(T_pic), 48, R_v, pcfg.nx, flat));
        v_cached = fm.v_part;
        v_cached.eval = [g, l00](double t, Cplx x) {
            return std::exp(l00 * std::log(t)) * g->eval(t, x);
        };
        v_cached.eval_dx = [g, l00](double t, Cplx x) {
            return std::exp(l00 * std::log(t)) * g->eval_dx(t, x);
        };
        v_cached.t_max = T_pic;
        v_cached.x_radius = R_v;
    }

    auto spec_copy = spec0;
    auto vc = v_cached;
    ScalarField f2(
        [spec_copy, vc](double t, Cplx x) {
            return spec_copy.R(t, x, vc(t, x), vc.dx(t, x));
        },
        v_cached.t_max, R_grid);

    pcfg.T_work = fm.v_part.t_max;
    pcfg.R_grid = R_grid;
    pcfg.nonlin_override = [spec_copy, vc](double t, Cplx x, Cplx w, Cplx wx) {
        const Cplx v = vc(t, x), vx = vc.dx(t, x);
        return spec_copy.R(t, x, v + w, vx + wx) - spec_copy.R(t, x, v, vx);
    };
    fm.w_part = picard_solve(spec0, f2, pcfg, &fm.picard);

    fm.u = sum_handles(fm.v_part, fm.w_part);
    fm.u.claimed_exponent = lam00.real();
    fm.u.exponent_sharp_below = true;
    fm.u.tolerance = std::max(fm.w_part.tolerance, 1e-8);

    // measured data law e_k = sup_{|x|<=R'} |t_k^{-lambda(0,x)} u - psi|
    const HoloGerm lam0 = spec0.lambda0_germ();
    const double Rp = std::min(opt.R_limit, 0.8 * R_grid);
    for (int k = opt.k_lo; k <= opt.k_hi; ++k) {
        const double tk = std::pow(2.0, -k);
        double e = 0.0;
        for (Cplx x : circle_nodes(0.0, Rp, 24)) {
            const Cplx scaled =
                std::exp(-lam0(x) * std::log(tk)) * fm.u(tk, x);
            e = std::max(e, std::abs(scaled - psi(x)));
        }
        fm.limit_error_curve.push_back({tk, e});
    }
    return fm;
}

HoloGerm recover_psi(const EquationSpec& spec0, const SolutionHandle& u,
                     const RecoverOptions& opt) {
    if (!(u.claimed_exponent > 0))
        throw NonMemberError("recover_psi: candidate does not decay");
    const HoloGerm lam0 = spec0.lambda0_germ();
    const double r = std::min(opt.radius, 0.5 * u.x_radius);
    const int n = 32;
    const auto xs = circle_nodes(0.0, r, n);

    const int K = opt.k_hi - opt.k_lo + 1;
    std::vector<std::vector<Cplx>> vals(K, std::vector<Cplx>(n));
    for (int k = 0; k < K; ++k) {
        const double tk = std::pow(2.0, -(opt.k_lo + k));
        for (int j = 0; j < n; ++j)
            vals[k][j] = std::exp(-lam0(xs[j]) * std::log(tk)) * u(tk, xs[j]);
    }

    // divergence diagnostic on the raw ladder
    std::vector<double> diffs;
    for (int k = 0; k + 1 < K; ++k) {
        double dsup = 0.0;
        for (int j = 0; j < n; ++j)
            dsup = std::max(dsup, std::abs(vals[k + 1][j] - vals[k][j]));
        diffs.push_back(dsup);
    }
    if (diffs.size() >= 4) {
        const size_t m = diffs.size();
        if (diffs[m - 1] > diffs[m - 2] && diffs[m - 2] > diffs[m - 3] &&
            diffs[m - 1] > 2.0 * diffs[0] && diffs[m - 1] > 1e-10)
            throw NonMemberError("recover_psi: data-law ladder diverges");
    }

    // two Aitken passes per circle node (rate estimated from the data itself)
    std::vector<std::vector<Cplx>> seq = vals;
    for (int pass = 0; pass < 2 && seq.size() >= 3; ++pass) {
        std::vector<std::vector<Cplx>> nxt(seq.size() - 2,
                                           std::vector<Cplx>(n));
        for (size_t k = 0; k + 2 < seq.size(); ++k)
            for (int j = 0; j < n; ++j) {
                const Cplx d1 = seq[k + 1][j] - seq[k][j];
                const Cplx d2 = seq[k + 2][j] - seq[k + 1][j];
                const Cplx den = d2 - d1;
                nxt[k][j] = std::abs(den) > 1e-300
                                ? seq[k + 2][j] - d2 * d2 / den
                                : seq[k + 2][j];
            }
        seq = std::move(nxt);
    }
    const std::vector<Cplx>& limit = seq.back();

    auto coeffs = dft_coeffs(limit);
    coeffs.resize(std::min<size_t>(coeffs.size(), opt.degree + 1));
    for (size_t k = 0; k < coeffs.size(); ++k) coeffs[k] /= std::pow(r, k);
    HoloGerm g(std::move(coeffs), r);
    double top = 0.0;
    for (const Cplx& c : g.coeffs) top = std::max(top, std::abs(c));
    g.trim(1e-10 * std::max(top, 1.0));
    return g;
}

FullSolveResult solve_full(const EquationSpec& spec, const HoloGerm& psi,
                           const FamilyOptions& opt) {
    FullSolveResult out;
    out.u0 = solve_u0(spec);
    out.reduced = reduce_about(spec, out.u0);
    out.member = solve_family(out.reduced, psi, opt);
    out.u = sum_handles(out.u0, out.member.u);
    return out;
}

}  // namespace bbpde
