#include <algorithm>
#include <cmath>
#include <memory>

#include "bbpde/gridfn.hpp"
#include "bbpde/linear.hpp"
#include "bbpde/series.hpp"

namespace bbpde {

namespace detail_spec {

// Re-centers the nonlinearity around a known solution v: the transformed
// normal form has lambda_c = lambda + dR/dz1(v), b_c = b + dR/dz2(v), the
// re-expanded c_{j,alpha}, the supplied right side in the `a` slot, and the
// upgraded weight mu0(t) = mu(t) + |log t| t^d.
EquationSpec shift_about(const EquationSpec& spec, const SolutionHandle& v,
                         const ScalarField& new_a, double d) {
    EquationSpec out;
    out.T0 = std::min(spec.T0, v.t_max);
    out.R0 = std::min(spec.R0, v.x_radius);
    out.rho0 = spec.rho0;
    const WeightFn base = spec.weight;
    out.weight = WeightFn(
        [base, d](double t) {
            return base.mu(t) + std::abs(std::log(t)) * std::pow(t, d);
        },
        base.t_max(), base.name() + "+log*t^d");

    auto spec_copy = spec;
    auto vh = v;
    out.a = new_a.valid() ? new_a : ScalarField::zero(out.T0, out.R0);
    out.lambda = ScalarField(
        [spec_copy, vh](double t, Cplx x) {
            return spec_copy.lambda(t, x) +
                   spec_copy.R_z1(t, x, vh(t, x), vh.dx(t, x));
        },
        out.T0, out.R0);
    out.b = ScalarField(
        [spec_copy, vh](double t, Cplx x) {
            return spec_copy.b(t, x) +
                   spec_copy.R_z2(t, x, vh(t, x), vh.dx(t, x));
        },
        out.T0, out.R0);

    // support lattice of the re-expanded nonlinearity
    std::vector<std::pair<int, int>> pairs;
    for (const auto& term : spec.nonlinear)
        for (int j = 0; j <= term.j; ++j)
            for (int al = 0; al <= term.alpha; ++al) {
                if (j + al < 2) continue;
                if (std::find(pairs.begin(), pairs.end(), std::make_pair(j, al)) ==
                    pairs.end())
                    pairs.emplace_back(j, al);
            }
    for (auto [j, al] : pairs) {
        out.nonlinear.push_back(
            {j, al,
             ScalarField(
                 [spec_copy, vh, j, al](double t, Cplx x) {
                     return spec_copy.shifted_coeff(j, al, t, x, vh(t, x),
                                                    vh.dx(t, x));
                 },
                 out.T0, out.R0)});
    }
    return out;
}

}  // namespace detail_spec

namespace {

// ordered compositions of n into `parts` positive integers
void for_each_composition(int n, int parts, std::vector<int>& cur,
                          const std::function<void(const std::vector<int>&)>& f) {
    if (parts == 0) {
        if (n == 0) f(cur);
        return;
    }
    for (int k = 1; k + (parts - 1) <= n; ++k) {
        cur.push_back(k);
        for_each_composition(n - k, parts - 1, cur, f);
        cur.pop_back();
    }
}

double fit_field_exponent(const ScalarField& f, double T, double R) {
    std::vector<double> lt, lv;
    double top = 0.0;
    const auto ts = log_spaced(1e-6, 0.9 * T, 16);
    std::vector<double> sups;
    for (double t : ts) {
        double s = 0.0;
        for (Cplx x : circle_nodes(0.0, 0.5 * R, 6))
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

struct ModeLadderData {
    HoloGerm lambda_germ;
    std::vector<std::pair<std::pair<int, int>, HoloGerm>> nl;  // (j,alpha)->germ
    PowerLogSeries a_series;
};

// The mode path needs t-constant lambda and a_{j,alpha}, vanishing b, and a
// power-log a.
std::optional<ModeLadderData> probe_mode_structure(const EquationSpec& spec) {
    ModeLadderData md;
    auto lg = detect_t_constant(spec.lambda, spec.T0, spec.R0);
    if (!lg) return std::nullopt;
    md.lambda_germ = *lg;

    double bmax = 0.0, lscale = std::abs(spec.lambda00()) + 1e-6;
    for (double t : log_spaced(1e-7, 0.9 * spec.T0, 8))
        for (Cplx x : circle_nodes(0.0, 0.5 * spec.R0, 4))
            bmax = std::max(bmax, std::abs(spec.b(t, x)));
    if (bmax > 1e-12 * lscale) return std::nullopt;

    for (const auto& term : spec.nonlinear) {
        auto cg = detect_t_constant(term.coeff, spec.T0, spec.R0);
        if (!cg) return std::nullopt;
        if (!cg->is_zero(1e-300))
            md.nl.push_back({{term.j, term.alpha}, *cg});
    }
    auto am = detect_power_mode(spec.a, spec.T0, spec.R0);
    if (!am) return std::nullopt;
    if (!am->is_zero) {
        double m = am->m;
        // exact-resonance snap keeps the mode algebra sharp
        const Cplx l0 = md.lambda_germ.coeffs.empty() ? Cplx(0) : md.lambda_germ.coeffs[0];
        for (int k = 1; k <= 8; ++k)
            if (std::abs(m * k - l0.real()) < 1e-7 && std::abs(l0.imag()) < 1e-12)
                m = l0.real() / k;
        md.a_series = PowerLogSeries::single(m, am->p, am->g);
    }
    return md;
}

PowerLogSeries apply_linv(const PowerLogSeries& s, const HoloGerm& lambda,
                          double res_tol, int deg) {
    PowerLogSeries out;
    for (const auto& term : s.terms())
        out.add(solve_mode(term.m, term.p, term.g, lambda, res_tol, deg));
    return out;
}

}  // namespace

ReductionLadder reduce_ladder(const EquationSpec& spec, double mu,
                              const LadderOptions& opt) {
    ReductionLadder lad;
    const Cplx lam00 = spec.lambda00();
    if (!(lam00.real() > 0))
        throw PreconditionError("reduce_ladder: Re lambda(0,0) <= 0");
    const double T_work = opt.T_work > 0 ? std::min(opt.T_work, spec.T0) : spec.T0;
    const double re = lam00.real();

    if (re < mu - opt.resonance_tol) {
        // no ladder needed below threshold: passthrough to the direct solver
        lad.N = 0;
        lad.d = mu;
        lad.residual_spec = spec;
        lad.rhs = spec.a;
        lad.rhs_exponent = mu;
        lad.mode_path = true;
        return lad;
    }

    int N = int(std::floor(re / mu + 1e-12));
    const bool resonant = std::abs(re - N * mu) < opt.resonance_tol;
    // resonant selection keeps N d < Re lambda(0,0) < (N+1) d with d < mu
    const double d = resonant ? mu * (1.0 - 1.0 / (2.0 * N + 2.0)) : mu;
    lad.N = N;
    lad.d = d;
    lad.resonant = resonant;
    if (!(N * d < re && re < (N + 1) * d))
        throw ConfigurationError("reduce_ladder: d-selection failed");

    auto md = probe_mode_structure(spec);
    const int deg = opt.work_degree;

    SolutionHandle v_handle;
    std::vector<PowerLogSeries> u_series, rhs_series;

    if (md) {
        lad.mode_path = true;
        u_series.assign(N + 1, PowerLogSeries::zero());
        rhs_series.assign(N + 1, PowerLogSeries::zero());
        std::vector<PowerLogSeries> du(N + 1);
        rhs_series[1] = md->a_series;
        u_series[1] = apply_linv(md->a_series, md->lambda_germ,
                                 opt.resonance_tol, deg);
        du[1] = u_series[1].dx();
        for (int n = 2; n <= N; ++n) {
            PowerLogSeries r;
            for (const auto& [ja, germ] : md->nl) {
                const auto [j, al] = ja;
                if (j + al > n) continue;
                std::vector<int> cur;
                for_each_composition(n, j + al, cur, [&](const std::vector<int>& ks) {
                    PowerLogSeries prod = PowerLogSeries::single(0.0, 0, germ);
                    for (int i = 0; i < j; ++i)
                        prod = PowerLogSeries::mul(prod, u_series[ks[i]], deg);
                    for (int i = 0; i < al; ++i)
                        prod = PowerLogSeries::mul(prod, du[ks[j + i]], deg);
                    r.add(prod);
                });
            }
            r.prune(T_work, 0.6 * spec.R0, 1e-18);
            rhs_series[n] = r;
            u_series[n] =
                apply_linv(r, md->lambda_germ, opt.resonance_tol, deg);
            du[n] = u_series[n].dx();
        }

        PowerLogSeries v;
        for (int n = 1; n <= N; ++n) v.add(u_series[n]);
        PowerLogSeries vx = v.dx();

        // f = R(v, vx) - sum of the rung right sides (= every multi-index
        // product of total order >= N+1)
        PowerLogSeries f;
        {
            // powers of v and vx up to the largest j, alpha
            int jmax = 0, amax = 0;
            for (const auto& [ja, germ] : md->nl) {
                jmax = std::max(jmax, ja.first);
                amax = std::max(amax, ja.second);
            }
            std::vector<PowerLogSeries> vp(jmax + 1), vxp(amax + 1);
            vp[0] = PowerLogSeries::single(0.0, 0, HoloGerm::constant(1.0, spec.R0));
            for (int j = 1; j <= jmax; ++j) {
                vp[j] = PowerLogSeries::mul(vp[j - 1], v, deg);
                vp[j].prune(T_work, 0.6 * spec.R0, 1e-18);
            }
            vxp[0] = vp[0];
            for (int al = 1; al <= amax; ++al) {
                vxp[al] = PowerLogSeries::mul(vxp[al - 1], vx, deg);
                vxp[al].prune(T_work, 0.6 * spec.R0, 1e-18);
            }
            for (const auto& [ja, germ] : md->nl) {
                PowerLogSeries term = PowerLogSeries::mul(
                    PowerLogSeries::single(0.0, 0, germ),
                    PowerLogSeries::mul(vp[ja.first], vxp[ja.second], deg), deg);
                f.add(term);
            }
            for (int n = 2; n <= N; ++n) f.add(PowerLogSeries(rhs_series[n]).scale(-1.0));
            f.prune(T_work, 0.6 * spec.R0, 1e-16);
        }

        for (int n = 1; n <= N; ++n) {
            auto h = u_series[n].to_handle(T_work, spec.R0, 1e-10);
            h.claimed_exponent = n * d;
            lad.terms.push_back(h);
        }
        v_handle = v.to_handle(T_work, spec.R0, 1e-10);
        PowerLogSeries fcopy = f;
        lad.rhs = ScalarField(
            [fcopy](double t, Cplx x) { return fcopy.eval(t, x); }, T_work,
            spec.R0);
        lad.rhs_exponent = f.empty() ? std::numeric_limits<double>::infinity()
                                     : f.min_exponent();
    } else {
        // Transport path: each rung is a backward Cauchy solve with zero data
        // at T_work, cached on a coefficient grid so later rungs stay cheap.
        lad.mode_path = false;
        const double R_grid = 0.5 * spec.R0;
        const double sigma_lo = std::log(1e-9), sigma_hi = std::log(T_work);
        const HoloGerm zero_psi = HoloGerm::zero(0.8 * spec.R0);
        std::vector<SolutionHandle> cached;  // cached rung evaluators
        auto spec_copy = spec;

        auto cache_handle = [&](const SolutionHandle& h, double exponent) {
            auto g = std::make_shared<GridFunction>(GridFunction::from_values(
                sigma_lo, sigma_hi, 96, R_grid, 64, h.eval));
            SolutionHandle out;
            out.eval = [g](double t, Cplx x) { return g->eval(t, x); };
            out.eval_dx = [g](double t, Cplx x) { return g->eval_dx(t, x); };
            out.t_max = T_work;
            out.x_radius = R_grid;
            out.provenance = "exact-formula";
            out.claimed_exponent = exponent;
            out.tolerance = 1e-7;
            return out;
        };

        for (int n = 1; n <= N; ++n) {
            ScalarField rhs_n;
            if (n == 1) {
                rhs_n = spec.a;
            } else {
                auto prev = cached;  // copy for the closure
                rhs_n = ScalarField(
                    [spec_copy, prev, n](double t, Cplx x) {
                        Cplx acc = 0.0;
                        for (const auto& term : spec_copy.nonlinear) {
                            const int parts = term.j + term.alpha;
                            if (parts > n) continue;
                            Cplx inner = 0.0;
                            std::vector<int> cur;
                            for_each_composition(
                                n, parts, cur, [&](const std::vector<int>& ks) {
                                    Cplx prod = 1.0;
                                    for (int i = 0; i < term.j; ++i)
                                        prod *= prev[ks[i] - 1](t, x);
                                    for (int i = 0; i < term.alpha; ++i)
                                        prod *= prev[ks[term.j + i] - 1].dx(t, x);
                                    inner += prod;
                                });
                            acc += term.coeff(t, x) * inner;
                        }
                        return acc;
                    },
                    T_work, R_grid);
            }
            SolutionHandle rung = solve_backward_cauchy(spec.lambda, spec.b,
                                                        rhs_n, zero_psi, T_work);
            cached.push_back(cache_handle(rung, n * d));
        }
        lad.terms = cached;

        auto vsum = cached;
        SolutionHandle v;
        v.eval = [vsum](double t, Cplx x) {
            Cplx acc = 0.0;
            for (const auto& h : vsum) acc += h(t, x);
            return acc;
        };
        v.eval_dx = [vsum](double t, Cplx x) {
            Cplx acc = 0.0;
            for (const auto& h : vsum) acc += h.dx(t, x);
            return acc;
        };
        v.t_max = T_work;
        v.x_radius = R_grid;
        v.claimed_exponent = d;
        v_handle = v;

        // f = R(v, v_x) - sum_{n=2..N} rung right sides
        auto vcopy = v;
        lad.rhs = ScalarField(
            [spec_copy, vcopy, vsum, N](double t, Cplx x) {
                const Cplx vv = vcopy(t, x), vvx = vcopy.dx(t, x);
                Cplx acc = spec_copy.R(t, x, vv, vvx);
                for (int n = 2; n <= N; ++n) {
                    for (const auto& term : spec_copy.nonlinear) {
                        const int parts = term.j + term.alpha;
                        if (parts > n) continue;
                        Cplx inner = 0.0;
                        std::vector<int> cur;
                        for_each_composition(
                            n, parts, cur, [&](const std::vector<int>& ks) {
                                Cplx prod = 1.0;
                                for (int i = 0; i < term.j; ++i)
                                    prod *= vsum[ks[i] - 1](t, x);
                                for (int i = 0; i < term.alpha; ++i)
                                    prod *= vsum[ks[term.j + i] - 1].dx(t, x);
                                inner += prod;
                            });
                        acc -= term.coeff(t, x) * inner;
                    }
                }
                return acc;
            },
            T_work, R_grid);
        lad.rhs_exponent = fit_field_exponent(lad.rhs, T_work, R_grid);
    }

    if (N >= 1) {
        lad.residual_spec = detail_spec::shift_about(spec, v_handle, lad.rhs, d);
        lad.residual_spec.T0 = T_work;

        // (N+1)d decay of the remainder right side
        if (lad.rhs_exponent < (N + 1) * d - 0.05)
            throw AccuracyError(
                "reduce_ladder: remainder right side decays slower than t^((N+1)d)");
        // fitted |c_i| <= C_i t^d constants
        auto fit_bound = [&](const ScalarField& base, bool z1) {
            double C = 0.0;
            for (double t : log_spaced(1e-5, 0.9 * T_work, 10))
                for (Cplx x : circle_nodes(0.0, 0.4 * spec.R0, 4)) {
                    const Cplx vv = v_handle(t, x), vvx = v_handle.dx(t, x);
                    const Cplx c = z1 ? spec.R_z1(t, x, vv, vvx)
                                      : spec.R_z2(t, x, vv, vvx);
                    C = std::max(C, std::abs(c) / std::pow(t, d));
                }
            (void)base;
            return C;
        };
        lad.c1_bound = fit_bound(spec.lambda, true);
        lad.c2_bound = fit_bound(spec.b, false);
    }
    return lad;
}

}  // namespace bbpde
