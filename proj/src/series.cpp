#include "bbpde/series.hpp"

#include <algorithm>
#include <cmath>

#include "bbpde/gridfn.hpp"
#include "bbpde/linear.hpp"

namespace bbpde {

std::vector<HoloGerm> psi_recurrence(const HoloGerm& psi0, Cplx lambda, int K,
                                     int work_degree) {
    if (std::abs(lambda) == 0.0)
        throw Error("psi_recurrence: lambda must be nonzero");
    if (K < 0) throw Error("psi_recurrence: K must be >= 0");
    std::vector<HoloGerm> psis{psi0};
    std::vector<HoloGerm> dpsis{psi0.derivative()};
    for (int k = 1; k <= K; ++k) {
        HoloGerm acc = HoloGerm::zero(psi0.radius);
        for (int i = 0; i + 1 <= k; ++i) {
            const int j = k - 1 - i;
            acc = germ_add(acc, germ_mul(dpsis[i], dpsis[j], work_degree));
        }
        acc = germ_scale(acc, 1.0 / (double(k) * lambda));
        acc.trim(1e-300);
        psis.push_back(acc);
        dpsis.push_back(acc.derivative());
    }
    return psis;
}

Cplx SeriesSolution::eval(double t, Cplx x) const {
    const Cplx e = eta(t);
    const double lt = std::log(t);
    Cplx acc = 0.0;
    for (size_t k = 0; k < psis.size(); ++k)
        acc += psis[k](e + x) * std::exp(double(k + 1) * lambda0 * lt);
    return acc;
}

Cplx SeriesSolution::eval_dx(double t, Cplx x) const {
    const Cplx e = eta(t);
    const double lt = std::log(t);
    Cplx acc = 0.0;
    for (size_t k = 0; k < psis.size(); ++k)
        acc += psis[k].derivative()(e + x) * std::exp(double(k + 1) * lambda0 * lt);
    return acc;
}

SolutionHandle SeriesSolution::to_handle(double tolerance) const {
    SeriesSolution copy = *this;
    SolutionHandle h;
    h.eval = [copy](double t, Cplx x) { return copy.eval(t, x); };
    h.eval_dx = [copy](double t, Cplx x) { return copy.eval_dx(t, x); };
    h.t_max = t_max;
    h.x_radius = x_radius;
    h.provenance = "series";
    h.claimed_exponent = lambda0.real();
    h.tolerance = tolerance;
    return h;
}

namespace {

// int_0^t f(tau)/tau dtau by adaptive Simpson in sigma with a dyadic tail.
Cplx log_integral_to(const std::function<Cplx(double)>& f, double t) {
    const auto g = [&f](double s) { return f(std::exp(s)); };
    auto simpson = [&g](double a, double b, double tol) {
        std::function<Cplx(double, double, Cplx, Cplx, Cplx, double, int)> rec =
            [&](double lo, double hi, Cplx fa, Cplx fm, Cplx fb, double eps,
                int depth) -> Cplx {
            const double mid = 0.5 * (lo + hi);
            const Cplx flm = g(0.5 * (lo + mid)), frm = g(0.5 * (mid + hi));
            const Cplx whole = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb);
            const Cplx left = (mid - lo) / 6.0 * (fa + 4.0 * flm + fm);
            const Cplx right = (hi - mid) / 6.0 * (fm + 4.0 * frm + fb);
            if (depth <= 0 || std::abs(left + right - whole) < 15.0 * eps)
                return left + right + (left + right - whole) / 15.0;
            return rec(lo, mid, fa, flm, fm, eps / 2, depth - 1) +
                   rec(mid, hi, fm, frm, fb, eps / 2, depth - 1);
        };
        return rec(a, b, g(a), g(0.5 * (a + b)), g(b), tol, 40);
    };
    const double s_t = std::log(t);
    Cplx total = 0.0;
    double prev = -1.0;
    for (int blk = 0; blk < 64; ++blk) {
        const double hi = s_t - 2.0 * blk, lo = s_t - 2.0 * (blk + 1);
        const Cplx piece = simpson(lo, hi, 1e-14);
        total += piece;
        const double mag = std::abs(piece);
        if (blk >= 2 && prev >= 0) {
            if (mag < 1e-16) break;
            if (mag >= prev * 0.99 && mag > 1e-12)
                throw PreconditionError("eta integral fails to converge");
        }
        prev = mag;
    }
    return total;
}

}  // namespace

SeriesSolution series_family(Cplx lambda, const std::function<Cplx(double)>& f,
                             const HoloGerm& psi, int K, double t_max,
                             double x_radius) {
    if (!(lambda.real() > 0))
        throw PreconditionError("series_family: Re lambda must be positive");
    SeriesSolution s;
    s.lambda0 = lambda;
    s.K = K;
    s.t_max = t_max;
    s.x_radius = std::min(x_radius, 0.75 * psi.radius);
    s.psis = psi_recurrence(psi, lambda, K);
    log_integral_to(f, t_max);  // fail fast if the eta integral diverges
    s.eta = [f](double t) { return log_integral_to(f, t); };
    return s;
}

EquationSpec quadratic_model_spec(Cplx lambda, double mu, double T0, double R0,
                                  double rho0) {
    EquationSpec spec;
    spec.T0 = T0;
    spec.R0 = R0;
    spec.rho0 = rho0;
    spec.weight = WeightFn::power(mu, T0);
    spec.a = ScalarField([mu](double t, Cplx x) { return x * std::pow(t, mu); },
                         T0, R0);
    spec.lambda = ScalarField::constant(lambda, T0, R0);
    spec.b = ScalarField::zero(T0, R0);
    spec.nonlinear.push_back({0, 2, ScalarField::constant(1.0, T0, R0)});
    return spec;
}

SolutionHandle quadratic_model_base(Cplx lambda, double mu, double T0,
                                    double R0) {
    if (!(mu > 0)) throw PreconditionError("quadratic_model_base: mu must be > 0");
    const double tol_case = 1e-12;
    std::function<Cplx(double, Cplx)> eval;
    bool sharp_below = false;
    if (std::abs(lambda - Cplx(mu)) < tol_case) {
        // u0 = x t^mu log t + t^{2mu} log^2 t / mu - 2 t^{2mu} log t / mu^2
        //      + 2 t^{2mu} / mu^3
        eval = [mu](double t, Cplx x) {
            const double lt = std::log(t);
            const double tm = std::pow(t, mu), t2m = tm * tm;
            return x * tm * lt + t2m * lt * lt / mu - 2.0 * t2m * lt / (mu * mu) +
                   2.0 * t2m / (mu * mu * mu);
        };
        sharp_below = true;
    } else if (std::abs(lambda - Cplx(2 * mu)) < tol_case) {
        // u0 = x t^mu/(mu-lambda) + t^{2mu} log t/(mu-lambda)^2
        eval = [mu, lambda](double t, Cplx x) {
            const Cplx den = mu - lambda;
            const double tm = std::pow(t, mu);
            return x * tm / den + tm * tm * std::log(t) / (den * den);
        };
    } else {
        eval = [mu, lambda](double t, Cplx x) {
            const Cplx den = mu - lambda;
            const double tm = std::pow(t, mu);
            return x * tm / den + tm * tm / (den * den * (2.0 * mu - lambda));
        };
    }
    auto h = make_handle(eval, T0, R0, "series", mu, 1e-10);
    h.exponent_sharp_below = sharp_below;
    return h;
}

// ---------------------------------------------------------------------------
// PowerLogSeries

PowerLogSeries::PowerLogSeries(std::vector<PowerLogTerm> terms)
    : terms_(std::move(terms)) {
    normalize();
}

PowerLogSeries PowerLogSeries::single(double m, int p, HoloGerm g) {
    PowerLogSeries s;
    s.add_term(m, p, g);
    return s;
}

double PowerLogSeries::min_exponent() const {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& t : terms_) m = std::min(m, t.m);
    return m;
}

Cplx PowerLogSeries::eval(double t, Cplx x) const {
    const double lt = std::log(t);
    Cplx acc = 0.0;
    for (const auto& term : terms_)
        acc += term.g(x) * std::exp(term.m * lt) * ipow(lt, term.p);
    return acc;
}

Cplx PowerLogSeries::eval_dx(double t, Cplx x) const {
    const double lt = std::log(t);
    Cplx acc = 0.0;
    for (const auto& term : terms_)
        acc += term.g.derivative()(x) * std::exp(term.m * lt) * ipow(lt, term.p);
    return acc;
}

PowerLogSeries PowerLogSeries::dx() const {
    PowerLogSeries out;
    for (const auto& term : terms_) out.add_term(term.m, term.p, term.g.derivative());
    return out;
}

PowerLogSeries& PowerLogSeries::add(const PowerLogSeries& other) {
    for (const auto& term : other.terms_) terms_.push_back(term);
    normalize();
    return *this;
}

PowerLogSeries& PowerLogSeries::add_term(double m, int p, const HoloGerm& g) {
    terms_.push_back({m, p, g});
    normalize();
    return *this;
}

PowerLogSeries& PowerLogSeries::scale(Cplx s) {
    for (auto& term : terms_) term.g = germ_scale(term.g, s);
    return *this;
}

PowerLogSeries PowerLogSeries::mul(const PowerLogSeries& a,
                                   const PowerLogSeries& b, int work_degree) {
    PowerLogSeries out;
    for (const auto& ta : a.terms_)
        for (const auto& tb : b.terms_)
            out.terms_.push_back(
                {ta.m + tb.m, ta.p + tb.p, germ_mul(ta.g, tb.g, work_degree)});
    out.normalize();
    return out;
}

void PowerLogSeries::normalize() {
    std::sort(terms_.begin(), terms_.end(), [](const auto& a, const auto& b) {
        if (std::abs(a.m - b.m) > 1e-9) return a.m < b.m;
        return a.p < b.p;
    });
    std::vector<PowerLogTerm> merged;
    for (auto& term : terms_) {
        if (!merged.empty() && std::abs(merged.back().m - term.m) <= 1e-9 &&
            merged.back().p == term.p)
            merged.back().g = germ_add(merged.back().g, term.g);
        else
            merged.push_back(std::move(term));
    }
    std::erase_if(merged, [](const PowerLogTerm& t) { return t.g.is_zero(); });
    terms_ = std::move(merged);
}

void PowerLogSeries::prune(double t_ref, double r, double threshold) {
    std::erase_if(terms_, [&](const PowerLogTerm& term) {
        double mag = 0.0;  // sup of t^m |log t|^p over a small ladder
        for (double t : {t_ref, 0.3 * t_ref, 0.05 * t_ref})
            mag = std::max(mag, std::pow(t, term.m) *
                                    ipow(std::abs(std::log(t)), term.p));
        return term.g.norm_at(r) * mag < threshold;
    });
}

SolutionHandle PowerLogSeries::to_handle(double t_max, double x_radius,
                                         double tolerance) const {
    PowerLogSeries copy = *this;
    SolutionHandle h;
    h.eval = [copy](double t, Cplx x) { return copy.eval(t, x); };
    PowerLogSeries dcopy = copy.dx();
    h.eval_dx = [dcopy](double t, Cplx x) { return dcopy.eval(t, x); };
    h.t_max = t_max;
    h.x_radius = x_radius;
    h.provenance = "series";
    h.claimed_exponent = copy.min_exponent();
    // a log factor degrades t^m to every exponent strictly below m
    for (const auto& term : copy.terms_)
        if (term.p > 0 && term.m <= copy.min_exponent() + 1e-12)
            h.exponent_sharp_below = true;
    h.tolerance = tolerance;
    return h;
}

PowerLogSeries solve_mode(double m, int p, const HoloGerm& g,
                          const HoloGerm& lambda, double resonance_tol,
                          int work_degree) {
    const Cplx lam0 = lambda.coeffs.empty() ? Cplx(0.0) : lambda.coeffs[0];
    const bool resonant = std::abs(Cplx(m) - lam0) < resonance_tol;
    if (resonant) {
        for (size_t k = 1; k < lambda.coeffs.size(); ++k)
            if (std::abs(lambda.coeffs[k]) > resonance_tol)
                throw PreconditionError(
                    "resonant mode with x-dependent lambda is outside the "
                    "mode-structured class");
        // (t d/dt - lambda) [g t^m log^{p+1} / (p+1)] = g t^m log^p
        return PowerLogSeries::single(m, p + 1, germ_scale(g, 1.0 / (p + 1)));
    }
    // triangular solve downward in the log power
    HoloGerm denom = germ_scale(lambda, -1.0);
    denom = germ_add(denom, HoloGerm::constant(m, lambda.radius));
    std::vector<HoloGerm> c(p + 1, HoloGerm::zero(g.radius));
    c[p] = germ_div(g, denom, work_degree);
    for (int q = p - 1; q >= 0; --q)
        c[q] = germ_div(germ_scale(c[q + 1], -(q + 1.0)), denom, work_degree);
    PowerLogSeries out;
    for (int q = 0; q <= p; ++q) out.add_term(m, q, c[q]);
    return out;
}

std::optional<HoloGerm> detect_t_constant(const ScalarField& f, double T0,
                                          double R0, double rel_tol) {
    const double rho = 0.55 * R0;
    double scale = 1e-300;
    std::vector<Cplx> ref;
    const auto xs = circle_nodes(0.0, rho, 8);
    for (Cplx x : xs) {
        ref.push_back(f(T0 * 0.9, x));
        scale = std::max(scale, std::abs(ref.back()));
    }
    for (double t : {T0 * 0.31, T0 * 0.043, T0 * 1e-4, T0 * 1e-7}) {
        for (size_t j = 0; j < xs.size(); ++j)
            if (std::abs(f(t, xs[j]) - ref[j]) > rel_tol * std::max(scale, 1.0))
                return std::nullopt;
    }
    return HoloGerm::from_samples([&](Cplx x) { return f(T0 * 0.9, x); }, rho, 32,
                                  R0);
}

std::optional<PowerModeDetection> detect_power_mode(const ScalarField& f,
                                                    double T0, double R0,
                                                    double rel_tol) {
    PowerModeDetection det;
    const double rho = 0.5 * R0;
    const Cplx x1 = rho * Cplx(0.74, 0.2), x2 = rho * Cplx(-0.31, 0.62);
    const auto ts = log_spaced(1e-7, 0.9 * T0, 24);

    double scale = 0.0;
    for (double t : ts) scale = std::max(scale, std::abs(f(t, x1)) + std::abs(f(t, x2)));
    if (scale == 0.0) {
        det.is_zero = true;
        return det;
    }

    // 3-parameter fit log|f| = m log t + p log|log t| + c at the probe with
    // the larger signal
    const Cplx xp = std::abs(f(ts[5], x1)) > std::abs(f(ts[5], x2)) ? x1 : x2;
    std::vector<double> lt, llt, y;
    for (double t : ts) {
        const double a = std::abs(f(t, xp));
        if (a <= scale * 1e-14) return std::nullopt;
        lt.push_back(std::log(t));
        llt.push_back(std::log(std::abs(std::log(t))));
        y.push_back(std::log(a));
    }
    // least squares for [m, p, c]
    double S[3][3] = {}, b3[3] = {};
    for (size_t i = 0; i < y.size(); ++i) {
        const double row[3] = {lt[i], llt[i], 1.0};
        for (int r = 0; r < 3; ++r) {
            b3[r] += row[r] * y[i];
            for (int c2 = 0; c2 < 3; ++c2) S[r][c2] += row[r] * row[c2];
        }
    }
    // solve the 3x3 system by Gaussian elimination
    double A[3][4] = {{S[0][0], S[0][1], S[0][2], b3[0]},
                      {S[1][0], S[1][1], S[1][2], b3[1]},
                      {S[2][0], S[2][1], S[2][2], b3[2]}};
    for (int col = 0; col < 3; ++col) {
        int piv = col;
        for (int r = col + 1; r < 3; ++r)
            if (std::abs(A[r][col]) > std::abs(A[piv][col])) piv = r;
        std::swap(A[piv], A[col]);
        for (int r = 0; r < 3; ++r) {
            if (r == col) continue;
            const double fct = A[r][col] / A[col][col];
            for (int cc = col; cc < 4; ++cc) A[r][cc] -= fct * A[col][cc];
        }
    }
    const double p_fit = A[1][3] / A[1][1];
    const int p = int(std::lround(p_fit));
    if (p < 0 || p > 4 || std::abs(p_fit - p) > 0.05) return std::nullopt;

    // refine m with the log power removed, then extract the germ
    const double t_a = ts[2], t_b = ts[20];
    const double ya = std::abs(f(t_a, xp)) / ipow(std::abs(std::log(t_a)), p);
    const double yb = std::abs(f(t_b, xp)) / ipow(std::abs(std::log(t_b)), p);
    det.m = std::log(yb / ya) / std::log(t_b / t_a);
    det.p = p;
    const double t_star = 0.3 * T0;
    const double denom = std::pow(t_star, det.m) * ipow(std::log(t_star), p);
    det.g = HoloGerm::from_samples(
        [&](Cplx x) { return f(t_star, x) / denom; }, rho, 32, R0);

    // verification across the ladder and the circle
    const double gsup = det.g.norm_at(rho) + 1e-300;
    for (double t : {ts[0], ts[8], ts[16], ts[23]})
        for (Cplx x : circle_nodes(0.0, rho, 6)) {
            const Cplx rec = det.g(x) * std::pow(t, det.m) * ipow(std::log(t), p);
            const double local =
                gsup * std::pow(t, det.m) * ipow(std::abs(std::log(t)), p);
            if (std::abs(rec - f(t, x)) > rel_tol * (local + 1e-9 * scale))
                return std::nullopt;
        }
    return det;
}

}  // namespace bbpde
