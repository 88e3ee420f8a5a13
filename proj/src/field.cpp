#include "bbpde/field.hpp"

#include <algorithm>
#include <cmath>

namespace bbpde {

Cplx deriv_x(const std::function<Cplx(double, Cplx)>& f, double t, Cplx x,
             int order, double x_radius, int points, double contour_radius) {
    const double margin = x_radius - std::abs(x);
    if (margin <= 0) throw DomainError("deriv_x: x outside the domain disc");
    double rho = contour_radius > 0 ? contour_radius : 0.5 * margin;
    if (std::abs(x) + rho >= x_radius)
        throw DomainError("deriv_x: contour exits the domain disc");

    // n!/(2 pi) int f(x + rho e^{i th}) e^{-i n th} dth / rho^n, trapezoid.
    Cplx acc = 0.0;
    for (int m = 0; m < points; ++m) {
        const double th = 2.0 * kPi * m / points;
        const Cplx z = x + rho * Cplx(std::cos(th), std::sin(th));
        const Cplx v = f(t, z);
        if (!is_finite(v))
            throw AccuracyError("deriv_x: non-finite sample on the contour");
        acc += v * Cplx(std::cos(order * th), -std::sin(order * th));
    }
    double fact = 1.0;
    for (int k = 2; k <= order; ++k) fact *= k;
    return acc * fact / (double(points) * std::pow(rho, order));
}

Cplx deriv_x(const ScalarField& f, double t, Cplx x, int order, int points,
             double contour_radius) {
    if (!(t > 0) || t > f.t_max * (1.0 + 1e-12))
        throw DomainError("deriv_x: t outside (0, t_max]");
    return deriv_x(f.eval, t, x, order, f.x_radius, points, contour_radius);
}

HolomorphyReport check_holomorphy(const ScalarField& f, double t,
                                  double contour_radius, int degree) {
    HolomorphyReport rep;
    rep.contour_radius =
        contour_radius > 0 ? contour_radius : 0.6 * f.x_radius;
    HoloGerm g = HoloGerm::from_samples(
        [&](Cplx x) { return f(t, x); }, rep.contour_radius, degree, f.x_radius);
    rep.ok = germ_coefficients_decay(g, &rep.fitted_rate);
    // rate is per unit x; convergence on the sampling circle needs rate*rho < 1
    rep.ok = rep.ok && rep.fitted_rate * rep.contour_radius < 1.0 + 1e-9;
    return rep;
}

Cplx EquationSpec::F(double t, Cplx x, Cplx z1, Cplx z2) const {
    return a(t, x) + lambda(t, x) * z1 + b(t, x) * z2 + R(t, x, z1, z2);
}

Cplx EquationSpec::R(double t, Cplx x, Cplx z1, Cplx z2) const {
    Cplx acc = 0.0;
    for (const auto& term : nonlinear) {
        Cplx p = term.coeff(t, x);
        for (int k = 0; k < term.j; ++k) p *= z1;
        for (int k = 0; k < term.alpha; ++k) p *= z2;
        acc += p;
    }
    return acc;
}

Cplx EquationSpec::R_z1(double t, Cplx x, Cplx z1, Cplx z2) const {
    Cplx acc = 0.0;
    for (const auto& term : nonlinear) {
        if (term.j == 0) continue;
        Cplx p = term.coeff(t, x) * double(term.j);
        for (int k = 0; k < term.j - 1; ++k) p *= z1;
        for (int k = 0; k < term.alpha; ++k) p *= z2;
        acc += p;
    }
    return acc;
}

Cplx EquationSpec::R_z2(double t, Cplx x, Cplx z1, Cplx z2) const {
    Cplx acc = 0.0;
    for (const auto& term : nonlinear) {
        if (term.alpha == 0) continue;
        Cplx p = term.coeff(t, x) * double(term.alpha);
        for (int k = 0; k < term.j; ++k) p *= z1;
        for (int k = 0; k < term.alpha - 1; ++k) p *= z2;
        acc += p;
    }
    return acc;
}

namespace {
double binom(int n, int k) {
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}
}  // namespace

Cplx EquationSpec::shifted_coeff(int j, int alpha, double t, Cplx x, Cplx v,
                                 Cplx vx) const {
    // c_{j,a} = sum_{J>=j, A>=a} a_{J,A} C(J,j) C(A,a) v^{J-j} vx^{A-a}
    Cplx acc = 0.0;
    for (const auto& term : nonlinear) {
        if (term.j < j || term.alpha < alpha) continue;
        Cplx p = term.coeff(t, x) * binom(term.j, j) * binom(term.alpha, alpha);
        for (int k = 0; k < term.j - j; ++k) p *= v;
        for (int k = 0; k < term.alpha - alpha; ++k) p *= vx;
        acc += p;
    }
    return acc;
}

Cplx limit_t0(const ScalarField& f, Cplx x) {
    // Dyadic ladder with Aitken acceleration; most coefficients are constant
    // or power-converging in t, both of which Aitken handles.
    const double t_top = std::min(f.t_max, 0.25) * 0.5;
    std::vector<Cplx> v;
    for (int k = 0; k < 24; ++k) v.push_back(f(t_top * std::pow(2.0, -k), x));
    // quick exit for t-constant fields
    if (std::abs(v[0] - v[10]) <= 1e-14 * (1.0 + std::abs(v[0]))) return v.back();
    Cplx best = v.back();
    for (int pass = 0; pass < 2; ++pass) {
        std::vector<Cplx> w;
        for (size_t i = 0; i + 2 < v.size(); ++i) {
            const Cplx d1 = v[i + 1] - v[i], d2 = v[i + 2] - v[i + 1];
            const Cplx den = d2 - d1;
            w.push_back(std::abs(den) > 1e-300 ? v[i + 2] - d2 * d2 / den
                                               : v[i + 2]);
        }
        if (w.empty()) break;
        v = std::move(w);
        best = v.back();
    }
    return best;
}

Cplx EquationSpec::lambda00() const { return limit_t0(lambda, 0.0); }

HoloGerm EquationSpec::lambda0_germ(double sample_radius, int degree) const {
    const double rho = sample_radius > 0 ? sample_radius : 0.6 * R0;
    return HoloGerm::from_samples(
        [this](Cplx x) { return limit_t0(lambda, x); }, rho, degree, R0);
}

NormalFormResult normal_form(
    const std::function<Cplx(double, Cplx, Cplx, Cplx)>& F, double T0, double R0,
    double rho0, const WeightFn& weight, const NormalFormOptions& opt) {
    const double rz = opt.torus_radius > 0 ? opt.torus_radius : 0.5 * rho0;
    const int M = opt.torus_points;
    const int jmax = opt.j_max, amax = opt.alpha_max;

    // All coefficients of one (t,x) slice via the bivariate Cauchy sum over
    // the torus |z1| = |z2| = rz. Compiled into a shared helper so each
    // ScalarField below reuses the same machinery.
    auto torus_coeffs = [F, rz, M, jmax, amax](double t, Cplx x) {
        std::vector<std::vector<Cplx>> c(jmax + 1,
                                         std::vector<Cplx>(amax + 1, 0.0));
        std::vector<Cplx> ring(M);
        for (int p = 0; p < M; ++p) {
            const double th = 2.0 * kPi * p / M;
            ring[p] = rz * Cplx(std::cos(th), std::sin(th));
        }
        for (int p = 0; p < M; ++p)
            for (int q = 0; q < M; ++q) {
                const Cplx v = F(t, x, ring[p], ring[q]);
                if (!is_finite(v))
                    throw AccuracyError("normal_form: non-finite F sample");
                for (int j = 0; j <= jmax; ++j)
                    for (int al = 0; al <= amax; ++al) {
                        const double ph = -2.0 * kPi * (j * p + al * q) / M;
                        c[j][al] += v * Cplx(std::cos(ph), std::sin(ph));
                    }
            }
        for (int j = 0; j <= jmax; ++j)
            for (int al = 0; al <= amax; ++al)
                c[j][al] /= double(M) * double(M) * std::pow(rz, j + al);
        return c;
    };

    NormalFormResult out;
    EquationSpec& spec = out.spec;
    spec.T0 = T0; spec.R0 = R0; spec.rho0 = rho0; spec.weight = weight;
    spec.a = ScalarField([F](double t, Cplx x) { return F(t, x, 0.0, 0.0); },
                         T0, R0);
    spec.lambda = ScalarField(
        [torus_coeffs](double t, Cplx x) { return torus_coeffs(t, x)[1][0]; },
        T0, R0);
    spec.b = ScalarField(
        [torus_coeffs](double t, Cplx x) { return torus_coeffs(t, x)[0][1]; },
        T0, R0);
    for (int j = 0; j <= jmax; ++j)
        for (int al = 0; al <= amax; ++al) {
            if (j + al < 2) continue;
            spec.nonlinear.push_back(
                {j, al,
                 ScalarField([torus_coeffs, j, al](double t, Cplx x) {
                                 return torus_coeffs(t, x)[j][al];
                             },
                             T0, R0)});
        }

    // scale reference for the relative tolerances below
    double scale = 0.0;
    {
        auto xs = circle_nodes(0.0, 0.6 * R0, 8);
        for (Cplx x : xs) scale = std::max(scale, std::abs(F(T0, x, 0.3 * rz, 0.3 * rz)));
        scale = std::max(scale, 1e-6);
    }

    // A2) a(0,x) = 0 and A3) b(0,x) = 0 on a sample circle.
    for (Cplx x : circle_nodes(0.0, 0.6 * R0, 8)) {
        out.a2_defect = std::max(out.a2_defect, std::abs(limit_t0(spec.a, x)));
        out.a3_defect = std::max(out.a3_defect, std::abs(limit_t0(spec.b, x)));
    }
    if (out.a2_defect > opt.tol * scale)
        throw SpecInvalidError("normal_form: assumption A2 violated, F(0,x,0,0) != 0");
    if (out.a3_defect > opt.tol * scale)
        throw SpecInvalidError(
            "normal_form: assumption A3 violated, dF/dz2(0,x,0,0) != 0");

    // Discarded-tail bound: norm of the outermost coefficient shell must sit
    // below tolerance at the polydisc scale.
    {
        auto c = torus_coeffs(T0, 0.3 * R0);
        double shell = 0.0;
        for (int j = 0; j <= jmax; ++j)
            shell = std::max(shell, std::abs(c[j][amax]) * std::pow(rz, j + amax));
        for (int al = 0; al <= amax; ++al)
            shell = std::max(shell, std::abs(c[jmax][al]) * std::pow(rz, jmax + al));
        out.tail_bound = shell;
        if (shell > 1e-6 * scale)
            throw TruncationError("normal_form: coefficient tail not decaying");
    }

    // Reconstruction spot check on deterministic pseudo-random points.
    {
        uint64_t s = 0x9e3779b97f4a7c15ull;
        auto next = [&s]() {
            s ^= s << 13; s ^= s >> 7; s ^= s << 17;
            return double(s % 1000000) / 1000000.0;
        };
        for (int i = 0; i < 32; ++i) {
            const double t = T0 * (0.05 + 0.95 * next());
            const Cplx x = 0.5 * R0 * next() *
                           Cplx(std::cos(2 * kPi * next()), std::sin(2 * kPi * next()));
            const Cplx z1 = 0.3 * rz * next(), z2 = 0.3 * rz * next();
            const Cplx rec = spec.F(t, x, z1, z2);
            out.reconstruction_error =
                std::max(out.reconstruction_error, std::abs(rec - F(t, x, z1, z2)));
        }
        if (out.reconstruction_error > 1e-6 * scale + 10 * out.tail_bound)
            throw TruncationError("normal_form: reconstruction misses F beyond tail bound");
    }
    return out;
}

}  // namespace bbpde
