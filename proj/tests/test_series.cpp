#include <doctest.h>

#include <random>

#include "bbpde/residual.hpp"
#include "bbpde/series.hpp"

using namespace bbpde;

TEST_CASE("germ recurrence closed forms") {
    // constant germ: all later germs vanish
    auto psis = psi_recurrence(HoloGerm::constant(0.7, 1.0), 3.0, 4);
    for (int k = 1; k <= 4; ++k) CHECK(psis[k].is_zero(1e-15));

    // psi0 = x, lambda = 3: psi1 = 1/3, psi2 = 0
    auto p2 = psi_recurrence(HoloGerm({0.0, 1.0}, 1.0), 3.0, 3);
    CHECK(std::abs(p2[1](0.37) - Cplx(1.0 / 3.0)) < 1e-14);
    CHECK(p2[2].is_zero(1e-15));
    CHECK(p2[3].is_zero(1e-15));

    // psi0 = x^2: psi1 = 4 x^2 / lambda, psi2 = 16 x^2 / lambda^2
    const Cplx lam(2.0, 0.5);
    auto p3 = psi_recurrence(HoloGerm({0.0, 0.0, 1.0}, 1.0), lam, 2);
    const Cplx x = 0.21;
    CHECK(std::abs(p3[1](x) - 4.0 * x * x / lam) < 1e-13);
    CHECK(std::abs(p3[2](x) - 16.0 * x * x / (lam * lam)) < 1e-13);

    CHECK_THROWS_AS(psi_recurrence(HoloGerm({0.0, 1.0}, 1.0), 0.0, 2), Error);
}

namespace {

// brute-force oracle: plain coefficient-vector polynomials and the literal
// recurrence, independent of the germ arithmetic in the library
using Poly = std::vector<Cplx>;

Poly poly_mul(const Poly& a, const Poly& b) {
    Poly c(a.size() + b.size() - 1, 0.0);
    for (size_t i = 0; i < a.size(); ++i)
        for (size_t j = 0; j < b.size(); ++j) c[i + j] += a[i] * b[j];
    return c;
}
Poly poly_dx(const Poly& a) {
    if (a.size() <= 1) return {Cplx(0.0)};
    Poly d(a.size() - 1);
    for (size_t k = 1; k < a.size(); ++k) d[k - 1] = double(k) * a[k];
    return d;
}

std::vector<Poly> brute_force_psis(const Poly& psi0, Cplx lambda, int K) {
    std::vector<Poly> psis{psi0};
    for (int k = 1; k <= K; ++k) {
        Poly acc{Cplx(0.0)};
        for (int i = 0; i + 1 <= k; ++i) {
            const Poly prod = poly_mul(poly_dx(psis[i]), poly_dx(psis[k - 1 - i]));
            if (prod.size() > acc.size()) acc.resize(prod.size(), 0.0);
            for (size_t m = 0; m < prod.size(); ++m) acc[m] += prod[m];
        }
        for (Cplx& c : acc) c /= double(k) * lambda;
        psis.push_back(acc);
    }
    return psis;
}

}  // namespace

TEST_CASE("germ recurrence matches the brute-force oracle") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 10; ++trial) {
        const int deg = 1 + int(3 * std::abs(u(rng)));
        Poly psi0(deg + 1);
        for (Cplx& c : psi0) c = Cplx(u(rng), 0.3 * u(rng));
        const Cplx lam(1.0 + std::abs(u(rng)), 0.2 * u(rng));
        const int K = 6;
        auto lib = psi_recurrence(HoloGerm(psi0, 1.0), lam, K, 64);
        auto ref = brute_force_psis(psi0, lam, K);
        for (int k = 0; k <= K; ++k) {
            for (size_t m = 0; m < ref[k].size(); ++m) {
                const Cplx got = m < lib[k].coeffs.size() ? lib[k].coeffs[m] : Cplx(0.0);
                CHECK(std::abs(got - ref[k][m]) < 1e-10 * (1.0 + std::abs(ref[k][m])));
            }
        }
    }
}

TEST_CASE("series family closed form at lambda = 3, mu = 1") {
    // f = -t, eta = -t, psi = x: W = (x - t) t^3 + t^6/3
    HoloGerm psi({0.0, 1.0}, 1.0);
    auto s = series_family(3.0, [](double t) { return Cplx(-t); }, psi, 6);
    for (double t : {0.02, 0.1, 0.25}) {
        const Cplx x(0.12, -0.07);
        const Cplx want = (x - t) * std::pow(t, 3) + std::pow(t, 6) / 3.0;
        CHECK(std::abs(s.eval(t, x) - want) < 1e-12);
    }
    // zero germ: identically zero
    auto s0 = series_family(3.0, [](double t) { return Cplx(-t); },
                            HoloGerm::zero(1.0), 4);
    CHECK(std::abs(s0.eval(0.1, 0.2)) == 0.0);
}

TEST_CASE("series family satisfies the reduced equation") {
    // t W_t = lambda W + f(t) W_x + (W_x)^2 checked directly on a grid
    auto run = [](Cplx lambda, std::function<Cplx(double)> f, int K) {
        HoloGerm psi({0.0, 1.0, 0.4}, 1.0);
        auto s = series_family(lambda, f, psi, K);
        auto h = s.to_handle();
        double sup = 0.0;
        const double hh = 1e-3;
        for (double t : log_spaced(1e-3, 0.1, 8))
            for (Cplx x : circle_nodes(0.0, 0.2, 6)) {
                const Cplx tut = (-h.eval(t * std::exp(2 * hh), x) +
                                  8.0 * h.eval(t * std::exp(hh), x) -
                                  8.0 * h.eval(t * std::exp(-hh), x) +
                                  h.eval(t * std::exp(-2 * hh), x)) /
                                 (12.0 * hh);
                const Cplx wx = h.dx(t, x);
                sup = std::max(sup,
                               std::abs(tut - (lambda * h.eval(t, x) +
                                               f(t) * wx + wx * wx)));
            }
        return sup;
    };
    // generic case lambda = 3, mu = 1
    CHECK(run(3.0, [](double t) { return Cplx(-t); }, 8) < 1e-9);
    // resonant printed case lambda = mu = 1: f = 2 t log t
    CHECK(run(1.0, [](double t) { return Cplx(2.0 * t * std::log(t)); }, 10) < 1e-7);
}

TEST_CASE("series residual decays at the truncation order") {
    // dropping the series after K terms leaves a remainder of order
    // t^{(K+2) Re lambda}; the log-log slope of the residual shows it
    const Cplx lambda = 3.0;
    HoloGerm psi({0.0, 1.0}, 1.0);
    const int K = 2;
    auto s = series_family(lambda, [](double t) { return Cplx(-t); }, psi, K);
    auto h = s.to_handle();
    std::vector<double> lt, lr;
    const double hh = 1e-3;
    for (double t : log_spaced(3e-3, 1e-1, 10)) {
        double sup = 0.0;
        for (Cplx x : circle_nodes(0.0, 0.15, 4)) {
            const Cplx tut = (-h.eval(t * std::exp(2 * hh), x) +
                              8.0 * h.eval(t * std::exp(hh), x) -
                              8.0 * h.eval(t * std::exp(-hh), x) +
                              h.eval(t * std::exp(-2 * hh), x)) /
                             (12.0 * hh);
            const Cplx wx = h.dx(t, x);
            sup = std::max(sup, std::abs(tut - (lambda * h.eval(t, x) -
                                                t * wx + wx * wx)));
        }
        if (sup > 1e-300) {
            lt.push_back(std::log(t));
            lr.push_back(std::log(sup));
        }
    }
    double slope, icpt;
    linear_fit(lt, lr, slope, icpt);
    CHECK(slope >= (K + 2) * lambda.real() - 0.2);
}

TEST_CASE("printed base solutions for the benchmark model") {
    // generic
    auto u1 = quadratic_model_base(3.0, 1.0);
    CHECK(std::abs(u1(0.1, 0.2) - Cplx(-0.2 * 0.1 / 2 - 0.01 / 4)) < 1e-15);
    // lambda = 2 mu: log term
    auto u2 = quadratic_model_base(2.0, 1.0);
    CHECK(std::abs(u2(0.1, 0.2) - Cplx(-0.2 * 0.1 + 0.01 * std::log(0.1))) < 1e-15);
    // lambda = mu: log and log^2 terms
    auto u3 = quadratic_model_base(1.0, 1.0);
    const double lt = std::log(0.1);
    CHECK(std::abs(u3(0.1, 0.2) -
                   Cplx(0.2 * 0.1 * lt + 0.01 * lt * lt - 2 * 0.01 * lt +
                        2 * 0.01)) < 1e-15);
    CHECK(u3.exponent_sharp_below);

    // all three case splits pass the residual oracle
    auto grid = make_diag_grid(1e-3, 0.2, 8, 0.25, 6);
    for (double lambda : {3.0, 2.0, 1.0, 0.5}) {
        auto spec = quadratic_model_spec(lambda, 1.0);
        auto u = quadratic_model_base(lambda, 1.0);
        CHECK(residual(spec, u, grid).residual_sup <= 1e-8);
    }
}

TEST_CASE("power-log mode solver") {
    HoloGerm lam = HoloGerm::constant(3.0, 1.0);
    // non-resonant: (t d/dt - 3)^{-1} of g t^1 is g t / (1 - 3)
    auto s = solve_mode(1.0, 0, HoloGerm({0.0, 1.0}, 1.0), lam);
    CHECK(std::abs(s.eval(0.1, 0.5) - Cplx(0.5 * 0.1 / (1.0 - 3.0))) < 1e-13);
    // resonant: (t d/dt - 3)^{-1} of t^3 is t^3 log t
    auto r = solve_mode(3.0, 0, HoloGerm::constant(1.0, 1.0), lam);
    CHECK(std::abs(r.eval(0.1, 0.0) - Cplx(0.001 * std::log(0.1))) < 1e-13);
    // resonant with log^2 source: t^1, lambda = 1, p = 2 -> t log^3 / 3
    HoloGerm lam1 = HoloGerm::constant(1.0, 1.0);
    auto q = solve_mode(1.0, 2, HoloGerm::constant(1.0, 1.0), lam1);
    const double l = std::log(0.2);
    CHECK(std::abs(q.eval(0.2, 0.0) - Cplx(0.2 * l * l * l / 3.0)) < 1e-13);
}

TEST_CASE("power mode detection") {
    ScalarField f([](double t, Cplx x) { return x * t; }, 0.3, 1.0);
    auto det = detect_power_mode(f, 0.3, 1.0);
    REQUIRE(bool(det));
    CHECK(det->m == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(det->p == 0);
    CHECK(std::abs(det->g(0.3) - Cplx(0.3)) < 1e-9);

    ScalarField g([](double t, Cplx) { return Cplx(t * std::log(t)); }, 0.3, 1.0);
    auto det2 = detect_power_mode(g, 0.3, 1.0);
    REQUIRE(bool(det2));
    CHECK(det2->m == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(det2->p == 1);

    // not a single mode
    ScalarField h([](double t, Cplx) { return Cplx(t + std::pow(t, 1.5)); }, 0.3, 1.0);
    CHECK_FALSE(bool(detect_power_mode(h, 0.3, 1.0)));

    ScalarField z = ScalarField::zero(0.3, 1.0);
    auto det3 = detect_power_mode(z, 0.3, 1.0);
    REQUIRE(bool(det3));
    CHECK(det3->is_zero);
}

TEST_CASE("reduction ladder on the benchmark model") {
    // lambda = 3, mu = 1: N = 3, sum of the ladder matches the closed form
    auto spec = quadratic_model_spec(3.0, 1.0);
    auto lad = reduce_ladder(spec, 1.0);
    CHECK(lad.N == 3);
    CHECK(lad.mode_path);
    CHECK(lad.terms.size() == 3);
    // claimed exponents of the rungs grow like n d
    for (int n = 1; n <= 3; ++n)
        CHECK(lad.terms[n - 1].claimed_exponent == doctest::Approx(n * lad.d));
    // remainder right side vanishes identically here
    CHECK(std::isinf(lad.rhs_exponent));
    Cplx total = 0.0;
    for (const auto& h : lad.terms) total += h(0.1, 0.2);
    const Cplx want = -0.2 * 0.1 / 2.0 - 0.01 / 4.0;
    CHECK(std::abs(total - want) < 1e-12);
    // transformed equation carries lambda_c = 3 and b_c = -t
    CHECK(std::abs(lad.residual_spec.lambda(0.1, 0.05) - Cplx(3.0)) < 1e-12);
    CHECK(std::abs(lad.residual_spec.b(0.1, 0.05) - Cplx(-0.1)) < 1e-12);
    CHECK(lad.c2_bound > 0.0);

    // a == 0 passthrough: all rungs vanish
    auto spec0 = spec;
    spec0.a = ScalarField::zero(spec.T0, spec.R0);
    auto lad0 = reduce_ladder(spec0, 1.0);
    for (const auto& h : lad0.terms) CHECK(std::abs(h(0.1, 0.2)) < 1e-14);

    // below-threshold regime: passthrough with N = 0
    auto spec_low = quadratic_model_spec(0.5, 1.0);
    auto lad_low = reduce_ladder(spec_low, 1.0);
    CHECK(lad_low.N == 0);
    CHECK(lad_low.terms.empty());
}

TEST_CASE("resonant ladder keeps the log structure") {
    auto spec = quadratic_model_spec(2.0, 1.0);
    auto lad = reduce_ladder(spec, 1.0);
    CHECK(lad.N == 2);
    CHECK(lad.resonant);
    CHECK(lad.d == doctest::Approx(1.0 - 1.0 / 6.0));
    Cplx total = 0.0;
    for (const auto& h : lad.terms) total += h(0.1, 0.2);
    CHECK(std::abs(total - Cplx(-0.2 * 0.1 + 0.01 * std::log(0.1))) < 1e-12);
}
