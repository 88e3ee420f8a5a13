#include <doctest.h>

#include <random>

#include "bbpde/pipeline.hpp"
#include "bbpde/residual.hpp"

using namespace bbpde;

namespace {

double sup_err_vs(const SolutionHandle& u,
                  const std::function<Cplx(double, Cplx)>& ref, double t_lo,
                  double t_hi, double radius) {
    double e = 0.0;
    for (double t : log_spaced(t_lo, t_hi, 8))
        for (Cplx x : circle_nodes(0.0, radius, 6))
            e = std::max(e, std::abs(u(t, x) - ref(t, x)));
    return e;
}

}  // namespace

TEST_CASE("base solutions match the printed closed forms") {
    struct Case { double lambda, mu; };
    for (Case c : {Case{3.0, 1.0}, Case{2.0, 1.0}, Case{0.5, 1.0}}) {
        auto spec = quadratic_model_spec(c.lambda, c.mu);
        auto ref = quadratic_model_base(c.lambda, c.mu);
        auto u = solve_u0(spec);
        CHECK(sup_err_vs(u, ref.eval, 1e-3, 0.2, 0.25) < 1e-6);
        CHECK(u.claimed_exponent == doctest::Approx(c.mu).epsilon(1e-6));
    }
}

TEST_CASE("a == 0 input gives the zero base solution") {
    auto spec = quadratic_model_spec(3.0, 1.0);
    spec.a = ScalarField::zero(spec.T0, spec.R0);
    auto u = solve_u0(spec);
    CHECK(std::abs(u(0.1, 0.3)) == 0.0);
}

TEST_CASE("reduction about the base solution reproduces the reduced equation") {
    auto spec = quadratic_model_spec(3.0, 1.0);
    auto u0 = solve_u0(spec);
    auto spec0 = reduce_about(spec, u0);
    // a == 0, lambda_c = 3, b_c = 2 u0_x = -t, c_{0,2} = 1
    CHECK(std::abs(spec0.a(0.1, 0.2)) < 1e-12);
    CHECK(std::abs(spec0.lambda(0.1, 0.2) - Cplx(3.0)) < 1e-10);
    CHECK(std::abs(spec0.b(0.1, 0.2) - Cplx(-0.1)) < 1e-10);
    Cplx c02 = 0.0;
    for (const auto& term : spec0.nonlinear)
        if (term.j == 0 && term.alpha == 2) c02 = term.coeff(0.1, 0.2);
    CHECK(std::abs(c02 - Cplx(1.0)) < 1e-12);

    // resonant case: b_c = 2 t log t
    auto spec_r = quadratic_model_spec(1.0, 1.0);
    auto u0r = solve_u0(spec_r);
    auto spec0r = reduce_about(spec_r, u0r);
    CHECK(std::abs(spec0r.b(0.1, 0.0) - Cplx(2.0 * 0.1 * std::log(0.1))) < 1e-7);

    // reduction about zero on an a == 0 spec changes nothing
    auto already0 = spec0;
    auto z = zero_solution(already0.T0, already0.R0);
    z.claimed_exponent = 1.0;
    auto spec00 = reduce_about(already0, z);
    CHECK(std::abs(spec00.lambda(0.1, 0.2) - spec0.lambda(0.1, 0.2)) < 1e-12);
    CHECK(std::abs(spec00.b(0.1, 0.2) - spec0.b(0.1, 0.2)) < 1e-12);

    // a fake base solution is rejected
    auto fake = make_handle([](double t, Cplx) { return Cplx(t); }, spec.T0,
                            spec.R0, "exact-formula", 1.0, 1e-8);
    CHECK_THROWS_AS(reduce_about(spec, fake), InvalidBaseError);
}

TEST_CASE("family member agrees with the explicit series") {
    auto spec = quadratic_model_spec(3.0, 1.0);
    auto u0 = solve_u0(spec);
    auto spec0 = reduce_about(spec, u0);

    HoloGerm psi({0.0, 1.0}, 1.0);
    auto fam = solve_family(spec0, psi);
    auto ser = series_family(3.0, [](double t) { return Cplx(-t); }, psi, 6);
    double diff = 0.0;
    for (double t : log_spaced(1e-3, 0.1, 8))
        for (Cplx x : circle_nodes(0.0, 0.2, 6))
            diff = std::max(diff, std::abs(fam.u(t, x) - ser.eval(t, x)));
    CHECK(diff < 1e-6);

    // u = v + w pointwise
    const Cplx s = fam.v_part(0.05, 0.1) + fam.w_part(0.05, 0.1);
    CHECK(std::abs(fam.u(0.05, 0.1) - s) < 1e-12);

    // data law curve is monotone and ends tiny
    for (size_t i = 1; i < fam.limit_error_curve.size(); ++i)
        CHECK(fam.limit_error_curve[i].second <=
              fam.limit_error_curve[i - 1].second * (1 + 1e-9));
    CHECK(fam.limit_error_curve.back().second < 1e-3);

    // constant germ: the member is exactly c t^3
    HoloGerm psic({0.7}, 1.0);
    auto famc = solve_family(spec0, psic);
    double diffc = 0.0;
    for (double t : log_spaced(1e-3, 0.1, 6))
        diffc = std::max(diffc,
                         std::abs(famc.u(t, 0.1) - 0.7 * std::pow(t, 3)));
    CHECK(diffc < 1e-8);

    // zero germ: the zero member
    auto fam0 = solve_family(spec0, HoloGerm::zero(1.0));
    CHECK(std::abs(fam0.u(0.05, 0.1)) == 0.0);
}

TEST_CASE("germ recovery round trip") {
    auto spec = quadratic_model_spec(3.0, 1.0);
    auto u0 = solve_u0(spec);
    auto spec0 = reduce_about(spec, u0);

    HoloGerm psi({0.2, -0.6, 0.0, 0.45}, 1.0);
    auto fam = solve_family(spec0, psi);
    auto rec = recover_psi(spec0, fam.u);
    for (size_t k = 0; k < 6; ++k) {
        const Cplx want = k < psi.coeffs.size() ? psi.coeffs[k] : Cplx(0.0);
        const Cplx got = k < rec.coeffs.size() ? rec.coeffs[k] : Cplx(0.0);
        CHECK(std::abs(got - want) < 1e-4);
    }

    // recovery via the independent series construction
    HoloGerm psi2({0.0, 0.0, 1.0}, 1.0);
    auto ser = series_family(3.0, [](double t) { return Cplx(-t); }, psi2, 6);
    auto rec2 = recover_psi(spec0, ser.to_handle());
    CHECK(std::abs(rec2.coeffs[2] - Cplx(1.0)) < 1e-4);
    CHECK(std::abs(rec2.coeffs[0]) < 1e-4);
    CHECK(std::abs(rec2.coeffs[1]) < 1e-4);

    // the zero solution recovers the zero germ
    auto z = zero_solution(0.15, 0.5);
    z.claimed_exponent = 3.0;
    auto rec0 = recover_psi(spec0, z);
    CHECK(rec0.is_zero(1e-12));

    // a non-member diverges: x^2/4 is not attached to any germ here
    auto bad = make_handle([](double, Cplx x) { return x * x / 4.0; }, 0.15, 0.5,
                           "exact-formula", 0.1, 1e-8);
    CHECK_THROWS_AS(recover_psi(spec0, bad), NonMemberError);
}

TEST_CASE("full pipeline composes the base solution and the family") {
    auto spec = quadratic_model_spec(3.0, 1.0);
    HoloGerm psi({0.0, 1.0}, 1.0);
    auto full = solve_full(spec, psi);
    // u = (-xt/2 - t^2/4) + ((x - t) t^3 + t^6/3)
    auto ref = [](double t, Cplx x) {
        return -x * t / 2.0 - t * t / 4.0 +
               (x - t) * std::pow(t, 3) + std::pow(t, 6) / 3.0;
    };
    CHECK(sup_err_vs(full.u, ref, 1e-3, 0.1, 0.2) < 1e-6);

    // round trip through the reduced equation
    auto rec = recover_psi(full.reduced, full.member.u);
    CHECK(std::abs(rec.coeffs[1] - Cplx(1.0)) < 1e-4);

    // residual certification of the sum
    auto grid = make_diag_grid(1e-3, 0.8 * full.u.t_max, 8, 0.15, 6);
    CHECK(residual(spec, full.u, grid).residual_sup <= 1e-6);
}

TEST_CASE("two different initial seeds converge to the same member") {
    // the family solve run twice (deterministic path) plus a perturbed-start
    // run via a different grid resolution must agree within tolerances
    auto spec = quadratic_model_spec(3.0, 1.0);
    auto u0 = solve_u0(spec);
    auto spec0 = reduce_about(spec, u0);
    HoloGerm psi({0.0, 1.0}, 1.0);

    FamilyOptions o1;
    auto f1 = solve_family(spec0, psi, o1);
    FamilyOptions o2;
    o2.picard.nt = 96;
    o2.picard.march_step = 0.02;
    auto f2 = solve_family(spec0, psi, o2);
    CHECK(std::abs(f1.u(0.05, 0.1) - f2.u(0.05, 0.1)) < 2e-8);
}
