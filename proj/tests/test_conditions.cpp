#include <doctest.h>

#include "bbpde/conditions.hpp"
#include "bbpde/series.hpp"

using namespace bbpde;

TEST_CASE("c1 fit recovers the power of a") {
    // a = x t on D_1: sup_x |a| ~ t, so A ~ 1 and mu ~ 1
    auto spec = quadratic_model_spec(3.0, 1.0);
    auto rep = check_conditions(spec);
    CHECK(rep.c1_ok);
    CHECK(rep.mu_exponent == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(rep.A == doctest::Approx(1.0).epsilon(0.05));
    CHECK(rep.c2_ok);
    CHECK(rep.Lambda == doctest::Approx(0.0));  // constant lambda
    CHECK(rep.c3_ok);
    CHECK(rep.B == doctest::Approx(0.0));  // b == 0
}

TEST_CASE("degenerate a == 0 gives the +inf sentinel") {
    auto spec = quadratic_model_spec(3.0, 1.0);
    spec.a = ScalarField::zero(spec.T0, spec.R0);
    auto rep = check_conditions(spec);
    CHECK(rep.c1_ok);
    CHECK(std::isinf(rep.mu_exponent));
}

TEST_CASE("c3 bound for b = t under the sqrt weight") {
    // sup over (0, T0] of sqrt(t) |log t| is attained at t = e^{-2}
    EquationSpec spec;
    spec.T0 = 0.3;
    spec.R0 = 1.0;
    spec.weight = WeightFn::sqrt(0.3);
    spec.a = ScalarField([](double t, Cplx x) { return x * t; }, 0.3, 1.0);
    spec.lambda = ScalarField::constant(3.0, 0.3, 1.0);
    spec.b = ScalarField([](double t, Cplx) { return Cplx(t); }, 0.3, 1.0);
    auto rep = check_conditions(spec);
    CHECK(rep.c3_ok);
    CHECK(rep.B == doctest::Approx(2.0 / std::exp(1.0)).epsilon(1e-3));
}

TEST_CASE("an unbounded c3 ratio is flagged") {
    // b = const != 0 forces |b| |log t| / mu(t) -> infinity
    EquationSpec spec;
    spec.T0 = 0.3;
    spec.R0 = 1.0;
    spec.weight = WeightFn::power(1.0, 0.3);
    spec.a = ScalarField([](double t, Cplx x) { return x * t; }, 0.3, 1.0);
    spec.lambda = ScalarField::constant(3.0, 0.3, 1.0);
    spec.b = ScalarField::constant(0.05, 0.3, 1.0);
    auto rep = check_conditions(spec);
    CHECK_FALSE(rep.c3_ok);
}

TEST_CASE("c2 tracks the t-variation of lambda against the weight") {
    EquationSpec spec;
    spec.T0 = 0.3;
    spec.R0 = 1.0;
    spec.weight = WeightFn::power(1.0, 0.3);
    spec.a = ScalarField([](double t, Cplx x) { return x * t; }, 0.3, 1.0);
    spec.lambda =
        ScalarField([](double t, Cplx) { return Cplx(3.0 + 0.5 * t); }, 0.3, 1.0);
    spec.b = ScalarField::zero(0.3, 1.0);
    auto rep = check_conditions(spec);
    CHECK(rep.c2_ok);
    CHECK(rep.Lambda == doctest::Approx(0.5).epsilon(1e-6));
}
