#include <doctest.h>

#include "bbpde/classify.hpp"
#include "bbpde/field.hpp"
#include "bbpde/solution.hpp"

using namespace bbpde;

namespace {

SolutionHandle from_fn(std::function<Cplx(double, Cplx)> f, double t_max = 0.3,
                       double radius = 1.0) {
    return make_handle(std::move(f), t_max, radius, "exact-formula", 0.0, 1e-8);
}

}  // namespace

TEST_CASE("exponent fits on manufactured inputs") {
    auto u1 = from_fn([](double t, Cplx) { return Cplx(t * t); });
    auto f1 = fit_exponent(u1);
    CHECK(std::abs(f1.d_fit - 2.0) <= 0.05);

    auto u2 = from_fn([](double t, Cplx x) { return t * x; });
    auto f2 = fit_exponent(u2);
    CHECK(std::abs(f2.d_fit - 1.0) <= 0.05);
    CHECK(std::abs(f2.d_fit_derivative - 1.0) <= 0.05);
    CHECK_FALSE(f2.log_modified);

    // t log(1/t) x: the log factor is detected and the clean power reported
    auto u3 = from_fn([](double t, Cplx x) { return t * std::log(1.0 / t) * x; });
    auto f3 = fit_exponent(u3);
    CHECK(std::abs(f3.d_fit - 1.0) <= 0.05);
    CHECK(f3.log_modified);

    // base solution of the benchmark: the x t term dominates the sup
    auto u4 = from_fn([](double t, Cplx x) { return -x * t / 2.0 - t * t / 4.0; });
    auto f4 = fit_exponent(u4);
    CHECK(std::abs(f4.d_fit - 1.0) <= 0.05);

    // identically zero: the sentinel
    auto u0 = from_fn([](double, Cplx) { return Cplx(0.0); });
    auto f0 = fit_exponent(u0);
    CHECK(f0.zero);
    CHECK(std::isinf(f0.d_fit));
}

TEST_CASE("scaled double-limit values") {
    // x^2/4: the counterexample value 1/4
    auto uq = from_fn([](double, Cplx x) { return x * x / 4.0; });
    auto rq = scaled_sup_limit(uq);
    CHECK(std::abs(rq.value - 0.25) <= 0.01);

    // x^3: s_j = rho_j -> 0
    auto uc = from_fn([](double, Cplx x) { return x * x * x; });
    CHECK(scaled_sup_limit(uc).value <= 1e-3);

    // t^{1/2}: the inner limit vanishes for every rho
    auto us = from_fn([](double t, Cplx) { return Cplx(std::sqrt(t)); });
    CHECK(scaled_sup_limit(us).value <= 1e-3);

    // any positive power: 0
    auto up = from_fn([](double t, Cplx) { return Cplx(std::pow(t, 0.3)); });
    CHECK(scaled_sup_limit(up).value <= 1e-3);
}

TEST_CASE("scaled value is homogeneous in the candidate") {
    auto make_scaled = [](double c) {
        return from_fn([c](double, Cplx x) { return c * x * x / 4.0; });
    };
    const double base = scaled_sup_limit(make_scaled(1.0)).value;
    for (double c : {2.0, 10.0}) {
        const double v = scaled_sup_limit(make_scaled(c)).value;
        CHECK(v == doctest::Approx(c * base).epsilon(1e-6));
    }
}

TEST_CASE("classification labels") {
    auto uq = from_fn([](double, Cplx x) { return x * x / 4.0; });
    CHECK(classify(uq).class_label == GrowthClass::Outside);

    auto ud = from_fn([](double t, Cplx x) { return t * (1.0 + 0.3 * x); });
    auto rd = classify(ud);
    CHECK(rd.class_label == GrowthClass::PowerDecay);
    CHECK(std::abs(rd.fit.d_fit - 1.0) <= 0.05);

    auto ul = from_fn([](double t, Cplx x) { return t * std::log(1.0 / t) * x; });
    CHECK(classify(ul).class_label == GrowthClass::PowerLimit);

    auto u0 = from_fn([](double, Cplx) { return Cplx(0.0); });
    CHECK(classify(u0).class_label == GrowthClass::Zero);

    // x^3 solves nothing here but classifies as vanishing-only: no positive
    // power of t bounds it, yet the scaled double limit is 0
    auto uc = from_fn([](double, Cplx x) { return x * x * x; });
    CHECK(classify(uc).class_label == GrowthClass::VanishingOnly);
}

TEST_CASE("manufactured power-decay members fit their exponent") {
    for (double d : {0.5, 1.0, 2.5}) {
        auto u = from_fn([d](double t, Cplx x) {
            return std::pow(t, d) * (1.0 + 0.2 * x + 0.1 * x * x);
        });
        auto fit = fit_exponent(u);
        CHECK(std::abs(fit.d_fit - d) <= 0.05);
    }
}
