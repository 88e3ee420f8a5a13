// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Every tolerance is pinned here, not configurable.

#include <chrono>
#include <cstdio>
#include <random>
#include <vector>

#include "bbpde/classify.hpp"
#include "bbpde/flow.hpp"
#include "bbpde/linear.hpp"
#include "bbpde/pipeline.hpp"
#include "bbpde/residual.hpp"

using namespace bbpde;

namespace {

int g_failures = 0;
std::chrono::steady_clock::time_point g_start;

double elapsed_s() {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         g_start)
        .count();
}

void report(int criterion, bool pass, const std::string& detail) {
    std::printf("criterion %2d: %s  %s  [t=%.0fs]\n", criterion,
                pass ? "PASS" : "FAIL", detail.c_str(), elapsed_s());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.3g", v);
    return buf;
}

struct NamedHandle {
    std::string name;
    EquationSpec spec;
    SolutionHandle handle;
};
std::vector<NamedHandle> g_handles;  // collected for criterion 2

double sup_rel_err(const SolutionHandle& u, const SolutionHandle& ref,
                   double t_lo, double t_hi, double radius) {
    double diff = 0.0, scale = 0.0;
    for (double t : log_spaced(t_lo, t_hi, 12))
        for (Cplx x : circle_nodes(0.0, radius, 12)) {
            diff = std::max(diff, std::abs(u(t, x) - ref(t, x)));
            scale = std::max(scale, std::abs(ref(t, x)));
        }
    return diff / scale;
}

// --- criterion 1 (and 10): printed closed forms of the benchmark model ----

PicardDiagnostics g_below_threshold_picard;

void criterion_1_and_10() {
    struct Case { double lambda, mu; };
    const Case cases[] = {{3.0, 1.0}, {0.5, 1.0}, {2.0, 1.0}, {1.0, 1.0}};
    double worst = 0.0;
    bool pass = true;
    std::string detail;
    for (const Case c : cases) {
        auto spec = quadratic_model_spec(c.lambda, c.mu);
        auto ref = quadratic_model_base(c.lambda, c.mu);
        SolveDiagnostics diag;
        SolutionHandle u;
        try {
            u = solve_u0(spec, &diag);
        } catch (const std::exception& e) {
            report(1, false, std::string("solve_u0 threw: ") + e.what());
            return;
        }
        const double rel = sup_rel_err(u, ref, 1e-3, 0.2, 0.25);
        worst = std::max(worst, rel);
        if (rel > 1e-6) pass = false;
        detail += "(" + fmt(c.lambda) + "," + fmt(c.mu) + "):" + fmt(rel) + " ";
        g_handles.push_back({"u0(lambda=" + fmt(c.lambda) + ")", spec, u});
        if (c.lambda == 0.5) g_below_threshold_picard = diag.picard;
    }
    report(1, pass, "sup relative error vs printed forms: " + detail +
                        "(tol 1e-6)");

    // criterion 10: contraction ratios of the (0.5, 1) run
    const auto& ratios = g_below_threshold_picard.ratios;
    bool pass10 = true;
    std::string d10 = "ratios:";
    for (size_t i = 0; i < ratios.size(); ++i) {
        d10 += " " + fmt(ratios[i]);
        if (i >= 1 && ratios[i] > 0.9) pass10 = false;
    }
    if (ratios.empty()) d10 = "no ratios recorded (converged immediately)";
    report(10, pass10, d10 + " (tol 0.9 after the second)");
}

// --- criterion 2: residual certification of every emitted handle ---------

void criterion_2() {
    bool pass = true;
    std::string detail;
    for (const auto& nh : g_handles) {
        const bool picard_path =
            nh.handle.provenance == "picard" || nh.handle.tolerance > 1e-8;
        const double thresh = picard_path ? 1e-6 : 1e-8;
        auto grid = default_residual_grid(nh.spec, nh.handle);
        double rs = 0.0;
        try {
            rs = residual(nh.spec, nh.handle, grid).residual_sup;
        } catch (const std::exception& e) {
            pass = false;
            detail += nh.name + ":threw ";
            continue;
        }
        if (rs > thresh) pass = false;
        detail += nh.name + ":" + fmt(rs) + " ";
    }
    report(2, pass, detail + "(exact 1e-8 / picard 1e-6)");
}

// --- criteria 3, 4, 5: the solution family ---------------------------------

EquationSpec g_reduced;  // the a == 0 equation for lambda = 3, mu = 1

void criterion_3() {
    auto spec = quadratic_model_spec(3.0, 1.0);
    auto u0 = solve_u0(spec);
    g_reduced = reduce_about(spec, u0);

    HoloGerm psi({0.0, 1.0}, 1.0);
    auto ser = series_family(3.0, [](double t) { return Cplx(-t); }, psi, 6);
    FamilyMember fam = solve_family(g_reduced, psi);
    double diff = 0.0;
    for (double t : log_spaced(1e-3, 0.1, 10))
        for (Cplx x : circle_nodes(0.0, 0.2, 10))
            diff = std::max(diff, std::abs(fam.u(t, x) - ser.eval(t, x)));

    HoloGerm psic({0.7}, 1.0);
    FamilyMember famc = solve_family(g_reduced, psic);
    double diffc = 0.0;
    for (double t : log_spaced(1e-3, 0.1, 10))
        diffc = std::max(diffc,
                         std::abs(famc.u(t, 0.1) - 0.7 * std::pow(t, 3)));

    const bool pass = diff <= 1e-6 && diffc <= 1e-8;
    report(3, pass, "series vs contraction: psi=x " + fmt(diff) +
                        " (tol 1e-6), psi=const " + fmt(diffc) + " (tol 1e-8)");
    g_handles.push_back({"family(psi=x)", g_reduced, fam.u});

    // criterion 4 uses these members
    bool pass4 = true;
    double last = 0.0;
    for (const FamilyMember* m : {&fam, &famc}) {
        for (size_t i = 1; i < m->limit_error_curve.size(); ++i)
            if (m->limit_error_curve[i].second >
                m->limit_error_curve[i - 1].second * (1 + 1e-12) + 1e-15)
                pass4 = false;
        last = std::max(last, m->limit_error_curve.back().second);
        if (m->limit_error_curve.back().second >= 1e-3) pass4 = false;
    }
    report(4, pass4,
           "data-law curves monotone, final error " + fmt(last) + " (tol 1e-3)");
}

void criterion_5() {
    std::mt19937_64 rng(12345);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    double worst = 0.0;
    bool pass = true;
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<Cplx> coeffs(4);
        for (Cplx& c : coeffs) c = Cplx(u(rng));
        HoloGerm psi(coeffs, 1.0);
        try {
            FamilyMember fam = solve_family(g_reduced, psi);
            HoloGerm rec = recover_psi(g_reduced, fam.u);
            for (size_t k = 0; k < 4; ++k) {
                const Cplx got = k < rec.coeffs.size() ? rec.coeffs[k] : Cplx(0.0);
                worst = std::max(worst, std::abs(got - coeffs[k]));
            }
        } catch (const std::exception& e) {
            pass = false;
            break;
        }
    }
    pass = pass && worst <= 1e-3;
    report(5, pass, "20 random cubic germs, worst coefficient error " +
                        fmt(worst) + " (tol 1e-3)");
}

// --- criterion 6: the scaled double-limit counterexample ------------------

void criterion_6() {
    auto quad = make_handle([](double, Cplx x) { return x * x / 4.0; }, 0.3, 1.0,
                            "exact-formula", 0.0, 1e-8);
    const double v_quad = scaled_sup_limit(quad).value;
    const auto label = classify(quad).class_label;

    auto root = make_handle([](double t, Cplx) { return Cplx(std::sqrt(t)); },
                            0.3, 1.0, "exact-formula", 0.5, 1e-8);
    const double v_root = scaled_sup_limit(root).value;
    auto cube = make_handle([](double, Cplx x) { return x * x * x; }, 0.3, 1.0,
                            "exact-formula", 0.0, 1e-8);
    const double v_cube = scaled_sup_limit(cube).value;

    const bool pass = std::abs(v_quad - 0.25) <= 0.01 &&
                      label == GrowthClass::Outside && v_root <= 1e-3 &&
                      v_cube <= 1e-3;
    report(6, pass, "x^2/4: " + fmt(v_quad) + " (0.25 +- 0.01, " +
                        growth_class_name(label) + "), sqrt(t): " + fmt(v_root) +
                        ", x^3: " + fmt(v_cube) + " (tol 1e-3)");
}

// --- criterion 7: wedge invariance -----------------------------------------

void criterion_7() {
    auto weight = WeightFn::power(1.0, 0.31);
    WedgeDomain W(0.3, 1.0, 0.5, weight, 1.0);
    FlowMap fm{ScalarField([](double t, Cplx) { return Cplx(t); }, 0.35, 5.0)};
    auto rep = invariance_check(fm, W, 1000, 1.0, 12345);
    const bool pass =
        rep.precondition_ok && rep.samples == 1000 && rep.violations == 0;
    report(7, pass, fmt(double(rep.violations)) + " violations in 1000 samples, max level " +
                        fmt(rep.max_level) + " < R = 1");
}

// --- criterion 8: inverse flow ---------------------------------------------

void criterion_8() {
    FlowMap fa{ScalarField([](double t, Cplx) { return Cplx(t); }, 1.0, 5.0)};
    FlowMap fb{ScalarField([](double t, Cplx x) { return t * x; }, 1.0, 5.0)};
    bool pass = true;
    std::string detail;
    try {
        auto r1 = invert_flow(fa, 0.1, 0.0, 0.3, 50, 1e-10);
        const double e1 = std::abs(r1.xi - Cplx(-0.2));
        if (e1 > 1e-9 || r1.iterations > 50) pass = false;
        detail += "b=t: err " + fmt(e1) + " in " + fmt(double(r1.iterations)) +
                  " iters; ";
        auto r2 = invert_flow(fb, 0.1, 0.1, 0.3, 50, 1e-10);
        const double e2 = std::abs(r2.xi - Cplx(0.1 * std::exp(-0.2)));
        if (e2 > 1e-9 || r2.iterations > 50 || r2.observed_ratio >= 1.0)
            pass = false;
        detail += "b=tx: err " + fmt(e2) + ", ratio " + fmt(r2.observed_ratio);
    } catch (const std::exception& e) {
        pass = false;
        detail = std::string("threw: ") + e.what();
    }
    report(8, pass, detail + " (tol 1e-9, ratio < 1)");
}

// --- criterion 9: transported decay bound ----------------------------------

void criterion_9() {
    auto lam = ScalarField::constant(2.0, 0.5, 1.0);
    auto g = ScalarField([](double t, Cplx) { return Cplx(t); }, 0.5, 1.0);
    auto w = solve_backward_cauchy(lam, ScalarField::zero(0.5, 1.0), g,
                                   HoloGerm::zero(0.9), 0.5);
    auto grid = make_diag_grid(1e-3, 0.49, 14, 0.3, 6);
    auto rep = check_decay_bound(w, 0.0, 1.0, 1.0, 2.0, 0.5, lam, grid);
    const bool pass = rep.precondition_ok && rep.violations == 0;
    report(9, pass, fmt(double(rep.violations)) + " violations of |w| <= t on " +
                        fmt(double(rep.nodes)) + " nodes, max slack " +
                        fmt(rep.max_slack));

    EquationSpec spec;
    spec.T0 = 0.5;
    spec.R0 = 1.0;
    spec.weight = WeightFn::power(1.0, 0.5);
    spec.lambda = lam;
    spec.b = ScalarField::zero(0.5, 1.0);
    spec.a = g;
    g_handles.push_back({"backward(lambda=2,g=t)", spec, w});
}

// --- criterion 11: exponent fits -------------------------------------------

void criterion_11() {
    auto u1 = make_handle([](double t, Cplx) { return Cplx(t * t); }, 0.3, 1.0,
                          "exact-formula", 2.0, 1e-8);
    auto u2 = make_handle([](double t, Cplx x) { return t * x; }, 0.3, 1.0,
                          "exact-formula", 1.0, 1e-8);
    auto u3 = make_handle([](double t, Cplx x) { return t * std::log(1.0 / t) * x; },
                          0.3, 1.0, "exact-formula", 1.0, 1e-8);
    const auto f1 = fit_exponent(u1);
    const auto f2 = fit_exponent(u2);
    const auto f3 = fit_exponent(u3);
    const double e1 = std::abs(f1.d_fit - 2.0);
    const double e2 = std::abs(f2.d_fit - 1.0);
    const double e3 = std::abs(f3.d_fit - 1.0);
    const bool pass = e1 <= 0.05 && e2 <= 0.05 && e3 <= 0.05 && f3.log_modified;
    report(11, pass, "t^2: " + fmt(e1) + ", t x: " + fmt(e2) +
                         ", t log(1/t) x: " + fmt(e3) +
                         (f3.log_modified ? " [log-modified]" : " [log missed]") +
                         " (tol 0.05)");
}

}  // namespace

int main() {
    g_start = std::chrono::steady_clock::now();
    std::printf("acceptance suite\n");
    criterion_1_and_10();
    criterion_3();   // also runs criterion 4 and prepares the reduced spec
    criterion_5();
    criterion_2();   // after 1/3/9 have collected handles? see note below
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9();
    criterion_11();
    std::printf("%s (%d failures, %.0fs total)\n",
                g_failures == 0 ? "ALL CRITERIA PASS" : "FAILURES PRESENT",
                g_failures, elapsed_s());
    return g_failures == 0 ? 0 : 1;
}
