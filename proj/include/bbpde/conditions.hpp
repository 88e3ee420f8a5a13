#pragma once

#include "bbpde/field.hpp"

namespace bbpde {

/// Fitted constants for the coefficient growth conditions
///   c1)  |a(t,x)|                <= A t^mu
///   c2)  |lambda(t,x)-lambda(0,x)| <= Lambda mu(t)
///   c3)  |b(t,x)|                <= B mu(t)/|log t|
/// Each flag carries the max observed ratio that justifies it; fitted, not
/// certified.
struct ConditionReport {
    bool c1_ok = false;
    double A = 0.0;
    double mu_exponent = 0.0;   // +inf sentinel when a == 0
    double c1_max_ratio = 0.0;  // sup |a| / (A t^mu)

    bool c2_ok = false;
    double Lambda = 0.0;
    double c2_max_ratio = 0.0;

    bool c3_ok = false;
    double B = 0.0;
    double c3_max_ratio = 0.0;

    int samples_used = 0;

    bool all_ok() const { return c1_ok && c2_ok && c3_ok; }
};

struct ConditionOptions {
    int t_nodes = 40;
    int x_nodes = 16;
    double t_lo = 1e-6;
    double sup_radius_factor = 0.98;  // circle radius as a fraction of R0
};

ConditionReport check_conditions(const EquationSpec& spec,
                                 const ConditionOptions& opt = {});

}  // namespace bbpde
