#pragma once

#include "bbpde/solution.hpp"

namespace bbpde {

/// Growth classes near (t,x) = (0,0):
///   PowerDecay(d): max(|u|, |u_x|) <= C t^d,
///   PowerLimit(d): every exponent strictly below d (log-modified decay),
///   VanishingOnly: no positive power fits but the scaled sup vanishes,
///   Outside:       the scaled double-limit functional is positive,
///   Zero:          identically zero sample.
enum class GrowthClass { PowerDecay, PowerLimit, VanishingOnly, Outside, Zero };

const char* growth_class_name(GrowthClass c);

struct ExponentFit {
    double d_fit = 0.0;
    double d_fit_derivative = 0.0;
    bool log_modified = false;      // a |log t| factor rides on the power
    double log_power = 0.0;         // fitted exponent of the |log t| factor
    double fit_residual = 0.0;
    bool zero = false;              // sup-norm underflow: d = +inf sentinel
};

struct ExponentFitOptions {
    int t_nodes = 40;
    double t_lo = 1e-6;
    double t_hi = 0.0;       // <= 0: 0.9 * u.t_max
    double radius = 0.0;     // <= 0: u.x_radius / 2
    int x_nodes = 16;
};

/// Least-squares exponent of log sup_x |u(t,.)| against log t; a second
/// regression with a log|log t| regressor detects log-modified growth and
/// reports the clean power in that case.
ExponentFit fit_exponent(const SolutionHandle& u,
                         const ExponentFitOptions& opt = {});

struct ScaledSupSchedule {
    double rho0 = 0.25;
    int j_lo = 1, j_hi = 8;     // rho_j = rho0 2^{-j}
    double sigma0 = 0.25;       // top of the inner t-scan
    int sigma_steps = 24;       // dyadic scan depth
    double t_floor = 1e-8;
    double stabilization = 0.01;
};

struct ScaledSupReport {
    double value = 0.0;             // outer limit estimate
    bool stabilized = false;
    bool monotone_decreasing = false;
    std::vector<double> s_j;        // per-rho inner limits
};

/// The iterated-limit functional limsup_{rho->0} lim_{sigma->0}
/// (1/rho^2) sup_{(0,sigma) x D_rho} |u|. The sigma scan is nested inside
/// each rho step; a scan decaying geometrically to zero is extrapolated, a
/// scan stabilizing within 1% is accepted as the inner limit.
ScaledSupReport scaled_sup_limit(const SolutionHandle& u,
                                 const ScaledSupSchedule& schedule = {});

struct GrowthReport {
    ExponentFit fit;
    double scaled_sup_value = 0.0;
    GrowthClass class_label = GrowthClass::VanishingOnly;
    ScaledSupSchedule schedule;
    ScaledSupReport scaled;
};

struct ClassifyOptions {
    double d_threshold = 0.05;        // positive-exponent cut
    double outside_threshold = 0.05;  // scaled-sup cut for "outside"
    ScaledSupSchedule schedule;
    ExponentFitOptions fit;
};

GrowthReport classify(const SolutionHandle& u, const ClassifyOptions& opt = {});

}  // namespace bbpde
