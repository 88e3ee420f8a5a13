#include "bbpde/classify.hpp"

#include <algorithm>
#include <cmath>

#include "bbpde/common.hpp"

namespace bbpde {

const char* growth_class_name(GrowthClass c) {
    switch (c) {
        case GrowthClass::PowerDecay: return "power_decay";
        case GrowthClass::PowerLimit: return "power_limit";
        case GrowthClass::VanishingOnly: return "vanishing_only";
        case GrowthClass::Outside: return "outside";
        case GrowthClass::Zero: return "zero";
    }
    return "?";
}

namespace {

// 3-parameter least squares y = d*lt + e*llt + c
void fit3(const std::vector<double>& lt, const std::vector<double>& llt,
          const std::vector<double>& y, double& dcoef, double& ecoef,
          double& resid) {
    double S[3][3] = {}, b[3] = {};
    for (size_t i = 0; i < y.size(); ++i) {
        const double row[3] = {lt[i], llt[i], 1.0};
        for (int r = 0; r < 3; ++r) {
            b[r] += row[r] * y[i];
            for (int c = 0; c < 3; ++c) S[r][c] += row[r] * row[c];
        }
    }
    double A[3][4] = {{S[0][0], S[0][1], S[0][2], b[0]},
                      {S[1][0], S[1][1], S[1][2], b[1]},
                      {S[2][0], S[2][1], S[2][2], b[2]}};
    for (int col = 0; col < 3; ++col) {
        int piv = col;
        for (int r = col + 1; r < 3; ++r)
            if (std::abs(A[r][col]) > std::abs(A[piv][col])) piv = r;
        std::swap(A[piv], A[col]);
        for (int r = 0; r < 3; ++r) {
            if (r == col) continue;
            const double f = A[r][col] / A[col][col];
            for (int c = col; c < 4; ++c) A[r][c] -= f * A[col][c];
        }
    }
    dcoef = A[0][3] / A[0][0];
    ecoef = A[1][3] / A[1][1];
    const double ccoef = A[2][3] / A[2][2];
    resid = 0.0;
    for (size_t i = 0; i < y.size(); ++i) {
        const double p = dcoef * lt[i] + ecoef * llt[i] + ccoef;
        resid = std::max(resid, std::abs(y[i] - p));
    }
}

struct SupSeries {
    std::vector<double> lt, llt, y;
    double top = 0.0;
};

SupSeries sup_series(const std::function<Cplx(double, Cplx)>& f, double t_lo,
                     double t_hi, int nt, double radius, int nx) {
    SupSeries s;
    for (double t : log_spaced(t_lo, t_hi, nt)) {
        double sup = 0.0;
        for (Cplx x : circle_nodes(0.0, radius, nx))
            sup = std::max(sup, std::abs(f(t, x)));
        s.top = std::max(s.top, sup);
        if (sup > 0) {
            s.lt.push_back(std::log(t));
            s.llt.push_back(std::log(std::abs(std::log(t))));
            s.y.push_back(std::log(sup));
        }
    }
    return s;
}

void fit_one(const SupSeries& s, double& d, bool& log_modified, double& log_pow,
             double& resid) {
    if (s.y.size() < 6) {
        d = std::numeric_limits<double>::infinity();
        return;
    }
    double d2, c2, d3, e3, r3;
    linear_fit(s.lt, s.y, d2, c2);
    double r2 = 0.0;
    for (size_t i = 0; i < s.y.size(); ++i)
        r2 = std::max(r2, std::abs(s.y[i] - (d2 * s.lt[i] + c2)));
    fit3(s.lt, s.llt, s.y, d3, e3, r3);
    // prefer the log-aware fit when it wins clearly and needs a real log factor
    if (std::abs(e3) > 0.3 && r3 < 0.5 * r2) {
        d = d3;
        log_modified = true;
        log_pow = e3;
        resid = r3;
    } else {
        d = d2;
        log_modified = false;
        log_pow = 0.0;
        resid = r2;
    }
}

}  // namespace

ExponentFit fit_exponent(const SolutionHandle& u, const ExponentFitOptions& opt) {
    ExponentFit fit;
    const double t_hi = opt.t_hi > 0 ? opt.t_hi : 0.9 * u.t_max;
    const double radius = opt.radius > 0 ? opt.radius : 0.5 * u.x_radius;

    SupSeries su = sup_series(u.eval, opt.t_lo, t_hi, opt.t_nodes, radius,
                              opt.x_nodes);
    if (su.top == 0.0) {
        fit.zero = true;
        fit.d_fit = std::numeric_limits<double>::infinity();
        fit.d_fit_derivative = std::numeric_limits<double>::infinity();
        return fit;
    }
    fit_one(su, fit.d_fit, fit.log_modified, fit.log_power, fit.fit_residual);

    SupSeries sd = sup_series([&u](double t, Cplx x) { return u.dx(t, x); },
                              opt.t_lo, t_hi, opt.t_nodes, radius, opt.x_nodes);
    if (sd.top == 0.0) {
        fit.d_fit_derivative = std::numeric_limits<double>::infinity();
    } else {
        bool lm;
        double lp, rs;
        fit_one(sd, fit.d_fit_derivative, lm, lp, rs);
        fit.log_modified = fit.log_modified || lm;
    }
    return fit;
}

ScaledSupReport scaled_sup_limit(const SolutionHandle& u,
                                 const ScaledSupSchedule& sch) {
    ScaledSupReport rep;
    const double rho_cap = 0.9 * u.x_radius;

    for (int j = sch.j_lo; j <= sch.j_hi; ++j) {
        const double rho = std::min(sch.rho0 * std::pow(2.0, -j), rho_cap);
        // inner scan: s(sigma) = (1/rho^2) sup_{t<=sigma, |x|<rho} |u|,
        // sigma halving until stabilization or geometric decay to 0
        std::vector<double> scan;
        double running = 0.0;
        double sigma = std::min<double>(sch.sigma0, 0.9 * u.t_max);
        // accumulate sup over (sigma_{m+1}, sigma_m] slabs going down, so the
        // sup over (0, sigma_m] is the running max from below
        std::vector<double> slab;
        std::vector<double> sigmas;
        for (int m = 0; m <= sch.sigma_steps; ++m) {
            sigmas.push_back(sigma);
            double s = 0.0;
            for (double t : {sigma, 0.75 * sigma, 0.56 * sigma}) {
                if (t < sch.t_floor) break;
                for (Cplx x : circle_nodes(0.0, 0.999 * rho, 12))
                    s = std::max(s, std::abs(u(t, x)));
            }
            slab.push_back(s);
            sigma *= 0.5;
            if (sigma < sch.t_floor) break;
        }
        // sup over (0, sigma_m] = max of slabs m..end
        scan.assign(slab.size(), 0.0);
        for (int m = int(slab.size()) - 1; m >= 0; --m) {
            running = std::max(m + 1 < int(slab.size()) ? scan[m + 1] : 0.0,
                               slab[m]);
            scan[m] = running;
        }
        for (double& v : scan) v /= rho * rho;

        // inner limit: last value if the tail stabilized within 1 percent,
        // else extrapolate a geometric decay toward its limit
        double inner = scan.back();
        const size_t M = scan.size();
        if (M >= 3) {
            const double v1 = scan[M - 3], v2 = scan[M - 2], v3 = scan[M - 1];
            const double scale = std::max({v1, v2, v3, 1e-300});
            if (std::abs(v3 - v2) <= sch.stabilization * scale) {
                inner = v3;
            } else {
                const double d1 = v2 - v1, d2 = v3 - v2;
                if (std::abs(d2) < std::abs(d1)) {
                    const double q = d2 / d1;
                    inner = v3 + d2 * q / (1.0 - q);  // geometric tail
                    if (inner < 0) inner = 0.0;
                }
            }
        }
        rep.s_j.push_back(inner);
    }

    // outer limsup estimate: stabilized tail value, or the extrapolated limit
    // of a decaying sequence
    const auto& s = rep.s_j;
    rep.monotone_decreasing = true;
    for (size_t j = 1; j < s.size(); ++j)
        if (s[j] > s[j - 1] * (1.0 + 1e-9) + 1e-12) rep.monotone_decreasing = false;
    const size_t M = s.size();
    if (M >= 3) {
        const double v1 = s[M - 3], v2 = s[M - 2], v3 = s[M - 1];
        const double scale = std::max({v1, v2, v3, 1e-300});
        if (std::abs(v3 - v2) <= sch.stabilization * scale &&
            std::abs(v2 - v1) <= 2 * sch.stabilization * scale) {
            rep.value = v3;
            rep.stabilized = true;
        } else {
            const double d1 = v2 - v1, d2 = v3 - v2;
            if (std::abs(d2) < 0.75 * std::abs(d1) + 1e-300) {
                const double q = std::abs(d1) > 0 ? d2 / d1 : 0.0;
                rep.value = std::max(0.0, v3 + d2 * q / (1.0 - q));
                rep.stabilized = true;
            } else {
                rep.value = v3;  // indeterminate: reported, not thrown
                rep.stabilized = false;
            }
        }
    } else if (!s.empty()) {
        rep.value = s.back();
    }
    return rep;
}

GrowthReport classify(const SolutionHandle& u, const ClassifyOptions& opt) {
    GrowthReport rep;
    rep.schedule = opt.schedule;
    rep.fit = fit_exponent(u, opt.fit);
    rep.scaled = scaled_sup_limit(u, opt.schedule);
    rep.scaled_sup_value = rep.scaled.value;

    if (rep.fit.zero) {
        rep.class_label = GrowthClass::Zero;
        return rep;
    }
    if (rep.scaled_sup_value > opt.outside_threshold) {
        rep.class_label = GrowthClass::Outside;
        return rep;
    }
    const double d = std::min(rep.fit.d_fit, rep.fit.d_fit_derivative);
    if (d > opt.d_threshold)
        rep.class_label = rep.fit.log_modified ? GrowthClass::PowerLimit
                                               : GrowthClass::PowerDecay;
    else
        rep.class_label = GrowthClass::VanishingOnly;
    return rep;
}

}  // namespace bbpde
