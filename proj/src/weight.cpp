#include "bbpde/weight.hpp"

#include <cmath>

namespace bbpde {

namespace {

// Adaptive Simpson in sigma for int mu(e^s) ds on [a, b].
double simpson(const std::function<double(double)>& g, double a, double b,
               double fa, double fm, double fb, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = g(lm), frm = g(rm);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return simpson(g, a, m, fa, flm, fm, tol / 2, depth - 1) +
           simpson(g, m, b, fm, frm, fb, tol / 2, depth - 1);
}

double integrate_cell(const std::function<double(double)>& g, double a, double b,
                      double tol) {
    const double fa = g(a), fb = g(b), fm = g(0.5 * (a + b));
    if (!std::isfinite(fa) || !std::isfinite(fb) || !std::isfinite(fm))
        throw NonIntegrableWeightError("weight evaluation is non-finite");
    return simpson(g, a, b, fa, fm, fb, tol, 40);
}

}  // namespace

WeightFn::WeightFn(std::function<double(double)> mu, double t_max,
                   std::string name)
    : mu_(std::move(mu)), t_max_(t_max), name_(std::move(name)) {
    build_table();
}

WeightFn WeightFn::power(double p, double t_max) {
    if (p <= 0) throw NonIntegrableWeightError("power weight needs p > 0");
    return WeightFn([p](double t) { return std::pow(t, p); }, t_max,
                    "power(" + std::to_string(p) + ")");
}

WeightFn WeightFn::sqrt(double t_max) { return power(0.5, t_max); }

WeightFn WeightFn::inverse_log_square(double t_max) {
    if (t_max >= 1.0) throw ConfigurationError("inverse-log-square needs t_max < 1");
    return WeightFn([](double t) { const double l = std::log(t); return 1.0 / (l * l); },
                    t_max, "inverse-log-square");
}

void WeightFn::build_table() {
    const auto g = [this](double s) { return mu_(std::exp(s)); };

    // sampled structural checks
    {
        auto ts = log_spaced(1e-10, t_max_, 60);
        double prev = -1.0;
        for (double t : ts) {
            const double m = mu_(t);
            if (!(m > 0)) diag_.positive = false;
            if (prev >= 0 && m < prev * (1.0 - 1e-12)) diag_.increasing = false;
            prev = m;
        }
        if (mu_(1e-12) > 1e-3 * mu_(t_max_) + 1e-12) diag_.vanishes_at_zero = false;
    }

    sigma_top_ = std::log(t_max_);
    const int resolved_cells = 120;  // down to t_max * e^{-30}
    sigma_bot_ = sigma_top_ - resolved_cells * cell_;
    cum_.assign(resolved_cells + 1, 0.0);
    std::vector<double> cellint(resolved_cells);
    for (int i = 0; i < resolved_cells; ++i) {
        const double a = sigma_bot_ + i * cell_;
        cellint[i] = integrate_cell(g, a, a + cell_, 1e-14);
    }

    // Tail below sigma_bot_: substitute s = -e^w so the integral becomes
    // int mu(exp(-e^w)) e^w dw over [log(-sigma_bot_), inf), which decays at
    // least geometrically for any admissible weight. Sum unit blocks in w and
    // extrapolate the remainder from the last block ratio.
    const auto gw = [this](double w) {
        const double s = -std::exp(w);
        return mu_(std::exp(s)) * std::exp(w);
    };
    const double w0 = std::log(-sigma_bot_);
    // exp(s) underflows below s ~ -700; stop the block ladder before that and
    // close the remainder geometrically (exact for log-power weights, whose
    // blocks are exactly geometric in w)
    const double w_cap = std::log(700.0) - 1.0;
    double tail = 0.0, last_block = -1.0, ratio = 0.0;
    for (int b = 0; b < 60; ++b) {
        if (w0 + b + 1.0 > w_cap && b >= 2) break;
        const double block = integrate_cell(gw, w0 + b, w0 + b + 1.0, 1e-15);
        tail += block;
        if (last_block > 0) {
            ratio = block / last_block;
            if (b >= 3 && ratio >= 0.97)
                throw NonIntegrableWeightError(
                    "weight tail fails to converge under refinement");
        }
        last_block = block;
        if (block < 1e-16) break;
    }
    if (last_block > 0 && ratio > 0 && ratio < 0.97)
        tail += last_block * ratio / (1.0 - ratio);
    diag_.tail_ratio = ratio;
    tail_ = tail;

    cum_[0] = tail_;
    for (int i = 0; i < resolved_cells; ++i) cum_[i + 1] = cum_[i] + cellint[i];
}

double WeightFn::phi(double t) const {
    if (!(t > 0) || t > t_max_ * (1.0 + 1e-12))
        throw DomainError("phi: t outside (0, t_max]");
    const double s = std::log(std::min(t, t_max_));
    if (s <= sigma_bot_) {
        // below the resolved range: integrate the w-substituted tail directly
        const auto gw = [this](double w) {
            const double ss = -std::exp(w);
            return mu_(std::exp(ss)) * std::exp(w);
        };
        const double w_cap = std::log(700.0) - 1.0;
        double v = 0.0, last = -1.0, ratio = 0.0;
        const double w0 = std::log(-s);
        for (int b = 0; b < 60; ++b) {
            if (w0 + b + 1.0 > w_cap && b >= 2) break;
            const double block = integrate_cell(gw, w0 + b, w0 + b + 1.0, 1e-15);
            v += block;
            if (last > 0) ratio = block / last;
            last = block;
            if (block < 1e-17) break;
        }
        if (last > 0 && ratio > 0 && ratio < 0.97)
            v += last * ratio / (1.0 - ratio);
        return v;
    }
    const int i = std::min<int>(int((s - sigma_bot_) / cell_), int(cum_.size()) - 2);
    const double a = sigma_bot_ + i * cell_;
    const auto g = [this](double ss) { return mu_(std::exp(ss)); };
    return cum_[i] + (s > a ? integrate_cell(g, a, s, 1e-14) : 0.0);
}

}  // namespace bbpde
