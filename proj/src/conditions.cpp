#include "bbpde/conditions.hpp"

#include <cmath>
#include <limits>

namespace bbpde {

ConditionReport check_conditions(const EquationSpec& spec,
                                 const ConditionOptions& opt) {
    ConditionReport rep;
    const double R = opt.sup_radius_factor * spec.R0;
    const auto ts = log_spaced(opt.t_lo, spec.T0, opt.t_nodes);
    const auto xs = circle_nodes(0.0, R, opt.x_nodes);
    rep.samples_used = opt.t_nodes * opt.x_nodes;

    auto sup_x = [&](const ScalarField& f, double t) {
        double m = 0.0;
        for (Cplx x : xs) m = std::max(m, std::abs(f(t, x)));
        return m;
    };

    // c1: log-log regression of sup_x |a| against t, then A = max ratio.
    {
        std::vector<double> lt, lv;
        double top = 0.0;
        std::vector<double> sups(ts.size());
        for (size_t i = 0; i < ts.size(); ++i) {
            sups[i] = sup_x(spec.a, ts[i]);
            top = std::max(top, sups[i]);
        }
        if (top == 0.0) {
            rep.c1_ok = true;  // vacuous
            rep.mu_exponent = std::numeric_limits<double>::infinity();
            rep.A = 0.0;
        } else {
            for (size_t i = 0; i < ts.size(); ++i)
                if (sups[i] > top * 1e-300) {
                    lt.push_back(std::log(ts[i]));
                    lv.push_back(std::log(sups[i]));
                }
            double icpt;
            linear_fit(lt, lv, rep.mu_exponent, icpt);
            if (rep.mu_exponent > 0) {
                double A = 0.0;
                for (size_t i = 0; i < ts.size(); ++i)
                    A = std::max(A, sups[i] / std::pow(ts[i], rep.mu_exponent));
                rep.A = A;
                rep.c1_ok = true;
                for (size_t i = 0; i < ts.size(); ++i)
                    rep.c1_max_ratio = std::max(
                        rep.c1_max_ratio,
                        sups[i] / (rep.A * std::pow(ts[i], rep.mu_exponent)));
            }
        }
    }

    // A sampled sup always comes out finite, so boundedness failures show up
    // as ratios still growing toward the small-t end of the ladder.
    auto bounded_trend = [&](const std::vector<double>& ratios) {
        const size_t n = ratios.size();
        double low = 0.0, mid = 0.0;
        for (size_t i = 0; i < n / 4; ++i) low = std::max(low, ratios[i]);
        for (size_t i = n / 4; i < n; ++i) mid = std::max(mid, ratios[i]);
        if (low <= 5.0 * mid + 1e-300) return true;
        // growing into the corner and monotone over the last decade: unbounded
        bool monotone = true;
        for (size_t i = 1; i < n / 4; ++i)
            if (ratios[i] > ratios[i - 1] * (1 + 1e-9)) monotone = false;
        return !monotone;
    };

    // c2: Lambda = sup |lambda(t,x) - lambda(0,x)| / mu(t).
    {
        std::vector<Cplx> l0(xs.size());
        for (size_t j = 0; j < xs.size(); ++j) l0[j] = limit_t0(spec.lambda, xs[j]);
        double L = 0.0;
        bool finite = true;
        std::vector<double> ratios(ts.size(), 0.0);  // ts is ascending in t
        for (size_t i = 0; i < ts.size(); ++i) {
            const double m = spec.weight.mu(ts[i]);
            for (size_t j = 0; j < xs.size(); ++j) {
                const double r = std::abs(spec.lambda(ts[i], xs[j]) - l0[j]) / m;
                if (!std::isfinite(r)) finite = false;
                ratios[i] = std::max(ratios[i], r);
                L = std::max(L, r);
            }
        }
        rep.Lambda = L;
        rep.c2_ok = finite && bounded_trend(ratios);
        rep.c2_max_ratio = L;
    }

    // c3: B = sup |b| |log t| / mu(t).
    {
        double B = 0.0;
        bool finite = true;
        std::vector<double> ratios(ts.size(), 0.0);
        for (size_t i = 0; i < ts.size(); ++i) {
            const double w = spec.weight.mu(ts[i]) / std::abs(std::log(ts[i]));
            const double r = sup_x(spec.b, ts[i]) / w;
            if (!std::isfinite(r)) finite = false;
            ratios[i] = r;
            B = std::max(B, r);
        }
        rep.B = B;
        rep.c3_ok = finite && bounded_trend(ratios);
        rep.c3_max_ratio = B;
    }
    return rep;
}

}  // namespace bbpde
