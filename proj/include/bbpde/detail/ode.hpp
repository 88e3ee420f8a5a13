#pragma once

#include <array>
#include <cmath>
#include <functional>

#include "bbpde/common.hpp"

namespace bbpde::detail {

/// Dormand-Prince 5(4) with PI-free step control over a small complex state.
/// The right side is f(s, y, dy); `observer`, when set, is called after each
/// accepted step and may stop the integration by returning false.
template <size_t N>
struct Dopri5 {
    using State = std::array<Cplx, N>;
    using Rhs = std::function<void(double, const State&, State&)>;

    double abs_tol = 1e-12;
    double rel_tol = 1e-12;
    double min_step = 1e-14;
    long max_steps = 2000000;

    // dense step record: (s0, s1, y0, y1) with cubic Hermite reconstruction
    struct Step {
        double s0, s1;
        State y0, y1, f0, f1;
    };

    std::function<bool(double, const State&)> observer;

    /// Integrate from s0 to s1 (either direction). Returns the final state.
    State integrate(const Rhs& rhs, double s0, State y, double s1,
                    std::vector<Step>* dense = nullptr) const {
        static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5,
                                c5 = 8.0 / 9;
        static constexpr double a21 = 1.0 / 5;
        static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
        static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
        static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                                a53 = 64448.0 / 6561, a54 = -212.0 / 729;
        static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                                a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                                a65 = -5103.0 / 18656;
        static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113,
                                b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                                b6 = 11.0 / 84;
        static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695,
                                e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                                e6 = 22.0 / 525, e7 = -1.0 / 40;

        if (s0 == s1) return y;
        const double dir = s1 > s0 ? 1.0 : -1.0;
        double s = s0;
        double h = dir * std::min(0.1, std::abs(s1 - s0));
        State k1, k2, k3, k4, k5, k6, k7, yt, y5;
        rhs(s, y, k1);
        for (long step = 0; step < max_steps; ++step) {
            if (dir * (s + h - s1) > 0) h = s1 - s;
            for (size_t i = 0; i < N; ++i) yt[i] = y[i] + h * a21 * k1[i];
            rhs(s + c2 * h, yt, k2);
            for (size_t i = 0; i < N; ++i)
                yt[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
            rhs(s + c3 * h, yt, k3);
            for (size_t i = 0; i < N; ++i)
                yt[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
            rhs(s + c4 * h, yt, k4);
            for (size_t i = 0; i < N; ++i)
                yt[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] +
                                    a54 * k4[i]);
            rhs(s + c5 * h, yt, k5);
            for (size_t i = 0; i < N; ++i)
                yt[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] +
                                    a64 * k4[i] + a65 * k5[i]);
            rhs(s + h, yt, k6);
            for (size_t i = 0; i < N; ++i)
                y5[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] +
                                    b5 * k5[i] + b6 * k6[i]);
            rhs(s + h, y5, k7);

            double err = 0.0;
            for (size_t i = 0; i < N; ++i) {
                const Cplx e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] +
                                    e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
                const double sc =
                    abs_tol + rel_tol * std::max(std::abs(y[i]), std::abs(y5[i]));
                err = std::max(err, std::abs(e) / sc);
            }
            if (err <= 1.0) {
                if (dense)
                    dense->push_back({s, s + h, y, y5, k1, k7});
                s += h;
                y = y5;
                k1 = k7;  // FSAL
                if (observer && !observer(s, y)) return y;
                if (std::abs(s - s1) <= 1e-15 * (std::abs(s) + std::abs(s1)) ||
                    s == s1)
                    return y;
                if (dir * (s - s1) >= 0) return y;
            }
            const double fac =
                std::clamp(0.9 * std::pow(err > 0 ? err : 1e-10, -0.2), 0.2, 5.0);
            h *= fac;
            if (std::abs(h) < min_step)
                throw StiffnessError("adaptive step size underflow");
        }
        throw StiffnessError("ODE step budget exhausted");
    }

    /// Cubic Hermite evaluation on a dense step record.
    static State interp(const Step& st, double s) {
        const double h = st.s1 - st.s0;
        const double u = (s - st.s0) / h;
        const double h00 = (1 + 2 * u) * (1 - u) * (1 - u);
        const double h10 = u * (1 - u) * (1 - u);
        const double h01 = u * u * (3 - 2 * u);
        const double h11 = u * u * (u - 1);
        State out;
        for (size_t i = 0; i < N; ++i)
            out[i] = h00 * st.y0[i] + h10 * h * st.f0[i] + h01 * st.y1[i] +
                     h11 * h * st.f1[i];
        return out;
    }
};

}  // namespace bbpde::detail
