#include "bbpde/germ.hpp"

#include <algorithm>

namespace bbpde {

HoloGerm HoloGerm::from_samples(const std::function<Cplx(Cplx)>& f, double rho,
                                int degree, double radius) {
    const int m = std::max(2 * (degree + 1), 8);
    std::vector<Cplx> vals(m);
    for (int i = 0; i < m; ++i) {
        const double th = 2.0 * kPi * i / m;
        vals[i] = f(rho * Cplx(std::cos(th), std::sin(th)));
        if (!is_finite(vals[i]))
            throw Error("germ sampling produced a non-finite value");
    }
    double vmax = 0.0;
    for (const Cplx& v : vals) vmax = std::max(vmax, std::abs(v));
    std::vector<Cplx> c(degree + 1);
    for (int k = 0; k <= degree; ++k) {
        Cplx acc = 0.0;
        for (int i = 0; i < m; ++i) {
            const double th = -2.0 * kPi * k * i / m;
            acc += vals[i] * Cplx(std::cos(th), std::sin(th));
        }
        acc /= double(m);
        // kill coefficients below the sampling noise floor; dividing noise by
        // rho^k would otherwise manufacture spurious high-order terms
        c[k] = std::abs(acc) <= 1e-13 * vmax ? Cplx(0.0)
                                             : acc / std::pow(rho, k);
    }
    HoloGerm g(std::move(c), radius);
    g.trim(1e-300);
    return g;
}

HoloGerm germ_add(const HoloGerm& a, const HoloGerm& b) {
    std::vector<Cplx> c(std::max(a.coeffs.size(), b.coeffs.size()), 0.0);
    for (size_t i = 0; i < a.coeffs.size(); ++i) c[i] += a.coeffs[i];
    for (size_t i = 0; i < b.coeffs.size(); ++i) c[i] += b.coeffs[i];
    return HoloGerm(std::move(c), std::min(a.radius, b.radius));
}

HoloGerm germ_scale(const HoloGerm& a, Cplx s) {
    HoloGerm out = a;
    for (Cplx& c : out.coeffs) c *= s;
    return out;
}

HoloGerm germ_mul(const HoloGerm& a, const HoloGerm& b, int max_degree) {
    if (a.coeffs.empty() || b.coeffs.empty())
        return HoloGerm::zero(std::min(a.radius, b.radius));
    const int deg = std::min<int>(max_degree, a.degree() + b.degree());
    std::vector<Cplx> c(deg + 1, 0.0);
    for (int i = 0; i < int(a.coeffs.size()); ++i) {
        if (i > deg) break;
        for (int j = 0; j < int(b.coeffs.size()) && i + j <= deg; ++j)
            c[i + j] += a.coeffs[i] * b.coeffs[j];
    }
    return HoloGerm(std::move(c), std::min(a.radius, b.radius));
}

HoloGerm germ_div(const HoloGerm& a, const HoloGerm& b, int max_degree) {
    if (b.coeffs.empty() || std::abs(b.coeffs[0]) == 0.0)
        throw Error("germ division by a series vanishing at 0");
    std::vector<Cplx> q(max_degree + 1, 0.0);
    const Cplx b0 = b.coeffs[0];
    for (int k = 0; k <= max_degree; ++k) {
        Cplx acc = k < int(a.coeffs.size()) ? a.coeffs[k] : Cplx(0.0);
        for (int j = 1; j <= k && j < int(b.coeffs.size()); ++j)
            acc -= b.coeffs[j] * q[k - j];
        q[k] = acc / b0;
    }
    HoloGerm out(std::move(q), std::min(a.radius, b.radius));
    out.trim(1e-300);
    return out;
}

bool germ_coefficients_decay(const HoloGerm& g, double* fitted_rate) {
    // Fit log|c_k| against k over the non-negligible coefficients; the series
    // converges on |x| < radius when the fitted rate r satisfies r*radius < 1.
    std::vector<double> ks, ys;
    double top = 0.0;
    for (const Cplx& c : g.coeffs) top = std::max(top, std::abs(c));
    if (top == 0.0) {
        if (fitted_rate) *fitted_rate = 0.0;
        return true;
    }
    for (size_t k = 0; k < g.coeffs.size(); ++k) {
        const double a = std::abs(g.coeffs[k]);
        if (a > top * 1e-14) { ks.push_back(double(k)); ys.push_back(std::log(a)); }
    }
    if (ks.size() < 3) {
        if (fitted_rate) *fitted_rate = 0.0;
        return true;  // polynomial-like, trivially entire
    }
    double slope, icpt;
    linear_fit(ks, ys, slope, icpt);
    const double rate = std::exp(slope);
    if (fitted_rate) *fitted_rate = rate;
    return rate * g.radius < 1.0 + 1e-9;
}

}  // namespace bbpde
