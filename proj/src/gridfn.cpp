#include "bbpde/gridfn.hpp"

#include <algorithm>
#include <cmath>

namespace bbpde {

std::vector<Cplx> dft_coeffs(const std::vector<Cplx>& values) {
    const int n = int(values.size());
    std::vector<Cplx> c(n, 0.0);
    for (int k = 0; k < n; ++k) {
        Cplx acc = 0.0;
        for (int j = 0; j < n; ++j) {
            const double th = -2.0 * kPi * k * j / n;
            acc += values[j] * Cplx(std::cos(th), std::sin(th));
        }
        c[k] = acc / double(n);
    }
    return c;
}

std::vector<Cplx> idft_values(const std::vector<Cplx>& coeffs) {
    const int n = int(coeffs.size());
    std::vector<Cplx> v(n, 0.0);
    for (int j = 0; j < n; ++j) {
        Cplx acc = 0.0;
        for (int k = 0; k < n; ++k) {
            const double th = 2.0 * kPi * k * j / n;
            acc += coeffs[k] * Cplx(std::cos(th), std::sin(th));
        }
        v[j] = acc;
    }
    return v;
}

GridFunction::GridFunction(double sigma_lo, double sigma_hi, int nt,
                           double radius, int nx)
    : sigma_lo_(sigma_lo),
      sigma_hi_(sigma_hi),
      dsigma_((sigma_hi - sigma_lo) / (nt - 1)),
      nt_(nt),
      nx_(nx),
      radius_(radius),
      d_(nt, std::vector<Cplx>(nx, 0.0)) {}

GridFunction GridFunction::from_values(
    double sigma_lo, double sigma_hi, int nt, double radius, int nx,
    const std::function<Cplx(double, Cplx)>& f) {
    GridFunction g(sigma_lo, sigma_hi, nt, radius, nx);
    std::vector<Cplx> vals(nx);
    for (int i = 0; i < nt; ++i) {
        const double t = std::exp(g.sigma_of_row(i));
        for (int j = 0; j < nx; ++j) {
            const double th = 2.0 * kPi * j / nx;
            vals[j] = f(t, radius * Cplx(std::cos(th), std::sin(th)));
        }
        g.set_row_from_circle(i, vals);
    }
    g.fit_tail_decay();
    return g;
}

void GridFunction::set_row_from_circle(int i, const std::vector<Cplx>& values) {
    d_[i] = dft_coeffs(values);
    double vmax = 0.0;
    for (const Cplx& v : values) vmax = std::max(vmax, std::abs(v));
    // sampling noise in high coefficients explodes under off-circle
    // evaluation and under drift cascades; keep signal only
    for (Cplx& c : d_[i])
        if (std::abs(c) <= 1e-14 * vmax) c = 0.0;
}

std::vector<Cplx> GridFunction::row_circle_values(int i) const {
    return idft_values(d_[i]);
}

void GridFunction::fit_tail_decay() {
    auto rownorm = [this](int i) {
        double s = 0.0;
        for (const Cplx& c : d_[i]) s += std::abs(c);
        return s;
    };
    const double n0 = rownorm(0), n1 = rownorm(std::min(2, nt_ - 1));
    if (n0 > 1e-300 && n1 > 1e-300 && n1 > n0)
        tail_decay_ = std::log(n1 / n0) /
                      (sigma_of_row(std::min(2, nt_ - 1)) - sigma_of_row(0));
    else
        tail_decay_ = 0.0;
    tail_decay_ = std::clamp(tail_decay_, 0.0, 50.0);
}

void GridFunction::set_centers(std::vector<Cplx> centers) {
    centers_ = std::move(centers);
}

namespace {
inline Cplx horner(const std::vector<Cplx>& r, Cplx z, int lo = 0) {
    Cplx acc = 0.0;
    for (int k = int(r.size()) - 1; k >= lo; --k) acc = acc * z + r[k];
    return acc;
}
inline Cplx horner_dx(const std::vector<Cplx>& r, Cplx z) {
    Cplx acc = 0.0;
    for (int k = int(r.size()) - 1; k >= 1; --k) acc = acc * z + double(k) * r[k];
    return acc;
}
}  // namespace

// Rows may carry different expansion centers, so sigma-interpolation blends
// row VALUES at the query point, not coefficients.
Cplx GridFunction::eval(double t, Cplx x) const {
    const double sigma = std::log(t);
    if (sigma <= sigma_lo_) {
        const double f = std::exp(tail_decay_ * (sigma - sigma_lo_));
        return horner(d_[0], (x - center(0)) / radius_) * f;
    }
    if (sigma >= sigma_hi_)
        return horner(d_[nt_ - 1], (x - center(nt_ - 1)) / radius_);
    int i1 = std::clamp(int((sigma - sigma_lo_) / dsigma_), 1, nt_ - 3);
    const double u = (sigma - sigma_of_row(i1)) / dsigma_;
    const double w0 = -u * (u - 1) * (u - 2) / 6.0;
    const double w1 = (u + 1) * (u - 1) * (u - 2) / 2.0;
    const double w2 = -(u + 1) * u * (u - 2) / 2.0;
    const double w3 = (u + 1) * u * (u - 1) / 6.0;
    return w0 * horner(d_[i1 - 1], (x - center(i1 - 1)) / radius_) +
           w1 * horner(d_[i1], (x - center(i1)) / radius_) +
           w2 * horner(d_[i1 + 1], (x - center(i1 + 1)) / radius_) +
           w3 * horner(d_[i1 + 2], (x - center(i1 + 2)) / radius_);
}

Cplx GridFunction::eval_dx(double t, Cplx x) const {
    const double sigma = std::log(t);
    if (sigma <= sigma_lo_) {
        const double f = std::exp(tail_decay_ * (sigma - sigma_lo_));
        return horner_dx(d_[0], (x - center(0)) / radius_) * f / radius_;
    }
    if (sigma >= sigma_hi_)
        return horner_dx(d_[nt_ - 1], (x - center(nt_ - 1)) / radius_) / radius_;
    int i1 = std::clamp(int((sigma - sigma_lo_) / dsigma_), 1, nt_ - 3);
    const double u = (sigma - sigma_of_row(i1)) / dsigma_;
    const double w0 = -u * (u - 1) * (u - 2) / 6.0;
    const double w1 = (u + 1) * (u - 1) * (u - 2) / 2.0;
    const double w2 = -(u + 1) * u * (u - 2) / 2.0;
    const double w3 = (u + 1) * u * (u - 1) / 6.0;
    return (w0 * horner_dx(d_[i1 - 1], (x - center(i1 - 1)) / radius_) +
            w1 * horner_dx(d_[i1], (x - center(i1)) / radius_) +
            w2 * horner_dx(d_[i1 + 1], (x - center(i1 + 1)) / radius_) +
            w3 * horner_dx(d_[i1 + 2], (x - center(i1 + 2)) / radius_)) /
           radius_;
}

double GridFunction::sup_abs() const {
    double m = 0.0;
    for (int i = 0; i < nt_; ++i)
        for (const Cplx& v : row_circle_values(i)) m = std::max(m, std::abs(v));
    return m;
}

double GridFunction::sup_diff(const GridFunction& a, const GridFunction& b) {
    double m = 0.0;
    for (int i = 0; i < a.nt_; ++i) {
        const auto va = a.row_circle_values(i), vb = b.row_circle_values(i);
        for (size_t j = 0; j < va.size(); ++j)
            m = std::max(m, std::abs(va[j] - vb[j]));
    }
    return m;
}

}  // namespace bbpde
