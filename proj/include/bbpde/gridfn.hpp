#pragma once

#include <vector>

#include "bbpde/common.hpp"

namespace bbpde {

/// Tensor representation of a function holomorphic in x: per sigma = log t
/// node a row of scaled Taylor coefficients d_k, so that
///   W(t, x) = sum_k d_k(sigma) (x/radius)^k.
/// Rows are uniform in sigma; evaluation interpolates the coefficient vector
/// cubically in sigma and runs Horner in x. Below the lowest row the rows are
/// extrapolated with the fitted decay exponent of the bottom rows.
class GridFunction {
  public:
    GridFunction() = default;
    GridFunction(double sigma_lo, double sigma_hi, int nt, double radius, int nx);

    static GridFunction from_values(
        double sigma_lo, double sigma_hi, int nt, double radius, int nx,
        const std::function<Cplx(double, Cplx)>& f);

    int rows() const { return nt_; }
    int coeffs_per_row() const { return nx_; }
    double sigma_lo() const { return sigma_lo_; }
    double sigma_hi() const { return sigma_hi_; }
    double sigma_of_row(int i) const { return sigma_lo_ + i * dsigma_; }
    double radius() const { return radius_; }

    std::vector<Cplx>& row(int i) { return d_[i]; }
    const std::vector<Cplx>& row(int i) const { return d_[i]; }

    /// Per-row expansion centers (a frame following the drift); rows store
    /// Taylor data in y = x - center(sigma_i).
    void set_centers(std::vector<Cplx> centers);
    Cplx center(int i) const { return centers_.empty() ? Cplx(0.0) : centers_[i]; }

    /// Replace a row by the DFT of values sampled on the grid circle.
    void set_row_from_circle(int i, const std::vector<Cplx>& values);
    /// Values of row i on the grid circle (inverse DFT).
    std::vector<Cplx> row_circle_values(int i) const;

    Cplx eval(double t, Cplx x) const;
    Cplx eval_dx(double t, Cplx x) const;

    /// Sup of |W| over rows and circle nodes.
    double sup_abs() const;
    /// Sup over rows and circle nodes of |a - b|; grids must be congruent.
    static double sup_diff(const GridFunction& a, const GridFunction& b);

    /// Refresh the decay exponent used to extrapolate below sigma_lo.
    void fit_tail_decay();

  private:
    double sigma_lo_ = 0.0, sigma_hi_ = 0.0, dsigma_ = 1.0;
    int nt_ = 0, nx_ = 0;
    double radius_ = 1.0;
    double tail_decay_ = 0.0;  // W(sigma) ~ row0 * exp(tail_decay*(sigma-lo))
    std::vector<std::vector<Cplx>> d_;
    std::vector<Cplx> centers_;  // empty: all centered at 0
};

/// Forward/inverse DFT pair on n equispaced circle samples (direct O(n^2),
/// sizes here are small).
std::vector<Cplx> dft_coeffs(const std::vector<Cplx>& values);
std::vector<Cplx> idft_values(const std::vector<Cplx>& coeffs);

}  // namespace bbpde
