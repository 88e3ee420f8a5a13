#pragma once

#include <functional>
#include <string>
#include <vector>

#include "bbpde/common.hpp"

namespace bbpde {

/// Weight function mu(t): increasing, continuous, positive on (0, t_max],
/// with integrable mu(tau)/tau near 0. phi(t) is that integral up to t,
/// computed in sigma = log tau with a geometrically extrapolated tail and
/// cached on a monotone table.
class WeightFn {
  public:
    WeightFn() = default;
    WeightFn(std::function<double(double)> mu, double t_max,
             std::string name = "custom");

    static WeightFn power(double p, double t_max = 1.0);   // mu = t^p
    static WeightFn sqrt(double t_max = 1.0);              // mu = t^(1/2)
    static WeightFn inverse_log_square(double t_max = 0.3);  // mu = 1/(log t)^2

    double mu(double t) const { return mu_(t); }
    /// phi(t) = int_0^t mu(tau)/tau dtau.
    double phi(double t) const;
    double t_max() const { return t_max_; }
    const std::string& name() const { return name_; }
    bool valid() const { return bool(mu_); }

    /// Sampled monotonicity / positivity / mu->0 diagnostics.
    struct Diagnostics {
        bool increasing = true;
        bool positive = true;
        bool vanishes_at_zero = true;
        double tail_ratio = 0.0;  // last dyadic tail-block ratio (< 1 required)
    };
    Diagnostics diagnostics() const { return diag_; }

  private:
    void build_table();

    std::function<double(double)> mu_;
    double t_max_ = 1.0;
    std::string name_;
    // cumulative integral table over uniform sigma cells, deepest cell first
    double sigma_top_ = 0.0;       // log(t_max)
    double sigma_bot_ = 0.0;       // bottom of the resolved cell range
    double cell_ = 0.25;           // sigma cell width
    std::vector<double> cum_;      // cum_[i] = int_{-inf}^{sigma_bot_ + i*cell_}
    double tail_ = 0.0;            // extrapolated integral below sigma_bot_
    Diagnostics diag_;
};

}  // namespace bbpde
