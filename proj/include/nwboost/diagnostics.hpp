#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <utility>
#include <vector>

#include "nwboost/smoother.hpp"

namespace nwboost {

//! Real-valued function sampled on an ascending grid, with per-point
//! validity flags.
struct GridFunction {
  Eigen::VectorXd grid;
  Eigen::VectorXd values;
  std::vector<std::uint8_t> valid;

  static GridFunction make(Eigen::VectorXd grid, Eigen::VectorXd values,
                           std::vector<std::uint8_t> valid = {});
  int size() const { return static_cast<int>(grid.size()); }
  //! Two-column CSV (x,value) with a "# mask:" comment line when any point
  //! is invalid.
  void write_csv(const std::filesystem::path& path) const;
};

//! Exact conditional bias of the boosted estimate given the design:
//! sum_j w-hat_j(x) m(X_j) - m(x). No noise enters.
GridFunction conditional_bias(const WeightProfile& profile,
                              const std::function<double(double)>& m_true);

//! Exact conditional variance given the design: sum_j w-hat_j(x)^2 s2(X_j).
GridFunction conditional_variance(const WeightProfile& profile,
                                  const std::function<double(double)>& sigma2);

//! Composite trapezoid over the valid points. Segments touching an invalid
//! point contribute nothing (interior gaps are skipped, not bridged).
//! Throws if fewer than 2 points are valid.
double trapezoid_integral(const GridFunction& f);

struct RateEstimate {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::vector<std::pair<double, double>> points;  // (log h, log value)
};

//! Least-squares slope of log(value) against log(h) over pairs whose h lies
//! inside [window.first, window.second]. Needs >= 4 such pairs, all with
//! positive values.
RateEstimate rate_estimate(const std::vector<std::pair<double, double>>& metric_by_h,
                           std::pair<double, double> window);

}  // namespace nwboost
