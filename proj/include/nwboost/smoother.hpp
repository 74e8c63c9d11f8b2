#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "nwboost/kernels.hpp"

namespace nwboost {

//! Guards only exact underflow of the weight denominator. The signed-kernel
//! comparator deliberately uses no guard at all (see signed_ratio_fit).
inline constexpr double kDefaultDenomFloor = 1e-300;

//! Paired covariate/response observations; covariates live on [0, 1].
struct Sample {
  Eigen::VectorXd x;
  Eigen::VectorXd y;
  std::vector<int> sorted_idx;  // indices of x in ascending order

  static Sample make(Eigen::VectorXd x, Eigen::VectorXd y);
  int n() const { return static_cast<int>(x.size()); }
};

struct FitConfig {
  double h = 0.1;
  int r = 0;  // boosting iterations; r = 0 is the plain Nadaraya-Watson fit
  KernelSpec kernel = KernelSpec::gaussian();
  double denom_floor = kDefaultDenomFloor;
  int max_r = 16;

  void validate() const;
};

//! Nadaraya-Watson weights at a single evaluation point. `empty` marks an
//! evaluation point with no kernel mass (weights are zeroed, not NaN).
struct WeightRow {
  Eigen::VectorXd w;
  bool empty = false;
};

WeightRow nw_weights(const Eigen::VectorXd& design_x, double x, double h,
                     const KernelSpec& k, double denom_floor = kDefaultDenomFloor);

//! S(i, j) = w_j(X_i); each valid row sums to 1.
struct SmootherMatrix {
  Eigen::MatrixXd S;
  std::vector<std::uint8_t> row_ok;

  bool all_ok() const;
};

SmootherMatrix smoother_matrix(const Eigen::VectorXd& design_x, double h,
                               const KernelSpec& k,
                               double denom_floor = kDefaultDenomFloor);

//! Fitted values and residuals at the design points for every boosting stage
//! 0..r. Row k of `fitted` is m-hat_k(X); residuals[k] = y - fitted[k].
struct BoostFit {
  FitConfig config;
  Eigen::MatrixXd fitted;     // (r+1) x n
  Eigen::MatrixXd residuals;  // (r+1) x n
  std::vector<std::uint8_t> ok;  // per design point
};

//! L2 boosting with the Nadaraya-Watson learner: fit, then repeatedly smooth
//! the residuals and add the smooth to the fit.
BoostFit fit_boosted(const Sample& sample, const FitConfig& cfg);

//! Exact linear representation of the boosted estimate on an evaluation
//! grid: W(k, j) = w-hat_j(eval_x[k]) after `r` weight updates.
struct WeightProfile {
  Eigen::VectorXd eval_x;
  Eigen::VectorXd design_x;
  Eigen::MatrixXd W;  // m x n
  std::vector<std::uint8_t> row_ok;
  int r = 0;
};

//! Applies the weight update
//!   w-hat_j(x) = w_j(x) + wtilde_j(x) - sum_i w_i(x) wtilde_j(X_i)
//! r times starting from wtilde = w. Every valid row sums to 1.
WeightProfile boosted_weights(const Eigen::VectorXd& design_x,
                              const Eigen::VectorXd& eval_x, double h,
                              const KernelSpec& k, int r,
                              double denom_floor = kDefaultDenomFloor);

//! W * y. Throws on a column/length mismatch.
Eigen::VectorXd predict(const WeightProfile& profile, const Eigen::VectorXd& y);

enum class PointFlag : std::uint8_t {
  Ok = 0,
  Unstable = 1,  // near-zero or negative denominator; raw value kept
  Invalid = 2,   // exact-zero denominator or non-finite value
};

struct RatioFit {
  Eigen::VectorXd values;
  std::vector<PointFlag> flags;
};

//! Raw Nadaraya-Watson ratio with an arbitrary (possibly signed) kernel and
//! NO denominator guard; reproducing the signed-denominator instability is
//! the point. A point is flagged Unstable when its denominator falls below
//! 5% of the reference denominator computed with the nonnegative base
//! kernel, and Invalid when the denominator is exactly zero or the value is
//! non-finite (the value is then NaN).
RatioFit signed_ratio_fit(const Sample& sample, double h, const KernelSpec& k,
                          const KernelSpec& base, const Eigen::VectorXd& eval_x);

//! Same, with the reference denominators supplied by the caller (one per
//! evaluation point); lets a bandwidth sweep share them across orders.
RatioFit signed_ratio_fit(const Sample& sample, double h, const KernelSpec& k,
                          const Eigen::VectorXd& den_ref, const Eigen::VectorXd& eval_x);

//! The higher-order-kernel comparator: Nadaraya-Watson form with K^(r).
RatioFit higher_order_fit(const Sample& sample, double h, const KernelSpec& base,
                          int r, const Eigen::VectorXd& eval_x);

}  // namespace nwboost
