#pragma once

#include <utility>
#include <vector>

#include "nwboost/smoother.hpp"

namespace nwboost {

struct SelectionEntry {
  int r;
  double h_hat;
  double sse;
};

struct SelectionResult {
  std::vector<SelectionEntry> per_r;  // r = 0..r_max (r = 0 reported, not selectable)
  int r_hat;
  double h_hat_final;
};

//! n log-spaced points on [lo, hi]. The default selection grid is 40 points
//! on [0.02, 0.30].
std::vector<double> log_spaced_grid(double lo, double hi, int n);
std::vector<double> default_h_grid();

//! Test-bed bandwidth choice for a fixed iteration count: fits m-hat_r on
//! the training sample for every h in the grid and returns the grid
//! minimizer of the test-bed sum of squared prediction errors, with ties
//! broken toward the larger h (error sums within 1e-9 relative count as
//! tied). Bandwidths yielding a flagged prediction at any test-bed
//! covariate are inadmissible; if every h is inadmissible, throws listing
//! them.
std::pair<double, double> testbed_select_h(const Sample& train, const Sample& testbed,
                                           int r, const std::vector<double>& h_grid,
                                           const KernelSpec& k);

//! Runs the bandwidth choice for every r = 0..r_max and picks the stopping
//! iteration r-hat = argmin over r >= 1 of the test-bed error at (r, h-hat_r),
//! ties toward the smaller r. The r = 0 row is reported alongside.
SelectionResult testbed_select_r(const Sample& train, const Sample& testbed, int r_max,
                                 const std::vector<double>& h_grid, const KernelSpec& k);

//! Leave-one-out score via the linear-smoother shortcut
//!   n^-1 sum_i [(Y_i - m-hat_r(X_i)) / (1 - B_ii)]^2
//! with B the boosted hat matrix. Exact for a fixed linear smoother; the
//! Nadaraya-Watson weights renormalize on deletion, so this is an
//! approximation to the refit-without-i criterion. Throws if any B_ii >= 1.
double loo_cv_score(const Sample& sample, const FitConfig& cfg);

}  // namespace nwboost
