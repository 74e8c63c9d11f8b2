#include "nwboost/selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "nwboost/io.hpp"

namespace nwboost {

std::vector<double> log_spaced_grid(double lo, double hi, int n) {
  if (!(lo > 0.0) || !(hi >= lo) || n < 1)
    throw std::invalid_argument("log_spaced_grid: need 0 < lo <= hi and n >= 1");
  std::vector<double> grid(static_cast<std::size_t>(n));
  if (n == 1 || hi == lo) {
    std::fill(grid.begin(), grid.end(), hi);
    return grid;
  }
  const double llo = std::log(lo), lhi = std::log(hi);
  for (int i = 0; i < n; ++i)
    grid[static_cast<std::size_t>(i)] = std::exp(llo + (lhi - llo) * i / (n - 1));
  return grid;
}

std::vector<double> default_h_grid() { return log_spaced_grid(0.02, 0.30, 40); }

namespace {

//! Test-bed SSE for every (r, h): one boosted fit per bandwidth serves all
//! iteration counts. Inadmissible bandwidths (a flagged prediction at some
//! test-bed point) get NaN rows.
struct SseTable {
  Eigen::MatrixXd sse;               // (r_max+1) x |h_grid|
  std::vector<std::uint8_t> h_ok;    // per bandwidth
};

SseTable testbed_sse(const Sample& train, const Sample& testbed, int r_max,
                     const std::vector<double>& h_grid, const KernelSpec& k) {
  if (h_grid.empty()) throw std::invalid_argument("testbed_select: empty h grid");
  if (testbed.n() < 1) throw std::invalid_argument("testbed_select: empty test bed");

  SseTable table;
  table.sse.setConstant(r_max + 1, static_cast<Eigen::Index>(h_grid.size()),
                        std::numeric_limits<double>::quiet_NaN());
  table.h_ok.assign(h_grid.size(), 1);

  for (std::size_t hi = 0; hi < h_grid.size(); ++hi) {
    FitConfig cfg;
    cfg.h = h_grid[hi];
    cfg.r = r_max;
    cfg.kernel = k;
    const BoostFit fit = fit_boosted(train, cfg);

    // prediction weights at the test-bed covariates
    Eigen::MatrixXd g(testbed.n(), train.n());
    bool ok = std::all_of(fit.ok.begin(), fit.ok.end(), [](auto v) { return v != 0; });
    for (int i = 0; i < testbed.n() && ok; ++i) {
      WeightRow row = nw_weights(train.x, testbed.x[i], cfg.h, k, cfg.denom_floor);
      if (row.empty) ok = false;
      g.row(i) = row.w.transpose();
    }
    if (!ok) {
      table.h_ok[hi] = 0;
      continue;
    }

    Eigen::VectorXd pred = g * train.y;
    for (int r = 0; r <= r_max; ++r) {
      if (r > 0) pred += g * fit.residuals.row(r - 1).transpose();
      table.sse(r, static_cast<Eigen::Index>(hi)) = (testbed.y - pred).squaredNorm();
    }
  }

  if (std::none_of(table.h_ok.begin(), table.h_ok.end(), [](auto v) { return v != 0; })) {
    std::string offenders;
    for (std::size_t hi = 0; hi < h_grid.size(); ++hi) offenders += " " + num6(h_grid[hi]);
    throw std::runtime_error(
        "testbed_select: every bandwidth yields a flagged prediction; offending h:" + offenders);
  }
  return table;
}

// Two error sums within this band are treated as tied, so the preference
// for the smoother model (larger h, smaller r) is not decided by rounding
// noise. Constant data, for instance, gives errors of order 1e-30 that vary
// meaninglessly across bandwidths.
constexpr double kTieRel = 1e-9;
constexpr double kTieAbs = 1e-18;

bool tied_or_better(double s, double best) {
  return s <= best + kTieRel * std::max(s, best) + kTieAbs;
}

//! Grid minimizer of one SSE row; ties go to the larger h.
std::pair<double, double> row_argmin(const SseTable& table, int r,
                                     const std::vector<double>& h_grid) {
  double best_sse = std::numeric_limits<double>::infinity();
  std::size_t best = 0;
  for (std::size_t hi = 0; hi < h_grid.size(); ++hi) {
    if (!table.h_ok[hi]) continue;
    const double s = table.sse(r, static_cast<Eigen::Index>(hi));
    if (best_sse == std::numeric_limits<double>::infinity() || tied_or_better(s, best_sse)) {
      best_sse = std::min(s, best_sse);
      best = hi;
    }
  }
  return {h_grid[best], best_sse};
}

}  // namespace

std::pair<double, double> testbed_select_h(const Sample& train, const Sample& testbed,
                                           int r, const std::vector<double>& h_grid,
                                           const KernelSpec& k) {
  if (r < 0) throw std::invalid_argument("testbed_select_h: r must be >= 0");
  const SseTable table = testbed_sse(train, testbed, r, h_grid, k);
  return row_argmin(table, r, h_grid);
}

SelectionResult testbed_select_r(const Sample& train, const Sample& testbed, int r_max,
                                 const std::vector<double>& h_grid, const KernelSpec& k) {
  if (r_max < 1) throw std::invalid_argument("testbed_select_r: r_max must be >= 1");
  const SseTable table = testbed_sse(train, testbed, r_max, h_grid, k);

  SelectionResult result;
  result.per_r.reserve(static_cast<std::size_t>(r_max) + 1);
  for (int r = 0; r <= r_max; ++r) {
    auto [h_hat, sse] = row_argmin(table, r, h_grid);
    result.per_r.push_back({r, h_hat, sse});
  }
  // argmin over r >= 1 (the stopping rule's domain); ties to the smaller r
  int best_r = 1;
  for (int r = 2; r <= r_max; ++r) {
    const double s = result.per_r[static_cast<std::size_t>(r)].sse;
    const double best = result.per_r[static_cast<std::size_t>(best_r)].sse;
    if (!tied_or_better(best, s)) best_r = r;  // a larger r must beat the tie band
  }
  result.r_hat = best_r;
  result.h_hat_final = result.per_r[static_cast<std::size_t>(best_r)].h_hat;
  return result;
}

double loo_cv_score(const Sample& sample, const FitConfig& cfg) {
  cfg.validate();
  const SmootherMatrix sm = smoother_matrix(sample.x, cfg.h, cfg.kernel, cfg.denom_floor);
  if (!sm.all_ok()) throw std::runtime_error("loo_cv_score: flagged smoother row");

  Eigen::MatrixXd hat = sm.S;
  for (int step = 0; step < cfg.r; ++step) hat = sm.S + hat - sm.S * hat;

  const int n = sample.n();
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    const double leverage = hat(i, i);
    if (leverage >= 1.0)
      throw std::runtime_error("loo_cv_score: degenerate smoother (diagonal entry " +
                               num6(leverage) + " at i = " + std::to_string(i) + ")");
    const double fit_i = hat.row(i).dot(sample.y);
    const double e = (sample.y[i] - fit_i) / (1.0 - leverage);
    acc += e * e;
  }
  return acc / n;
}

}  // namespace nwboost
