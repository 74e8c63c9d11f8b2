#include "nwboost/smoother.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace nwboost {

Sample Sample::make(Eigen::VectorXd x, Eigen::VectorXd y) {
  if (x.size() != y.size()) throw std::invalid_argument("Sample: x/y length mismatch");
  if (x.size() < 2) throw std::invalid_argument("Sample: need n >= 2");
  if (!x.allFinite() || !y.allFinite())
    throw std::invalid_argument("Sample: non-finite observation");
  Sample s;
  s.x = std::move(x);
  s.y = std::move(y);
  s.sorted_idx.resize(s.x.size());
  std::iota(s.sorted_idx.begin(), s.sorted_idx.end(), 0);
  std::sort(s.sorted_idx.begin(), s.sorted_idx.end(),
            [&](int a, int b) { return s.x[a] < s.x[b]; });
  return s;
}

void FitConfig::validate() const {
  if (!(h > 0.0)) throw std::invalid_argument("FitConfig: h must be positive");
  if (r < 0 || r > max_r)
    throw std::invalid_argument("FitConfig: r must be in [0, " + std::to_string(max_r) + "]");
  if (denom_floor < 0.0) throw std::invalid_argument("FitConfig: denom_floor must be >= 0");
}

namespace {

//! Fills out(i, j) = w_j(eval_x[i]) row by row; zeroes and flags rows whose
//! kernel mass is at or below the floor.
void fill_weight_rows(Eigen::MatrixXd& out, std::vector<std::uint8_t>& row_ok,
                      const Eigen::VectorXd& design_x, const Eigen::VectorXd& eval_x,
                      double h, const KernelSpec& k, double denom_floor) {
  const auto n = design_x.size();
  const auto m = eval_x.size();
  out.resize(m, n);
  row_ok.assign(static_cast<std::size_t>(m), 1);
  const KernelView kv(k);
  for (Eigen::Index i = 0; i < m; ++i) {
    const double x = eval_x[i];
    double denom = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      const double v = kv((design_x[j] - x) / h) / h;
      out(i, j) = v;
      denom += v;
    }
    if (std::abs(denom) <= denom_floor) {
      out.row(i).setZero();
      row_ok[static_cast<std::size_t>(i)] = 0;
    } else {
      out.row(i) /= denom;
    }
  }
}

}  // namespace

WeightRow nw_weights(const Eigen::VectorXd& design_x, double x, double h,
                     const KernelSpec& k, double denom_floor) {
  if (!(h > 0.0)) throw std::invalid_argument("nw_weights: h must be positive");
  if (design_x.size() < 1) throw std::invalid_argument("nw_weights: empty design");
  Eigen::MatrixXd w;
  std::vector<std::uint8_t> ok;
  Eigen::VectorXd eval_x(1);
  eval_x[0] = x;
  fill_weight_rows(w, ok, design_x, eval_x, h, k, denom_floor);
  WeightRow row;
  row.w = w.row(0).transpose();
  row.empty = ok[0] == 0;
  return row;
}

SmootherMatrix smoother_matrix(const Eigen::VectorXd& design_x, double h,
                               const KernelSpec& k, double denom_floor) {
  if (!(h > 0.0)) throw std::invalid_argument("smoother_matrix: h must be positive");
  if (design_x.size() < 1) throw std::invalid_argument("smoother_matrix: empty design");
  SmootherMatrix sm;
  fill_weight_rows(sm.S, sm.row_ok, design_x, design_x, h, k, denom_floor);
  return sm;
}

bool SmootherMatrix::all_ok() const {
  return std::all_of(row_ok.begin(), row_ok.end(), [](std::uint8_t v) { return v != 0; });
}

BoostFit fit_boosted(const Sample& sample, const FitConfig& cfg) {
  cfg.validate();
  const int n = sample.n();
  const SmootherMatrix sm = smoother_matrix(sample.x, cfg.h, cfg.kernel, cfg.denom_floor);

  BoostFit fit;
  fit.config = cfg;
  fit.fitted.resize(cfg.r + 1, n);
  fit.residuals.resize(cfg.r + 1, n);
  fit.ok = sm.row_ok;

  fit.fitted.row(0) = (sm.S * sample.y).transpose();
  fit.residuals.row(0) = sample.y.transpose() - fit.fitted.row(0);
  for (int k = 1; k <= cfg.r; ++k) {
    fit.fitted.row(k) =
        fit.fitted.row(k - 1) + (sm.S * fit.residuals.row(k - 1).transpose()).transpose();
    fit.residuals.row(k) = sample.y.transpose() - fit.fitted.row(k);
  }
  return fit;
}

WeightProfile boosted_weights(const Eigen::VectorXd& design_x,
                              const Eigen::VectorXd& eval_x, double h,
                              const KernelSpec& k, int r, double denom_floor) {
  if (r < 0) throw std::invalid_argument("boosted_weights: r must be >= 0");
  if (!(h > 0.0)) throw std::invalid_argument("boosted_weights: h must be positive");
  const auto m = eval_x.size();
  WeightProfile profile;
  profile.eval_x = eval_x;
  profile.design_x = design_x;
  profile.r = r;

  Eigen::MatrixXd w0;
  fill_weight_rows(w0, profile.row_ok, design_x, eval_x, h, k, denom_floor);
  if (r == 0) {
    profile.W = std::move(w0);
    return profile;
  }

  // The update needs the previous iterate's weights at the design points,
  // i.e. the boosted hat matrix; both recursions advance together.
  const SmootherMatrix sm = smoother_matrix(design_x, h, k, denom_floor);
  Eigen::MatrixXd w = w0;
  Eigen::MatrixXd hat = sm.S;
  for (int step = 0; step < r; ++step) {
    w = w0 + w - w0 * hat;
    if (step + 1 < r) hat = sm.S + hat - sm.S * hat;
  }
  // rows with no kernel mass stay flagged and zeroed
  for (Eigen::Index i = 0; i < m; ++i)
    if (!profile.row_ok[static_cast<std::size_t>(i)]) w.row(i).setZero();
  profile.W = std::move(w);
  return profile;
}

Eigen::VectorXd predict(const WeightProfile& profile, const Eigen::VectorXd& y) {
  if (profile.W.cols() != y.size())
    throw std::invalid_argument("predict: profile has " + std::to_string(profile.W.cols()) +
                                " columns but y has " + std::to_string(y.size()) + " entries");
  return profile.W * y;
}

RatioFit signed_ratio_fit(const Sample& sample, double h, const KernelSpec& k,
                          const Eigen::VectorXd& den_ref, const Eigen::VectorXd& eval_x) {
  if (!(h > 0.0)) throw std::invalid_argument("signed_ratio_fit: h must be positive");
  if (den_ref.size() != eval_x.size())
    throw std::invalid_argument("signed_ratio_fit: den_ref/eval_x length mismatch");
  const auto m = eval_x.size();
  const auto n = sample.x.size();
  RatioFit fit;
  fit.values.resize(m);
  fit.flags.assign(static_cast<std::size_t>(m), PointFlag::Ok);
  const KernelView kv(k);
  for (Eigen::Index i = 0; i < m; ++i) {
    double num = 0.0, den = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      const double v = kv((sample.x[j] - eval_x[i]) / h) / h;
      num += v * sample.y[j];
      den += v;
    }
    const double value = num / den;  // unguarded: den may be near zero or negative
    fit.values[i] = value;
    if (den == 0.0 || !std::isfinite(value)) {
      fit.values[i] = std::numeric_limits<double>::quiet_NaN();
      fit.flags[static_cast<std::size_t>(i)] = PointFlag::Invalid;
    } else if (den <= 0.05 * den_ref[i]) {
      fit.flags[static_cast<std::size_t>(i)] = PointFlag::Unstable;
    }
  }
  return fit;
}

RatioFit signed_ratio_fit(const Sample& sample, double h, const KernelSpec& k,
                          const KernelSpec& base, const Eigen::VectorXd& eval_x) {
  if (!(h > 0.0)) throw std::invalid_argument("signed_ratio_fit: h must be positive");
  const auto m = eval_x.size();
  const auto n = sample.x.size();
  Eigen::VectorXd den_ref = Eigen::VectorXd::Zero(m);
  const KernelView bv(base);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      den_ref[i] += bv((sample.x[j] - eval_x[i]) / h) / h;
  return signed_ratio_fit(sample, h, k, den_ref, eval_x);
}

RatioFit higher_order_fit(const Sample& sample, double h, const KernelSpec& base,
                          int r, const Eigen::VectorXd& eval_x) {
  return signed_ratio_fit(sample, h, higher_order_kernel(base, r), base, eval_x);
}

}  // namespace nwboost
