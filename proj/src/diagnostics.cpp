#include "nwboost/diagnostics.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "nwboost/io.hpp"

namespace nwboost {

GridFunction GridFunction::make(Eigen::VectorXd grid, Eigen::VectorXd values,
                                std::vector<std::uint8_t> valid) {
  if (grid.size() != values.size())
    throw std::invalid_argument("GridFunction: grid/values length mismatch");
  for (Eigen::Index i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1]))
      throw std::invalid_argument("GridFunction: grid must be strictly ascending");
  GridFunction f;
  f.grid = std::move(grid);
  f.values = std::move(values);
  if (valid.empty())
    f.valid.assign(static_cast<std::size_t>(f.grid.size()), 1);
  else if (valid.size() != static_cast<std::size_t>(f.grid.size()))
    throw std::invalid_argument("GridFunction: mask length mismatch");
  else
    f.valid = std::move(valid);
  return f;
}

void GridFunction::write_csv(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string());
  out << "x,value\n";
  std::string mask_line;
  for (int i = 0; i < size(); ++i)
    if (!valid[static_cast<std::size_t>(i)]) mask_line += " " + std::to_string(i);
  if (!mask_line.empty()) out << "# mask:" << mask_line << "\n";
  for (int i = 0; i < size(); ++i)
    out << num6(grid[i]) << "," << num6(values[i]) << "\n";
}

GridFunction conditional_bias(const WeightProfile& profile,
                              const std::function<double(double)>& m_true) {
  const auto m = profile.eval_x.size();
  Eigen::VectorXd m_design(profile.design_x.size());
  for (Eigen::Index j = 0; j < m_design.size(); ++j) m_design[j] = m_true(profile.design_x[j]);
  Eigen::VectorXd vals = profile.W * m_design;
  for (Eigen::Index i = 0; i < m; ++i) vals[i] -= m_true(profile.eval_x[i]);
  return GridFunction::make(profile.eval_x, std::move(vals), profile.row_ok);
}

GridFunction conditional_variance(const WeightProfile& profile,
                                  const std::function<double(double)>& sigma2) {
  const auto m = profile.eval_x.size();
  Eigen::VectorXd s2(profile.design_x.size());
  for (Eigen::Index j = 0; j < s2.size(); ++j) s2[j] = sigma2(profile.design_x[j]);
  Eigen::VectorXd vals(m);
  for (Eigen::Index i = 0; i < m; ++i)
    vals[i] = profile.W.row(i).cwiseAbs2().dot(s2.transpose());
  return GridFunction::make(profile.eval_x, std::move(vals), profile.row_ok);
}

double trapezoid_integral(const GridFunction& f) {
  int n_valid = 0;
  for (auto v : f.valid) n_valid += v != 0;
  if (n_valid < 2) throw std::invalid_argument("trapezoid_integral: need >= 2 valid points");
  double acc = 0.0;
  for (int i = 0; i + 1 < f.size(); ++i) {
    if (!f.valid[static_cast<std::size_t>(i)] || !f.valid[static_cast<std::size_t>(i + 1)])
      continue;
    acc += 0.5 * (f.values[i] + f.values[i + 1]) * (f.grid[i + 1] - f.grid[i]);
  }
  return acc;
}

RateEstimate rate_estimate(const std::vector<std::pair<double, double>>& metric_by_h,
                           std::pair<double, double> window) {
  RateEstimate est;
  // hair of slack so grid endpoints like exp(log(h)) stay inside the window
  const double lo = window.first * (1.0 - 1e-12);
  const double hi = window.second * (1.0 + 1e-12);
  for (const auto& [h, value] : metric_by_h) {
    if (h < lo || h > hi) continue;
    if (!(value > 0.0))
      throw std::invalid_argument("rate_estimate: nonpositive metric value at h = " +
                                  std::to_string(h));
    est.points.emplace_back(std::log(h), std::log(value));
  }
  if (est.points.size() < 4)
    throw std::invalid_argument("rate_estimate: need >= 4 pairs inside the window");

  const auto n = static_cast<double>(est.points.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& [x, y] : est.points) {
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double denom = n * sxx - sx * sx;
  est.slope = (n * sxy - sx * sy) / denom;
  est.intercept = (sy - est.slope * sx) / n;

  double ss_res = 0, ss_tot = 0;
  const double mean_y = sy / n;
  for (const auto& [x, y] : est.points) {
    const double fit = est.intercept + est.slope * x;
    ss_res += (y - fit) * (y - fit);
    ss_tot += (y - mean_y) * (y - mean_y);
  }
  est.r_squared = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
  return est;
}

}  // namespace nwboost
