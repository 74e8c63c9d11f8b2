#include "nwboost/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "nwboost/diagnostics.hpp"
#include "nwboost/io.hpp"
#include "nwboost/parallel.hpp"
#include "nwboost/rng.hpp"

namespace nwboost {

const char* estimator_name(Estimator e) {
  return e == Estimator::Boost ? "boost" : "higher_order";
}

ModelSpec ModelSpec::model1() { return ModelSpec{ModelId::Model1, 0.5}; }
ModelSpec ModelSpec::model2() { return ModelSpec{ModelId::Model2, 0.5}; }

ModelSpec ModelSpec::from_int(int id) {
  if (id == 1) return model1();
  if (id == 2) return model2();
  throw std::invalid_argument("model must be 1 or 2");
}

double ModelSpec::m(double x) const {
  constexpr double pi = 3.14159265358979323846264;
  if (id == ModelId::Model1) return std::sin(2.0 * pi * x);
  return 0.4 * (3.0 * std::sin(4.0 * pi * x) + 2.0 * std::sin(3.0 * pi * x));
}

std::vector<double> table1_h_grid() {
  std::vector<double> grid(57);
  for (int k = 0; k < 57; ++k) grid[static_cast<std::size_t>(k)] = (20 + 5 * k) / 1000.0;
  return grid;
}

void SimConfig::validate() const {
  if (n < 2) throw std::invalid_argument("SimConfig: n must be >= 2");
  if (replicates < 2) throw std::invalid_argument("SimConfig: replicates must be >= 2");
  if (grid_points < 3) throw std::invalid_argument("SimConfig: grid_points must be >= 3");
  if (r_max < 0 || r_max > 8) throw std::invalid_argument("SimConfig: r_max must be in [0, 8]");
  if (h_grid.empty()) throw std::invalid_argument("SimConfig: empty h grid");
  for (double h : h_grid)
    if (!(h > 0.0)) throw std::invalid_argument("SimConfig: bandwidths must be positive");
  if (!run_boost && !run_higher_order)
    throw std::invalid_argument("SimConfig: no estimator enabled");
  if (!(model.noise_sd >= 0.0)) throw std::invalid_argument("SimConfig: negative noise_sd");
}

Sample gen_dataset(const ModelSpec& model, int n, std::uint64_t seed) {
  if (n < 2) throw std::invalid_argument("gen_dataset: n must be >= 2");
  Rng rng(seed);
  Eigen::VectorXd x(n), y(n);
  for (int i = 0; i < n; ++i) x[i] = rng.uniform01();
  for (int i = 0; i < n; ++i) y[i] = model.m(x[i]) + rng.normal(model.noise_sd);
  return Sample::make(std::move(x), std::move(y));
}

MiseAccumulator::MiseAccumulator(Eigen::VectorXd grid, Eigen::VectorXd target)
    : grid_(std::move(grid)), target_(std::move(target)) {
  if (grid_.size() != target_.size())
    throw std::invalid_argument("MiseAccumulator: grid/target length mismatch");
  count_ = Eigen::VectorXd::Zero(grid_.size());
  sum_ = Eigen::VectorXd::Zero(grid_.size());
  sumsq_ = Eigen::VectorXd::Zero(grid_.size());
  sqerr_ = Eigen::VectorXd::Zero(grid_.size());
}

void MiseAccumulator::add(const Eigen::VectorXd& values, const std::vector<PointFlag>* flags) {
  if (values.size() != grid_.size())
    throw std::invalid_argument("MiseAccumulator: value length mismatch");
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    const PointFlag flag =
        flags ? (*flags)[static_cast<std::size_t>(i)] : PointFlag::Ok;
    if (flag == PointFlag::Unstable) ++unstable_;
    if (flag == PointFlag::Invalid || !std::isfinite(values[i])) continue;
    const double v = values[i];
    count_[i] += 1.0;
    sum_[i] += v;
    sumsq_[i] += v * v;
    const double e = v - target_[i];
    sqerr_[i] += e * e;
  }
}

MiseAccumulator::Result MiseAccumulator::finalize() const {
  const auto m = grid_.size();
  Eigen::VectorXd isb_pt(m), iv_pt(m), mse_pt(m);
  std::vector<std::uint8_t> valid(static_cast<std::size_t>(m), 1);
  int excluded = 0;
  for (Eigen::Index i = 0; i < m; ++i) {
    if (count_[i] == 0.0) {
      valid[static_cast<std::size_t>(i)] = 0;
      isb_pt[i] = iv_pt[i] = mse_pt[i] = 0.0;
      ++excluded;
      continue;
    }
    const double mean = sum_[i] / count_[i];
    const double bias = mean - target_[i];
    isb_pt[i] = bias * bias;
    iv_pt[i] = sumsq_[i] / count_[i] - mean * mean;  // population convention
    mse_pt[i] = sqerr_[i] / count_[i];
  }
  Result res;
  res.instability_count = unstable_;
  res.excluded_points = excluded;
  const int n_valid = static_cast<int>(m) - excluded;
  if (n_valid < 2) {
    res.isb = res.iv = res.mise = std::numeric_limits<double>::quiet_NaN();
    return res;
  }
  res.isb = trapezoid_integral(GridFunction::make(grid_, std::move(isb_pt), valid));
  res.iv = trapezoid_integral(GridFunction::make(grid_, std::move(iv_pt), valid));
  res.mise = trapezoid_integral(GridFunction::make(grid_, std::move(mse_pt), valid));
  return res;
}

namespace {

constexpr double kTableRadiusCap = 52.0;  // covers |u|/h for u in [-1,1], h >= 0.02

//! Fast evaluation kernels for the study. The boosted learner gets a finely
//! tabulated copy of the base kernel; the comparator gets tabulated K^(r).
//! For a Gaussian base, orders r <= 5 are tabulated from the exact signed
//! mixture; beyond that the alternating-binomial coefficients cancel
//! catastrophically in floating point, so further orders are built by grid
//! twicing of the previous table, which keeps all intermediate values O(1).
struct StudyKernels {
  KernelSpec learner;
  std::vector<KernelSpec> order;  // K^(0)..K^(r_max)

  StudyKernels(const KernelSpec& base, int r_max, bool need_orders)
      : learner(tabulate(base, 1.0 / 2048, std::min(base.support_radius(), kTableRadiusCap))) {
    if (!need_orders) return;
    order.reserve(static_cast<std::size_t>(r_max) + 1);
    if (base.gaussian_family()) {
      KernelSpec sym = base;
      for (int r = 0; r <= std::min(r_max, 5); ++r) {
        order.push_back(
            tabulate(sym, 1.0 / 512, std::min(sym.support_radius(), kTableRadiusCap)));
        if (r < std::min(r_max, 5)) sym = twicing_step(sym);
      }
      for (int r = 6; r <= r_max; ++r) {
        const KernelSpec coarse = tabulate(order.back(), 1.0 / 128);
        const KernelSpec next = twicing_step(coarse);
        order.push_back(
            tabulate(next, 1.0 / 128, std::min(next.support_radius(), kTableRadiusCap)));
      }
    } else {
      KernelSpec k = base;
      for (int r = 0; r <= r_max; ++r) {
        order.push_back(k.form() == KernelForm::Tabulated
                            ? k
                            : tabulate(k, 1.0 / 2048, k.support_radius()));
        if (r < r_max) k = twicing_step(k);
      }
    }
  }
};

struct CellValues {
  Eigen::VectorXd values;
  std::vector<PointFlag> flags;  // empty means all Ok
};

//! All cell evaluations for one replicate, estimator-major.
using ReplicateValues = std::vector<CellValues>;

struct CellIndexer {
  bool boost, higher;
  int r_count;
  std::size_t h_count;

  std::size_t total() const {
    return (static_cast<std::size_t>(boost) + static_cast<std::size_t>(higher)) *
           static_cast<std::size_t>(r_count) * h_count;
  }
  std::size_t at(Estimator est, int r, std::size_t hi) const {
    std::size_t block = 0;
    if (est == Estimator::HigherOrder && boost)
      block = static_cast<std::size_t>(r_count) * h_count;
    return block + static_cast<std::size_t>(r) * h_count + hi;
  }
};

ReplicateValues evaluate_replicate(const SimConfig& cfg, const StudyKernels& kernels,
                                   const Eigen::VectorXd& grid, std::uint64_t rep_seed,
                                   const CellIndexer& idx) {
  const Sample sample = gen_dataset(cfg.model, cfg.n, rep_seed);
  ReplicateValues out(idx.total());

  for (std::size_t hi = 0; hi < cfg.h_grid.size(); ++hi) {
    const double h = cfg.h_grid[hi];

    // reference (base-kernel) denominators at the grid, shared by both paths
    Eigen::VectorXd den_ref = Eigen::VectorXd::Zero(grid.size());
    Eigen::MatrixXd gmat(grid.size(), sample.n());
    const KernelView learner(kernels.learner);
    for (Eigen::Index i = 0; i < grid.size(); ++i) {
      for (int j = 0; j < sample.n(); ++j) {
        const double v = learner((sample.x[j] - grid[i]) / h) / h;
        gmat(i, j) = v;
        den_ref[i] += v;
      }
    }

    if (cfg.run_boost) {
      FitConfig fit_cfg;
      fit_cfg.h = h;
      fit_cfg.r = cfg.r_max;
      fit_cfg.kernel = kernels.learner;
      const BoostFit fit = fit_boosted(sample, fit_cfg);
      if (!std::all_of(fit.ok.begin(), fit.ok.end(), [](auto v) { return v != 0; })) {
        // a flagged design row contaminates every residual pass
        for (int r = 0; r <= cfg.r_max; ++r) {
          CellValues& cell = out[idx.at(Estimator::Boost, r, hi)];
          cell.values = Eigen::VectorXd::Zero(grid.size());
          cell.flags.assign(static_cast<std::size_t>(grid.size()), PointFlag::Invalid);
        }
      } else {
        std::vector<PointFlag> flags;
        Eigen::MatrixXd gnorm = gmat;
        for (Eigen::Index i = 0; i < grid.size(); ++i) {
          if (den_ref[i] <= kDefaultDenomFloor) {
            if (flags.empty())
              flags.assign(static_cast<std::size_t>(grid.size()), PointFlag::Ok);
            flags[static_cast<std::size_t>(i)] = PointFlag::Invalid;
            gnorm.row(i).setZero();
          } else {
            gnorm.row(i) /= den_ref[i];
          }
        }
        Eigen::VectorXd vals = gnorm * sample.y;
        for (int r = 0; r <= cfg.r_max; ++r) {
          if (r > 0) vals += gnorm * fit.residuals.row(r - 1).transpose();
          CellValues& cell = out[idx.at(Estimator::Boost, r, hi)];
          cell.values = vals;
          cell.flags = flags;
        }
      }
    }

    if (cfg.run_higher_order) {
      for (int r = 0; r <= cfg.r_max; ++r) {
        RatioFit fit = signed_ratio_fit(sample, h, kernels.order[static_cast<std::size_t>(r)],
                                        den_ref, grid);
        CellValues& cell = out[idx.at(Estimator::HigherOrder, r, hi)];
        cell.values = std::move(fit.values);
        cell.flags = std::move(fit.flags);
      }
    }
  }
  return out;
}

}  // namespace

const SimCell& SimReport::cell(Estimator est, int r, std::size_t h_index) const {
  for (const auto& c : cells)
    if (c.est == est && c.r == r && h_index < h_grid.size() &&
        c.h == h_grid[h_index])
      return c;
  throw std::out_of_range("SimReport::cell: no such cell");
}

const SimSummary& SimReport::summary(Estimator est, int r) const {
  for (const auto& s : summaries)
    if (s.est == est && s.r == r) return s;
  throw std::out_of_range("SimReport::summary: no such summary");
}

SimReport run_mise_study(const SimConfig& cfg) {
  cfg.validate();
  const StudyKernels kernels(cfg.kernel, cfg.r_max, cfg.run_higher_order);

  Eigen::VectorXd grid(cfg.grid_points);
  for (int i = 0; i < cfg.grid_points; ++i)
    grid[i] = static_cast<double>(i) / (cfg.grid_points - 1);
  Eigen::VectorXd target(cfg.grid_points);
  for (int i = 0; i < cfg.grid_points; ++i) target[i] = cfg.model.m(grid[i]);

  const CellIndexer idx{cfg.run_boost, cfg.run_higher_order, cfg.r_max + 1,
                        cfg.h_grid.size()};
  std::vector<MiseAccumulator> acc(idx.total(), MiseAccumulator(grid, target));

  ordered_parallel_reduce<ReplicateValues>(
      cfg.replicates, cfg.threads,
      [&](int rep) {
        return evaluate_replicate(cfg, kernels, grid,
                                  child_seed(cfg.seed, static_cast<std::uint64_t>(rep)), idx);
      },
      [&](int, ReplicateValues&& values) {
        for (std::size_t c = 0; c < values.size(); ++c)
          acc[c].add(values[c].values, values[c].flags.empty() ? nullptr : &values[c].flags);
      });

  SimReport report;
  report.model = static_cast<int>(cfg.model.id);
  report.n = cfg.n;
  report.replicates = cfg.replicates;
  report.seed = cfg.seed;
  report.h_grid = cfg.h_grid;
  report.r_max = cfg.r_max;

  const auto emit_estimator = [&](Estimator est) {
    for (int r = 0; r <= cfg.r_max; ++r) {
      SimSummary best{est, r, 0.0, std::numeric_limits<double>::infinity()};
      bool any = false;
      for (std::size_t hi = 0; hi < cfg.h_grid.size(); ++hi) {
        const MiseAccumulator::Result res = acc[idx.at(est, r, hi)].finalize();
        report.cells.push_back({est, r, cfg.h_grid[hi], res.isb, res.iv, res.mise,
                                res.instability_count, res.excluded_points});
        if (std::isfinite(res.mise) && res.mise <= best.mise_min) {  // ties: larger h
          best.mise_min = res.mise;
          best.h_opt = cfg.h_grid[hi];
          any = true;
        }
      }
      if (!any) best.mise_min = std::numeric_limits<double>::quiet_NaN();
      report.summaries.push_back(best);
    }
  };
  if (cfg.run_boost) emit_estimator(Estimator::Boost);
  if (cfg.run_higher_order) emit_estimator(Estimator::HigherOrder);
  return report;
}

std::vector<SimReport> reproduce_table1(std::uint64_t seed,
                                        const std::filesystem::path& out_csv,
                                        int replicates, int threads) {
  std::vector<SimReport> reports;
  for (int model : {1, 2}) {
    for (int n : {100, 400}) {
      SimConfig cfg;
      cfg.model = ModelSpec::from_int(model);
      cfg.n = n;
      cfg.replicates = replicates;
      cfg.seed = child_seed(seed, static_cast<std::uint64_t>(1000 * model + n));
      cfg.threads = threads;
      reports.push_back(run_mise_study(cfg));
    }
  }
  write_table1_csv(reports, out_csv);
  return reports;
}

void write_table1_csv(const std::vector<SimReport>& reports,
                      const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string());
  out << "model,n,estimator,r,h_opt,mise_min\n";
  for (const auto& rep : reports)
    for (const auto& s : rep.summaries)
      out << rep.model << "," << rep.n << "," << estimator_name(s.est) << "," << s.r << ","
          << num6(s.h_opt) << "," << num6(s.mise_min) << "\n";
}

void write_curves_csv(const std::vector<SimReport>& reports,
                      const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string());
  out << "model,n,estimator,metric,r,log_h,value\n";
  const char* metrics[] = {"isb", "iv", "mise"};
  for (const auto& rep : reports)
    for (const auto& c : rep.cells) {
      const double values[] = {c.isb, c.iv, c.mise};
      for (int m = 0; m < 3; ++m)
        out << rep.model << "," << rep.n << "," << estimator_name(c.est) << "," << metrics[m]
            << "," << c.r << "," << num6(std::log(c.h)) << "," << num6(values[m]) << "\n";
    }
}

std::vector<std::filesystem::path> emit_figure_data(const SimConfig& cfg,
                                                    const std::filesystem::path& out_dir) {
  return emit_figure_data(run_mise_study(cfg), out_dir);
}

std::vector<std::filesystem::path> emit_figure_data(const SimReport& report,
                                                    const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  std::vector<std::filesystem::path> written;

  const char* metrics[] = {"isb", "iv", "mise"};
  const auto metric_of = [](const SimCell& c, int m) {
    return m == 0 ? c.isb : (m == 1 ? c.iv : c.mise);
  };

  std::vector<Estimator> ests;
  for (const auto& s : report.summaries) {
    if (std::find_if(ests.begin(), ests.end(), [&](Estimator e) { return e == s.est; }) ==
        ests.end())
      ests.push_back(s.est);
  }

  const std::string tag =
      "model" + std::to_string(report.model) + "_n" + std::to_string(report.n);

  for (Estimator est : ests) {
    for (int m = 0; m < 3; ++m) {
      std::vector<SvgSeries> series;
      for (int r = 0; r <= report.r_max; ++r) {
        const auto csv_path = out_dir / ("curve_" + tag + "_" + estimator_name(est) + "_" +
                                         metrics[m] + "_r" + std::to_string(r) + ".csv");
        std::ofstream out(csv_path, std::ios::trunc);
        if (!out) throw IoError("cannot open " + csv_path.string());
        out << "log_h,value,r,estimator,metric\n";
        SvgSeries s;
        s.label = "r=" + std::to_string(r);
        for (std::size_t hi = 0; hi < report.h_grid.size(); ++hi) {
          const SimCell& c = report.cell(est, r, hi);
          const double v = metric_of(c, m);
          out << num6(std::log(c.h)) << "," << num6(v) << "," << r << ","
              << estimator_name(est) << "," << metrics[m] << "\n";
          if (v > 0.0) s.points.emplace_back(std::log(c.h), std::log(v));
        }
        series.push_back(std::move(s));
        written.push_back(csv_path);
      }
      const auto svg_path =
          out_dir / ("figure_" + tag + "_" + estimator_name(est) + "_" + metrics[m] + ".svg");
      write_svg_plot(svg_path,
                     std::string(metrics[m]) + ", model " + std::to_string(report.model) +
                         ", n = " + std::to_string(report.n) + ", " + estimator_name(est),
                     "log h", std::string("log ") + metrics[m], series);
      written.push_back(svg_path);
    }
  }

  const auto combined = out_dir / ("curves_" + tag + ".csv");
  write_curves_csv({report}, combined);
  written.push_back(combined);
  return written;
}

}  // namespace nwboost
