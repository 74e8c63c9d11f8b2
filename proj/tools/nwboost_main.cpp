// Command-line front end: fitting, bandwidth/iteration selection, and the
// reproduction workflows (table1, figures, rates).
#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <vector>

#include "nwboost/diagnostics.hpp"
#include "nwboost/io.hpp"
#include "nwboost/rng.hpp"
#include "nwboost/selection.hpp"
#include "nwboost/simulation.hpp"

namespace fs = std::filesystem;
using namespace nwboost;

namespace {

constexpr int kExitParse = 2;
constexpr int kExitDegenerate = 3;
constexpr int kExitIo = 4;

struct Options {
  std::string input;
  std::string kernel = "gaussian";
  double h = 0.0;
  int r = 0;
  int grid = 101;
  std::uint64_t seed = 0;
  std::string out;
  int model = 0;
  int n = 400;
  int reps = 200;
  double h_min = 0.02;
  double h_max = 0.30;
  int h_steps = 40;
  int threads = 0;
};

int cmd_fit(const Options& opt) {
  Sample sample = read_xy_csv(opt.input);
  KernelSpec kernel = KernelSpec::parse(opt.kernel);

  Eigen::VectorXd grid(opt.grid);
  for (int i = 0; i < opt.grid; ++i) grid[i] = static_cast<double>(i) / (opt.grid - 1);
  WeightProfile profile = boosted_weights(sample.x, grid, opt.h, kernel, opt.r);
  Eigen::VectorXd yhat = predict(profile, sample.y);

  bool any_ok = false;
  for (auto ok : profile.row_ok) any_ok |= ok != 0;
  if (!any_ok) {
    std::cerr << "fit: degenerate fit, every evaluation point is flagged\n";
    return kExitDegenerate;
  }

  std::ofstream out(opt.out, std::ios::trunc);
  if (!out) {
    std::cerr << "fit: cannot open " << opt.out << "\n";
    return kExitIo;
  }
  out << "x,yhat,flag\n";
  for (int i = 0; i < opt.grid; ++i)
    out << num6(grid[i]) << "," << num6(yhat[i]) << ","
        << (profile.row_ok[static_cast<std::size_t>(i)] ? 0 : 1) << "\n";
  return 0;
}

int cmd_select(const Options& opt) {
  Sample sample = read_xy_csv(opt.input);
  KernelSpec kernel = KernelSpec::parse(opt.kernel);
  if (sample.n() < 4) {
    std::cerr << "select: need at least 4 rows to split\n";
    return kExitParse;
  }

  // seeded permutation, first half trains, second half is the test bed
  std::vector<int> perm(static_cast<std::size_t>(sample.n()));
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(opt.seed);
  for (int i = sample.n() - 1; i > 0; --i) {
    const int j = static_cast<int>(rng.uniform01() * (i + 1));
    std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
  }
  const int n_train = (sample.n() + 1) / 2;
  Eigen::VectorXd xtr(n_train), ytr(n_train);
  Eigen::VectorXd xte(sample.n() - n_train), yte(sample.n() - n_train);
  for (int i = 0; i < sample.n(); ++i) {
    const int src = perm[static_cast<std::size_t>(i)];
    if (i < n_train) {
      xtr[i] = sample.x[src];
      ytr[i] = sample.y[src];
    } else {
      xte[i - n_train] = sample.x[src];
      yte[i - n_train] = sample.y[src];
    }
  }
  const Sample train = Sample::make(std::move(xtr), std::move(ytr));
  const Sample testbed = Sample::make(std::move(xte), std::move(yte));

  const int r_max = opt.r > 0 ? opt.r : 6;
  const auto h_grid = log_spaced_grid(opt.h_min, opt.h_max, opt.h_steps);
  const SelectionResult result = testbed_select_r(train, testbed, r_max, h_grid, kernel);

  std::ofstream out(opt.out, std::ios::trunc);
  if (!out) {
    std::cerr << "select: cannot open " << opt.out << "\n";
    return kExitIo;
  }
  out << "r,h_hat,sse\n";
  for (const auto& e : result.per_r)
    out << e.r << "," << num6(e.h_hat) << "," << num6(e.sse) << "\n";
  out << "# r_hat=" << result.r_hat << " h_hat=" << num6(result.h_hat_final) << "\n";
  return 0;
}

int cmd_table1(const Options& opt) {
  const fs::path out = opt.out.empty() ? fs::path("table1.csv") : fs::path(opt.out);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  reproduce_table1(opt.seed, out, opt.reps, opt.threads);
  std::cout << "wrote " << out.string() << "\n";
  return 0;
}

int cmd_figures(const Options& opt, bool custom_h_grid) {
  const fs::path out_dir = opt.out.empty() ? fs::path("figures") : fs::path(opt.out);
  std::vector<int> models;
  if (opt.model == 0)
    models = {1, 2};
  else
    models = {opt.model};

  std::vector<SimReport> reports;
  for (int model : models) {
    SimConfig cfg;
    cfg.model = ModelSpec::from_int(model);
    cfg.n = opt.n;
    cfg.replicates = opt.reps;
    cfg.grid_points = opt.grid;
    if (custom_h_grid) cfg.h_grid = log_spaced_grid(opt.h_min, opt.h_max, opt.h_steps);
    cfg.seed = child_seed(opt.seed, static_cast<std::uint64_t>(1000 * model + opt.n));
    cfg.threads = opt.threads;
    cfg.kernel = KernelSpec::parse(opt.kernel);
    reports.push_back(run_mise_study(cfg));
    emit_figure_data(reports.back(), out_dir);
  }
  write_curves_csv(reports, out_dir / "curves.csv");
  std::cout << "wrote " << (out_dir / "curves.csv").string() << "\n";
  return 0;
}

//! Empirical order checks: ISB slope in log h on a noiseless equispaced
//! design (one window per r), and the bandwidth scaling of the weight
//! roughness sup_x sum_j w_j(x)^2 (slope about -1).
int cmd_rates(const Options& opt) {
  const KernelSpec kernel = KernelSpec::parse(opt.kernel);
  const ModelSpec model = ModelSpec::from_int(opt.model == 0 ? 1 : opt.model);
  const auto m_true = [&](double x) { return model.m(x); };

  Eigen::VectorXd design(opt.n);
  for (int i = 0; i < opt.n; ++i) design[i] = (i + 0.5) / opt.n;
  Eigen::VectorXd interior(81);
  for (int i = 0; i <= 80; ++i) interior[i] = 0.1 + 0.01 * i;

  struct Row {
    const char* quantity;
    int r;
    RateEstimate est;
    double lo, hi;
  };
  std::vector<Row> rows;

  const std::pair<double, double> isb_windows[] = {{0.02, 0.06}, {0.03, 0.06}, {0.06, 0.12}};
  for (int r = 0; r <= 2; ++r) {
    const auto [lo, hi] = isb_windows[r];
    std::vector<std::pair<double, double>> isb_by_h;
    for (double h : log_spaced_grid(lo, hi, 10)) {
      const WeightProfile profile = boosted_weights(design, interior, h, kernel, r);
      const GridFunction bias = conditional_bias(profile, m_true);
      GridFunction sq = bias;
      sq.values = bias.values.cwiseAbs2();
      isb_by_h.emplace_back(h, trapezoid_integral(sq));
    }
    rows.push_back({"isb", r, rate_estimate(isb_by_h, {lo, hi}), lo, hi});
  }

  Eigen::VectorXd full_grid(101);
  for (int i = 0; i < 101; ++i) full_grid[i] = i / 100.0;
  Rng rng(opt.seed);
  Eigen::VectorXd xs(opt.n);
  for (int i = 0; i < opt.n; ++i) xs[i] = rng.uniform01();
  for (int r = 0; r <= 2; ++r) {
    std::vector<std::pair<double, double>> sup_by_h;
    for (double h : log_spaced_grid(0.05, 0.30, 10)) {
      const WeightProfile profile = boosted_weights(xs, full_grid, h, kernel, r);
      const GridFunction v = conditional_variance(profile, [](double) { return 1.0; });
      sup_by_h.emplace_back(h, v.values.maxCoeff());
    }
    rows.push_back({"sup_sumw2", r, rate_estimate(sup_by_h, {0.05, 0.30}), 0.05, 0.30});
  }

  const fs::path out_path = opt.out.empty() ? fs::path("rates.csv") : fs::path(opt.out);
  std::ofstream out(out_path, std::ios::trunc);
  if (!out) {
    std::cerr << "rates: cannot open " << out_path.string() << "\n";
    return kExitIo;
  }
  out << "quantity,r,slope,intercept,r_squared,h_min,h_max,n_points\n";
  for (const auto& row : rows)
    out << row.quantity << "," << row.r << "," << num6(row.est.slope) << ","
        << num6(row.est.intercept) << "," << num6(row.est.r_squared) << "," << num6(row.lo)
        << "," << num6(row.hi) << "," << row.est.points.size() << "\n";
  std::cout << "wrote " << out_path.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"L2 boosting of Nadaraya-Watson kernel regression"};
  app.require_subcommand(1);
  app.set_help_flag("--help", "print help");  // frees -h / --h for the bandwidth
  app.set_config("--config", "", "key=value config file; flags override file values");

  Options opt;

  auto add_kernel = [&](CLI::App* cmd) {
    cmd->add_option("--kernel", opt.kernel, "gaussian|epanechnikov")->capture_default_str();
  };
  auto add_threads = [&](CLI::App* cmd) {
    cmd->add_option("--threads", opt.threads, "worker threads (0 = hardware)")
        ->capture_default_str();
  };

  CLI::App* fit = app.add_subcommand("fit", "fit a boosted smooth to a CSV sample");
  CLI::App* select = app.add_subcommand("select", "test-bed choice of h and r");
  CLI::App* table1 = app.add_subcommand("table1", "reproduce the minimal-MISE table");
  CLI::App* figures = app.add_subcommand("figures", "ISB/IV/MISE bandwidth curves and plots");
  CLI::App* rates = app.add_subcommand("rates", "empirical bias/variance order checks");
  for (CLI::App* sub : {fit, select, table1, figures, rates}) {
    sub->fallthrough();  // lets the top-level --config appear after the subcommand
    sub->set_help_flag("--help", "print help");
  }

  fit->add_option("--input", opt.input, "two-column CSV (x,y)")->required();
  fit->add_option("--h", opt.h, "bandwidth")->required();
  fit->add_option("--r", opt.r, "boosting iterations")->capture_default_str();
  fit->add_option("--grid", opt.grid, "evaluation grid points on [0,1]")->capture_default_str();
  fit->add_option("--out", opt.out, "output CSV")->default_val("fit.csv");
  add_kernel(fit);

  select->add_option("--input", opt.input, "two-column CSV (x,y)")->required();
  select->add_option("--seed", opt.seed, "split seed")->capture_default_str();
  select->add_option("--r", opt.r, "maximum boosting iteration (default 6)");
  select->add_option("--h-min", opt.h_min, "")->capture_default_str();
  select->add_option("--h-max", opt.h_max, "")->capture_default_str();
  select->add_option("--h-steps", opt.h_steps, "log-spaced grid size")->capture_default_str();
  select->add_option("--out", opt.out, "output CSV")->default_val("selection.csv");
  add_kernel(select);

  table1->add_option("--seed", opt.seed, "study seed")->required();
  table1->add_option("--reps", opt.reps, "Monte Carlo replicates")->capture_default_str();
  table1->add_option("--out", opt.out, "output CSV")->default_val("table1.csv");
  add_kernel(table1);
  add_threads(table1);

  figures->add_option("--seed", opt.seed, "study seed")->required();
  figures->add_option("--model", opt.model, "1 or 2 (default: both)");
  figures->add_option("--n", opt.n, "sample size")->capture_default_str();
  figures->add_option("--reps", opt.reps, "Monte Carlo replicates")->capture_default_str();
  figures->add_option("--grid", opt.grid, "evaluation grid points")->capture_default_str();
  auto* fig_hmin =
      figures->add_option("--h-min", opt.h_min, "custom log-spaced curve grid (with --h-max)");
  figures->add_option("--h-max", opt.h_max, "")->needs(fig_hmin);
  figures->add_option("--h-steps", opt.h_steps, "")->needs(fig_hmin);
  figures->add_option("--out", opt.out, "output directory")->default_val("figures");
  add_kernel(figures);
  add_threads(figures);

  rates->add_option("--seed", opt.seed, "design seed")->required();
  rates->add_option("--model", opt.model, "regression model (default 1)");
  rates->add_option("--n", opt.n, "design size")->capture_default_str();
  rates->add_option("--out", opt.out, "output CSV")->default_val("rates.csv");
  add_kernel(rates);

  CLI11_PARSE(app, argc, argv);

  try {
    if (fit->parsed()) return cmd_fit(opt);
    if (select->parsed()) return cmd_select(opt);
    if (table1->parsed()) return cmd_table1(opt);
    if (figures->parsed()) return cmd_figures(opt, fig_hmin->count() > 0);
    if (rates->parsed()) return cmd_rates(opt);
  } catch (const ParseError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitParse;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
