#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "nwboost/kernels.hpp"
#include "nwboost/smoother.hpp"

namespace nwboost {

enum class Estimator { Boost, HigherOrder };
enum class ModelId { Model1 = 1, Model2 = 2 };

const char* estimator_name(Estimator e);

//! Regression model of the simulation study: a target curve on [0, 1],
//! homoscedastic normal noise, uniform covariate design.
struct ModelSpec {
  ModelId id = ModelId::Model1;
  double noise_sd = 0.5;

  double m(double x) const;
  static ModelSpec model1();
  static ModelSpec model2();
  static ModelSpec from_int(int id);
};

//! Bandwidth grid of the study: 0.02 to 0.30 in steps of 0.005.
std::vector<double> table1_h_grid();

struct SimConfig {
  ModelSpec model;
  int n = 100;
  int replicates = 200;
  std::vector<double> h_grid = table1_h_grid();
  int r_max = 6;
  int grid_points = 101;
  std::uint64_t seed = 0;
  KernelSpec kernel = KernelSpec::gaussian();
  bool run_boost = true;
  bool run_higher_order = true;
  int threads = 0;  // 0 means hardware concurrency

  void validate() const;
};

struct SimCell {
  Estimator est;
  int r;
  double h;
  double isb;
  double iv;
  double mise;
  std::int64_t instability_count;  // flagged grid-point evaluations
  int excluded_points;             // grid points invalid in every replicate
};

struct SimSummary {
  Estimator est;
  int r;
  double h_opt;
  double mise_min;
};

struct SimReport {
  int model = 1;
  int n = 0;
  int replicates = 0;
  std::uint64_t seed = 0;
  std::vector<double> h_grid;
  int r_max = 0;
  std::vector<SimCell> cells;  // estimator-major, then r, then h
  std::vector<SimSummary> summaries;

  const SimCell& cell(Estimator est, int r, std::size_t h_index) const;
  const SimSummary& summary(Estimator est, int r) const;
};

//! X_i iid uniform(0,1), Y_i = m(X_i) + N(0, noise_sd^2) noise; byte-exact
//! deterministic for a given seed. Replicate k of a study uses
//! child_seed(seed, k), so parallel generation is order-independent.
Sample gen_dataset(const ModelSpec& model, int n, std::uint64_t seed);

//! Runs the seeded Monte Carlo study: for every replicate, estimator and
//! (r, h) cell, evaluates the estimate on the grid; across replicates the
//! pointwise mean, population variance and mean squared error integrate
//! (trapezoid) to ISB, IV and MISE with ISB + IV = MISE.
SimReport run_mise_study(const SimConfig& cfg);

//! The full study grid: models 1 and 2, n in {100, 400}, both estimators,
//! r = 0..6. Writes a table1-shaped CSV and returns the four reports.
std::vector<SimReport> reproduce_table1(std::uint64_t seed,
                                        const std::filesystem::path& out_csv,
                                        int replicates = 200, int threads = 0);

//! Per-(estimator, r, metric) bandwidth-curve CSVs plus one SVG panel per
//! (estimator, metric), and a combined curves CSV for this configuration.
//! Returns the written paths.
std::vector<std::filesystem::path> emit_figure_data(const SimConfig& cfg,
                                                    const std::filesystem::path& out_dir);
//! Same, from an already-computed report.
std::vector<std::filesystem::path> emit_figure_data(const SimReport& report,
                                                    const std::filesystem::path& out_dir);

void write_table1_csv(const std::vector<SimReport>& reports,
                      const std::filesystem::path& path);
void write_curves_csv(const std::vector<SimReport>& reports,
                      const std::filesystem::path& path);

//! Pointwise replicate statistics behind run_mise_study. Values flagged
//! Invalid (or non-finite) are excluded pointwise; Unstable values enter at
//! their raw magnitude and are only counted.
class MiseAccumulator {
 public:
  MiseAccumulator(Eigen::VectorXd grid, Eigen::VectorXd target);

  void add(const Eigen::VectorXd& values, const std::vector<PointFlag>* flags = nullptr);

  struct Result {
    double isb;
    double iv;
    double mise;
    std::int64_t instability_count;
    int excluded_points;
  };
  Result finalize() const;

 private:
  Eigen::VectorXd grid_, target_;
  Eigen::VectorXd count_, sum_, sumsq_, sqerr_;
  std::int64_t unstable_ = 0;
};

}  // namespace nwboost
