#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

const std::string kCli = NWBOOST_CLI_PATH;

struct TempDir {
  fs::path path;
  TempDir() : path(fs::temp_directory_path() / "nwboost_cli_test") {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

int run(const std::string& args, const fs::path& stderr_to = {}) {
  std::string cmd = kCli + " " + args;
  if (!stderr_to.empty()) cmd += " 2>" + stderr_to.string();
  cmd += " >/dev/null";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines_of(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) lines.push_back(line);
  return lines;
}

void write_wave_csv(const fs::path& p, int n, double amp, bool header = false) {
  std::ofstream out(p);
  if (header) out << "x,y\n";
  for (int i = 0; i < n; ++i) {
    const double x = (i + 0.5) / n;
    out << x << "," << amp * std::sin(2.0 * M_PI * x) << "\n";
  }
}

}  // namespace

TEST_CASE("fit: well-formed input produces a grid prediction file") {
  TempDir tmp;
  const auto input = tmp.path / "data.csv";
  write_wave_csv(input, 10, 1.0, /*header=*/true);
  const auto out = tmp.path / "fit.csv";
  const int code =
      run("fit --input " + input.string() + " --h 0.1 --r 2 --out " + out.string());
  CHECK(code == 0);
  const auto lines = lines_of(out);
  REQUIRE(lines.size() == 102);  // header + 101 grid rows
  CHECK(lines[0] == "x,yhat,flag");

  // idempotent rerun
  const std::string first = slurp(out);
  CHECK(run("fit --input " + input.string() + " --h 0.1 --r 2 --out " + out.string()) == 0);
  CHECK(slurp(out) == first);
}

TEST_CASE("fit: constant responses are reproduced on the whole grid") {
  TempDir tmp;
  const auto input = tmp.path / "const.csv";
  {
    std::ofstream out(input);
    for (int i = 0; i < 8; ++i) out << 0.1 * (i + 1) << ",5.5\n";
  }
  const auto out = tmp.path / "fit.csv";
  CHECK(run("fit --input " + input.string() + " --h 0.2 --r 3 --out " + out.string()) == 0);
  const auto lines = lines_of(out);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto c1 = lines[i].find(',');
    const auto c2 = lines[i].find(',', c1 + 1);
    CHECK(std::stod(lines[i].substr(c1 + 1, c2 - c1 - 1)) == doctest::Approx(5.5));
  }
}

TEST_CASE("fit: a non-numeric cell exits 2 and names the line") {
  TempDir tmp;
  const auto input = tmp.path / "bad.csv";
  {
    std::ofstream out(input);
    out << "0.1,1.0\n0.2,2.0\n0.3,oops\n0.4,4.0\n";
  }
  const auto err = tmp.path / "err.txt";
  const int code = run("fit --input " + input.string() + " --h 0.1 --out " +
                           (tmp.path / "o.csv").string(),
                       err);
  CHECK(code == 2);
  CHECK(slurp(err).find("line 3") != std::string::npos);
}

TEST_CASE("fit: missing required flags fail") {
  TempDir tmp;
  CHECK(run("fit --h 0.1") != 0);
  CHECK(run("bogus") != 0);
}

TEST_CASE("fit: exit 3 when every grid point is flagged") {
  TempDir tmp;
  const auto input = tmp.path / "cluster.csv";
  {
    std::ofstream out(input);
    out << "0.5049,1.0\n0.5051,1.2\n";  // no grid point within h of the data
  }
  const int code = run("fit --input " + input.string() +
                       " --h 0.0001 --kernel epanechnikov --out " +
                       (tmp.path / "o.csv").string());
  CHECK(code == 3);
}

TEST_CASE("select: singleton grid reports that bandwidth; reruns are identical") {
  TempDir tmp;
  const auto input = tmp.path / "data.csv";
  write_wave_csv(input, 60, 1.0);
  const auto out = tmp.path / "sel.csv";
  const std::string cmd = "select --input " + input.string() +
                          " --seed 5 --r 3 --h-min 0.12 --h-max 0.12 --h-steps 1 --out " +
                          out.string();
  REQUIRE(run(cmd) == 0);
  const auto lines = lines_of(out);
  REQUIRE(lines.size() == 6);  // header + r rows 0..3 + summary
  CHECK(lines[0] == "r,h_hat,sse");
  for (int r = 0; r <= 3; ++r)
    CHECK(lines[static_cast<std::size_t>(r) + 1].find(std::to_string(r) + ",0.12,") == 0);
  CHECK(lines[5].find("# r_hat=") == 0);

  const std::string first = slurp(out);
  REQUIRE(run(cmd) == 0);
  CHECK(slurp(out) == first);
}

TEST_CASE("select: seeded model-1 run lands inside the grid") {
  TempDir tmp;
  const auto input = tmp.path / "data.csv";
  write_wave_csv(input, 400, 1.0);
  const auto out = tmp.path / "sel.csv";
  REQUIRE(run("select --input " + input.string() + " --seed 9 --out " + out.string()) == 0);
  const auto lines = lines_of(out);
  REQUIRE(lines.size() == 9);  // header + r = 0..6 + summary
  const std::string summary = lines.back();
  const auto rpos = summary.find("r_hat=");
  const int r_hat = std::stoi(summary.substr(rpos + 6));
  CHECK(r_hat >= 1);
  const auto hpos = summary.find("h_hat=");
  const double h_hat = std::stod(summary.substr(hpos + 6));
  CHECK(h_hat >= 0.02);
  CHECK(h_hat <= 0.30);
}

TEST_CASE("table1: tiny replicate count still yields the full 56-row table") {
  TempDir tmp;
  const auto out = tmp.path / "table1.csv";
  REQUIRE(run("table1 --seed 1 --reps 2 --threads 2 --out " + out.string()) == 0);
  const auto lines = lines_of(out);
  REQUIRE(lines.size() == 57);
  CHECK(lines[0] == "model,n,estimator,r,h_opt,mise_min");
  int boost_rows = 0, higher_rows = 0;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].find(",boost,") != std::string::npos) ++boost_rows;
    if (lines[i].find(",higher_order,") != std::string::npos) ++higher_rows;
  }
  CHECK(boost_rows == 28);
  CHECK(higher_rows == 28);
}

TEST_CASE("figures: panel and curve files for both models") {
  TempDir tmp;
  const auto dir = tmp.path / "figs";
  REQUIRE(run("figures --seed 1 --reps 2 --n 40 --threads 2 --out " + dir.string()) == 0);
  int svg = 0, curves = 0;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() == ".svg") ++svg;
    if (entry.path().filename().string().rfind("curve_", 0) == 0) ++curves;
  }
  CHECK(svg == 12);  // 2 models x 2 estimators x 3 metrics
  CHECK(curves == 2 * 2 * 3 * 7);
  CHECK(fs::exists(dir / "curves.csv"));

  const auto one = dir / "curve_model2_n40_higher_order_mise_r6.csv";
  REQUIRE(fs::exists(one));
  CHECK(lines_of(one).size() == 58);  // header + 57 bandwidths
}

TEST_CASE("table1: unwritable output path exits 4") {
  CHECK(run("table1 --seed 1 --reps 2 --out /proc/nope/table1.csv") == 4);
}

TEST_CASE("figures: custom log-spaced bandwidth grid") {
  TempDir tmp;
  const auto dir = tmp.path / "figs";
  REQUIRE(run("figures --seed 2 --reps 2 --n 30 --model 1 --grid 11"
              " --h-min 0.05 --h-max 0.2 --h-steps 5 --out " +
              dir.string()) == 0);
  const auto one = dir / "curve_model1_n30_boost_iv_r0.csv";
  REQUIRE(fs::exists(one));
  CHECK(lines_of(one).size() == 6);  // header + 5 bandwidths
}

TEST_CASE("rates: slope report with tight fits") {
  TempDir tmp;
  const auto out = tmp.path / "rates.csv";
  REQUIRE(run("rates --seed 3 --out " + out.string()) == 0);
  const auto lines = lines_of(out);
  REQUIRE(lines.size() == 7);  // header + isb r0..r2 + sup_sumw2 r0..r2
  CHECK(lines[0] == "quantity,r,slope,intercept,r_squared,h_min,h_max,n_points");
  for (std::size_t i = 1; i < lines.size(); ++i) {
    std::stringstream ss(lines[i]);
    std::string quantity, r_s, slope_s, icpt_s, r2_s;
    std::getline(ss, quantity, ',');
    std::getline(ss, r_s, ',');
    std::getline(ss, slope_s, ',');
    std::getline(ss, icpt_s, ',');
    std::getline(ss, r2_s, ',');
    const double slope = std::stod(slope_s);
    const double r2 = std::stod(r2_s);
    CHECK(r2 >= 0.95);
    if (quantity == "isb" && r_s == "0") {
      CHECK(slope >= 3.0);
      CHECK(slope <= 5.0);
    }
    if (quantity == "isb" && r_s == "1") {
      CHECK(slope >= 6.5);
      CHECK(slope <= 9.5);
    }
    if (quantity == "sup_sumw2") {
      CHECK(slope >= -1.5);
      CHECK(slope <= -0.5);
    }
  }
}

TEST_CASE("config file provides defaults, flags override") {
  TempDir tmp;
  const auto input = tmp.path / "data.csv";
  write_wave_csv(input, 10, 1.0);
  const auto cfgfile = tmp.path / "run.cfg";
  {
    std::ofstream out(cfgfile);
    out << "[fit]\n";
    out << "input=" << input.string() << "\n";
    out << "h=0.1\n";
    out << "r=1\n";
    out << "out=" << (tmp.path / "a.csv").string() << "\n";
  }
  CHECK(run("fit --config " + cfgfile.string()) == 0);
  CHECK(fs::exists(tmp.path / "a.csv"));
  // flag wins over the file value
  CHECK(run("fit --config " + cfgfile.string() + " --out " + (tmp.path / "b.csv").string()) ==
        0);
  CHECK(fs::exists(tmp.path / "b.csv"));
}
