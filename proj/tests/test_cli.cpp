#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

const std::string kBin = RDOPT_BIN;

int run(const std::string& args) {
  const std::string cmd = kBin + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

fs::path fresh_dir(const char* name) {
  const auto dir = fs::temp_directory_path() / "rdopt_cli_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int count_data_rows(const fs::path& csv) {
  std::ifstream in(csv);
  std::string line;
  int rows = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      header_seen = true;
      continue;
    }
    ++rows;
  }
  return rows;
}

std::vector<double> split_row(const std::string& line) {
  std::vector<double> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(std::stod(cell));
  return out;
}

// shared pipeline artifacts so fit runs once for this binary
const fs::path& pipeline_dir() {
  static fs::path dir = [] {
    const fs::path d = fresh_dir("pipeline");
    REQUIRE(run("generate --out " + d.string()) == 0);
    REQUIRE(run("fit --out " + d.string()) == 0);
    return d;
  }();
  return dir;
}

}  // namespace

TEST_CASE("generate writes a reproducible 100-sample CSV") {
  const auto dir = fresh_dir("generate");
  REQUIRE(run("generate --out " + dir.string() + " --seed 42") == 0);
  const auto csv = dir / "samples.csv";
  REQUIRE(fs::exists(csv));
  CHECK(count_data_rows(csv) == 100);
  const std::string first = slurp(csv);
  CHECK(first.find("# bounds:") == 0);
  CHECK(first.find("x1,x2,y1,y2") != std::string::npos);

  REQUIRE(run("generate --out " + dir.string() + " --seed 42") == 0);
  CHECK(slurp(csv) == first);  // byte-identical rerun

  REQUIRE(run("generate --out " + dir.string() + " --seed 43") == 0);
  CHECK(slurp(csv) != first);
}

TEST_CASE("generate honors a boundary-only config") {
  const auto dir = fresh_dir("generate_boundary");
  const auto cfg = dir / "run.cfg";
  {
    std::ofstream out(cfg);
    out << "[dataset]\nn_interior = 0\n[output]\ndir = " << dir.string() << "\n";
  }
  REQUIRE(run("generate --config " + cfg.string()) == 0);
  CHECK(count_data_rows(dir / "samples.csv") == 20);
}

TEST_CASE("fit produces models and a residual report") {
  const auto& dir = pipeline_dir();
  CHECK(fs::exists(dir / "model_f1.txt"));
  CHECK(fs::exists(dir / "model_f2.txt"));
  const std::string report = slurp(dir / "fit_report.txt");
  CHECK(report.find("alpha = 9.9999999999999998e-13") != std::string::npos);
  CHECK(report.find("f1.max_interp_residual") != std::string::npos);

  // residuals below the interpolation threshold on clean synthetic data
  std::istringstream ss(report);
  std::string line;
  while (std::getline(ss, line)) {
    const auto pos = line.find("max_interp_residual = ");
    if (pos != std::string::npos) {
      CHECK(std::stod(line.substr(pos + 22)) < 1e-6);
    }
  }
}

TEST_CASE("fit without samples exits with the input-error code") {
  const auto dir = fresh_dir("fit_missing");
  CHECK(run("fit --out " + dir.string()) == 2);
}

TEST_CASE("propagate emits an ordered confidence surface") {
  const auto& dir = pipeline_dir();
  REQUIRE(run("propagate --out " + dir.string() + " --grid 6x5") == 0);
  const auto csv = dir / "surface.csv";
  REQUIRE(fs::exists(csv));
  CHECK(count_data_rows(csv) == 30);

  std::ifstream in(csv);
  std::string line;
  std::getline(in, line);
  CHECK(line == "x1,x2,mu1,lo1,hi1,mu2,lo2,hi2");
  while (std::getline(in, line)) {
    const auto v = split_row(line);
    REQUIRE(v.size() == 8);
    CHECK(v[3] <= v[2]);
    CHECK(v[2] <= v[4]);
    CHECK(v[6] <= v[5]);
    CHECK(v[5] <= v[7]);
  }
}

TEST_CASE("propagate single-cell grid") {
  const auto& dir = pipeline_dir();
  REQUIRE(run("propagate --out " + dir.string() + " --grid 1x1") == 0);
  CHECK(count_data_rows(dir / "surface.csv") == 1);
}

TEST_CASE("propagate default grid yields 10000 rows") {
  const auto& dir = pipeline_dir();
  REQUIRE(run("propagate --out " + dir.string()) == 0);
  CHECK(count_data_rows(dir / "surface.csv") == 10000);
}

TEST_CASE("propagate supports the extended test domain") {
  const auto& dir = pipeline_dir();
  const auto cfg = dir / "extended.cfg";
  {
    std::ofstream out(cfg);
    out << "[output]\ndir = " << dir.string() << "\ndomain = extended\n"
        << "grid_n1 = 3\ngrid_n2 = 3\n";
  }
  REQUIRE(run("propagate --config " + cfg.string()) == 0);
  std::ifstream in(dir / "surface.csv");
  std::string line;
  std::getline(in, line);
  std::getline(in, line);
  const auto v = split_row(line);
  CHECK(v[0] == -0.1);
  CHECK(v[1] == -0.1);
}

TEST_CASE("solve writes the optimum report and reruns byte-identically") {
  const auto& dir = pipeline_dir();
  REQUIRE(run("solve --out " + dir.string() + " --problem 1 --omega 0.5") == 0);
  const auto report_path = dir / "optimum.txt";
  const std::string report = slurp(report_path);
  for (const char* key : {"x1 =", "x2 =", "mu1 =", "sigma1 =", "mu2 =", "sigma2 =",
                          "objective =", "feasible = true"}) {
    CHECK(report.find(key) != std::string::npos);
  }
  REQUIRE(run("solve --out " + dir.string() + " --problem 1 --omega 0.5") == 0);
  CHECK(slurp(report_path) == report);
}

TEST_CASE("solve round-trips through the serialized effective config") {
  const auto& dir = pipeline_dir();
  REQUIRE(run("solve --out " + dir.string() + " --problem 2 --bound 0.27") == 0);
  const std::string report = slurp(dir / "optimum.txt");
  const auto cfg_copy = dir / "rerun.cfg";
  fs::copy_file(dir / "effective_config.cfg", cfg_copy,
                fs::copy_options::overwrite_existing);
  REQUIRE(run("solve --config " + cfg_copy.string()) == 0);
  CHECK(slurp(dir / "optimum.txt") == report);
}

TEST_CASE("infeasible problems exit with code 3") {
  const auto& dir = pipeline_dir();
  CHECK(run("solve --out " + dir.string() + " --problem 2 --bound 0.15") == 3);
  CHECK(run("solve --out " + dir.string() +
            " --problem 1 --omega 0.5 --sigma-bounds 1e-7,1e-7") == 3);
  const std::string report = slurp(dir / "optimum.txt");
  CHECK(report.find("feasible = false") != std::string::npos);
}

TEST_CASE("pareto emits a non-dominated front CSV") {
  const auto& dir = pipeline_dir();
  const auto cfg = dir / "pareto.cfg";
  {
    std::ofstream out(cfg);
    out << "[problem]\npareto_points = 7\n[output]\ndir = " << dir.string() << "\n";
  }
  REQUIRE(run("pareto --config " + cfg.string()) == 0);
  const auto csv = dir / "pareto.csv";
  std::ifstream in(csv);
  std::string line;
  std::getline(in, line);
  CHECK(line == "omega_or_bound,x1,x2,mu1,sigma1,mu2,sigma2,objective,feasible");
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) rows.push_back(split_row(line));
  REQUIRE(rows.size() >= 2);
  REQUIRE(rows.size() <= 7);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    CHECK(rows[i][3] >= rows[i - 1][3]);         // sorted by mu1
    CHECK(rows[i][5] <= rows[i - 1][5] + 1e-12); // mu2 falls along the front
  }
}

TEST_CASE("bound sweep rows are monotone in the worst-case value") {
  const auto& dir = pipeline_dir();
  const auto cfg = dir / "sweep.cfg";
  {
    std::ofstream out(cfg);
    out << "[problem]\nkind = 2\nbound_min = 0.24\nbound_max = 0.45\nbound_count = 4\n"
        << "[output]\ndir = " << dir.string() << "\n";
  }
  REQUIRE(run("bound-sweep --config " + cfg.string()) == 0);
  std::ifstream in(dir / "bound_sweep.csv");
  std::string line;
  std::getline(in, line);
  double prev = 1e300;
  int rows = 0;
  while (std::getline(in, line)) {
    const auto v = split_row(line);
    REQUIRE(v.size() == 9);
    if (v[8] == 1.0) {
      CHECK(v[7] <= prev + 1e-9);
      prev = v[7];
    }
    ++rows;
  }
  CHECK(rows == 4);
}

TEST_CASE("config parse failures exit with the input-error code") {
  const auto dir = fresh_dir("bad_config");
  const auto cfg = dir / "bad.cfg";
  {
    std::ofstream out(cfg);
    out << "[gpr]\nbogus_key = 1\n";
  }
  CHECK(run("fit --config " + cfg.string()) == 2);
  {
    std::ofstream out(cfg);
    out << "[nosuchsection]\n";
  }
  CHECK(run("fit --config " + cfg.string()) == 2);
  CHECK(run("fit --config /nonexistent/path.cfg") == 2);
  CHECK(run("solve --grid nonsense") == 2);
}

TEST_CASE("validate passes and reports per-case lines") {
  const auto dir = fresh_dir("validate");
  const std::string log = (dir / "log.txt").string();
  const int status = std::system(
      (kBin + " validate --out " + dir.string() + " > " + log + " 2>&1").c_str());
  CHECK(WEXITSTATUS(status) == 0);
  const std::string text = slurp(log);
  CHECK(text.find("[PASS] linear a=1 b=1") != std::string::npos);
  CHECK(text.find("[PASS] linear a=1 b=2") != std::string::npos);
  CHECK(text.find("[PASS] nonlinear PCE order 3 vs MC 1e6") != std::string::npos);
  CHECK(text.find("[PASS] MC convergence") != std::string::npos);
  CHECK(text.find("[PASS] PCE order convergence") != std::string::npos);
  CHECK(text.find("[FAIL]") == std::string::npos);

  // convergence tables land next to the run as CSV artifacts
  const std::string pce_csv = slurp(dir / "pce_convergence.csv");
  CHECK(pce_csv.find("order,mean,std,dmean,dstd") == 0);
  CHECK(count_data_rows(dir / "pce_convergence.csv") == 8);
  CHECK(count_data_rows(dir / "mc_convergence.csv") == 4);
}
