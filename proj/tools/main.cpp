#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "rdopt/config.hpp"
#include "rdopt/csv.hpp"
#include "rdopt/dataset.hpp"
#include "rdopt/errors.hpp"
#include "rdopt/gpr.hpp"
#include "rdopt/pce.hpp"
#include "rdopt/robust_opt.hpp"
#include "rdopt/util.hpp"

namespace fs = std::filesystem;
using namespace rdopt;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidationFailed = 1;
constexpr int kExitInputError = 2;
constexpr int kExitInfeasible = 3;

struct CliOverrides {
  std::optional<std::string> config_path;
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<double> omega;
  std::optional<int> order;
  std::optional<double> ex;
  std::optional<double> alpha;
  std::optional<std::string> grid;
  std::optional<int> problem;
  std::optional<double> bound;
  std::optional<std::string> sigma_bounds;
};

void add_common_options(CLI::App* cmd, CliOverrides& o) {
  cmd->add_option("--config", o.config_path, "config file (key = value sections)");
  cmd->add_option("--out", o.out_dir, "output directory");
  cmd->add_option("--seed", o.seed, "dataset seed");
  cmd->add_option("--omega", o.omega, "problem-1 weight in [0,1]");
  cmd->add_option("--order", o.order, "PCE order");
  cmd->add_option("--ex", o.ex, "95% input half-width e_x");
  cmd->add_option("--alpha", o.alpha, "GPR observation-noise variance");
  cmd->add_option("--grid", o.grid, "propagation grid, e.g. 100x100");
  cmd->add_option("--problem", o.problem, "problem formulation: 1, 2 or 3");
  cmd->add_option("--bound", o.bound, "upper bound f_bar for problems 2/3");
  cmd->add_option("--sigma-bounds", o.sigma_bounds, "sigma1,sigma2 bounds for problem 1");
}

RunConfig effective_config(const CliOverrides& o) {
  RunConfig c;
  if (o.config_path) c = parse_config_file(*o.config_path);
  if (o.out_dir) c.out_dir = *o.out_dir;
  if (o.seed) c.seed = *o.seed;
  if (o.omega) c.omega = *o.omega;
  if (o.order) c.order = *o.order;
  if (o.ex) c.ex = *o.ex;
  if (o.alpha) c.alpha = *o.alpha;
  if (o.problem) c.problem = *o.problem;
  if (o.bound) c.bound = *o.bound;
  if (o.grid) {
    const auto x = o.grid->find('x');
    if (x == std::string::npos) throw ValidationError("--grid expects NxM, e.g. 100x100");
    c.grid_n1 = std::stoi(o.grid->substr(0, x));
    c.grid_n2 = std::stoi(o.grid->substr(x + 1));
  }
  if (o.sigma_bounds) {
    const auto comma = o.sigma_bounds->find(',');
    if (comma == std::string::npos) {
      throw ValidationError("--sigma-bounds expects two comma-separated values");
    }
    c.sigma1_bound = std::stod(o.sigma_bounds->substr(0, comma));
    c.sigma2_bound = std::stod(o.sigma_bounds->substr(comma + 1));
  }
  return c;
}

void prepare_out_dir(const RunConfig& c) {
  fs::create_directories(c.out_dir);
  write_config_file(c.out_dir + "/effective_config.cfg", c);
}

struct FittedModels {
  GprModel f1;
  GprModel f2;
};

FittedModels load_models(const RunConfig& c) {
  return {GprModel::load(c.out_dir + "/model_f1.txt"),
          GprModel::load(c.out_dir + "/model_f2.txt")};
}

int cmd_generate(const RunConfig& c) {
  if (!c.synthetic) {
    throw ValidationError("generate requires dataset.synthetic = true");
  }
  prepare_out_dir(c);

  const auto design = generate_design(c.n_boundary, c.n_interior, c.seed);
  SampleSet set;
  set.map = default_physical_map();
  set.bounds_from_metadata = true;
  set.records.reserve(design.size());
  for (const auto& p : design) {
    const auto [y1, y2] = synthetic_cht(p);
    set.records.push_back(denormalize(SampleRecord{p, y1, y2}, set.map));
  }
  const std::string path = c.resolved_dataset_path();
  const fs::path parent = fs::path(path).parent_path();
  if (!parent.empty()) fs::create_directories(parent);
  save_samples(path, set);
  std::cout << "wrote " << set.records.size() << " samples to " << path << "\n";
  return kExitOk;
}

int cmd_fit(const RunConfig& c) {
  prepare_out_dir(c);
  const SampleSet set = load_samples(c.resolved_dataset_path());

  std::vector<DesignPoint> points;
  std::vector<double> y1, y2;
  points.reserve(set.records.size());
  for (const auto& r : set.records) {
    const SampleRecord n = normalize(r, set.map);
    points.push_back(n.point);
    y1.push_back(n.y1);
    y2.push_back(n.y2);
  }

  KernelParams p1, p2;
  if (c.hyperparameters == "fixed") {
    p1 = {c.sigma_f, c.l, c.alpha};
    p2 = p1;
  } else {
    p1 = select_hyperparameters(points, y1, c.alpha);
    p2 = select_hyperparameters(points, y2, c.alpha);
  }
  const GprModel m1 = GprModel::fit(points, y1, p1);
  const GprModel m2 = GprModel::fit(points, y2, p2);
  m1.save(c.out_dir + "/model_f1.txt");
  m2.save(c.out_dir + "/model_f2.txt");

  auto max_residual = [&points](const GprModel& m, const std::vector<double>& y) {
    double worst = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      worst = std::max(worst, std::abs(m.predict_mean(points[i]) - y[i]));
    }
    return worst;
  };
  const double r1 = max_residual(m1, y1);
  const double r2 = max_residual(m2, y2);

  std::ofstream report(c.out_dir + "/fit_report.txt");
  report << "samples = " << set.records.size() << "\n";
  report << "alpha = " << fmt17(c.alpha) << "\n";
  report << "hyperparameters = " << c.hyperparameters << "\n";
  report << "f1.sigma_f = " << fmt17(p1.sigma_f) << "\n";
  report << "f1.l = " << fmt17(p1.l) << "\n";
  report << "f1.lml = " << fmt17(m1.log_marginal_likelihood()) << "\n";
  report << "f1.jitter = " << fmt17(m1.jitter()) << "\n";
  report << "f1.max_interp_residual = " << fmt17(r1) << "\n";
  report << "f2.sigma_f = " << fmt17(p2.sigma_f) << "\n";
  report << "f2.l = " << fmt17(p2.l) << "\n";
  report << "f2.lml = " << fmt17(m2.log_marginal_likelihood()) << "\n";
  report << "f2.jitter = " << fmt17(m2.jitter()) << "\n";
  report << "f2.max_interp_residual = " << fmt17(r2) << "\n";
  std::cout << "fit complete: residuals " << fmt17(r1) << " / " << fmt17(r2) << "\n";
  return kExitOk;
}

int cmd_propagate(const RunConfig& c) {
  prepare_out_dir(c);
  const FittedModels m = load_models(c);
  const ProbabilisticSurrogate surrogate(m.f1, m.f2,
                                         InputUncertainty::from_half_width(c.ex),
                                         c.order);

  const bool extended = c.domain == "extended";
  const double lo = extended ? -0.1 : 0.0;
  const double hi = extended ? 1.1 : 1.0;
  const auto g1 = linspace(lo, hi, c.grid_n1);
  const auto g2 = linspace(lo, hi, c.grid_n2);

  std::ofstream out(c.out_dir + "/surface.csv");
  out << "x1,x2,mu1,lo1,hi1,mu2,lo2,hi2\n";
  for (double a : g1) {
    for (double b : g2) {
      const SurrogateStats st = surrogate.evaluate({a, b});
      out << fmt17(a) << "," << fmt17(b) << "," << fmt17(st.mu1) << ","
          << fmt17(st.mu1 - 2.0 * st.sigma1) << "," << fmt17(st.mu1 + 2.0 * st.sigma1)
          << "," << fmt17(st.mu2) << "," << fmt17(st.mu2 - 2.0 * st.sigma2) << ","
          << fmt17(st.mu2 + 2.0 * st.sigma2) << "\n";
    }
  }
  std::cout << "wrote " << c.grid_n1 * c.grid_n2 << " rows to " << c.out_dir
            << "/surface.csv\n";
  return kExitOk;
}

ProblemSpec spec_from_config(const RunConfig& c) {
  ProblemSpec spec;
  spec.k_sigma = c.k_sigma;
  switch (c.problem) {
    case 1:
      spec.kind = ProblemKind::Weighted;
      spec.omega = c.omega;
      spec.sigma1_bound = c.sigma1_bound;
      spec.sigma2_bound = c.sigma2_bound;
      break;
    case 2:
      spec.kind = ProblemKind::WorstCaseF2;
      spec.f_bar = c.bound;
      break;
    case 3:
      spec.kind = ProblemKind::WorstCaseF1;
      spec.f_bar = c.bound;
      break;
    default:
      throw ValidationError("problem must be 1, 2 or 3");
  }
  return spec;
}

int cmd_solve(const RunConfig& c) {
  prepare_out_dir(c);
  const FittedModels m = load_models(c);
  const ProbabilisticSurrogate surrogate(m.f1, m.f2,
                                         InputUncertainty::from_half_width(c.ex),
                                         c.order);
  const ProblemSpec spec = spec_from_config(c);
  const RobustOptimum opt = solve(surrogate, spec);

  std::ofstream out(c.out_dir + "/optimum.txt");
  auto emit = [&](std::ostream& os) {
    os << "problem = " << c.problem << "\n";
    if (c.problem == 1) {
      os << "omega = " << fmt17(c.omega) << "\n";
      os << "sigma1_bound = " << (std::isinf(c.sigma1_bound) ? "inf" : fmt17(c.sigma1_bound)) << "\n";
      os << "sigma2_bound = " << (std::isinf(c.sigma2_bound) ? "inf" : fmt17(c.sigma2_bound)) << "\n";
    } else {
      os << "bound = " << (std::isinf(c.bound) ? "inf" : fmt17(c.bound)) << "\n";
      os << "k_sigma = " << fmt17(c.k_sigma) << "\n";
    }
    os << "x1 = " << fmt17(opt.x_star.x1) << "\n";
    os << "x2 = " << fmt17(opt.x_star.x2) << "\n";
    os << "objective = " << fmt17(opt.objective_value) << "\n";
    os << "mu1 = " << fmt17(opt.stats.mu1) << "\n";
    os << "sigma1 = " << fmt17(opt.stats.sigma1) << "\n";
    os << "mu2 = " << fmt17(opt.stats.mu2) << "\n";
    os << "sigma2 = " << fmt17(opt.stats.sigma2) << "\n";
    os << "feasible = " << (opt.feasible ? "true" : "false") << "\n";
    os << "starts = " << opt.starts_tried << "\n";
    os << "max_violation = " << fmt17(opt.best_infeasibility) << "\n";
  };
  emit(out);
  emit(std::cout);
  return opt.feasible ? kExitOk : kExitInfeasible;
}

int cmd_pareto(const RunConfig& c) {
  prepare_out_dir(c);
  const FittedModels m = load_models(c);
  const ProbabilisticSurrogate surrogate(m.f1, m.f2,
                                         InputUncertainty::from_half_width(c.ex),
                                         c.order);
  if (c.pareto_points < 1) throw ValidationError("pareto_points must be >= 1");
  const auto omegas = linspace(0.0, 1.0, c.pareto_points);
  const auto front = pareto_sweep(surrogate, omegas, c.sigma1_bound, c.sigma2_bound);

  std::ofstream out(c.out_dir + "/pareto.csv");
  out << "omega_or_bound,x1,x2,mu1,sigma1,mu2,sigma2,objective,feasible\n";
  for (const auto& p : front) {
    const double objective = p.omega * p.mu1 + (1.0 - p.omega) * p.mu2;
    out << fmt17(p.omega) << "," << fmt17(p.x_star.x1) << "," << fmt17(p.x_star.x2)
        << "," << fmt17(p.mu1) << "," << fmt17(p.sigma1) << "," << fmt17(p.mu2)
        << "," << fmt17(p.sigma2) << "," << fmt17(objective) << ",1\n";
  }
  std::cout << "front size " << front.size() << " of " << omegas.size()
            << " weights\n";
  if (front.empty()) {
    std::cerr << "no feasible weight: sigma bounds (" << fmt17(c.sigma1_bound)
              << ", " << fmt17(c.sigma2_bound) << ") exclude all of the domain\n";
    return kExitInfeasible;
  }
  return kExitOk;
}

int cmd_bound_sweep(const RunConfig& c) {
  prepare_out_dir(c);
  const FittedModels m = load_models(c);
  const ProbabilisticSurrogate surrogate(m.f1, m.f2,
                                         InputUncertainty::from_half_width(c.ex),
                                         c.order);
  if (c.problem != 2 && c.problem != 3) {
    throw ValidationError("bound-sweep requires problem 2 or 3");
  }
  if (c.bound_count < 1) throw ValidationError("bound_count must be >= 1");
  const auto bounds = linspace(c.bound_min, c.bound_max, c.bound_count);
  const auto rows = bound_sweep(
      surrogate, c.problem == 2 ? ProblemKind::WorstCaseF2 : ProblemKind::WorstCaseF1,
      bounds, c.k_sigma);

  std::ofstream out(c.out_dir + "/bound_sweep.csv");
  out << "omega_or_bound,x1,x2,mu1,sigma1,mu2,sigma2,objective,feasible\n";
  int feasible_rows = 0;
  for (const auto& row : rows) {
    const auto& o = row.optimum;
    feasible_rows += o.feasible ? 1 : 0;
    out << fmt17(row.bound) << "," << fmt17(o.x_star.x1) << "," << fmt17(o.x_star.x2)
        << "," << fmt17(o.stats.mu1) << "," << fmt17(o.stats.sigma1) << ","
        << fmt17(o.stats.mu2) << "," << fmt17(o.stats.sigma2) << ","
        << fmt17(o.objective_value) << "," << (o.feasible ? 1 : 0) << "\n";
  }
  std::cout << feasible_rows << " of " << rows.size() << " bounds feasible\n";
  return feasible_rows > 0 ? kExitOk : kExitInfeasible;
}

struct ValidationCase {
  std::string name;
  bool pass = false;
  std::string detail;
};

int cmd_validate(const RunConfig& c) {
  prepare_out_dir(c);
  std::vector<ValidationCase> cases;

  // exact linear combinations of two normals
  auto linear_case = [&](double a, double b, double mu1, double mu2, double s1,
                         double s2, double want_mean, double want_std) {
    const auto p = project(
        [a, b](const DesignPoint& x) { return a * x.x1 + b * x.x2; },
        {mu1, mu2}, InputUncertainty::from_sigmas(s1, s2), 3);
    ValidationCase v;
    v.name = "linear a=" + fmt17(a) + " b=" + fmt17(b);
    const double em = std::abs(p.mean - want_mean);
    const double es = std::abs(p.std - want_std);
    v.pass = em < 1e-10 && es < 1e-10;
    v.detail = "mean " + fmt17(p.mean) + " (err " + fmt17(em) + "), std " +
               fmt17(p.std) + " (err " + fmt17(es) + "), tol 1e-10";
    cases.push_back(v);
  };
  linear_case(1, 1, 0.5, 0.7, 3, 4, 1.2, 5.0);
  linear_case(1, 2, 0.3, 0.5, 0.3, 0.2, 1.3, 0.5);

  const ScalarField nonlinear = [](const DesignPoint& x) {
    return std::sin(x.x1) / std::cos(x.x2) + x.x2 * x.x2;
  };
  const DesignPoint center{0.3, 0.5};
  const InputUncertainty unc = InputUncertainty::from_sigmas(0.3, 0.2);

  {
    const auto p = project(nonlinear, center, unc, 3);
    const auto mc = mc_propagate(nonlinear, center, unc, 1000000, 2024);
    ValidationCase v;
    v.name = "nonlinear PCE order 3 vs MC 1e6";
    const bool mean_ok = std::abs(p.mean - mc.mean) < 4.0 * mc.se_mean;
    const bool std_ok = std::abs(p.std - mc.std) < 4.0 * mc.se_std;
    v.pass = mean_ok && std_ok;
    v.detail = "pce (" + fmt17(p.mean) + ", " + fmt17(p.std) + "), mc (" +
               fmt17(mc.mean) + ", " + fmt17(mc.std) + "), tol 4 standard errors";
    cases.push_back(v);
  }

  {
    // Monte Carlo convergence on the exact linear case
    const ScalarField f = [](const DesignPoint& x) { return x.x1 + 2.0 * x.x2; };
    const InputUncertainty u = InputUncertainty::from_sigmas(0.3, 0.2);
    bool all_ok = true;
    std::string table = "\n  n, mean, std, se_mean";
    std::ofstream csv(c.out_dir + "/mc_convergence.csv");
    csv << "n,mean,std,se_mean\n";
    for (std::int64_t n : {1000, 10000, 100000, 1000000}) {
      const auto mc = mc_propagate(f, {0.3, 0.5}, u, n, 7);
      const bool ok = std::abs(mc.mean - 1.3) < 5.0 * mc.se_mean &&
                      std::abs(mc.std - 0.5) < 5.0 * mc.se_std;
      all_ok = all_ok && ok;
      table += "\n  " + std::to_string(n) + ", " + fmt17(mc.mean) + ", " +
               fmt17(mc.std) + ", " + fmt17(mc.se_mean) + (ok ? "" : "  <- off");
      csv << n << "," << fmt17(mc.mean) << "," << fmt17(mc.std) << ","
          << fmt17(mc.se_mean) << "\n";
    }
    ValidationCase v;
    v.name = "MC convergence to exact mean 1.3 / std 0.5";
    v.pass = all_ok;
    v.detail = "tol 5 standard errors per row" + table;
    cases.push_back(v);
  }

  {
    const auto rows = convergence_study(nonlinear, center, unc, {1, 2, 3, 4, 5, 6, 7, 8});
    std::ofstream csv(c.out_dir + "/pce_convergence.csv");
    csv << "order,mean,std,dmean,dstd\n";
    for (const auto& r : rows) {
      csv << r.order << "," << fmt17(r.mean) << "," << fmt17(r.std) << ","
          << fmt17(r.dmean) << "," << fmt17(r.dstd) << "\n";
    }
    const auto& high = rows.back();
    const auto& order3 = rows[2];
    const auto& order4 = rows[3];
    ValidationCase v;
    v.name = "PCE order convergence 1..8";
    const bool settled = order4.dstd < 0.01 * order4.std;
    const bool close = std::abs(order3.std - high.std) < 0.01 * high.std;
    v.pass = settled && close;
    std::string table = "\n  order, mean, std, dmean, dstd";
    for (const auto& r : rows) {
      table += "\n  " + std::to_string(r.order) + ", " + fmt17(r.mean) + ", " +
               fmt17(r.std) + ", " + fmt17(r.dmean) + ", " + fmt17(r.dstd);
    }
    v.detail = "order-4 dstd < 1%, order-3 std within 1% of order-8" + table;
    cases.push_back(v);
  }

  bool all = true;
  for (const auto& v : cases) {
    all = all && v.pass;
    std::cout << (v.pass ? "[PASS] " : "[FAIL] ") << v.name << ": " << v.detail
              << "\n";
  }
  return all ? kExitOk : kExitValidationFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"surrogate-based robust design optimization toolkit"};
  app.require_subcommand(1);

  CliOverrides o;
  auto* generate = app.add_subcommand("generate", "write a synthetic sample CSV");
  auto* fit = app.add_subcommand("fit", "fit the two GPR surrogates");
  auto* propagate = app.add_subcommand("propagate", "evaluate mu +/- 2 sigma over a grid");
  auto* solve = app.add_subcommand("solve", "solve one robust problem");
  auto* pareto = app.add_subcommand("pareto", "sweep omega and emit the Pareto front");
  auto* bound_sweep_cmd = app.add_subcommand("bound-sweep", "sweep the worst-case bound");
  auto* validate = app.add_subcommand("validate", "run the self-contained validation suite");
  for (auto* cmd : {generate, fit, propagate, solve, pareto, bound_sweep_cmd, validate}) {
    add_common_options(cmd, o);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInputError;
  }

  try {
    const RunConfig c = effective_config(o);
    if (generate->parsed()) return cmd_generate(c);
    if (fit->parsed()) return cmd_fit(c);
    if (propagate->parsed()) return cmd_propagate(c);
    if (solve->parsed()) return cmd_solve(c);
    if (pareto->parsed()) return cmd_pareto(c);
    if (bound_sweep_cmd->parsed()) return cmd_bound_sweep(c);
    if (validate->parsed()) return cmd_validate(c);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInputError;
  }
  return kExitInputError;
}
