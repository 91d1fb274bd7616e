#include "rdopt/gpr.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "rdopt/csv.hpp"
#include "rdopt/errors.hpp"
#include "rdopt/optim.hpp"
#include "rdopt/util.hpp"

namespace rdopt {

void KernelParams::validate() const {
  if (!(std::isfinite(sigma_f) && sigma_f > 0.0)) {
    throw ValidationError("KernelParams: sigma_f must be positive and finite");
  }
  if (!(std::isfinite(l) && l > 0.0)) {
    throw ValidationError("KernelParams: l must be positive and finite");
  }
  if (!(std::isfinite(alpha) && alpha >= 0.0)) {
    throw ValidationError("KernelParams: alpha must be >= 0 and finite");
  }
}

double se_kernel(const DesignPoint& p, const DesignPoint& q,
                 const KernelParams& params) {
  params.validate();
  const double d1 = p.x1 - q.x1;
  const double d2 = p.x2 - q.x2;
  return params.sigma_f * params.sigma_f *
         std::exp(-(d1 * d1 + d2 * d2) / (2.0 * params.l * params.l));
}

namespace {

Eigen::MatrixXd kernel_matrix(const std::vector<DesignPoint>& pts,
                              const KernelParams& params) {
  const int n = static_cast<int>(pts.size());
  const double sf2 = params.sigma_f * params.sigma_f;
  const double inv2l2 = 1.0 / (2.0 * params.l * params.l);
  Eigen::MatrixXd K(n, n);
  for (int i = 0; i < n; ++i) {
    K(i, i) = sf2;
    for (int j = i + 1; j < n; ++j) {
      const double d1 = pts[static_cast<std::size_t>(i)].x1 - pts[static_cast<std::size_t>(j)].x1;
      const double d2 = pts[static_cast<std::size_t>(i)].x2 - pts[static_cast<std::size_t>(j)].x2;
      const double v = sf2 * std::exp(-(d1 * d1 + d2 * d2) * inv2l2);
      K(i, j) = v;
      K(j, i) = v;
    }
  }
  return K;
}

// LLT of K + (alpha + jitter) I, escalating jitter 1e-12 * 10^k up to 1e-6.
// Returns the jitter that succeeded.
double factorize(const Eigen::MatrixXd& K, double alpha, Eigen::LLT<Eigen::MatrixXd>& llt) {
  Eigen::MatrixXd A = K;
  A.diagonal().array() += alpha;
  llt.compute(A);
  if (llt.info() == Eigen::Success) return 0.0;

  for (double jitter = 1e-12; jitter <= 1e-6 * (1.0 + 1e-12); jitter *= 10.0) {
    A = K;
    A.diagonal().array() += alpha + jitter;
    llt.compute(A);
    if (llt.info() == Eigen::Success) return jitter;
  }
  throw NumericalError(
      "GPR factorization failed: K + alpha I not positive definite even with jitter 1e-6");
}

}  // namespace

GprModel GprModel::fit(const std::vector<DesignPoint>& inputs,
                       const std::vector<double>& targets,
                       const KernelParams& params) {
  params.validate();
  const int n = static_cast<int>(inputs.size());
  if (n < 2) throw ValidationError("GprModel::fit: need at least 2 samples");
  if (targets.size() != inputs.size()) {
    throw ValidationError("GprModel::fit: inputs/targets size mismatch");
  }
  for (const auto& p : inputs) {
    if (!std::isfinite(p.x1) || !std::isfinite(p.x2)) {
      throw ValidationError("GprModel::fit: non-finite input point");
    }
  }
  for (double y : targets) {
    if (!std::isfinite(y)) throw ValidationError("GprModel::fit: non-finite target");
  }
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (std::abs(inputs[static_cast<std::size_t>(i)].x1 - inputs[static_cast<std::size_t>(j)].x1) <= 1e-12 &&
          std::abs(inputs[static_cast<std::size_t>(i)].x2 - inputs[static_cast<std::size_t>(j)].x2) <= 1e-12) {
        throw ValidationError("GprModel::fit: duplicate inputs at rows " +
                              std::to_string(i) + " and " + std::to_string(j));
      }
    }
  }

  GprModel m;
  m.inputs_ = inputs;
  m.targets_ = targets;
  m.params_ = params;

  const Eigen::MatrixXd K = kernel_matrix(inputs, params);
  Eigen::LLT<Eigen::MatrixXd> llt;
  m.jitter_ = factorize(K, params.alpha, llt);
  m.chol_lower_ = llt.matrixL();

  const Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(targets.data(), n);
  m.weights_ = llt.solve(y);

  double log_det = 0.0;
  for (int i = 0; i < n; ++i) log_det += std::log(m.chol_lower_(i, i));
  m.lml_ = -0.5 * y.dot(m.weights_) - log_det -
           0.5 * static_cast<double>(n) * std::log(2.0 * M_PI);
  return m;
}

Eigen::VectorXd GprModel::kernel_vector(const DesignPoint& p) const {
  const int n = this->n();
  const double sf2 = params_.sigma_f * params_.sigma_f;
  const double inv2l2 = 1.0 / (2.0 * params_.l * params_.l);
  Eigen::VectorXd k(n);
  for (int i = 0; i < n; ++i) {
    const double d1 = p.x1 - inputs_[static_cast<std::size_t>(i)].x1;
    const double d2 = p.x2 - inputs_[static_cast<std::size_t>(i)].x2;
    k(i) = sf2 * std::exp(-(d1 * d1 + d2 * d2) * inv2l2);
  }
  return k;
}

double GprModel::predict_mean(const DesignPoint& p) const {
  return kernel_vector(p).dot(weights_);
}

double GprModel::predict_std(const DesignPoint& p) const {
  const Eigen::VectorXd k = kernel_vector(p);
  const Eigen::VectorXd v =
      chol_lower_.triangularView<Eigen::Lower>().solve(k);
  const double var = params_.sigma_f * params_.sigma_f - v.squaredNorm();
  return var > 0.0 ? std::sqrt(var) : 0.0;  // clamp round-off
}

Prediction GprModel::predict(const DesignPoint& p) const {
  return {predict_mean(p), predict_std(p)};
}

void GprModel::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write model file: " + path);
  out << "rdopt-gpr-model 1\n";
  out << "n = " << n() << "\n";
  out << "sigma_f = " << fmt17(params_.sigma_f) << "\n";
  out << "l = " << fmt17(params_.l) << "\n";
  out << "alpha = " << fmt17(params_.alpha) << "\n";
  out << "inputs:\n";
  for (const auto& p : inputs_) {
    out << fmt17(p.x1) << " " << fmt17(p.x2) << "\n";
  }
  out << "targets:\n";
  for (double y : targets_) out << fmt17(y) << "\n";
  out << "weights:\n";
  for (int i = 0; i < n(); ++i) out << fmt17(weights_(i)) << "\n";
  out << "end\n";
}

GprModel GprModel::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open model file: " + path);

  std::string line;
  auto next_line = [&](const char* what) {
    if (!std::getline(in, line)) {
      throw ParseError(path + ": truncated model file, expected " + what);
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
  };

  if (next_line("magic") != "rdopt-gpr-model 1") {
    throw ParseError(path + ": not a gpr model file");
  }
  auto read_kv = [&](const char* key) {
    next_line(key);
    std::istringstream ss(line);
    std::string k, eq;
    double v = 0.0;
    ss >> k >> eq >> v;
    if (k != key || eq != "=" || ss.fail()) {
      throw ParseError(path + ": expected '" + key + " = <value>', got '" + line + "'");
    }
    return v;
  };

  const int n = static_cast<int>(read_kv("n"));
  KernelParams params;
  params.sigma_f = read_kv("sigma_f");
  params.l = read_kv("l");
  params.alpha = read_kv("alpha");

  if (next_line("inputs:") != "inputs:") throw ParseError(path + ": expected 'inputs:'");
  std::vector<DesignPoint> inputs;
  inputs.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    std::istringstream ss(next_line("input row"));
    DesignPoint p;
    ss >> p.x1 >> p.x2;
    if (ss.fail()) throw ParseError(path + ": bad input row " + std::to_string(i));
    inputs.push_back(p);
  }
  if (next_line("targets:") != "targets:") throw ParseError(path + ": expected 'targets:'");
  std::vector<double> targets(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    std::istringstream ss(next_line("target row"));
    ss >> targets[static_cast<std::size_t>(i)];
    if (ss.fail()) throw ParseError(path + ": bad target row " + std::to_string(i));
  }
  if (next_line("weights:") != "weights:") throw ParseError(path + ": expected 'weights:'");
  Eigen::VectorXd weights(n);
  for (int i = 0; i < n; ++i) {
    std::istringstream ss(next_line("weight row"));
    ss >> weights(i);
    if (ss.fail()) throw ParseError(path + ": bad weight row " + std::to_string(i));
  }

  // Refit deterministically from the stored raw data, then adopt the stored
  // weight vector so the posterior mean round-trips exactly.
  GprModel m = fit(inputs, targets, params);
  m.weights_ = weights;
  return m;
}

KernelParams select_hyperparameters(const std::vector<DesignPoint>& inputs,
                                    const std::vector<double>& targets,
                                    double alpha,
                                    const HyperSearchOptions& opts) {
  if (inputs.size() < 5) {
    throw ValidationError("select_hyperparameters: need at least 5 samples");
  }
  if (!(std::isfinite(alpha) && alpha >= 0.0)) {
    throw ValidationError("select_hyperparameters: alpha must be >= 0");
  }

  const double neg_inf = -std::numeric_limits<double>::infinity();
  auto lml_at = [&](const std::array<double, 2>& log_params) {
    KernelParams p;
    p.l = std::exp(log_params[0]);
    p.sigma_f = std::exp(log_params[1]);
    p.alpha = alpha;
    p.l = std::clamp(p.l, opts.l_min, opts.l_max);
    p.sigma_f = std::clamp(p.sigma_f, opts.sigma_f_min, opts.sigma_f_max);
    try {
      return GprModel::fit(inputs, targets, p).log_marginal_likelihood();
    } catch (const NumericalError&) {
      return neg_inf;
    }
  };

  // Log-uniform start grid over the search box, optionally seed-jittered.
  std::mt19937_64 rng(opts.seed);
  std::vector<std::array<double, 2>> starts;
  const int n_l = std::max(2, (opts.starts + 1) / 2);
  const int n_s = std::max(2, opts.starts / n_l);
  for (int i = 0; i < n_l && static_cast<int>(starts.size()) < opts.starts; ++i) {
    for (int j = 0; j < n_s && static_cast<int>(starts.size()) < opts.starts; ++j) {
      const double fl = (static_cast<double>(i) + 0.5) / static_cast<double>(n_l);
      const double fs = (static_cast<double>(j) + 0.5) / static_cast<double>(n_s);
      double log_l = std::log(opts.l_min) + fl * (std::log(opts.l_max) - std::log(opts.l_min));
      double log_s = std::log(opts.sigma_f_min) +
                     fs * (std::log(opts.sigma_f_max) - std::log(opts.sigma_f_min));
      if (opts.seed != 0) {
        log_l += 0.05 * (2.0 * uniform01(rng) - 1.0);
        log_s += 0.05 * (2.0 * uniform01(rng) - 1.0);
      }
      starts.push_back({log_l, log_s});
    }
  }

  struct Candidate {
    double lml;
    double l;
    double sigma_f;
  };
  std::vector<Candidate> found;
  for (const auto& s0 : starts) {
    const auto res = nelder_mead([&](const std::array<double, 2>& x) { return -lml_at(x); },
                                 s0, 0.4);
    if (!std::isfinite(res.value)) continue;
    found.push_back({-res.value,
                     std::clamp(std::exp(res.x[0]), opts.l_min, opts.l_max),
                     std::clamp(std::exp(res.x[1]), opts.sigma_f_min, opts.sigma_f_max)});
  }
  if (found.empty()) {
    throw OptimizationError(
        "select_hyperparameters: all " + std::to_string(starts.size()) +
        " starts failed (likelihood not finite anywhere; alpha = " + fmt17(alpha) + ")");
  }

  // Highest likelihood wins; near-ties go to the smaller length scale.
  std::sort(found.begin(), found.end(), [](const Candidate& a, const Candidate& b) {
    return a.lml > b.lml;
  });
  Candidate best = found.front();
  const double tol = 1e-9 * std::max(1.0, std::abs(best.lml));
  for (const auto& c : found) {
    if (best.lml - c.lml <= tol && c.l < best.l) best = c;
  }

  KernelParams out;
  out.sigma_f = best.sigma_f;
  out.l = best.l;
  out.alpha = alpha;
  return out;
}

std::vector<AlphaSensitivityRow> alpha_sensitivity(
    const std::vector<DesignPoint>& inputs, const std::vector<double>& targets,
    const KernelParams& params, const std::vector<double>& alphas,
    const std::vector<DesignPoint>& grid) {
  for (std::size_t i = 0; i + 1 < alphas.size(); ++i) {
    if (!(alphas[i] < alphas[i + 1])) {
      throw ValidationError("alpha_sensitivity: alphas must be ascending");
    }
  }
  for (double a : alphas) {
    if (!(a > 0.0)) throw ValidationError("alpha_sensitivity: alphas must be positive");
  }

  std::vector<AlphaSensitivityRow> rows;
  rows.reserve(alphas.size());
  for (double a : alphas) {
    AlphaSensitivityRow row;
    row.alpha = a;
    try {
      KernelParams p = params;
      p.alpha = a;
      const GprModel m = GprModel::fit(inputs, targets, p);
      std::vector<double> means(grid.size()), stds(grid.size());
      for (std::size_t g = 0; g < grid.size(); ++g) {
        means[g] = m.predict_mean(grid[g]);
        stds[g] = m.predict_std(grid[g]);
      }
      row.mean_norm = grid_norm(means);
      row.std_norm = grid_norm(stds);
      row.ok = true;
    } catch (const std::exception& e) {
      row.ok = false;
      row.message = e.what();
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace rdopt
