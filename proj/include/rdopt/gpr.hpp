#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

#include "rdopt/dataset.hpp"

namespace rdopt {

/// Squared-exponential kernel hyperparameters plus the observation noise.
struct KernelParams {
  double sigma_f = 1.0;  // signal amplitude, > 0
  double l = 0.5;        // length scale, > 0
  double alpha = 1e-12;  // observation-noise variance, >= 0

  void validate() const;  // throws ValidationError
};

struct Prediction {
  double mean = 0.0;
  double std = 0.0;
};

/// sigma_f^2 * exp(-|p-q|^2 / (2 l^2))
double se_kernel(const DesignPoint& p, const DesignPoint& q,
                 const KernelParams& params);

/// Exact GPR posterior for one scalar objective. Immutable once fitted;
/// predictions are safe to run concurrently.
class GprModel {
 public:
  // Builds K, factorizes K + alpha*I (escalating jitter 1e-12..1e-6 if the
  // factorization fails), and precomputes the weight vector. Requires n >= 2
  // and no duplicate inputs within 1e-12.
  static GprModel fit(const std::vector<DesignPoint>& inputs,
                      const std::vector<double>& targets,
                      const KernelParams& params);

  double predict_mean(const DesignPoint& p) const;
  double predict_std(const DesignPoint& p) const;
  Prediction predict(const DesignPoint& p) const;

  double log_marginal_likelihood() const { return lml_; }
  double jitter() const { return jitter_; }
  int n() const { return static_cast<int>(inputs_.size()); }
  const KernelParams& params() const { return params_; }
  const std::vector<DesignPoint>& inputs() const { return inputs_; }
  const std::vector<double>& targets() const { return targets_; }
  const Eigen::MatrixXd& factor() const { return chol_lower_; }
  const Eigen::VectorXd& weights() const { return weights_; }

  // Self-describing key/value + array text document; loading reproduces
  // predictions to 1e-12.
  void save(const std::string& path) const;
  static GprModel load(const std::string& path);

 private:
  GprModel() = default;

  std::vector<DesignPoint> inputs_;
  std::vector<double> targets_;
  KernelParams params_;
  Eigen::MatrixXd chol_lower_;  // L with L L^T = K + (alpha + jitter) I
  Eigen::VectorXd weights_;     // (K + alpha I)^{-1} y
  double jitter_ = 0.0;
  double lml_ = 0.0;

  Eigen::VectorXd kernel_vector(const DesignPoint& p) const;
};

struct HyperSearchOptions {
  int starts = 8;
  double l_min = 0.05, l_max = 2.0;
  double sigma_f_min = 0.1, sigma_f_max = 10.0;
  std::uint64_t seed = 0;  // jitters the log-uniform start grid
};

// Maximizes the log marginal likelihood over (sigma_f, l) at fixed alpha with
// multi-start local ascent in log space. Ties within 1e-9 relative are broken
// by the smaller length scale. Requires n >= 5.
KernelParams select_hyperparameters(const std::vector<DesignPoint>& inputs,
                                    const std::vector<double>& targets,
                                    double alpha,
                                    const HyperSearchOptions& opts = {});

struct AlphaSensitivityRow {
  double alpha = 0.0;
  double mean_norm = 0.0;  // (1/N) sqrt(sum mean^2) over the grid
  double std_norm = 0.0;
  bool ok = false;
  std::string message;  // fit failure, when !ok
};

// Refits at each alpha (same sigma_f, l) and records grid norms of the
// posterior mean and std. Per-row failures are recorded, not thrown.
std::vector<AlphaSensitivityRow> alpha_sensitivity(
    const std::vector<DesignPoint>& inputs, const std::vector<double>& targets,
    const KernelParams& params, const std::vector<double>& alphas,
    const std::vector<DesignPoint>& grid);

}  // namespace rdopt
