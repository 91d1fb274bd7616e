#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

#include "rdopt/dataset.hpp"

namespace rdopt {

/// Gaussian input noise: 95% half-width e and per-input std sigma = e/2.
struct InputUncertainty {
  std::array<double, 2> e{0.05, 0.05};
  std::array<double, 2> sigma{0.025, 0.025};

  static InputUncertainty from_half_width(double e);
  static InputUncertainty from_half_widths(double e1, double e2);
  static InputUncertainty from_sigmas(double s1, double s2);

  void validate() const;
};

/// Orthonormal probabilists' Hermite polynomial value by three-term
/// recurrence. hermite_value(0,t)=1, hermite_value(1,t)=t,
/// hermite_value(2,0)=-1/sqrt(2).
double hermite_value(int degree, double t);

/// Total-degree Hermite product basis: multi-indices (k1,k2), k1+k2 <= order.
struct HermiteBasis {
  int order = 0;
  std::vector<std::array<int, 2>> terms;

  explicit HermiteBasis(int order);
  int size() const { return static_cast<int>(terms.size()); }
  double value(int term, double t1, double t2) const;
};

/// Nodes live in standardized (zero-mean, unit-variance) coordinates;
/// weights are positive and sum to 1.
struct QuadratureRule {
  int dim = 1;
  std::vector<double> nodes;  // flattened, node q at [q*dim, q*dim+dim)
  std::vector<double> weights;

  int size() const { return static_cast<int>(weights.size()); }
  double node(int q, int d) const { return nodes[static_cast<std::size_t>(q * dim + d)]; }
};

/// Tensor-product Gauss-Hermite rule with probabilist normalization;
/// 1-D exactness degree is 2*points_per_dim - 1.
QuadratureRule gauss_hermite_rule(int points_per_dim, int dim);

/// Result of one local propagation: coefficients over the Hermite basis and
/// the derived moments (mean = beta_00, std = sqrt(sum of the rest squared)).
struct PcePropagation {
  DesignPoint center;
  int order = 0;
  std::vector<double> coefficients;  // aligned with HermiteBasis(order).terms
  double mean = 0.0;
  double std = 0.0;
};

using ScalarField = std::function<double(const DesignPoint&)>;

/// Reusable pseudo-spectral projector for a fixed order: caches the rule
/// (points_per_dim = order + 1) and the weighted basis matrix.
class PceProjector {
 public:
  explicit PceProjector(int order);

  PcePropagation propagate(const ScalarField& f, const DesignPoint& center,
                           const InputUncertainty& unc) const;

  int order() const { return order_; }
  const QuadratureRule& rule() const { return rule_; }

 private:
  int order_;
  HermiteBasis basis_;
  QuadratureRule rule_;
  std::vector<double> weighted_basis_;  // [q*terms + k] = w_q * phi_k(node_q)

  friend PcePropagation project_with_noise(const ScalarField&,
                                           const ScalarField&,
                                           const DesignPoint&,
                                           const InputUncertainty&, int,
                                           std::uint64_t);
  PcePropagation propagate_values(const std::vector<double>& f_values,
                                  const DesignPoint& center) const;
  std::vector<double> evaluate_field(const ScalarField& f,
                                     const DesignPoint& center,
                                     const InputUncertainty& unc) const;
};

/// One-shot pseudo-spectral projection of f around center.
PcePropagation project(const ScalarField& f, const DesignPoint& center,
                       const InputUncertainty& unc, int order);

/// As project, with seeded Gaussian noise of std f_std added to every node
/// evaluation (used to show the surrogate's own uncertainty is negligible).
PcePropagation project_with_noise(const ScalarField& f_mean,
                                  const ScalarField& f_std,
                                  const DesignPoint& center,
                                  const InputUncertainty& unc, int order,
                                  std::uint64_t seed);

/// Least-squares coefficient path: f sampled at 2*terms seeded Gaussian
/// points, regressed against the basis matrix.
PcePropagation regress(const ScalarField& f, const DesignPoint& center,
                       const InputUncertainty& unc, int order,
                       std::uint64_t seed);

struct McResult {
  double mean = 0.0;
  double std = 0.0;      // (n-1)-denominator sample std
  double se_mean = 0.0;  // std / sqrt(n)
  double se_std = 0.0;   // delta-method from the fourth central moment
  std::int64_t n = 0;
};

/// Monte Carlo oracle: f at seeded Gaussian perturbations of center.
McResult mc_propagate(const ScalarField& f, const DesignPoint& center,
                      const InputUncertainty& unc, std::int64_t n_samples,
                      std::uint64_t seed);

struct ConvergenceRow {
  int order = 0;
  double mean = 0.0;
  double std = 0.0;
  double dmean = 0.0;  // |mean - previous mean|, 0 for the first row
  double dstd = 0.0;
};

std::vector<ConvergenceRow> convergence_study(const ScalarField& f,
                                              const DesignPoint& center,
                                              const InputUncertainty& unc,
                                              const std::vector<int>& orders);

}  // namespace rdopt
