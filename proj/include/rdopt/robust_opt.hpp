#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "rdopt/dataset.hpp"
#include "rdopt/gpr.hpp"
#include "rdopt/pce.hpp"

namespace rdopt {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct SurrogateStats {
  double mu1 = 0.0;
  double sigma1 = 0.0;
  double mu2 = 0.0;
  double sigma2 = 0.0;
};

/// GPR means composed with PCE propagation: the probabilistic model the
/// robust problems are solved on. Read-only after construction.
class ProbabilisticSurrogate {
 public:
  ProbabilisticSurrogate(const GprModel& f1, const GprModel& f2,
                         InputUncertainty unc, int order);

  SurrogateStats evaluate(const DesignPoint& x) const;

  const InputUncertainty& uncertainty() const { return unc_; }
  int order() const { return order_; }
  const GprModel& model_f1() const { return *f1_; }
  const GprModel& model_f2() const { return *f2_; }

 private:
  const GprModel* f1_;
  const GprModel* f2_;
  InputUncertainty unc_;
  int order_;
  PceProjector projector_;
};

enum class ProblemKind { Weighted, WorstCaseF2, WorstCaseF1 };

struct ProblemSpec {
  ProblemKind kind = ProblemKind::Weighted;
  double omega = 0.5;                  // Weighted only
  double sigma1_bound = kInf;          // Weighted only
  double sigma2_bound = kInf;          // Weighted only
  double f_bar = kInf;                 // WorstCase* only
  double k_sigma = 2.0;                // confidence multiplier

  void validate() const;
};

struct RobustOptimum {
  DesignPoint x_star;
  double objective_value = 0.0;
  SurrogateStats stats;
  bool feasible = false;
  int starts_tried = 0;
  double best_infeasibility = 0.0;  // max constraint violation at x_star
};

struct ParetoPoint {
  double omega = 0.0;
  DesignPoint x_star;
  double mu1 = 0.0;
  double mu2 = 0.0;
  double sigma1 = 0.0;
  double sigma2 = 0.0;
};

struct BoundSweepRow {
  double bound = 0.0;
  RobustOptimum optimum;
};

using Objective = std::function<double(const DesignPoint&)>;
// Constraint convention: g(x) <= 0 is feasible (with tolerance).
using Constraint = std::function<double(const DesignPoint&)>;

struct Box {
  double lo1 = 0.0, hi1 = 1.0;
  double lo2 = 0.0, hi2 = 1.0;

  DesignPoint clamp(const DesignPoint& p) const;
};

struct MinimizeResult {
  DesignPoint x;
  double value = 0.0;
  double max_violation = 0.0;
  bool feasible = false;
  int starts_tried = 0;
};

inline constexpr double kConstraintTol = 1e-9;   // strict-inequality slack
inline constexpr double kFeasibilityTol = 1e-6;  // reported feasibility

/// Multi-start penalty local search over the box: each start runs an
/// escalating quadratic-penalty Nelder-Mead with iterates projected into the
/// box. Ties within 1e-9 are broken by lexicographically smallest x.
MinimizeResult constrained_minimize(const Objective& objective,
                                    const std::vector<Constraint>& constraints,
                                    const Box& domain, int starts,
                                    std::uint64_t seed);

// minimize omega*mu1 + (1-omega)*mu2  s.t. sigma_i < bound_i
RobustOptimum solve_problem1(const ProbabilisticSurrogate& s, double omega,
                             double sigma1_bound = kInf,
                             double sigma2_bound = kInf);

// minimize mu2 + k*sigma2  s.t.  mu1 + k*sigma1 < f1_bar
RobustOptimum solve_problem2(const ProbabilisticSurrogate& s, double f1_bar,
                             double k_sigma = 2.0);

// minimize mu1 + k*sigma1  s.t.  mu2 + k*sigma2 < f2_bar
RobustOptimum solve_problem3(const ProbabilisticSurrogate& s, double f2_bar,
                             double k_sigma = 2.0);

RobustOptimum solve(const ProbabilisticSurrogate& s, const ProblemSpec& spec);

/// One weighted solve per omega; infeasible rows dropped, survivors filtered
/// to the non-dominated subset in (mu1, mu2) and sorted by mu1. Rows are
/// evaluated concurrently and merged in input order.
std::vector<ParetoPoint> pareto_sweep(const ProbabilisticSurrogate& s,
                                      const std::vector<double>& omegas,
                                      double sigma1_bound = kInf,
                                      double sigma2_bound = kInf);

std::vector<BoundSweepRow> bound_sweep(const ProbabilisticSurrogate& s,
                                       ProblemKind kind,
                                       const std::vector<double>& bounds,
                                       double k_sigma = 2.0);

/// Indices of the non-dominated subset (minimization in both components).
std::vector<int> non_dominated(const std::vector<double>& mu1,
                               const std::vector<double>& mu2);

}  // namespace rdopt
