#include "rdopt/robust_opt.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <future>
#include <thread>

#include "rdopt/errors.hpp"
#include "rdopt/optim.hpp"

namespace rdopt {

ProbabilisticSurrogate::ProbabilisticSurrogate(const GprModel& f1,
                                               const GprModel& f2,
                                               InputUncertainty unc, int order)
    : f1_(&f1), f2_(&f2), unc_(unc), order_(order), projector_(order) {
  unc_.validate();
  if (order < 1) throw ValidationError("ProbabilisticSurrogate: order must be >= 1");
}

SurrogateStats ProbabilisticSurrogate::evaluate(const DesignPoint& x) const {
  const auto p1 = projector_.propagate(
      [this](const DesignPoint& q) { return f1_->predict_mean(q); }, x, unc_);
  const auto p2 = projector_.propagate(
      [this](const DesignPoint& q) { return f2_->predict_mean(q); }, x, unc_);
  return {p1.mean, p1.std, p2.mean, p2.std};
}

void ProblemSpec::validate() const {
  if (kind == ProblemKind::Weighted) {
    if (!(omega >= 0.0 && omega <= 1.0)) {
      throw ValidationError("ProblemSpec: omega must be in [0,1]");
    }
    if (!(sigma1_bound > 0.0) || !(sigma2_bound > 0.0)) {
      throw ValidationError("ProblemSpec: sigma bounds must be positive");
    }
  } else {
    if (!(f_bar > 0.0)) throw ValidationError("ProblemSpec: f_bar must be positive");
  }
  if (!(k_sigma >= 0.0) || !std::isfinite(k_sigma)) {
    throw ValidationError("ProblemSpec: k_sigma must be finite and >= 0");
  }
}

DesignPoint Box::clamp(const DesignPoint& p) const {
  return {std::clamp(p.x1, lo1, hi1), std::clamp(p.x2, lo2, hi2)};
}

namespace {

// Radical-inverse Halton points, shifted by a seeded offset modulo 1.
double radical_inverse(int base, std::uint64_t index) {
  double inv = 1.0 / static_cast<double>(base);
  double f = inv;
  double r = 0.0;
  while (index > 0) {
    r += f * static_cast<double>(index % static_cast<std::uint64_t>(base));
    index /= static_cast<std::uint64_t>(base);
    f *= inv;
  }
  return r;
}

std::vector<DesignPoint> start_points(const Box& box, int n, std::uint64_t seed) {
  // splitmix64 scramble of the seed for the toroidal shift
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  const double s1 = static_cast<double>(mix(seed) >> 11) * 0x1.0p-53;
  const double s2 = static_cast<double>(mix(seed + 1) >> 11) * 0x1.0p-53;

  std::vector<DesignPoint> pts;
  pts.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    double u = radical_inverse(2, static_cast<std::uint64_t>(i) + 1) + s1;
    double v = radical_inverse(3, static_cast<std::uint64_t>(i) + 1) + s2;
    u -= std::floor(u);
    v -= std::floor(v);
    pts.push_back({box.lo1 + u * (box.hi1 - box.lo1),
                   box.lo2 + v * (box.hi2 - box.lo2)});
  }
  return pts;
}

// Deterministic order-independent merge helper for sweeps.
template <typename T, typename Fn>
std::vector<T> parallel_rows(int n, Fn&& fn) {
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const int workers = static_cast<int>(std::min<unsigned>(hw, 8));
  std::vector<T> out(static_cast<std::size_t>(n));
  if (n == 0) return out;
  if (workers <= 1 || n == 1) {
    for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = fn(i);
    return out;
  }
  std::vector<std::future<void>> futures;
  futures.reserve(static_cast<std::size_t>(workers));
  std::atomic<int> next{0};
  for (int w = 0; w < workers; ++w) {
    futures.push_back(std::async(std::launch::async, [&] {
      for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
        out[static_cast<std::size_t>(i)] = fn(i);
      }
    }));
  }
  for (auto& f : futures) f.get();
  return out;
}

struct PenaltyOutcome {
  DesignPoint x;
  double objective;
  double violation;
};

double max_violation(const std::vector<Constraint>& constraints,
                     const DesignPoint& x) {
  double worst = 0.0;
  for (const auto& g : constraints) {
    worst = std::max(worst, g(x));
  }
  return worst;
}

// Escalating quadratic penalty around Nelder-Mead, iterates projected into
// the box before every evaluation.
PenaltyOutcome penalty_search(const Objective& objective,
                              const std::vector<Constraint>& constraints,
                              const Box& box, const DesignPoint& start) {
  DesignPoint x = box.clamp(start);
  double rho = 1e3;
  PenaltyOutcome best{x, objective(x), max_violation(constraints, x)};

  for (int round = 0; round < 8; ++round) {
    auto penalized = [&](const std::array<double, 2>& raw) {
      const DesignPoint p = box.clamp({raw[0], raw[1]});
      double val = objective(p);
      for (const auto& g : constraints) {
        const double v = g(p);
        if (v > 0.0) val += rho * v * v;
      }
      // pull strays back toward the box so the simplex cannot wander
      const double d1 = raw[0] - p.x1;
      const double d2 = raw[1] - p.x2;
      return val + rho * (d1 * d1 + d2 * d2);
    };
    const auto res = nelder_mead(penalized, {x.x1, x.x2}, 0.12);
    x = box.clamp({res.x[0], res.x[1]});
    const double viol = max_violation(constraints, x);
    const double obj = objective(x);
    if (viol < best.violation - 1e-15 ||
        (viol <= best.violation + 1e-15 && obj < best.objective)) {
      best = {x, obj, viol};
    }
    if (viol <= kConstraintTol) break;
    rho *= 10.0;
  }
  return best;
}

bool lex_less(const DesignPoint& a, const DesignPoint& b) {
  if (a.x1 != b.x1) return a.x1 < b.x1;
  return a.x2 < b.x2;
}

}  // namespace

MinimizeResult constrained_minimize(const Objective& objective,
                                    const std::vector<Constraint>& constraints,
                                    const Box& domain, int starts,
                                    std::uint64_t seed) {
  if (starts < 1) throw ValidationError("constrained_minimize: starts must be >= 1");

  const auto start_set = start_points(domain, starts, seed);
  bool have_feasible = false;
  PenaltyOutcome best{start_set.front(), kInf, kInf};
  PenaltyOutcome least_violating{start_set.front(), kInf, kInf};

  for (const auto& s : start_set) {
    const PenaltyOutcome out = penalty_search(objective, constraints, domain, s);
    if (out.violation < least_violating.violation ||
        (out.violation == least_violating.violation &&
         out.objective < least_violating.objective)) {
      least_violating = out;
    }
    if (out.violation <= kConstraintTol) {
      if (!have_feasible || out.objective < best.objective - 1e-9 ||
          (std::abs(out.objective - best.objective) <= 1e-9 &&
           lex_less(out.x, best.x))) {
        best = out;
        have_feasible = true;
      }
    }
  }

  MinimizeResult res;
  res.starts_tried = starts;
  if (have_feasible) {
    res.x = best.x;
    res.value = best.objective;
    res.max_violation = best.violation;
    res.feasible = true;
  } else {
    res.x = least_violating.x;
    res.value = least_violating.objective;
    res.max_violation = least_violating.violation;
    res.feasible = false;
  }
  return res;
}

namespace {

// One surrogate evaluation feeds both the objective and the constraints, so
// memoize the most recent point.
class StatsCache {
 public:
  explicit StatsCache(const ProbabilisticSurrogate& s) : s_(&s) {}

  const SurrogateStats& at(const DesignPoint& x) const {
    if (!valid_ || x.x1 != last_.x1 || x.x2 != last_.x2) {
      stats_ = s_->evaluate(x);
      last_ = x;
      valid_ = true;
    }
    return stats_;
  }

 private:
  const ProbabilisticSurrogate* s_;
  mutable DesignPoint last_;
  mutable SurrogateStats stats_;
  mutable bool valid_ = false;
};

RobustOptimum finish(const ProbabilisticSurrogate& s, const MinimizeResult& r) {
  RobustOptimum out;
  out.x_star = r.x;
  out.objective_value = r.value;
  out.stats = s.evaluate(r.x);
  out.feasible = r.feasible;
  out.starts_tried = r.starts_tried;
  out.best_infeasibility = r.max_violation;
  return out;
}

constexpr int kSolverStarts = 16;
constexpr std::uint64_t kSolverSeed = 1234;

}  // namespace

RobustOptimum solve_problem1(const ProbabilisticSurrogate& s, double omega,
                             double sigma1_bound, double sigma2_bound) {
  ProblemSpec spec;
  spec.kind = ProblemKind::Weighted;
  spec.omega = omega;
  spec.sigma1_bound = sigma1_bound;
  spec.sigma2_bound = sigma2_bound;
  spec.validate();

  StatsCache cache(s);
  Objective obj = [&cache, omega](const DesignPoint& x) {
    const auto& st = cache.at(x);
    return omega * st.mu1 + (1.0 - omega) * st.mu2;
  };
  std::vector<Constraint> cons;
  if (std::isfinite(sigma1_bound)) {
    cons.push_back([&cache, sigma1_bound](const DesignPoint& x) {
      return cache.at(x).sigma1 - sigma1_bound;
    });
  }
  if (std::isfinite(sigma2_bound)) {
    cons.push_back([&cache, sigma2_bound](const DesignPoint& x) {
      return cache.at(x).sigma2 - sigma2_bound;
    });
  }
  return finish(s, constrained_minimize(obj, cons, Box{}, kSolverStarts, kSolverSeed));
}

RobustOptimum solve_problem2(const ProbabilisticSurrogate& s, double f1_bar,
                             double k_sigma) {
  ProblemSpec spec;
  spec.kind = ProblemKind::WorstCaseF2;
  spec.f_bar = f1_bar;
  spec.k_sigma = k_sigma;
  spec.validate();

  StatsCache cache(s);
  Objective obj = [&cache, k_sigma](const DesignPoint& x) {
    const auto& st = cache.at(x);
    return st.mu2 + k_sigma * st.sigma2;
  };
  std::vector<Constraint> cons;
  if (std::isfinite(f1_bar)) {
    cons.push_back([&cache, k_sigma, f1_bar](const DesignPoint& x) {
      const auto& st = cache.at(x);
      return st.mu1 + k_sigma * st.sigma1 - f1_bar;
    });
  }
  return finish(s, constrained_minimize(obj, cons, Box{}, kSolverStarts, kSolverSeed));
}

RobustOptimum solve_problem3(const ProbabilisticSurrogate& s, double f2_bar,
                             double k_sigma) {
  ProblemSpec spec;
  spec.kind = ProblemKind::WorstCaseF1;
  spec.f_bar = f2_bar;
  spec.k_sigma = k_sigma;
  spec.validate();

  StatsCache cache(s);
  Objective obj = [&cache, k_sigma](const DesignPoint& x) {
    const auto& st = cache.at(x);
    return st.mu1 + k_sigma * st.sigma1;
  };
  std::vector<Constraint> cons;
  if (std::isfinite(f2_bar)) {
    cons.push_back([&cache, k_sigma, f2_bar](const DesignPoint& x) {
      const auto& st = cache.at(x);
      return st.mu2 + k_sigma * st.sigma2 - f2_bar;
    });
  }
  return finish(s, constrained_minimize(obj, cons, Box{}, kSolverStarts, kSolverSeed));
}

RobustOptimum solve(const ProbabilisticSurrogate& s, const ProblemSpec& spec) {
  spec.validate();
  switch (spec.kind) {
    case ProblemKind::Weighted:
      return solve_problem1(s, spec.omega, spec.sigma1_bound, spec.sigma2_bound);
    case ProblemKind::WorstCaseF2:
      return solve_problem2(s, spec.f_bar, spec.k_sigma);
    case ProblemKind::WorstCaseF1:
      return solve_problem3(s, spec.f_bar, spec.k_sigma);
  }
  throw ValidationError("solve: unknown problem kind");
}

std::vector<int> non_dominated(const std::vector<double>& mu1,
                               const std::vector<double>& mu2) {
  if (mu1.size() != mu2.size()) {
    throw ValidationError("non_dominated: size mismatch");
  }
  const int n = static_cast<int>(mu1.size());
  std::vector<int> keep;
  for (int i = 0; i < n; ++i) {
    bool dominated = false;
    for (int j = 0; j < n && !dominated; ++j) {
      if (j == i) continue;
      const bool no_worse = mu1[static_cast<std::size_t>(j)] <= mu1[static_cast<std::size_t>(i)] &&
                            mu2[static_cast<std::size_t>(j)] <= mu2[static_cast<std::size_t>(i)];
      const bool better = mu1[static_cast<std::size_t>(j)] < mu1[static_cast<std::size_t>(i)] ||
                          mu2[static_cast<std::size_t>(j)] < mu2[static_cast<std::size_t>(i)];
      dominated = no_worse && better;
    }
    if (!dominated) keep.push_back(i);
  }
  return keep;
}

std::vector<ParetoPoint> pareto_sweep(const ProbabilisticSurrogate& s,
                                      const std::vector<double>& omegas,
                                      double sigma1_bound, double sigma2_bound) {
  for (std::size_t i = 0; i < omegas.size(); ++i) {
    if (!(omegas[i] >= 0.0 && omegas[i] <= 1.0)) {
      throw ValidationError("pareto_sweep: omegas must lie in [0,1]");
    }
    if (i > 0 && omegas[i] < omegas[i - 1]) {
      throw ValidationError("pareto_sweep: omegas must be ascending");
    }
  }

  const auto solved = parallel_rows<RobustOptimum>(
      static_cast<int>(omegas.size()), [&](int i) {
        return solve_problem1(s, omegas[static_cast<std::size_t>(i)], sigma1_bound,
                              sigma2_bound);
      });

  std::vector<ParetoPoint> feasible;
  for (std::size_t i = 0; i < solved.size(); ++i) {
    const auto& r = solved[i];
    if (!r.feasible) continue;
    feasible.push_back({omegas[i], r.x_star, r.stats.mu1, r.stats.mu2,
                        r.stats.sigma1, r.stats.sigma2});
  }

  std::vector<double> m1, m2;
  m1.reserve(feasible.size());
  m2.reserve(feasible.size());
  for (const auto& p : feasible) {
    m1.push_back(p.mu1);
    m2.push_back(p.mu2);
  }
  std::vector<ParetoPoint> front;
  for (int idx : non_dominated(m1, m2)) {
    front.push_back(feasible[static_cast<std::size_t>(idx)]);
  }
  std::sort(front.begin(), front.end(), [](const ParetoPoint& a, const ParetoPoint& b) {
    if (a.mu1 != b.mu1) return a.mu1 < b.mu1;
    return a.mu2 < b.mu2;
  });
  return front;
}

std::vector<BoundSweepRow> bound_sweep(const ProbabilisticSurrogate& s,
                                       ProblemKind kind,
                                       const std::vector<double>& bounds,
                                       double k_sigma) {
  if (kind == ProblemKind::Weighted) {
    throw ValidationError("bound_sweep: kind must be WorstCaseF1 or WorstCaseF2");
  }
  for (std::size_t i = 1; i < bounds.size(); ++i) {
    if (!(bounds[i] > bounds[i - 1])) {
      throw ValidationError("bound_sweep: bounds must be ascending");
    }
  }

  const auto solved = parallel_rows<RobustOptimum>(
      static_cast<int>(bounds.size()), [&](int i) {
        const double b = bounds[static_cast<std::size_t>(i)];
        return kind == ProblemKind::WorstCaseF2 ? solve_problem2(s, b, k_sigma)
                                                : solve_problem3(s, b, k_sigma);
      });

  std::vector<BoundSweepRow> rows;
  rows.reserve(bounds.size());
  for (std::size_t i = 0; i < bounds.size(); ++i) {
    rows.push_back({bounds[i], solved[i]});
  }
  return rows;
}

}  // namespace rdopt
