#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <memory>
#include <random>

#include "oracle.hpp"
#include "rdopt/dataset.hpp"
#include "rdopt/errors.hpp"
#include "rdopt/gpr.hpp"
#include "rdopt/pce.hpp"
#include "rdopt/robust_opt.hpp"
#include "rdopt/util.hpp"

using namespace rdopt;
using rdopt::testing::grid_oracle;

namespace {

// One fitted surrogate shared across the test cases in this binary.
struct Fixture {
  std::vector<DesignPoint> design;
  std::vector<double> y1, y2;
  std::unique_ptr<GprModel> m1, m2;
  std::unique_ptr<ProbabilisticSurrogate> surrogate;

  Fixture() {
    design = generate_design(20, 80, 42);
    for (const auto& p : design) {
      const auto [a, b] = synthetic_cht(p);
      y1.push_back(a);
      y2.push_back(b);
    }
    m1 = std::make_unique<GprModel>(
        GprModel::fit(design, y1, select_hyperparameters(design, y1, 1e-12)));
    m2 = std::make_unique<GprModel>(
        GprModel::fit(design, y2, select_hyperparameters(design, y2, 1e-12)));
    surrogate = std::make_unique<ProbabilisticSurrogate>(
        *m1, *m2, InputUncertainty::from_half_width(0.05), 3);
  }
};

const Fixture& fixture() {
  static Fixture f;
  return f;
}

Objective weighted_objective(const ProbabilisticSurrogate& s, double w) {
  return [&s, w](const DesignPoint& x) {
    const auto st = s.evaluate(x);
    return w * st.mu1 + (1.0 - w) * st.mu2;
  };
}

}  // namespace

TEST_CASE("surrogate evaluation is deterministic and collapses as noise vanishes") {
  const auto& f = fixture();
  const DesignPoint x{0.37, 0.61};
  const auto a = f.surrogate->evaluate(x);
  const auto b = f.surrogate->evaluate(x);
  CHECK(a.mu1 == b.mu1);
  CHECK(a.sigma2 == b.sigma2);

  const ProbabilisticSurrogate tiny(*f.m1, *f.m2,
                                    InputUncertainty::from_half_width(2e-8), 3);
  const auto st = tiny.evaluate(x);
  CHECK(std::abs(st.mu1 - f.m1->predict_mean(x)) < 1e-6);
  CHECK(std::abs(st.mu2 - f.m2->predict_mean(x)) < 1e-6);
  CHECK(st.sigma1 < 1e-6);
  CHECK(st.sigma2 < 1e-6);
}

TEST_CASE("input noise is amplified where the response is steep") {
  const auto& f = fixture();
  const auto steep = f.surrogate->evaluate({0.9, 0.5});
  const auto flat = f.surrogate->evaluate({0.05, 0.5});
  CHECK(steep.sigma1 > flat.sigma1);
  const auto rim = f.surrogate->evaluate({0.95, 0.95});
  const auto bowl = f.surrogate->evaluate({0.42, 0.42});
  CHECK(rim.sigma2 > bowl.sigma2);
}

TEST_CASE("constrained_minimize solves a box-constrained convex quadratic") {
  const Objective f = [](const DesignPoint& p) {
    const double a = p.x1 - 0.3, b = p.x2 - 0.8;
    return a * a + 2.0 * b * b + 0.5 * a * b;
  };
  const auto r = constrained_minimize(f, {}, Box{}, 16, 1);
  CHECK(r.feasible);
  CHECK(std::abs(r.x.x1 - 0.3) < 1e-6);
  CHECK(std::abs(r.x.x2 - 0.8) < 1e-6);
  CHECK(r.value < 1e-10);
  CHECK(r.starts_tried == 16);
}

TEST_CASE("constrained_minimize finds the global basin among two") {
  const Objective f = [](const DesignPoint& p) {
    const double d1 = (p.x1 - 0.2) * (p.x1 - 0.2) + (p.x2 - 0.3) * (p.x2 - 0.3);
    const double d2 = (p.x1 - 0.8) * (p.x1 - 0.8) + (p.x2 - 0.7) * (p.x2 - 0.7);
    return 0.2 - 0.18 * std::exp(-d1 / 0.02) - 0.3 * std::exp(-d2 / 0.02);
  };
  const auto r = constrained_minimize(f, {}, Box{}, 16, 3);
  const auto o = grid_oracle(f, {}, Box{}, 201);
  CHECK(std::abs(r.x.x1 - o.x.x1) < 1e-3);
  CHECK(std::abs(r.x.x2 - o.x.x2) < 1e-3);
  CHECK(std::abs(r.value - o.value) < 1e-6);
  CHECK(std::abs(r.x.x1 - 0.8) < 1e-3);
}

TEST_CASE("constrained_minimize reports tiny violations on active constraints") {
  const Objective f = [](const DesignPoint& p) { return p.x1 + p.x2; };
  const std::vector<Constraint> cons{
      [](const DesignPoint& p) { return 0.5 - p.x1; }};  // x1 >= 0.5
  const auto r = constrained_minimize(f, cons, Box{}, 16, 7);
  CHECK(r.feasible);
  CHECK(std::abs(r.x.x1 - 0.5) < 1e-5);
  CHECK(std::abs(r.x.x2 - 0.0) < 1e-6);
  CHECK(r.max_violation < 1e-6);
}

TEST_CASE("weighted solve matches the exhaustive grid oracle at the extremes") {
  const auto& f = fixture();
  for (double w : {1.0, 0.0}) {
    const auto r = solve_problem1(*f.surrogate, w);
    REQUIRE(r.feasible);
    const auto o = grid_oracle(weighted_objective(*f.surrogate, w), {}, Box{}, 201);
    CHECK(std::abs(r.objective_value - o.value) < 1e-4);
    CHECK(std::abs(r.x_star.x1 - o.x.x1) < 1e-3);
    CHECK(std::abs(r.x_star.x2 - o.x.x2) < 1e-3);
  }
}

TEST_CASE("a sigma-constrained weighted solve matches the oracle") {
  const auto& f = fixture();
  const double b1 = 0.006, b2 = 0.006;
  const auto r = solve_problem1(*f.surrogate, 0.25, b1, b2);
  REQUIRE(r.feasible);
  CHECK(r.stats.sigma1 <= b1 + 1e-6);
  CHECK(r.stats.sigma2 <= b2 + 1e-6);
  const std::vector<Constraint> cons{
      [&](const DesignPoint& x) { return f.surrogate->evaluate(x).sigma1 - b1; },
      [&](const DesignPoint& x) { return f.surrogate->evaluate(x).sigma2 - b2; }};
  const auto o = grid_oracle(weighted_objective(*f.surrogate, 0.25), cons, Box{}, 201);
  CHECK(std::abs(r.objective_value - o.value) < 1e-4);
  CHECK(std::abs(r.x_star.x1 - o.x.x1) < 1e-3);
  CHECK(std::abs(r.x_star.x2 - o.x.x2) < 1e-3);
}

TEST_CASE("solve is invariant to a constant shift of both objectives") {
  const auto& f = fixture();
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 3; ++trial) {
    const double c = -5.0 + 10.0 * uniform01(rng);
    const Objective base = weighted_objective(*f.surrogate, 0.6);
    const Objective shifted = [&, c](const DesignPoint& x) { return base(x) + c; };
    const auto r0 = constrained_minimize(base, {}, Box{}, 16, 99);
    const auto rc = constrained_minimize(shifted, {}, Box{}, 16, 99);
    CHECK(std::abs(r0.x.x1 - rc.x.x1) < 1e-6);
    CHECK(std::abs(r0.x.x2 - rc.x.x2) < 1e-6);
    CHECK(rc.value - r0.value == doctest::Approx(c).epsilon(1e-9));
  }
}

TEST_CASE("weight extremes ignore the unused objective") {
  const auto& f = fixture();
  // perturb the f2 targets; with omega = 1 the optimum must not move
  std::vector<double> y2p = f.y2;
  for (auto& v : y2p) v = 0.5 * v + 0.123;
  const GprModel m2p = GprModel::fit(f.design, y2p, f.m2->params());
  const ProbabilisticSurrogate s2(*f.m1, m2p, InputUncertainty::from_half_width(0.05), 3);
  const auto a = solve_problem1(*f.surrogate, 1.0);
  const auto b = solve_problem1(s2, 1.0);
  CHECK(std::abs(a.x_star.x1 - b.x_star.x1) < 1e-6);
  CHECK(std::abs(a.x_star.x2 - b.x_star.x2) < 1e-6);

  const GprModel m1p = GprModel::fit(f.design, y2p, f.m1->params());
  const ProbabilisticSurrogate s1(m1p, *f.m2, InputUncertainty::from_half_width(0.05), 3);
  const auto c = solve_problem1(*f.surrogate, 0.0);
  const auto d = solve_problem1(s1, 0.0);
  CHECK(std::abs(c.x_star.x1 - d.x_star.x1) < 1e-6);
  CHECK(std::abs(c.x_star.x2 - d.x_star.x2) < 1e-6);
}

TEST_CASE("pareto front is non-dominated and monotone") {
  const auto& f = fixture();
  const auto omegas = linspace(0.0, 1.0, 21);
  const auto front = pareto_sweep(*f.surrogate, omegas);
  REQUIRE(front.size() >= 3);
  REQUIRE(front.size() <= omegas.size());
  for (std::size_t i = 0; i < front.size(); ++i) {
    for (std::size_t j = 0; j < front.size(); ++j) {
      if (i == j) continue;
      const bool dominates = front[j].mu1 <= front[i].mu1 &&
                             front[j].mu2 <= front[i].mu2 &&
                             (front[j].mu1 < front[i].mu1 || front[j].mu2 < front[i].mu2);
      CHECK_FALSE(dominates);
    }
  }
  for (std::size_t i = 1; i < front.size(); ++i) {
    CHECK(front[i].mu1 >= front[i - 1].mu1);
    CHECK(front[i].mu2 <= front[i - 1].mu2 + 1e-12);
  }
}

TEST_CASE("single-omega sweep equals the direct solve") {
  const auto& f = fixture();
  const auto front = pareto_sweep(*f.surrogate, {0.5});
  REQUIRE(front.size() == 1);
  const auto direct = solve_problem1(*f.surrogate, 0.5);
  CHECK(front[0].x_star.x1 == direct.x_star.x1);
  CHECK(front[0].x_star.x2 == direct.x_star.x2);
  CHECK(front[0].mu1 == direct.stats.mu1);
}

TEST_CASE("tighter sigma bounds push the front away from the origin") {
  const auto& f = fixture();
  const auto omegas = linspace(0.0, 1.0, 9);
  const double b1 = 0.006, b2 = 0.006;

  // matched-omega weighted objectives can only get worse, and no tightened
  // point may strictly dominate any loose-front point
  std::vector<ParetoPoint> loose_pts, tight_pts;
  for (double w : omegas) {
    const auto lo = solve_problem1(*f.surrogate, w);
    const auto ti = solve_problem1(*f.surrogate, w, b1, b2);
    REQUIRE(lo.feasible);
    REQUIRE(ti.feasible);
    // both solves stop within ~1e-8 of their own optima; compare with slack
    CHECK(ti.objective_value >= lo.objective_value - 1e-7);
    loose_pts.push_back({w, lo.x_star, lo.stats.mu1, lo.stats.mu2, lo.stats.sigma1,
                         lo.stats.sigma2});
    tight_pts.push_back({w, ti.x_star, ti.stats.mu1, ti.stats.mu2, ti.stats.sigma1,
                         ti.stats.sigma2});
  }
  for (const auto& t : tight_pts) {
    for (const auto& l : loose_pts) {
      const bool strictly_dominates =
          t.mu1 <= l.mu1 + 1e-9 && t.mu2 <= l.mu2 + 1e-9 &&
          (t.mu1 < l.mu1 - 1e-9 || t.mu2 < l.mu2 - 1e-9);
      CHECK_FALSE(strictly_dominates);
    }
  }
}

TEST_CASE("infeasible sigma bounds produce an empty front with diagnostics") {
  const auto& f = fixture();
  const auto front = pareto_sweep(*f.surrogate, {0.0, 0.5, 1.0}, 1e-7, 1e-7);
  CHECK(front.empty());
  const auto r = solve_problem1(*f.surrogate, 0.5, 1e-7, 1e-7);
  CHECK_FALSE(r.feasible);
  CHECK(r.best_infeasibility > 0.0);
  CHECK(r.starts_tried == 16);
}

TEST_CASE("worst-case solves match the oracle and handle infeasibility") {
  const auto& f = fixture();

  const auto unconstrained = solve_problem2(*f.surrogate, kInf);
  REQUIRE(unconstrained.feasible);
  const Objective fw = [&](const DesignPoint& x) {
    const auto st = f.surrogate->evaluate(x);
    return st.mu2 + 2.0 * st.sigma2;
  };
  const auto o = grid_oracle(fw, {}, Box{}, 201);
  CHECK(std::abs(unconstrained.objective_value - o.value) < 1e-4);
  CHECK(std::abs(unconstrained.x_star.x1 - o.x.x1) < 1e-3);
  CHECK(std::abs(unconstrained.x_star.x2 - o.x.x2) < 1e-3);

  // a bound below min(mu1 + 2 sigma1) is infeasible
  const auto infeasible = solve_problem2(*f.surrogate, 0.15);
  CHECK_FALSE(infeasible.feasible);
  CHECK(infeasible.best_infeasibility > 0.0);
}

TEST_CASE("problems 2 and 3 mirror under swapped objectives") {
  const auto& f = fixture();
  // symmetrized y1 variant keeps both surfaces swap-symmetric in x
  std::vector<double> ys;
  for (const auto& p : f.design) {
    ys.push_back(0.5 * (synthetic_cht(p).first + synthetic_cht({p.x2, p.x1}).first));
  }
  const GprModel ma = GprModel::fit(f.design, ys, select_hyperparameters(f.design, ys, 1e-12));
  const ProbabilisticSurrogate s_ab(ma, *f.m2, InputUncertainty::from_half_width(0.05), 3);
  const ProbabilisticSurrogate s_ba(*f.m2, ma, InputUncertainty::from_half_width(0.05), 3);

  for (double bound : {0.3, 0.45}) {
    const auto p2 = solve_problem2(s_ab, bound);
    const auto p3 = solve_problem3(s_ba, bound);
    CHECK(p2.feasible == p3.feasible);
    CHECK(std::abs(p2.x_star.x1 - p3.x_star.x1) < 1e-3);
    CHECK(std::abs(p2.x_star.x2 - p3.x_star.x2) < 1e-3);
    CHECK(std::abs(p2.objective_value - p3.objective_value) < 1e-3);
  }
}

TEST_CASE("robust optimum dominates the deterministic one in conservatism") {
  const auto& f = fixture();
  const auto robust = solve_problem2(*f.surrogate, kInf, 2.0);
  const auto deterministic = solve_problem2(*f.surrogate, kInf, 0.0);
  CHECK(robust.objective_value >= deterministic.objective_value);
}

TEST_CASE("bound sweep is monotone and ends at the unconstrained solve") {
  const auto& f = fixture();
  const std::vector<double> bounds{0.18, 0.24, 0.3, 0.45};
  const auto rows = bound_sweep(*f.surrogate, ProblemKind::WorstCaseF2, bounds);
  REQUIRE(rows.size() == bounds.size());
  CHECK_FALSE(rows[0].optimum.feasible);  // 0.18 is below the attainable worst case

  double prev = kInf;
  for (const auto& row : rows) {
    if (!row.optimum.feasible) continue;
    CHECK(row.optimum.objective_value <= prev + 1e-7);
    prev = row.optimum.objective_value;
  }
  const auto unconstrained = solve_problem2(*f.surrogate, kInf);
  CHECK(std::abs(rows.back().optimum.objective_value - unconstrained.objective_value) < 1e-6);

  // grid-oracle agreement for one active bound
  const double b = 0.24;
  const Objective fw = [&](const DesignPoint& x) {
    const auto st = f.surrogate->evaluate(x);
    return st.mu2 + 2.0 * st.sigma2;
  };
  const std::vector<Constraint> cons{[&](const DesignPoint& x) {
    const auto st = f.surrogate->evaluate(x);
    return st.mu1 + 2.0 * st.sigma1 - b;
  }};
  const auto o = grid_oracle(fw, cons, Box{}, 201);
  CHECK(std::abs(rows[1].optimum.objective_value - o.value) < 1e-4);
  CHECK(std::abs(rows[1].optimum.x_star.x1 - o.x.x1) < 1e-3);
  CHECK(std::abs(rows[1].optimum.x_star.x2 - o.x.x2) < 1e-3);
}

TEST_CASE("argument validation on the solver surface") {
  const auto& f = fixture();
  CHECK_THROWS_AS(solve_problem1(*f.surrogate, 1.5), ValidationError);
  CHECK_THROWS_AS(solve_problem1(*f.surrogate, 0.5, -1.0, 0.1), ValidationError);
  CHECK_THROWS_AS(solve_problem2(*f.surrogate, -0.5), ValidationError);
  CHECK_THROWS_AS(pareto_sweep(*f.surrogate, {0.5, 0.2}), ValidationError);
  CHECK_THROWS_AS(bound_sweep(*f.surrogate, ProblemKind::Weighted, {0.3}), ValidationError);
  CHECK_THROWS_AS(bound_sweep(*f.surrogate, ProblemKind::WorstCaseF2, {0.3, 0.2}),
                  ValidationError);
  CHECK_THROWS_AS(constrained_minimize([](const DesignPoint&) { return 0.0; }, {}, Box{}, 0, 1),
                  ValidationError);
  CHECK_THROWS_AS(non_dominated({1.0}, {}), ValidationError);
}

TEST_CASE("non_dominated keeps exactly the efficient points") {
  const std::vector<double> mu1{1.0, 2.0, 0.5, 1.0, 3.0};
  const std::vector<double> mu2{1.0, 0.2, 2.0, 1.0, 0.2};
  const auto keep = non_dominated(mu1, mu2);
  // (2.0, 0.2) dominates (3.0, 0.2); duplicates (1,1) are both kept
  REQUIRE(keep.size() == 4);
  CHECK(keep[0] == 0);
  CHECK(keep[1] == 1);
  CHECK(keep[2] == 2);
  CHECK(keep[3] == 3);
}
