#include "rdopt/pce.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <string>

#include "rdopt/csv.hpp"
#include "rdopt/errors.hpp"
#include "rdopt/util.hpp"

namespace rdopt {

InputUncertainty InputUncertainty::from_half_width(double e) {
  return from_half_widths(e, e);
}

InputUncertainty InputUncertainty::from_half_widths(double e1, double e2) {
  InputUncertainty u;
  u.e = {e1, e2};
  u.sigma = {e1 / 2.0, e2 / 2.0};
  u.validate();
  return u;
}

InputUncertainty InputUncertainty::from_sigmas(double s1, double s2) {
  return from_half_widths(2.0 * s1, 2.0 * s2);
}

void InputUncertainty::validate() const {
  for (int d = 0; d < 2; ++d) {
    if (!(std::isfinite(e[static_cast<std::size_t>(d)]) && e[static_cast<std::size_t>(d)] > 0.0)) {
      throw ValidationError("InputUncertainty: e must be positive and finite");
    }
    if (sigma[static_cast<std::size_t>(d)] != e[static_cast<std::size_t>(d)] / 2.0) {
      throw ValidationError("InputUncertainty: sigma must equal e/2");
    }
  }
}

double hermite_value(int degree, double t) {
  if (degree < 0) throw ValidationError("hermite_value: degree must be >= 0");
  if (degree == 0) return 1.0;
  if (degree == 1) return t;
  double prev = 1.0;  // phi_0
  double cur = t;     // phi_1
  for (int k = 1; k < degree; ++k) {
    const double next =
        (t * cur - std::sqrt(static_cast<double>(k)) * prev) /
        std::sqrt(static_cast<double>(k + 1));
    prev = cur;
    cur = next;
  }
  return cur;
}

HermiteBasis::HermiteBasis(int order_in) : order(order_in) {
  if (order < 0) throw ValidationError("HermiteBasis: order must be >= 0");
  for (int total = 0; total <= order; ++total) {
    for (int k1 = total; k1 >= 0; --k1) {
      terms.push_back({k1, total - k1});
    }
  }
}

double HermiteBasis::value(int term, double t1, double t2) const {
  const auto& k = terms[static_cast<std::size_t>(term)];
  return hermite_value(k[0], t1) * hermite_value(k[1], t2);
}

QuadratureRule gauss_hermite_rule(int points_per_dim, int dim) {
  if (points_per_dim < 1) {
    throw ValidationError("gauss_hermite_rule: points_per_dim must be >= 1");
  }
  if (dim < 1) throw ValidationError("gauss_hermite_rule: dim must be >= 1");

  // Golub-Welsch on the probabilists' Hermite Jacobi matrix (zero diagonal,
  // off-diagonal sqrt(i)); weights are squared first eigenvector components.
  const int n = points_per_dim;
  std::vector<double> nodes1(static_cast<std::size_t>(n));
  std::vector<double> weights1(static_cast<std::size_t>(n));
  if (n == 1) {
    nodes1[0] = 0.0;
    weights1[0] = 1.0;
  } else {
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
    for (int i = 1; i < n; ++i) {
      const double b = std::sqrt(static_cast<double>(i));
      J(i, i - 1) = b;
      J(i - 1, i) = b;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    if (es.info() != Eigen::Success) {
      throw NumericalError("gauss_hermite_rule: eigen decomposition failed");
    }
    for (int i = 0; i < n; ++i) {
      nodes1[static_cast<std::size_t>(i)] = es.eigenvalues()(i);
      const double v0 = es.eigenvectors()(0, i);
      weights1[static_cast<std::size_t>(i)] = v0 * v0;
    }
  }

  QuadratureRule rule;
  rule.dim = dim;
  const int total = static_cast<int>(std::pow(static_cast<double>(n), dim) + 0.5);
  rule.nodes.reserve(static_cast<std::size_t>(total * dim));
  rule.weights.reserve(static_cast<std::size_t>(total));
  std::vector<int> idx(static_cast<std::size_t>(dim), 0);
  for (int q = 0; q < total; ++q) {
    double w = 1.0;
    for (int d = 0; d < dim; ++d) {
      rule.nodes.push_back(nodes1[static_cast<std::size_t>(idx[static_cast<std::size_t>(d)])]);
      w *= weights1[static_cast<std::size_t>(idx[static_cast<std::size_t>(d)])];
    }
    rule.weights.push_back(w);
    for (int d = dim - 1; d >= 0; --d) {
      if (++idx[static_cast<std::size_t>(d)] < n) break;
      idx[static_cast<std::size_t>(d)] = 0;
    }
  }
  return rule;
}

PceProjector::PceProjector(int order)
    : order_(order),
      basis_(order),
      rule_(gauss_hermite_rule(order + 1, 2)) {
  const int nq = rule_.size();
  const int nt = basis_.size();
  weighted_basis_.resize(static_cast<std::size_t>(nq * nt));
  for (int q = 0; q < nq; ++q) {
    const double t1 = rule_.node(q, 0);
    const double t2 = rule_.node(q, 1);
    for (int k = 0; k < nt; ++k) {
      weighted_basis_[static_cast<std::size_t>(q * nt + k)] =
          rule_.weights[static_cast<std::size_t>(q)] * basis_.value(k, t1, t2);
    }
  }
}

std::vector<double> PceProjector::evaluate_field(const ScalarField& f,
                                                 const DesignPoint& center,
                                                 const InputUncertainty& unc) const {
  const int nq = rule_.size();
  std::vector<double> values(static_cast<std::size_t>(nq));
  for (int q = 0; q < nq; ++q) {
    const DesignPoint x{center.x1 + unc.sigma[0] * rule_.node(q, 0),
                        center.x2 + unc.sigma[1] * rule_.node(q, 1)};
    const double v = f(x);
    if (!std::isfinite(v)) {
      throw PropagationError("propagation: non-finite value at node " +
                             std::to_string(q) + " = (" + fmt17(x.x1) + ", " +
                             fmt17(x.x2) + ")");
    }
    values[static_cast<std::size_t>(q)] = v;
  }
  return values;
}

PcePropagation PceProjector::propagate_values(const std::vector<double>& f_values,
                                              const DesignPoint& center) const {
  const int nq = rule_.size();
  const int nt = basis_.size();
  PcePropagation out;
  out.center = center;
  out.order = order_;
  out.coefficients.assign(static_cast<std::size_t>(nt), 0.0);
  for (int q = 0; q < nq; ++q) {
    const double fv = f_values[static_cast<std::size_t>(q)];
    const double* row = &weighted_basis_[static_cast<std::size_t>(q * nt)];
    for (int k = 0; k < nt; ++k) {
      out.coefficients[static_cast<std::size_t>(k)] += fv * row[k];
    }
  }
  out.mean = out.coefficients[0];
  double var = 0.0;
  for (int k = 1; k < nt; ++k) {
    var += out.coefficients[static_cast<std::size_t>(k)] *
           out.coefficients[static_cast<std::size_t>(k)];
  }
  out.std = std::sqrt(var);
  return out;
}

PcePropagation PceProjector::propagate(const ScalarField& f,
                                       const DesignPoint& center,
                                       const InputUncertainty& unc) const {
  unc.validate();
  return propagate_values(evaluate_field(f, center, unc), center);
}

PcePropagation project(const ScalarField& f, const DesignPoint& center,
                       const InputUncertainty& unc, int order) {
  return PceProjector(order).propagate(f, center, unc);
}

PcePropagation project_with_noise(const ScalarField& f_mean,
                                  const ScalarField& f_std,
                                  const DesignPoint& center,
                                  const InputUncertainty& unc, int order,
                                  std::uint64_t seed) {
  unc.validate();
  PceProjector proj(order);
  GaussianSampler gauss(seed);
  std::vector<double> values = proj.evaluate_field(f_mean, center, unc);
  const int nq = proj.rule().size();
  for (int q = 0; q < nq; ++q) {
    const DesignPoint x{center.x1 + unc.sigma[0] * proj.rule().node(q, 0),
                        center.x2 + unc.sigma[1] * proj.rule().node(q, 1)};
    const double s = f_std(x);
    if (!std::isfinite(s) || s < 0.0) {
      throw PropagationError("project_with_noise: invalid std at node " +
                             std::to_string(q));
    }
    values[static_cast<std::size_t>(q)] += s * gauss.next();
  }
  return proj.propagate_values(values, center);
}

PcePropagation regress(const ScalarField& f, const DesignPoint& center,
                       const InputUncertainty& unc, int order,
                       std::uint64_t seed) {
  unc.validate();
  HermiteBasis basis(order);
  const int nt = basis.size();
  const int ns = 2 * nt;

  GaussianSampler gauss(seed);
  Eigen::MatrixXd A(ns, nt);
  Eigen::VectorXd b(ns);
  for (int s = 0; s < ns; ++s) {
    const double t1 = gauss.next();
    const double t2 = gauss.next();
    const DesignPoint x{center.x1 + unc.sigma[0] * t1,
                        center.x2 + unc.sigma[1] * t2};
    const double v = f(x);
    if (!std::isfinite(v)) {
      throw PropagationError("regress: non-finite value at sample " + std::to_string(s));
    }
    b(s) = v;
    for (int k = 0; k < nt; ++k) A(s, k) = basis.value(k, t1, t2);
  }
  const Eigen::VectorXd beta = A.colPivHouseholderQr().solve(b);

  PcePropagation out;
  out.center = center;
  out.order = order;
  out.coefficients.assign(static_cast<std::size_t>(nt), 0.0);
  for (int k = 0; k < nt; ++k) out.coefficients[static_cast<std::size_t>(k)] = beta(k);
  out.mean = beta(0);
  out.std = std::sqrt(std::max(0.0, beta.tail(nt - 1).squaredNorm()));
  return out;
}

McResult mc_propagate(const ScalarField& f, const DesignPoint& center,
                      const InputUncertainty& unc, std::int64_t n_samples,
                      std::uint64_t seed) {
  unc.validate();
  if (n_samples < 2) throw ValidationError("mc_propagate: need n_samples >= 2");

  GaussianSampler gauss(seed);
  // Welford accumulation, extended with the fourth central moment for the
  // delta-method standard error of the sample std.
  double mean = 0.0, m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (std::int64_t i = 0; i < n_samples; ++i) {
    const DesignPoint x{center.x1 + unc.sigma[0] * gauss.next(),
                        center.x2 + unc.sigma[1] * gauss.next()};
    const double v = f(x);
    if (!std::isfinite(v)) {
      throw PropagationError("mc_propagate: non-finite value at sample " + std::to_string(i));
    }
    const double n1 = static_cast<double>(i);
    const double n = n1 + 1.0;
    const double delta = v - mean;
    const double delta_n = delta / n;
    const double delta_n2 = delta_n * delta_n;
    const double term1 = delta * delta_n * n1;
    mean += delta_n;
    m4 += term1 * delta_n2 * (n * n - 3.0 * n + 3.0) + 6.0 * delta_n2 * m2 -
          4.0 * delta_n * m3;
    m3 += term1 * delta_n * (n - 2.0) - 3.0 * delta_n * m2;
    m2 += term1;
  }

  McResult r;
  r.n = n_samples;
  r.mean = mean;
  const double nd = static_cast<double>(n_samples);
  const double var = m2 / (nd - 1.0);
  r.std = std::sqrt(std::max(0.0, var));
  r.se_mean = r.std / std::sqrt(nd);
  if (r.std > 0.0) {
    const double mu4 = m4 / nd;
    const double var_var =
        std::max(0.0, (mu4 - var * var * (nd - 3.0) / (nd - 1.0)) / nd);
    r.se_std = std::sqrt(var_var) / (2.0 * r.std);
  }
  return r;
}

std::vector<ConvergenceRow> convergence_study(const ScalarField& f,
                                              const DesignPoint& center,
                                              const InputUncertainty& unc,
                                              const std::vector<int>& orders) {
  if (orders.empty()) throw ValidationError("convergence_study: empty order list");
  for (std::size_t i = 0; i < orders.size(); ++i) {
    if (orders[i] < 1) throw ValidationError("convergence_study: orders must be >= 1");
    if (i > 0 && orders[i] <= orders[i - 1]) {
      throw ValidationError("convergence_study: orders must be ascending");
    }
  }

  std::vector<ConvergenceRow> rows;
  rows.reserve(orders.size());
  for (int m : orders) {
    const PcePropagation p = project(f, center, unc, m);
    ConvergenceRow row;
    row.order = m;
    row.mean = p.mean;
    row.std = p.std;
    if (!rows.empty()) {
      row.dmean = std::abs(p.mean - rows.back().mean);
      row.dstd = std::abs(p.std - rows.back().std);
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace rdopt
