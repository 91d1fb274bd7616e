#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>

namespace rdopt {

struct NelderMeadOptions {
  int max_iters = 600;
  double x_tol = 1e-10;  // simplex diameter
  double f_tol = 1e-13;  // value spread across the simplex
};

struct NelderMeadResult {
  std::array<double, 2> x{0.0, 0.0};
  double value = 0.0;
  int iters = 0;
};

/// Plain 2-D Nelder-Mead. Comparisons are order-based only, so adding a
/// constant to f leaves the iterates bit-identical.
inline NelderMeadResult nelder_mead(
    const std::function<double(const std::array<double, 2>&)>& f,
    const std::array<double, 2>& x0, double step,
    const NelderMeadOptions& opts = {}) {
  using Vec = std::array<double, 2>;
  struct Vertex {
    Vec x;
    double fx;
  };

  std::array<Vertex, 3> s;
  s[0] = {x0, f(x0)};
  s[1] = {{x0[0] + step, x0[1]}, 0.0};
  s[1].fx = f(s[1].x);
  s[2] = {{x0[0], x0[1] + step}, 0.0};
  s[2].fx = f(s[2].x);

  auto order = [&s] {
    std::sort(s.begin(), s.end(),
              [](const Vertex& a, const Vertex& b) { return a.fx < b.fx; });
  };
  auto sub = [](const Vec& a, const Vec& b) {
    return Vec{a[0] - b[0], a[1] - b[1]};
  };
  auto axpy = [](const Vec& a, double t, const Vec& d) {
    return Vec{a[0] + t * d[0], a[1] + t * d[1]};
  };

  order();
  int it = 0;
  for (; it < opts.max_iters; ++it) {
    const double diam =
        std::max(std::hypot(s[1].x[0] - s[0].x[0], s[1].x[1] - s[0].x[1]),
                 std::hypot(s[2].x[0] - s[0].x[0], s[2].x[1] - s[0].x[1]));
    if (diam < opts.x_tol && std::abs(s[2].fx - s[0].fx) < opts.f_tol) break;

    const Vec centroid{(s[0].x[0] + s[1].x[0]) / 2.0,
                       (s[0].x[1] + s[1].x[1]) / 2.0};
    const Vec dir = sub(centroid, s[2].x);

    const Vec xr = axpy(centroid, 1.0, dir);
    const double fr = f(xr);
    if (fr < s[0].fx) {
      const Vec xe = axpy(centroid, 2.0, dir);
      const double fe = f(xe);
      s[2] = fe < fr ? Vertex{xe, fe} : Vertex{xr, fr};
    } else if (fr < s[1].fx) {
      s[2] = {xr, fr};
    } else {
      const bool outside = fr < s[2].fx;
      const Vec xc = axpy(centroid, outside ? 0.5 : -0.5, dir);
      const double fc = f(xc);
      if (fc < (outside ? fr : s[2].fx)) {
        s[2] = {xc, fc};
      } else {
        // shrink toward the best vertex
        for (int i = 1; i < 3; ++i) {
          s[i].x = {s[0].x[0] + 0.5 * (s[i].x[0] - s[0].x[0]),
                    s[0].x[1] + 0.5 * (s[i].x[1] - s[0].x[1])};
          s[i].fx = f(s[i].x);
        }
      }
    }
    order();
  }
  return {s[0].x, s[0].fx, it};
}

}  // namespace rdopt
