#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace lpwan {

struct QuadratureTolerance {
  double abs = 1e-10;
  /// Relative to a coarse whole-interval estimate; 0 disables.
  double rel = 0.0;
  int max_depth = 48;
};

namespace detail {

template <class F>
double simpson_step(F& f, double a, double fa, double b, double fb, double m, double fm,
                    double whole, double tol, int depth) {
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return simpson_step(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
         simpson_step(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

/// Adaptive Simpson integration of f over [a, b] with Richardson correction.
template <class F>
double adaptive_simpson(F&& f, double a, double b, QuadratureTolerance tol = {}) {
  if (a == b) return 0.0;
  const double m = 0.5 * (a + b);
  const double fa = f(a);
  const double fb = f(b);
  const double fm = f(m);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);

  double target = tol.abs;
  if (tol.rel > 0.0) {
    // coarse 9-point composite estimate to anchor the relative tolerance
    double coarse = 0.0;
    const double h = (b - a) / 8.0;
    for (int i = 0; i <= 8; ++i) {
      const double w = (i == 0 || i == 8) ? 1.0 : (i % 2 ? 4.0 : 2.0);
      coarse += w * f(a + i * h);
    }
    coarse *= h / 3.0;
    target = std::max(target, tol.rel * std::abs(coarse));
  }
  return detail::simpson_step(f, a, fa, b, fb, m, fm, whole, target, tol.max_depth);
}

/// Vector-valued adaptive Simpson: f(x, out) fills `dim` components, and an
/// interval is accepted once every component meets the tolerance.
template <class F>
std::vector<double> adaptive_simpson_vec(F&& f, double a, double b, std::size_t dim,
                                         QuadratureTolerance tol = {}) {
  using Vec = std::vector<double>;
  Vec result(dim, 0.0);
  if (a == b) return result;

  auto eval = [&](double x) {
    Vec v(dim);
    f(x, std::span<double>(v));
    return v;
  };
  auto simpson = [dim](double lo, double hi, const Vec& flo, const Vec& fmid, const Vec& fhi) {
    Vec s(dim);
    for (std::size_t i = 0; i < dim; ++i) s[i] = (hi - lo) / 6.0 * (flo[i] + 4.0 * fmid[i] + fhi[i]);
    return s;
  };

  struct Panel {
    double a, b;
    Vec fa, fm, fb, whole;
    double tol;
    int depth;
  };
  const double m0 = 0.5 * (a + b);
  Vec fa = eval(a), fm = eval(m0), fb = eval(b);
  Vec whole = simpson(a, b, fa, fm, fb);
  std::vector<Panel> stack;
  stack.push_back({a, b, std::move(fa), std::move(fm), std::move(fb), std::move(whole), tol.abs,
                   tol.max_depth});

  while (!stack.empty()) {
    Panel p = std::move(stack.back());
    stack.pop_back();
    const double m = 0.5 * (p.a + p.b);
    const double lm = 0.5 * (p.a + m);
    const double rm = 0.5 * (m + p.b);
    Vec flm = eval(lm), frm = eval(rm);
    Vec left = simpson(p.a, m, p.fa, flm, p.fm);
    Vec right = simpson(m, p.b, p.fm, frm, p.fb);
    double worst = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
      worst = std::max(worst, std::abs(left[i] + right[i] - p.whole[i]));
    }
    if (p.depth <= 0 || worst <= 15.0 * p.tol) {
      for (std::size_t i = 0; i < dim; ++i) {
        const double delta = left[i] + right[i] - p.whole[i];
        result[i] += left[i] + right[i] + delta / 15.0;
      }
      continue;
    }
    stack.push_back({m, p.b, p.fm, std::move(frm), std::move(p.fb), std::move(right), 0.5 * p.tol,
                     p.depth - 1});
    stack.push_back({p.a, m, std::move(p.fa), std::move(flm), std::move(p.fm), std::move(left),
                     0.5 * p.tol, p.depth - 1});
  }
  return result;
}

}  // namespace lpwan
