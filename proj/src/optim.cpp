#include "hiercal/optim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace hiercal::optim {

namespace {

Eigen::VectorXd clamp_to_box(Eigen::VectorXd x, const Eigen::VectorXd& lo,
                             const Eigen::VectorXd& hi) {
  for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = std::clamp(x[i], lo[i], hi[i]);
  return x;
}

}  // namespace

Result nelder_mead_min(const Objective& f, const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                       const Eigen::VectorXd& x0, const NelderMeadOptions& opts) {
  const int d = static_cast<int>(x0.size());
  int evals = 0;
  auto eval = [&](const Eigen::VectorXd& x) {
    ++evals;
    const double v = f(x);
    return std::isfinite(v) ? v : std::numeric_limits<double>::max();
  };

  std::vector<Eigen::VectorXd> pts(d + 1);
  std::vector<double> vals(d + 1);
  pts[0] = clamp_to_box(x0, lo, hi);
  vals[0] = eval(pts[0]);
  for (int i = 0; i < d; ++i) {
    Eigen::VectorXd p = pts[0];
    const double step = opts.init_step * (hi[i] - lo[i]);
    p[i] += (p[i] + step <= hi[i]) ? step : -step;
    pts[i + 1] = clamp_to_box(p, lo, hi);
    vals[i + 1] = eval(pts[i + 1]);
  }

  std::vector<int> order(d + 1);
  auto sort_simplex = [&] {
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return vals[a] < vals[b]; });
  };

  Result res;
  while (evals < opts.max_evals) {
    sort_simplex();
    const int best = order[0], worst = order[d], second = order[d - 1];

    double size = 0.0;
    for (int i = 1; i <= d; ++i) size = std::max(size, (pts[order[i]] - pts[best]).norm());
    if (size < opts.x_tol && std::abs(vals[worst] - vals[best]) < opts.f_tol) {
      res.converged = true;
      break;
    }

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(d);
    for (int i = 0; i < d; ++i) centroid += pts[order[i]];
    centroid /= d;

    const Eigen::VectorXd xr = clamp_to_box(centroid + (centroid - pts[worst]), lo, hi);
    const double fr = eval(xr);

    if (fr < vals[best]) {
      const Eigen::VectorXd xe = clamp_to_box(centroid + 2.0 * (centroid - pts[worst]), lo, hi);
      const double fe = eval(xe);
      if (fe < fr) {
        pts[worst] = xe;
        vals[worst] = fe;
      } else {
        pts[worst] = xr;
        vals[worst] = fr;
      }
    } else if (fr < vals[second]) {
      pts[worst] = xr;
      vals[worst] = fr;
    } else {
      const bool outside = fr < vals[worst];
      const Eigen::VectorXd base = outside ? xr : pts[worst];
      const Eigen::VectorXd xc = clamp_to_box(centroid + 0.5 * (base - centroid), lo, hi);
      const double fc = eval(xc);
      if (fc < std::min(fr, vals[worst])) {
        pts[worst] = xc;
        vals[worst] = fc;
      } else {
        // shrink toward best
        for (int i = 1; i <= d; ++i) {
          const int k = order[i];
          pts[k] = clamp_to_box(pts[best] + 0.5 * (pts[k] - pts[best]), lo, hi);
          vals[k] = eval(pts[k]);
        }
      }
    }
  }

  sort_simplex();
  res.x = pts[order[0]];
  res.value = vals[order[0]];
  res.evaluations = evals;
  return res;
}

namespace {

// Central differences, shifted to one-sided at the box boundary.
Eigen::VectorXd numerical_gradient(const Objective& f, const Eigen::VectorXd& x,
                                   const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                                   double rel_step, int& evals) {
  const int d = static_cast<int>(x.size());
  Eigen::VectorXd g(d);
  for (int i = 0; i < d; ++i) {
    const double h = rel_step * std::max(1.0, std::abs(x[i]));
    double xp = std::min(x[i] + h, hi[i]);
    double xm = std::max(x[i] - h, lo[i]);
    if (xp == xm) {
      g[i] = 0.0;
      continue;
    }
    Eigen::VectorXd a = x, b = x;
    a[i] = xp;
    b[i] = xm;
    const double fa = f(a);
    const double fb = f(b);
    evals += 2;
    g[i] = (fa - fb) / (xp - xm);
  }
  return g;
}

}  // namespace

Result quasi_newton_box_min(const Objective& f, const Eigen::VectorXd& lo,
                            const Eigen::VectorXd& hi, const Eigen::VectorXd& x0,
                            const QuasiNewtonOptions& opts) {
  const int d = static_cast<int>(x0.size());
  Result res;
  int evals = 0;

  Eigen::VectorXd x = clamp_to_box(x0, lo, hi);
  double fx = f(x);
  ++evals;
  Eigen::MatrixXd h_inv = Eigen::MatrixXd::Identity(d, d);
  Eigen::VectorXd g = numerical_gradient(f, x, lo, hi, opts.fd_step, evals);

  for (int iter = 0; iter < opts.max_iters; ++iter) {
    // projected-gradient stationarity
    const Eigen::VectorXd proj_step = clamp_to_box(x - g, lo, hi) - x;
    if (proj_step.lpNorm<Eigen::Infinity>() < opts.grad_tol) {
      res.converged = true;
      break;
    }

    Eigen::VectorXd dir = -(h_inv * g);
    if (dir.dot(g) >= 0.0) dir = -g;  // not a descent direction, reset

    double t = 1.0;
    Eigen::VectorXd x_new;
    double f_new = fx;
    bool improved = false;
    for (int ls = 0; ls < 45; ++ls) {
      x_new = clamp_to_box(x + t * dir, lo, hi);
      if ((x_new - x).lpNorm<Eigen::Infinity>() < opts.step_tol) break;
      f_new = f(x_new);
      ++evals;
      if (f_new < fx - 1e-4 * std::abs((x_new - x).dot(g))) {
        improved = true;
        break;
      }
      t *= 0.5;
    }
    if (!improved) {
      res.converged = true;  // no progress possible along this direction
      break;
    }

    const Eigen::VectorXd g_new = numerical_gradient(f, x_new, lo, hi, opts.fd_step, evals);
    const Eigen::VectorXd s = x_new - x;
    const Eigen::VectorXd y = g_new - g;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      const Eigen::VectorXd hy = h_inv * y;
      const double yhy = y.dot(hy);
      h_inv += ((sy + yhy) / (sy * sy)) * (s * s.transpose()) -
               (hy * s.transpose() + s * hy.transpose()) / sy;
    } else {
      h_inv = Eigen::MatrixXd::Identity(d, d);
    }
    x = x_new;
    fx = f_new;
    g = g_new;
  }

  res.x = x;
  res.value = fx;
  res.evaluations = evals;
  return res;
}

}  // namespace hiercal::optim
