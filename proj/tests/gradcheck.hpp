#pragma once

#include <algorithm>
#include <cmath>
#include <functional>

#include <Eigen/Dense>

namespace starris::testing {

// Largest componentwise relative error between an analytic gradient and
// central differences of f at x. Components whose magnitude is below
// `floor` are compared on that absolute scale instead.
inline double max_relative_error(const Eigen::VectorXd& analytic,
                                 const std::function<double(const Eigen::VectorXd&)>& f,
                                 const Eigen::VectorXd& x, double h = 1e-5,
                                 double floor = 1e-6) {
  Eigen::VectorXd p = x;
  double worst = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    p[i] = x[i] + h;
    const double up = f(p);
    p[i] = x[i] - h;
    const double down = f(p);
    p[i] = x[i];
    const double numeric = (up - down) / (2.0 * h);
    const double scale = std::max({std::abs(numeric), std::abs(analytic[i]), floor});
    worst = std::max(worst, std::abs(numeric - analytic[i]) / scale);
  }
  return worst;
}

}  // namespace starris::testing
