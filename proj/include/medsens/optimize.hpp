#pragma once

#include <functional>

#include "medsens/linalg.hpp"

namespace medsens {

struct OptimizeResult {
  VectorXd argmin;
  double min = 0.0;
  int evaluations = 0;
};

struct DirectOptions {
  int budget = 4000;
  double epsilon = 1e-4;
};

// Dividing-rectangles global minimization over the box [lower, upper]; deterministic.
OptimizeResult direct_optimize(const std::function<double(const VectorXd&)>& objective, const VectorXd& lower,
                               const VectorXd& upper, const DirectOptions& opts = {});

}  // namespace medsens
