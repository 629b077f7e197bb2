#pragma once

#include <cstddef>
#include <vector>

namespace vgne {

/// One diagnostics row per recorded outer iteration.
struct TraceRow {
  std::size_t k = 0;
  double step_norm = 0.0;        ///< |x_k - x_{k-1}|
  double consensus_error = 0.0;  ///< max_i |lambda_i - mean|
  double feasibility = 0.0;      ///< |sum A x - sum b| or max violation
  double stationarity = 0.0;
  double complementarity = 0.0;
  std::size_t inner_iterations = 0;
  double mu_k = 0.0;
};

struct StopCriteria {
  std::size_t max_iter = 10000;
  double tol = 1e-6;
};

struct RunOptions {
  StopCriteria stop;
  std::size_t trace_stride = 1;
};

}  // namespace vgne
