#pragma once

#include <stdexcept>

namespace ltp {

/// Base class of all library failures.
struct error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Malformed input data (scenario files, report schemas). Messages carry the
/// offending field path.
struct schema_error : error {
  using error::error;
};

/// Numerical failure: non-finite evaluation, ill-conditioned matrix, aborted
/// integration. Messages carry the stage and, where known, the parameter value.
struct numeric_error : error {
  using error::error;
};

}  // namespace ltp
