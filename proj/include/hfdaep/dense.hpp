#pragma once

#include <vector>

namespace hfdaep {

/// Solves a * x = b for a dense square system given in row-major order.
/// Throws std::runtime_error (message carries the reciprocal condition
/// estimate) when the matrix is singular or too ill-conditioned to trust.
std::vector<double> dense_solve(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace hfdaep
