#pragma once

#include "hfdaep/grid.hpp"

namespace hfdaep {

enum class Boundary { periodic, replicate, zero };

/// "Same"-size 2D convolution in the true convolution orientation: the kernel
/// is flipped, out(i,j) = sum_{a,b} k(a,b) * g(i - a + cy, j - b + cx) with
/// (cy,cx) the kernel center. Correlation is obtained by passing a flipped
/// kernel. Throws if the kernel is larger than the grid.
RealGrid conv2d(const RealGrid& g, const Kernel2D& k, Boundary boundary);

}  // namespace hfdaep
