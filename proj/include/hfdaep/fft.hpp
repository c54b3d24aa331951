#pragma once

#include "hfdaep/grid.hpp"

namespace hfdaep {

/// 2D discrete Fourier transform, unnormalized forward convention:
///   F(u)(j,k) = sum_{p,q} u(p,q) exp(-2*pi*i*(j*p/H + k*q/W)).
/// Works for arbitrary (non power-of-two) sizes.
ComplexGrid fft2(const ComplexGrid& g);

/// Inverse transform carrying the full 1/(H*W) normalization, so
/// ifft2(fft2(g)) == g.
ComplexGrid ifft2(const ComplexGrid& g);

}  // namespace hfdaep
