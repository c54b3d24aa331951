#pragma once

#include "hfdaep/grid.hpp"

#include <string>

namespace hfdaep {

struct MetricReport {
    double psnr = 0.0;
    double ssim = 0.0;
    double hfen = 0.0;

    std::string line() const;     // "psnr=<v> ssim=<v> hfen=<v>"
    std::string csv_row() const;  // "<psnr>,<ssim>,<hfen>"
    static std::string csv_header();
};

/// 10*log10(Max(ref)^2 / MSE). Identical inputs return the +infinity sentinel.
double psnr(const RealGrid& u, const RealGrid& ref);

/// Mean structural similarity. Windowed mode (default) slides an 11x11
/// Gaussian window with sigma 1.5; global mode evaluates the index once over
/// whole-image statistics. dynamic_range is the C in c1=(0.01C)^2, c2=(0.03C)^2.
double ssim(const RealGrid& u, const RealGrid& ref, double dynamic_range = 1.0,
            bool global_window = false);

/// High-frequency error norm: ||LoG(u) - LoG(ref)||_F^2 / ||LoG(ref)||_F^2
/// with a 15x15, sigma 1.5 Laplacian-of-Gaussian kernel and replicate
/// boundary. `squared=false` selects the plain norm-ratio variant.
double hfen(const RealGrid& u, const RealGrid& ref, bool squared = true);

/// The zero-sum LoG kernel used by hfen.
Kernel2D log_kernel(int size = 15, double sigma = 1.5);

MetricReport compute_metrics(const RealGrid& u, const RealGrid& ref, double dynamic_range = 1.0);

}  // namespace hfdaep
