#pragma once

#include "hfdaep/grid.hpp"
#include "hfdaep/prior.hpp"

#include <cstdint>
#include <vector>

namespace hfdaep {

enum class MaskKind { random2d, radial, cartesian1d };

/// Boolean k-space sampling pattern; bins are in DFT order (DC at index 0,0).
struct SamplingMask {
    int height = 0;
    int width = 0;
    std::vector<std::uint8_t> kept;
    MaskKind kind = MaskKind::random2d;
    double R = 1.0;

    bool is_kept(int i, int j) const { return kept[static_cast<std::size_t>(i) * width + j] != 0; }
    std::size_t kept_count() const {
        std::size_t n = 0;
        for (auto k : kept) n += k;
        return n;
    }
    double kept_fraction() const {
        return static_cast<double>(kept_count()) / static_cast<double>(kept.size());
    }
};

/// Undersampled k-space measurements; samples are zero wherever the mask
/// discards a bin.
struct KSpaceData {
    ComplexGrid samples;
    SamplingMask mask;
};

struct MriReconConfig {
    double lambda = 0.1;
    int iterations = 100;
    PriorContext prior;
};

/// Deterministic sampling-mask generation. random2d draws bins with a radial
/// variable-density law (fully kept 16-bin-radius center); radial rasterizes
/// equiangular spokes through DC, the spoke count chosen so the kept fraction
/// lands on 1/R; cartesian1d keeps whole rows, density-weighted toward the
/// center, totaling round(height/R) rows. The DC bin is always kept.
SamplingMask make_mask(MaskKind kind, double R, int height, int width, std::uint64_t seed);

/// encode = mask .* fft2(u) under the orthonormal (1/sqrt(HW)) scaling, so
/// that adjoint is the exact conjugate transpose and adjoint(encode(u)) == u
/// for a full mask.
KSpaceData encode(const ComplexGrid& u, const SamplingMask& mask);
ComplexGrid adjoint(const KSpaceData& y);

/// Adds complex Gaussian noise of the requested SNR (dB, relative to the RMS
/// of the kept samples) to the kept bins.
KSpaceData add_kspace_noise(const KSpaceData& y, double snr_db, std::uint64_t seed);

/// Closed-form data-consistency solve: at kept bins the spectrum becomes
/// (y + lambda*F(z)) / (1 + lambda), elsewhere F(z) is kept as is.
ComplexGrid dc_update(const ComplexGrid& z, const KSpaceData& y, double lambda);

struct IterationStat {
    int iteration = 0;
    double change = 0.0;  // relative iterate change
    double psnr = 0.0;    // vs. reference magnitude, NaN when no reference
};

struct MriReconResult {
    ComplexGrid image;
    std::vector<IterationStat> trace;
};

/// Alternates a prior-gradient descent step with the data-consistency solve,
/// starting from the zero-filled adjoint. `reference` (optional) enables the
/// PSNR column of the trace.
MriReconResult reconstruct_mri(const KSpaceData& y, const MriReconConfig& cfg,
                               const ComplexGrid* reference = nullptr);

}  // namespace hfdaep
