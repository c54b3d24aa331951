#pragma once

#include "hfdaep/grid.hpp"
#include "hfdaep/prior.hpp"

#include <cstdint>
#include <vector>

namespace hfdaep {

/// Fan-beam acquisition with a flat equispaced detector. Lengths are in cm;
/// the square image region is centered on the rotation axis.
struct FanGeometry {
    double source_to_center = 40.0;
    double detector_to_center = 40.0;
    double image_extent = 20.0;
    int image_pixels = 128;
    double detector_width = 41.3;
    int detector_bins = 512;
    std::vector<double> view_angles;  // radians in [0, 2*pi)

    int views() const { return static_cast<int>(view_angles.size()); }
    double pixel_size() const { return image_extent / image_pixels; }
    void validate() const;

    /// Uniform full-scan angle set.
    static std::vector<double> uniform_angles(int views);
};

/// views x bins line integrals (attenuation * cm).
struct Sinogram {
    int views = 0;
    int bins = 0;
    std::vector<double> values;

    Sinogram() = default;
    Sinogram(int v, int b, double fill = 0.0)
        : views(v), bins(b), values(checked_extent(v, b), fill) {}
    double& at(int v, int b) { return values[static_cast<std::size_t>(v) * bins + b]; }
    double at(int v, int b) const { return values[static_cast<std::size_t>(v) * bins + b]; }
    std::size_t size() const { return values.size(); }
};

/// Per-bin Gaussian noise with variance delta_i^2 = f_i * exp(mu_i / T).
struct NoiseModel {
    std::vector<double> f;  // per-bin positive scale (views*bins, or size 1 broadcast)
    double T = 2.0;
    std::vector<double> mu;  // mean projection values, taken from the clean sinogram

    double f_at(std::size_t i) const { return f.size() == 1 ? f[0] : f[i]; }
    double variance(std::size_t i) const;
    void validate(std::size_t bins_total) const;
};

enum class CtWeighting { pwls, pwls_inv_delta, unweighted };

struct CtReconConfig {
    double lambda = 50.0;
    int iterations = 100;
    PriorContext prior;
    CtWeighting weighting = CtWeighting::unweighted;
};

/// Ray-driven projection: exact ray/pixel intersection lengths (Siddon
/// parametric traversal) accumulated along each source-to-detector-bin ray.
Sinogram siddon_project(const RealGrid& u, const FanGeometry& g);

/// Transpose of siddon_project with identical intersection lengths.
RealGrid backproject(const Sinogram& s, const FanGeometry& g);

Sinogram add_ct_noise(const Sinogram& s, const NoiseModel& nm, std::uint64_t seed);

/// Fan-beam filtered back-projection for a flat detector: cosine weighting,
/// frequency-domain Ram-Lak filtering per view, distance-weighted
/// backprojection. Baseline method and iteration start.
RealGrid fbp(const Sinogram& s, const FanGeometry& g);

/// One separable-paraboloid-surrogate update of every pixel. `grad_g` is the
/// prior gradient at the current iterate (pass nullptr for a pure data step);
/// weights follow `weighting` (pwls: 1/delta^2). Pixels with zero denominator
/// (no ray coverage, lambda = 0) are left unchanged.
RealGrid pwls_step(const RealGrid& u, const Sinogram& y, const NoiseModel& nm,
                   const FanGeometry& g, const RealGrid* grad_g, double lambda,
                   CtWeighting weighting);

struct CtIterationStat {
    int iteration = 0;
    double change = 0.0;
    double psnr = 0.0;  // NaN when no reference
};

struct CtReconResult {
    RealGrid image;
    std::vector<CtIterationStat> trace;
};

/// FBP initialization followed by alternating prior-gradient / surrogate
/// updates.
CtReconResult reconstruct_ct(const Sinogram& y, const NoiseModel& nm, const FanGeometry& g,
                             const CtReconConfig& cfg, const RealGrid* reference = nullptr);

/// Geometry restricted to `count` views, taking every floor(views/count)-th
/// angle, and the matching rows of a sinogram.
FanGeometry sparse_view_geometry(const FanGeometry& g, int count);
Sinogram sparse_view_sinogram(const Sinogram& s, const FanGeometry& full, int count);

}  // namespace hfdaep
