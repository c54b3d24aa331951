#include "hfdaep/mri.hpp"

#include "hfdaep/fft.hpp"
#include "hfdaep/metrics.hpp"
#include "hfdaep/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace hfdaep {
namespace {

// Distance from DFT bin (i,j) to the DC bin, with wraparound.
double dc_distance(int i, int j, int h, int w) {
    const double di = std::min(i, h - i);
    const double dj = std::min(j, w - j);
    return std::sqrt(di * di + dj * dj);
}

// Fully sampled center: 16 bins of radius at the nominal 256 grid, scaled
// down for smaller grids so the center alone cannot exceed the sampling
// budget.
double center_radius(int h, int w) { return std::min(16.0, std::min(h, w) / 16.0); }

// Expected kept fraction of the variable-density law p = min(1, c/(1+(r/r0)^2))
// with the fully kept center.
double vd_expected_fraction(double c, double r0, int h, int w) {
    const double cr = center_radius(h, w);
    double total = 0.0;
    for (int i = 0; i < h; ++i)
        for (int j = 0; j < w; ++j) {
            const double r = dc_distance(i, j, h, w);
            if (r <= cr) {
                total += 1.0;
            } else {
                const double ratio = r / r0;
                total += std::min(1.0, c / (1.0 + ratio * ratio));
            }
        }
    return total / (static_cast<double>(h) * w);
}

SamplingMask make_random2d(double R, int h, int w, std::uint64_t seed) {
    SamplingMask m;
    m.height = h;
    m.width = w;
    m.kind = MaskKind::random2d;
    m.R = R;
    m.kept.assign(static_cast<std::size_t>(h) * w, 0);

    const double target = 1.0 / R;
    const double r0 = std::max(4.0, std::min(h, w) / 16.0);

    // Bisect the density scale so the expected fraction hits the target.
    double lo = 0.0, hi = 1.0;
    while (vd_expected_fraction(hi, r0, h, w) < target && hi < 1e9) hi *= 2.0;
    for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (vd_expected_fraction(mid, r0, h, w) < target)
            lo = mid;
        else
            hi = mid;
    }
    const double c = 0.5 * (lo + hi);

    Rng rng(seed);
    const double cr = center_radius(h, w);
    for (int i = 0; i < h; ++i)
        for (int j = 0; j < w; ++j) {
            const double r = dc_distance(i, j, h, w);
            double p;
            if (r <= cr) {
                p = 1.0;
            } else {
                const double ratio = r / r0;
                p = std::min(1.0, c / (1.0 + ratio * ratio));
            }
            if (rng.uniform() < p) m.kept[static_cast<std::size_t>(i) * w + j] = 1;
        }
    m.kept[0] = 1;
    return m;
}

// Rasterizes `spokes` equiangular lines through DC onto the DFT grid and
// counts/marks the touched bins.
std::size_t rasterize_spokes(int spokes, int h, int w, std::vector<std::uint8_t>* out) {
    std::vector<std::uint8_t> kept(static_cast<std::size_t>(h) * w, 0);
    const double max_r = 0.5 * std::sqrt(static_cast<double>(h) * h + static_cast<double>(w) * w);
    for (int s = 0; s < spokes; ++s) {
        const double theta = M_PI * s / spokes;
        const double ct = std::cos(theta), st = std::sin(theta);
        const int steps = static_cast<int>(std::ceil(max_r / 0.25));
        for (int q = -steps; q <= steps; ++q) {
            const double t = q * 0.25;
            // Centered frequency coordinates, then wrapped into DFT order.
            const long ci = std::lround(t * st);
            const long cj = std::lround(t * ct);
            if (ci <= -(h - h / 2) || ci > h / 2) continue;
            if (cj <= -(w - w / 2) || cj > w / 2) continue;
            const int i = static_cast<int>((ci % h + h) % h);
            const int j = static_cast<int>((cj % w + w) % w);
            kept[static_cast<std::size_t>(i) * w + j] = 1;
        }
    }
    std::size_t count = 0;
    for (auto k : kept) count += k;
    if (out) *out = std::move(kept);
    return count;
}

SamplingMask make_radial(double R, int h, int w, std::uint64_t /*seed*/) {
    SamplingMask m;
    m.height = h;
    m.width = w;
    m.kind = MaskKind::radial;
    m.R = R;

    const double target = static_cast<double>(h) * w / R;
    // Kept count is monotone in the spoke count; search for the best fit.
    int lo = 1, hi = 2;
    while (rasterize_spokes(hi, h, w, nullptr) < target && hi < 8 * std::max(h, w)) hi *= 2;
    while (hi - lo > 1) {
        const int mid = (lo + hi) / 2;
        if (rasterize_spokes(mid, h, w, nullptr) < target)
            lo = mid;
        else
            hi = mid;
    }
    const std::size_t clo = rasterize_spokes(lo, h, w, nullptr);
    const std::size_t chi = rasterize_spokes(hi, h, w, nullptr);
    const int spokes = (target - clo <= chi - target) ? lo : hi;

    rasterize_spokes(spokes, h, w, &m.kept);
    m.kept[0] = 1;
    return m;
}

SamplingMask make_cartesian1d(double R, int h, int w, std::uint64_t seed) {
    SamplingMask m;
    m.height = h;
    m.width = w;
    m.kind = MaskKind::cartesian1d;
    m.R = R;
    m.kept.assign(static_cast<std::size_t>(h) * w, 0);

    const int rows_target = std::clamp(static_cast<int>(std::lround(h / R)), 1, h);
    const double r0 = std::max(2.0, h / 16.0);
    std::vector<double> weight(h);
    for (int i = 0; i < h; ++i) {
        const double d = std::min(i, h - i) / r0;
        weight[i] = 1.0 / (1.0 + d * d);
    }

    // Weighted draws without replacement give an exact row count.
    std::vector<int> chosen;
    std::vector<bool> taken(h, false);
    taken[0] = true;  // DC row always acquired
    chosen.push_back(0);
    Rng rng(seed);
    while (static_cast<int>(chosen.size()) < rows_target) {
        double total = 0.0;
        for (int i = 0; i < h; ++i)
            if (!taken[i]) total += weight[i];
        double x = rng.uniform() * total;
        int pick = -1;
        for (int i = 0; i < h; ++i) {
            if (taken[i]) continue;
            x -= weight[i];
            if (x <= 0.0) {
                pick = i;
                break;
            }
        }
        if (pick < 0)
            for (int i = h - 1; i >= 0; --i)
                if (!taken[i]) {
                    pick = i;
                    break;
                }
        taken[pick] = true;
        chosen.push_back(pick);
    }
    for (int i : chosen)
        for (int j = 0; j < w; ++j) m.kept[static_cast<std::size_t>(i) * w + j] = 1;
    return m;
}

}  // namespace

SamplingMask make_mask(MaskKind kind, double R, int height, int width, std::uint64_t seed) {
    if (!(R >= 1.0)) throw std::invalid_argument("make_mask: acceleration R must be >= 1");
    checked_extent(height, width);
    if (R == 1.0) {
        SamplingMask m;
        m.height = height;
        m.width = width;
        m.kind = kind;
        m.R = R;
        m.kept.assign(static_cast<std::size_t>(height) * width, 1);
        return m;
    }
    switch (kind) {
        case MaskKind::random2d: return make_random2d(R, height, width, seed);
        case MaskKind::radial: return make_radial(R, height, width, seed);
        case MaskKind::cartesian1d: return make_cartesian1d(R, height, width, seed);
    }
    throw std::invalid_argument("make_mask: unknown kind");
}

KSpaceData encode(const ComplexGrid& u, const SamplingMask& mask) {
    if (u.height != mask.height || u.width != mask.width)
        throw std::invalid_argument("encode: image/mask dimension mismatch");
    KSpaceData y;
    y.mask = mask;
    y.samples = fft2(u);
    const double scale = 1.0 / std::sqrt(static_cast<double>(u.size()));
    for (std::size_t n = 0; n < y.samples.size(); ++n)
        y.samples.values[n] = mask.kept[n] ? y.samples.values[n] * scale : 0.0;
    return y;
}

ComplexGrid adjoint(const KSpaceData& y) {
    if (y.samples.height != y.mask.height || y.samples.width != y.mask.width)
        throw std::invalid_argument("adjoint: samples/mask dimension mismatch");
    ComplexGrid masked = y.samples;
    for (std::size_t n = 0; n < masked.size(); ++n)
        if (!y.mask.kept[n]) masked.values[n] = 0.0;
    ComplexGrid img = ifft2(masked);
    const double scale = std::sqrt(static_cast<double>(img.size()));
    for (auto& v : img.values) v *= scale;
    return img;
}

KSpaceData add_kspace_noise(const KSpaceData& y, double snr_db, std::uint64_t seed) {
    KSpaceData out = y;
    const std::size_t kept = y.mask.kept_count();
    if (kept == 0) return out;
    double power = 0.0;
    for (std::size_t n = 0; n < y.samples.size(); ++n)
        if (y.mask.kept[n]) power += std::norm(y.samples.values[n]);
    power /= static_cast<double>(kept);
    const double sigma = std::sqrt(power * std::pow(10.0, -snr_db / 10.0) / 2.0);
    Rng rng(seed);
    for (std::size_t n = 0; n < out.samples.size(); ++n)
        if (out.mask.kept[n])
            out.samples.values[n] += std::complex<double>(rng.gaussian(0.0, sigma),
                                                          rng.gaussian(0.0, sigma));
    return out;
}

ComplexGrid dc_update(const ComplexGrid& z, const KSpaceData& y, double lambda) {
    if (!(lambda > 0.0)) throw std::invalid_argument("dc_update: lambda must be positive");
    if (!z.same_shape(y.samples))
        throw std::invalid_argument("dc_update: iterate/data dimension mismatch");
    ComplexGrid fz = fft2(z);
    const double scale = 1.0 / std::sqrt(static_cast<double>(z.size()));
    for (auto& v : fz.values) v *= scale;

    for (std::size_t n = 0; n < fz.values.size(); ++n)
        if (y.mask.kept[n])
            fz.values[n] = (y.samples.values[n] + lambda * fz.values[n]) / (1.0 + lambda);

    ComplexGrid out = ifft2(fz);
    const double back = std::sqrt(static_cast<double>(z.size()));
    for (auto& v : out.values) v *= back;
    return out;
}

MriReconResult reconstruct_mri(const KSpaceData& y, const MriReconConfig& cfg,
                               const ComplexGrid* reference) {
    if (cfg.iterations < 1) throw std::invalid_argument("reconstruct_mri: iterations must be >= 1");
    cfg.prior.validate(true);

    MriReconResult result;
    ComplexGrid u = adjoint(y);
    for (int k = 0; k < cfg.iterations; ++k) {
        const ComplexGrid g = prior_gradient(cfg.prior, u);
        ComplexGrid z = u;
        for (std::size_t n = 0; n < z.size(); ++n) z.values[n] -= g.values[n];
        ComplexGrid next = dc_update(z, y, cfg.lambda);

        double change = 0.0, base = 0.0;
        bool finite = true;
        for (std::size_t n = 0; n < next.size(); ++n) {
            const auto d = next.values[n] - u.values[n];
            change += std::norm(d);
            base += std::norm(u.values[n]);
            if (!std::isfinite(next.values[n].real()) || !std::isfinite(next.values[n].imag()))
                finite = false;
        }
        if (!finite)
            throw std::runtime_error("reconstruct_mri: non-finite iterate at iteration " +
                                     std::to_string(k + 1));
        u = std::move(next);

        IterationStat stat;
        stat.iteration = k + 1;
        stat.change = base > 0.0 ? std::sqrt(change / base) : std::sqrt(change);
        stat.psnr = reference ? psnr(u.magnitude(), reference->magnitude())
                              : std::numeric_limits<double>::quiet_NaN();
        result.trace.push_back(stat);
    }
    result.image = std::move(u);
    return result;
}

}  // namespace hfdaep
