#include "hfdaep/ct.hpp"

#include "hfdaep/fft.hpp"
#include "hfdaep/metrics.hpp"
#include "hfdaep/rng.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <stdexcept>

namespace hfdaep {

void FanGeometry::validate() const {
    if (!(source_to_center > 0.0) || !(detector_to_center > 0.0) || !(image_extent > 0.0) ||
        !(detector_width > 0.0))
        throw std::invalid_argument("FanGeometry: lengths must be positive");
    if (image_pixels < 1 || detector_bins < 1)
        throw std::invalid_argument("FanGeometry: counts must be positive");
    if (view_angles.empty()) throw std::invalid_argument("FanGeometry: no view angles");
    for (double a : view_angles)
        if (!(a >= 0.0) || !(a < 2.0 * M_PI))
            throw std::invalid_argument("FanGeometry: angles must lie in [0, 2*pi)");
    // The source must stay outside the image square.
    if (source_to_center <= image_extent * M_SQRT1_2)
        throw std::invalid_argument("FanGeometry: source inside the image region");
}

std::vector<double> FanGeometry::uniform_angles(int views) {
    if (views < 1) throw std::invalid_argument("uniform_angles: views must be positive");
    std::vector<double> a(views);
    for (int v = 0; v < views; ++v) a[v] = 2.0 * M_PI * v / views;
    return a;
}

double NoiseModel::variance(std::size_t i) const { return f_at(i) * std::exp(mu[i] / T); }

void NoiseModel::validate(std::size_t bins_total) const {
    if (!(T > 0.0)) throw std::invalid_argument("NoiseModel: T must be positive");
    if (f.empty() || (f.size() != 1 && f.size() != bins_total))
        throw std::invalid_argument("NoiseModel: f must be scalar or match the sinogram");
    for (double v : f)
        if (!(v > 0.0)) throw std::invalid_argument("NoiseModel: f must be positive");
    if (!mu.empty() && mu.size() != bins_total)
        throw std::invalid_argument("NoiseModel: mu must match the sinogram");
}

namespace {

// Walks one ray through the pixel grid, reporting exact intersection lengths.
// The square spans [lo, lo + n*delta]^2; visit(row, col, length_cm).
template <typename Visit>
void trace_ray(double ax, double ay, double bx, double by, double lo, double delta, int n,
               Visit&& visit) {
    const double dx = bx - ax, dy = by - ay;
    const double hi = lo + n * delta;
    double t0 = 0.0, t1 = 1.0;

    auto clip = [](double a, double d, double mn, double mx, double& s0, double& s1) -> bool {
        if (d == 0.0) return a > mn && a < mx;
        double ta = (mn - a) / d, tb = (mx - a) / d;
        if (ta > tb) std::swap(ta, tb);
        s0 = std::max(s0, ta);
        s1 = std::min(s1, tb);
        return true;
    };
    if (!clip(ax, dx, lo, hi, t0, t1)) return;
    if (!clip(ay, dy, lo, hi, t0, t1)) return;
    if (!(t0 < t1)) return;

    const double len = std::hypot(dx, dy);
    const double px = ax + t0 * dx, py = ay + t0 * dy;
    int ix = std::clamp(static_cast<int>(std::floor((px - lo) / delta)), 0, n - 1);
    int iy = std::clamp(static_cast<int>(std::floor((py - lo) / delta)), 0, n - 1);

    const double inf = std::numeric_limits<double>::infinity();
    const int sx = dx > 0.0 ? 1 : -1;
    const int sy = dy > 0.0 ? 1 : -1;
    const double tx_step = dx != 0.0 ? delta / std::abs(dx) : inf;
    const double ty_step = dy != 0.0 ? delta / std::abs(dy) : inf;

    double tx_next = inf, ty_next = inf;
    if (dx > 0.0)
        tx_next = (lo + (ix + 1) * delta - ax) / dx;
    else if (dx < 0.0)
        tx_next = (lo + ix * delta - ax) / dx;
    if (dy > 0.0)
        ty_next = (lo + (iy + 1) * delta - ay) / dy;
    else if (dy < 0.0)
        ty_next = (lo + iy * delta - ay) / dy;

    double t = t0;
    while (t < t1) {
        const double tn = std::min({tx_next, ty_next, t1});
        if (tn > t) visit(iy, ix, (tn - t) * len);
        t = tn;
        if (tn >= t1) break;
        if (tx_next <= ty_next) {
            ix += sx;
            tx_next += tx_step;
            if (ix < 0 || ix >= n) break;
        }
        if (ty_next <= t) {  // also advances on exact corner hits
            iy += sy;
            ty_next += ty_step;
            if (iy < 0 || iy >= n) break;
        }
    }
}

struct Ray {
    double ax, ay, bx, by;
};

Ray make_ray(const FanGeometry& g, int view, int bin) {
    const double beta = g.view_angles[view];
    const double cb = std::cos(beta), sb = std::sin(beta);
    const double s = (bin + 0.5) * g.detector_width / g.detector_bins - 0.5 * g.detector_width;
    Ray r;
    r.ax = g.source_to_center * cb;
    r.ay = g.source_to_center * sb;
    r.bx = -g.detector_to_center * cb - s * sb;
    r.by = -g.detector_to_center * sb + s * cb;
    return r;
}

void check_image(const RealGrid& u, const FanGeometry& g) {
    if (u.height != g.image_pixels || u.width != g.image_pixels)
        throw std::invalid_argument("ct: image must be square with geometry.image_pixels per side");
}

}  // namespace

Sinogram siddon_project(const RealGrid& u, const FanGeometry& g) {
    g.validate();
    check_image(u, g);
    const double lo = -0.5 * g.image_extent;
    const double delta = g.pixel_size();
    Sinogram s(g.views(), g.detector_bins);
#pragma omp parallel for schedule(static)
    for (int v = 0; v < g.views(); ++v) {
        for (int b = 0; b < g.detector_bins; ++b) {
            const Ray r = make_ray(g, v, b);
            double acc = 0.0;
            trace_ray(r.ax, r.ay, r.bx, r.by, lo, delta, g.image_pixels,
                      [&](int iy, int ix, double len) { acc += u.at(iy, ix) * len; });
            s.at(v, b) = acc;
        }
    }
    return s;
}

RealGrid backproject(const Sinogram& s, const FanGeometry& g) {
    g.validate();
    if (s.views != g.views() || s.bins != g.detector_bins)
        throw std::invalid_argument("backproject: sinogram does not match geometry");
    const double lo = -0.5 * g.image_extent;
    const double delta = g.pixel_size();
    RealGrid img(g.image_pixels, g.image_pixels);
    for (int v = 0; v < g.views(); ++v) {
        for (int b = 0; b < g.detector_bins; ++b) {
            const double val = s.at(v, b);
            if (val == 0.0) continue;
            const Ray r = make_ray(g, v, b);
            trace_ray(r.ax, r.ay, r.bx, r.by, lo, delta, g.image_pixels,
                      [&](int iy, int ix, double len) { img.at(iy, ix) += val * len; });
        }
    }
    return img;
}

Sinogram add_ct_noise(const Sinogram& s, const NoiseModel& nm, std::uint64_t seed) {
    NoiseModel local = nm;
    if (local.mu.empty()) local.mu = s.values;  // clean sinogram supplies the means
    local.validate(s.size());
    if (local.mu.size() != s.size())
        throw std::invalid_argument("add_ct_noise: mu does not match the sinogram");
    Sinogram out = s;
    Rng rng(seed);
    for (std::size_t i = 0; i < out.values.size(); ++i)
        out.values[i] += std::sqrt(local.variance(i)) * rng.gaussian();
    return out;
}

RealGrid fbp(const Sinogram& s, const FanGeometry& g) {
    g.validate();
    if (s.views != g.views() || s.bins != g.detector_bins)
        throw std::invalid_argument("fbp: sinogram does not match geometry");
    if (g.views() < 2) throw std::invalid_argument("fbp: needs at least 2 views");

    const int nbins = g.detector_bins;
    const double d_s = g.source_to_center;
    // Detector rescaled to a virtual detector through the isocenter.
    const double ds_virtual = (g.detector_width / nbins) * d_s / (d_s + g.detector_to_center);

    int padded = 1;
    while (padded < 2 * nbins) padded *= 2;

    // Band-limited ramp filter, built from the exact spatial kernel.
    ComplexGrid kernel(1, padded);
    kernel.values[0] = 1.0 / (4.0 * ds_virtual * ds_virtual);
    for (int m = 1; m < padded / 2 + 1; ++m) {
        double h = 0.0;
        if (m % 2 == 1) h = -1.0 / (M_PI * M_PI * m * m * ds_virtual * ds_virtual);
        kernel.values[m] = h;
        kernel.values[padded - m] = h;
    }
    const ComplexGrid kernel_f = fft2(kernel);

    // Cosine weighting + ramp filtering per view.
    std::vector<double> filtered(static_cast<std::size_t>(s.views) * nbins);
#pragma omp parallel for schedule(static)
    for (int v = 0; v < s.views; ++v) {
        ComplexGrid row(1, padded);
        for (int b = 0; b < nbins; ++b) {
            const double sp = (b + 0.5 - 0.5 * nbins) * ds_virtual;
            row.values[b] = s.at(v, b) * d_s / std::sqrt(d_s * d_s + sp * sp);
        }
        ComplexGrid rf = fft2(row);
        for (int m = 0; m < padded; ++m) rf.values[m] *= kernel_f.values[m];
        const ComplexGrid back = ifft2(rf);
        for (int b = 0; b < nbins; ++b)
            filtered[static_cast<std::size_t>(v) * nbins + b] = back.values[b].real() * ds_virtual;
    }

    // Uniform angular spacing assumed; full-scan data covers each ray twice.
    const double dbeta =
        g.views() >= 2 ? g.view_angles[1] - g.view_angles[0] : 2.0 * M_PI / g.views();
    const double scale = dbeta / 2.0;

    std::vector<double> cbs(s.views), sbs(s.views);
    for (int v = 0; v < s.views; ++v) {
        cbs[v] = std::cos(g.view_angles[v]);
        sbs[v] = std::sin(g.view_angles[v]);
    }

    RealGrid img(g.image_pixels, g.image_pixels);
    const double lo = -0.5 * g.image_extent;
    const double delta = g.pixel_size();
#pragma omp parallel for schedule(static)
    for (int i = 0; i < g.image_pixels; ++i) {
        const double y = lo + (i + 0.5) * delta;
        for (int j = 0; j < g.image_pixels; ++j) {
            const double x = lo + (j + 0.5) * delta;
            double acc = 0.0;
            for (int v = 0; v < s.views; ++v) {
                const double cb = cbs[v], sb = sbs[v];
                const double ell = d_s - (x * cb + y * sb);
                if (ell <= 0.0) continue;
                const double sp = d_s * (-x * sb + y * cb) / ell;
                const double pos = sp / ds_virtual + 0.5 * nbins - 0.5;
                const int b0 = static_cast<int>(std::floor(pos));
                if (b0 < -1 || b0 > nbins - 1) continue;
                const double frac = pos - b0;
                const double q0 =
                    b0 >= 0 ? filtered[static_cast<std::size_t>(v) * nbins + b0] : 0.0;
                const double q1 =
                    b0 + 1 < nbins ? filtered[static_cast<std::size_t>(v) * nbins + b0 + 1] : 0.0;
                acc += (d_s * d_s / (ell * ell)) * ((1.0 - frac) * q0 + frac * q1);
            }
            img.at(i, j) = acc * scale;
        }
    }
    return img;
}

namespace {

std::vector<double> make_weights(const Sinogram& y, const NoiseModel& nm, CtWeighting weighting) {
    std::vector<double> w(y.size(), 1.0);
    if (weighting == CtWeighting::unweighted) return w;
    NoiseModel local = nm;
    if (local.mu.empty()) local.mu = y.values;
    local.validate(y.size());
    for (std::size_t i = 0; i < w.size(); ++i) {
        const double var = local.variance(i);
        w[i] = weighting == CtWeighting::pwls ? 1.0 / var : 1.0 / std::sqrt(var);
    }
    return w;
}

RealGrid surrogate_denominator(const FanGeometry& g, const std::vector<double>& w) {
    RealGrid ones(g.image_pixels, g.image_pixels, 1.0);
    Sinogram proj = siddon_project(ones, g);
    for (std::size_t i = 0; i < proj.values.size(); ++i) proj.values[i] *= w[i];
    return backproject(proj, g);
}

RealGrid pwls_step_impl(const RealGrid& u, const Sinogram& y, const FanGeometry& g,
                        const std::vector<double>& w, const RealGrid& den,
                        const RealGrid* grad_g, double lambda) {
    Sinogram residual = siddon_project(u, g);
    for (std::size_t i = 0; i < residual.values.size(); ++i)
        residual.values[i] = w[i] * (residual.values[i] - y.values[i]);
    const RealGrid num = backproject(residual, g);

    RealGrid out = u;
    std::size_t holes = 0;
    for (std::size_t n = 0; n < out.size(); ++n) {
        const double d = den.values[n] + lambda;
        if (d == 0.0) {
            ++holes;  // no ray coverage and no penalty: leave the pixel alone
            continue;
        }
        const double gg = grad_g ? grad_g->values[n] : 0.0;
        out.values[n] = u.values[n] - (num.values[n] + lambda * gg) / d;
    }
    if (holes > 0)
        std::cerr << "pwls_step: " << holes << " pixel(s) without ray coverage left unchanged\n";
    return out;
}

}  // namespace

RealGrid pwls_step(const RealGrid& u, const Sinogram& y, const NoiseModel& nm,
                   const FanGeometry& g, const RealGrid* grad_g, double lambda,
                   CtWeighting weighting) {
    g.validate();
    check_image(u, g);
    if (y.views != g.views() || y.bins != g.detector_bins)
        throw std::invalid_argument("pwls_step: sinogram does not match geometry");
    if (lambda < 0.0) throw std::invalid_argument("pwls_step: lambda must be nonnegative");
    if (grad_g && !grad_g->same_shape(u))
        throw std::invalid_argument("pwls_step: prior gradient shape mismatch");
    const std::vector<double> w = make_weights(y, nm, weighting);
    const RealGrid den = surrogate_denominator(g, w);
    return pwls_step_impl(u, y, g, w, den, grad_g, lambda);
}

CtReconResult reconstruct_ct(const Sinogram& y, const NoiseModel& nm, const FanGeometry& g,
                             const CtReconConfig& cfg, const RealGrid* reference) {
    g.validate();
    if (cfg.iterations < 1) throw std::invalid_argument("reconstruct_ct: iterations must be >= 1");
    cfg.prior.validate(false);

    const std::vector<double> w = make_weights(y, nm, cfg.weighting);
    const RealGrid den = surrogate_denominator(g, w);

    CtReconResult result;
    RealGrid u = fbp(y, g);
    for (int k = 0; k < cfg.iterations; ++k) {
        const RealGrid grad = prior_gradient(cfg.prior, u);
        RealGrid next = pwls_step_impl(u, y, g, w, den, &grad, cfg.lambda);

        double change = 0.0, base = 0.0;
        bool finite = true;
        for (std::size_t n = 0; n < next.size(); ++n) {
            const double d = next.values[n] - u.values[n];
            change += d * d;
            base += u.values[n] * u.values[n];
            if (!std::isfinite(next.values[n])) finite = false;
        }
        if (!finite)
            throw std::runtime_error("reconstruct_ct: non-finite iterate at iteration " +
                                     std::to_string(k + 1));
        u = std::move(next);

        CtIterationStat stat;
        stat.iteration = k + 1;
        stat.change = base > 0.0 ? std::sqrt(change / base) : std::sqrt(change);
        stat.psnr = reference ? psnr(u, *reference) : std::numeric_limits<double>::quiet_NaN();
        result.trace.push_back(stat);
    }
    result.image = std::move(u);
    return result;
}

FanGeometry sparse_view_geometry(const FanGeometry& g, int count) {
    if (count < 1 || count > g.views())
        throw std::invalid_argument("sparse_view_geometry: bad view count");
    const int step = g.views() / count;
    FanGeometry out = g;
    out.view_angles.clear();
    for (int i = 0; i < count; ++i) out.view_angles.push_back(g.view_angles[i * step]);
    return out;
}

Sinogram sparse_view_sinogram(const Sinogram& s, const FanGeometry& full, int count) {
    if (s.views != full.views())
        throw std::invalid_argument("sparse_view_sinogram: sinogram does not match geometry");
    const int step = full.views() / count;
    Sinogram out(count, s.bins);
    for (int i = 0; i < count; ++i)
        for (int b = 0; b < s.bins; ++b) out.at(i, b) = s.at(i * step, b);
    return out;
}

}  // namespace hfdaep
