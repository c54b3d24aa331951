#include "hfdaep/metrics.hpp"

#include "hfdaep/conv.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace hfdaep {
namespace {

void check_same_shape(const RealGrid& u, const RealGrid& ref, const char* who) {
    if (!u.same_shape(ref))
        throw std::invalid_argument(std::string(who) + ": dimension mismatch");
}

Kernel2D gaussian_kernel(int size, double sigma) {
    Kernel2D k(size, size);
    const int c = size / 2;
    double total = 0.0;
    for (int a = 0; a < size; ++a)
        for (int b = 0; b < size; ++b) {
            const double dy = a - c, dx = b - c;
            k.at(a, b) = std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
            total += k.at(a, b);
        }
    for (auto& w : k.weights) w /= total;
    return k;
}

}  // namespace

std::string MetricReport::line() const {
    std::ostringstream os;
    os << "psnr=" << psnr << " ssim=" << ssim << " hfen=" << hfen;
    return os.str();
}

std::string MetricReport::csv_row() const {
    std::ostringstream os;
    os << psnr << "," << ssim << "," << hfen;
    return os.str();
}

std::string MetricReport::csv_header() { return "psnr,ssim,hfen"; }

double psnr(const RealGrid& u, const RealGrid& ref) {
    check_same_shape(u, ref, "psnr");
    double peak = 0.0, mse = 0.0;
    for (std::size_t n = 0; n < ref.size(); ++n) {
        peak = std::max(peak, std::abs(ref.values[n]));
        const double d = u.values[n] - ref.values[n];
        mse += d * d;
    }
    mse /= static_cast<double>(ref.size());
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(peak * peak / mse);
}

double ssim(const RealGrid& u, const RealGrid& ref, double dynamic_range, bool global_window) {
    check_same_shape(u, ref, "ssim");
    if (!(dynamic_range > 0.0)) throw std::invalid_argument("ssim: dynamic range must be positive");
    const double c1 = std::pow(0.01 * dynamic_range, 2);
    const double c2 = std::pow(0.03 * dynamic_range, 2);

    if (global_window) {
        const double n = static_cast<double>(u.size());
        double mu = 0.0, mr = 0.0;
        for (std::size_t i = 0; i < u.size(); ++i) {
            mu += u.values[i];
            mr += ref.values[i];
        }
        mu /= n;
        mr /= n;
        double vu = 0.0, vr = 0.0, cov = 0.0;
        for (std::size_t i = 0; i < u.size(); ++i) {
            const double du = u.values[i] - mu, dr = ref.values[i] - mr;
            vu += du * du;
            vr += dr * dr;
            cov += du * dr;
        }
        vu /= n;
        vr /= n;
        cov /= n;
        return ((2.0 * mu * mr + c1) * (2.0 * cov + c2)) /
               ((mu * mu + mr * mr + c1) * (vu + vr + c2));
    }

    const Kernel2D win = gaussian_kernel(11, 1.5);
    auto filt = [&](const RealGrid& g) { return conv2d(g, win, Boundary::replicate); };
    RealGrid uu(u.height, u.width), rr(u.height, u.width), ur(u.height, u.width);
    for (std::size_t n = 0; n < u.size(); ++n) {
        uu.values[n] = u.values[n] * u.values[n];
        rr.values[n] = ref.values[n] * ref.values[n];
        ur.values[n] = u.values[n] * ref.values[n];
    }
    const RealGrid mu = filt(u), mr = filt(ref);
    const RealGrid euu = filt(uu), err = filt(rr), eur = filt(ur);

    double acc = 0.0;
    for (std::size_t n = 0; n < u.size(); ++n) {
        const double m1 = mu.values[n], m2 = mr.values[n];
        const double v1 = euu.values[n] - m1 * m1;
        const double v2 = err.values[n] - m2 * m2;
        const double cov = eur.values[n] - m1 * m2;
        acc += ((2.0 * m1 * m2 + c1) * (2.0 * cov + c2)) /
               ((m1 * m1 + m2 * m2 + c1) * (v1 + v2 + c2));
    }
    return acc / static_cast<double>(u.size());
}

Kernel2D log_kernel(int size, double sigma) {
    Kernel2D k(size, size);
    const int c = size / 2;
    const double s2 = sigma * sigma;
    double gtotal = 0.0;
    for (int a = 0; a < size; ++a)
        for (int b = 0; b < size; ++b) {
            const double dy = a - c, dx = b - c;
            k.at(a, b) = std::exp(-(dx * dx + dy * dy) / (2.0 * s2));
            gtotal += k.at(a, b);
        }
    for (int a = 0; a < size; ++a)
        for (int b = 0; b < size; ++b) {
            const double dy = a - c, dx = b - c;
            k.at(a, b) *= (dx * dx + dy * dy - 2.0 * s2) / (s2 * s2 * gtotal);
        }
    // Remove the residual mean so constants are annihilated exactly.
    double mean = 0.0;
    for (auto w : k.weights) mean += w;
    mean /= static_cast<double>(k.weights.size());
    for (auto& w : k.weights) w -= mean;
    return k;
}

double hfen(const RealGrid& u, const RealGrid& ref, bool squared) {
    check_same_shape(u, ref, "hfen");
    const Kernel2D k = log_kernel();
    if (u.height < k.kheight || u.width < k.kwidth)
        throw std::invalid_argument("hfen: grid smaller than the LoG kernel");
    const RealGrid lu = conv2d(u, k, Boundary::replicate);
    const RealGrid lr = conv2d(ref, k, Boundary::replicate);
    double num = 0.0, den = 0.0;
    for (std::size_t n = 0; n < lu.size(); ++n) {
        const double d = lu.values[n] - lr.values[n];
        num += d * d;
        den += lr.values[n] * lr.values[n];
    }
    if (den == 0.0) return num == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return squared ? num / den : std::sqrt(num / den);
}

MetricReport compute_metrics(const RealGrid& u, const RealGrid& ref, double dynamic_range) {
    MetricReport r;
    r.psnr = psnr(u, ref);
    r.ssim = ssim(u, ref, dynamic_range);
    r.hfen = hfen(u, ref);
    return r;
}

}  // namespace hfdaep
