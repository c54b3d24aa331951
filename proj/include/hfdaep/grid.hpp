#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace hfdaep {

inline std::size_t checked_extent(int height, int width) {
    if (height < 1 || width < 1)
        throw std::invalid_argument("grid dimensions must be at least 1x1, got " +
                                    std::to_string(height) + "x" + std::to_string(width));
    return static_cast<std::size_t>(height) * static_cast<std::size_t>(width);
}

/// Row-major 2D grid of real samples (dimensionless intensity).
struct RealGrid {
    int height = 0;
    int width = 0;
    std::vector<double> values;

    RealGrid() = default;
    RealGrid(int h, int w, double fill = 0.0)
        : height(h), width(w), values(checked_extent(h, w), fill) {}

    double& at(int i, int j) { return values[static_cast<std::size_t>(i) * width + j]; }
    double at(int i, int j) const { return values[static_cast<std::size_t>(i) * width + j]; }
    std::size_t size() const { return values.size(); }

    bool same_shape(const RealGrid& o) const { return height == o.height && width == o.width; }

    bool finite() const {
        for (double v : values)
            if (!std::isfinite(v)) return false;
        return true;
    }
};

/// Row-major 2D grid of complex samples.
struct ComplexGrid {
    int height = 0;
    int width = 0;
    std::vector<std::complex<double>> values;

    ComplexGrid() = default;
    ComplexGrid(int h, int w, std::complex<double> fill = {})
        : height(h), width(w), values(checked_extent(h, w), fill) {}

    std::complex<double>& at(int i, int j) { return values[static_cast<std::size_t>(i) * width + j]; }
    const std::complex<double>& at(int i, int j) const {
        return values[static_cast<std::size_t>(i) * width + j];
    }
    std::size_t size() const { return values.size(); }

    bool same_shape(const ComplexGrid& o) const { return height == o.height && width == o.width; }

    RealGrid real_part() const {
        RealGrid g(height, width);
        for (std::size_t n = 0; n < values.size(); ++n) g.values[n] = values[n].real();
        return g;
    }
    RealGrid imag_part() const {
        RealGrid g(height, width);
        for (std::size_t n = 0; n < values.size(); ++n) g.values[n] = values[n].imag();
        return g;
    }
    RealGrid magnitude() const {
        RealGrid g(height, width);
        for (std::size_t n = 0; n < values.size(); ++n) g.values[n] = std::abs(values[n]);
        return g;
    }

    static ComplexGrid from_planes(const RealGrid& re, const RealGrid& im) {
        if (!re.same_shape(im))
            throw std::invalid_argument("real/imaginary planes must share dimensions");
        ComplexGrid g(re.height, re.width);
        for (std::size_t n = 0; n < g.values.size(); ++n)
            g.values[n] = {re.values[n], im.values[n]};
        return g;
    }
    static ComplexGrid from_real(const RealGrid& re) {
        ComplexGrid g(re.height, re.width);
        for (std::size_t n = 0; n < g.values.size(); ++n) g.values[n] = {re.values[n], 0.0};
        return g;
    }
};

/// Small real convolution kernel with odd dimensions.
struct Kernel2D {
    int kheight = 0;
    int kwidth = 0;
    std::vector<double> weights;

    Kernel2D() = default;
    Kernel2D(int kh, int kw, double fill = 0.0)
        : kheight(kh), kwidth(kw), weights(checked_extent(kh, kw), fill) {
        if (kh % 2 == 0 || kw % 2 == 0)
            throw std::invalid_argument("kernel dimensions must be odd, got " +
                                        std::to_string(kh) + "x" + std::to_string(kw));
    }

    double& at(int a, int b) { return weights[static_cast<std::size_t>(a) * kwidth + b]; }
    double at(int a, int b) const { return weights[static_cast<std::size_t>(a) * kwidth + b]; }
};

inline double dot(const RealGrid& a, const RealGrid& b) {
    double s = 0.0;
    for (std::size_t n = 0; n < a.values.size(); ++n) s += a.values[n] * b.values[n];
    return s;
}

inline double norm2_squared(const RealGrid& a) { return dot(a, a); }

inline double max_abs_diff(const RealGrid& a, const RealGrid& b) {
    double m = 0.0;
    for (std::size_t n = 0; n < a.values.size(); ++n)
        m = std::max(m, std::abs(a.values[n] - b.values[n]));
    return m;
}

}  // namespace hfdaep
