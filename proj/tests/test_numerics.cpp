#include "doctest.h"

#include "hfdaep/conv.hpp"
#include "hfdaep/dense.hpp"
#include "hfdaep/fft.hpp"
#include "test_helpers.hpp"

#include <complex>

using namespace hfdaep;
using namespace hfdaep::test;

TEST_CASE("fft2: unit impulse transforms to a constant spectrum") {
    ComplexGrid g(4, 4);
    g.at(0, 0) = 1.0;
    const ComplexGrid f = fft2(g);
    for (const auto& v : f.values) CHECK(std::abs(v - std::complex<double>(1.0, 0.0)) < 1e-14);
}

TEST_CASE("fft2: constant grid concentrates all energy in the DC bin") {
    ComplexGrid g(8, 8, {3.25, 0.0});
    const ComplexGrid f = fft2(g);
    CHECK(std::abs(f.at(0, 0) - std::complex<double>(3.25 * 64.0, 0.0)) < 1e-12);
    for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 8; ++j)
            if (i != 0 || j != 0) CHECK(std::abs(f.at(i, j)) < 1e-12);
}

TEST_CASE("fft2: matches the direct DFT oracle and Parseval with factor H*W") {
    Rng rng(11);
    const ComplexGrid g = random_complex_grid(8, 8, rng);
    const ComplexGrid got = fft2(g);
    const ComplexGrid want = dft2_direct(g);
    for (std::size_t n = 0; n < g.size(); ++n) CHECK(std::abs(got.values[n] - want.values[n]) < 1e-10);

    double num = 0.0, den = 0.0;
    for (std::size_t n = 0; n < g.size(); ++n) {
        num += std::norm(got.values[n]);
        den += std::norm(g.values[n]);
    }
    CHECK(rel_error(num / den, 64.0) < 1e-12);
}

TEST_CASE("fft2/ifft2: round trip at 1e-12 relative, including non power-of-two sizes") {
    Rng rng(5);
    for (auto [h, w] : {std::pair{4, 4}, {12, 17}, {100, 64}, {37, 41}, {256, 256}}) {
        const ComplexGrid g = random_complex_grid(h, w, rng);
        const ComplexGrid back = ifft2(fft2(g));
        double maxdiff = 0.0, scale = 0.0;
        for (std::size_t n = 0; n < g.size(); ++n) {
            maxdiff = std::max(maxdiff, std::abs(back.values[n] - g.values[n]));
            scale = std::max(scale, std::abs(g.values[n]));
        }
        CHECK(maxdiff / scale < 1e-12);
    }
}

TEST_CASE("conv2d: identity kernel returns the grid unchanged") {
    Rng rng(2);
    const RealGrid g = random_grid(6, 9, rng);
    Kernel2D k(1, 1);
    k.at(0, 0) = 1.0;
    for (auto boundary : {Boundary::periodic, Boundary::replicate, Boundary::zero}) {
        const RealGrid out = conv2d(g, k, boundary);
        CHECK(max_abs_diff(out, g) == 0.0);
    }
}

TEST_CASE("conv2d: 3x3 average of a constant stays constant under every boundary") {
    RealGrid g(5, 7, 2.5);
    Kernel2D k(3, 3, 1.0 / 9.0);
    for (auto boundary : {Boundary::periodic, Boundary::replicate, Boundary::zero}) {
        const RealGrid out = conv2d(g, k, boundary);
        if (boundary == Boundary::zero) {
            // Interior only; the border sees zero padding.
            for (int i = 1; i < 4; ++i)
                for (int j = 1; j < 6; ++j) CHECK(std::abs(out.at(i, j) - 2.5) < 1e-14);
        } else {
            for (const auto v : out.values) CHECK(std::abs(v - 2.5) < 1e-14);
        }
    }
}

TEST_CASE("conv2d: matches the quadruple-loop oracle on a 5x5 kernel, zero boundary") {
    Rng rng(3);
    const RealGrid g = random_grid(7, 7, rng);
    Kernel2D k(5, 5);
    for (auto& w : k.weights) w = rng.uniform(-1.0, 1.0);

    const RealGrid got = conv2d(g, k, Boundary::zero);
    for (int i = 0; i < 7; ++i)
        for (int j = 0; j < 7; ++j) {
            double want = 0.0;
            for (int a = 0; a < 5; ++a)
                for (int b = 0; b < 5; ++b) {
                    const int si = i - a + 2, sj = j - b + 2;
                    if (si >= 0 && si < 7 && sj >= 0 && sj < 7) want += k.at(a, b) * g.at(si, sj);
                }
            CHECK(std::abs(got.at(i, j) - want) < 1e-13);
        }
}

TEST_CASE("conv2d: linear in the grid") {
    Rng rng(4);
    const RealGrid g1 = random_grid(8, 8, rng), g2 = random_grid(8, 8, rng);
    Kernel2D k(3, 3);
    for (auto& w : k.weights) w = rng.uniform(-1.0, 1.0);
    const double a = 1.7, b = -0.6;

    RealGrid combo(8, 8);
    for (std::size_t n = 0; n < combo.size(); ++n)
        combo.values[n] = a * g1.values[n] + b * g2.values[n];
    const RealGrid lhs = conv2d(combo, k, Boundary::periodic);
    const RealGrid c1 = conv2d(g1, k, Boundary::periodic);
    const RealGrid c2 = conv2d(g2, k, Boundary::periodic);
    for (std::size_t n = 0; n < lhs.size(); ++n)
        CHECK(std::abs(lhs.values[n] - (a * c1.values[n] + b * c2.values[n])) < 1e-12);
}

TEST_CASE("conv2d: periodic boundary is diagonalized by fft2") {
    Rng rng(6);
    const RealGrid g = random_grid(12, 10, rng);
    Kernel2D k(3, 3);
    for (auto& w : k.weights) w = rng.uniform(-1.0, 1.0);

    const RealGrid spatial = conv2d(g, k, Boundary::periodic);

    // Embed the flipped-origin kernel periodically.
    RealGrid pad(12, 10);
    const int cy = 1, cx = 1;
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) {
            const int i = ((a - cy) % 12 + 12) % 12;
            const int j = ((b - cx) % 10 + 10) % 10;
            pad.at(i, j) += k.at(a, b);
        }
    const ComplexGrid fg = fft2(ComplexGrid::from_real(g));
    const ComplexGrid fk = fft2(ComplexGrid::from_real(pad));
    ComplexGrid prod(12, 10);
    for (std::size_t n = 0; n < prod.size(); ++n) prod.values[n] = fg.values[n] * fk.values[n];
    const ComplexGrid fs = fft2(ComplexGrid::from_real(spatial));
    for (std::size_t n = 0; n < prod.size(); ++n)
        CHECK(std::abs(fs.values[n] - prod.values[n]) < 1e-10 * 120.0);
}

TEST_CASE("conv2d: kernel larger than grid is an error") {
    RealGrid g(3, 3, 1.0);
    Kernel2D k(5, 5, 1.0);
    CHECK_THROWS_AS(conv2d(g, k, Boundary::zero), std::invalid_argument);
}

TEST_CASE("dense_solve: identity and diagonal systems") {
    const std::vector<double> id = {1, 0, 0, 1};
    const std::vector<double> b = {3.5, -2.0};
    const auto x = dense_solve(id, b);
    CHECK(x[0] == doctest::Approx(3.5).epsilon(1e-14));
    CHECK(x[1] == doctest::Approx(-2.0).epsilon(1e-14));

    const std::vector<double> diag = {2, 0, 0, 4};
    const auto y = dense_solve(diag, {2.0, 4.0});
    CHECK(y[0] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(y[1] == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("dense_solve: random well-conditioned 16x16 system has tiny residual") {
    Rng rng(7);
    const std::size_t n = 16;
    std::vector<double> a(n * n), b(n);
    for (auto& v : a) v = rng.uniform(-1.0, 1.0);
    for (std::size_t i = 0; i < n; ++i) a[i * n + i] += 16.0;
    for (auto& v : b) v = rng.uniform(-1.0, 1.0);

    const auto x = dense_solve(a, b);
    double rnorm = 0.0, bnorm = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double ax = 0.0;
        for (std::size_t j = 0; j < n; ++j) ax += a[i * n + j] * x[j];
        rnorm += (ax - b[i]) * (ax - b[i]);
        bnorm += b[i] * b[i];
    }
    CHECK(std::sqrt(rnorm / bnorm) < 1e-10);
}

TEST_CASE("dense_solve: singular matrix raises with a condition estimate") {
    // Rank-1 matrix.
    const std::vector<double> a = {1, 2, 2, 4};
    try {
        dense_solve(a, {1.0, 2.0});
        FAIL("expected an exception");
    } catch (const std::runtime_error& e) {
        CHECK(std::string(e.what()).find("rcond") != std::string::npos);
    }
}
