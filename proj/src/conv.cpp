#include "hfdaep/conv.hpp"

#include <algorithm>

namespace hfdaep {
namespace {

inline int wrap(int i, int n) {
    i %= n;
    return i < 0 ? i + n : i;
}

inline int clamp_index(int i, int n) { return std::clamp(i, 0, n - 1); }

}  // namespace

RealGrid conv2d(const RealGrid& g, const Kernel2D& k, Boundary boundary) {
    if (k.kheight > g.height || k.kwidth > g.width)
        throw std::invalid_argument("conv2d: kernel (" + std::to_string(k.kheight) + "x" +
                                    std::to_string(k.kwidth) + ") larger than grid (" +
                                    std::to_string(g.height) + "x" + std::to_string(g.width) + ")");
    const int cy = k.kheight / 2;
    const int cx = k.kwidth / 2;

    RealGrid out(g.height, g.width);
    for (int i = 0; i < g.height; ++i) {
        for (int j = 0; j < g.width; ++j) {
            double acc = 0.0;
            for (int a = 0; a < k.kheight; ++a) {
                const int si = i - a + cy;
                for (int b = 0; b < k.kwidth; ++b) {
                    const int sj = j - b + cx;
                    double sample = 0.0;
                    switch (boundary) {
                        case Boundary::periodic:
                            sample = g.at(wrap(si, g.height), wrap(sj, g.width));
                            break;
                        case Boundary::replicate:
                            sample = g.at(clamp_index(si, g.height), clamp_index(sj, g.width));
                            break;
                        case Boundary::zero:
                            if (si >= 0 && si < g.height && sj >= 0 && sj < g.width)
                                sample = g.at(si, sj);
                            break;
                    }
                    acc += k.at(a, b) * sample;
                }
            }
            out.at(i, j) = acc;
        }
    }
    return out;
}

}  // namespace hfdaep
