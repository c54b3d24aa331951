#pragma once

#include "hfdaep/grid.hpp"

#include <cstdint>
#include <vector>

namespace hfdaep {

enum class PhantomKind { shepp_logan, random_ellipses };

struct PhantomSpec {
    PhantomKind kind = PhantomKind::random_ellipses;
    int size = 128;
    int count = 1;
    std::uint64_t seed = 0;
    double intensity_min = 0.0;
    double intensity_max = 1.0;

    void validate() const;
};

/// The standard 10-ellipse head phantom (max intensity 1.0, background 0),
/// rendered on a size x size grid spanning [-1, 1]^2.
RealGrid shepp_logan(int size);

/// One random phantom: 5-12 additive ellipses with random centers, axes,
/// orientations and intensities, all fully inside the field of view, clipped
/// to [intensity_min, intensity_max].
RealGrid random_ellipses(int size, std::uint64_t seed, double intensity_min = 0.0,
                         double intensity_max = 1.0);

/// The whole corpus described by the spec; phantom k uses seed spec.seed + k.
std::vector<RealGrid> generate_phantoms(const PhantomSpec& spec);

}  // namespace hfdaep
