#include "hfdaep/phantom.hpp"

#include "hfdaep/rng.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hfdaep {
namespace {

struct Ellipse {
    double intensity, a, b, x0, y0, phi;  // semi-axes and center in [-1,1], phi radians
};

void render(RealGrid& img, const std::vector<Ellipse>& ellipses) {
    const int n = img.height;
    for (const Ellipse& e : ellipses) {
        const double cp = std::cos(e.phi), sp = std::sin(e.phi);
        for (int i = 0; i < n; ++i) {
            const double y = -1.0 + (i + 0.5) * 2.0 / n;
            for (int j = 0; j < n; ++j) {
                const double x = -1.0 + (j + 0.5) * 2.0 / n;
                const double dx = x - e.x0, dy = y - e.y0;
                const double xr = cp * dx + sp * dy;
                const double yr = -sp * dx + cp * dy;
                if ((xr * xr) / (e.a * e.a) + (yr * yr) / (e.b * e.b) <= 1.0)
                    img.at(i, j) += e.intensity;
            }
        }
    }
}

}  // namespace

void PhantomSpec::validate() const {
    if (size < 32) throw std::invalid_argument("PhantomSpec: size must be at least 32");
    if (count < 0) throw std::invalid_argument("PhantomSpec: count must be nonnegative");
    if (!(intensity_max > intensity_min))
        throw std::invalid_argument("PhantomSpec: empty intensity range");
}

RealGrid shepp_logan(int size) {
    if (size < 1) throw std::invalid_argument("shepp_logan: bad size");
    static const std::vector<Ellipse> table = {
        {1.00, 0.6900, 0.9200, 0.00, 0.0000, 0.0},
        {-0.98, 0.6624, 0.8740, 0.00, -0.0184, 0.0},
        {-0.02, 0.1100, 0.3100, 0.22, 0.0000, -18.0 * M_PI / 180.0},
        {-0.02, 0.1600, 0.4100, -0.22, 0.0000, 18.0 * M_PI / 180.0},
        {0.01, 0.2100, 0.2500, 0.00, 0.3500, 0.0},
        {0.01, 0.0460, 0.0460, 0.00, 0.1000, 0.0},
        {0.01, 0.0460, 0.0460, 0.00, -0.1000, 0.0},
        {0.01, 0.0460, 0.0230, -0.08, -0.6050, 0.0},
        {0.01, 0.0230, 0.0230, 0.00, -0.6060, 0.0},
        {0.01, 0.0230, 0.0460, 0.06, -0.6050, 0.0},
    };
    RealGrid img(size, size);
    render(img, table);
    return img;
}

RealGrid random_ellipses(int size, std::uint64_t seed, double intensity_min,
                         double intensity_max) {
    if (size < 1) throw std::invalid_argument("random_ellipses: bad size");
    Rng rng(seed);
    const int n_ellipses = 5 + static_cast<int>(rng.uniform_index(8));  // 5..12
    std::vector<Ellipse> ellipses;
    for (int k = 0; k < n_ellipses; ++k) {
        Ellipse e;
        e.a = rng.uniform(0.05, 0.45);
        e.b = rng.uniform(0.05, 0.45);
        // Center chosen so the ellipse stays inside the field of view.
        const double reach = std::max(e.a, e.b);
        e.x0 = rng.uniform(-(0.95 - reach), 0.95 - reach);
        e.y0 = rng.uniform(-(0.95 - reach), 0.95 - reach);
        e.phi = rng.uniform(0.0, M_PI);
        e.intensity = rng.uniform(-0.4, 0.7);
        ellipses.push_back(e);
    }
    RealGrid img(size, size);
    render(img, ellipses);
    for (auto& v : img.values) v = std::clamp(v, intensity_min, intensity_max);
    return img;
}

std::vector<RealGrid> generate_phantoms(const PhantomSpec& spec) {
    spec.validate();
    std::vector<RealGrid> out;
    out.reserve(spec.count);
    for (int k = 0; k < spec.count; ++k) {
        if (spec.kind == PhantomKind::shepp_logan) {
            out.push_back(shepp_logan(spec.size));
        } else {
            out.push_back(
                random_ellipses(spec.size, spec.seed + k, spec.intensity_min, spec.intensity_max));
        }
    }
    return out;
}

}  // namespace hfdaep
