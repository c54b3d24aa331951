#include "hfdaep/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <tuple>

namespace hfdaep {
namespace {

// FFTW plans are cached per (height, width, sign). Planning is not
// thread-safe, execution through fftw_execute_dft is. Plans are created with
// FFTW_ESTIMATE so results do not depend on runtime measurement.
class PlanCache {
  public:
    fftw_plan get(int h, int w, int sign) {
        std::lock_guard<std::mutex> lock(mutex_);
        const Key key{h, w, sign};
        auto it = plans_.find(key);
        if (it != plans_.end()) return it->second;

        const std::size_t n = static_cast<std::size_t>(h) * w;
        fftw_complex* buf = fftw_alloc_complex(n);
        fftw_plan plan = fftw_plan_dft_2d(h, w, buf, buf, sign, FFTW_ESTIMATE);
        fftw_free(buf);
        plans_.emplace(key, plan);
        return plan;
    }

  private:
    using Key = std::tuple<int, int, int>;
    std::mutex mutex_;
    std::map<Key, fftw_plan> plans_;
};

PlanCache& cache() {
    static PlanCache c;
    return c;
}

ComplexGrid run(const ComplexGrid& g, int sign) {
    const std::size_t n = g.size();
    fftw_complex* in = fftw_alloc_complex(n);
    fftw_complex* out = fftw_alloc_complex(n);
    for (std::size_t i = 0; i < n; ++i) {
        in[i][0] = g.values[i].real();
        in[i][1] = g.values[i].imag();
    }
    fftw_execute_dft(cache().get(g.height, g.width, sign), in, out);

    ComplexGrid result(g.height, g.width);
    for (std::size_t i = 0; i < n; ++i) result.values[i] = {out[i][0], out[i][1]};
    fftw_free(in);
    fftw_free(out);
    return result;
}

}  // namespace

ComplexGrid fft2(const ComplexGrid& g) { return run(g, FFTW_FORWARD); }

ComplexGrid ifft2(const ComplexGrid& g) {
    ComplexGrid result = run(g, FFTW_BACKWARD);
    const double scale = 1.0 / static_cast<double>(g.size());
    for (auto& v : result.values) v *= scale;
    return result;
}

}  // namespace hfdaep
