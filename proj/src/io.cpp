#include "hfdaep/io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace hfdaep {

static_assert(std::endian::native == std::endian::little,
              "HFDP serialization assumes a little-endian host");

namespace {

constexpr std::uint8_t kDtypeF64 = 0x01;
constexpr std::uint8_t kDtypeF32 = 0x02;
constexpr std::uint8_t kDtypeC64 = 0x03;

void check_stream(const std::ios& f, const std::string& path, const char* action) {
    if (!f) throw std::runtime_error(std::string(action) + " failed: " + path);
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

}  // namespace

std::size_t HfdpTensor::element_count() const {
    std::size_t n = 1;
    for (auto d : dims) n *= d;
    return n;
}

void write_hfdp(const HfdpTensor& t, const std::string& path) {
    if (t.dims.empty() || t.dims.size() > 255)
        throw std::invalid_argument("write_hfdp: bad dimension count");
    const std::size_t n = t.element_count();
    if (t.dtype == kDtypeC64) {
        if (t.complex_data.size() != n)
            throw std::invalid_argument("write_hfdp: complex payload size mismatch");
    } else if (t.dtype == kDtypeF64 || t.dtype == kDtypeF32) {
        if (t.real_data.size() != n)
            throw std::invalid_argument("write_hfdp: payload size mismatch");
    } else {
        throw std::invalid_argument("write_hfdp: unknown dtype");
    }

    std::ofstream f(path, std::ios::binary);
    check_stream(f, path, "open for writing");
    f.write("HFDP", 4);
    const std::uint8_t version = 0x01;
    f.write(reinterpret_cast<const char*>(&version), 1);
    f.write(reinterpret_cast<const char*>(&t.dtype), 1);
    const std::uint8_t ndim = static_cast<std::uint8_t>(t.dims.size());
    f.write(reinterpret_cast<const char*>(&ndim), 1);
    for (std::uint32_t d : t.dims) f.write(reinterpret_cast<const char*>(&d), 4);

    if (t.dtype == kDtypeF64) {
        f.write(reinterpret_cast<const char*>(t.real_data.data()),
                static_cast<std::streamsize>(n * sizeof(double)));
    } else if (t.dtype == kDtypeF32) {
        std::vector<float> buf(n);
        for (std::size_t i = 0; i < n; ++i) buf[i] = static_cast<float>(t.real_data[i]);
        f.write(reinterpret_cast<const char*>(buf.data()),
                static_cast<std::streamsize>(n * sizeof(float)));
    } else {
        f.write(reinterpret_cast<const char*>(t.complex_data.data()),
                static_cast<std::streamsize>(n * 2 * sizeof(double)));
    }
    check_stream(f, path, "write");
}

HfdpTensor read_hfdp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    check_stream(f, path, "open");
    char magic[4];
    f.read(magic, 4);
    if (!f || std::memcmp(magic, "HFDP", 4) != 0)
        throw std::runtime_error("not an HFDP file (bad magic): " + path);
    std::uint8_t version = 0, dtype = 0, ndim = 0;
    f.read(reinterpret_cast<char*>(&version), 1);
    f.read(reinterpret_cast<char*>(&dtype), 1);
    f.read(reinterpret_cast<char*>(&ndim), 1);
    check_stream(f, path, "read header");
    if (version != 0x01)
        throw std::runtime_error("unsupported HFDP version " + std::to_string(version));
    if (ndim == 0) throw std::runtime_error("HFDP file with zero dimensions: " + path);

    HfdpTensor t;
    t.dtype = dtype;
    t.dims.resize(ndim);
    for (auto& d : t.dims) f.read(reinterpret_cast<char*>(&d), 4);
    check_stream(f, path, "read dims");
    const std::size_t n = t.element_count();

    if (dtype == kDtypeF64) {
        t.real_data.resize(n);
        f.read(reinterpret_cast<char*>(t.real_data.data()),
               static_cast<std::streamsize>(n * sizeof(double)));
    } else if (dtype == kDtypeF32) {
        std::vector<float> buf(n);
        f.read(reinterpret_cast<char*>(buf.data()),
               static_cast<std::streamsize>(n * sizeof(float)));
        t.real_data.assign(buf.begin(), buf.end());
    } else if (dtype == kDtypeC64) {
        t.complex_data.resize(n);
        f.read(reinterpret_cast<char*>(t.complex_data.data()),
               static_cast<std::streamsize>(n * 2 * sizeof(double)));
    } else {
        throw std::runtime_error("unknown HFDP dtype " + std::to_string(dtype));
    }
    check_stream(f, path, "read payload");
    return t;
}

void save_grid(const RealGrid& g, const std::string& path, bool as_float32) {
    HfdpTensor t;
    t.dtype = as_float32 ? kDtypeF32 : kDtypeF64;
    t.dims = {static_cast<std::uint32_t>(g.height), static_cast<std::uint32_t>(g.width)};
    t.real_data = g.values;
    write_hfdp(t, path);
}

RealGrid load_grid(const std::string& path) {
    const HfdpTensor t = read_hfdp(path);
    if (t.dims.size() != 2 || t.dtype == kDtypeC64)
        throw std::runtime_error("expected a real 2D tensor in " + path);
    RealGrid g(static_cast<int>(t.dims[0]), static_cast<int>(t.dims[1]));
    g.values = t.real_data;
    return g;
}

void save_complex_grid(const ComplexGrid& g, const std::string& path) {
    HfdpTensor t;
    t.dtype = kDtypeC64;
    t.dims = {static_cast<std::uint32_t>(g.height), static_cast<std::uint32_t>(g.width)};
    t.complex_data = g.values;
    write_hfdp(t, path);
}

ComplexGrid load_complex_grid(const std::string& path) {
    const HfdpTensor t = read_hfdp(path);
    if (t.dims.size() != 2)
        throw std::runtime_error("expected a 2D tensor in " + path);
    ComplexGrid g(static_cast<int>(t.dims[0]), static_cast<int>(t.dims[1]));
    if (t.dtype == kDtypeC64) {
        g.values = t.complex_data;
    } else {
        for (std::size_t n = 0; n < g.values.size(); ++n) g.values[n] = {t.real_data[n], 0.0};
    }
    return g;
}

void save_stack(const ProfileStack& s, const std::string& path) {
    HfdpTensor t;
    t.dtype = kDtypeF64;
    t.dims = {static_cast<std::uint32_t>(s.channel_count()),
              static_cast<std::uint32_t>(s.height()), static_cast<std::uint32_t>(s.width())};
    for (const auto& c : s.channels)
        t.real_data.insert(t.real_data.end(), c.values.begin(), c.values.end());
    write_hfdp(t, path);
}

void save_sinogram(const Sinogram& s, const std::string& path) {
    HfdpTensor t;
    t.dtype = kDtypeF64;
    t.dims = {static_cast<std::uint32_t>(s.views), static_cast<std::uint32_t>(s.bins)};
    t.real_data = s.values;
    write_hfdp(t, path);
}

Sinogram load_sinogram(const std::string& path) {
    const HfdpTensor t = read_hfdp(path);
    if (t.dims.size() != 2 || t.dtype == kDtypeC64)
        throw std::runtime_error("expected a real 2D tensor in " + path);
    Sinogram s(static_cast<int>(t.dims[0]), static_cast<int>(t.dims[1]));
    s.values = t.real_data;
    return s;
}

namespace {

std::string mask_kind_name(MaskKind k) {
    switch (k) {
        case MaskKind::random2d: return "random2d";
        case MaskKind::radial: return "radial";
        case MaskKind::cartesian1d: return "cartesian1d";
    }
    return "random2d";
}

MaskKind mask_kind_from(const std::string& s) {
    if (s == "random2d") return MaskKind::random2d;
    if (s == "radial") return MaskKind::radial;
    if (s == "cartesian1d") return MaskKind::cartesian1d;
    throw std::runtime_error("unknown mask kind: " + s);
}

}  // namespace

void save_mask(const SamplingMask& m, const std::string& path, std::uint64_t seed) {
    HfdpTensor t;
    t.dtype = kDtypeF64;
    t.dims = {static_cast<std::uint32_t>(m.height), static_cast<std::uint32_t>(m.width)};
    t.real_data.resize(m.kept.size());
    for (std::size_t n = 0; n < m.kept.size(); ++n) t.real_data[n] = m.kept[n] ? 1.0 : 0.0;
    write_hfdp(t, path);

    std::ofstream meta(path + ".meta");
    check_stream(meta, path + ".meta", "open for writing");
    meta << "# kind=" << mask_kind_name(m.kind) << " R=" << m.R << " seed=" << seed << "\n";
}

SamplingMask load_mask(const std::string& path) {
    const HfdpTensor t = read_hfdp(path);
    if (t.dims.size() != 2 || t.dtype == kDtypeC64)
        throw std::runtime_error("expected a real 2D mask in " + path);
    SamplingMask m;
    m.height = static_cast<int>(t.dims[0]);
    m.width = static_cast<int>(t.dims[1]);
    m.kept.resize(t.real_data.size());
    for (std::size_t n = 0; n < t.real_data.size(); ++n)
        m.kept[n] = t.real_data[n] != 0.0 ? 1 : 0;

    std::ifstream meta(path + ".meta");
    if (meta) {
        std::string line;
        std::getline(meta, line);
        std::istringstream is(line);
        std::string tok;
        while (is >> tok) {
            const auto eq = tok.find('=');
            if (eq == std::string::npos) continue;
            const std::string key = tok.substr(0, eq), val = tok.substr(eq + 1);
            if (key == "kind" || key == "#kind")
                m.kind = mask_kind_from(val);
            else if (key == "R")
                m.R = std::stod(val);
        }
    }
    return m;
}

void write_key_values(const KeyValues& kv, const std::string& path) {
    std::ofstream f(path);
    check_stream(f, path, "open for writing");
    for (const auto& [k, v] : kv) f << k << " = " << v << "\n";
    check_stream(f, path, "write");
}

std::map<std::string, std::string> read_key_values(const std::string& path) {
    std::ifstream f(path);
    check_stream(f, path, "open");
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(f, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (!key.empty()) kv[key] = val;
    }
    return kv;
}

void save_geometry(const FanGeometry& g, const std::string& path) {
    KeyValues kv;
    auto num = [](double v) {
        std::ostringstream os;
        os.precision(17);
        os << v;
        return os.str();
    };
    kv.emplace_back("source_to_center", num(g.source_to_center));
    kv.emplace_back("detector_to_center", num(g.detector_to_center));
    kv.emplace_back("extent", num(g.image_extent));
    kv.emplace_back("pixels", std::to_string(g.image_pixels));
    kv.emplace_back("detector_width", num(g.detector_width));
    kv.emplace_back("bins", std::to_string(g.detector_bins));
    kv.emplace_back("views", std::to_string(g.views()));
    write_key_values(kv, path);
}

FanGeometry load_geometry(const std::string& path) {
    const auto kv = read_key_values(path);
    FanGeometry g;
    auto need = [&](const std::string& key) {
        auto it = kv.find(key);
        if (it == kv.end()) throw std::runtime_error("geometry file missing key " + key);
        return it->second;
    };
    g.source_to_center = std::stod(need("source_to_center"));
    g.detector_to_center = std::stod(need("detector_to_center"));
    g.image_extent = std::stod(need("extent"));
    g.image_pixels = std::stoi(need("pixels"));
    g.detector_width = std::stod(need("detector_width"));
    g.detector_bins = std::stoi(need("bins"));
    g.view_angles = FanGeometry::uniform_angles(std::stoi(need("views")));
    g.validate();
    return g;
}

std::pair<double, double> write_pgm_preview(const RealGrid& g, const std::string& path) {
    double lo = g.values[0], hi = g.values[0];
    for (double v : g.values) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    const double span = hi > lo ? hi - lo : 1.0;

    std::ofstream f(path, std::ios::binary);
    check_stream(f, path, "open for writing");
    f << "P5\n" << g.width << " " << g.height << "\n255\n";
    std::vector<unsigned char> row(g.width);
    for (int i = 0; i < g.height; ++i) {
        for (int j = 0; j < g.width; ++j) {
            const double t = (g.at(i, j) - lo) / span;
            row[j] = static_cast<unsigned char>(std::lround(std::clamp(t, 0.0, 1.0) * 255.0));
        }
        f.write(reinterpret_cast<const char*>(row.data()), g.width);
    }
    check_stream(f, path, "write");
    return {lo, hi};
}

}  // namespace hfdaep
