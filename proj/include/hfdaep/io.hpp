#pragma once

#include "hfdaep/ct.hpp"
#include "hfdaep/grid.hpp"
#include "hfdaep/mri.hpp"
#include "hfdaep/transform.hpp"

#include <map>
#include <string>
#include <utility>
#include <vector>

namespace hfdaep {

/// HFDP tensor container: bytes "HFDP", version 0x01, dtype byte (0x01 f64,
/// 0x02 f32, 0x03 complex f64 pairs), ndim byte, ndim little-endian u32 dims,
/// then raw row-major values (channels outermost).
struct HfdpTensor {
    std::uint8_t dtype = 0x01;
    std::vector<std::uint32_t> dims;
    std::vector<double> real_data;                 // dtype 0x01/0x02
    std::vector<std::complex<double>> complex_data;  // dtype 0x03

    std::size_t element_count() const;
};

void write_hfdp(const HfdpTensor& t, const std::string& path);
HfdpTensor read_hfdp(const std::string& path);

void save_grid(const RealGrid& g, const std::string& path, bool as_float32 = false);
RealGrid load_grid(const std::string& path);

void save_complex_grid(const ComplexGrid& g, const std::string& path);
ComplexGrid load_complex_grid(const std::string& path);

/// Stacks are 3D tensors, channels outermost.
void save_stack(const ProfileStack& s, const std::string& path);

void save_sinogram(const Sinogram& s, const std::string& path);
Sinogram load_sinogram(const std::string& path);

/// Masks serialize as 0/1 grids; a one-line sidecar ("<path>.meta") records
/// kind, R and seed.
void save_mask(const SamplingMask& m, const std::string& path, std::uint64_t seed);
SamplingMask load_mask(const std::string& path);

/// Flat "key = value" text with '#' comments (the geometry sidecar and the
/// run manifests use this form).
using KeyValues = std::vector<std::pair<std::string, std::string>>;
void write_key_values(const KeyValues& kv, const std::string& path);
std::map<std::string, std::string> read_key_values(const std::string& path);

void save_geometry(const FanGeometry& g, const std::string& path);
FanGeometry load_geometry(const std::string& path);

/// 8-bit grayscale preview (binary PGM) with min-max windowing; returns the
/// window used so it can be recorded in the manifest.
std::pair<double, double> write_pgm_preview(const RealGrid& g, const std::string& path);

}  // namespace hfdaep
