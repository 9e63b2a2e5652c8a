#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "yseg/image.hpp"

namespace yseg {

// Binary netpbm: P6 (8-bit RGB) for images, P5 (8-bit grey) for label maps
// and heat maps.
void write_ppm(const std::string& path, const Image& image);
Image read_ppm(const std::string& path);
void write_pgm(const std::string& path, const LabelMap& map);
LabelMap read_pgm(const std::string& path);

/// One entry of a YTC1 container. dtype 0 = f32, 1 = u8, 2 = f64.
struct YtcEntry {
  enum class Dtype : std::uint8_t { f32 = 0, u8 = 1, f64 = 2 };

  std::string name;
  Dtype dtype = Dtype::f32;
  std::vector<std::uint32_t> dims;
  std::vector<float> f32;
  std::vector<std::uint8_t> u8;
  std::vector<double> f64;

  /// f32 for standard tensors, f64 for verification tensors.
  static YtcEntry from_tensor(std::string name, const Tensor& t);
  static YtcEntry from_bytes(std::string name, std::vector<std::uint8_t> bytes);
  static YtcEntry from_text(std::string name, const std::string& text);
  Tensor to_tensor(Precision p) const;
  std::string text() const;
  std::size_t count() const;
};

/// Layout: "YTC1", u32 entry count; per entry u16 name length, name bytes,
/// u8 dtype, u8 rank, rank × u32 dims, raw values. Little-endian throughout.
std::vector<std::uint8_t> encode_ytc(const std::vector<YtcEntry>& entries);
std::vector<YtcEntry> decode_ytc(const std::vector<std::uint8_t>& bytes);
void write_ytc(const std::string& path, const std::vector<YtcEntry>& entries);
std::vector<YtcEntry> read_ytc(const std::string& path);

std::vector<std::uint8_t> read_file(const std::string& path);
void write_file(const std::string& path, const std::vector<std::uint8_t>& bytes);
void write_text(const std::string& path, const std::string& text);
std::string read_text(const std::string& path);

}  // namespace yseg
