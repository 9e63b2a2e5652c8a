#include "yseg/io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "yseg/error.hpp"

namespace yseg {

std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorCode::io, "cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::string& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(static_cast<bool>(out), ErrorCode::io, "cannot write " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  require(static_cast<bool>(out), ErrorCode::io, "write failed: " + path);
}

void write_text(const std::string& path, const std::string& text) {
  write_file(path, std::vector<std::uint8_t>(text.begin(), text.end()));
}

std::string read_text(const std::string& path) {
  const auto bytes = read_file(path);
  return {bytes.begin(), bytes.end()};
}

namespace {

struct Pnm {
  int width = 0, height = 0, channels = 0;
  std::vector<std::uint8_t> pixels;
};

Pnm read_pnm(const std::string& path, const char* magic) {
  const auto bytes = read_file(path);
  std::size_t pos = 0;
  auto fail = [&](const std::string& why) {
    throw Error(ErrorCode::format, path + ": " + why);
  };
  auto skip_space = [&] {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(bytes[pos])) {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto number = [&] {
    skip_space();
    long v = 0;
    int digits = 0;
    while (pos < bytes.size() && std::isdigit(bytes[pos])) {
      v = v * 10 + (bytes[pos++] - '0');
      if (v > 1 << 20) fail("header value too large");
      ++digits;
    }
    if (!digits) fail("malformed header");
    return static_cast<int>(v);
  };
  if (bytes.size() < 2 || bytes[0] != magic[0] || bytes[1] != magic[1]) {
    fail(std::string("expected ") + magic);
  }
  pos = 2;
  Pnm p;
  p.channels = magic[1] == '6' ? 3 : 1;
  p.width = number();
  p.height = number();
  const int maxval = number();
  if (maxval != 255) fail("only 8-bit (maxval 255) supported");
  if (p.width < 1 || p.height < 1) fail("empty image");
  if (pos >= bytes.size() || !std::isspace(bytes[pos])) fail("malformed header");
  ++pos;
  const std::size_t n = static_cast<std::size_t>(p.width) * p.height * p.channels;
  if (bytes.size() - pos < n) fail("truncated pixel data");
  p.pixels.assign(bytes.begin() + static_cast<std::ptrdiff_t>(pos),
                  bytes.begin() + static_cast<std::ptrdiff_t>(pos + n));
  return p;
}

void write_pnm(const std::string& path, const char* magic, int w, int h,
               const std::vector<std::uint8_t>& pixels) {
  const std::string header = std::string(magic) + "\n" + std::to_string(w) + " " +
                             std::to_string(h) + "\n255\n";
  std::vector<std::uint8_t> bytes(header.begin(), header.end());
  bytes.insert(bytes.end(), pixels.begin(), pixels.end());
  write_file(path, bytes);
}

}  // namespace

void write_ppm(const std::string& path, const Image& image) {
  require(image.channels == 3, ErrorCode::invalid_argument, "write_ppm: need 3 channels");
  std::vector<std::uint8_t> px;
  px.reserve(image.data.size());
  for (int y = 0; y < image.height; ++y) {
    for (int x = 0; x < image.width; ++x) {
      for (int c = 0; c < 3; ++c) {
        const double v = std::clamp(static_cast<double>(image.at(c, y, x)), 0.0, 1.0);
        px.push_back(static_cast<std::uint8_t>(std::lround(v * 255.0)));
      }
    }
  }
  write_pnm(path, "P6", image.width, image.height, px);
}

Image read_ppm(const std::string& path) {
  const Pnm p = read_pnm(path, "P6");
  Image img(3, p.height, p.width);
  std::size_t i = 0;
  for (int y = 0; y < p.height; ++y) {
    for (int x = 0; x < p.width; ++x) {
      for (int c = 0; c < 3; ++c) img.at(c, y, x) = p.pixels[i++] / 255.0f;
    }
  }
  return img;
}

void write_pgm(const std::string& path, const LabelMap& map) {
  write_pnm(path, "P5", map.width, map.height, map.labels);
}

LabelMap read_pgm(const std::string& path) {
  const Pnm p = read_pnm(path, "P5");
  LabelMap m(p.height, p.width);
  m.labels = p.pixels;
  return m;
}

// ---- YTC1 ----

YtcEntry YtcEntry::from_tensor(std::string name, const Tensor& t) {
  YtcEntry e;
  e.name = std::move(name);
  for (int d : t.shape()) e.dims.push_back(static_cast<std::uint32_t>(d));
  if (t.precision() == Precision::standard) {
    e.dtype = Dtype::f32;
    const auto v = t.data<float>();
    e.f32.assign(v.begin(), v.end());
  } else {
    e.dtype = Dtype::f64;
    const auto v = t.data<double>();
    e.f64.assign(v.begin(), v.end());
  }
  return e;
}

YtcEntry YtcEntry::from_bytes(std::string name, std::vector<std::uint8_t> bytes) {
  YtcEntry e;
  e.name = std::move(name);
  e.dtype = Dtype::u8;
  e.dims = {static_cast<std::uint32_t>(bytes.size())};
  e.u8 = std::move(bytes);
  return e;
}

YtcEntry YtcEntry::from_text(std::string name, const std::string& text) {
  return from_bytes(std::move(name), std::vector<std::uint8_t>(text.begin(), text.end()));
}

std::size_t YtcEntry::count() const {
  std::size_t n = 1;
  for (auto d : dims) n *= d;
  return n;
}

Tensor YtcEntry::to_tensor(Precision p) const {
  require(dtype != Dtype::u8, ErrorCode::format, "ytc: entry '" + name + "' is not numeric");
  Shape shape(dims.begin(), dims.end());
  Tensor t = Tensor::zeros(shape, p);
  dispatch(p, [&]<class T>(std::type_identity<T>) {
    auto out = t.data<T>();
    for (std::size_t i = 0; i < out.size(); ++i) {
      out[i] = static_cast<T>(dtype == Dtype::f32 ? static_cast<double>(f32[i]) : f64[i]);
    }
  });
  return t;
}

std::string YtcEntry::text() const {
  require(dtype == Dtype::u8, ErrorCode::format, "ytc: entry '" + name + "' is not bytes");
  return {u8.begin(), u8.end()};
}

namespace {

template <class T>
void put(std::vector<std::uint8_t>& out, T v) {
  auto raw = std::bit_cast<std::array<std::uint8_t, sizeof(T)>>(v);
  if constexpr (std::endian::native == std::endian::big) std::reverse(raw.begin(), raw.end());
  out.insert(out.end(), raw.begin(), raw.end());
}

class Reader {
 public:
  explicit Reader(const std::vector<std::uint8_t>& b) : b_(b) {}

  template <class T>
  T get() {
    need(sizeof(T));
    std::array<std::uint8_t, sizeof(T)> raw;
    std::memcpy(raw.data(), b_.data() + pos_, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(raw.begin(), raw.end());
    pos_ += sizeof(T);
    return std::bit_cast<T>(raw);
  }
  std::string str(std::size_t n) {
    need(n);
    std::string s(b_.begin() + static_cast<std::ptrdiff_t>(pos_),
                  b_.begin() + static_cast<std::ptrdiff_t>(pos_ + n));
    pos_ += n;
    return s;
  }
  void need(std::size_t n) const {
    if (b_.size() - pos_ < n) throw Error(ErrorCode::format, "ytc: truncated container");
  }
  bool done() const { return pos_ == b_.size(); }

 private:
  const std::vector<std::uint8_t>& b_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> encode_ytc(const std::vector<YtcEntry>& entries) {
  std::vector<std::uint8_t> out{'Y', 'T', 'C', '1'};
  put<std::uint32_t>(out, static_cast<std::uint32_t>(entries.size()));
  for (const YtcEntry& e : entries) {
    require(e.name.size() <= 0xFFFF, ErrorCode::invalid_argument, "ytc: name too long");
    require(e.dims.size() <= 0xFF, ErrorCode::invalid_argument, "ytc: rank too large");
    put<std::uint16_t>(out, static_cast<std::uint16_t>(e.name.size()));
    out.insert(out.end(), e.name.begin(), e.name.end());
    out.push_back(static_cast<std::uint8_t>(e.dtype));
    out.push_back(static_cast<std::uint8_t>(e.dims.size()));
    for (auto d : e.dims) put<std::uint32_t>(out, d);
    const std::size_t n = e.count();
    switch (e.dtype) {
      case YtcEntry::Dtype::f32:
        require(e.f32.size() == n, ErrorCode::internal, "ytc: size mismatch in " + e.name);
        for (float v : e.f32) put(out, v);
        break;
      case YtcEntry::Dtype::u8:
        require(e.u8.size() == n, ErrorCode::internal, "ytc: size mismatch in " + e.name);
        out.insert(out.end(), e.u8.begin(), e.u8.end());
        break;
      case YtcEntry::Dtype::f64:
        require(e.f64.size() == n, ErrorCode::internal, "ytc: size mismatch in " + e.name);
        for (double v : e.f64) put(out, v);
        break;
    }
  }
  return out;
}

std::vector<YtcEntry> decode_ytc(const std::vector<std::uint8_t>& bytes) {
  Reader r(bytes);
  if (r.str(4) != "YTC1") throw Error(ErrorCode::format, "ytc: bad magic");
  const auto count = r.get<std::uint32_t>();
  std::vector<YtcEntry> entries;
  for (std::uint32_t i = 0; i < count; ++i) {
    YtcEntry e;
    e.name = r.str(r.get<std::uint16_t>());
    const auto dtype = r.get<std::uint8_t>();
    require(dtype <= 2, ErrorCode::format, "ytc: unknown dtype " + std::to_string(dtype));
    e.dtype = static_cast<YtcEntry::Dtype>(dtype);
    const auto rank = r.get<std::uint8_t>();
    for (int k = 0; k < rank; ++k) e.dims.push_back(r.get<std::uint32_t>());
    const std::size_t n = e.count();
    switch (e.dtype) {
      case YtcEntry::Dtype::f32:
        r.need(n * 4);
        e.f32.resize(n);
        for (auto& v : e.f32) v = r.get<float>();
        break;
      case YtcEntry::Dtype::u8: {
        const std::string s = r.str(n);
        e.u8.assign(s.begin(), s.end());
        break;
      }
      case YtcEntry::Dtype::f64:
        r.need(n * 8);
        e.f64.resize(n);
        for (auto& v : e.f64) v = r.get<double>();
        break;
    }
    entries.push_back(std::move(e));
  }
  require(r.done(), ErrorCode::format, "ytc: trailing bytes");
  return entries;
}

void write_ytc(const std::string& path, const std::vector<YtcEntry>& entries) {
  write_file(path, encode_ytc(entries));
}

std::vector<YtcEntry> read_ytc(const std::string& path) { return decode_ytc(read_file(path)); }

}  // namespace yseg
