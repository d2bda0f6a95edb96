#pragma once

#include <png.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "sjnd/error.hpp"
#include "sjnd/raster.hpp"

namespace sjnd {

enum class ImageFormat { pgm, png, yuv, y4m };

// Geometry of a raw planar YUV 4:2:0 8-bit file.
struct YuvSpec {
  int width = 0;
  int height = 0;
  int frame = 0;
};

enum class MapEncoding { pgm_normalized, float_binary, csv };

inline constexpr std::array<char, 8> kFloatMapMagic{'S', 'J', 'N', 'D', 'M', 'A', 'P', '1'};

// Shortest decimal text that parses back to the same double.
inline std::string format_number(double v) {
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), end);
}

inline ImageFormat format_from_path(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (ext == ".pgm") return ImageFormat::pgm;
  if (ext == ".png") return ImageFormat::png;
  if (ext == ".yuv") return ImageFormat::yuv;
  if (ext == ".y4m") return ImageFormat::y4m;
  throw_validation("unsupported image extension '" + ext + "' for " + path.string());
}

namespace detail {

inline std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw_io("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) throw_io("read failure on " + path.string());
  return bytes;
}

inline void write_file(const std::filesystem::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw_io("cannot open " + path.string() + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw_io("write failure on " + path.string());
}

// Minimal cursor over a PNM/Y4M header.
class HeaderCursor {
 public:
  HeaderCursor(const std::vector<std::uint8_t>& bytes, const std::string& name)
      : bytes_(bytes), name_(name) {}

  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  long read_int() {
    skip_space_and_comments();
    long value = 0;
    std::size_t digits = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      value = value * 10 + (bytes_[pos_] - '0');
      if (value > (1L << 30)) throw_validation(name_ + ": header value out of range");
      ++pos_;
      ++digits;
    }
    if (digits == 0) throw_validation(name_ + ": malformed header");
    return value;
  }

  std::size_t& pos() { return pos_; }

 private:
  const std::vector<std::uint8_t>& bytes_;
  std::string name_;
  std::size_t pos_ = 0;
};

inline LumaPlane decode_pgm(const std::vector<std::uint8_t>& bytes, const std::string& name) {
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5')
    throw_validation(name + ": not a binary PGM (P5)");
  HeaderCursor cur(bytes, name);
  cur.pos() = 2;
  const long width = cur.read_int();
  const long height = cur.read_int();
  const long maxval = cur.read_int();
  if (width <= 0 || height <= 0) throw_validation(name + ": empty image");
  if (maxval <= 0 || maxval > 255)
    throw_validation(name + ": unsupported bit depth (maxval " + std::to_string(maxval) +
                     "), only 8-bit input is accepted");
  // Exactly one whitespace byte separates the header from the raster.
  std::size_t pos = cur.pos() + 1;
  const std::size_t count = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  if (bytes.size() < pos + count) throw_validation(name + ": truncated raster");
  std::vector<std::uint8_t> samples(bytes.begin() + static_cast<std::ptrdiff_t>(pos),
                                    bytes.begin() + static_cast<std::ptrdiff_t>(pos + count));
  return LumaPlane(static_cast<int>(width), static_cast<int>(height), std::move(samples));
}

inline std::uint8_t bt601_luma(int r, int g, int b) {
  return static_cast<std::uint8_t>(
      std::clamp(std::lround(0.299 * r + 0.587 * g + 0.114 * b), 0L, 255L));
}

inline LumaPlane decode_png(const std::filesystem::path& path) {
  std::unique_ptr<FILE, int (*)(FILE*)> file(std::fopen(path.c_str(), "rb"), &std::fclose);
  if (!file) throw_io("cannot open " + path.string());

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw_io("libpng initialisation failed");
  png_infop info = png_create_info_struct(png);
  struct Guard {
    png_structp* png;
    png_infop* info;
    ~Guard() { png_destroy_read_struct(png, info, nullptr); }
  } guard{&png, &info};
  if (!info) throw_io("libpng initialisation failed");

  std::vector<std::uint8_t> pixels;
  std::vector<png_bytep> rows;
  png_uint_32 width = 0, height = 0;
  int bit_depth = 0, color_type = 0;
  bool bad_depth = false;
  if (setjmp(png_jmpbuf(png))) throw_validation(path.string() + ": corrupt PNG");

  png_init_io(png, file.get());
  png_read_info(png, info);
  png_get_IHDR(png, info, &width, &height, &bit_depth, &color_type, nullptr, nullptr, nullptr);
  if (bit_depth == 16) {
    bad_depth = true;
  } else {
    if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (color_type & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_strip_alpha(png);
    png_read_update_info(png, info);
    const std::size_t stride = png_get_rowbytes(png, info);
    pixels.resize(stride * height);
    rows.resize(height);
    for (png_uint_32 y = 0; y < height; ++y) rows[y] = pixels.data() + y * stride;
    png_read_image(png, rows.data());
  }
  if (bad_depth)
    throw_validation(path.string() + ": unsupported bit depth 16, only 8-bit input is accepted");

  const int channels = png_get_channels(png, info);
  const std::size_t stride = png_get_rowbytes(png, info);
  LumaPlane plane(static_cast<int>(width), static_cast<int>(height));
  for (png_uint_32 y = 0; y < height; ++y) {
    const std::uint8_t* row = pixels.data() + y * stride;
    auto out = plane.row(static_cast<int>(y));
    for (png_uint_32 x = 0; x < width; ++x) {
      if (channels >= 3)
        out[x] = bt601_luma(row[x * channels], row[x * channels + 1], row[x * channels + 2]);
      else
        out[x] = row[x * channels];
    }
  }
  return plane;
}

inline void encode_png(const LumaPlane& plane, const std::filesystem::path& path) {
  std::unique_ptr<FILE, int (*)(FILE*)> file(std::fopen(path.c_str(), "wb"), &std::fclose);
  if (!file) throw_io("cannot open " + path.string() + " for writing");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw_io("libpng initialisation failed");
  png_infop info = png_create_info_struct(png);
  struct Guard {
    png_structp* png;
    png_infop* info;
    ~Guard() { png_destroy_write_struct(png, info); }
  } guard{&png, &info};
  if (!info) throw_io("libpng initialisation failed");
  if (setjmp(png_jmpbuf(png))) throw_io("write failure on " + path.string());

  png_init_io(png, file.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(plane.width()),
               static_cast<png_uint_32>(plane.height()), 8, PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int y = 0; y < plane.height(); ++y)
    png_write_row(png, const_cast<png_bytep>(plane.row(y).data()));
  png_write_end(png, nullptr);
}

inline std::size_t yuv420_frame_bytes(int width, int height) {
  const std::size_t luma = static_cast<std::size_t>(width) * height;
  const std::size_t chroma =
      static_cast<std::size_t>((width + 1) / 2) * static_cast<std::size_t>((height + 1) / 2);
  return luma + 2 * chroma;
}

inline LumaPlane decode_yuv(const std::vector<std::uint8_t>& bytes, const YuvSpec& spec,
                            const std::string& name) {
  if (spec.width <= 0 || spec.height <= 0)
    throw_validation(name + ": raw YUV input needs --width and --height");
  if (spec.frame < 0) throw_validation(name + ": negative frame index");
  const std::size_t frame_bytes = yuv420_frame_bytes(spec.width, spec.height);
  if (bytes.size() % frame_bytes != 0)
    throw_validation(name + ": file size " + std::to_string(bytes.size()) +
                     " is not a multiple of the 4:2:0 frame size " + std::to_string(frame_bytes));
  const std::size_t frames = bytes.size() / frame_bytes;
  if (static_cast<std::size_t>(spec.frame) >= frames)
    throw_validation(name + ": frame " + std::to_string(spec.frame) + " out of range (" +
                     std::to_string(frames) + " frames)");
  const auto begin = bytes.begin() + static_cast<std::ptrdiff_t>(spec.frame * frame_bytes);
  std::vector<std::uint8_t> luma(begin, begin + static_cast<std::ptrdiff_t>(
                                                    static_cast<std::size_t>(spec.width) * spec.height));
  return LumaPlane(spec.width, spec.height, std::move(luma));
}

inline LumaPlane decode_y4m(const std::vector<std::uint8_t>& bytes, int frame,
                            const std::string& name) {
  constexpr std::string_view kMagic = "YUV4MPEG2";
  if (bytes.size() < kMagic.size() ||
      std::string_view(reinterpret_cast<const char*>(bytes.data()), kMagic.size()) != kMagic)
    throw_validation(name + ": not a Y4M stream");
  const auto eol = std::find(bytes.begin(), bytes.end(), '\n');
  if (eol == bytes.end()) throw_validation(name + ": truncated Y4M header");
  std::istringstream header(std::string(bytes.begin() + kMagic.size(), eol));
  int width = 0, height = 0;
  std::string chroma = "420jpeg";
  for (std::string tok; header >> tok;) {
    if (tok[0] == 'W') width = std::stoi(tok.substr(1));
    else if (tok[0] == 'H') height = std::stoi(tok.substr(1));
    else if (tok[0] == 'C') chroma = tok.substr(1);
  }
  if (width <= 0 || height <= 0) throw_validation(name + ": Y4M header lacks dimensions");
  if (const auto pos = chroma.find('p'); pos != std::string::npos && pos + 1 < chroma.size() &&
                                          std::isdigit(static_cast<unsigned char>(chroma[pos + 1])))
    throw_validation(name + ": unsupported bit depth (" + chroma + "), only 8-bit input is accepted");
  const std::size_t luma = static_cast<std::size_t>(width) * height;
  std::size_t frame_bytes = 0;
  if (chroma.rfind("420", 0) == 0) frame_bytes = yuv420_frame_bytes(width, height);
  else if (chroma.rfind("422", 0) == 0) frame_bytes = luma + 2 * static_cast<std::size_t>((width + 1) / 2) * height;
  else if (chroma.rfind("444", 0) == 0) frame_bytes = 3 * luma;
  else if (chroma.rfind("mono", 0) == 0) frame_bytes = luma;
  else throw_validation(name + ": unsupported Y4M colorspace C" + chroma);

  std::size_t pos = static_cast<std::size_t>(eol - bytes.begin()) + 1;
  for (int f = 0;; ++f) {
    if (pos + 5 > bytes.size()) throw_validation(name + ": frame " + std::to_string(frame) + " out of range");
    if (std::string_view(reinterpret_cast<const char*>(bytes.data() + pos), 5) != "FRAME")
      throw_validation(name + ": malformed frame marker");
    const auto line_end = std::find(bytes.begin() + static_cast<std::ptrdiff_t>(pos), bytes.end(), '\n');
    if (line_end == bytes.end()) throw_validation(name + ": truncated frame header");
    pos = static_cast<std::size_t>(line_end - bytes.begin()) + 1;
    if (pos + frame_bytes > bytes.size()) throw_validation(name + ": truncated frame data");
    if (f == frame) {
      const auto begin = bytes.begin() + static_cast<std::ptrdiff_t>(pos);
      return LumaPlane(width, height,
                       std::vector<std::uint8_t>(begin, begin + static_cast<std::ptrdiff_t>(luma)));
    }
    pos += frame_bytes;
  }
}

}  // namespace detail

// Loads the luma plane of an image or frame; chroma is discarded.
inline LumaPlane load_image(const std::filesystem::path& path, ImageFormat format,
                            const YuvSpec& yuv = {}) {
  if (!std::filesystem::exists(path)) throw_io("no such file: " + path.string());
  switch (format) {
    case ImageFormat::pgm: return detail::decode_pgm(detail::read_file(path), path.string());
    case ImageFormat::png: return detail::decode_png(path);
    case ImageFormat::yuv: return detail::decode_yuv(detail::read_file(path), yuv, path.string());
    case ImageFormat::y4m: return detail::decode_y4m(detail::read_file(path), yuv.frame, path.string());
  }
  throw_validation("unknown image format");
}

inline LumaPlane load_image(const std::filesystem::path& path, const YuvSpec& yuv = {}) {
  return load_image(path, format_from_path(path), yuv);
}

inline std::string encode_pgm(const LumaPlane& plane) {
  std::string out = "P5\n" + std::to_string(plane.width()) + " " +
                    std::to_string(plane.height()) + "\n255\n";
  const auto samples = plane.values();
  out.append(reinterpret_cast<const char*>(samples.data()), samples.size());
  return out;
}

// Writes an 8-bit plane as PGM or PNG, chosen by extension.
inline void save_plane(const LumaPlane& plane, const std::filesystem::path& path) {
  switch (format_from_path(path)) {
    case ImageFormat::pgm: detail::write_file(path, encode_pgm(plane)); return;
    case ImageFormat::png: detail::encode_png(plane, path); return;
    default: throw_validation("planes can only be written as .pgm or .png");
  }
}

// Linear [min, max] -> [0, 255]; a zero range maps everything to 0.
inline LumaPlane normalize_to_plane(const RealField& field) {
  LumaPlane plane(field.width(), field.height());
  if (field.empty()) return plane;
  const auto [lo, hi] = std::minmax_element(field.values().begin(), field.values().end());
  const double range = *hi - *lo;
  auto out = plane.values();
  for (std::size_t k = 0; k < out.size(); ++k) {
    out[k] = range > 0.0
                 ? static_cast<std::uint8_t>(std::lround((field.values()[k] - *lo) / range * 255.0))
                 : 0;
  }
  return plane;
}

inline std::string encode_float_map(const RealField& field) {
  std::string out(kFloatMapMagic.begin(), kFloatMapMagic.end());
  auto put_u32 = [&out](std::uint32_t v) {
    for (int b = 0; b < 4; ++b) out.push_back(static_cast<char>((v >> (8 * b)) & 0xFF));
  };
  put_u32(static_cast<std::uint32_t>(field.width()));
  put_u32(static_cast<std::uint32_t>(field.height()));
  out.reserve(out.size() + field.size() * 4);
  for (double v : field.values()) {
    const float f = static_cast<float>(v);
    std::uint32_t bits = 0;
    std::memcpy(&bits, &f, sizeof bits);
    put_u32(bits);
  }
  return out;
}

inline RealField decode_float_map(const std::vector<std::uint8_t>& bytes, const std::string& name) {
  if (bytes.size() < 16 || !std::equal(kFloatMapMagic.begin(), kFloatMapMagic.end(), bytes.begin()))
    throw_validation(name + ": missing SJNDMAP1 header");
  auto get_u32 = [&bytes](std::size_t pos) {
    std::uint32_t v = 0;
    for (int b = 0; b < 4; ++b) v |= static_cast<std::uint32_t>(bytes[pos + b]) << (8 * b);
    return v;
  };
  const std::uint32_t width = get_u32(8);
  const std::uint32_t height = get_u32(12);
  const std::size_t count = static_cast<std::size_t>(width) * height;
  if (bytes.size() != 16 + 4 * count)
    throw_validation(name + ": payload size does not match header dimensions");
  std::vector<double> values(count);
  for (std::size_t k = 0; k < count; ++k) {
    const std::uint32_t bits = get_u32(16 + 4 * k);
    float f = 0.0f;
    std::memcpy(&f, &bits, sizeof f);
    values[k] = f;
  }
  return RealField(static_cast<int>(width), static_cast<int>(height), std::move(values));
}

inline RealField load_float_map(const std::filesystem::path& path) {
  return decode_float_map(detail::read_file(path), path.string());
}

inline std::string encode_csv(const RealField& field) {
  std::string out;
  for (int y = 0; y < field.height(); ++y) {
    const auto row = field.row(y);
    for (int x = 0; x < field.width(); ++x) {
      if (x) out.push_back(',');
      out += format_number(row[x]);
    }
    out.push_back('\n');
  }
  return out;
}

inline void save_map(const RealField& field, const std::filesystem::path& path, MapEncoding encoding) {
  for (double v : field.values())
    if (!std::isfinite(v)) throw_validation("refusing to save a map containing NaN or Inf");
  switch (encoding) {
    case MapEncoding::pgm_normalized:
      detail::write_file(path, encode_pgm(normalize_to_plane(field)));
      return;
    case MapEncoding::float_binary: detail::write_file(path, encode_float_map(field)); return;
    case MapEncoding::csv: detail::write_file(path, encode_csv(field)); return;
  }
}

inline void save_map(const ThresholdMap& map, const std::filesystem::path& path, MapEncoding encoding) {
  save_map(map.field(), path, encoding);
}

inline void save_map(const LumaPlane& plane, const std::filesystem::path& path, MapEncoding encoding) {
  RealField field(plane.width(), plane.height());
  std::copy(plane.values().begin(), plane.values().end(), field.values().begin());
  save_map(field, path, encoding);
}

inline void write_text(const std::filesystem::path& path, std::string_view text) {
  detail::write_file(path, text);
}

}  // namespace sjnd
