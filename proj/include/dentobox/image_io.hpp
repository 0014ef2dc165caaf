#pragma once

#include <png.h>

#include <cctype>
#include <csetjmp>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "dentobox/errors.hpp"
#include "dentobox/labelmap.hpp"

namespace dentobox {

enum class ImageFormat { png8, pgm };

namespace detail {

inline void check_label_value(int v, int x, int y) {
  if (v < 0 || v > kMaxLabel)
    throw io_error("label value " + std::to_string(v) + " at (" +
                   std::to_string(x) + ", " + std::to_string(y) +
                   ") exceeds " + std::to_string(kMaxLabel));
}

// --- ASCII PGM (P2) ---

// Token stream that skips whitespace and '#' comments.
struct PgmScanner {
  std::string_view text;
  std::size_t pos = 0;

  bool next_token(std::string& out) {
    while (pos < text.size()) {
      const char c = text[pos];
      if (c == '#') {
        while (pos < text.size() && text[pos] != '\n') ++pos;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos;
      } else {
        break;
      }
    }
    if (pos >= text.size()) return false;
    const std::size_t start = pos;
    while (pos < text.size() &&
           !std::isspace(static_cast<unsigned char>(text[pos])) &&
           text[pos] != '#')
      ++pos;
    out.assign(text.substr(start, pos - start));
    return true;
  }

  int next_int(const char* what) {
    std::string tok;
    if (!next_token(tok)) throw io_error(std::string("pgm: missing ") + what);
    try {
      std::size_t used = 0;
      const int v = std::stoi(tok, &used);
      if (used != tok.size()) throw std::invalid_argument(tok);
      return v;
    } catch (const std::exception&) {
      throw io_error(std::string("pgm: bad ") + what + " '" + tok + "'");
    }
  }
};

}  // namespace detail

inline LabelMap load_pgm(std::span<const unsigned char> bytes) {
  detail::PgmScanner scan{
      std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size())};
  std::string magic;
  if (!scan.next_token(magic) || magic != "P2")
    throw io_error("pgm: expected ASCII P2 magic");
  const int width = scan.next_int("width");
  const int height = scan.next_int("height");
  const int maxval = scan.next_int("maxval");
  if (width <= 0 || height <= 0) throw io_error("pgm: bad dimensions");
  if (maxval < 1 || maxval > 255) throw io_error("pgm: maxval must be 1..255");

  std::vector<std::uint8_t> values;
  values.reserve(static_cast<std::size_t>(width) * height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const int v = scan.next_int("pixel");
      if (v < 0 || v > maxval)
        throw io_error("pgm: pixel " + std::to_string(v) + " at (" +
                       std::to_string(x) + ", " + std::to_string(y) +
                       ") outside 0..maxval");
      detail::check_label_value(v, x, y);
      values.push_back(static_cast<std::uint8_t>(v));
    }
  }
  return LabelMap(width, height, std::move(values));
}

inline std::vector<unsigned char> save_pgm(const LabelMap& map) {
  std::string out = "P2\n" + std::to_string(map.width()) + " " +
                    std::to_string(map.height()) + "\n255\n";
  for (int y = 0; y < map.height(); ++y) {
    for (int x = 0; x < map.width(); ++x) {
      if (x) out += ' ';
      out += std::to_string(map.at(x, y));
    }
    out += '\n';
  }
  return {out.begin(), out.end()};
}

// --- 8-bit grayscale PNG ---

namespace detail {

struct PngReadCursor {
  const unsigned char* data;
  std::size_t size;
  std::size_t pos;
};

inline void png_read_fn(png_structp png, png_bytep out, png_size_t n) {
  auto* cur = static_cast<PngReadCursor*>(png_get_io_ptr(png));
  if (cur->pos + n > cur->size) png_error(png, "unexpected end of data");
  std::memcpy(out, cur->data + cur->pos, n);
  cur->pos += n;
}

inline void png_write_fn(png_structp png, png_bytep data, png_size_t n) {
  auto* out = static_cast<std::vector<unsigned char>*>(png_get_io_ptr(png));
  out->insert(out->end(), data, data + n);
}

inline void png_flush_fn(png_structp) {}

}  // namespace detail

inline LabelMap load_png(std::span<const unsigned char> bytes) {
  if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0)
    throw io_error("png: bad signature");

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr,
                                           nullptr, nullptr);
  if (!png) throw io_error("png: failed to allocate read struct");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw io_error("png: failed to allocate info struct");
  }

  detail::PngReadCursor cursor{bytes.data(), bytes.size(), 0};
  std::vector<std::uint8_t> pixels;
  std::vector<png_bytep> rows;
  png_uint_32 width = 0, height = 0;

  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw io_error("png: malformed file");
  }

  png_set_read_fn(png, &cursor, detail::png_read_fn);
  png_read_info(png, info);
  width = png_get_image_width(png, info);
  height = png_get_image_height(png, info);
  const int bit_depth = png_get_bit_depth(png, info);
  const int color_type = png_get_color_type(png, info);
  if (bit_depth != 8 || color_type != PNG_COLOR_TYPE_GRAY) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw io_error("png: expected 8-bit single-channel grayscale");
  }
  png_set_interlace_handling(png);
  png_read_update_info(png, info);

  pixels.resize(static_cast<std::size_t>(width) * height);
  rows.resize(height);
  for (png_uint_32 y = 0; y < height; ++y)
    rows[y] = pixels.data() + static_cast<std::size_t>(y) * width;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  for (std::size_t i = 0; i < pixels.size(); ++i)
    detail::check_label_value(pixels[i], static_cast<int>(i % width),
                              static_cast<int>(i / width));
  return LabelMap(static_cast<int>(width), static_cast<int>(height),
                  std::move(pixels));
}

inline std::vector<unsigned char> save_png(const LabelMap& map) {
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr,
                                            nullptr, nullptr);
  if (!png) throw io_error("png: failed to allocate write struct");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw io_error("png: failed to allocate info struct");
  }

  std::vector<unsigned char> out;
  std::vector<png_bytep> rows(map.height());
  auto values = map.values();
  for (int y = 0; y < map.height(); ++y)
    rows[y] = const_cast<png_bytep>(values.data() +
                                    static_cast<std::size_t>(y) * map.width());

  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw io_error("png: encode failed");
  }

  png_set_write_fn(png, &out, detail::png_write_fn, detail::png_flush_fn);
  png_set_IHDR(png, info, map.width(), map.height(), 8, PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, info);
  png_destroy_write_struct(&png, &info);
  return out;
}

inline LabelMap load_labelmap(std::span<const unsigned char> bytes,
                              ImageFormat format) {
  switch (format) {
    case ImageFormat::png8:
      return load_png(bytes);
    case ImageFormat::pgm:
      return load_pgm(bytes);
  }
  throw io_error("load_labelmap: unknown format");
}

inline std::vector<unsigned char> save_labelmap(const LabelMap& map,
                                                ImageFormat format) {
  switch (format) {
    case ImageFormat::png8:
      return save_png(map);
    case ImageFormat::pgm:
      return save_pgm(map);
  }
  throw io_error("save_labelmap: unknown format");
}

inline std::vector<unsigned char> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (in.bad()) throw io_error("failed reading " + path.string());
  return bytes;
}

inline void write_file(const std::filesystem::path& path,
                       std::span<const unsigned char> bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot create " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw io_error("failed writing " + path.string());
}

// Sniffs the format from the file content (PNG signature or P2 magic),
// falling back to the extension.
inline ImageFormat detect_format(const std::filesystem::path& path,
                                 std::span<const unsigned char> bytes) {
  if (bytes.size() >= 8 && png_sig_cmp(bytes.data(), 0, 8) == 0)
    return ImageFormat::png8;
  if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] == '2')
    return ImageFormat::pgm;
  const auto ext = path.extension().string();
  if (ext == ".png") return ImageFormat::png8;
  if (ext == ".pgm") return ImageFormat::pgm;
  throw io_error("unrecognized image format: " + path.string());
}

inline LabelMap load_labelmap_file(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  return load_labelmap(bytes, detect_format(path, bytes));
}

inline void save_labelmap_file(const std::filesystem::path& path,
                               const LabelMap& map) {
  const auto ext = path.extension().string();
  const ImageFormat format =
      ext == ".pgm" ? ImageFormat::pgm : ImageFormat::png8;
  const auto bytes = save_labelmap(map, format);
  write_file(path, bytes);
}

}  // namespace dentobox
