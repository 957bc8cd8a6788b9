#include "mlai/tensor/image_io.hpp"

#include <png.h>

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <json.hpp>
#include <stdexcept>

namespace mlai {
namespace {

constexpr char kMagic[8] = {'M', 'L', 'A', 'I', 'I', 'M', 'G', '1'};

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(const std::uint8_t* p) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[i]) << (8 * i);
  return v;
}

struct PngReadState {
  const std::vector<std::uint8_t>* bytes;
  std::size_t offset;
};

void png_read_from_vector(png_structp png, png_bytep out, png_size_t n) {
  auto* st = static_cast<PngReadState*>(png_get_io_ptr(png));
  if (st->offset + n > st->bytes->size()) png_error(png, "truncated PNG data");
  std::memcpy(out, st->bytes->data() + st->offset, n);
  st->offset += n;
}

void png_write_to_vector(png_structp png, png_bytep data, png_size_t n) {
  auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
  out->insert(out->end(), data, data + n);
}

void png_flush_noop(png_structp) {}

[[noreturn]] void png_throw(png_structp, png_const_charp msg) {
  throw std::runtime_error(std::string("png: ") + msg);
}

void png_warn_ignore(png_structp, png_const_charp) {}

}  // namespace

std::vector<std::uint8_t> encode_raw(const Image& image) {
  const nlohmann::json header = {{"height", image.height()},
                                 {"width", image.width()},
                                 {"channels", image.channels()},
                                 {"dtype", "<f8"}};
  const std::string text = header.dump();
  std::vector<std::uint8_t> out(kMagic, kMagic + 8);
  put_u32(out, static_cast<std::uint32_t>(text.size()));
  out.insert(out.end(), text.begin(), text.end());
  out.reserve(out.size() + image.size() * 8);
  for (double v : image.data()) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
  }
  return out;
}

Image decode_raw(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 12 || std::memcmp(bytes.data(), kMagic, 8) != 0) {
    throw std::invalid_argument("not a raw image container (bad magic)");
  }
  const std::uint32_t len = get_u32(bytes.data() + 8);
  if (12 + static_cast<std::size_t>(len) > bytes.size()) {
    throw std::invalid_argument("raw image header truncated");
  }
  const auto header = nlohmann::json::parse(bytes.begin() + 12, bytes.begin() + 12 + len);
  const Shape shape{header.at("height").get<std::size_t>(), header.at("width").get<std::size_t>(),
                    header.at("channels").get<std::size_t>()};
  validate_shape(shape);
  const std::size_t offset = 12 + len;
  if (bytes.size() != offset + shape.size() * 8) {
    throw std::invalid_argument("raw image payload length does not match header");
  }
  std::vector<double> data(shape.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    std::uint64_t bits = 0;
    for (int b = 0; b < 8; ++b) {
      bits |= static_cast<std::uint64_t>(bytes[offset + i * 8 + b]) << (8 * b);
    }
    data[i] = std::bit_cast<double>(bits);
  }
  return Image(shape, std::move(data));
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_bytes(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

void save_raw(const Image& image, const std::filesystem::path& path) {
  write_file_bytes(path, encode_raw(image));
}

Image load_raw(const std::filesystem::path& path) { return decode_raw(read_file_bytes(path)); }

std::vector<std::uint8_t> encode_png(const Image& image) {
  int color_type = 0;
  switch (image.channels()) {
    case 1: color_type = PNG_COLOR_TYPE_GRAY; break;
    case 3: color_type = PNG_COLOR_TYPE_RGB; break;
    case 4: color_type = PNG_COLOR_TYPE_RGB_ALPHA; break;
    default: throw std::invalid_argument("PNG export supports 1, 3 or 4 channels");
  }
  std::vector<std::uint8_t> out;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, png_throw, png_warn_ignore);
  if (!png) throw std::runtime_error("png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  std::vector<std::uint8_t> row(image.width() * image.channels());
  try {
    png_set_write_fn(png, &out, png_write_to_vector, png_flush_noop);
    png_set_IHDR(png, info, static_cast<png_uint_32>(image.width()),
                 static_cast<png_uint_32>(image.height()), 8, color_type, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (std::size_t y = 0; y < image.height(); ++y) {
      for (std::size_t i = 0; i < row.size(); ++i) {
        row[i] = static_cast<std::uint8_t>(std::lround(image[y * row.size() + i] * 255.0));
      }
      png_write_row(png, row.data());
    }
    png_write_end(png, nullptr);
  } catch (...) {
    png_destroy_write_struct(&png, &info);
    throw;
  }
  png_destroy_write_struct(&png, &info);
  return out;
}

Image decode_png(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0) {
    throw std::invalid_argument("not a PNG stream");
  }
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, png_throw, png_warn_ignore);
  if (!png) throw std::runtime_error("png_create_read_struct failed");
  png_infop info = png_create_info_struct(png);
  PngReadState state{&bytes, 0};
  std::vector<double> data;
  Shape shape;
  try {
    png_set_read_fn(png, &state, png_read_from_vector);
    png_read_info(png, info);
    png_set_expand(png);
    png_set_strip_16(png);
    png_set_strip_alpha(png);
    png_read_update_info(png, info);
    shape.height = png_get_image_height(png, info);
    shape.width = png_get_image_width(png, info);
    shape.channels = png_get_channels(png, info);
    validate_shape(shape);
    std::vector<std::uint8_t> row(png_get_rowbytes(png, info));
    data.reserve(shape.size());
    for (std::size_t y = 0; y < shape.height; ++y) {
      png_read_row(png, row.data(), nullptr);
      for (std::size_t i = 0; i < shape.width * shape.channels; ++i) {
        data.push_back(row[i] / 255.0);
      }
    }
  } catch (...) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw;
  }
  png_destroy_read_struct(&png, &info, nullptr);
  return Image(shape, std::move(data));
}

void save_png(const Image& image, const std::filesystem::path& path) {
  write_file_bytes(path, encode_png(image));
}

Image resample_nearest(const Image& image, const Shape& target) {
  validate_shape(target);
  const std::size_t sc = image.channels();
  const std::size_t tc = target.channels;
  if (!(sc == tc || ((sc == 1 || sc == 3) && (tc == 1 || tc == 3)))) {
    throw std::invalid_argument("cannot convert " + std::to_string(sc) + " channels to " +
                                std::to_string(tc));
  }
  std::vector<double> out(target.size());
  for (std::size_t y = 0; y < target.height; ++y) {
    const std::size_t sy = y * image.height() / target.height;
    for (std::size_t x = 0; x < target.width; ++x) {
      const std::size_t sx = x * image.width() / target.width;
      for (std::size_t c = 0; c < tc; ++c) {
        double v;
        if (sc == tc) {
          v = image.at(sy, sx, c);
        } else if (sc == 1) {
          v = image.at(sy, sx, 0);
        } else {
          v = (image.at(sy, sx, 0) + image.at(sy, sx, 1) + image.at(sy, sx, 2)) / 3.0;
        }
        out[target.index(y, x, c)] = v;
      }
    }
  }
  return Image::clamped(target, std::move(out));
}

}  // namespace mlai
