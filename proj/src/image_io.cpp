#include "hfa/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

namespace hfa {

double srgb_to_linear(double v) {
  return v <= 0.04045 ? v / 12.92 : std::pow((v + 0.055) / 1.055, 2.4);
}

double linear_to_srgb(double v) {
  v = std::clamp(v, 0.0, 1.0);
  return v <= 0.0031308 ? v * 12.92 : 1.055 * std::pow(v, 1.0 / 2.4) - 0.055;
}

int quantize_srgb8(double linear) {
  return static_cast<int>(std::lround(linear_to_srgb(linear) * 255.0));
}

namespace {

struct Raw {
  int width = 0;
  int height = 0;
  std::vector<unsigned char> rgb;  // 8-bit sRGB
};

std::vector<unsigned char> read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open image '" + path.string() + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Raw decode_png(const std::vector<unsigned char>& bytes, const std::filesystem::path& path) {
  png_image img;
  std::memset(&img, 0, sizeof img);
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&img, bytes.data(), bytes.size())) {
    throw IoError("cannot decode PNG '" + path.string() + "': " + img.message);
  }
  img.format = PNG_FORMAT_RGB;
  Raw raw;
  raw.width = static_cast<int>(img.width);
  raw.height = static_cast<int>(img.height);
  raw.rgb.resize(PNG_IMAGE_SIZE(img));
  if (!png_image_finish_read(&img, nullptr, raw.rgb.data(), 0, nullptr)) {
    png_image_free(&img);
    throw IoError("cannot decode PNG '" + path.string() + "': " + img.message);
  }
  return raw;
}

Raw decode_ppm(const std::vector<unsigned char>& bytes, const std::filesystem::path& path) {
  std::size_t pos = 2;
  auto fail = [&](const std::string& why) { return IoError("bad P6 file '" + path.string() + "': " + why); };
  auto next_int = [&]() {
    for (;;) {
      while (pos < bytes.size() && std::isspace(bytes[pos])) ++pos;
      if (pos < bytes.size() && bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
        continue;
      }
      break;
    }
    if (pos >= bytes.size() || !std::isdigit(bytes[pos])) throw fail("truncated header");
    long v = 0;
    while (pos < bytes.size() && std::isdigit(bytes[pos])) {
      v = v * 10 + (bytes[pos++] - '0');
      if (v > 1 << 20) throw fail("header value too large");
    }
    return static_cast<int>(v);
  };
  Raw raw;
  raw.width = next_int();
  raw.height = next_int();
  const int maxval = next_int();
  if (raw.width < 1 || raw.height < 1) throw fail("empty image");
  if (maxval != 255) throw fail("only max value 255 is supported");
  ++pos;  // single whitespace after maxval
  const std::size_t need = static_cast<std::size_t>(raw.width) * raw.height * 3;
  if (bytes.size() < pos + need) throw fail("truncated pixel data");
  raw.rgb.assign(bytes.begin() + static_cast<std::ptrdiff_t>(pos),
                 bytes.begin() + static_cast<std::ptrdiff_t>(pos + need));
  return raw;
}

}  // namespace

Image resample_box(const Image& src, int size) {
  if (size < 1) throw InvalidArgument("resample size must be positive");
  const int w = src.width();
  const int h = src.height();
  if (w == size && h == size) return src;
  Image out(size, size);
  const double sx = static_cast<double>(w) / size;
  const double sy = static_cast<double>(h) / size;
  for (int r = 0; r < size; ++r) {
    const double y0 = r * sy;
    const double y1 = (r + 1) * sy;
    for (int c = 0; c < size; ++c) {
      const double x0 = c * sx;
      const double x1 = (c + 1) * sx;
      Rgb sum{};
      double area = 0.0;
      for (int yy = static_cast<int>(std::floor(y0)); yy < std::min(h, static_cast<int>(std::ceil(y1))); ++yy) {
        const double wy = std::min(y1, yy + 1.0) - std::max(y0, static_cast<double>(yy));
        if (wy <= 0.0) continue;
        for (int xx = static_cast<int>(std::floor(x0)); xx < std::min(w, static_cast<int>(std::ceil(x1))); ++xx) {
          const double wx = std::min(x1, xx + 1.0) - std::max(x0, static_cast<double>(xx));
          if (wx <= 0.0) continue;
          sum += src.at(yy, xx) * (wx * wy);
          area += wx * wy;
        }
      }
      out.at(r, c) = sum * (1.0 / area);
    }
  }
  return out;
}

Image load_image(const std::filesystem::path& path, int target_size, std::vector<std::string>* warnings) {
  const std::vector<unsigned char> bytes = read_bytes(path);
  Raw raw;
  if (bytes.size() >= 8 && png_sig_cmp(bytes.data(), 0, 8) == 0) {
    raw = decode_png(bytes, path);
  } else if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] == '6') {
    raw = decode_ppm(bytes, path);
  } else {
    throw IoError("unsupported image format '" + path.string() + "' (expected PNG or P6)");
  }

  int side = std::min(raw.width, raw.height);
  const int x0 = (raw.width - side) / 2;
  const int y0 = (raw.height - side) / 2;
  if (raw.width != raw.height && warnings) {
    warnings->push_back("image '" + path.string() + "' is " + std::to_string(raw.width) + "x" +
                        std::to_string(raw.height) + "; center-cropped to " + std::to_string(side) +
                        "x" + std::to_string(side));
  }
  Image img(side, side);
  for (int r = 0; r < side; ++r) {
    for (int c = 0; c < side; ++c) {
      const std::size_t i = (static_cast<std::size_t>(r + y0) * raw.width + (c + x0)) * 3;
      img.at(r, c) = {srgb_to_linear(raw.rgb[i] / 255.0), srgb_to_linear(raw.rgb[i + 1] / 255.0),
                      srgb_to_linear(raw.rgb[i + 2] / 255.0)};
    }
  }
  if (target_size > 0 && target_size != side) return resample_box(img, target_size);
  return img;
}

namespace {

std::vector<unsigned char> encode_rgb8(const Image& image) {
  std::vector<unsigned char> out(image.size() * 3);
  for (std::size_t p = 0; p < image.size(); ++p) {
    for (std::size_t ch = 0; ch < 3; ++ch) out[3 * p + ch] = static_cast<unsigned char>(quantize_srgb8(image[p][ch]));
  }
  return out;
}

}  // namespace

void save_png(const std::filesystem::path& path, const Image& image) {
  png_image img;
  std::memset(&img, 0, sizeof img);
  img.version = PNG_IMAGE_VERSION;
  img.width = static_cast<png_uint_32>(image.width());
  img.height = static_cast<png_uint_32>(image.height());
  img.format = PNG_FORMAT_RGB;
  const std::vector<unsigned char> rgb = encode_rgb8(image);
  if (!png_image_write_to_file(&img, path.string().c_str(), 0, rgb.data(), 0, nullptr)) {
    throw IoError("cannot write PNG '" + path.string() + "': " + img.message);
  }
}

void save_ppm(const std::filesystem::path& path, const Image& image) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << "P6\n" << image.width() << " " << image.height() << "\n255\n";
  const std::vector<unsigned char> rgb = encode_rgb8(image);
  out.write(reinterpret_cast<const char*>(rgb.data()), static_cast<std::streamsize>(rgb.size()));
  if (!out) throw IoError("cannot write '" + path.string() + "'");
}

void save_image(const std::filesystem::path& path, const Image& image) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  if (ext == ".ppm") {
    save_ppm(path, image);
  } else if (ext == ".png") {
    save_png(path, image);
  } else {
    throw InvalidArgument("image output must end in .png or .ppm: '" + path.string() + "'");
  }
}

}  // namespace hfa
