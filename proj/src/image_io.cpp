#include "cbca/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

namespace cbca {
namespace {

std::string lower_ext(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext;
}

// Next whitespace-delimited header token, skipping '#' comments.
std::string ppm_token(std::istream& in) {
  std::string tok;
  int c;
  while ((c = in.get()) != EOF) {
    if (c == '#') {
      while ((c = in.get()) != EOF && c != '\n') {
      }
      continue;
    }
    if (std::isspace(c)) {
      if (!tok.empty()) break;
      continue;
    }
    tok.push_back(static_cast<char>(c));
  }
  return tok;
}

int ppm_int(std::istream& in, const std::filesystem::path& path) {
  const std::string tok = ppm_token(in);
  try {
    std::size_t used = 0;
    const int v = std::stoi(tok, &used);
    if (used == tok.size()) return v;
  } catch (const std::exception&) {
  }
  throw InputError(path.string() + ": malformed PPM header");
}

Image read_ppm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  if (ppm_token(in) != "P6") throw InputError(path.string() + ": not a binary PPM (P6)");
  const int w = ppm_int(in, path), h = ppm_int(in, path), maxval = ppm_int(in, path);
  if (w < 1 || h < 1) throw InputError(path.string() + ": bad PPM dimensions");
  if (maxval != 255) throw InputError(path.string() + ": only 8-bit PPM is supported");
  Image img(w, h, ColorSpace::Rgb);
  auto px = img.pixels();
  std::vector<unsigned char> buf(px.size() * 3);
  in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (in.gcount() != static_cast<std::streamsize>(buf.size())) throw InputError(path.string() + ": truncated PPM");
  for (std::size_t i = 0; i < px.size(); ++i) px[i] = {buf[3 * i], buf[3 * i + 1], buf[3 * i + 2]};
  return img;
}

Image read_png(const std::filesystem::path& path) {
  png_image png{};
  png.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&png, path.string().c_str()))
    throw InputError(path.string() + ": " + png.message);
  png.format = PNG_FORMAT_RGB;
  if (png.width < 1 || png.height < 1 || png.width > 1u << 15 || png.height > 1u << 15) {
    png_image_free(&png);
    throw InputError(path.string() + ": unsupported PNG dimensions");
  }
  std::vector<unsigned char> buf(PNG_IMAGE_SIZE(png));
  if (!png_image_finish_read(&png, nullptr, buf.data(), 0, nullptr)) {
    const std::string msg = png.message;
    png_image_free(&png);
    throw InputError(path.string() + ": " + msg);
  }
  Image img(static_cast<int>(png.width), static_cast<int>(png.height), ColorSpace::Rgb);
  auto px = img.pixels();
  for (std::size_t i = 0; i < px.size(); ++i) px[i] = {buf[3 * i], buf[3 * i + 1], buf[3 * i + 2]};
  return img;
}

}  // namespace

bool is_image_file(const std::filesystem::path& path) {
  const std::string ext = lower_ext(path);
  return ext == ".ppm" || ext == ".png";
}

Image read_image(const std::filesystem::path& path) {
  const std::string ext = lower_ext(path);
  if (ext == ".ppm") return read_ppm(path);
  if (ext == ".png") return read_png(path);
  throw InputError(path.string() + ": unsupported image format (expected .ppm or .png)");
}

void write_ppm(const Image& rgb, const std::filesystem::path& path) {
  require_space(rgb, ColorSpace::Rgb, "write_ppm");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << "P6\n" << rgb.width() << ' ' << rgb.height() << "\n255\n";
  std::vector<unsigned char> buf;
  buf.reserve(rgb.size() * 3);
  for (const auto& p : rgb.pixels()) buf.insert(buf.end(), {p.c0, p.c1, p.c2});
  out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (!out) throw InputError("write failed: " + path.string());
}

}  // namespace cbca
