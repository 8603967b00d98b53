#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "cbca/error.hpp"

namespace cbca {

enum class ColorSpace { Rgb, Hsv, Lab, Gray };

const char* to_string(ColorSpace space);

// Three 8-bit channels. Meaning depends on the owning image's ColorSpace:
// RGB (r,g,b), HSV (h in [0,180], s, v), Lab (L*255/100, a+128, b+128).
struct Pixel8 {
  std::uint8_t c0 = 0;
  std::uint8_t c1 = 0;
  std::uint8_t c2 = 0;

  std::uint8_t operator[](int ch) const { return ch == 0 ? c0 : (ch == 1 ? c1 : c2); }
  std::uint8_t& operator[](int ch) { return ch == 0 ? c0 : (ch == 1 ? c1 : c2); }

  friend bool operator==(const Pixel8&, const Pixel8&) = default;
};

// Owned row-major raster. Gray images store the value in c0 (c1 = c2 = 0).
class Image {
 public:
  Image() = default;
  Image(int width, int height, ColorSpace space, Pixel8 fill = {});

  int width() const { return width_; }
  int height() const { return height_; }
  ColorSpace space() const { return space_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  Pixel8& at(int x, int y) { return data_[static_cast<std::size_t>(y) * width_ + x]; }
  const Pixel8& at(int x, int y) const { return data_[static_cast<std::size_t>(y) * width_ + x]; }

  std::span<Pixel8> pixels() { return data_; }
  std::span<const Pixel8> pixels() const { return data_; }
  std::span<Pixel8> row(int y) { return {data_.data() + static_cast<std::size_t>(y) * width_, static_cast<std::size_t>(width_)}; }
  std::span<const Pixel8> row(int y) const { return {data_.data() + static_cast<std::size_t>(y) * width_, static_cast<std::size_t>(width_)}; }

  // Retag without touching data; used after an in-place conversion.
  void set_space(ColorSpace space) { space_ = space; }

  friend bool operator==(const Image&, const Image&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  ColorSpace space_ = ColorSpace::Rgb;
  std::vector<Pixel8> data_;
};

// One flag per pixel; true selects the pixel.
class Mask {
 public:
  Mask() = default;
  Mask(int width, int height, bool fill = false);

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return bits_.size(); }

  bool at(int x, int y) const { return bits_[static_cast<std::size_t>(y) * width_ + x] != 0; }
  void set(int x, int y, bool v) { bits_[static_cast<std::size_t>(y) * width_ + x] = v ? 1 : 0; }
  bool operator[](std::size_t i) const { return bits_[i] != 0; }
  void set(std::size_t i, bool v) { bits_[i] = v ? 1 : 0; }

  std::size_t count() const;
  bool matches(const Image& img) const { return img.width() == width_ && img.height() == height_; }

  Mask& operator&=(const Mask& other);

  friend bool operator==(const Mask&, const Mask&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  // uint8_t rather than vector<bool> so rows can be written from parallel loops.
  std::vector<std::uint8_t> bits_;
};

void require_space(const Image& img, ColorSpace expected, const char* op);
void require_same_dims(const Image& img, const Mask& mask, const char* op);

}  // namespace cbca
