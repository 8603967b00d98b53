#include "cbca/image.hpp"

#include <algorithm>
#include <string>

namespace cbca {

const char* to_string(ColorSpace space) {
  switch (space) {
    case ColorSpace::Rgb: return "RGB";
    case ColorSpace::Hsv: return "HSV";
    case ColorSpace::Lab: return "LAB";
    case ColorSpace::Gray: return "GRAY";
  }
  return "?";
}

Image::Image(int width, int height, ColorSpace space, Pixel8 fill)
    : width_(width), height_(height), space_(space) {
  if (width < 1 || height < 1)
    throw InvalidArgument("image dimensions must be >= 1, got " + std::to_string(width) + "x" +
                          std::to_string(height));
  data_.assign(static_cast<std::size_t>(width) * height, fill);
}

Mask::Mask(int width, int height, bool fill) : width_(width), height_(height) {
  if (width < 1 || height < 1) throw InvalidArgument("mask dimensions must be >= 1");
  bits_.assign(static_cast<std::size_t>(width) * height, fill ? 1 : 0);
}

std::size_t Mask::count() const {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

Mask& Mask::operator&=(const Mask& other) {
  if (other.width_ != width_ || other.height_ != height_)
    throw InvalidArgument("mask dimension mismatch in intersection");
  for (std::size_t i = 0; i < bits_.size(); ++i) bits_[i] &= other.bits_[i];
  return *this;
}

void require_space(const Image& img, ColorSpace expected, const char* op) {
  if (img.space() != expected)
    throw InvalidArgument(std::string(op) + ": expected " + to_string(expected) + " image, got " +
                          to_string(img.space()));
}

void require_same_dims(const Image& img, const Mask& mask, const char* op) {
  if (!mask.matches(img))
    throw InvalidArgument(std::string(op) + ": mask " + std::to_string(mask.width()) + "x" +
                          std::to_string(mask.height()) + " does not match image " +
                          std::to_string(img.width()) + "x" + std::to_string(img.height()));
}

}  // namespace cbca
