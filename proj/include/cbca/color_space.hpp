#pragma once

#include <cstdint>

#include "cbca/image.hpp"

namespace cbca {

// 8-bit encodings used throughout the feature pipeline:
//   HSV: H = hue_degrees / 2 in [0,180), S and V in [0,255].
//   Lab: L' = L* * 255/100, a' = a* + 128, b' = b* + 128 (sRGB, D65 white).
// Every final 8-bit encode rounds half away from zero and clamps to [0,255].

// Unencoded CIE L*a*b* (L* in [0,100]).
struct LabF {
  double l = 0.0;
  double a = 0.0;
  double b = 0.0;
};

std::uint8_t round_to_u8(double v);

Pixel8 rgb_to_hsv(Pixel8 rgb);
Pixel8 hsv_to_rgb(Pixel8 hsv);
Pixel8 rgb_to_lab(Pixel8 rgb);
Pixel8 lab_to_rgb(Pixel8 lab);

// Unquantized halves of the Lab chain; lab_to_rgb(rgb_to_lab(p)) composes
// these with an 8-bit encode in between.
LabF rgb_to_lab_f(Pixel8 rgb);
Pixel8 lab_f_to_rgb(const LabF& lab);
LabF decode_lab(Pixel8 lab);
Pixel8 encode_lab(const LabF& lab);

// True when the exact decode of an encoded Lab pixel lies inside the sRGB cube
// (no clamping needed in lab_to_rgb).
bool lab_in_gamut(Pixel8 lab);

// sRGB transfer function on [0,1].
double srgb_to_linear(double c);
double linear_to_srgb(double c);

// Whole-image conversions. Input tags are checked.
Image to_hsv(const Image& rgb);
Image to_lab(const Image& rgb);
Image hsv_to_rgb(const Image& hsv);
Image lab_to_rgb(const Image& lab);
// Single-channel luma image holding Lab L' in c0.
Image to_gray_l(const Image& rgb);

}  // namespace cbca
