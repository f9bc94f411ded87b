#pragma once

#include <har/frame.hpp>

#include <stdexcept>
#include <string>
#include <string_view>

namespace har {

// Brightness/contrast reduction parameters, both as signed percentages.
// Contrast scales the slope about mid-gray 128; brightness shifts by a
// fraction of the full range. Contrast is applied first, then brightness,
// then the result is clamped to [0, 255].
struct DegradeSpec {
  double brightness_pct = 0.0;
  double contrast_pct = 0.0;
};

inline void validate(const DegradeSpec& spec) {
  if (spec.brightness_pct < -100.0 || spec.brightness_pct > 100.0 ||
      spec.contrast_pct < -100.0 || spec.contrast_pct > 100.0)
    throw std::invalid_argument("degrade percentages must lie in [-100, 100]");
}

// Named low-quality presets: S1 = (-20,-20), S2 = (-40,-40), S3 = (-50,-50).
inline DegradeSpec degrade_preset(std::string_view name) {
  if (name == "S1") return {-20.0, -20.0};
  if (name == "S2") return {-40.0, -40.0};
  if (name == "S3") return {-50.0, -50.0};
  throw std::invalid_argument("unknown degrade preset: " + std::string(name));
}

inline std::uint8_t degrade_pixel(std::uint8_t p, const DegradeSpec& spec) {
  const double v = (p - 128.0) * (1.0 + spec.contrast_pct / 100.0) + 128.0 +
                   255.0 * spec.brightness_pct / 100.0;
  return clamp_u8(round_half_up(v));
}

inline Frame degrade(const Frame& frame, const DegradeSpec& spec) {
  validate(spec);
  Frame out(frame.width, frame.height);
  for (std::size_t i = 0; i < frame.size(); ++i)
    out.pixels[i] = degrade_pixel(frame.pixels[i], spec);
  return out;
}

}  // namespace har
