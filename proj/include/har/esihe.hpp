#pragma once

#include <har/frame.hpp>

#include <array>
#include <stdexcept>

namespace har {

// 256-bin occurrence counts. Bins hold reals because clipping caps them at a
// fractional threshold; fresh histograms hold whole counts.
struct Histogram {
  std::array<double, kGreyLevels> bins{};
  double total = 0.0;
};

// Per-frame enhancement parameters, recorded for diagnostics.
struct EsiheParams {
  double exposure_threshold = 0.0;  // Et in (0, 1]
  int boundary = 0;                 // Ea, grey level splitting the sub-images
  double clip_threshold = 0.0;      // Tc, bin cap
  double n_lower = 0.0;             // clipped mass at or below Ea
  double n_upper = 0.0;             // clipped mass above Ea
};

// Grey-level lookup produced by equalizing the two sub-histograms. Levels at
// or below the boundary stay in [0, boundary]; levels above it stay in
// [boundary+1, 255]; each half is non-decreasing.
struct TransferTable {
  std::array<std::uint8_t, kGreyLevels> map{};
};

inline Histogram compute_histogram(const Frame& frame) {
  Histogram h;
  for (auto p : frame.pixels) h.bins[p] += 1.0;
  h.total = static_cast<double>(frame.size());
  return h;
}

// Intensity-weighted histogram mean, normalized to (0, 1]. Grey level g
// contributes with weight g+1 so a saturated image reaches exactly 1.
inline double exposure_threshold(const Histogram& hist) {
  if (hist.total <= 0.0) throw std::invalid_argument("empty histogram");
  double weighted = 0.0;
  for (int g = 0; g < kGreyLevels; ++g) weighted += hist.bins[g] * (g + 1);
  return weighted / (kGreyLevels * hist.total);
}

inline int exposure_boundary(double et) {
  return std::clamp(round_half_up(kGreyLevels * (1.0 - et)), 0, kGreyLevels - 1);
}

// Caps every bin at the mean bin height Tc = total / 256.
inline std::pair<Histogram, double> clip_histogram(const Histogram& hist) {
  if (hist.total <= 0.0) throw std::invalid_argument("empty histogram");
  const double tc = hist.total / kGreyLevels;
  Histogram clipped;
  for (int g = 0; g < kGreyLevels; ++g) {
    clipped.bins[g] = std::min(hist.bins[g], tc);
    clipped.total += clipped.bins[g];
  }
  return {clipped, tc};
}

// Equalizes [0, ea] onto [0, ea] and [ea+1, 255] onto [ea+1, 255] using the
// CDFs of the clipped sub-histograms. A sub-range with no mass keeps the
// identity mapping.
inline TransferTable build_transfer(const Histogram& clipped, int ea) {
  if (ea < 0 || ea > kGreyLevels - 1) throw std::invalid_argument("boundary out of range");
  TransferTable table;
  double n_lower = 0.0, n_upper = 0.0;
  for (int g = 0; g <= ea; ++g) n_lower += clipped.bins[g];
  for (int g = ea + 1; g < kGreyLevels; ++g) n_upper += clipped.bins[g];

  // Accumulate raw mass and divide once per level: the repeated-increment
  // form drifts by an ulp and can flip a rounding boundary.
  if (n_lower > 0.0) {
    double cum = 0.0;
    for (int g = 0; g <= ea; ++g) {
      cum += clipped.bins[g];
      table.map[g] = clamp_u8(round_half_up(ea * (cum / n_lower)));
    }
  } else {
    for (int g = 0; g <= ea; ++g) table.map[g] = static_cast<std::uint8_t>(g);
  }

  if (n_upper > 0.0) {
    const int lo = ea + 1;
    const int span = kGreyLevels - 1 - lo;
    double cum = 0.0;
    for (int g = lo; g < kGreyLevels; ++g) {
      cum += clipped.bins[g];
      table.map[g] =
          clamp_u8(std::clamp(round_half_up(lo + span * (cum / n_upper)), lo, kGreyLevels - 1));
    }
  } else {
    for (int g = ea + 1; g < kGreyLevels; ++g) table.map[g] = static_cast<std::uint8_t>(g);
  }
  return table;
}

// Exposure-split sub-image histogram equalization: exposure threshold ->
// boundary -> histogram clipping -> per-sub-image equalization -> pixel
// lookup. Optionally reports the intermediate parameters.
inline Frame enhance(const Frame& frame, EsiheParams* params_out = nullptr) {
  const Histogram hist = compute_histogram(frame);
  const double et = exposure_threshold(hist);
  const int ea = exposure_boundary(et);
  const auto [clipped, tc] = clip_histogram(hist);
  const TransferTable table = build_transfer(clipped, ea);

  if (params_out) {
    double n_lower = 0.0;
    for (int g = 0; g <= ea; ++g) n_lower += clipped.bins[g];
    *params_out = {et, ea, tc, n_lower, clipped.total - n_lower};
  }

  Frame out(frame.width, frame.height);
  for (std::size_t i = 0; i < frame.size(); ++i) out.pixels[i] = table.map[frame.pixels[i]];
  return out;
}

}  // namespace har
