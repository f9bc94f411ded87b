#pragma once

#include <har/frame.hpp>

#include <array>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

namespace har {

// Per-pixel Shannon entropy (bits) of the local neighborhood histogram.
struct EntropyMap {
  int width = 0;
  int height = 0;
  std::vector<double> values;

  double& at(int y, int x) { return values[static_cast<std::size_t>(y) * width + x]; }
  double at(int y, int x) const { return values[static_cast<std::size_t>(y) * width + x]; }
};

// Grey-level co-occurrence counts at a fixed pixel displacement, over
// quantized levels.
struct GlcmMatrix {
  int levels = 0;
  std::vector<double> counts;  // levels x levels, row-major
  int dy = 0, dx = 0;
  bool symmetric = true;

  double& at(int m, int n) { return counts[static_cast<std::size_t>(m) * levels + n]; }
  double at(int m, int n) const { return counts[static_cast<std::size_t>(m) * levels + n]; }
};

// Counts co-occurrences of quantized grey pairs (p, p+offset). When symmetric,
// the transpose is added so both orderings of a pair are tallied.
inline GlcmMatrix glcm(const Frame& frame, int dy, int dx, int levels = 32,
                       bool symmetric = true) {
  if (levels < 2 || levels > kGreyLevels)
    throw std::invalid_argument("glcm levels must lie in [2, 256]");
  if (dy == 0 && dx == 0) throw std::invalid_argument("glcm offset must be nonzero");
  if (frame.width <= std::abs(dx) || frame.height <= std::abs(dy))
    throw std::invalid_argument("frame smaller than glcm offset");

  GlcmMatrix m;
  m.levels = levels;
  m.dy = dy;
  m.dx = dx;
  m.symmetric = symmetric;
  m.counts.assign(static_cast<std::size_t>(levels) * levels, 0.0);

  auto quantize = [levels](std::uint8_t g) { return (g * levels) >> 8; };
  for (int y = 0; y < frame.height; ++y) {
    const int y2 = y + dy;
    if (y2 < 0 || y2 >= frame.height) continue;
    for (int x = 0; x < frame.width; ++x) {
      const int x2 = x + dx;
      if (x2 < 0 || x2 >= frame.width) continue;
      m.at(quantize(frame.at(y, x)), quantize(frame.at(y2, x2))) += 1.0;
    }
  }
  if (symmetric) {
    for (int a = 0; a < levels; ++a)
      for (int b = a + 1; b < levels; ++b) {
        const double s = m.at(a, b) + m.at(b, a);
        m.at(a, b) = s;
        m.at(b, a) = s;
      }
    for (int a = 0; a < levels; ++a) m.at(a, a) *= 2.0;
  }
  return m;
}

// Shannon entropy (bits) of the normalized co-occurrence distribution.
// Zero exactly when all mass sits in a single cell.
inline double texture_entropy(const GlcmMatrix& m) {
  double total = 0.0;
  for (double c : m.counts) total += c;
  if (total <= 0.0) throw std::invalid_argument("empty co-occurrence matrix");
  double e = 0.0;
  for (double c : m.counts) {
    if (c > 0.0) {
      const double p = c / total;
      e -= p * std::log2(p);
    }
  }
  return std::max(e, 0.0);
}

// Local Shannon entropy of the window-sized neighborhood around each pixel,
// borders replicate-padded. Maintains a sliding histogram per row and the
// running sum S = sum(c*log2 c), so H = log2(n) - S/n per pixel.
inline EntropyMap local_entropy_map(const Frame& frame, int window = 9) {
  if (window < 1 || window % 2 == 0) throw std::invalid_argument("window must be odd");
  if (frame.width < window || frame.height < window)
    throw std::invalid_argument("frame smaller than entropy window");

  const int r = window / 2;
  const int n = window * window;
  std::vector<double> xlog(n + 1, 0.0);
  for (int c = 2; c <= n; ++c) xlog[c] = c * std::log2(static_cast<double>(c));
  const double log_n = std::log2(static_cast<double>(n));

  EntropyMap map;
  map.width = frame.width;
  map.height = frame.height;
  map.values.resize(frame.size());

  std::array<int, kGreyLevels> hist{};
  auto cx = [&frame](int x) { return std::clamp(x, 0, frame.width - 1); };
  auto cy = [&frame](int y) { return std::clamp(y, 0, frame.height - 1); };

  for (int y = 0; y < frame.height; ++y) {
    hist.fill(0);
    double s = 0.0;
    for (int wy = -r; wy <= r; ++wy) {
      const std::uint8_t* row = &frame.pixels[static_cast<std::size_t>(cy(y + wy)) * frame.width];
      for (int wx = -r; wx <= r; ++wx) {
        const int c = ++hist[row[cx(wx)]];
        s += xlog[c] - xlog[c - 1];
      }
    }
    auto emit = [&](int x) {
      // Running-sum drift is ~1e-13; the smallest true nonzero entropy of an
      // n-sample window is ~0.1 bits, so snap anything below 1e-9 to zero.
      const double h = log_n - s / n;
      map.at(y, x) = (h < 1e-9) ? 0.0 : h;
    };
    emit(0);
    for (int x = 1; x < frame.width; ++x) {
      for (int wy = -r; wy <= r; ++wy) {
        const std::uint8_t* row =
            &frame.pixels[static_cast<std::size_t>(cy(y + wy)) * frame.width];
        int c = hist[row[cx(x - 1 - r)]]--;
        s -= xlog[c] - xlog[c - 1];
        c = ++hist[row[cx(x + r)]];
        s += xlog[c] - xlog[c - 1];
      }
      emit(x);
    }
  }
  return map;
}

// Otsu's threshold over the entropy values, computed on a 256-bucket
// discretization of [min, max]. Ties resolve to the lowest separation.
// Caller must ensure the map is not constant.
inline double otsu_threshold(const EntropyMap& map) {
  double vmin = map.values.front(), vmax = vmin;
  for (double v : map.values) {
    vmin = std::min(vmin, v);
    vmax = std::max(vmax, v);
  }
  if (vmax <= vmin) throw std::invalid_argument("otsu threshold of a constant map");

  constexpr int kBuckets = 256;
  std::array<long long, kBuckets> hist{};
  const double scale = kBuckets / (vmax - vmin);
  for (double v : map.values) {
    int b = static_cast<int>((v - vmin) * scale);
    hist[std::clamp(b, 0, kBuckets - 1)] += 1;
  }

  const long long total = static_cast<long long>(map.values.size());
  double sum_all = 0.0;
  for (int b = 0; b < kBuckets; ++b) sum_all += static_cast<double>(b) * hist[b];

  long long w0 = 0;
  double sum0 = 0.0, best_var = -1.0;
  int best_t = 0;
  for (int t = 0; t < kBuckets - 1; ++t) {
    w0 += hist[t];
    if (w0 == 0) continue;
    const long long w1 = total - w0;
    if (w1 == 0) break;
    sum0 += static_cast<double>(t) * hist[t];
    const double mu0 = sum0 / w0;
    const double mu1 = (sum_all - sum0) / w1;
    const double var = static_cast<double>(w0) * static_cast<double>(w1) * (mu0 - mu1) * (mu0 - mu1);
    if (var > best_var) {
      best_var = var;
      best_t = t;
    }
  }
  return vmin + (best_t + 1) / scale;
}

// Foreground where entropy >= threshold. A constant map yields an all-false
// mask; otherwise the threshold comes from Otsu unless given explicitly.
inline BinaryMask binarize(const EntropyMap& map, std::optional<double> threshold = {}) {
  if (map.values.empty()) throw std::invalid_argument("empty entropy map");
  BinaryMask mask(map.width, map.height);
  double thr;
  if (threshold) {
    thr = *threshold;
  } else {
    double vmin = map.values.front(), vmax = vmin;
    for (double v : map.values) {
      vmin = std::min(vmin, v);
      vmax = std::max(vmax, v);
    }
    if (vmax <= vmin) return mask;
    thr = otsu_threshold(map);
  }
  for (std::size_t i = 0; i < map.values.size(); ++i) mask.bits[i] = map.values[i] >= thr;
  return mask;
}

// Keeps only the largest 8-connected foreground component. Equal areas break
// toward the component whose first pixel comes earliest in row-major order.
inline BinaryMask largest_blob(const BinaryMask& mask) {
  const int w = mask.width, h = mask.height;
  BinaryMask best(w, h);
  std::vector<std::uint8_t> visited(mask.bits.size(), 0);
  std::vector<int> stack, component;
  long long best_area = 0;

  for (int start = 0; start < static_cast<int>(mask.bits.size()); ++start) {
    if (!mask.bits[start] || visited[start]) continue;
    component.clear();
    stack.assign(1, start);
    visited[start] = 1;
    while (!stack.empty()) {
      const int idx = stack.back();
      stack.pop_back();
      component.push_back(idx);
      const int y = idx / w, x = idx % w;
      for (int ny = std::max(0, y - 1); ny <= std::min(h - 1, y + 1); ++ny)
        for (int nx = std::max(0, x - 1); nx <= std::min(w - 1, x + 1); ++nx) {
          const int nidx = ny * w + nx;
          if (mask.bits[nidx] && !visited[nidx]) {
            visited[nidx] = 1;
            stack.push_back(nidx);
          }
        }
    }
    // strict > keeps the earliest-seeded component on ties
    if (static_cast<long long>(component.size()) > best_area) {
      best_area = static_cast<long long>(component.size());
      best.bits.assign(best.bits.size(), 0);
      for (int idx : component) best.bits[idx] = 1;
    }
  }
  return best;
}

// Entropy filter -> threshold -> largest component.
inline BinaryMask extract_silhouette(const Frame& frame,
                                     std::optional<double> threshold = {}) {
  return largest_blob(binarize(local_entropy_map(frame), threshold));
}

}  // namespace har
