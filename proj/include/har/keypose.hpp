#pragma once

#include <har/frame.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace har {

// Normalized silhouette raster size and the cell grid laid over it.
// rows must divide norm_height and cols must divide norm_width.
struct GridSpec {
  int rows = 8;
  int cols = 6;
  int norm_height = 64;
  int norm_width = 48;

  int cell_count() const { return rows * cols; }
  int cell_height() const { return norm_height / rows; }
  int cell_width() const { return norm_width / cols; }
};

inline void validate(const GridSpec& spec) {
  if (spec.rows <= 0 || spec.cols <= 0 || spec.norm_height <= 0 || spec.norm_width <= 0)
    throw std::invalid_argument("grid spec fields must be positive");
  if (spec.norm_height % spec.rows != 0 || spec.norm_width % spec.cols != 0)
    throw std::invalid_argument("grid must divide the normalized raster evenly");
}

// Key poses chosen from a clip: temporal frame indices plus their
// normalized silhouettes.
struct KeyPoseSet {
  std::vector<int> indices;
  std::vector<BinaryMask> masks;
  int k = 0;
};

// Per-clip feature: white-pixel counts of k normalized key poses, cell by
// cell in temporal order.
struct FeatureVector {
  std::vector<int> values;
  std::string label;
  std::string clip_id;
};

struct FeatureMatrix {
  std::vector<FeatureVector> rows;
};

// Silhouette energy; for a binary raster the squared-magnitude sum is just
// the white-pixel count.
inline long long frame_energy(const BinaryMask& mask) { return mask.count(); }

// Picks the k highest-energy frames (ties favor the earlier frame) and
// returns their indices in temporal order. Clips shorter than k are padded
// by repeating the maximum-energy index after the sorted selection.
inline std::vector<int> select_keyframes(const std::vector<BinaryMask>& masks, int k) {
  if (masks.empty()) throw std::invalid_argument("cannot select key frames from an empty clip");
  if (k < 1) throw std::invalid_argument("k must be at least 1");

  std::vector<int> order(masks.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<long long> energy(masks.size());
  for (std::size_t i = 0; i < masks.size(); ++i) energy[i] = frame_energy(masks[i]);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return energy[a] > energy[b]; });

  const int taken = std::min<int>(k, static_cast<int>(masks.size()));
  std::vector<int> selected(order.begin(), order.begin() + taken);
  std::sort(selected.begin(), selected.end());
  while (static_cast<int>(selected.size()) < k) selected.push_back(order.front());
  return selected;
}

// Crops to the tight bounding box of the foreground and rescales to the
// grid's normalized size with nearest-neighbor sampling, preserving binarity.
inline BinaryMask normalize_pose(const BinaryMask& mask, const GridSpec& spec) {
  validate(spec);
  int x0 = mask.width, y0 = mask.height, x1 = -1, y1 = -1;
  for (int y = 0; y < mask.height; ++y)
    for (int x = 0; x < mask.width; ++x)
      if (mask.at(y, x)) {
        x0 = std::min(x0, x);
        y0 = std::min(y0, y);
        x1 = std::max(x1, x);
        y1 = std::max(y1, y);
      }
  if (x1 < 0) throw std::invalid_argument("cannot normalize an empty mask");

  const int bw = x1 - x0 + 1, bh = y1 - y0 + 1;
  BinaryMask out(spec.norm_width, spec.norm_height);
  for (int y = 0; y < spec.norm_height; ++y) {
    const int sy = y0 + std::min(bh - 1, y * bh / spec.norm_height);
    for (int x = 0; x < spec.norm_width; ++x) {
      const int sx = x0 + std::min(bw - 1, x * bw / spec.norm_width);
      out.at(y, x) = mask.at(sy, sx);
    }
  }
  return out;
}

// White-pixel count per grid cell, cells in row-major order.
inline std::vector<int> cell_counts(const BinaryMask& mask, const GridSpec& spec) {
  validate(spec);
  if (mask.width != spec.norm_width || mask.height != spec.norm_height)
    throw std::invalid_argument("mask dimensions do not match the normalized raster");
  std::vector<int> counts(spec.cell_count(), 0);
  const int ch = spec.cell_height(), cw = spec.cell_width();
  for (int y = 0; y < mask.height; ++y) {
    const int cell_row = y / ch;
    for (int x = 0; x < mask.width; ++x)
      counts[cell_row * spec.cols + x / cw] += (mask.at(y, x) != 0);
  }
  return counts;
}

// Key-pose selection over the frames with any foreground, normalization, and
// per-cell counting, concatenated in temporal order. Length is k * cell_count.
inline FeatureVector build_feature(const std::vector<BinaryMask>& clip_masks, int k,
                                   const GridSpec& spec) {
  if (clip_masks.empty()) throw std::invalid_argument("empty clip");
  std::vector<BinaryMask> candidates;
  std::vector<int> candidate_index;
  for (std::size_t i = 0; i < clip_masks.size(); ++i)
    if (frame_energy(clip_masks[i]) > 0) {
      candidates.push_back(clip_masks[i]);
      candidate_index.push_back(static_cast<int>(i));
    }
  if (candidates.empty())
    throw std::invalid_argument("clip has zero total foreground energy");

  FeatureVector feature;
  feature.values.reserve(static_cast<std::size_t>(k) * spec.cell_count());
  for (int local : select_keyframes(candidates, k)) {
    const BinaryMask pose = normalize_pose(clip_masks[candidate_index[local]], spec);
    const std::vector<int> counts = cell_counts(pose, spec);
    feature.values.insert(feature.values.end(), counts.begin(), counts.end());
  }
  return feature;
}

// Per-clip silhouette sequences, ready for feature extraction.
struct MaskClip {
  std::string id;
  std::string label;
  std::vector<BinaryMask> masks;
};

inline FeatureMatrix build_matrix(const std::vector<MaskClip>& dataset, int k,
                                  const GridSpec& spec) {
  if (dataset.empty()) throw std::invalid_argument("empty dataset");
  FeatureMatrix matrix;
  matrix.rows.reserve(dataset.size());
  for (const auto& clip : dataset) {
    try {
      FeatureVector feature = build_feature(clip.masks, k, spec);
      feature.label = clip.label;
      feature.clip_id = clip.id;
      matrix.rows.push_back(std::move(feature));
    } catch (const std::exception& e) {
      throw std::runtime_error("clip " + clip.id + ": " + e.what());
    }
  }
  return matrix;
}

// CSV layout: header "clip_id,label,f0,...", one row per clip, integer values.
inline void write_features_csv(const FeatureMatrix& matrix, const std::filesystem::path& path) {
  if (matrix.rows.empty()) throw std::invalid_argument("empty feature matrix");
  std::ofstream out(path);
  if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
  out << "clip_id,label";
  for (std::size_t i = 0; i < matrix.rows.front().values.size(); ++i) out << ",f" << i;
  out << "\n";
  for (const auto& row : matrix.rows) {
    out << row.clip_id << "," << row.label;
    for (int v : row.values) out << "," << v;
    out << "\n";
  }
  if (!out) throw std::runtime_error(path.string() + ": write failed");
}

inline FeatureMatrix read_features_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path.string() + ": cannot open file");
  std::string line;
  if (!std::getline(in, line) || line.rfind("clip_id,label", 0) != 0)
    throw std::runtime_error(path.string() + ": missing feature CSV header");
  FeatureMatrix matrix;
  std::size_t width = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    FeatureVector row;
    std::string field;
    if (!std::getline(ss, row.clip_id, ',') || !std::getline(ss, row.label, ','))
      throw std::runtime_error(path.string() + ": malformed feature row");
    while (std::getline(ss, field, ',')) row.values.push_back(std::stoi(field));
    if (row.values.empty()) throw std::runtime_error(path.string() + ": feature row has no values");
    if (width == 0) width = row.values.size();
    if (row.values.size() != width)
      throw std::runtime_error(path.string() + ": inconsistent feature row length");
    matrix.rows.push_back(std::move(row));
  }
  if (matrix.rows.empty()) throw std::runtime_error(path.string() + ": no feature rows");
  return matrix;
}

}  // namespace har
