#pragma once

#include <har/frame.hpp>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace har {

// Parameters of one generated action clip. The actor is an articulated blob
// filled with seeded high-variance texture on a flat mid-gray background, so
// entropy-based segmentation has signal; ground-truth masks are the actor
// support per frame. Generation is a pure function of these fields.
struct SynthSpec {
  std::string action_class = "wave";  // wave | walk | jump | bend
  std::uint64_t seed = 0;
  int frames = 40;
  int width = 160;
  int height = 120;
  int texture_contrast = 96;  // amplitude of the actor's per-pixel noise
};

struct SynthClip {
  Clip clip;
  std::vector<BinaryMask> gt_masks;
};

namespace synth_detail {

struct Ellipse {
  double cx, cy, rx, ry, rot;

  bool contains(double px, double py) const {
    const double c = std::cos(-rot), s = std::sin(-rot);
    const double dx = px - cx, dy = py - cy;
    const double lx = dx * c - dy * s, ly = dx * s + dy * c;
    return (lx * lx) / (rx * rx) + (ly * ly) / (ry * ry) <= 1.0;
  }
};

// Oriented box grown from an anchor point; angle measured from straight
// down (+y), positive toward +x.
struct Limb {
  double ax, ay, angle, length, thickness;

  bool contains(double px, double py) const {
    const double dx_axis = std::sin(angle), dy_axis = std::cos(angle);
    const double rx = px - ax, ry = py - ay;
    const double along = rx * dx_axis + ry * dy_axis;
    const double across = rx * dy_axis - ry * dx_axis;
    return along >= 0.0 && along <= length && std::abs(across) <= thickness / 2.0;
  }
};

struct Body {
  std::vector<Ellipse> ellipses;
  std::vector<Limb> limbs;

  bool contains(double px, double py) const {
    for (const auto& e : ellipses)
      if (e.contains(px, py)) return true;
    for (const auto& l : limbs)
      if (l.contains(px, py)) return true;
    return false;
  }
};

inline void rotate_about(double cx, double cy, double beta, double& x, double& y) {
  const double c = std::cos(beta), s = std::sin(beta);
  const double dx = x - cx, dy = y - cy;
  x = cx + dx * c - dy * s;
  y = cy + dx * s + dy * c;
}

// Poses the skeleton for one frame. hip is the articulation origin; bend
// tilts the whole upper body about it. Parts are deliberately chunky and the
// idle arms hug the torso: a 9x9 entropy filter dilates every exposed edge by
// a pixel or two, so a stick figure would drown in its own halo.
inline Body pose_body(double hip_x, double hip_y, double s, double arm_l, double arm_r,
                      double leg_l, double leg_r, double bend) {
  Body body;
  double torso_x = hip_x, torso_y = hip_y - 20.0 * s;
  double head_x = hip_x, head_y = hip_y - 47.0 * s;
  double sh_lx = hip_x - 6.0 * s, sh_ly = hip_y - 36.0 * s;
  double sh_rx = hip_x + 6.0 * s, sh_ry = hip_y - 36.0 * s;
  if (bend != 0.0) {
    rotate_about(hip_x, hip_y, bend, torso_x, torso_y);
    rotate_about(hip_x, hip_y, bend, head_x, head_y);
    rotate_about(hip_x, hip_y, bend, sh_lx, sh_ly);
    rotate_about(hip_x, hip_y, bend, sh_rx, sh_ry);
  }
  body.ellipses.push_back({torso_x, torso_y, 12.0 * s, 23.0 * s, bend});
  body.ellipses.push_back({head_x, head_y, 8.5 * s, 8.5 * s, 0.0});
  body.limbs.push_back({sh_lx, sh_ly, -(arm_l)+bend, 27.0 * s, 12.0 * s});
  body.limbs.push_back({sh_rx, sh_ry, arm_r + bend, 27.0 * s, 12.0 * s});
  body.limbs.push_back({hip_x - 3.5 * s, hip_y - 2.0 * s, leg_l, 30.0 * s, 14.0 * s});
  body.limbs.push_back({hip_x + 3.5 * s, hip_y - 2.0 * s, leg_r, 30.0 * s, 14.0 * s});
  return body;
}

}  // namespace synth_detail

inline SynthClip gen_clip(const SynthSpec& spec) {
  if (spec.frames < 10) throw std::invalid_argument("synth clips need at least 10 frames");
  if (spec.width < 32 || spec.height < 32)
    throw std::invalid_argument("synth frames must be at least 32x32");
  if (spec.texture_contrast < 1 || spec.texture_contrast > 127)
    throw std::invalid_argument("texture contrast must lie in [1, 127]");
  const bool known = spec.action_class == "wave" || spec.action_class == "walk" ||
                     spec.action_class == "jump" || spec.action_class == "bend";
  if (!known) throw std::invalid_argument("unknown action class: " + spec.action_class);

  using std::numbers::pi;
  Rng rng(spec.seed * 1000003u + 17u);

  // Scale so the tallest pose (head top at jump apex) stays inside the frame.
  const double s = 0.93 * std::min((spec.height - 8) / 98.0, (spec.width - 8) / 74.0);
  const double hip_y0 = spec.height - 2.0 - 31.0 * s;

  // per-clip style jitter
  const double phase0 = rng.uniform(0.0, 2.0 * pi);
  const double amp_scale = rng.uniform(0.9, 1.1);
  const double rate_scale = rng.uniform(0.9, 1.1);
  const double pos_jitter = rng.uniform(-3.0 * s, 3.0 * s);

  SynthClip out;
  out.clip.label = spec.action_class;
  out.clip.id = spec.action_class;
  out.clip.frames.reserve(spec.frames);
  out.gt_masks.reserve(spec.frames);

  const double walk_margin = 26.0 * s;
  const double walk_span = (spec.width - 2.0 * walk_margin) * rng.uniform(0.9, 1.0);

  for (int t = 0; t < spec.frames; ++t) {
    const double u = static_cast<double>(t) / spec.frames;
    double hip_x = spec.width / 2.0 + pos_jitter;
    double hip_y = hip_y0;
    double arm_l = 0.10, arm_r = 0.10, leg_l = -0.06, leg_r = 0.06, bend = 0.0;

    if (spec.action_class == "wave") {
      const double phase = phase0 + 2.0 * pi * 2.0 * rate_scale * u;
      arm_r = 1.9 + 0.55 * amp_scale * std::sin(phase);
    } else if (spec.action_class == "walk") {
      const double phase = phase0 + 2.0 * pi * 2.5 * rate_scale * u;
      hip_x = walk_margin + walk_span * u;
      const double swing = 0.40 * amp_scale * std::sin(phase);
      leg_l = -0.06 + swing;
      leg_r = 0.06 - swing;
      arm_l = 0.10 + 0.28 * std::sin(phase);
      arm_r = 0.10 - 0.28 * std::sin(phase);
    } else if (spec.action_class == "jump") {
      const double phase = phase0 + 2.0 * pi * 2.0 * rate_scale * u;
      hip_y = hip_y0 - 12.0 * s * amp_scale * std::abs(std::sin(phase));
      arm_l = arm_r = 0.5;
    } else {  // bend
      const double phase = phase0 + 2.0 * pi * 1.5 * rate_scale * u;
      bend = 1.0 * amp_scale * (0.5 - 0.5 * std::cos(phase));
    }

    const synth_detail::Body body =
        synth_detail::pose_body(hip_x, hip_y, s, arm_l, arm_r, leg_l, leg_r, bend);

    // Mild background noise keeps Otsu's split honest (no free perfectly-flat
    // class) while staying far below the actor's texture entropy.
    const int bg_amp = std::min(4, spec.texture_contrast / 4);
    Frame frame(spec.width, spec.height);
    BinaryMask mask(spec.width, spec.height);
    for (int y = 0; y < spec.height; ++y)
      for (int x = 0; x < spec.width; ++x) {
        const bool actor = body.contains(x + 0.5, y + 0.5);
        mask.at(y, x) = actor;
        const int amp = actor ? spec.texture_contrast : bg_amp;
        frame.at(y, x) = clamp_u8(128 + rng.uniform_int(-amp, amp));
      }
    if (mask.count() == 0) throw std::logic_error("synth produced an empty actor mask");
    out.clip.frames.push_back(std::move(frame));
    out.gt_masks.push_back(std::move(mask));
  }
  return out;
}

// per_class clips for every class, seeded base_seed, base_seed+1, ... in
// generation order; clip ids follow the "<class>__<index>" convention.
inline std::vector<SynthClip> gen_dataset(const std::vector<std::string>& classes, int per_class,
                                          std::uint64_t base_seed, const SynthSpec& proto = {}) {
  if (classes.empty()) throw std::invalid_argument("no classes requested");
  if (per_class < 1) throw std::invalid_argument("per_class must be at least 1");
  std::vector<SynthClip> dataset;
  dataset.reserve(classes.size() * static_cast<std::size_t>(per_class));
  std::uint64_t index = 0;
  for (const auto& cls : classes) {
    for (int i = 0; i < per_class; ++i, ++index) {
      SynthSpec spec = proto;
      spec.action_class = cls;
      spec.seed = base_seed + index;
      SynthClip clip = gen_clip(spec);
      char suffix[8];
      std::snprintf(suffix, sizeof suffix, "%02d", i);
      clip.clip.id = cls + "__" + suffix;
      dataset.push_back(std::move(clip));
    }
  }
  return dataset;
}

}  // namespace har
