#pragma once

#include <har/common.hpp>

#include <png.h>

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <istream>
#include <stdexcept>
#include <string>
#include <vector>

namespace har {

// Row-major 8-bit grayscale raster.
struct Frame {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;

  Frame() = default;
  Frame(int w, int h, std::uint8_t fill = 0)
      : width(w), height(h),
        pixels(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), fill) {
    if (w <= 0 || h <= 0) throw std::invalid_argument("frame dimensions must be positive");
  }

  std::uint8_t& at(int y, int x) { return pixels[static_cast<std::size_t>(y) * width + x]; }
  std::uint8_t at(int y, int x) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
  std::size_t size() const { return pixels.size(); }

  bool operator==(const Frame&) const = default;
};

// Boolean raster, same layout as Frame; nonzero byte = foreground.
struct BinaryMask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> bits;

  BinaryMask() = default;
  BinaryMask(int w, int h, bool fill = false)
      : width(w), height(h),
        bits(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), fill ? 1 : 0) {
    if (w <= 0 || h <= 0) throw std::invalid_argument("mask dimensions must be positive");
  }

  std::uint8_t& at(int y, int x) { return bits[static_cast<std::size_t>(y) * width + x]; }
  std::uint8_t at(int y, int x) const { return bits[static_cast<std::size_t>(y) * width + x]; }

  long long count() const {
    long long n = 0;
    for (auto b : bits) n += (b != 0);
    return n;
  }

  bool operator==(const BinaryMask&) const = default;
};

// Ordered frame sequence. All frames share one size; frame order is temporal.
// An empty label means "unlabeled".
struct Clip {
  std::vector<Frame> frames;
  std::string label;
  std::string id;
};

// Rec.601 luma, rounded half up.
inline std::uint8_t luma_rec601(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  return clamp_u8(round_half_up(0.299 * r + 0.587 * g + 0.114 * b));
}

namespace detail {

// Reads the next PNM header integer, skipping whitespace and '#' comments.
inline int pnm_int(std::istream& in, const char* what) {
  for (;;) {
    int c = in.peek();
    if (c == '#') {
      std::string line;
      std::getline(in, line);
    } else if (std::isspace(c)) {
      in.get();
    } else {
      break;
    }
  }
  int v = -1;
  if (!(in >> v)) throw std::runtime_error(std::string("malformed PGM header: missing ") + what);
  return v;
}

inline Frame load_pgm(std::istream& in, const std::string& name) {
  char m0 = 0, m1 = 0;
  in.get(m0);
  in.get(m1);
  if (m0 != 'P' || m1 != '5') throw std::runtime_error(name + ": not a binary PGM");
  const int w = pnm_int(in, "width");
  const int h = pnm_int(in, "height");
  const int maxval = pnm_int(in, "maxval");
  if (w <= 0 || h <= 0) throw std::runtime_error(name + ": zero-dimension image");
  if (maxval != 255) throw std::runtime_error(name + ": only maxval 255 supported");
  in.get();  // single whitespace byte before raster data
  Frame f(w, h);
  in.read(reinterpret_cast<char*>(f.pixels.data()), static_cast<std::streamsize>(f.size()));
  if (in.gcount() != static_cast<std::streamsize>(f.size()))
    throw std::runtime_error(name + ": truncated PGM data");
  return f;
}

inline Frame load_png(const std::filesystem::path& path) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.string().c_str()))
    throw std::runtime_error(path.string() + ": " + image.message);
  const bool color = (image.format & PNG_FORMAT_FLAG_COLOR) != 0;
  if (image.width == 0 || image.height == 0) {
    png_image_free(&image);
    throw std::runtime_error(path.string() + ": zero-dimension image");
  }
  image.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  std::vector<std::uint8_t> buf(PNG_IMAGE_SIZE(image));
  const png_color black{0, 0, 0};  // alpha, if any, composited onto black
  if (!png_image_finish_read(&image, &black, buf.data(), 0, nullptr))
    throw std::runtime_error(path.string() + ": " + image.message);
  Frame f(static_cast<int>(image.width), static_cast<int>(image.height));
  if (color) {
    for (std::size_t i = 0; i < f.size(); ++i)
      f.pixels[i] = luma_rec601(buf[3 * i], buf[3 * i + 1], buf[3 * i + 2]);
  } else {
    std::copy(buf.begin(), buf.end(), f.pixels.begin());
  }
  return f;
}

}  // namespace detail

// Loads a grayscale frame from a binary PGM (P5) or PNG file. RGB inputs are
// converted through Rec.601 luma.
inline Frame load_frame(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(path.string() + ": cannot open file");
  char magic[2] = {0, 0};
  in.read(magic, 2);
  in.seekg(0);
  if (magic[0] == 'P' && magic[1] == '5') return detail::load_pgm(in, path.string());
  if (magic[0] == static_cast<char>(0x89) && magic[1] == 'P') {
    in.close();
    return detail::load_png(path);
  }
  throw std::runtime_error(path.string() + ": unsupported image format (need P5 PGM or PNG)");
}

// Writes a canonical binary PGM (P5, maxval 255). load_frame(save_frame(f))
// reproduces f bit-exactly.
inline void save_frame(const Frame& frame, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
  out << "P5\n" << frame.width << " " << frame.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(frame.pixels.data()),
            static_cast<std::streamsize>(frame.size()));
  if (!out) throw std::runtime_error(path.string() + ": write failed");
}

inline Frame mask_to_frame(const BinaryMask& mask) {
  Frame f(mask.width, mask.height);
  for (std::size_t i = 0; i < mask.bits.size(); ++i) f.pixels[i] = mask.bits[i] ? 255 : 0;
  return f;
}

inline BinaryMask frame_to_mask(const Frame& frame) {
  BinaryMask m(frame.width, frame.height);
  for (std::size_t i = 0; i < frame.pixels.size(); ++i) m.bits[i] = frame.pixels[i] >= 128;
  return m;
}

inline void save_mask(const BinaryMask& mask, const std::filesystem::path& path) {
  save_frame(mask_to_frame(mask), path);
}

inline BinaryMask load_mask(const std::filesystem::path& path) {
  return frame_to_mask(load_frame(path));
}

// Splits "<class>__<id>" directory names; returns an empty label when the
// separator is absent.
inline std::string label_from_dirname(const std::string& name) {
  const auto pos = name.find("__");
  return pos == std::string::npos ? std::string{} : name.substr(0, pos);
}

// Loads a clip from a directory of frame files (*.pgm, *.png), ordered by
// filename. The directory name doubles as the clip id and, when shaped like
// "<class>__<id>", carries the label.
inline Clip load_clip(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw std::runtime_error(dir.string() + ": not a directory");
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const auto ext = entry.path().extension().string();
    if (ext == ".pgm" || ext == ".png") files.push_back(entry.path());
  }
  if (files.empty()) throw std::runtime_error(dir.string() + ": no frame files");
  std::sort(files.begin(), files.end(),
            [](const fs::path& a, const fs::path& b) { return a.filename() < b.filename(); });

  Clip clip;
  clip.id = dir.filename().string();
  clip.label = label_from_dirname(clip.id);
  clip.frames.reserve(files.size());
  for (const auto& file : files) {
    Frame f = load_frame(file);
    if (!clip.frames.empty() &&
        (f.width != clip.frames.front().width || f.height != clip.frames.front().height))
      throw std::runtime_error(dir.string() + ": inconsistent frame dimensions at " +
                               file.filename().string());
    clip.frames.push_back(std::move(f));
  }
  return clip;
}

// Writes clip frames as f0000.pgm, f0001.pgm, ... under dir (created if needed).
inline void save_clip(const Clip& clip, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  char name[16];
  for (std::size_t i = 0; i < clip.frames.size(); ++i) {
    std::snprintf(name, sizeof name, "f%04zu.pgm", i);
    save_frame(clip.frames[i], dir / name);
  }
}

}  // namespace har
