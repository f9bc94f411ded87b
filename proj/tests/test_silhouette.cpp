#include <har/silhouette.hpp>

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <map>
#include <vector>

namespace {

har::Frame random_frame(har::Rng& rng, int w, int h, int lo = 0, int hi = 255) {
  har::Frame f(w, h);
  for (auto& p : f.pixels) p = static_cast<std::uint8_t>(rng.uniform_int(lo, hi));
  return f;
}

// Direct per-window entropy, no sliding updates: the independent oracle.
double window_entropy(const har::Frame& f, int cy, int cx, int window) {
  const int r = window / 2;
  std::map<int, int> hist;
  for (int dy = -r; dy <= r; ++dy)
    for (int dx = -r; dx <= r; ++dx) {
      const int y = std::clamp(cy + dy, 0, f.height - 1);
      const int x = std::clamp(cx + dx, 0, f.width - 1);
      ++hist[f.at(y, x)];
    }
  const double n = static_cast<double>(window) * window;
  double e = 0.0;
  for (const auto& [value, count] : hist) {
    const double p = count / n;
    e -= p * std::log2(p);
  }
  return e;
}

}  // namespace

TEST_CASE("glcm pair counting") {
  SECTION("single horizontal pair, symmetrized") {
    har::Frame f(2, 1);
    f.pixels = {0, 255};
    const har::GlcmMatrix m = har::glcm(f, 0, 1, 2);
    CHECK(m.at(0, 1) == 1.0);
    CHECK(m.at(1, 0) == 1.0);
    CHECK(m.at(0, 0) == 0.0);
    CHECK(m.at(1, 1) == 0.0);
  }
  SECTION("checkerboard splits mass over the two off-diagonal cells") {
    har::Frame f(4, 4);
    for (int y = 0; y < 4; ++y)
      for (int x = 0; x < 4; ++x) f.at(y, x) = ((x + y) % 2) ? 255 : 0;
    const har::GlcmMatrix m = har::glcm(f, 0, 1, 2);
    CHECK(m.at(0, 1) == m.at(1, 0));
    CHECK(m.at(0, 0) == 0.0);
    CHECK(m.at(1, 1) == 0.0);
    CHECK(m.at(0, 1) > 0.0);
  }
  SECTION("constant frame concentrates on the diagonal") {
    const har::Frame f(5, 4, 200);
    const har::GlcmMatrix m = har::glcm(f, 1, 0, 2);
    const int q = (200 * 2) >> 8;
    double total = 0.0;
    for (double c : m.counts) total += c;
    CHECK(m.at(q, q) == total);
  }
  SECTION("input validation") {
    const har::Frame f(3, 3, 0);
    CHECK_THROWS_AS(har::glcm(f, 0, 0), std::invalid_argument);
    CHECK_THROWS_AS(har::glcm(f, 0, 3), std::invalid_argument);
    CHECK_THROWS_AS(har::glcm(f, 0, 1, 1), std::invalid_argument);
  }
}

TEST_CASE("texture entropy oracles") {
  SECTION("all mass in one cell is zero bits") {
    const har::GlcmMatrix m = har::glcm(har::Frame(4, 4, 80), 0, 1);
    CHECK(har::texture_entropy(m) == 0.0);
  }
  SECTION("checkerboard is exactly one bit") {
    har::Frame f(6, 6);
    for (int y = 0; y < 6; ++y)
      for (int x = 0; x < 6; ++x) f.at(y, x) = ((x + y) % 2) ? 255 : 0;
    CHECK_THAT(har::texture_entropy(har::glcm(f, 0, 1, 2)),
               Catch::Matchers::WithinAbs(1.0, 1e-9));
  }
  SECTION("four equal cells are exactly two bits") {
    har::GlcmMatrix m;
    m.levels = 2;
    m.counts = {3.0, 3.0, 3.0, 3.0};
    CHECK_THAT(har::texture_entropy(m), Catch::Matchers::WithinAbs(2.0, 1e-9));
  }
  SECTION("empty matrix is rejected") {
    har::GlcmMatrix m;
    m.levels = 2;
    m.counts = {0.0, 0.0, 0.0, 0.0};
    CHECK_THROWS_AS(har::texture_entropy(m), std::invalid_argument);
  }
}

TEST_CASE("local entropy map") {
  SECTION("constant frame maps to exact zeros") {
    const har::EntropyMap map = har::local_entropy_map(har::Frame(12, 10, 128));
    for (double v : map.values) CHECK(v == 0.0);
  }
  SECTION("iid noise interior exceeds 4 bits") {
    har::Rng rng(11);
    const har::Frame f = random_frame(rng, 20, 20);
    const har::EntropyMap map = har::local_entropy_map(f);
    for (int y = 4; y < 16; ++y)
      for (int x = 4; x < 16; ++x) CHECK(map.at(y, x) > 4.0);
  }
  SECTION("matches the direct per-window oracle with replicate padding") {
    har::Rng rng(23);
    for (int trial = 0; trial < 12; ++trial) {
      // low value ranges force heavy bin collisions, stressing the updates
      const int hi = trial % 3 == 0 ? 3 : 255;
      const har::Frame f = random_frame(rng, rng.uniform_int(9, 24), rng.uniform_int(9, 24), 0, hi);
      const har::EntropyMap map = har::local_entropy_map(f);
      for (int y = 0; y < f.height; ++y)
        for (int x = 0; x < f.width; ++x) {
          INFO("trial " << trial << " at " << y << "," << x);
          REQUIRE_THAT(map.at(y, x),
                       Catch::Matchers::WithinAbs(window_entropy(f, y, x, 9), 1e-9));
        }
    }
  }
  SECTION("half black half white peaks along the boundary") {
    har::Frame f(24, 12, 0);
    for (int y = 0; y < 12; ++y)
      for (int x = 12; x < 24; ++x) f.at(y, x) = 255;
    const har::EntropyMap map = har::local_entropy_map(f);
    for (int y = 0; y < 12; ++y) {
      CHECK(map.at(y, 2) == 0.0);   // far left: pure black window
      CHECK(map.at(y, 21) == 0.0);  // far right: pure white window
      CHECK(map.at(y, 12) > 0.9);   // window straddles the edge
    }
  }
  SECTION("translation equivariance in the interior") {
    har::Rng rng(31);
    const har::Frame f1 = random_frame(rng, 30, 30);
    har::Frame f2(33, 30);
    for (int y = 0; y < 30; ++y) {
      for (int x = 0; x < 3; ++x) f2.at(y, x) = static_cast<std::uint8_t>(rng.uniform_int(0, 255));
      for (int x = 0; x < 30; ++x) f2.at(y, x + 3) = f1.at(y, x);
    }
    const har::EntropyMap m1 = har::local_entropy_map(f1);
    const har::EntropyMap m2 = har::local_entropy_map(f2);
    for (int y = 4; y < 26; ++y)
      for (int x = 4; x < 26; ++x)
        CHECK_THAT(m2.at(y, x + 3), Catch::Matchers::WithinAbs(m1.at(y, x), 1e-9));
  }
  SECTION("frames smaller than the window are rejected") {
    CHECK_THROWS_AS(har::local_entropy_map(har::Frame(8, 20, 0)), std::invalid_argument);
    CHECK_THROWS_AS(har::local_entropy_map(har::Frame(20, 20, 0), 4), std::invalid_argument);
  }
}

TEST_CASE("otsu binarization") {
  SECTION("constant map yields an all-false mask") {
    har::EntropyMap map;
    map.width = 4;
    map.height = 3;
    map.values.assign(12, 2.5);
    CHECK(har::binarize(map).count() == 0);
  }
  SECTION("perfect bimodal map splits exactly") {
    har::EntropyMap map;
    map.width = 4;
    map.height = 2;
    map.values = {0.0, 5.0, 0.0, 5.0, 0.0, 0.0, 5.0, 0.0};
    const har::BinaryMask mask = har::binarize(map);
    for (std::size_t i = 0; i < map.values.size(); ++i)
      CHECK((mask.bits[i] != 0) == (map.values[i] == 5.0));
  }
  SECTION("threshold maximizes between-class variance over the candidate grid") {
    har::Rng rng(47);
    for (int trial = 0; trial < 10; ++trial) {
      har::EntropyMap map;
      map.width = 16;
      map.height = 16;
      map.values.resize(256);
      for (auto& v : map.values)
        v = trial % 2 ? rng.uniform(0.0, 6.0)
                      : (rng.uniform_int(0, 1) ? rng.uniform(4.0, 6.0) : rng.uniform(0.0, 1.0));
      const double chosen = har::otsu_threshold(map);

      // brute-force objective over the same 256-bucket discretization
      double vmin = map.values[0], vmax = map.values[0];
      for (double v : map.values) {
        vmin = std::min(vmin, v);
        vmax = std::max(vmax, v);
      }
      const double scale = 256.0 / (vmax - vmin);
      std::vector<long long> hist(256, 0);
      for (double v : map.values) {
        int b = static_cast<int>((v - vmin) * scale);
        ++hist[std::clamp(b, 0, 255)];
      }
      double best_sigma = -1.0;
      int best_t = -1;
      for (int t = 0; t < 255; ++t) {
        long long w0 = 0, w1 = 0;
        double s0 = 0.0, s1 = 0.0;
        for (int b = 0; b <= t; ++b) {
          w0 += hist[b];
          s0 += static_cast<double>(b) * hist[b];
        }
        for (int b = t + 1; b < 256; ++b) {
          w1 += hist[b];
          s1 += static_cast<double>(b) * hist[b];
        }
        if (w0 == 0 || w1 == 0) continue;
        const double mu0 = s0 / w0, mu1 = s1 / w1;
        const double sigma = static_cast<double>(w0) * w1 * (mu0 - mu1) * (mu0 - mu1);
        if (sigma > best_sigma) {
          best_sigma = sigma;
          best_t = t;
        }
      }
      REQUIRE(best_t >= 0);
      CHECK_THAT(chosen, Catch::Matchers::WithinAbs(vmin + (best_t + 1) / scale, 1e-9));
    }
  }
  SECTION("explicit threshold overrides otsu") {
    har::EntropyMap map;
    map.width = 3;
    map.height = 1;
    map.values = {1.0, 2.0, 3.0};
    const har::BinaryMask mask = har::binarize(map, 2.0);
    CHECK(mask.bits == std::vector<std::uint8_t>{0, 1, 1});
  }
}

TEST_CASE("largest blob") {
  SECTION("keeps only the larger of two components") {
    har::BinaryMask mask(10, 6);
    for (int y = 1; y < 3; ++y)
      for (int x = 1; x < 6; ++x) mask.at(y, x) = 1;  // area 10
    mask.at(5, 8) = mask.at(5, 9) = mask.at(4, 9) = 1;  // area 3
    const har::BinaryMask blob = har::largest_blob(mask);
    CHECK(blob.count() == 10);
    CHECK(blob.at(1, 1) == 1);
    CHECK(blob.at(5, 8) == 0);
  }
  SECTION("all-false passes through") {
    CHECK(har::largest_blob(har::BinaryMask(5, 5)).count() == 0);
  }
  SECTION("equal areas break toward the first row-major pixel") {
    har::BinaryMask mask(8, 8);
    mask.at(0, 5) = mask.at(0, 6) = 1;
    mask.at(7, 0) = mask.at(7, 1) = 1;
    const har::BinaryMask blob = har::largest_blob(mask);
    CHECK(blob.at(0, 5) == 1);
    CHECK(blob.at(7, 0) == 0);
  }
  SECTION("diagonal pixels connect under 8-connectivity") {
    har::BinaryMask mask(6, 6);
    mask.at(1, 1) = mask.at(2, 2) = mask.at(3, 3) = 1;
    mask.at(5, 0) = 1;
    const har::BinaryMask blob = har::largest_blob(mask);
    CHECK(blob.count() == 3);
    CHECK(blob.at(3, 3) == 1);
  }
}

TEST_CASE("silhouette extraction") {
  SECTION("constant frame gives an empty mask") {
    CHECK(har::extract_silhouette(har::Frame(20, 20, 128)).count() == 0);
  }
  SECTION("textured square on a flat background, IoU >= 0.8") {
    har::Rng rng(67);
    har::Frame f(48, 48, 128);
    for (int y = 12; y < 36; ++y)
      for (int x = 12; x < 36; ++x)
        f.at(y, x) = static_cast<std::uint8_t>(128 + rng.uniform_int(-96, 96));
    const har::BinaryMask mask = har::extract_silhouette(f);
    long long inter = 0, uni = 0;
    for (int y = 0; y < 48; ++y)
      for (int x = 0; x < 48; ++x) {
        const bool gt = y >= 12 && y < 36 && x >= 12 && x < 36;
        const bool got = mask.at(y, x) != 0;
        inter += gt && got;
        uni += gt || got;
      }
    CHECK(static_cast<double>(inter) / uni >= 0.8);
  }
  SECTION("two textured objects keep only the larger") {
    har::Rng rng(71);
    har::Frame f(64, 48, 128);
    auto texture = [&](int y0, int y1, int x0, int x1) {
      for (int y = y0; y < y1; ++y)
        for (int x = x0; x < x1; ++x)
          f.at(y, x) = static_cast<std::uint8_t>(128 + rng.uniform_int(-96, 96));
    };
    texture(8, 40, 6, 30);   // large object
    texture(18, 26, 48, 56); // small object
    const har::BinaryMask mask = har::extract_silhouette(f);
    long long in_large = 0, in_small = 0;
    for (int y = 0; y < 48; ++y)
      for (int x = 0; x < 64; ++x)
        if (mask.at(y, x)) {
          if (x < 40) ++in_large;
          if (x >= 44) ++in_small;
        }
    CHECK(in_large > 0);
    CHECK(in_small == 0);
  }
  SECTION("dimension mismatch of mask never happens") {
    har::Rng rng(73);
    const har::Frame f = random_frame(rng, 17, 13);
    const har::BinaryMask mask = har::extract_silhouette(f);
    CHECK(mask.width == 17);
    CHECK(mask.height == 13);
  }
}
