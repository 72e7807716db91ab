// Copyright 2026 The gmphd_mots Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Binary segment masks stored as column-major run lengths.
//
// Compact string layout (compatible with the COCO / KITTI-MOTS tooling):
//   * The mask is scanned column by column (Fortran order), top to bottom.
//   * counts[0] is the number of leading background pixels (may be 0),
//     then foreground and background runs alternate.
//   * For i > 2, counts[i] is stored as the delta counts[i] - counts[i-2].
//   * Each (delta) value is written as a little-endian sequence of 5-bit
//     groups. A character holds one group in bits 0..4, bit 5 is the
//     continuation flag, and the character code is value + 48 ('0'..'o').
//     The last group of a value is sign-extended from its bit 4.

#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gmphd_mots/errors.hpp"

namespace gmphd_mots {

/// Axis-aligned pixel rectangle, left/top inclusive.
struct BBox {
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;

  long long area() const { return static_cast<long long>(w) * h; }
  double center_x() const { return x + 0.5 * w; }
  double center_y() const { return y + 0.5 * h; }

  friend bool operator==(const BBox&, const BBox&) = default;
};

/// Half-open range [begin, end) of column-major pixel indices.
struct PixelInterval {
  std::uint32_t begin = 0;
  std::uint32_t end = 0;
};

/// Row-major dense bitmap, one byte per pixel (0 or 1).
struct DenseMask {
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> pixels;

  std::uint8_t at(int row, int col) const { return pixels[static_cast<std::size_t>(row) * width + col]; }
  std::uint8_t& at(int row, int col) { return pixels[static_cast<std::size_t>(row) * width + col]; }

  friend bool operator==(const DenseMask&, const DenseMask&) = default;
};

class BinaryMask {
 public:
  BinaryMask() = default;

  /// All-background mask.
  BinaryMask(int height, int width) : height_(height), width_(width) {
    if (height < 0 || width < 0) throw DomainError("mask dimensions must be non-negative");
    if (pixel_count() > 0) runs_.push_back(static_cast<std::uint32_t>(pixel_count()));
  }

  /// Builds a mask from alternating background/foreground run lengths.
  /// Interior zero-length runs are folded so the stored form is canonical.
  static BinaryMask from_runs(int height, int width, const std::vector<std::int64_t>& runs) {
    if (height < 0 || width < 0) throw DomainError("mask dimensions must be non-negative");
    BinaryMask m;
    m.height_ = height;
    m.width_ = width;
    std::int64_t sum = 0;
    for (std::size_t i = 0; i < runs.size(); ++i) {
      if (runs[i] < 0) throw IntegrityError("negative run length at index " + std::to_string(i));
      sum += runs[i];
    }
    if (sum != m.pixel_count()) {
      throw IntegrityError("run lengths sum to " + std::to_string(sum) + ", expected " +
                           std::to_string(m.pixel_count()));
    }
    // Collect foreground intervals, then rebuild canonical runs from them.
    std::vector<PixelInterval> fg;
    std::uint32_t pos = 0;
    for (std::size_t i = 0; i < runs.size(); ++i) {
      const auto len = static_cast<std::uint32_t>(runs[i]);
      if (i % 2 == 1 && len > 0) {
        if (!fg.empty() && fg.back().end == pos) {
          fg.back().end = pos + len;
        } else {
          fg.push_back({pos, pos + len});
        }
      }
      pos += len;
    }
    m.runs_ = runs_from_intervals(fg, static_cast<std::uint32_t>(m.pixel_count()));
    return m;
  }

  static BinaryMask from_intervals(int height, int width, const std::vector<PixelInterval>& fg) {
    BinaryMask m(height, width);
    m.runs_ = runs_from_intervals(fg, static_cast<std::uint32_t>(m.pixel_count()));
    return m;
  }

  int height() const { return height_; }
  int width() const { return width_; }
  long long pixel_count() const { return static_cast<long long>(height_) * width_; }
  const std::vector<std::uint32_t>& runs() const { return runs_; }

  long long area() const {
    long long a = 0;
    for (std::size_t i = 1; i < runs_.size(); i += 2) a += runs_[i];
    return a;
  }
  bool empty() const { return runs_.size() < 2; }

  /// Foreground runs as sorted, disjoint, non-adjacent column-major intervals.
  std::vector<PixelInterval> intervals() const {
    std::vector<PixelInterval> out;
    out.reserve(runs_.size() / 2);
    std::uint32_t pos = 0;
    for (std::size_t i = 0; i < runs_.size(); ++i) {
      if (i % 2 == 1) out.push_back({pos, pos + runs_[i]});
      pos += runs_[i];
    }
    return out;
  }

  friend bool operator==(const BinaryMask&, const BinaryMask&) = default;

 private:
  static std::vector<std::uint32_t> runs_from_intervals(const std::vector<PixelInterval>& fg,
                                                        std::uint32_t total) {
    std::vector<std::uint32_t> runs;
    if (total == 0) return runs;
    std::uint32_t pos = 0;
    for (const auto& iv : fg) {
      if (iv.begin < pos || iv.end > total || iv.begin > iv.end) {
        throw IntegrityError("foreground intervals must be sorted, disjoint and in range");
      }
      if (iv.begin == iv.end) continue;
      if (!runs.empty() && iv.begin == pos && runs.size() % 2 == 0) {
        runs.back() += iv.end - iv.begin;  // touches previous foreground run
      } else {
        runs.push_back(iv.begin - pos);
        runs.push_back(iv.end - iv.begin);
      }
      pos = iv.end;
    }
    if (pos < total || runs.empty()) runs.push_back(total - pos);
    return runs;
  }

  int height_ = 0;
  int width_ = 0;
  std::vector<std::uint32_t> runs_;
};

// ---------------------------------------------------------------------------
// Compact string codec

inline std::string rle_encode(const BinaryMask& mask) {
  const auto& counts = mask.runs();
  std::string s;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    long long x = counts[i];
    if (i > 2) x -= static_cast<long long>(counts[i - 2]);
    bool more = true;
    while (more) {
      char c = static_cast<char>(x & 0x1f);
      x >>= 5;
      more = (c & 0x10) ? x != -1 : x != 0;
      if (more) c |= 0x20;
      s.push_back(static_cast<char>(c + 48));
    }
  }
  return s;
}

inline BinaryMask rle_decode(std::string_view encoded, int height, int width) {
  std::vector<std::int64_t> counts;
  std::size_t k = 0;
  while (k < encoded.size()) {
    long long x = 0;
    int shift = 0;
    bool more = true;
    while (more) {
      if (k >= encoded.size()) throw DecodeError("truncated RLE value", k);
      const int c = static_cast<unsigned char>(encoded[k]) - 48;
      if (c < 0 || c > 63) throw DecodeError("character outside the RLE alphabet", k);
      if (shift > 55) throw DecodeError("RLE value too long", k);
      x |= static_cast<long long>(c & 0x1f) << shift;
      more = (c & 0x20) != 0;
      shift += 5;
      ++k;
      if (!more && (c & 0x10)) x |= -(1LL << shift);
    }
    if (counts.size() > 2) x += counts[counts.size() - 2];
    counts.push_back(x);
  }
  return BinaryMask::from_runs(height, width, counts);
}

// ---------------------------------------------------------------------------
// Dense conversion (test oracles, rendering, debug export)

inline DenseMask to_dense(const BinaryMask& mask) {
  DenseMask d{mask.height(), mask.width(),
              std::vector<std::uint8_t>(static_cast<std::size_t>(mask.pixel_count()), 0)};
  const auto h = static_cast<std::uint32_t>(mask.height());
  for (const auto& iv : mask.intervals()) {
    for (std::uint32_t p = iv.begin; p < iv.end; ++p) d.at(static_cast<int>(p % h), static_cast<int>(p / h)) = 1;
  }
  return d;
}

inline BinaryMask from_dense(const DenseMask& dense) {
  std::vector<PixelInterval> fg;
  for (int c = 0; c < dense.width; ++c) {
    for (int r = 0; r < dense.height; ++r) {
      if (!dense.at(r, c)) continue;
      const auto p = static_cast<std::uint32_t>(c * dense.height + r);
      if (!fg.empty() && fg.back().end == p) {
        ++fg.back().end;
      } else {
        fg.push_back({p, p + 1});
      }
    }
  }
  return BinaryMask::from_intervals(dense.height, dense.width, fg);
}

/// Filled rectangle, clipped to the mask bounds.
inline BinaryMask box_mask(int height, int width, const BBox& box) {
  const int x0 = std::max(box.x, 0), x1 = std::min(box.x + box.w, width);
  const int y0 = std::max(box.y, 0), y1 = std::min(box.y + box.h, height);
  std::vector<PixelInterval> fg;
  if (x0 < x1 && y0 < y1) {
    for (int c = x0; c < x1; ++c) {
      const auto base = static_cast<std::uint32_t>(c * height);
      fg.push_back({base + static_cast<std::uint32_t>(y0), base + static_cast<std::uint32_t>(y1)});
    }
  }
  return BinaryMask::from_intervals(height, width, fg);
}

/// Writes the mask as a binary PGM (foreground 255).
inline void write_pgm(const BinaryMask& mask, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << "P5\n" << mask.width() << ' ' << mask.height() << "\n255\n";
  const DenseMask d = to_dense(mask);
  for (auto v : d.pixels) out.put(v ? static_cast<char>(255) : 0);
}

// ---------------------------------------------------------------------------
// Geometry and overlap

namespace detail {

inline void require_same_shape(const BinaryMask& a, const BinaryMask& b) {
  if (a.height() != b.height() || a.width() != b.width()) {
    throw DimensionError("mask sizes differ: " + std::to_string(a.height()) + "x" + std::to_string(a.width()) +
                         " vs " + std::to_string(b.height()) + "x" + std::to_string(b.width()));
  }
}

}  // namespace detail

inline long long intersection_area(const BinaryMask& a, const BinaryMask& b) {
  detail::require_same_shape(a, b);
  const auto ia = a.intervals();
  const auto ib = b.intervals();
  long long inter = 0;
  std::size_t i = 0, j = 0;
  while (i < ia.size() && j < ib.size()) {
    const auto lo = std::max(ia[i].begin, ib[j].begin);
    const auto hi = std::min(ia[i].end, ib[j].end);
    if (lo < hi) inter += hi - lo;
    if (ia[i].end < ib[j].end) {
      ++i;
    } else {
      ++j;
    }
  }
  return inter;
}

/// |a ∩ b| / |a ∪ b|; 0 when both masks are empty.
inline double mask_iou(const BinaryMask& a, const BinaryMask& b) {
  const long long inter = intersection_area(a, b);
  const long long uni = a.area() + b.area() - inter;
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

inline double box_iou(const BBox& a, const BBox& b) {
  const long long iw = std::max(0, std::min(a.x + a.w, b.x + b.w) - std::max(a.x, b.x));
  const long long ih = std::max(0, std::min(a.y + a.h, b.y + b.h) - std::max(a.y, b.y));
  const long long inter = iw * ih;
  const long long uni = a.area() + b.area() - inter;
  return uni <= 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

/// Tight bounding box of the foreground. Throws DomainError on an empty mask.
inline BBox mask_bbox(const BinaryMask& mask) {
  if (mask.empty()) throw DomainError("bounding box of an empty mask");
  const auto h = static_cast<std::uint32_t>(mask.height());
  std::uint32_t min_r = h, max_r = 0, min_c = UINT32_MAX, max_c = 0;
  for (const auto& iv : mask.intervals()) {
    const std::uint32_t c0 = iv.begin / h, r0 = iv.begin % h;
    const std::uint32_t c1 = (iv.end - 1) / h, r1 = (iv.end - 1) % h;
    min_c = std::min(min_c, c0);
    max_c = std::max(max_c, c1);
    if (c0 == c1) {
      min_r = std::min(min_r, r0);
      max_r = std::max(max_r, r1);
    } else {
      // run wraps from the bottom of one column to the top of the next
      min_r = 0;
      max_r = h - 1;
    }
  }
  return BBox{static_cast<int>(min_c), static_cast<int>(min_r), static_cast<int>(max_c - min_c + 1),
              static_cast<int>(max_r - min_r + 1)};
}

inline BinaryMask mask_union(const BinaryMask& a, const BinaryMask& b) {
  detail::require_same_shape(a, b);
  auto ia = a.intervals();
  const auto ib = b.intervals();
  ia.insert(ia.end(), ib.begin(), ib.end());
  std::sort(ia.begin(), ia.end(), [](const PixelInterval& l, const PixelInterval& r) { return l.begin < r.begin; });
  std::vector<PixelInterval> merged;
  for (const auto& iv : ia) {
    if (!merged.empty() && iv.begin <= merged.back().end) {
      merged.back().end = std::max(merged.back().end, iv.end);
    } else {
      merged.push_back(iv);
    }
  }
  return BinaryMask::from_intervals(a.height(), a.width(), merged);
}

}  // namespace gmphd_mots
