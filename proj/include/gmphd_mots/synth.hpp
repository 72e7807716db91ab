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

// Procedural test sequences: textured rectangles (cars) and ellipses
// (pedestrians) on linear paths over a textured background. Objects listed
// later are drawn in front; ground-truth masks are the visible pixels, so
// they never overlap. Detections are derived from the ground truth with
// optional dropout, jitter, and spurious clutter segments.
//
// Scenarios:
//   crossing   two cars pass each other
//   occlusion  one car, hidden in frames 10-12
//   clutter    three slow objects plus spurious segments (rate 0.2 per true segment)
//   parallel   three pedestrians walking side by side

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "gmphd_mots/errors.hpp"
#include "gmphd_mots/io.hpp"
#include "gmphd_mots/mask.hpp"

namespace gmphd_mots {

struct SynthObject {
  int id = 1;  // instance id, unique per class
  int cls = kClassCar;
  double x0 = 0.0;  // top-left at frame 0
  double y0 = 0.0;
  double vx = 0.0;  // px / frame
  double vy = 0.0;
  int w = 30;
  int h = 20;
  std::vector<std::pair<int, int>> hidden;  // inclusive frame ranges with no visibility
  std::uint64_t texture_seed = 0;

  bool is_hidden(int frame) const {
    return std::any_of(hidden.begin(), hidden.end(), [&](auto r) { return frame >= r.first && frame <= r.second; });
  }
  BBox box_at(int frame) const {
    return {static_cast<int>(std::lround(x0 + vx * frame)), static_cast<int>(std::lround(y0 + vy * frame)), w, h};
  }
};

struct SynthScenario {
  std::string name;
  int width = 320;
  int height = 240;
  int frames = 30;
  std::vector<SynthObject> objects;
  double fp_rate = 0.0;   // expected spurious segments per true segment
  double dropout = 0.0;   // probability a true segment is not detected
  double jitter_px = 0.0; // std-dev of the detected mask offset
  std::uint64_t seed = 0;
};

struct SynthFrame {
  int frame = 0;
  cv::Mat image;  // CV_8UC1
  std::vector<ResultRecord> gt;
  std::vector<DetectionRecord> detections;
  int spurious = 0;
};

inline SynthScenario make_scenario(std::string_view name, std::uint64_t seed) {
  SynthScenario s;
  s.name = std::string(name);
  s.seed = seed;
  std::mt19937_64 rng(seed);
  auto tex = [&] { return rng(); };
  if (name == "crossing") {
    s.frames = 40;
    s.objects = {
        {1, kClassCar, 20, 100, 6, 0.5, 40, 26, {}, tex()},
        {2, kClassCar, 260, 120, -6, -0.5, 40, 26, {}, tex()},
    };
  } else if (name == "occlusion") {
    s.frames = 30;
    s.objects = {{1, kClassCar, 20, 100, 6, 0.5, 40, 26, {{10, 12}}, tex()}};
  } else if (name == "clutter") {
    s.frames = 60;
    s.fp_rate = 0.2;
    s.objects = {
        {1, kClassCar, 30, 40, 0.05, 0.0, 36, 24, {}, tex()},
        {2, kClassCar, 180, 150, -0.05, 0.0, 36, 24, {}, tex()},
        {1, kClassPedestrian, 140, 60, 0.0, 0.05, 16, 36, {}, tex()},
    };
  } else if (name == "parallel") {
    s.frames = 40;
    s.objects = {
        {1, kClassPedestrian, 20, 40, 3, 0, 16, 36, {}, tex()},
        {2, kClassPedestrian, 20, 100, 3, 0, 16, 36, {}, tex()},
        {3, kClassPedestrian, 20, 160, 3, 0, 16, 36, {}, tex()},
    };
  } else {
    throw DomainError("unknown scenario '" + std::string(name) + "' (expected crossing, occlusion, clutter, parallel)");
  }
  return s;
}

namespace synth_detail {

inline cv::Mat blocky_texture(int h, int w, int cell, std::uint64_t seed, int lo, int hi) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> u(lo, hi);
  const int ch = (h + cell - 1) / cell, cw = (w + cell - 1) / cell;
  std::vector<std::uint8_t> v(static_cast<std::size_t>(ch) * cw);
  for (auto& x : v) x = static_cast<std::uint8_t>(u(rng));
  cv::Mat t(h, w, CV_8UC1);
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) t.at<std::uint8_t>(r, c) = v[static_cast<std::size_t>(r / cell) * cw + c / cell];
  return t;
}

/// Object footprint in object-local coordinates.
inline cv::Mat footprint(const SynthObject& o) {
  cv::Mat f(o.h, o.w, CV_8UC1, cv::Scalar(0));
  if (o.cls == kClassPedestrian) {
    cv::ellipse(f, cv::Point(o.w / 2, o.h / 2), cv::Size(std::max(1, o.w / 2), std::max(1, o.h / 2)), 0, 0, 360,
                cv::Scalar(1), cv::FILLED);
  } else {
    f.setTo(cv::Scalar(1));
  }
  return f;
}

inline BinaryMask mask_from_plane(const cv::Mat& plane) {
  DenseMask d{plane.rows, plane.cols, std::vector<std::uint8_t>(plane.total())};
  for (int r = 0; r < plane.rows; ++r)
    for (int c = 0; c < plane.cols; ++c) d.at(r, c) = plane.at<std::uint8_t>(r, c) ? 1 : 0;
  return from_dense(d);
}

inline cv::Mat shifted(const cv::Mat& plane, int dx, int dy) {
  cv::Mat out(plane.size(), plane.type(), cv::Scalar(0));
  const cv::Rect src = cv::Rect(0, 0, plane.cols, plane.rows) & cv::Rect(-dx, -dy, plane.cols, plane.rows);
  if (src.area() > 0) plane(src).copyTo(out(src + cv::Point(dx, dy)));
  return out;
}

}  // namespace synth_detail

/// Renders one frame. Deterministic for a given (scenario, frame).
inline SynthFrame render_frame(const SynthScenario& s, int frame) {
  using namespace synth_detail;
  SynthFrame out;
  out.frame = frame;
  out.image = blocky_texture(s.height, s.width, 8, s.seed ^ 0x9e3779b97f4a7c15ULL, 90, 150);
  const cv::Rect canvas(0, 0, s.width, s.height);

  // label plane: index+1 of the frontmost object per pixel
  cv::Mat label(s.height, s.width, CV_8UC1, cv::Scalar(0));
  for (std::size_t k = 0; k < s.objects.size(); ++k) {
    const SynthObject& o = s.objects[k];
    if (o.is_hidden(frame)) continue;
    const BBox b = o.box_at(frame);
    const cv::Rect r = cv::Rect(b.x, b.y, b.w, b.h) & canvas;
    if (r.area() == 0) continue;
    const cv::Rect local = r - cv::Point(b.x, b.y);
    const cv::Mat fp = footprint(o)(local);
    const cv::Mat tx = blocky_texture(o.h, o.w, 4, o.texture_seed, 0, 255)(local);
    tx.copyTo(out.image(r), fp);
    label(r).setTo(cv::Scalar(static_cast<double>(k + 1)), fp);
  }

  std::mt19937_64 rng(s.seed * 1000003ULL + static_cast<std::uint64_t>(frame));
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::normal_distribution<double> jitter(0.0, s.jitter_px > 0.0 ? s.jitter_px : 1.0);
  std::uniform_real_distribution<double> conf(0.75, 1.0);
  int true_segments = 0;
  for (std::size_t k = 0; k < s.objects.size(); ++k) {
    const SynthObject& o = s.objects[k];
    cv::Mat plane;
    cv::compare(label, cv::Scalar(static_cast<double>(k + 1)), plane, cv::CMP_EQ);
    const BinaryMask m = mask_from_plane(plane);
    if (m.empty()) continue;
    const std::string rle = rle_encode(m);
    out.gt.push_back({frame, o.cls * kIdsPerClass + o.id, o.cls, s.height, s.width, rle});
    if (s.dropout > 0.0 && u01(rng) < s.dropout) continue;
    std::string det_rle = rle;
    if (s.jitter_px > 0.0) {
      const int dx = static_cast<int>(std::lround(jitter(rng))), dy = static_cast<int>(std::lround(jitter(rng)));
      const BinaryMask jm = mask_from_plane(shifted(plane, dx, dy));
      if (jm.empty()) continue;
      det_rle = rle_encode(jm);
    }
    out.detections.push_back({frame, o.cls, std::round(conf(rng) * 1000.0) / 1000.0, s.height, s.width, det_rle});
    ++true_segments;
  }

  if (s.fp_rate > 0.0) {
    std::uniform_int_distribution<int> px(0, s.width - 12), py(0, s.height - 12), side(6, 12);
    std::uniform_int_distribution<int> cls(kClassCar, kClassPedestrian);
    std::uniform_real_distribution<double> fconf(0.7, 0.95);
    for (int t = 0; t < true_segments; ++t) {
      if (u01(rng) >= s.fp_rate) continue;
      const BBox b{px(rng), py(rng), side(rng), side(rng)};
      const BinaryMask m = box_mask(s.height, s.width, b);
      out.detections.push_back({frame, cls(rng), std::round(fconf(rng) * 1000.0) / 1000.0, s.height, s.width,
                                rle_encode(m)});
      ++out.spurious;
    }
  }
  return out;
}

/// Writes dets.txt, gt.txt and img/%06d.png under `dir`.
inline void write_scenario(const SynthScenario& s, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir / "img");
  std::ofstream dets(dir / "dets.txt", std::ios::binary), gt(dir / "gt.txt", std::ios::binary);
  if (!dets || !gt) throw IoError("cannot write scenario files under '" + dir.string() + "'");
  for (int f = 0; f < s.frames; ++f) {
    const SynthFrame fr = render_frame(s, f);
    for (const auto& d : fr.detections) dets << format_detection(d) << '\n';
    for (const auto& g : fr.gt) gt << format_result(g) << '\n';
    const std::string img = (dir / "img" / expand_frame_pattern("%06d.png", f)).string();
    if (!cv::imwrite(img, fr.image)) throw IoError("cannot write '" + img + "'");
  }
}

}  // namespace gmphd_mots
