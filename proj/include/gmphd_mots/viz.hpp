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

// Result overlays: each mask is tinted 50/50 with a color derived only from
// its object id, and the id is written in white inside the mask. Pixels
// outside every mask are left untouched.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <opencv2/core.hpp>
#include <opencv2/imgproc.hpp>

#include "gmphd_mots/io.hpp"
#include "gmphd_mots/mask.hpp"

namespace gmphd_mots {

/// Deterministic BGR color for an object id.
inline cv::Vec3b id_color(int object_id) {
  std::uint32_t x = static_cast<std::uint32_t>(object_id) * 2654435761u;
  x ^= x >> 15;
  x *= 2246822519u;
  x ^= x >> 13;
  return {static_cast<std::uint8_t>(64 + (x & 0xbf)), static_cast<std::uint8_t>(64 + ((x >> 8) & 0xbf)),
          static_cast<std::uint8_t>(64 + ((x >> 16) & 0xbf))};
}

/// Draws the records of one frame onto a copy of `bgr` (8-bit, 3 channels).
inline cv::Mat overlay(const cv::Mat& bgr, const std::vector<ResultRecord>& records) {
  cv::Mat out = bgr.clone();
  for (const auto& r : records) {
    if (r.img_h != out.rows || r.img_w != out.cols) {
      throw DimensionError("record for object " + std::to_string(r.object_id) + " does not match the image size");
    }
    const BinaryMask m = rle_decode(r.rle, r.img_h, r.img_w);
    if (m.empty()) continue;
    const cv::Vec3b color = id_color(r.object_id);
    cv::Mat inside(out.rows, out.cols, CV_8UC1, cv::Scalar(0));
    for (const auto& iv : m.intervals()) {
      for (std::uint32_t p = iv.begin; p < iv.end; ++p) {
        const int col = static_cast<int>(p / static_cast<std::uint32_t>(r.img_h));
        const int row = static_cast<int>(p % static_cast<std::uint32_t>(r.img_h));
        inside.at<std::uint8_t>(row, col) = 1;
        cv::Vec3b& px = out.at<cv::Vec3b>(row, col);
        for (int k = 0; k < 3; ++k) px[k] = static_cast<std::uint8_t>((px[k] + color[k] + 1) / 2);
      }
    }
    const BBox b = mask_bbox(m);
    cv::Mat text(out.rows, out.cols, CV_8UC1, cv::Scalar(0));
    cv::putText(text, std::to_string(r.object_id), cv::Point(b.x + 1, b.y + std::min(b.h, 12)), cv::FONT_HERSHEY_PLAIN,
                0.8, cv::Scalar(1), 1);
    cv::Mat label;
    cv::bitwise_and(text, inside, label);
    out.setTo(cv::Scalar(255, 255, 255), label);
  }
  return out;
}

}  // namespace gmphd_mots
