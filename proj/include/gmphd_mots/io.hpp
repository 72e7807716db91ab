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

// Text formats, one record per line, fields separated by single spaces:
//
//   detections:  frame class confidence img_h img_w rle
//   results:     frame object_id class img_h img_w rle
//
// object_id = class * 1000 + instance id. Config files hold `key = value`
// lines; `#` starts a comment. Matrix keys (f, q, p0, r, h) take row-major
// number lists separated by spaces or commas, optionally bracketed.

#pragma once

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "gmphd_mots/errors.hpp"
#include "gmphd_mots/mask.hpp"
#include "gmphd_mots/tracker.hpp"

namespace gmphd_mots {

inline constexpr int kIdsPerClass = 1000;

struct DetectionRecord {
  int frame = 0;
  int cls = kClassCar;
  double confidence = 0.0;
  int img_h = 0;
  int img_w = 0;
  std::string rle;
};

struct ResultRecord {
  int frame = 0;
  int object_id = 0;
  int cls = kClassCar;
  int img_h = 0;
  int img_w = 0;
  std::string rle;

  bool operator==(const ResultRecord&) const = default;
};

/// Inclusive per-class confidence thresholds.
struct IngestConfig {
  double conf_car = 0.6;
  double conf_ped = 0.7;

  double threshold(int cls) const { return cls == kClassPedestrian ? conf_ped : conf_car; }
};

struct Config {
  TrackerConfig tracker;
  IngestConfig ingest;
};

namespace io_detail {

inline std::vector<std::string_view> fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    auto space = [&](std::size_t k) { return std::isspace(static_cast<unsigned char>(line[k])) != 0; };
    while (i < line.size() && space(i)) ++i;
    std::size_t j = i;
    while (j < line.size() && !space(j)) ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

template <typename T>
T number(std::string_view tok, std::string_view name, std::size_t line) {
  T v{};
  const auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || p != tok.data() + tok.size()) {
    throw ParseError("bad " + std::string(name) + " '" + std::string(tok) + "'", line);
  }
  if constexpr (std::is_floating_point_v<T>) {
    if (!std::isfinite(v)) throw ParseError(std::string(name) + " is not finite", line);
  }
  return v;
}

inline std::string shortest(double v) {
  char buf[32];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

inline std::vector<double> number_list(std::string_view value, std::string_view key, std::size_t line) {
  std::string cleaned(value);
  for (char& ch : cleaned) {
    if (ch == ',' || ch == '[' || ch == ']' || ch == ';') ch = ' ';
  }
  std::vector<double> out;
  for (auto tok : fields(cleaned)) out.push_back(number<double>(tok, key, line));
  return out;
}

template <int R, int C>
Eigen::Matrix<double, R, C> matrix(std::string_view value, std::string_view key, std::size_t line) {
  const auto v = number_list(value, key, line);
  if (v.size() != static_cast<std::size_t>(R * C)) {
    throw ParseError("key '" + std::string(key) + "' needs " + std::to_string(R * C) + " numbers, got " +
                         std::to_string(v.size()),
                     line);
  }
  Eigen::Matrix<double, R, C> m;
  for (int r = 0; r < R; ++r)
    for (int c = 0; c < C; ++c) m(r, c) = v[static_cast<std::size_t>(r * C + c)];
  return m;
}

inline std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  return in;
}

}  // namespace io_detail

/// Applies `key = value` lines on top of `base`.
inline Config parse_config(std::istream& in, Config base = {}) {
  Config cfg = std::move(base);
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string_view s(raw);
    if (auto hash = s.find('#'); hash != std::string_view::npos) s = s.substr(0, hash);
    s = io_detail::trim(s);
    if (s.empty()) continue;
    const auto eq = s.find('=');
    if (eq == std::string_view::npos) throw ParseError("expected 'key = value'", line);
    const std::string key(io_detail::trim(s.substr(0, eq)));
    const std::string_view value = io_detail::trim(s.substr(eq + 1));
    if (value.empty()) throw ParseError("key '" + key + "' has no value", line);
    auto& t = cfg.tracker;
    if (key == "t_m") {
      t.t_m = io_detail::number<double>(value, key, line);
    } else if (key == "alpha") {
      t.alpha = io_detail::number<double>(value, key, line);
    } else if (key == "max_lost_age") {
      t.max_lost_age = io_detail::number<int>(value, key, line);
    } else if (key == "t2ta_window") {
      t.t2ta_window = io_detail::number<int>(value, key, line);
    } else if (key == "min_hits") {
      t.min_hits = io_detail::number<int>(value, key, line);
    } else if (key == "conf_car") {
      cfg.ingest.conf_car = io_detail::number<double>(value, key, line);
    } else if (key == "conf_ped") {
      cfg.ingest.conf_ped = io_detail::number<double>(value, key, line);
    } else if (key == "f") {
      t.model.F = io_detail::matrix<4, 4>(value, key, line);
    } else if (key == "q") {
      t.model.Q = io_detail::matrix<4, 4>(value, key, line);
    } else if (key == "p0") {
      t.model.P0 = io_detail::matrix<4, 4>(value, key, line);
    } else if (key == "r") {
      t.model.R = io_detail::matrix<2, 2>(value, key, line);
    } else if (key == "h") {
      t.model.H = io_detail::matrix<2, 4>(value, key, line);
    } else {
      throw ParseError("unknown key '" + key + "'", line);
    }
  }
  return cfg;
}

inline Config load_config(const std::filesystem::path& path, Config base = {}) {
  auto in = io_detail::open_in(path);
  return parse_config(in, std::move(base));
}

inline DetectionRecord parse_detection(std::string_view line, std::size_t line_no) {
  const auto f = io_detail::fields(line);
  if (f.size() != 6) throw ParseError("expected 6 fields, got " + std::to_string(f.size()), line_no);
  DetectionRecord d;
  d.frame = io_detail::number<int>(f[0], "frame", line_no);
  d.cls = io_detail::number<int>(f[1], "class", line_no);
  d.confidence = io_detail::number<double>(f[2], "confidence", line_no);
  d.img_h = io_detail::number<int>(f[3], "img_h", line_no);
  d.img_w = io_detail::number<int>(f[4], "img_w", line_no);
  d.rle = std::string(f[5]);
  if (d.frame < 0) throw ParseError("negative frame", line_no);
  if (d.cls != kClassCar && d.cls != kClassPedestrian) throw ParseError("class must be 1 or 2", line_no);
  if (d.confidence < 0.0 || d.confidence > 1.0) throw ParseError("confidence outside [0, 1]", line_no);
  if (d.img_h <= 0 || d.img_w <= 0) throw ParseError("image size must be positive", line_no);
  return d;
}

inline std::string format_detection(const DetectionRecord& d) {
  return std::to_string(d.frame) + ' ' + std::to_string(d.cls) + ' ' + io_detail::shortest(d.confidence) + ' ' +
         std::to_string(d.img_h) + ' ' + std::to_string(d.img_w) + ' ' + d.rle;
}

/// Decodes the mask. RLE problems are reported with the line number.
inline BinaryMask decode_record_mask(const std::string& rle, int h, int w, std::size_t line_no) {
  try {
    return rle_decode(rle, h, w);
  } catch (const DecodeError& e) {
    throw IntegrityError("line " + std::to_string(line_no) + ": " + e.what());
  } catch (const IntegrityError& e) {
    throw IntegrityError("line " + std::to_string(line_no) + ": " + e.what());
  }
}

struct FrameSegments {
  int frame = 0;
  std::vector<Segment> segments;
};

/// Streams a detections file one frame at a time. Frames must be
/// non-decreasing. Below-threshold and empty segments are dropped.
class DetectionReader {
 public:
  DetectionReader(std::istream& in, IngestConfig thresholds) : in_(&in), thresholds_(thresholds) {}

  std::optional<FrameSegments> next() {
    FrameSegments out;
    bool have = false;
    for (;;) {
      if (!pending_) pending_ = read_record();
      if (!pending_) break;
      if (have && pending_->first.frame != out.frame) break;
      auto [rec, line_no] = std::move(*pending_);
      pending_.reset();
      if (last_frame_ && rec.frame < *last_frame_) {
        throw ParseError("frame " + std::to_string(rec.frame) + " appears after frame " + std::to_string(*last_frame_),
                         line_no);
      }
      last_frame_ = rec.frame;
      if (!have) {
        out.frame = rec.frame;
        have = true;
      }
      BinaryMask mask = decode_record_mask(rec.rle, rec.img_h, rec.img_w, line_no);
      if (rec.confidence < thresholds_.threshold(rec.cls) || mask.empty()) continue;
      out.segments.push_back(make_segment(rec.frame, rec.cls, rec.confidence, std::move(mask)));
    }
    if (!have) return std::nullopt;
    return out;
  }

 private:
  std::optional<std::pair<DetectionRecord, std::size_t>> read_record() {
    std::string raw;
    while (std::getline(*in_, raw)) {
      ++line_;
      if (io_detail::trim(raw).empty()) continue;
      return std::pair{parse_detection(raw, line_), line_};
    }
    return std::nullopt;
  }

  std::istream* in_;
  IngestConfig thresholds_;
  std::size_t line_ = 0;
  std::optional<int> last_frame_;
  std::optional<std::pair<DetectionRecord, std::size_t>> pending_;
};

/// Reads a whole detections file. Frames need not be sorted.
inline std::map<int, std::vector<Segment>> read_detections(const std::filesystem::path& path,
                                                           const IngestConfig& thresholds = {}) {
  auto in = io_detail::open_in(path);
  std::map<int, std::vector<Segment>> out;
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (io_detail::trim(raw).empty()) continue;
    const DetectionRecord d = parse_detection(raw, line);
    BinaryMask mask = decode_record_mask(d.rle, d.img_h, d.img_w, line);
    if (d.confidence < thresholds.threshold(d.cls) || mask.empty()) continue;
    out[d.frame].push_back(make_segment(d.frame, d.cls, d.confidence, std::move(mask)));
  }
  return out;
}

inline std::vector<DetectionRecord> read_detection_records(const std::filesystem::path& path) {
  auto in = io_detail::open_in(path);
  std::vector<DetectionRecord> out;
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (!io_detail::trim(raw).empty()) out.push_back(parse_detection(raw, line));
  }
  return out;
}

inline void write_detections(std::ostream& out, const std::vector<DetectionRecord>& records) {
  for (const auto& d : records) out << format_detection(d) << '\n';
}

inline ResultRecord to_result_record(int frame, const EmittedMask& m) {
  if (m.id < 1 || m.id >= kIdsPerClass) {
    throw DomainError("instance id " + std::to_string(m.id) + " does not fit the class*1000+id convention");
  }
  return {frame, m.cls * kIdsPerClass + m.id, m.cls, m.mask.height(), m.mask.width(), rle_encode(m.mask)};
}

inline std::string format_result(const ResultRecord& r) {
  return std::to_string(r.frame) + ' ' + std::to_string(r.object_id) + ' ' + std::to_string(r.cls) + ' ' +
         std::to_string(r.img_h) + ' ' + std::to_string(r.img_w) + ' ' + r.rle;
}

/// Writes results in frame order, one line per emitted mask.
inline void write_results(std::ostream& out, const std::vector<FrameResult>& frames) {
  for (const auto& f : frames) {
    for (const auto& m : f.objects) out << format_result(to_result_record(f.frame, m)) << '\n';
  }
}

inline void write_results(const std::filesystem::path& path, const std::vector<FrameResult>& frames) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  write_results(out, frames);
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

inline ResultRecord parse_result(std::string_view line, std::size_t line_no) {
  const auto f = io_detail::fields(line);
  if (f.size() != 6) throw ParseError("expected 6 fields, got " + std::to_string(f.size()), line_no);
  ResultRecord r;
  r.frame = io_detail::number<int>(f[0], "frame", line_no);
  r.object_id = io_detail::number<int>(f[1], "object_id", line_no);
  r.cls = io_detail::number<int>(f[2], "class", line_no);
  r.img_h = io_detail::number<int>(f[3], "img_h", line_no);
  r.img_w = io_detail::number<int>(f[4], "img_w", line_no);
  r.rle = std::string(f[5]);
  if (r.frame < 0) throw ParseError("negative frame", line_no);
  if (r.img_h <= 0 || r.img_w <= 0) throw ParseError("image size must be positive", line_no);
  return r;
}

inline std::vector<ResultRecord> read_results(std::istream& in) {
  std::vector<ResultRecord> out;
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (!io_detail::trim(raw).empty()) out.push_back(parse_result(raw, line));
  }
  return out;
}

inline std::vector<ResultRecord> read_results(const std::filesystem::path& path) {
  auto in = io_detail::open_in(path);
  return read_results(in);
}

/// Expands the first printf-style integer conversion (%d or %0Nd) in `pattern`.
inline std::string expand_frame_pattern(std::string_view pattern, int frame) {
  const auto pct = pattern.find('%');
  if (pct == std::string_view::npos) throw DomainError("image pattern '" + std::string(pattern) + "' has no %d field");
  std::size_t k = pct + 1;
  int width = 0;
  bool zero = false;
  if (k < pattern.size() && pattern[k] == '0') {
    zero = true;
    ++k;
  }
  while (k < pattern.size() && std::isdigit(static_cast<unsigned char>(pattern[k]))) width = width * 10 + (pattern[k++] - '0');
  if (k >= pattern.size() || pattern[k] != 'd') {
    throw DomainError("image pattern '" + std::string(pattern) + "' needs %d or %0Nd");
  }
  std::string num = std::to_string(frame);
  if (static_cast<int>(num.size()) < width) num.insert(0, static_cast<std::size_t>(width) - num.size(), zero ? '0' : ' ');
  return std::string(pattern.substr(0, pct)) + num + std::string(pattern.substr(k + 1));
}

/// BT.601 luma, round(0.299 R + 0.587 G + 0.114 B), from an 8-bit BGR or BGRA image.
inline cv::Mat bt601_gray(const cv::Mat& img) {
  if (img.depth() != CV_8U) throw IoError("only 8-bit images are supported");
  if (img.channels() == 1) return img.clone();
  if (img.channels() != 3 && img.channels() != 4) throw IoError("unsupported channel count");
  cv::Mat out(img.rows, img.cols, CV_8UC1);
  const int ch = img.channels();
  for (int r = 0; r < img.rows; ++r) {
    const auto* p = img.ptr<std::uint8_t>(r);
    auto* o = out.ptr<std::uint8_t>(r);
    for (int c = 0; c < img.cols; ++c) {
      const double y = 0.299 * p[c * ch + 2] + 0.587 * p[c * ch + 1] + 0.114 * p[c * ch];
      o[c] = static_cast<std::uint8_t>(std::min(255.0, std::floor(y + 0.5)));
    }
  }
  return out;
}

/// Loads frame `frame` of an image sequence as an 8-bit grayscale plane.
/// `expected_h`/`expected_w` of 0 skip the size check.
inline cv::Mat load_frame(std::string_view pattern, int frame, int expected_h = 0, int expected_w = 0) {
  const std::string path = expand_frame_pattern(pattern, frame);
  if (!std::filesystem::exists(path)) {
    throw IoError("frame " + std::to_string(frame) + ": missing image '" + path + "'");
  }
  const cv::Mat img = cv::imread(path, cv::IMREAD_UNCHANGED);
  if (img.empty()) throw IoError("frame " + std::to_string(frame) + ": cannot decode '" + path + "'");
  cv::Mat gray = bt601_gray(img);
  if ((expected_h > 0 && gray.rows != expected_h) || (expected_w > 0 && gray.cols != expected_w)) {
    throw DimensionError("frame " + std::to_string(frame) + ": image is " + std::to_string(gray.cols) + "x" +
                         std::to_string(gray.rows) + ", detections expect " + std::to_string(expected_w) + "x" +
                         std::to_string(expected_h));
  }
  return gray;
}

}  // namespace gmphd_mots
