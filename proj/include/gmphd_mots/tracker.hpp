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

// Online per-frame tracking loop. Each frame runs, in order:
//
//   predict live tracks -> segment-to-track association (S2TA) -> births ->
//   demote unmatched live tracks to lost -> mask merging ->
//   track-to-track association (T2TA) -> retire old lost tracks -> emit
//
// Every track carries a single Gaussian component. Association costs come
// from the position/motion affinity w * N(z; Hm, S), optionally fused with
// the appearance affinity of the track's correlation filter.
//
// A pair is forbidden when either raw affinity is at or below 1e-39, or
// when its fused cost reaches the 10000 cap. Forbidden matches are never
// applied.

#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <opencv2/core.hpp>

#include "gmphd_mots/affinity.hpp"
#include "gmphd_mots/errors.hpp"
#include "gmphd_mots/gmphd.hpp"
#include "gmphd_mots/hungarian.hpp"
#include "gmphd_mots/kcf.hpp"
#include "gmphd_mots/mask.hpp"

namespace gmphd_mots {

inline constexpr int kClassCar = 1;
inline constexpr int kClassPedestrian = 2;

enum class MergeMode { none, box_iou, mask_iou };

/// Which association and merging stages run. The presets p1..p5 add one
/// stage at a time.
struct PipelineFlags {
  bool saf_s2ta = true;
  MergeMode merge = MergeMode::mask_iou;
  bool t2ta = true;

  bool needs_appearance() const { return saf_s2ta || t2ta; }
  bool operator==(const PipelineFlags&) const = default;
};

/// p1: position/motion-only S2TA. p2: + fused S2TA. p3: + box-IoU merging.
/// p4: mask-IoU merging instead. p5: p4 + fused T2TA.
inline PipelineFlags pipeline_preset(std::string_view name) {
  if (name == "p1") return {false, MergeMode::none, false};
  if (name == "p2") return {true, MergeMode::none, false};
  if (name == "p3") return {true, MergeMode::box_iou, false};
  if (name == "p4") return {true, MergeMode::mask_iou, false};
  if (name == "p5") return {true, MergeMode::mask_iou, true};
  throw DomainError("unknown pipeline '" + std::string(name) + "' (expected p1..p5)");
}

struct TrackerConfig {
  ModelParams model;
  KcfParams kcf;
  PipelineFlags pipeline;
  double t_m = 0.4;
  double alpha = kDefaultAlpha;
  int max_lost_age = 30;
  int t2ta_window = 10;
  int min_hits = 1;
};

/// One detected instance in one frame.
struct Segment {
  int frame = 0;
  int cls = kClassCar;
  double confidence = 1.0;
  BinaryMask mask;
  BBox box;
  ObservationVec center;
};

/// Builds a segment whose box and center are derived from the mask.
inline Segment make_segment(int frame, int cls, double confidence, BinaryMask mask) {
  Segment s;
  s.frame = frame;
  s.cls = cls;
  s.confidence = confidence;
  s.box = mask_bbox(mask);  // throws on an empty mask
  s.center = ObservationVec(s.box.center_x(), s.box.center_y());
  s.mask = std::move(mask);
  return s;
}

enum class TrackStatus { live, lost, dead };

struct Track {
  int id = 0;
  int cls = kClassCar;
  TrackStatus status = TrackStatus::live;
  GaussianComponent state;  // posterior at last_update
  int last_update = 0;
  int t_b = 0;
  std::optional<int> t_l;
  ObservationVec birth_position;
  BinaryMask mask;  // current (or last) mask
  BBox box;
  double confidence = 0.0;
  bool has_current = false;  // carries a mask for the frame being processed
  int hits = 0;
  std::map<int, BinaryMask> mask_history;
  std::optional<KcfModel> appearance;
};

struct EmittedMask {
  int id = 0;
  int cls = kClassCar;
  double confidence = 0.0;
  BinaryMask mask;
};

struct FrameResult {
  int frame = 0;
  std::vector<EmittedMask> objects;
};

/// Tracker for a single class.
class Tracker {
 public:
  explicit Tracker(int cls, TrackerConfig config = {}) : cls_(cls), config_(std::move(config)) {
    if (!(config_.t_m >= 0.0 && config_.t_m <= 1.0)) throw DomainError("t_m must lie in [0, 1]");
    if (!(config_.alpha > 0.0)) throw DomainError("alpha must be > 0");
    if (config_.max_lost_age < 0 || config_.t2ta_window < 0 || config_.min_hits < 1) {
      throw DomainError("max_lost_age and t2ta_window must be >= 0 and min_hits >= 1");
    }
  }

  int cls() const { return cls_; }
  const TrackerConfig& config() const { return config_; }
  /// Live and lost tracks. Dead tracks are dropped.
  const std::vector<Track>& tracks() const { return tracks_; }
  std::optional<int> last_frame() const { return last_frame_; }

  /// `gray` may be empty when the pipeline does not use appearance.
  FrameResult step(int frame, std::span<const Segment> segments, const cv::Mat& gray = {}) {
    if (last_frame_ && frame <= *last_frame_) {
      throw DomainError("frame " + std::to_string(frame) + " does not follow frame " + std::to_string(*last_frame_));
    }
    for (const auto& s : segments) {
      if (s.cls != cls_) throw DomainError("segment of class " + std::to_string(s.cls) + " given to class tracker " + std::to_string(cls_));
      if (s.frame != frame) throw DomainError("segment frame does not match the step frame");
    }
    const bool appearance = config_.pipeline.needs_appearance();
    if (appearance && !segments.empty() && gray.empty()) {
      throw DomainError("the selected pipeline needs the frame image");
    }
    last_frame_ = frame;
    for (auto& t : tracks_) t.has_current = false;

    std::vector<std::optional<KcfProbe>> probes(segments.size());
    if (appearance) {
      for (std::size_t j = 0; j < segments.size(); ++j) probes[j] = try_probe(gray, segments[j].box);
    }

    const std::vector<std::size_t> matched_live = s2ta(frame, segments, probes, gray);
    births(frame, segments, matched_live, gray);
    demote_unmatched();
    merge_masks(frame);
    if (config_.pipeline.t2ta) t2ta(frame, gray);
    retire(frame);
    return emit(frame);
  }

 private:
  std::optional<KcfProbe> try_probe(const cv::Mat& gray, const BBox& box) const {
    try {
      return make_probe(gray, box, config_.kcf);
    } catch (const DomainError&) {
      return std::nullopt;  // box too small to carry appearance
    }
  }

  void retrain(Track& t, int frame, const cv::Mat& gray) const {
    if (!config_.pipeline.needs_appearance()) return;
    try {
      t.appearance = train(gray, t.box, config_.kcf, frame);
    } catch (const DomainError&) {
      t.appearance.reset();
    }
  }

  /// Appearance affinity with no evidence either way when the model or the
  /// patch is unavailable.
  static double appearance_or_neutral(const std::optional<KcfModel>& m, const std::optional<KcfProbe>& p) {
    if (!m || !p) return 1.0;
    return appearance_affinity(*m, *p);
  }

  /// Fused costs with the forbidden-pair rule applied to the raw affinities.
  CostMatrix fused_costs(const AffinityMatrix& pm, const AffinityMatrix* appr,
                         const std::vector<std::vector<bool>>& allowed) const {
    const AffinityMatrix pm_n = minmax_normalize(pm);
    const AffinityMatrix ap_n = appr ? minmax_normalize(*appr) : AffinityMatrix(pm.rows(), pm.cols(), 1.0);
    CostMatrix cost = fuse(pm_n, ap_n, config_.alpha);
    for (Eigen::Index i = 0; i < pm.rows(); ++i) {
      for (Eigen::Index j = 0; j < pm.cols(); ++j) {
        const bool floor_hit = pm(i, j) <= kAffinityFloor || (appr && (*appr)(i, j) <= kAffinityFloor);
        if (!allowed[i][j] || floor_hit) cost(i, j) = kForbiddenCost;
      }
    }
    return cost;
  }

  std::vector<std::size_t> s2ta(int frame, std::span<const Segment> segments,
                                const std::vector<std::optional<KcfProbe>>& probes, const cv::Mat& gray) {
    std::vector<std::size_t> live;
    for (std::size_t k = 0; k < tracks_.size(); ++k) {
      if (tracks_[k].status == TrackStatus::live) live.push_back(k);
    }
    std::vector<std::size_t> matched_segments;
    if (live.empty() || segments.empty()) return matched_segments;

    const auto n = static_cast<Eigen::Index>(live.size());
    const auto m = static_cast<Eigen::Index>(segments.size());
    std::vector<GaussianComponent> pred(live.size());
    for (std::size_t i = 0; i < live.size(); ++i) {
      const Track& t = tracks_[live[i]];
      pred[i] = predict_n(t.state, frame - t.last_update, config_.model);
    }
    AffinityMatrix pm(n, m);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < m; ++j) pm(i, j) = pm_affinity(pred[i], segments[j].center, config_.model);
    }
    std::optional<AffinityMatrix> appr;
    if (config_.pipeline.saf_s2ta) {
      appr.emplace(n, m);
      for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < m; ++j) (*appr)(i, j) = appearance_or_neutral(tracks_[live[i]].appearance, probes[j]);
      }
    }
    const std::vector<std::vector<bool>> allowed(live.size(), std::vector<bool>(segments.size(), true));
    const Assignment a = solve(fused_costs(pm, appr ? &*appr : nullptr, allowed));

    for (auto [i, j] : a.pairs) {
      Track& t = tracks_[live[i]];
      const Segment& s = segments[j];
      // Normalized weight of this track among all live components for observation j.
      std::vector<double> q(live.size());
      for (std::size_t k = 0; k < live.size(); ++k) q[k] = likelihood(pred[k], s.center, config_.model);
      double w = pred[i].weight;
      try {
        w = reweight(pred, q)[i];
      } catch (const DomainError&) {
      }
      t.state = update(pred[i], s.center, config_.model);
      t.state.weight = std::clamp(w, 1e-3, 1.0);
      adopt(t, s, frame);
      retrain(t, frame, gray);
      matched_segments.push_back(static_cast<std::size_t>(j));
    }
    return matched_segments;
  }

  static void adopt(Track& t, const Segment& s, int frame) {
    t.mask = s.mask;
    t.box = s.box;
    t.confidence = s.confidence;
    t.last_update = frame;
    t.has_current = true;
    t.hits += 1;
    t.mask_history[frame] = s.mask;
  }

  void births(int frame, std::span<const Segment> segments, const std::vector<std::size_t>& matched, const cv::Mat& gray) {
    std::vector<bool> used(segments.size(), false);
    for (std::size_t j : matched) used[j] = true;
    for (std::size_t j = 0; j < segments.size(); ++j) {
      if (used[j]) continue;
      const Segment& s = segments[j];
      Track t;
      t.id = next_id_++;
      t.cls = cls_;
      t.status = TrackStatus::live;
      t.state = init_component(s.center, clamp_confidence(s.confidence), config_.model);
      t.t_b = frame;
      t.birth_position = s.center;
      adopt(t, s, frame);
      retrain(t, frame, gray);
      tracks_.push_back(std::move(t));
    }
  }

  void demote_unmatched() {
    for (auto& t : tracks_) {
      if (t.status == TrackStatus::live && !t.has_current) {
        t.status = TrackStatus::lost;
        t.t_l = t.last_update;
      }
    }
  }

  double merge_overlap(const Track& a, const Track& b) const {
    return config_.pipeline.merge == MergeMode::box_iou ? box_iou(a.box, b.box) : mask_iou(a.mask, b.mask);
  }

  void merge_masks(int frame) {
    if (config_.pipeline.merge == MergeMode::none) return;
    for (;;) {
      std::vector<std::size_t> cur;
      for (std::size_t k = 0; k < tracks_.size(); ++k) {
        if (tracks_[k].status == TrackStatus::live && tracks_[k].has_current) cur.push_back(k);
      }
      double best = config_.t_m;
      std::optional<std::pair<std::size_t, std::size_t>> pair;
      for (std::size_t a = 0; a < cur.size(); ++a) {
        for (std::size_t b = a + 1; b < cur.size(); ++b) {
          const double iou = merge_overlap(tracks_[cur[a]], tracks_[cur[b]]);
          if (iou > best) {
            best = iou;
            pair = {cur[a], cur[b]};
          }
        }
      }
      if (!pair) return;
      auto [ia, ib] = *pair;
      const Track& a = tracks_[ia];
      const Track& b = tracks_[ib];
      const bool a_survives = a.confidence != b.confidence ? a.confidence > b.confidence
                              : a.t_b != b.t_b           ? a.t_b < b.t_b
                                                         : a.id < b.id;
      Track& survivor = tracks_[a_survives ? ia : ib];
      Track& loser = tracks_[a_survives ? ib : ia];
      survivor.mask = mask_union(survivor.mask, loser.mask);
      survivor.box = mask_bbox(survivor.mask);
      survivor.mask_history[frame] = survivor.mask;
      loser.has_current = false;
      loser.mask_history.erase(frame);
    }
  }

  void t2ta(int frame, const cv::Mat& gray) {
    std::vector<std::size_t> lost, fresh;
    for (std::size_t k = 0; k < tracks_.size(); ++k) {
      const Track& t = tracks_[k];
      if (t.status == TrackStatus::lost && frame - *t.t_l <= config_.max_lost_age) lost.push_back(k);
      if (t.status == TrackStatus::live && t.has_current && frame - t.t_b <= config_.t2ta_window) fresh.push_back(k);
    }
    if (lost.empty() || fresh.empty()) return;

    const auto n = static_cast<Eigen::Index>(lost.size());
    const auto m = static_cast<Eigen::Index>(fresh.size());
    AffinityMatrix pm(n, m), appr(n, m);
    std::vector<std::vector<bool>> allowed(lost.size(), std::vector<bool>(fresh.size(), false));
    std::vector<std::optional<KcfProbe>> probes(fresh.size());
    for (std::size_t j = 0; j < fresh.size(); ++j) probes[j] = try_probe(gray, tracks_[fresh[j]].box);
    for (std::size_t i = 0; i < lost.size(); ++i) {
      const Track& l = tracks_[lost[i]];
      for (std::size_t j = 0; j < fresh.size(); ++j) {
        const Track& f = tracks_[fresh[j]];
        allowed[i][j] = f.t_b > *l.t_l;
        const int gap = std::max(0, f.t_b - *l.t_l);
        pm(i, j) = pm_affinity(predict_n(l.state, gap, config_.model), f.birth_position, config_.model);
        appr(i, j) = appearance_or_neutral(l.appearance, probes[j]);
      }
    }
    const Assignment a = solve(fused_costs(pm, &appr, allowed));

    for (auto [i, j] : a.pairs) {
      Track& l = tracks_[lost[i]];
      Track& f = tracks_[fresh[j]];
      f.id = l.id;
      f.t_b = l.t_b;
      f.hits += l.hits;
      for (auto& [fr, mk] : l.mask_history) f.mask_history.emplace(fr, std::move(mk));
      l.status = TrackStatus::dead;
    }
    std::erase_if(tracks_, [](const Track& t) { return t.status == TrackStatus::dead; });
  }

  void retire(int frame) {
    std::erase_if(tracks_, [&](const Track& t) {
      return t.status == TrackStatus::lost && frame - *t.t_l > config_.max_lost_age;
    });
  }

  FrameResult emit(int frame) const {
    FrameResult r;
    r.frame = frame;
    for (const auto& t : tracks_) {
      if (t.status == TrackStatus::live && t.has_current && t.hits >= config_.min_hits) {
        r.objects.push_back({t.id, t.cls, t.confidence, t.mask});
      }
    }
    std::sort(r.objects.begin(), r.objects.end(), [](const EmittedMask& a, const EmittedMask& b) { return a.id < b.id; });
    return r;
  }

  int cls_;
  TrackerConfig config_;
  std::vector<Track> tracks_;
  int next_id_ = 1;
  std::optional<int> last_frame_;
};

/// Independent trackers for several classes fed from one segment stream.
class MultiClassTracker {
 public:
  MultiClassTracker(std::vector<int> classes, const TrackerConfig& config) {
    for (int c : classes) {
      if (!trackers_.emplace(c, Tracker(c, config)).second) throw DomainError("class listed twice");
    }
  }

  /// Segments of classes that are not tracked are ignored.
  FrameResult step(int frame, std::span<const Segment> segments, const cv::Mat& gray = {}) {
    FrameResult out;
    out.frame = frame;
    for (auto& [cls, tracker] : trackers_) {
      std::vector<Segment> mine;
      for (const auto& s : segments) {
        if (s.cls == cls) mine.push_back(s);
      }
      FrameResult r = tracker.step(frame, mine, gray);
      for (auto& o : r.objects) out.objects.push_back(std::move(o));
    }
    return out;
  }

  const Tracker& tracker(int cls) const { return trackers_.at(cls); }
  bool needs_appearance() const {
    return !trackers_.empty() && trackers_.begin()->second.config().pipeline.needs_appearance();
  }

 private:
  std::map<int, Tracker> trackers_;
};

}  // namespace gmphd_mots
