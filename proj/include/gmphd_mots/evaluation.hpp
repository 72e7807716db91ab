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

// Mask-based MOTS measures.
//
// Matching: within a class, hypothesis h matches ground truth g iff
// mask_iou(h, g) > 0.5 (strict). Ground-truth masks must not overlap, so for
// non-overlapping hypotheses the match is automatically one-to-one. When
// hypotheses overlap, each ground truth takes its highest-IoU unused
// hypothesis; the extra hypotheses count as false positives.
//
// Identity switches use the stricter rule: a matched ground truth whose
// hypothesis id differs from the id of its most recent earlier match counts
// one switch, even across frames where it was unmatched. A fragmentation is
// counted each time a ground-truth trajectory that was matched becomes
// unmatched (while present) and is matched again later.
//
//   MOTSA  = (TP - FP - IDS) / M * 100
//   sMOTSA = (sum of matched IoU - FP - IDS) / M * 100
//
// M is the number of ground-truth masks. Both are 0 when M = 0. Class 10
// records are ignore regions: an unmatched hypothesis with more than half of
// its area inside them is not a false positive.

#pragma once

#include <iomanip>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "gmphd_mots/errors.hpp"
#include "gmphd_mots/io.hpp"
#include "gmphd_mots/mask.hpp"

namespace gmphd_mots {

inline constexpr int kIgnoreClass = 10;

struct MaskObject {
  int id = 0;
  int cls = kClassCar;
  BinaryMask mask;
};

struct FrameMatch {
  int gt = 0;   // index into the ground-truth list
  int hyp = 0;  // index into the hypothesis list
  double iou = 0.0;
};

struct FrameMatching {
  std::vector<FrameMatch> matches;
  std::vector<int> unmatched_gt;
  std::vector<int> unmatched_hyp;
};

/// Matches one frame. Ignore-class objects must be removed beforehand.
inline FrameMatching match_frame(std::span<const MaskObject> gt, std::span<const MaskObject> hyp) {
  for (std::size_t a = 0; a < gt.size(); ++a) {
    for (std::size_t b = a + 1; b < gt.size(); ++b) {
      if (intersection_area(gt[a].mask, gt[b].mask) > 0) {
        throw IntegrityError("ground-truth masks of ids " + std::to_string(gt[a].id) + " and " +
                             std::to_string(gt[b].id) + " overlap");
      }
    }
  }
  FrameMatching out;
  std::vector<bool> used(hyp.size(), false);
  for (std::size_t g = 0; g < gt.size(); ++g) {
    int best = -1;
    double best_iou = 0.5;
    for (std::size_t h = 0; h < hyp.size(); ++h) {
      if (used[h] || hyp[h].cls != gt[g].cls) continue;
      const double iou = mask_iou(gt[g].mask, hyp[h].mask);
      if (iou > best_iou) {
        best_iou = iou;
        best = static_cast<int>(h);
      }
    }
    if (best >= 0) {
      used[best] = true;
      out.matches.push_back({static_cast<int>(g), best, best_iou});
    } else {
      out.unmatched_gt.push_back(static_cast<int>(g));
    }
  }
  for (std::size_t h = 0; h < hyp.size(); ++h) {
    if (!used[h]) out.unmatched_hyp.push_back(static_cast<int>(h));
  }
  return out;
}

struct ClassCounts {
  long long tp = 0;
  long long fp = 0;
  long long fn = 0;
  long long ids = 0;
  long long fm = 0;
  long long gt = 0;  // M
  double soft_tp = 0.0;

  double motsa() const { return gt == 0 ? 0.0 : (static_cast<double>(tp - fp - ids)) / static_cast<double>(gt) * 100.0; }
  double smotsa() const { return gt == 0 ? 0.0 : (soft_tp - static_cast<double>(fp + ids)) / static_cast<double>(gt) * 100.0; }

  ClassCounts& operator+=(const ClassCounts& o) {
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
    ids += o.ids;
    fm += o.fm;
    gt += o.gt;
    soft_tp += o.soft_tp;
    return *this;
  }
};

struct MetricReport {
  std::map<int, ClassCounts> per_class;
  ClassCounts overall;
  long long frames = 0;
  double fps = 0.0;  // tracker loop only; filled in by the caller

  MetricReport& operator+=(const MetricReport& o) {
    for (const auto& [c, k] : o.per_class) per_class[c] += k;
    overall += o.overall;
    frames += o.frames;
    return *this;
  }
};

/// Accumulates metrics over the frames of one sequence, in order.
class Evaluator {
 public:
  explicit Evaluator(bool use_ignore_regions = true) : use_ignore_(use_ignore_regions) {}

  /// `gt` may contain ignore-class objects; `hyp` objects of the ignore class are dropped.
  void add_frame(int frame, std::span<const MaskObject> gt, std::span<const MaskObject> hyp) {
    if (last_frame_ && frame <= *last_frame_) throw DomainError("evaluation frames must be strictly increasing");
    last_frame_ = frame;
    ++report_.frames;

    std::vector<MaskObject> g, h;
    std::optional<BinaryMask> ignore;
    for (const auto& o : gt) {
      if (o.cls == kIgnoreClass) {
        if (use_ignore_) ignore = ignore ? mask_union(*ignore, o.mask) : o.mask;
      } else {
        g.push_back(o);
      }
    }
    for (const auto& o : hyp) {
      if (o.cls != kIgnoreClass) h.push_back(o);
    }
    const FrameMatching m = match_frame(g, h);

    for (const auto& o : g) counts(o.cls).gt += 1;
    std::vector<bool> matched_gt(g.size(), false);
    for (const auto& mt : m.matches) {
      const MaskObject& go = g[mt.gt];
      const MaskObject& ho = h[mt.hyp];
      ClassCounts& c = counts(go.cls);
      c.tp += 1;
      c.soft_tp += mt.iou;
      GtState& s = state_[{go.cls, go.id}];
      if (s.last_hyp && *s.last_hyp != ho.id) c.ids += 1;
      if (s.in_gap) c.fm += 1;
      s.last_hyp = ho.id;
      s.in_gap = false;
      matched_gt[mt.gt] = true;
    }
    for (int gi : m.unmatched_gt) {
      const MaskObject& go = g[gi];
      counts(go.cls).fn += 1;
      GtState& s = state_[{go.cls, go.id}];
      if (s.last_hyp) s.in_gap = true;
    }
    for (int hi : m.unmatched_hyp) {
      const MaskObject& ho = h[hi];
      if (ignore && ignore->height() == ho.mask.height() && ignore->width() == ho.mask.width()) {
        const long long area = ho.mask.area();
        if (area > 0 && 2 * intersection_area(ho.mask, *ignore) > area) continue;
      }
      counts(ho.cls).fp += 1;
    }
  }

  MetricReport report() const {
    MetricReport r = report_;
    r.overall = {};
    for (const auto& [c, k] : r.per_class) r.overall += k;
    return r;
  }

 private:
  struct GtState {
    std::optional<int> last_hyp;
    bool in_gap = false;
  };

  ClassCounts& counts(int cls) { return report_.per_class[cls]; }

  bool use_ignore_;
  std::optional<int> last_frame_;
  std::map<std::pair<int, int>, GtState> state_;
  MetricReport report_;
};

inline MaskObject to_mask_object(const ResultRecord& r) {
  return {r.object_id, r.cls, rle_decode(r.rle, r.img_h, r.img_w)};
}

/// Evaluates one sequence given as record lists in the result-file layout.
inline MetricReport evaluate(const std::vector<ResultRecord>& gt, const std::vector<ResultRecord>& hyp,
                             bool use_ignore_regions = true) {
  std::map<int, std::pair<std::vector<MaskObject>, std::vector<MaskObject>>> frames;
  for (const auto& r : gt) frames[r.frame].first.push_back(to_mask_object(r));
  for (const auto& r : hyp) frames[r.frame].second.push_back(to_mask_object(r));
  Evaluator ev(use_ignore_regions);
  for (const auto& [f, p] : frames) ev.add_frame(f, p.first, p.second);
  return ev.report();
}

inline std::string class_name(int cls) {
  switch (cls) {
    case kClassCar:
      return "car";
    case kClassPedestrian:
      return "pedestrian";
    default:
      return "class" + std::to_string(cls);
  }
}

/// Human-readable table.
inline std::string format_report_text(const MetricReport& r) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(2);
  os << std::left << std::setw(12) << "class" << std::right << std::setw(9) << "sMOTSA" << std::setw(9) << "MOTSA"
     << std::setw(8) << "TP" << std::setw(8) << "FP" << std::setw(8) << "FN" << std::setw(6) << "IDS" << std::setw(6)
     << "FM" << '\n';
  auto row = [&](const std::string& name, const ClassCounts& c) {
    os << std::left << std::setw(12) << name << std::right << std::setw(9) << c.smotsa() << std::setw(9) << c.motsa()
       << std::setw(8) << c.tp << std::setw(8) << c.fp << std::setw(8) << c.fn << std::setw(6) << c.ids << std::setw(6)
       << c.fm << '\n';
  };
  for (const auto& [cls, c] : r.per_class) row(class_name(cls), c);
  row("all", r.overall);
  if (r.fps > 0.0) os << "fps " << r.fps << '\n';
  return os.str();
}

/// `prefix.key = value` lines.
inline std::string format_report_kv(const MetricReport& r) {
  std::ostringstream os;
  os << std::setprecision(17);
  auto block = [&](const std::string& p, const ClassCounts& c) {
    os << p << ".sMOTSA = " << c.smotsa() << '\n'
       << p << ".MOTSA = " << c.motsa() << '\n'
       << p << ".TP = " << c.tp << '\n'
       << p << ".FP = " << c.fp << '\n'
       << p << ".FN = " << c.fn << '\n'
       << p << ".IDS = " << c.ids << '\n'
       << p << ".FM = " << c.fm << '\n'
       << p << ".GT = " << c.gt << '\n'
       << p << ".softTP = " << c.soft_tp << '\n';
  };
  for (const auto& [cls, c] : r.per_class) block(class_name(cls), c);
  block("all", r.overall);
  os << "frames = " << r.frames << '\n';
  if (r.fps > 0.0) os << "fps = " << r.fps << '\n';
  return os.str();
}

}  // namespace gmphd_mots
