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

// Acceptance suite. Prints one PASS / FAIL / SKIP line per criterion and
// exits non-zero if any criterion fails.
//
// Criterion 9 needs the KITTI-MOTS training data and a detections directory:
//   GMPHD_MOTS_KITTI_DIR   contains instances_txt/<seq>.txt and
//                          training/image_02/<seq>/%06d.png
//   GMPHD_MOTS_DETS_DIR    contains <seq>.txt in the detections format
// It is skipped when either variable is unset.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gmphd_mots/gmphd_mots.hpp"
#include "oracles.hpp"

namespace {

using namespace gmphd_mots;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

// Pinned tolerances.
constexpr double kKalmanRelTol = 1e-9;
constexpr double kKalmanSeconds = 5.0;
constexpr double kAssignmentSeconds = 30.0;
constexpr double kSafTol = 1e-9;
constexpr int kShiftRange = 8;
constexpr double kMinDatasetFps = 5.0;
constexpr double kReportBand = 5.0;
// Reference car sMOTSA on the KITTI-MOTS training split for p1, p2, p5.
constexpr double kReferenceCarSmotsa[3] = {73.7, 76.3, 77.8};

enum class Status { pass, fail, skip };

struct Outcome {
  Status status = Status::pass;
  std::string detail;
};

class Checker {
 public:
  void require(bool ok, const std::string& what) {
    if (!ok && failures_.size() < 3) failures_.push_back(what);
    if (!ok) ++count_;
  }
  Outcome outcome(const std::string& summary) const {
    if (count_ == 0) return {Status::pass, summary};
    std::string d = std::to_string(count_) + " violation(s): ";
    for (std::size_t i = 0; i < failures_.size(); ++i) d += (i ? "; " : "") + failures_[i];
    return {Status::fail, d};
  }

 private:
  std::vector<std::string> failures_;
  long count_ = 0;
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(double v, int prec = 3) {
  std::ostringstream os;
  os.precision(prec);
  os << std::fixed << v;
  return os.str();
}

std::string sci(double v) {
  std::ostringstream os;
  os.precision(2);
  os << std::scientific << v;
  return os.str();
}

// 1 ---------------------------------------------------------------------------

double rel_err(const Eigen::Vector4d& a, const oracle::Vec4& b) {
  double diff = 0.0, scale = 0.0;
  for (int i = 0; i < 4; ++i) {
    diff = std::max(diff, std::abs(a(i) - b[i]));
    scale = std::max(scale, std::abs(b[i]));
  }
  return scale > 0.0 ? diff / scale : diff;
}

double rel_err(const Eigen::Matrix4d& a, const oracle::Mat4& b) {
  double diff = 0.0, scale = 0.0;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      diff = std::max(diff, std::abs(a(i, j) - b[i][j]));
      scale = std::max(scale, std::abs(b[i][j]));
    }
  return scale > 0.0 ? diff / scale : diff;
}

Outcome kalman_equivalence() {
  const auto t0 = Clock::now();
  Checker ck;
  const ModelParams params;
  const oracle::ScalarKalman k;
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> start(0.0, 1000.0);
  std::normal_distribution<double> noise(0.0, 8.0), drift(0.0, 3.0);
  double worst = 0.0;
  int cycles = 0;
  for (int seq = 0; seq < 10; ++seq) {
    const double x0 = start(rng), y0 = start(rng);
    GaussianComponent c = init_component({x0, y0}, 0.9, params);
    oracle::Vec4 m{x0, y0, 0, 0};
    oracle::Mat4 P = k.P0;
    double tx = x0, ty = y0, vx = drift(rng), vy = drift(rng);
    for (int t = 0; t < 100; ++t, ++cycles) {
      tx += vx;
      ty += vy;
      const double zx = tx + noise(rng), zy = ty + noise(rng);
      c = predict(c, params);
      k.predict(m, P);
      const double lik = likelihood(c, {zx, zy}, params);
      const double want_lik = oracle::normal_pdf2(zx, zy, m[0], m[1], P[0][0] + k.R[0][0],
                                                             P[0][1] + k.R[0][1], P[1][1] + k.R[1][1]);
      c = update(c, {zx, zy}, params);
      k.update(m, P, zx, zy);
      const double e = std::max({rel_err(c.mean, m), rel_err(c.cov, P),
                                 want_lik > 0 ? std::abs(lik - want_lik) / want_lik : std::abs(lik)});
      worst = std::max(worst, e);
      ck.require(e < kKalmanRelTol, "seq " + std::to_string(seq) + " cycle " + std::to_string(t) + " rel err " + sci(e));
      const double asym = (c.cov - c.cov.transpose()).cwiseAbs().maxCoeff();
      ck.require(asym <= kKalmanRelTol * c.cov.cwiseAbs().maxCoeff(), "asymmetric covariance");
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(c.cov);
      ck.require(es.eigenvalues().minCoeff() > 0.0, "covariance not positive definite");
    }
  }
  const double secs = seconds_since(t0);
  ck.require(secs < kKalmanSeconds, "runtime " + fmt(secs) + " s");
  return ck.outcome(std::to_string(cycles) + " cycles, max rel err " + sci(worst) + ", " + fmt(secs) + " s");
}

// 2 ---------------------------------------------------------------------------

Outcome assignment_optimality() {
  const auto t0 = Clock::now();
  Checker ck;
  std::mt19937_64 rng(202);
  std::uniform_int_distribution<int> dim(1, 8), coin(0, 4);
  // multiples of 1/1024 in [0, 10000]: every sum of up to 8 entries is exact
  std::uniform_int_distribution<long> units(0, 10000L * 1024);
  int forbidden_seen = 0;
  for (int t = 0; t < 500; ++t) {
    const int r = dim(rng), c = dim(rng);
    std::vector<std::vector<double>> m(r, std::vector<double>(c));
    CostMatrix cm(r, c);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < c; ++j) {
        m[i][j] = coin(rng) == 0 ? kForbiddenCost : static_cast<double>(units(rng)) / 1024.0;
        forbidden_seen += m[i][j] == kForbiddenCost;
        cm(i, j) = m[i][j];
      }
    const Assignment got = solve(cm);
    const auto want = oracle::brute_force_assignment(m);
    ck.require(got.total_cost == want.surviving_total,
               "matrix " + std::to_string(t) + ": cost " + std::to_string(got.total_cost) + " vs " +
                   std::to_string(want.surviving_total));
    ck.require(got.pairs == want.pairs, "matrix " + std::to_string(t) + ": pairs differ");
    for (auto [i, j] : got.pairs) ck.require(m[i][j] < kForbiddenCost, "forbidden pair kept");
  }
  const double secs = seconds_since(t0);
  ck.require(secs < kAssignmentSeconds, "runtime " + fmt(secs) + " s");
  return ck.outcome("500 matrices up to 8x8 (" + std::to_string(forbidden_seen) + " forbidden entries), " + fmt(secs) +
                    " s");
}

// 3 ---------------------------------------------------------------------------

BinaryMask mask_of(const oracle::Pixels& p) {
  DenseMask d{p.h, p.w, std::vector<std::uint8_t>(p.v.begin(), p.v.end())};
  return from_dense(d);
}

Outcome mask_codec() {
  Checker ck;
  std::mt19937_64 rng(303);
  std::uniform_int_distribution<int> side(1, 64);
  std::uniform_real_distribution<double> density(0.0, 1.0);
  for (int t = 0; t < 1000; ++t) {
    const int h = side(rng), w = side(rng);
    const auto pa = t % 2 ? oracle::random_pixels(rng, h, w, density(rng)) : oracle::random_blob_pixels(rng, h, w);
    const auto pb = t % 3 ? oracle::random_pixels(rng, h, w, density(rng)) : oracle::random_blob_pixels(rng, h, w);
    const BinaryMask a = mask_of(pa), b = mask_of(pb);
    const std::string s = rle_encode(a);
    ck.require(s == oracle::encode_string(oracle::runs_of(pa)), "encoding differs on mask " + std::to_string(t));
    const BinaryMask back = rle_decode(s, h, w);
    ck.require(back == a && rle_encode(back) == s, "round trip failed on mask " + std::to_string(t));
    ck.require(mask_iou(a, b) == oracle::iou(pa, pb), "IoU differs on pair " + std::to_string(t));
  }
  // 6x1 strip against a copy shifted by two columns: IoU exactly 0.5
  const std::vector<MaskObject> gt{{1, kClassCar, box_mask(4, 10, {0, 0, 6, 1})}};
  const std::vector<MaskObject> hyp{{2, kClassCar, box_mask(4, 10, {2, 0, 6, 1})}};
  const double boundary = mask_iou(gt[0].mask, hyp[0].mask);
  ck.require(boundary == 0.5, "boundary fixture IoU " + std::to_string(boundary));
  ck.require(match_frame(gt, hyp).matches.empty(), "IoU 0.5 was matched");
  return ck.outcome("1000 masks up to 64x64 round-trip, IoU exact, IoU 0.5 unmatched");
}

// 4 ---------------------------------------------------------------------------

Outcome saf_arithmetic() {
  Checker ck;
  const double one = fused_cost(1.0);
  const double e1 = fused_cost(std::exp(-1.0));
  ck.require(one == 0.0, "cost(1) = " + std::to_string(one));
  ck.require(std::abs(e1 - 100.0) <= kSafTol, "cost(e^-1) = " + std::to_string(e1));
  for (double p : {1e-39, 1e-40, 1e-300, 0.0}) ck.require(fused_cost(p) == kForbiddenCost, "cost(" + std::to_string(p) + ") not capped");

  // through the matrix path: normalized pm = appr = 1
  AffinityMatrix pm(2, 2), ap(2, 2);
  pm.values << 0.3, 0.3, 0.3, 0.3;
  ap.values << 0.7, 0.7, 0.7, 0.7;
  const CostMatrix c = fuse(minmax_normalize(pm), minmax_normalize(ap));
  ck.require(c.values.cwiseAbs().maxCoeff() == 0.0, "constant affinities should cost 0");
  AffinityMatrix pm2(1, 3), ap2(1, 3);
  pm2.values << 1.0, std::exp(-1.0), 1e-39;
  ap2.values << 1.0, 1.0, 1.0;
  const CostMatrix c2 = fuse(pm2, ap2);
  ck.require(c2(0, 0) == 0.0 && std::abs(c2(0, 1) - 100.0) <= kSafTol && c2(0, 2) == kForbiddenCost,
             "matrix fuse arithmetic");
  return ck.outcome("cost(1) = 0, cost(e^-1) - 100 = " + sci(e1 - 100.0) + ", cost(<=1e-39) = 10000");
}

// 5 ---------------------------------------------------------------------------

cv::Mat circshift(const cv::Mat& in, int dy, int dx) {
  cv::Mat out(in.size(), in.type());
  for (int r = 0; r < in.rows; ++r)
    for (int c = 0; c < in.cols; ++c)
      out.at<double>(r, c) = in.at<double>(((r - dy) % in.rows + in.rows) % in.rows, ((c - dx) % in.cols + in.cols) % in.cols);
  return out;
}

cv::Mat blocky(std::mt19937_64& rng, int size, int cell) {
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  const int cells = (size + cell - 1) / cell;
  std::vector<double> v(static_cast<std::size_t>(cells * cells));
  for (auto& x : v) x = u(rng);
  cv::Mat p(size, size, CV_64F);
  for (int r = 0; r < size; ++r)
    for (int c = 0; c < size; ++c) p.at<double>(r, c) = v[static_cast<std::size_t>((r / cell) * cells + c / cell)];
  return p;
}

Outcome kcf_translation() {
  Checker ck;
  std::mt19937_64 rng(505);
  KcfParams params;
  params.cosine_window = false;
  int shifts = 0;
  for (int trial = 0; trial < 3; ++trial) {
    const cv::Mat x = blocky(rng, 64, 2 + 2 * trial);
    const KcfModel model = train_patch(x, params);
    for (int dy = -kShiftRange; dy <= kShiftRange; ++dy)
      for (int dx = -kShiftRange; dx <= kShiftRange; ++dx, ++shifts) {
        cv::Point loc;
        cv::minMaxLoc(raw_response_patch(model, circshift(x, dy, dx)), nullptr, nullptr, nullptr, &loc);
        ck.require(loc == cv::Point(32 + dx, 32 + dy),
                   "shift " + std::to_string(dy) + "," + std::to_string(dx) + " peaked at " + std::to_string(loc.y - 32) +
                       "," + std::to_string(loc.x - 32));
      }
  }
  int wins = 0;
  std::uniform_int_distribution<int> px(0, 255);
  for (int trial = 0; trial < 100; ++trial) {
    cv::Mat frame;
    blocky(rng, 96, 4).convertTo(frame, CV_8U, 255.0, 127.5);
    const BBox box{8, 8, 48, 40};
    const KcfModel model = train(frame, box);
    cv::Mat noise(96, 96, CV_8UC1);
    for (int r = 0; r < 96; ++r)
      for (int c = 0; c < 96; ++c) noise.at<std::uint8_t>(r, c) = static_cast<std::uint8_t>(px(rng));
    wins += appearance_affinity(model, frame, box) > appearance_affinity(model, noise, box);
  }
  ck.require(wins == 100, "self beat noise in " + std::to_string(wins) + "/100 trials");
  return ck.outcome(std::to_string(shifts) + " circular shifts within +-8 px recovered, self > noise " +
                    std::to_string(wins) + "/100");
}

// 6 ---------------------------------------------------------------------------

struct ScenarioRun {
  MetricReport report;
  std::set<int> ids;
};

ScenarioRun run_scenario(const SynthScenario& s, const char* pipeline) {
  TrackerConfig cfg;
  cfg.pipeline = pipeline_preset(pipeline);
  MultiClassTracker tracker({kClassCar, kClassPedestrian}, cfg);
  std::vector<ResultRecord> gt, hyp;
  ScenarioRun out;
  for (int f = 0; f < s.frames; ++f) {
    const SynthFrame fr = render_frame(s, f);
    std::vector<Segment> segs;
    for (const auto& d : fr.detections) segs.push_back(make_segment(f, d.cls, d.confidence, rle_decode(d.rle, d.img_h, d.img_w)));
    for (const auto& o : tracker.step(f, segs, fr.image).objects) {
      hyp.push_back(to_result_record(f, o));
      out.ids.insert(hyp.back().object_id);
    }
    gt.insert(gt.end(), fr.gt.begin(), fr.gt.end());
  }
  out.report = evaluate(gt, hyp);
  return out;
}

Outcome occlusion_recovery() {
  Checker ck;
  std::string detail;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const SynthScenario s = make_scenario("occlusion", seed);
    const ScenarioRun p5 = run_scenario(s, "p5"), p1 = run_scenario(s, "p1");
    const std::string tag = "seed " + std::to_string(seed);
    ck.require(p5.report.overall.ids == 0, tag + ": p5 IDS " + std::to_string(p5.report.overall.ids));
    ck.require(p5.ids.size() == 1, tag + ": p5 used " + std::to_string(p5.ids.size()) + " ids");
    ck.require(p1.report.overall.ids >= 1, tag + ": p1 IDS " + std::to_string(p1.report.overall.ids));
    if (seed == 1) {
      detail = "seed 1: p5 IDS " + std::to_string(p5.report.overall.ids) + " with " + std::to_string(p5.ids.size()) +
               " id, p1 IDS " + std::to_string(p1.report.overall.ids);
    }
  }
  return ck.outcome(detail + "; seeds 1-5 agree");
}

// 7 ---------------------------------------------------------------------------

Outcome metric_fixtures() {
  Checker ck;
  auto ten = [](auto hyp_at) {
    Evaluator ev;
    for (int f = 0; f < 10; ++f) {
      const std::vector<MaskObject> gt{{1001, kClassCar, box_mask(20, 40, {2 + f, 2, 10, 10})}};
      const std::vector<MaskObject> hyp = hyp_at(f);
      ev.add_frame(f, gt, hyp);
    }
    return ev.report().overall;
  };
  auto at = [](int id, int f) { return MaskObject{id, kClassCar, box_mask(20, 40, {2 + f, 2, 10, 10})}; };
  const ClassCounts sw = ten([&](int f) { return std::vector<MaskObject>{at(f < 5 ? 5 : 6, f)}; });
  ck.require(sw.ids == 1 && sw.motsa() == 90.0, "switch fixture: IDS " + std::to_string(sw.ids) + " MOTSA " +
                                                     std::to_string(sw.motsa()));
  const ClassCounts gap = ten([&](int f) { return f == 5 ? std::vector<MaskObject>{} : std::vector<MaskObject>{at(5, f)}; });
  ck.require(gap.fm == 1 && gap.fn == 1 && gap.ids == 0, "gap fixture: FM " + std::to_string(gap.fm));
  const SynthScenario s = make_scenario("crossing", 1);
  std::vector<ResultRecord> gt;
  for (int f = 0; f < s.frames; ++f) {
    const auto fr = render_frame(s, f);
    gt.insert(gt.end(), fr.gt.begin(), fr.gt.end());
  }
  const ClassCounts self = evaluate(gt, gt).overall;
  ck.require(self.smotsa() == 100.0, "self-evaluation sMOTSA " + std::to_string(self.smotsa()));
  return ck.outcome("MOTSA " + fmt(sw.motsa(), 1) + " with IDS " + std::to_string(sw.ids) + ", FM " +
                    std::to_string(gap.fm) + " with one gap, self sMOTSA " + fmt(self.smotsa(), 1));
}

// 8 ---------------------------------------------------------------------------

Outcome merge_threshold() {
  Checker ck;
  constexpr int h = 10, w = 120;
  const BBox a{0, 5, 70, 1}, b41{29, 5, 71, 1}, b39{31, 5, 69, 1};
  const double iou41 = mask_iou(box_mask(h, w, a), box_mask(h, w, b41));
  const double iou39 = mask_iou(box_mask(h, w, a), box_mask(h, w, b39));
  ck.require(iou41 == 0.41 && iou39 == 0.39, "fixture IoUs " + std::to_string(iou41) + ", " + std::to_string(iou39));
  const cv::Mat img(h, w, CV_8UC1, cv::Scalar(128));
  auto survivors = [&](const BBox& other) {
    TrackerConfig cfg;
    cfg.pipeline = pipeline_preset("p4");
    cfg.t_m = 0.4;
    Tracker t(kClassCar, cfg);
    const std::vector<Segment> segs{make_segment(0, kClassCar, 0.9, box_mask(h, w, a)),
                                    make_segment(0, kClassCar, 0.8, box_mask(h, w, other))};
    return t.step(0, segs, img).objects.size();
  };
  const std::size_t n41 = survivors(b41), n39 = survivors(b39);
  ck.require(n41 == 1, "IoU 0.41 left " + std::to_string(n41) + " masks");
  ck.require(n39 == 2, "IoU 0.39 left " + std::to_string(n39) + " masks");
  return ck.outcome("IoU 0.41 merged to " + std::to_string(n41) + " mask, IoU 0.39 kept " + std::to_string(n39));
}

// 9 ---------------------------------------------------------------------------

struct DatasetScore {
  ClassCounts car;
  double fps = 0.0;
};

DatasetScore run_dataset(const fs::path& root, const fs::path& dets, const std::vector<std::string>& seqs,
                         const char* pipeline) {
  TrackerConfig cfg;
  cfg.pipeline = pipeline_preset(pipeline);
  MetricReport total;
  long long frames = 0;
  double secs = 0.0;
  for (const auto& seq : seqs) {
    const auto gt = read_results(root / "instances_txt" / (seq + ".txt"));
    auto segments = read_detections(dets / (seq + ".txt"));
    int last = -1;
    for (const auto& r : gt) last = std::max(last, r.frame);
    if (!segments.empty()) last = std::max(last, segments.rbegin()->first);
    const std::string pattern = (root / "training" / "image_02" / seq / "%06d.png").string();
    Tracker tracker(kClassCar, cfg);
    std::vector<ResultRecord> hyp;
    for (int f = 0; f <= last; ++f) {
      std::vector<Segment> cars;
      if (auto it = segments.find(f); it != segments.end()) {
        for (auto& s : it->second)
          if (s.cls == kClassCar) cars.push_back(std::move(s));
      }
      cv::Mat gray;
      if (cfg.pipeline.needs_appearance() && !cars.empty()) {
        gray = load_frame(pattern, f, cars[0].mask.height(), cars[0].mask.width());
      }
      const auto t0 = Clock::now();
      const FrameResult r = tracker.step(f, cars, gray);
      secs += seconds_since(t0);
      ++frames;
      for (const auto& o : r.objects) hyp.push_back(to_result_record(f, o));
    }
    std::vector<ResultRecord> gt_cars;
    for (const auto& r : gt)
      if (r.cls == kClassCar || r.cls == kIgnoreClass) gt_cars.push_back(r);
    total += evaluate(gt_cars, hyp);
  }
  DatasetScore out;
  if (auto it = total.per_class.find(kClassCar); it != total.per_class.end()) out.car = it->second;
  out.fps = secs > 0.0 ? static_cast<double>(frames) / secs : 0.0;
  return out;
}

Outcome dataset_ablation() {
  const char* root_env = std::getenv("GMPHD_MOTS_KITTI_DIR");
  const char* dets_env = std::getenv("GMPHD_MOTS_DETS_DIR");
  if (!root_env || !dets_env) return {Status::skip, "set GMPHD_MOTS_KITTI_DIR and GMPHD_MOTS_DETS_DIR to run"};
  const fs::path root(root_env), dets(dets_env);
  std::vector<std::string> seqs;
  for (const auto& e : fs::directory_iterator(root / "instances_txt")) {
    if (e.path().extension() == ".txt" && fs::exists(dets / e.path().filename())) seqs.push_back(e.path().stem().string());
  }
  std::sort(seqs.begin(), seqs.end());
  if (seqs.empty()) return {Status::fail, "no sequence has both ground truth and detections"};
  Checker ck;
  const char* names[3] = {"p1", "p2", "p5"};
  DatasetScore s[3];
  for (int k = 0; k < 3; ++k) s[k] = run_dataset(root, dets, seqs, names[k]);
  ck.require(s[2].car.smotsa() > s[1].car.smotsa() && s[1].car.smotsa() > s[0].car.smotsa(), "car sMOTSA not p5 > p2 > p1");
  ck.require(s[2].car.ids < s[1].car.ids && s[1].car.ids < s[0].car.ids, "car IDS not p5 < p2 < p1");
  ck.require(s[2].fps >= kMinDatasetFps, "p5 runs at " + fmt(s[2].fps, 1) + " fps");
  std::string d = std::to_string(seqs.size()) + " seqs;";
  for (int k = 0; k < 3; ++k) {
    const double delta = s[k].car.smotsa() - kReferenceCarSmotsa[k];
    d += std::string(" ") + names[k] + " sMOTSA " + fmt(s[k].car.smotsa(), 1) + " (ref " + fmt(kReferenceCarSmotsa[k], 1) +
         (std::abs(delta) <= kReportBand ? ", within" : ", outside") + " +-5) IDS " + std::to_string(s[k].car.ids) + ";";
  }
  d += " p5 " + fmt(s[2].fps, 1) + " fps";
  std::cout << "    " << d << '\n';
  return ck.outcome(d);
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"filter matches the scalar Kalman oracle", kalman_equivalence},
      {"assignment is optimal against exhaustive search", assignment_optimality},
      {"mask codec and IoU", mask_codec},
      {"fused cost arithmetic", saf_arithmetic},
      {"correlation filter translation and self-match", kcf_translation},
      {"occlusion keeps one identity with track relinking", occlusion_recovery},
      {"metric fixtures", metric_fixtures},
      {"merge threshold", merge_threshold},
      {"dataset ablation ordering", dataset_ablation},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {Status::fail, std::string("exception: ") + e.what()};
    }
    const char* tag = o.status == Status::pass ? "PASS" : o.status == Status::fail ? "FAIL" : "SKIP";
    failed += o.status == Status::fail;
    std::cout << "[" << tag << "] criterion " << (i + 1) << ": " << criteria[i].first << " -- " << o.detail << std::endl;
  }
  std::cout << (failed ? std::to_string(failed) + " criterion(s) failed" : std::string("all criteria passed or skipped"))
            << std::endl;
  return failed ? 1 : 0;
}
