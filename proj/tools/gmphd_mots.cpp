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

// Command-line front end: track, ablate, eval, viz, synth.
// Exit codes: 0 success, 1 usage error, 2 data error.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <opencv2/imgcodecs.hpp>

#include "gmphd_mots/gmphd_mots.hpp"

namespace fs = std::filesystem;
using namespace gmphd_mots;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string substitute_seq(std::string pattern, const std::string& seq) {
  const std::string key = "{seq}";
  for (auto pos = pattern.find(key); pos != std::string::npos; pos = pattern.find(key, pos + seq.size())) {
    pattern.replace(pos, key.size(), seq);
  }
  return pattern;
}

std::vector<int> parse_classes(const std::string& list) {
  std::vector<int> out;
  std::stringstream ss(list);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok == "car" || tok == "1") {
      out.push_back(kClassCar);
    } else if (tok == "ped" || tok == "pedestrian" || tok == "2") {
      out.push_back(kClassPedestrian);
    } else if (!tok.empty()) {
      throw UsageError("unknown class '" + tok + "' (expected car, ped)");
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  if (out.empty()) throw UsageError("--classes is empty");
  return out;
}

struct TrackOptions {
  std::string dets;
  std::string imgs;
  std::string out;
  std::string config;
  std::string pipeline = "p5";
  std::string classes = "car,ped";
  std::vector<std::string> seqs;
  int jobs = 0;
};

struct SeqSummary {
  std::string seq;
  long long frames = 0;
  long long objects = 0;
  double seconds = 0.0;
  std::string error;
};

SeqSummary track_sequence(const std::string& seq, const TrackOptions& opt, const Config& cfg,
                          const std::vector<int>& classes) {
  SeqSummary sum;
  sum.seq = seq;
  const std::string dets_path = substitute_seq(opt.dets, seq);
  const std::string imgs_pattern = substitute_seq(opt.imgs, seq);
  std::ifstream in(dets_path);
  if (!in) throw IoError("cannot open '" + dets_path + "'");
  const fs::path out_path = fs::path(opt.out) / (seq + ".txt");
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + out_path.string() + "'");

  MultiClassTracker tracker(classes, cfg.tracker);
  DetectionReader reader(in, cfg.ingest);
  std::optional<int> prev;
  auto run = [&](int frame, const std::vector<Segment>& segs) {
    cv::Mat gray;
    const bool wanted = std::any_of(segs.begin(), segs.end(), [&](const Segment& s) {
      return std::find(classes.begin(), classes.end(), s.cls) != classes.end();
    });
    if (tracker.needs_appearance() && wanted) {
      gray = load_frame(imgs_pattern, frame, segs.front().mask.height(), segs.front().mask.width());
    }
    const auto t0 = std::chrono::steady_clock::now();
    FrameResult r = tracker.step(frame, segs, gray);
    sum.seconds += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    ++sum.frames;
    sum.objects += static_cast<long long>(r.objects.size());
    write_results(out, std::vector<FrameResult>{std::move(r)});
  };
  while (auto batch = reader.next()) {
    if (prev) {
      for (int f = *prev + 1; f < batch->frame; ++f) run(f, {});
    }
    run(batch->frame, batch->segments);
    prev = batch->frame;
  }
  if (!out) throw IoError("write failed for '" + out_path.string() + "'");
  return sum;
}

Config track_config(const TrackOptions& opt) {
  Config cfg;
  if (!opt.config.empty()) cfg = load_config(opt.config);
  try {
    cfg.tracker.pipeline = pipeline_preset(opt.pipeline);
  } catch (const DomainError& e) {
    throw UsageError(e.what());
  }
  return cfg;
}

std::vector<std::string> resolve_seqs(const TrackOptions& opt) {
  if (!opt.seqs.empty()) return opt.seqs;
  if (opt.dets.find("{seq}") != std::string::npos) throw UsageError("--dets contains {seq} but no --seqs given");
  return {fs::path(opt.dets).stem().string()};
}

/// Tracks every sequence on a worker pool. Failures are recorded per sequence.
std::vector<SeqSummary> track_all(const TrackOptions& opt, const std::vector<std::string>& seqs) {
  const std::vector<int> classes = parse_classes(opt.classes);
  const Config cfg = track_config(opt);
  fs::create_directories(opt.out);

  std::vector<SeqSummary> results(seqs.size());
  std::atomic<std::size_t> next{0};
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t jobs = std::min<std::size_t>(seqs.size(), opt.jobs > 0 ? static_cast<std::size_t>(opt.jobs) : hw);
  auto worker = [&] {
    for (std::size_t k = next++; k < seqs.size(); k = next++) {
      try {
        results[k] = track_sequence(seqs[k], opt, cfg, classes);
      } catch (const std::exception& e) {
        results[k].seq = seqs[k];
        results[k].error = e.what();
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    for (std::size_t j = 0; j < jobs; ++j) pool.emplace_back(worker);
  }
  return results;
}

int cmd_track(const TrackOptions& opt) {
  const auto results = track_all(opt, resolve_seqs(opt));
  int rc = 0;
  long long frames = 0;
  double seconds = 0.0;
  for (const auto& s : results) {
    if (!s.error.empty()) {
      std::cerr << "error: sequence " << s.seq << ": " << s.error << '\n';
      rc = 2;
      continue;
    }
    frames += s.frames;
    seconds += s.seconds;
    std::cout << "seq " << s.seq << " frames " << s.frames << " masks " << s.objects << " fps "
              << (s.seconds > 0 ? s.frames / s.seconds : 0.0) << '\n';
  }
  std::cout << "total frames " << frames << " fps " << (seconds > 0 ? frames / seconds : 0.0) << '\n';
  return rc;
}

/// Runs each preset into <out>/<preset>/ and evaluates it against --gt.
int cmd_ablate(TrackOptions opt, const std::string& gt, const std::vector<std::string>& pipelines) {
  const std::vector<std::string> seqs = resolve_seqs(opt);
  if (seqs.size() > 1 && gt.find("{seq}") == std::string::npos) {
    throw UsageError("--gt must contain {seq} when several sequences are given");
  }
  const fs::path root = opt.out;
  std::ostringstream kv;
  std::cout << std::left << std::setw(10) << "pipeline" << std::right << std::setw(9) << "sMOTSA" << std::setw(9)
            << "MOTSA" << std::setw(7) << "IDS" << std::setw(7) << "FM" << std::setw(10) << "fps" << '\n';
  for (const auto& p : pipelines) {
    opt.pipeline = p;
    opt.out = (root / p).string();
    MetricReport total;
    long long frames = 0;
    double seconds = 0.0;
    for (const auto& s : track_all(opt, seqs)) {
      if (!s.error.empty()) throw IoError("pipeline " + p + ", sequence " + s.seq + ": " + s.error);
      frames += s.frames;
      seconds += s.seconds;
      total += evaluate(read_results(fs::path(substitute_seq(gt, s.seq))), read_results(fs::path(opt.out) / (s.seq + ".txt")));
    }
    total.fps = seconds > 0 ? static_cast<double>(frames) / seconds : 0.0;
    std::cout << std::left << std::setw(10) << p << std::right << std::fixed << std::setprecision(2) << std::setw(9)
              << total.overall.smotsa() << std::setw(9) << total.overall.motsa() << std::setw(7) << total.overall.ids
              << std::setw(7) << total.overall.fm << std::setw(10) << std::setprecision(1) << total.fps << '\n';
    std::istringstream lines(format_report_kv(total));
    for (std::string line; std::getline(lines, line);) kv << p << '.' << line << '\n';
  }
  std::ofstream out(root / "ablation.txt", std::ios::binary);
  if (!out) throw IoError("cannot write '" + (root / "ablation.txt").string() + "'");
  out << kv.str();
  return 0;
}

int cmd_eval(const std::string& gt, const std::string& res, const std::string& report, bool no_ignore) {
  MetricReport total;
  if (fs::is_directory(gt)) {
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(gt)) {
      if (e.is_regular_file() && e.path().extension() == ".txt") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw IoError("no .txt files under '" + gt + "'");
    for (const auto& f : files) {
      const fs::path r = fs::path(res) / f.filename();
      const auto hyp = fs::exists(r) ? read_results(r) : std::vector<ResultRecord>{};
      total += evaluate(read_results(f), hyp, !no_ignore);
    }
  } else {
    total = evaluate(read_results(fs::path(gt)), read_results(fs::path(res)), !no_ignore);
  }
  std::cout << format_report_text(total);
  if (!report.empty()) {
    std::ofstream out(report, std::ios::binary);
    if (!out) throw IoError("cannot write '" + report + "'");
    out << format_report_kv(total);
  }
  return 0;
}

int cmd_viz(const std::string& res, const std::string& imgs, const std::string& out_dir) {
  std::map<int, std::vector<ResultRecord>> by_frame;
  for (auto& r : read_results(fs::path(res))) by_frame[r.frame].push_back(std::move(r));
  const int last = by_frame.empty() ? -1 : by_frame.rbegin()->first;
  fs::create_directories(out_dir);
  for (int f = 0;; ++f) {
    const std::string path = expand_frame_pattern(imgs, f);
    if (!fs::exists(path)) {
      if (f > last) break;
      std::cerr << "warning: frame " << f << ": missing image '" << path << "', skipped\n";
      continue;
    }
    cv::Mat img = cv::imread(path, cv::IMREAD_COLOR);
    if (img.empty()) {
      std::cerr << "warning: frame " << f << ": cannot decode '" << path << "', skipped\n";
      continue;
    }
    const auto it = by_frame.find(f);
    const cv::Mat drawn = it == by_frame.end() ? img : overlay(img, it->second);
    const std::string target = (fs::path(out_dir) / expand_frame_pattern("%06d.png", f)).string();
    if (!cv::imwrite(target, drawn)) throw IoError("cannot write '" + target + "'");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Online multi-object tracking and segmentation"};
  app.require_subcommand(1);

  TrackOptions topt;
  auto* track = app.add_subcommand("track", "Track segments and write result files");
  track->add_option("--dets", topt.dets, "Detections file; may contain {seq}")->required();
  track->add_option("--imgs", topt.imgs, "Image pattern with %06d; may contain {seq}")->required();
  track->add_option("--out", topt.out, "Output directory")->required();
  track->add_option("--config", topt.config, "key = value config file")->check(CLI::ExistingFile);
  track->add_option("--pipeline", topt.pipeline, "Pipeline preset p1..p5")
      ->check(CLI::IsMember({"p1", "p2", "p3", "p4", "p5"}));
  track->add_option("--classes", topt.classes, "Comma-separated classes (car, ped)");
  track->add_option("--seqs", topt.seqs, "Sequence names substituted for {seq}")->delimiter(',');
  track->add_option("--jobs", topt.jobs, "Sequences processed in parallel (0 = all cores)")->check(CLI::NonNegativeNumber);

  TrackOptions aopt;
  std::string agt;
  std::vector<std::string> apipelines{"p1", "p2", "p3", "p4", "p5"};
  auto* ablate = app.add_subcommand("ablate", "Track with several presets and evaluate each");
  ablate->add_option("--dets", aopt.dets, "Detections file; may contain {seq}")->required();
  ablate->add_option("--imgs", aopt.imgs, "Image pattern with %06d; may contain {seq}")->required();
  ablate->add_option("--gt", agt, "Ground-truth file; may contain {seq}")->required();
  ablate->add_option("--out", aopt.out, "Output directory (one subdirectory per preset)")->required();
  ablate->add_option("--config", aopt.config, "key = value config file")->check(CLI::ExistingFile);
  ablate->add_option("--pipelines", apipelines, "Comma-separated presets")
      ->delimiter(',')
      ->check(CLI::IsMember({"p1", "p2", "p3", "p4", "p5"}));
  ablate->add_option("--classes", aopt.classes, "Comma-separated classes (car, ped)");
  ablate->add_option("--seqs", aopt.seqs, "Sequence names substituted for {seq}")->delimiter(',');
  ablate->add_option("--jobs", aopt.jobs, "Sequences processed in parallel (0 = all cores)")->check(CLI::NonNegativeNumber);

  std::string gt, res, report;
  bool no_ignore = false;
  auto* eval = app.add_subcommand("eval", "Compute sMOTSA, MOTSA, TP, FP, FN, IDS, FM");
  eval->add_option("--gt", gt, "Ground-truth file or directory")->required()->check(CLI::ExistingPath);
  eval->add_option("--res", res, "Result file or directory")->required()->check(CLI::ExistingPath);
  eval->add_option("--report", report, "Also write a key = value report here");
  eval->add_flag("--no-ignore", no_ignore, "Count false positives inside ignore regions");

  std::string vres, vimgs, vout;
  auto* viz = app.add_subcommand("viz", "Write per-frame overlay PNGs");
  viz->add_option("--res", vres, "Result file")->required()->check(CLI::ExistingFile);
  viz->add_option("--imgs", vimgs, "Image pattern with %06d")->required();
  viz->add_option("--out", vout, "Output directory")->required();

  std::string scenario, sout;
  std::uint64_t seed = 0;
  int frames = 0;
  double fp_rate = -1.0, dropout = 0.0, jitter = 0.0;
  auto* synth = app.add_subcommand("synth", "Render a synthetic scenario");
  synth->add_option("--scenario", scenario, "crossing, occlusion, clutter, parallel")
      ->required()
      ->check(CLI::IsMember({"crossing", "occlusion", "clutter", "parallel"}));
  synth->add_option("--seed", seed, "Random seed");
  synth->add_option("--out", sout, "Output directory")->required();
  synth->add_option("--frames", frames, "Override the frame count")->check(CLI::PositiveNumber);
  synth->add_option("--fp-rate", fp_rate, "Spurious segments per true segment")->check(CLI::Range(0.0, 10.0));
  synth->add_option("--dropout", dropout, "Probability of missing a true segment")->check(CLI::Range(0.0, 1.0));
  synth->add_option("--jitter", jitter, "Std-dev of the detected mask offset in px")->check(CLI::NonNegativeNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (*track) return cmd_track(topt);
    if (*ablate) return cmd_ablate(aopt, agt, apipelines);
    if (*eval) return cmd_eval(gt, res, report, no_ignore);
    if (*viz) return cmd_viz(vres, vimgs, vout);
    if (*synth) {
      SynthScenario s = make_scenario(scenario, seed);
      if (frames > 0) s.frames = frames;
      if (fp_rate >= 0.0) s.fp_rate = fp_rate;
      s.dropout = dropout;
      s.jitter_px = jitter;
      write_scenario(s, sout);
      return 0;
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}
