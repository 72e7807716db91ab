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

// Tracks a rendered scenario in memory with every pipeline preset and
// prints the metrics of each run.
//
//   track_synthetic [scenario] [seed]

#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "gmphd_mots/gmphd_mots.hpp"

int main(int argc, char** argv) {
  using namespace gmphd_mots;
  const std::string name = argc > 1 ? argv[1] : "occlusion";
  const std::uint64_t seed = argc > 2 ? std::strtoull(argv[2], nullptr, 10) : 1;
  const SynthScenario scenario = make_scenario(name, seed);
  const IngestConfig thresholds;

  for (const char* preset : {"p1", "p2", "p3", "p4", "p5"}) {
    TrackerConfig config;
    config.pipeline = pipeline_preset(preset);
    MultiClassTracker tracker({kClassCar, kClassPedestrian}, config);
    std::vector<ResultRecord> gt, hyp;
    for (int f = 0; f < scenario.frames; ++f) {
      const SynthFrame frame = render_frame(scenario, f);
      std::vector<Segment> segments;
      for (const auto& d : frame.detections) {
        if (d.confidence < thresholds.threshold(d.cls)) continue;
        segments.push_back(make_segment(f, d.cls, d.confidence, rle_decode(d.rle, d.img_h, d.img_w)));
      }
      for (const auto& o : tracker.step(f, segments, frame.image).objects) hyp.push_back(to_result_record(f, o));
      gt.insert(gt.end(), frame.gt.begin(), frame.gt.end());
    }
    const ClassCounts c = evaluate(gt, hyp).overall;
    std::cout << preset << "  sMOTSA " << c.smotsa() << "  MOTSA " << c.motsa() << "  IDS " << c.ids << "  FM " << c.fm
              << "  FP " << c.fp << "  FN " << c.fn << '\n';
  }
}
