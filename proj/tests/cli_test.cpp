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

// End-to-end runs of the command-line tool.

#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "gmphd_mots/io.hpp"
#include "gmphd_mots/viz.hpp"

namespace gmphd_mots {
namespace {

namespace fs = std::filesystem;

struct CmdResult {
  int rc = -1;
  std::string out;
};

CmdResult run(const std::string& args) {
  const std::string cmd = std::string(GMPHD_MOTS_CLI) + " " + args + " 2>&1";
  CmdResult r;
  FILE* p = ::popen(cmd.c_str(), "r");
  if (!p) return r;
  char buf[4096];
  while (std::size_t n = std::fread(buf, 1, sizeof buf, p)) r.out.append(buf, n);
  const int status = ::pclose(p);
  r.rc = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / ("gmphd_mots_cli_" + std::string(info->name()) + "_" + std::to_string(::getpid()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& rel) const { return (dir_ / rel).string(); }

  void synth(const std::string& scenario, const std::string& extra = "") {
    const CmdResult r = run("synth --scenario " + scenario + " --seed 3 --out " + path("seq") + " " + extra);
    ASSERT_EQ(r.rc, 0) << r.out;
  }

  CmdResult track(const std::string& out, const std::string& extra = "") {
    return run("track --dets " + path("seq/dets.txt") + " --imgs " + path("seq/img/%06d.png") + " --out " + path(out) +
               " " + extra);
  }

  fs::path dir_;
};

TEST_F(Cli, TrackIsDeterministicAndEvaluates) {
  synth("occlusion");
  ASSERT_EQ(track("a").rc, 0);
  const CmdResult second = track("b", "--jobs 1");
  ASSERT_EQ(second.rc, 0) << second.out;
  EXPECT_NE(second.out.find("fps"), std::string::npos);
  const std::string a = slurp(path("a/dets.txt")), b = slurp(path("b/dets.txt"));
  ASSERT_FALSE(a.empty());
  EXPECT_EQ(a, b);

  const CmdResult ev = run("eval --gt " + path("seq/gt.txt") + " --res " + path("a/dets.txt") + " --report " + path("r.txt"));
  ASSERT_EQ(ev.rc, 0) << ev.out;
  const std::string kv = slurp(path("r.txt"));
  EXPECT_NE(kv.find("all.IDS = 0\n"), std::string::npos) << kv;
  EXPECT_NE(kv.find("all.FP = 0\n"), std::string::npos) << kv;
}

TEST_F(Cli, SelfEvaluationIsPerfectAndEmptyScoresZero) {
  synth("parallel", "--frames 8");
  const CmdResult self = run("eval --gt " + path("seq/gt.txt") + " --res " + path("seq/gt.txt") + " --report " + path("s.txt"));
  ASSERT_EQ(self.rc, 0) << self.out;
  EXPECT_NE(slurp(path("s.txt")).find("all.sMOTSA = 100\n"), std::string::npos);
  std::ofstream(path("empty.txt")).close();
  const CmdResult none = run("eval --gt " + path("seq/gt.txt") + " --res " + path("empty.txt") + " --report " + path("e.txt"));
  ASSERT_EQ(none.rc, 0) << none.out;
  EXPECT_NE(slurp(path("e.txt")).find("all.MOTSA = 0\n"), std::string::npos);
}

TEST_F(Cli, DirectoryEvaluationTreatsMissingResultsAsEmpty) {
  synth("parallel", "--frames 4");
  fs::create_directories(path("gt"));
  fs::create_directories(path("res"));
  fs::copy_file(path("seq/gt.txt"), path("gt/0001.txt"));
  fs::copy_file(path("seq/gt.txt"), path("gt/0002.txt"));
  fs::copy_file(path("seq/gt.txt"), path("res/0001.txt"));
  const CmdResult r = run("eval --gt " + path("gt") + " --res " + path("res") + " --report " + path("d.txt"));
  ASSERT_EQ(r.rc, 0) << r.out;
  const std::string kv = slurp(path("d.txt"));
  EXPECT_NE(kv.find("all.TP = 12\n"), std::string::npos) << kv;
  EXPECT_NE(kv.find("all.FN = 12\n"), std::string::npos) << kv;
}

TEST_F(Cli, ExitCodes) {
  EXPECT_EQ(run("").rc, 1);
  EXPECT_EQ(run("--help").rc, 0);
  EXPECT_EQ(run("track --dets x --out y").rc, 1);
  EXPECT_EQ(run("track --dets x --imgs y --out " + path("o") + " --pipeline p9").rc, 1);
  EXPECT_EQ(run("eval --gt /nonexistent --res /nonexistent").rc, 1);

  synth("occlusion", "--frames 3");
  // malformed detections file
  std::ofstream(path("bad.txt")) << "0 1 0.9 240 320\n";
  const CmdResult bad = run("track --dets " + path("bad.txt") + " --imgs " + path("seq/img/%06d.png") + " --out " + path("o"));
  EXPECT_EQ(bad.rc, 2);
  EXPECT_NE(bad.out.find("line 1"), std::string::npos) << bad.out;
  // missing image
  fs::remove(path("seq/img/000001.png"));
  const CmdResult missing = track("o");
  EXPECT_EQ(missing.rc, 2);
  EXPECT_NE(missing.out.find("frame 1"), std::string::npos) << missing.out;
  // position-only pipeline never reads images
  EXPECT_EQ(track("o", "--pipeline p1").rc, 0);
}

TEST_F(Cli, VizTintsOnlyMaskPixels) {
  synth("occlusion", "--frames 3");
  ASSERT_EQ(track("t").rc, 0);
  const CmdResult r = run("viz --res " + path("t/dets.txt") + " --imgs " + path("seq/img/%06d.png") + " --out " + path("v"));
  ASSERT_EQ(r.rc, 0) << r.out;
  const auto recs = read_results(fs::path(path("t/dets.txt")));
  for (int f = 0; f < 3; ++f) {
    const std::string name = expand_frame_pattern("%06d.png", f);
    const cv::Mat src = cv::imread(path("seq/img/" + name), cv::IMREAD_COLOR);
    const cv::Mat got = cv::imread(path("v/" + name), cv::IMREAD_COLOR);
    ASSERT_FALSE(got.empty()) << f;
    cv::Mat inside(src.rows, src.cols, CV_8UC1, cv::Scalar(0));
    std::vector<ResultRecord> here;
    for (const auto& rec : recs) {
      if (rec.frame != f) continue;
      here.push_back(rec);
      const BinaryMask m = rle_decode(rec.rle, rec.img_h, rec.img_w);
      const DenseMask d = to_dense(m);
      for (int y = 0; y < d.height; ++y)
        for (int x = 0; x < d.width; ++x)
          if (d.at(y, x)) inside.at<std::uint8_t>(y, x) = 1;
    }
    ASSERT_FALSE(here.empty());
    const cv::Vec3b color = id_color(here[0].object_id);
    int tinted = 0;
    for (int y = 0; y < src.rows; ++y) {
      for (int x = 0; x < src.cols; ++x) {
        const cv::Vec3b s = src.at<cv::Vec3b>(y, x), g = got.at<cv::Vec3b>(y, x);
        if (!inside.at<std::uint8_t>(y, x)) {
          ASSERT_EQ(s, g) << f << " " << x << "," << y;
          continue;
        }
        const cv::Vec3b want((s[0] + color[0] + 1) / 2, (s[1] + color[1] + 1) / 2, (s[2] + color[2] + 1) / 2);
        if (g == want) ++tinted;
        else ASSERT_EQ(g, cv::Vec3b(255, 255, 255)) << f << " " << x << "," << y;
      }
    }
    EXPECT_GT(tinted, 0);
  }
  EXPECT_EQ(id_color(1001), id_color(1001));
  EXPECT_NE(id_color(1001), id_color(1002));
}

long kv_int(const std::string& kv, const std::string& key) {
  const auto pos = kv.find(key + " = ");
  if (pos == std::string::npos) return -1;
  return std::stol(kv.substr(pos + key.size() + 3));
}

TEST_F(Cli, AblationIsMonotoneOnOcclusion) {
  synth("occlusion");
  const CmdResult r = run("ablate --dets " + path("seq/dets.txt") + " --imgs " + path("seq/img/%06d.png") + " --gt " +
                          path("seq/gt.txt") + " --out " + path("ab"));
  ASSERT_EQ(r.rc, 0) << r.out;
  const std::string kv = slurp(path("ab/ablation.txt"));
  const long p1 = kv_int(kv, "p1.all.IDS"), p2 = kv_int(kv, "p2.all.IDS"), p5 = kv_int(kv, "p5.all.IDS");
  ASSERT_GE(p5, 0) << kv;
  EXPECT_LE(p5, p2);
  EXPECT_LE(p2, p1);
  EXPECT_EQ(p5, 0);
  for (const char* p : {"p1", "p2", "p3", "p4", "p5"}) EXPECT_TRUE(fs::exists(path(std::string("ab/") + p + "/dets.txt")));
}

TEST_F(Cli, VizWithEmptyResultsCopiesFrames) {
  synth("parallel", "--frames 2");
  std::ofstream(path("none.txt")).close();
  const CmdResult r = run("viz --res " + path("none.txt") + " --imgs " + path("seq/img/%06d.png") + " --out " + path("v"));
  ASSERT_EQ(r.rc, 0) << r.out;
  for (int f = 0; f < 2; ++f) {
    const std::string name = expand_frame_pattern("%06d.png", f);
    const cv::Mat src = cv::imread(path("seq/img/" + name), cv::IMREAD_COLOR);
    const cv::Mat got = cv::imread(path("v/" + name), cv::IMREAD_COLOR);
    ASSERT_EQ(got.size(), src.size());
    EXPECT_EQ(cv::norm(src, got, cv::NORM_INF), 0.0);
  }
}

}  // namespace
}  // namespace gmphd_mots
