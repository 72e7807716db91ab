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

// Kernelized correlation filter on a single grayscale channel, used as a
// per-track appearance model.
//
// Training solves kernel ridge regression over all cyclic shifts of the
// template in the Fourier domain (Gaussian kernel). Evaluation returns a
// per-pixel distance d in [0, 1] over the observation box; the appearance
// affinity is 1 - mean(d).
//
// Per-pixel distance: the ideal response is the training target moved onto
// the detected peak and scaled to the model's own response range
// [self_min, self_max]. d is the absolute residual between the raw response
// and that ideal, divided by the range and clamped to [0, 1]. A match (at
// any translation) leaves a near-zero residual everywhere and is exactly 0 at
// the peak of a self match; unrelated content produces a flat response whose
// residual is large around the peak. A flat response carries no evidence and
// maps to d = 1 everywhere.

#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include <opencv2/core.hpp>
#include <opencv2/imgproc.hpp>

#include "gmphd_mots/errors.hpp"
#include "gmphd_mots/mask.hpp"

namespace gmphd_mots {

struct KcfParams {
  int patch_size = 64;
  double sigma = 0.5;            // Gaussian kernel bandwidth
  double lambda = 1e-4;          // ridge regularizer
  double target_bandwidth = 0.1; // regression target sigma, as a fraction of patch_size
  bool cosine_window = true;
};

struct KcfModel {
  KcfParams params;
  cv::Mat templ;      // patch_size x patch_size, CV_64F, windowed features
  cv::Mat templ_f;    // spectrum of templ, CV_64FC2
  cv::Mat alpha_f;    // dual coefficients, CV_64FC2
  double self_min = 0.0;
  double self_max = 0.0;
  int trained_at = -1;
};

/// Per-pixel distance grid over an observation box, row-major.
struct ResponsePatch {
  int width = 0;
  int height = 0;
  std::vector<double> values;

  double at(int row, int col) const { return values[static_cast<std::size_t>(row) * width + col]; }
  double mean() const {
    if (values.empty()) return 1.0;
    double s = 0.0;
    for (double v : values) s += v;
    return s / static_cast<double>(values.size());
  }
};

namespace kcf {

inline cv::Mat fft(const cv::Mat& real) {
  cv::Mat out;
  cv::dft(real, out, cv::DFT_COMPLEX_OUTPUT);
  return out;
}

inline cv::Mat ifft_real(const cv::Mat& spectrum) {
  cv::Mat out;
  cv::dft(spectrum, out, cv::DFT_INVERSE | cv::DFT_SCALE | cv::DFT_REAL_OUTPUT);
  return out;
}

inline cv::Mat complex_divide(const cv::Mat& num, const cv::Mat& den, double ridge) {
  cv::Mat out(num.size(), CV_64FC2);
  for (int r = 0; r < num.rows; ++r) {
    const auto* a = num.ptr<cv::Vec2d>(r);
    const auto* b = den.ptr<cv::Vec2d>(r);
    auto* o = out.ptr<cv::Vec2d>(r);
    for (int c = 0; c < num.cols; ++c) {
      const double br = b[c][0] + ridge, bi = b[c][1];
      const double d = br * br + bi * bi;
      o[c] = cv::Vec2d((a[c][0] * br + a[c][1] * bi) / d, (a[c][1] * br - a[c][0] * bi) / d);
    }
  }
  return out;
}

/// Centered Gaussian regression target, peak 1 at (P/2, P/2).
inline cv::Mat gaussian_target(int size, double bandwidth_px) {
  cv::Mat y(size, size, CV_64F);
  const int c0 = size / 2;
  const double inv = -0.5 / (bandwidth_px * bandwidth_px);
  for (int r = 0; r < size; ++r) {
    for (int c = 0; c < size; ++c) y.at<double>(r, c) = std::exp(inv * ((r - c0) * (r - c0) + (c - c0) * (c - c0)));
  }
  return y;
}

inline cv::Mat cosine_window(int size) {
  cv::Mat w;
  cv::createHanningWindow(w, cv::Size(size, size), CV_64F);
  return w;
}

/// Gaussian kernel evaluated between `x` and every cyclic shift of `z`:
/// k(s) = exp(-max(0, |x|^2 + |z|^2 - 2 sum_p z(p + s) x(p)) / (sigma^2 N)).
inline cv::Mat gaussian_correlation(const cv::Mat& z, const cv::Mat& z_f, const cv::Mat& x, const cv::Mat& x_f,
                                    double sigma) {
  const double n = static_cast<double>(x.total());
  const double xx = x.dot(x);
  const double zz = z.dot(z);
  cv::Mat prod;
  cv::mulSpectrums(z_f, x_f, prod, 0, /*conjB=*/true);
  cv::Mat xz = ifft_real(prod);
  cv::Mat k(xz.size(), CV_64F);
  for (int r = 0; r < xz.rows; ++r) {
    const double* s = xz.ptr<double>(r);
    double* o = k.ptr<double>(r);
    for (int c = 0; c < xz.cols; ++c) o[c] = std::exp(-std::max(0.0, xx + zz - 2.0 * s[c]) / (sigma * sigma * n));
  }
  return k;
}

/// Grayscale box content resampled to size x size, values in [-0.5, 0.5].
inline cv::Mat extract_patch(const cv::Mat& gray, const BBox& box, int size) {
  if (gray.empty() || gray.type() != CV_8UC1) throw DomainError("appearance model expects an 8-bit grayscale frame");
  const cv::Rect roi = cv::Rect(box.x, box.y, box.w, box.h) & cv::Rect(0, 0, gray.cols, gray.rows);
  if (roi.area() < 16) throw DomainError("appearance box is degenerate (area < 16 px inside the frame)");
  cv::Mat resized;
  cv::resize(gray(roi), resized, cv::Size(size, size), 0, 0, cv::INTER_LINEAR);
  cv::Mat patch;
  resized.convertTo(patch, CV_64F, 1.0 / 255.0, -0.5);
  return patch;
}

inline cv::Mat prepare(const cv::Mat& patch, const KcfParams& params) {
  if (!params.cosine_window) return patch.clone();
  return patch.mul(cosine_window(params.patch_size));
}

}  // namespace kcf

/// Trains on a patch that is already patch_size x patch_size, CV_64F.
inline KcfModel train_patch(const cv::Mat& patch, const KcfParams& params, int frame = -1) {
  if (params.patch_size <= 0 || patch.rows != params.patch_size || patch.cols != params.patch_size ||
      patch.type() != CV_64F) {
    throw DimensionError("training patch must be patch_size x patch_size CV_64F");
  }
  if (!(params.sigma > 0.0) || !(params.lambda > 0.0)) throw DomainError("kernel sigma and ridge lambda must be > 0");
  KcfModel m;
  m.params = params;
  m.trained_at = frame;
  m.templ = kcf::prepare(patch, params);
  m.templ_f = kcf::fft(m.templ);
  const cv::Mat k = kcf::gaussian_correlation(m.templ, m.templ_f, m.templ, m.templ_f, params.sigma);
  const cv::Mat y_f = kcf::fft(kcf::gaussian_target(params.patch_size, params.target_bandwidth * params.patch_size));
  m.alpha_f = kcf::complex_divide(y_f, kcf::fft(k), params.lambda);

  cv::Mat self_k_f = kcf::fft(k);
  cv::Mat self_resp_f;
  cv::mulSpectrums(m.alpha_f, self_k_f, self_resp_f, 0);
  cv::minMaxLoc(kcf::ifft_real(self_resp_f), &m.self_min, &m.self_max);
  return m;
}

inline KcfModel train(const cv::Mat& gray, const BBox& box, const KcfParams& params = {}, int frame = -1) {
  return train_patch(kcf::extract_patch(gray, box, params.patch_size), params, frame);
}

/// Observation patch prepared once and reusable against any model that shares its KcfParams.
struct KcfProbe {
  cv::Mat z;    // windowed features
  cv::Mat z_f;  // spectrum of z
  int roi_width = 0;
  int roi_height = 0;
};

inline KcfProbe make_probe_patch(const cv::Mat& patch, const KcfParams& params) {
  if (patch.rows != params.patch_size || patch.cols != params.patch_size || patch.type() != CV_64F) {
    throw DimensionError("evaluation patch must be patch_size x patch_size CV_64F");
  }
  KcfProbe p;
  p.z = kcf::prepare(patch, params);
  p.z_f = kcf::fft(p.z);
  p.roi_width = params.patch_size;
  p.roi_height = params.patch_size;
  return p;
}

inline KcfProbe make_probe(const cv::Mat& gray, const BBox& box, const KcfParams& params = {}) {
  KcfProbe p = make_probe_patch(kcf::extract_patch(gray, box, params.patch_size), params);
  const cv::Rect roi = cv::Rect(box.x, box.y, box.w, box.h) & cv::Rect(0, 0, gray.cols, gray.rows);
  p.roi_width = roi.width;
  p.roi_height = roi.height;
  return p;
}

inline void require_compatible(const KcfModel& model, const KcfProbe& probe) {
  if (probe.z.rows != model.params.patch_size || probe.z.cols != model.params.patch_size) {
    throw DimensionError("probe and model patch sizes differ");
  }
}

inline cv::Mat raw_response(const KcfModel& model, const KcfProbe& probe) {
  require_compatible(model, probe);
  const cv::Mat k = kcf::gaussian_correlation(probe.z, probe.z_f, model.templ, model.templ_f, model.params.sigma);
  cv::Mat resp_f;
  cv::mulSpectrums(model.alpha_f, kcf::fft(k), resp_f, 0);
  return kcf::ifft_real(resp_f);
}

/// Raw ridge-regression response on a patch_size x patch_size CV_64F patch.
inline cv::Mat raw_response_patch(const KcfModel& model, const cv::Mat& patch) {
  return raw_response(model, make_probe_patch(patch, model.params));
}

/// Distance grid on the patch_size grid.
inline cv::Mat distance_grid(const KcfModel& model, const KcfProbe& probe) {
  const cv::Mat raw = raw_response(model, probe);
  double lo = 0.0, hi = 0.0;
  cv::Point peak;
  cv::minMaxLoc(raw, &lo, &hi, nullptr, &peak);
  const double span = model.self_max - model.self_min;
  const double flat_tol = 1e-12 * (1.0 + std::abs(hi));
  if (!(span > flat_tol) || !(hi - lo > flat_tol)) return cv::Mat::ones(raw.size(), CV_64F);

  const int n = raw.rows;
  const double bw = model.params.target_bandwidth * model.params.patch_size;
  const double inv = -0.5 / (bw * bw);
  auto wrapped = [n](int d) {
    d = ((d % n) + n) % n;
    return d > n / 2 ? d - n : d;
  };
  cv::Mat d(raw.size(), CV_64F);
  for (int r = 0; r < n; ++r) {
    const int dr = wrapped(r - peak.y);
    for (int c = 0; c < n; ++c) {
      const int dc = wrapped(c - peak.x);
      const double ideal = (dr == 0 && dc == 0) ? 1.0 : std::exp(inv * (dr * dr + dc * dc));
      const double resid = std::abs((raw.at<double>(r, c) - model.self_min) - span * ideal);
      d.at<double>(r, c) = std::clamp(resid / span, 0.0, 1.0);
    }
  }
  return d;
}

inline cv::Mat distance_grid(const KcfModel& model, const cv::Mat& patch) {
  return distance_grid(model, make_probe_patch(patch, model.params));
}

/// Distance grid resampled to the probe's box size.
inline ResponsePatch response_map(const KcfModel& model, const KcfProbe& probe) {
  const cv::Mat d = distance_grid(model, probe);
  cv::Mat grid;
  if (probe.roi_width == d.cols && probe.roi_height == d.rows) {
    grid = d;
  } else {
    cv::resize(d, grid, cv::Size(probe.roi_width, probe.roi_height), 0, 0, cv::INTER_LINEAR);
  }
  ResponsePatch out;
  out.width = grid.cols;
  out.height = grid.rows;
  out.values.reserve(grid.total());
  for (int r = 0; r < grid.rows; ++r) {
    for (int c = 0; c < grid.cols; ++c) out.values.push_back(std::clamp(grid.at<double>(r, c), 0.0, 1.0));
  }
  return out;
}

inline ResponsePatch response_map(const KcfModel& model, const cv::Mat& gray, const BBox& box) {
  return response_map(model, make_probe(gray, box, model.params));
}

inline double appearance_affinity(const KcfModel& model, const KcfProbe& probe) {
  return 1.0 - response_map(model, probe).mean();
}

inline double appearance_affinity(const KcfModel& model, const cv::Mat& gray, const BBox& box) {
  return 1.0 - response_map(model, gray, box).mean();
}

}  // namespace gmphd_mots
