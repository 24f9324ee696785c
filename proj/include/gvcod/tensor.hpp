#ifndef GVCOD_TENSOR_HPP_
#define GVCOD_TENSOR_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "gvcod/errors.hpp"

namespace gvcod {

// Dense H x W x C float tensor, row-major, channel-last:
// data[(y * width + x) * channels + ch].
struct Tensor3 {
  int height = 0;
  int width = 0;
  int channels = 0;
  std::vector<float> data;

  Tensor3() = default;
  Tensor3(int h, int w, int c, float fill = 0.0f)
      : height(h), width(w), channels(c) {
    if (h < 1 || w < 1 || c < 1) fail("shape", "empty target");
    data.assign(static_cast<std::size_t>(h) * w * c, fill);
  }

  std::size_t size() const { return data.size(); }

  float& at(int y, int x, int ch) {
    return data[(static_cast<std::size_t>(y) * width + x) * channels + ch];
  }
  float at(int y, int x, int ch) const {
    return data[(static_cast<std::size_t>(y) * width + x) * channels + ch];
  }

  // Channel values of one pixel (contiguous in memory).
  std::span<const float> pixel(int y, int x) const {
    return {data.data() + (static_cast<std::size_t>(y) * width + x) * channels,
            static_cast<std::size_t>(channels)};
  }

  bool same_shape(const Tensor3& o) const {
    return height == o.height && width == o.width && channels == o.channels;
  }
};

// A Tensor3 with channels == 1 and values in [0, 1], interpreted as
// per-pixel foreground probability.
using PredictionMap = Tensor3;

inline void ensure_finite(const Tensor3& t, const std::string& what) {
  for (float v : t.data)
    if (!std::isfinite(v)) fail("data", what + " contains non-finite values");
}

inline void ensure_prediction_map(const Tensor3& t, const std::string& what) {
  if (t.channels != 1) fail("shape", what + " must have a single channel");
  for (float v : t.data)
    if (!(v >= 0.0f && v <= 1.0f))
      fail("data", what + " has values outside [0,1]");
}

// Bilinear resampling with half-pixel-centered coordinates:
// src = (dst + 0.5) * (src_size / dst_size) - 0.5, clamped to the source.
// Interpolation runs in double via nested lerps, so resizing to the same
// shape is an exact identity and constants stay exactly constant.
inline Tensor3 resize_bilinear(const Tensor3& src, int out_h, int out_w) {
  if (out_h < 1 || out_w < 1) fail("shape", "empty target");
  Tensor3 out(out_h, out_w, src.channels);
  const double sy = static_cast<double>(src.height) / out_h;
  const double sx = static_cast<double>(src.width) / out_w;
  for (int y = 0; y < out_h; ++y) {
    double fy = (y + 0.5) * sy - 0.5;
    fy = std::clamp(fy, 0.0, static_cast<double>(src.height - 1));
    const int y0 = static_cast<int>(fy);
    const int y1 = std::min(y0 + 1, src.height - 1);
    const double ty = fy - y0;
    for (int x = 0; x < out_w; ++x) {
      double fx = (x + 0.5) * sx - 0.5;
      fx = std::clamp(fx, 0.0, static_cast<double>(src.width - 1));
      const int x0 = static_cast<int>(fx);
      const int x1 = std::min(x0 + 1, src.width - 1);
      const double tx = fx - x0;
      for (int ch = 0; ch < src.channels; ++ch) {
        const double v00 = src.at(y0, x0, ch);
        const double v01 = src.at(y0, x1, ch);
        const double v10 = src.at(y1, x0, ch);
        const double v11 = src.at(y1, x1, ch);
        const double top = v00 + tx * (v01 - v00);
        const double bot = v10 + tx * (v11 - v10);
        out.at(y, x, ch) = static_cast<float>(top + ty * (bot - top));
      }
    }
  }
  return out;
}

// Area resampling: every output pixel is the coverage-weighted mean of the
// source pixels its footprint overlaps. Exact box averaging for integer
// downscale factors; used for label downsampling and feature pooling.
inline Tensor3 resize_area(const Tensor3& src, int out_h, int out_w) {
  if (out_h < 1 || out_w < 1) fail("shape", "empty target");
  Tensor3 out(out_h, out_w, src.channels);
  const double sy = static_cast<double>(src.height) / out_h;
  const double sx = static_cast<double>(src.width) / out_w;
  std::vector<double> acc(src.channels);
  for (int y = 0; y < out_h; ++y) {
    const double ry0 = y * sy;
    const double ry1 = (y + 1) * sy;
    const int iy0 = static_cast<int>(ry0);
    const int iy1 = std::min(src.height - 1, static_cast<int>(std::ceil(ry1)) - 1);
    for (int x = 0; x < out_w; ++x) {
      const double rx0 = x * sx;
      const double rx1 = (x + 1) * sx;
      const int ix0 = static_cast<int>(rx0);
      const int ix1 = std::min(src.width - 1, static_cast<int>(std::ceil(rx1)) - 1);
      std::fill(acc.begin(), acc.end(), 0.0);
      double area = 0.0;
      for (int yy = iy0; yy <= iy1; ++yy) {
        const double hy = std::min<double>(ry1, yy + 1) - std::max<double>(ry0, yy);
        for (int xx = ix0; xx <= ix1; ++xx) {
          const double wx = std::min<double>(rx1, xx + 1) - std::max<double>(rx0, xx);
          const double w = hy * wx;
          area += w;
          for (int ch = 0; ch < src.channels; ++ch)
            acc[ch] += w * src.at(yy, xx, ch);
        }
      }
      for (int ch = 0; ch < src.channels; ++ch)
        out.at(y, x, ch) = static_cast<float>(acc[ch] / area);
    }
  }
  return out;
}

// side x side x 1 crop around (center_row, center_col); out-of-bounds
// coordinates clamp to the nearest valid pixel.
inline Tensor3 crop_replicate(const PredictionMap& src, int center_row,
                              int center_col, int side) {
  if (side < 1 || side % 2 == 0) fail("shape", "side must be odd");
  if (src.channels != 1) fail("shape", "crop source must have one channel");
  if (center_row < 0 || center_row >= src.height || center_col < 0 ||
      center_col >= src.width)
    fail("shape", "crop center outside the map");
  Tensor3 out(side, side, 1);
  const int half = side / 2;
  for (int dy = -half; dy <= half; ++dy) {
    const int yy = std::clamp(center_row + dy, 0, src.height - 1);
    for (int dx = -half; dx <= half; ++dx) {
      const int xx = std::clamp(center_col + dx, 0, src.width - 1);
      out.at(dy + half, dx + half, 0) = src.at(yy, xx, 0);
    }
  }
  return out;
}

inline Tensor3 concat_channels(const Tensor3& a, const Tensor3& b) {
  if (a.height != b.height || a.width != b.width)
    fail("shape", "spatial shape mismatch");
  Tensor3 out(a.height, a.width, a.channels + b.channels);
  for (int y = 0; y < a.height; ++y)
    for (int x = 0; x < a.width; ++x) {
      for (int ch = 0; ch < a.channels; ++ch)
        out.at(y, x, ch) = a.at(y, x, ch);
      for (int ch = 0; ch < b.channels; ++ch)
        out.at(y, x, a.channels + ch) = b.at(y, x, ch);
    }
  return out;
}

// Label downsampling for classifier training targets: area-average the
// binary mask, then binarize at 0.5 with ties going to foreground.
inline Tensor3 downsample_mask(const Tensor3& mask, int out_h, int out_w) {
  if (mask.channels != 1) fail("shape", "mask must have one channel");
  Tensor3 avg = resize_area(mask, out_h, out_w);
  for (float& v : avg.data) v = (v >= 0.5f) ? 1.0f : 0.0f;
  return avg;
}

}  // namespace gvcod

#endif  // GVCOD_TENSOR_HPP_
