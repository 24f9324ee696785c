#ifndef GVCOD_TEMPORAL_HPP_
#define GVCOD_TEMPORAL_HPP_

#include <cstdlib>
#include <vector>

#include "gvcod/errors.hpp"
#include "gvcod/tensor.hpp"

namespace gvcod {

// Per-video stack of H x W prediction maps.
struct PredictionVolume {
  std::vector<PredictionMap> frames;

  int frame_count() const { return static_cast<int>(frames.size()); }
  int height() const { return frames.empty() ? 0 : frames[0].height; }
  int width() const { return frames.empty() ? 0 : frames[0].width; }

  void validate() const {
    if (frames.empty()) fail("data", "no frames");
    for (const auto& f : frames) {
      if (f.channels != 1) fail("shape", "prediction maps must be 1-channel");
      if (f.height != frames[0].height || f.width != frames[0].width)
        fail("shape", "prediction volume frames differ in shape");
    }
  }
};

// Spatial side S, temporal depth K, frame stride GAP. GAP=1 is the
// short-term neighborhood, GAP>1 long-term.
struct TNCubeSpec {
  int s = 19;
  int k = 5;
  int gap = 1;

  void validate() const {
    if (s < 1 || s % 2 == 0) fail("config", "S must be odd");
    if (k < 1 || k % 2 == 0) fail("config", "K must be odd");
    if (gap < 1) fail("config", "GAP must be >= 1");
  }

  int cube_values() const { return s * s * k; }
};

// Index reflection about the sequence endpoints without duplicating the
// edge frames: ..., 2, 1, 0, 1, 2, ... and likewise at F-1.
inline int reflect_index(int i, int frame_count) {
  if (frame_count <= 1) return 0;
  const int period = 2 * (frame_count - 1);
  int j = std::abs(i) % period;
  return j <= frame_count - 1 ? j : period - j;
}

// Frame indices for the cube at frame i: raw offsets i + (k-(K-1)/2)*GAP,
// reflected into range. The center element is always i itself.
inline std::vector<int> sample_indices(int i, const TNCubeSpec& spec,
                                       int frame_count) {
  if (spec.k % 2 == 0) fail("config", "K must be odd");
  spec.validate();
  if (i < 0 || i >= frame_count) fail("data", "frame index out of range");
  std::vector<int> out(spec.k);
  const int half = (spec.k - 1) / 2;
  for (int k = 0; k < spec.k; ++k)
    out[k] = reflect_index(i + (k - half) * spec.gap, frame_count);
  return out;
}

// S x S x K crop of the prediction volume anchored at `frame`, at a fixed
// spatial location: every slice crops the same (row, col), whatever the
// object does. Slice k is stored in channel k (earliest offset first).
inline Tensor3 extract_tn_cube(const PredictionVolume& vol, int frame, int row,
                               int col, const TNCubeSpec& spec) {
  vol.validate();
  if (row < 0 || row >= vol.height() || col < 0 || col >= vol.width())
    fail("data", "cube center outside the map");
  const auto idx = sample_indices(frame, spec, vol.frame_count());
  Tensor3 cube(spec.s, spec.s, spec.k);
  for (int k = 0; k < spec.k; ++k) {
    const Tensor3 crop = crop_replicate(vol.frames[idx[k]], row, col, spec.s);
    for (int y = 0; y < spec.s; ++y)
      for (int x = 0; x < spec.s; ++x) cube.at(y, x, k) = crop.at(y, x, 0);
  }
  return cube;
}

// Pixel features first, then the cube flattened slice-major then row-major:
// offset C + k*S^2 + y*S + x.
inline void tn_feature_vector(const Tensor3& cube,
                              std::span<const float> pixel_features,
                              float* out) {
  const int s = cube.height;
  const int k_depth = cube.channels;
  std::copy(pixel_features.begin(), pixel_features.end(), out);
  float* cursor = out + pixel_features.size();
  for (int k = 0; k < k_depth; ++k)
    for (int y = 0; y < s; ++y)
      for (int x = 0; x < s; ++x) *cursor++ = cube.at(y, x, k);
}

inline std::vector<float> tn_feature_vector(const Tensor3& cube,
                                            std::span<const float> pixel_features) {
  std::vector<float> out(pixel_features.size() +
                         static_cast<std::size_t>(cube.height) * cube.width *
                             cube.channels);
  tn_feature_vector(cube, pixel_features, out.data());
  return out;
}

}  // namespace gvcod

#endif  // GVCOD_TEMPORAL_HPP_
