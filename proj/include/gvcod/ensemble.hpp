#ifndef GVCOD_ENSEMBLE_HPP_
#define GVCOD_ENSEMBLE_HPP_

#include <algorithm>

#include "gvcod/errors.hpp"
#include "gvcod/tensor.hpp"

namespace gvcod {

struct EnsembleConfig {
  // Weight of the long-term map in the fused output.
  float long_weight = 0.5f;
  // Negative = adaptive threshold; otherwise a fixed tau in [0,1].
  float fixed_threshold = -1.0f;

  void validate() const {
    if (long_weight < 0.0f || long_weight > 1.0f)
      fail("config", "fusion weight must be in [0,1]");
    if (fixed_threshold > 1.0f)
      fail("config", "fixed threshold must be in [0,1]");
  }
};

// Pixelwise w*long + (1-w)*short.
inline PredictionMap fuse(const PredictionMap& short_map,
                          const PredictionMap& long_map,
                          const EnsembleConfig& cfg) {
  cfg.validate();
  if (!short_map.same_shape(long_map)) fail("shape", "spatial shape mismatch");
  PredictionMap out(short_map.height, short_map.width, 1);
  const double w = cfg.long_weight;
  for (std::size_t i = 0; i < out.data.size(); ++i) {
    const double v = w * long_map.data[i] + (1.0 - w) * short_map.data[i];
    out.data[i] = static_cast<float>(std::clamp(v, 0.0, 1.0));
  }
  return out;
}

// tau = min(1, 2 * mean(map)).
inline float adaptive_threshold(const PredictionMap& map) {
  double sum = 0.0;
  for (float v : map.data) sum += v;
  const double tau = 2.0 * sum / static_cast<double>(map.data.size());
  return static_cast<float>(std::min(1.0, tau));
}

// Foreground iff value > tau (strict; an all-zero map with tau = 0 stays
// all background).
inline Tensor3 binarize(const PredictionMap& map, float tau) {
  if (tau < 0.0f || tau > 1.0f) fail("config", "threshold must be in [0,1]");
  Tensor3 out(map.height, map.width, 1);
  for (std::size_t i = 0; i < map.data.size(); ++i)
    out.data[i] = map.data[i] > tau ? 1.0f : 0.0f;
  return out;
}

inline Tensor3 binarize_adaptive(const PredictionMap& map) {
  return binarize(map, adaptive_threshold(map));
}

}  // namespace gvcod

#endif  // GVCOD_ENSEMBLE_HPP_
