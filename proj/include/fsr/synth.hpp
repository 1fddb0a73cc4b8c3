#pragma once

#include <cstdint>

#include "fsr/core.hpp"

namespace fsr {

struct SynthSpec {
  int classes = 20;
  int vectors_per_class = 100;
  int informative_dims = 6;
  int noise_dims = 0;
  double class_separation = 3.0;  // center spacing in units of the within-class sigma
  double noise_scale = 1.0;       // sigma of the noise dimensions
  std::uint64_t seed = 0;

  void validate() const;  // throws ConfigError
};

// Class centers, one row per class, over the informative dimensions.
// Orthogonal axes when informative_dims >= classes, a regular simplex when
// informative_dims == classes - 1; in both cases every pair of centers is
// `class_separation` apart. Lower dimensions fall back to a regular polygon
// (two dims) or a line (one dim) with neighboring centers that far apart.
Matrix class_centers(int classes, int informative_dims, double separation);

// Samples: center + N(0, 1) in informative dims, noise_scale * N(0, 1) in
// noise dims. Classes are named "class_000", "class_001", ...
EmbeddingStore generate_store(const SynthSpec& spec);

enum class SeparabilityLevel { low, mid, high };

// Two-dimensional labeled set with `shot` points per class; center spacing
// 1, 3, 8 sigma for low, mid, high.
EmbeddingSet separability_scenario(SeparabilityLevel level, int way, int shot,
                                   std::uint64_t seed);

}  // namespace fsr
