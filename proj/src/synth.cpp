#include "fsr/synth.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include <fmt/format.h>

#include "fsr/errors.hpp"
#include "fsr/rng.hpp"

namespace fsr {

void SynthSpec::validate() const {
  if (classes < 1 || vectors_per_class < 1) {
    throw ConfigError("synth: classes and vectors per class must be >= 1");
  }
  if (informative_dims < 0 || noise_dims < 0 || informative_dims + noise_dims < 1) {
    throw ConfigError("synth: need at least one dimension");
  }
  if (!(class_separation >= 0.0) || !(noise_scale >= 0.0)) {
    throw ConfigError("synth: separation and noise scale must be >= 0");
  }
}

Matrix class_centers(int classes, int informative_dims, double separation) {
  Matrix centers = Matrix::Zero(classes, informative_dims);
  if (informative_dims == 0 || classes == 1) return centers;
  const double axis = separation / std::numbers::sqrt2;
  if (informative_dims >= classes) {
    for (int c = 0; c < classes; ++c) centers(c, c) = axis;
  } else if (informative_dims == classes - 1) {
    // Orthonormal basis of the sum-zero subspace (Helmert rows) applied to
    // the centered axis layout gives a regular simplex in classes - 1 dims.
    for (int c = 0; c < classes; ++c) {
      for (int j = 0; j < informative_dims; ++j) {
        const double m = j + 1.0;
        const double norm = std::sqrt(m * (m + 1.0));
        double h = 0.0;
        if (c < j + 1) {
          h = 1.0 / norm;
        } else if (c == j + 1) {
          h = -m / norm;
        }
        centers(c, j) = axis * h;
      }
    }
  } else if (informative_dims >= 2) {
    const double radius = separation / (2.0 * std::sin(std::numbers::pi / classes));
    for (int c = 0; c < classes; ++c) {
      const double t = 2.0 * std::numbers::pi * c / classes;
      centers(c, 0) = radius * std::cos(t);
      centers(c, 1) = radius * std::sin(t);
    }
  } else {
    for (int c = 0; c < classes; ++c) centers(c, 0) = separation * c;
  }
  return centers;
}

namespace {

Matrix sample_class(Rng& rng, const Eigen::RowVectorXd& center, int rows, int noise_dims,
                    double noise_scale) {
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto informative = center.size();
  Matrix out(rows, informative + noise_dims);
  for (int r = 0; r < rows; ++r) {
    for (Eigen::Index j = 0; j < informative; ++j) out(r, j) = center(j) + normal(rng);
    for (int j = 0; j < noise_dims; ++j) out(r, informative + j) = noise_scale * normal(rng);
  }
  return out;
}

}  // namespace

EmbeddingStore generate_store(const SynthSpec& spec) {
  spec.validate();
  const Matrix centers = class_centers(spec.classes, spec.informative_dims, spec.class_separation);
  EmbeddingStore store;
  for (int c = 0; c < spec.classes; ++c) {
    Rng rng(derive_seed(spec.seed, static_cast<std::uint64_t>(c)));
    store.add_class(fmt::format("class_{:03d}", c),
                    sample_class(rng, centers.row(c), spec.vectors_per_class, spec.noise_dims,
                                 spec.noise_scale));
  }
  store.metadata = fmt::format(
      "synthetic: classes={} per_class={} informative={} noise={} separation={} "
      "noise_scale={} seed={}",
      spec.classes, spec.vectors_per_class, spec.informative_dims, spec.noise_dims,
      spec.class_separation, spec.noise_scale, spec.seed);
  return store;
}

EmbeddingSet separability_scenario(SeparabilityLevel level, int way, int shot,
                                   std::uint64_t seed) {
  const double separation = level == SeparabilityLevel::low   ? 1.0
                            : level == SeparabilityLevel::mid ? 3.0
                                                              : 8.0;
  SynthSpec spec;
  spec.classes = way;
  spec.vectors_per_class = shot;
  spec.informative_dims = 2;
  spec.noise_dims = 0;
  spec.class_separation = separation;
  spec.seed = seed;
  return generate_store(spec).to_embedding_set();
}

}  // namespace fsr
