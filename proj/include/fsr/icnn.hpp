#pragma once

#include <vector>

#include "fsr/core.hpp"

namespace fsr {

// What to do when no point of the scored set has a same-class peer (1-shot
// support sets), where the class-ratio term would be zero everywhere.
enum class OneShotRule {
  drop_gamma,  // score with the class-ratio factor fixed to 1
  zero_score,  // literal reading: the whole score is 0
};

struct IcnnParams {
  int k = 5;
  double p = 2.0;
  double q = 2.0;
  double r = 2.0;
  OneShotRule one_shot_rule = OneShotRule::drop_gamma;
  // Normalized distance used when all k neighbors are equidistant.
  double degenerate_spread_value = 0.5;

  void validate() const;  // throws ConfigError
};

// Neighbor distance mapped to [0,1] relative to [theta, alpha].
double normalized_distance(double d, const NeighborSplit& split, double degenerate_value = 0.5);

// Distance quality: different-class neighbors should be far, same-class near.
double lambda_score(const NeighborSplit& split, double degenerate_value = 0.5);
// One minus the spread of the normalized distance terms, per class group.
double omega_score(const NeighborSplit& split, double degenerate_value = 0.5);
// Fraction of neighbors that share the point's class.
double gamma_score(const NeighborSplit& split);

struct IcnnPointTerms {
  double lambda = 0.0;
  double omega = 0.0;
  double gamma = 0.0;
  double contribution = 0.0;  // lambda^(1/p) * omega^(1/q) * gamma^(1/r)
};

struct IcnnBreakdown {
  double score = 0.0;
  bool one_shot = false;  // no point had a same-class peer
  std::vector<IcnnPointTerms> points;
};

IcnnBreakdown icnn_breakdown(const Matrix& x, std::span<const ClassId> labels,
                             const IcnnParams& params);

double icnn_score(const Matrix& x, std::span<const ClassId> labels, const IcnnParams& params);

inline double icnn_score(const EmbeddingSet& x, const IcnnParams& params) {
  return icnn_score(x.vectors(), x.labels(), params);
}

}  // namespace fsr
