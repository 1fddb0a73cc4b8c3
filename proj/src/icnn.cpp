#include "fsr/icnn.hpp"

#include <cmath>
#include <set>

#include "fsr/errors.hpp"

namespace fsr {

void IcnnParams::validate() const {
  if (k < 1) throw ConfigError("icnn: k must be >= 1");
  if (!(p > 0.0) || !(q > 0.0) || !(r > 0.0)) {
    throw ConfigError("icnn: exponents p, q, r must be > 0");
  }
  if (!(degenerate_spread_value >= 0.0 && degenerate_spread_value <= 1.0)) {
    throw ConfigError("icnn: degenerate spread value must lie in [0, 1]");
  }
}

double normalized_distance(double d, const NeighborSplit& split, double degenerate_value) {
  const double spread = split.alpha - split.theta;
  if (spread < 1e-12) return degenerate_value;
  return (d - split.theta) / spread;
}

namespace {

void require_nonempty(const NeighborSplit& split) {
  if (split.size() == 0) throw DataError("icnn: empty neighbor split");
}

// Population variance; 0 for fewer than two values.
template <typename Fn>
double term_variance(const std::vector<Neighbor>& group, Fn term) {
  if (group.size() < 2) return 0.0;
  double mean = 0.0;
  for (const auto& nb : group) mean += term(nb.distance);
  mean /= static_cast<double>(group.size());
  double ss = 0.0;
  for (const auto& nb : group) {
    const double t = term(nb.distance) - mean;
    ss += t * t;
  }
  return ss / static_cast<double>(group.size());
}

}  // namespace

double lambda_score(const NeighborSplit& split, double degenerate_value) {
  require_nonempty(split);
  double sum = 0.0;
  for (const auto& nb : split.diff) sum += normalized_distance(nb.distance, split, degenerate_value);
  for (const auto& nb : split.same) {
    sum += 1.0 - normalized_distance(nb.distance, split, degenerate_value);
  }
  return sum / static_cast<double>(split.size());
}

double omega_score(const NeighborSplit& split, double degenerate_value) {
  require_nonempty(split);
  const double var_diff = term_variance(split.diff, [&](double d) {
    return normalized_distance(d, split, degenerate_value);
  });
  const double var_same = term_variance(split.same, [&](double d) {
    return 1.0 - normalized_distance(d, split, degenerate_value);
  });
  return 1.0 - (var_diff + var_same);
}

double gamma_score(const NeighborSplit& split) {
  require_nonempty(split);
  return static_cast<double>(split.same.size()) / static_cast<double>(split.size());
}

IcnnBreakdown icnn_breakdown(const Matrix& x, std::span<const ClassId> labels,
                             const IcnnParams& params) {
  params.validate();
  const Eigen::Index n = x.rows();
  if (static_cast<Eigen::Index>(labels.size()) != n) {
    throw DataError("icnn: label count does not match row count");
  }
  const std::set<ClassId> distinct(labels.begin(), labels.end());
  if (distinct.size() < 2) throw DataError("icnn: need at least two distinct classes");
  if (params.k > n - 1) {
    throw DataError("icnn: k = " + std::to_string(params.k) + " exceeds n - 1 = " +
                    std::to_string(n - 1));
  }

  IcnnBreakdown out;
  out.one_shot = distinct.size() == static_cast<std::size_t>(n);
  out.points.resize(static_cast<std::size_t>(n));
  if (out.one_shot && params.one_shot_rule == OneShotRule::zero_score) {
    out.score = 0.0;
    return out;
  }

  const DistanceMatrix d = pairwise_distances(x);
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const NeighborSplit split = knn_split(d, labels, i, params.k);
    IcnnPointTerms& t = out.points[static_cast<std::size_t>(i)];
    // Under one-shot every neighbor is of another class, so lambda already
    // runs over the different-class terms alone.
    t.lambda = lambda_score(split, params.degenerate_spread_value);
    t.omega = omega_score(split, params.degenerate_spread_value);
    t.gamma = out.one_shot ? 1.0 : gamma_score(split);
    t.contribution = std::pow(t.lambda, 1.0 / params.p) * std::pow(t.omega, 1.0 / params.q) *
                     std::pow(t.gamma, 1.0 / params.r);
    total += t.contribution;
  }
  out.score = total / static_cast<double>(n);
  return out;
}

double icnn_score(const Matrix& x, std::span<const ClassId> labels, const IcnnParams& params) {
  return icnn_breakdown(x, labels, params).score;
}

}  // namespace fsr
