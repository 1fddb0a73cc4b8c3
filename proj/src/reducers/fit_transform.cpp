#include <algorithm>

#include "fsr/errors.hpp"
#include "fsr/reducers.hpp"
#include "reducer_util.hpp"

namespace fsr {

const char* to_string(ReducerKind kind) {
  switch (kind) {
    case ReducerKind::identity: return "identity";
    case ReducerKind::pca: return "pca";
    case ReducerKind::truncated_svd: return "truncated_svd";
    case ReducerKind::kernel_pca: return "kernel_pca";
    case ReducerKind::isomap: return "isomap";
    case ReducerKind::feature_agglomeration: return "feature_agglomeration";
    case ReducerKind::external: return "external";
  }
  return "unknown";
}

ReducerKind parse_reducer_kind(const std::string& name) {
  for (auto kind : {ReducerKind::identity, ReducerKind::pca, ReducerKind::truncated_svd,
                    ReducerKind::kernel_pca, ReducerKind::isomap,
                    ReducerKind::feature_agglomeration, ReducerKind::external}) {
    if (name == to_string(kind)) return kind;
  }
  throw ConfigError("unknown reducer kind '" + name + "'");
}

std::string ReducerSpec::name() const {
  if (kind == ReducerKind::identity) return "identity";
  const std::string base =
      kind == ReducerKind::external ? (label.empty() ? "external" : label) : to_string(kind);
  return base + "-" + std::to_string(target_dim);
}

ReducerSpec parse_reducer_spec(const std::string& text) {
  ReducerSpec spec;
  const auto colon = text.find(':');
  spec.kind = parse_reducer_kind(text.substr(0, colon));
  std::string rest = colon == std::string::npos ? "" : text.substr(colon + 1);
  while (!rest.empty()) {
    const auto eq = rest.find('=');
    if (eq == std::string::npos) throw ConfigError("reducer option without '=': " + rest);
    const std::string key = rest.substr(0, eq);
    std::string value;
    if (key == "command") {
      value = rest.substr(eq + 1);
      rest.clear();
    } else {
      const auto next = rest.find(':', eq);
      value = rest.substr(eq + 1, next == std::string::npos ? std::string::npos : next - eq - 1);
      rest = next == std::string::npos ? "" : rest.substr(next + 1);
    }
    try {
      if (key == "gamma" && spec.kind == ReducerKind::kernel_pca) {
        if (value != "auto") spec.rbf_gamma = std::stod(value);
      } else if (key == "n_neighbors" && spec.kind == ReducerKind::isomap) {
        if (value != "auto") spec.n_neighbors = std::stoi(value);
      } else if (key == "dim") {
        spec.target_dim = std::stoi(value);
      } else if (key == "command" && spec.kind == ReducerKind::external) {
        spec.command = value;
      } else if (key == "name" && spec.kind == ReducerKind::external) {
        spec.label = value;
      } else {
        throw ConfigError("option '" + key + "' not valid for reducer " + to_string(spec.kind));
      }
    } catch (const std::logic_error&) {
      throw ConfigError("bad value '" + value + "' for reducer option '" + key + "'");
    }
  }
  if (spec.kind == ReducerKind::external && spec.command.empty()) {
    throw ConfigError("external reducer needs command=...");
  }
  return spec;
}

namespace {

void check_common(const ReducerSpec& spec, const Matrix& x) {
  if (spec.target_dim < 1 || spec.target_dim > x.cols()) {
    throw DataError("target_dim " + std::to_string(spec.target_dim) + " outside [1, " +
                    std::to_string(x.cols()) + "]");
  }
  if (x.rows() < 2) throw DataError("need at least two rows");
}

int isomap_neighbors(const ReducerSpec& spec, Eigen::Index rows, const FitContext& ctx) {
  const auto cap = static_cast<int>(rows - 1);
  return spec.n_neighbors.value_or(std::min(std::max(ctx.shot + 1, 5), cap));
}

double kernel_gamma(const ReducerSpec& spec, const Matrix& x) {
  return spec.rbf_gamma.value_or(1.0 / static_cast<double>(x.cols()));
}

}  // namespace

ReducedSplit fit_apply(const ReducerSpec& spec, const Matrix& fit_rows, const Matrix& apply_rows,
                       std::uint64_t seed, const FitContext& ctx) {
  if (fit_rows.cols() != apply_rows.cols()) {
    throw DataError(spec.name() + ": fit and apply rows differ in dimension");
  }
  if (spec.kind == ReducerKind::identity) return {fit_rows, apply_rows};
  try {
    check_common(spec, fit_rows);
    switch (spec.kind) {
      case ReducerKind::pca:
      case ReducerKind::truncated_svd: {
        const auto basis = detail::linear_basis(fit_rows, spec.target_dim,
                                                spec.kind == ReducerKind::pca);
        return {basis.project(fit_rows), basis.project(apply_rows)};
      }
      case ReducerKind::kernel_pca: {
        auto [f, a] = detail::kernel_pca_fit_apply(fit_rows, apply_rows, spec.target_dim,
                                                   kernel_gamma(spec, fit_rows));
        return {std::move(f), std::move(a)};
      }
      case ReducerKind::isomap: {
        auto [f, a] = detail::isomap_fit_apply(fit_rows, apply_rows, spec.target_dim,
                                               isomap_neighbors(spec, fit_rows.rows(), ctx));
        return {std::move(f), std::move(a)};
      }
      case ReducerKind::feature_agglomeration: {
        const auto assignment = agglomerate_features(fit_rows, spec.target_dim);
        auto pool = [&](const Matrix& x) {
          Matrix out = Matrix::Zero(x.rows(), spec.target_dim);
          Vector counts = Vector::Zero(spec.target_dim);
          for (Eigen::Index c = 0; c < x.cols(); ++c) {
            out.col(assignment[static_cast<std::size_t>(c)]) += x.col(c);
            counts(assignment[static_cast<std::size_t>(c)]) += 1.0;
          }
          for (int j = 0; j < spec.target_dim; ++j) out.col(j) /= counts(j);
          return out;
        };
        return {pool(fit_rows), pool(apply_rows)};
      }
      case ReducerKind::external:
        (void)seed;
        throw DataError("external reducers have no out-of-sample mapping");
      case ReducerKind::identity:
        break;
    }
  } catch (const InternalError&) {
    throw;
  } catch (const std::exception& e) {
    throw DataError(spec.name() + ": " + e.what());
  }
  return {fit_rows, apply_rows};
}

ReducedSet fit_transform(const ReducerSpec& spec, const Matrix& x, std::uint64_t seed,
                         const FitContext& ctx) {
  ReducedSet out;
  out.origin = spec;
  out.fit_row_count = x.rows();
  if (spec.kind == ReducerKind::identity) {
    out.vectors = x;
    return out;
  }
  const std::string name = spec.name();
  try {
    check_common(spec, x);
    switch (spec.kind) {
      case ReducerKind::pca:
        out.vectors = pca(x, spec.target_dim);
        break;
      case ReducerKind::truncated_svd:
        out.vectors = truncated_svd(x, spec.target_dim);
        break;
      case ReducerKind::kernel_pca: {
        out.vectors = kernel_pca(x, spec.target_dim, kernel_gamma(spec, x), &out.degenerate);
        break;
      }
      case ReducerKind::isomap: {
        out.vectors = isomap(x, spec.target_dim, isomap_neighbors(spec, x.rows(), ctx));
        break;
      }
      case ReducerKind::feature_agglomeration:
        out.vectors = feature_agglomeration(x, spec.target_dim);
        break;
      case ReducerKind::external:
        out.vectors = external_reducer(spec.command, x, spec.target_dim, seed);
        break;
      case ReducerKind::identity:
        break;
    }
  } catch (const InternalError&) {
    throw;
  } catch (const std::exception& e) {
    throw DataError(name + ": " + e.what());
  }
  return out;
}

}  // namespace fsr
