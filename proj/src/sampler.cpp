#include "usp/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "usp/errors.hpp"
#include "usp/numeric/pca.hpp"
#include "usp/text.hpp"

namespace usp {

using numeric::Matrix;

namespace {

Matrix embeddings_to_matrix(const std::vector<EmbeddingVector>& vectors) {
  if (vectors.empty()) throw PreconditionError("no embedding vectors");
  Matrix m(vectors.size(), vectors.front().values.size());
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    if (vectors[i].values.size() != m.cols) {
      throw PreconditionError("embedding vectors differ in dimension");
    }
    std::copy(vectors[i].values.begin(), vectors[i].values.end(),
              m.row(i).begin());
  }
  return m;
}

Matrix points_to_matrix(const std::vector<ReducedPoint>& points) {
  Matrix m(points.size(), points.front().coords.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    std::copy(points[i].coords.begin(), points[i].coords.end(), m.row(i).begin());
  }
  return m;
}

std::vector<ReducedPoint> matrix_to_points(const Matrix& m,
                                           const std::vector<std::string>& ids) {
  std::vector<ReducedPoint> out(m.rows);
  for (std::size_t i = 0; i < m.rows; ++i) {
    out[i].coords.assign(m.row(i).begin(), m.row(i).end());
    out[i].profile_id = ids[i];
  }
  return out;
}

/// Laplacian-eigenmap reduction over a symmetric k-NN graph: embed into the
/// eigenvectors of the graph Laplacian with the smallest non-trivial
/// eigenvalues. Deterministic; suited to manifold-ish structure the way the
/// neighbour-graph reducers used for visualization are.
Matrix neighbor_graph_reduce(const Matrix& x, std::size_t d_r) {
  const std::size_t n = x.rows;
  if (d_r + 1 > n) {
    throw PreconditionError("neighbor-graph reduce needs more points than d_r");
  }
  const std::size_t k = std::min<std::size_t>(10, n - 1);

  Matrix weights(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::pair<double, std::size_t>> dists;
    dists.reserve(n - 1);
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      dists.emplace_back(numeric::euclidean_distance(x.row(i), x.row(j)), j);
    }
    std::partial_sort(dists.begin(), dists.begin() + static_cast<std::ptrdiff_t>(k),
                      dists.end());
    double scale = std::max(dists[k - 1].first, 1e-12);
    for (std::size_t m = 0; m < k; ++m) {
      double w = std::exp(-dists[m].first / scale);
      std::size_t j = dists[m].second;
      weights.at(i, j) = std::max(weights.at(i, j), w);
      weights.at(j, i) = weights.at(i, j);
    }
  }

  Matrix laplacian(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    double degree = 0.0;
    for (std::size_t j = 0; j < n; ++j) degree += weights.at(i, j);
    for (std::size_t j = 0; j < n; ++j) laplacian.at(i, j) = -weights.at(i, j);
    laplacian.at(i, i) = degree;
  }

  std::vector<double> eigenvalues;
  Matrix eigenvectors;
  numeric::jacobi_eigen_symmetric(laplacian, eigenvalues, eigenvectors);

  // jacobi returns descending order; the smallest eigenvalue (~0, the constant
  // vector) is last. Take the d_r rows just before it.
  Matrix out(n, d_r);
  for (std::size_t d = 0; d < d_r; ++d) {
    std::size_t row = eigenvectors.rows - 2 - d;
    for (std::size_t i = 0; i < n; ++i) {
      out.at(i, d) = eigenvectors.at(row, i);
    }
  }
  return out;
}

}  // namespace

std::vector<ReducedPoint> reduce(const std::vector<EmbeddingVector>& vectors,
                                 const std::vector<std::string>& ids,
                                 std::size_t d_r, ReduceMethod method) {
  if (vectors.size() < 2) {
    throw PreconditionError("reduce: need at least 2 vectors");
  }
  if (ids.size() != vectors.size()) {
    throw PreconditionError("reduce: ids and vectors differ in length");
  }
  Matrix x = embeddings_to_matrix(vectors);
  if (d_r >= x.cols) {
    throw PreconditionError("reduce: d_r must be below the embedding dimension");
  }

  Matrix reduced;
  if (method == ReduceMethod::Pca) {
    auto model = numeric::fit_pca(x, d_r);
    reduced = numeric::pca_transform(model, x);
  } else {
    reduced = neighbor_graph_reduce(x, d_r);
  }
  return matrix_to_points(reduced, ids);
}

double DensityModel::density(std::span<const double> x) const {
  Matrix pts = points_to_matrix(points);
  return numeric::kde_density_at(pts, bandwidth, x);
}

std::vector<double> DensityModel::density_at_points() const {
  Matrix pts = points_to_matrix(points);
  return numeric::kde_density(pts, bandwidth, pts);
}

nlohmann::json DensityModel::to_json() const {
  nlohmann::json j;
  j["bandwidth"] = bandwidth;
  auto arr = nlohmann::json::array();
  for (const auto& p : points) {
    arr.push_back({{"id", p.profile_id}, {"coords", p.coords}});
  }
  j["points"] = arr;
  return j;
}

DensityModel DensityModel::from_json(const nlohmann::json& j) {
  DensityModel model;
  model.bandwidth = j.at("bandwidth").get<double>();
  for (const auto& item : j.at("points")) {
    ReducedPoint p;
    p.profile_id = item.at("id").get<std::string>();
    p.coords = item.at("coords").get<std::vector<double>>();
    model.points.push_back(std::move(p));
  }
  return model;
}

DensityModel fit_kde(const std::vector<ReducedPoint>& points,
                     std::optional<double> bandwidth) {
  if (points.size() < 2) {
    throw PreconditionError("fit_kde: need at least 2 points");
  }
  DensityModel model;
  model.points = points;

  if (bandwidth) {
    if (*bandwidth <= 0.0) {
      throw PreconditionError("fit_kde: bandwidth must be positive");
    }
    model.bandwidth = *bandwidth;
    return model;
  }

  const std::size_t n = points.size();
  const std::size_t d = points.front().coords.size();
  Matrix x = points_to_matrix(points);

  double sigma_sum = 0.0;
  for (std::size_t c = 0; c < d; ++c) {
    double mean = 0.0;
    for (std::size_t r = 0; r < n; ++r) mean += x.at(r, c);
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      double delta = x.at(r, c) - mean;
      var += delta * delta;
    }
    var /= static_cast<double>(n - 1);
    sigma_sum += std::sqrt(var);
  }
  double sigma = sigma_sum / static_cast<double>(d);
  if (sigma <= 0.0) {
    throw ZeroVarianceError("all points identical, cannot pick a bandwidth");
  }
  model.bandwidth =
      std::pow(static_cast<double>(n), -1.0 / (static_cast<double>(d) + 4.0)) *
      sigma;
  return model;
}

namespace {

std::vector<double> densities_by_profile(const DensityModel& model,
                                         const std::vector<UserProfile>& profiles) {
  if (model.points.size() != profiles.size()) {
    throw PreconditionError("density model and profile list differ in size");
  }
  for (std::size_t i = 0; i < profiles.size(); ++i) {
    if (model.points[i].profile_id != profiles[i].id) {
      throw PreconditionError("density model points and profiles are not aligned");
    }
  }
  return model.density_at_points();
}

}  // namespace

std::vector<UserProfile> sample_majority(const DensityModel& model,
                                         const std::vector<UserProfile>& profiles,
                                         std::size_t n) {
  if (n > profiles.size()) {
    throw PreconditionError("sample_majority: n exceeds profile count");
  }
  auto densities = densities_by_profile(model, profiles);
  std::vector<std::size_t> order(profiles.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (densities[a] != densities[b]) return densities[a] > densities[b];
    return profiles[a].id < profiles[b].id;
  });

  std::vector<UserProfile> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(profiles[order[i]]);
  return out;
}

std::vector<UserProfile> sample_minority(const DensityModel& model,
                                         const std::vector<UserProfile>& profiles,
                                         std::size_t n, std::uint64_t seed) {
  if (n > profiles.size()) {
    throw PreconditionError("sample_minority: n exceeds profile count");
  }
  auto densities = densities_by_profile(model, profiles);
  constexpr double kEpsilon = 1e-12;

  std::vector<double> weights(profiles.size());
  for (std::size_t i = 0; i < profiles.size(); ++i) {
    weights[i] = 1.0 / (densities[i] + kEpsilon);
  }
  std::vector<bool> taken(profiles.size(), false);

  text::SplitMix64 rng(seed);
  std::vector<UserProfile> out;
  out.reserve(n);
  for (std::size_t pick = 0; pick < n; ++pick) {
    double total = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      if (!taken[i]) total += weights[i];
    }
    double target = rng.next_double() * total;
    double cumulative = 0.0;
    std::size_t chosen = profiles.size();
    for (std::size_t i = 0; i < weights.size(); ++i) {
      if (taken[i]) continue;
      cumulative += weights[i];
      if (target < cumulative) {
        chosen = i;
        break;
      }
    }
    if (chosen == profiles.size()) {
      // Rounding pushed the target past the last weight.
      for (std::size_t i = weights.size(); i-- > 0;) {
        if (!taken[i]) {
          chosen = i;
          break;
        }
      }
    }
    taken[chosen] = true;
    out.push_back(profiles[chosen]);
  }
  return out;
}

std::vector<VirtualProfile> synthesize_virtual(
    const std::vector<UserProfile>& profiles,
    const std::vector<EmbeddingVector>& embeddings, std::size_t n,
    std::size_t k, std::uint64_t seed, std::vector<std::string>* warnings) {
  if (profiles.size() < 2) {
    throw PreconditionError("synthesize_virtual: need at least 2 profiles");
  }
  if (k < 1) throw PreconditionError("synthesize_virtual: k must be >= 1");
  if (embeddings.size() != profiles.size()) {
    throw PreconditionError("synthesize_virtual: embeddings/profiles mismatch");
  }
  if (k > profiles.size() - 1) {
    if (warnings != nullptr) {
      warnings->push_back("k=" + std::to_string(k) + " clamped to " +
                          std::to_string(profiles.size() - 1));
    }
    k = profiles.size() - 1;
  }

  Matrix x = embeddings_to_matrix(embeddings);
  Matrix sims = numeric::cosine_matrix(x, x);

  // k nearest neighbours per profile, by descending cosine, ties by index.
  std::vector<std::vector<std::size_t>> neighbors(profiles.size());
  for (std::size_t i = 0; i < profiles.size(); ++i) {
    std::vector<std::size_t> order;
    order.reserve(profiles.size() - 1);
    for (std::size_t j = 0; j < profiles.size(); ++j) {
      if (j != i) order.push_back(j);
    }
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return sims.at(i, a) > sims.at(i, b);
    });
    order.resize(k);
    neighbors[i] = std::move(order);
  }

  text::SplitMix64 rng(seed);
  std::vector<VirtualProfile> out;
  out.reserve(n);
  for (std::size_t v = 0; v < n; ++v) {
    std::size_t base = static_cast<std::size_t>(rng.next_below(profiles.size()));
    std::size_t neighbor =
        neighbors[base][static_cast<std::size_t>(rng.next_below(k))];

    VirtualProfile vp;
    vp.of_source_id = profiles[base].id;
    vp.sc_source_id = profiles[neighbor].id;
    vp.profile.id = "virtual-" + std::to_string(v);
    vp.profile.narrative_of = profiles[base].narrative_of;
    vp.profile.narrative_sc = profiles[neighbor].narrative_sc;
    vp.profile.meta["of_source_id"] = vp.of_source_id;
    vp.profile.meta["sc_source_id"] = vp.sc_source_id;
    out.push_back(std::move(vp));
  }
  return out;
}

std::vector<UserProfile> select_dissimilar(
    const std::vector<UserProfile>& candidates,
    const std::vector<UserProfile>& references, std::size_t n,
    const Gateway& gateway) {
  if (n > candidates.size()) {
    throw PreconditionError("select_dissimilar: n exceeds candidate count");
  }
  if (references.empty()) {
    throw PreconditionError("select_dissimilar: empty reference list");
  }

  std::vector<std::string> texts;
  texts.reserve(candidates.size() + references.size());
  for (const auto& p : candidates) texts.push_back(full_narrative(p));
  for (const auto& p : references) texts.push_back(full_narrative(p));
  auto vectors = gateway.embed(texts, Channel::Semantic);

  Matrix cand(candidates.size(), vectors.front().values.size());
  Matrix refs(references.size(), vectors.front().values.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    std::copy(vectors[i].values.begin(), vectors[i].values.end(),
              cand.row(i).begin());
  }
  for (std::size_t i = 0; i < references.size(); ++i) {
    std::copy(vectors[candidates.size() + i].values.begin(),
              vectors[candidates.size() + i].values.end(), refs.row(i).begin());
  }

  Matrix sims = numeric::cosine_matrix(cand, refs);
  std::vector<double> scores(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    double best = -1.0;
    for (std::size_t j = 0; j < references.size(); ++j) {
      best = std::max(best, sims.at(i, j));
    }
    scores[i] = best;
  }

  std::vector<std::size_t> order(candidates.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] < scores[b];
    return candidates[a].id < candidates[b].id;
  });

  std::vector<UserProfile> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(candidates[order[i]]);
  return out;
}

double ldl(const std::vector<ReducedPoint>& points, std::size_t k) {
  if (points.size() <= k) {
    throw TooFewPointsError("ldl: subset size must exceed k");
  }
  Matrix x = points_to_matrix(points);
  auto per_point = numeric::knn_mean_distance(x, k);
  double sum = 0.0;
  for (double v : per_point) sum += v;
  return sum / static_cast<double>(per_point.size());
}

double uniformity_loss(const std::vector<ReducedPoint>& points) {
  if (points.size() < 2) {
    throw TooFewPointsError("uniformity_loss: need at least 2 points");
  }
  Matrix x = points_to_matrix(points);
  for (std::size_t r = 0; r < x.rows; ++r) {
    numeric::l2_normalize(x.row(r));
  }
  double sum = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < x.rows; ++i) {
    for (std::size_t j = i + 1; j < x.rows; ++j) {
      sum += std::exp(-2.0 * numeric::squared_distance(x.row(i), x.row(j)));
      ++pairs;
    }
  }
  return std::log(sum / static_cast<double>(pairs));
}

}  // namespace usp
