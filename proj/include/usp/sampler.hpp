#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "usp/extractor.hpp"
#include "usp/gateway.hpp"
#include "usp/numeric/kernels.hpp"

namespace usp {

struct ReducedPoint {
  std::vector<double> coords;
  std::string profile_id;
};

enum class ReduceMethod { Pca, NeighborGraph };

/// Dimensionality reduction of profile embeddings. Pca is the deterministic
/// reference method; NeighborGraph is a Laplacian-eigenmap style reducer over
/// the k-nearest-neighbour graph, offered behind the same interface.
std::vector<ReducedPoint> reduce(const std::vector<EmbeddingVector>& vectors,
                                 const std::vector<std::string>& ids,
                                 std::size_t d_r,
                                 ReduceMethod method = ReduceMethod::Pca);

/// Gaussian kernel density estimate over reduced points.
struct DensityModel {
  std::vector<ReducedPoint> points;
  double bandwidth = 0.0;

  double density(std::span<const double> x) const;
  std::vector<double> density_at_points() const;

  nlohmann::json to_json() const;
  static DensityModel from_json(const nlohmann::json& j);
};

/// Fits the model; when no bandwidth is given, Scott's rule
/// n^(-1/(d+4)) * mean_d(sigma_d) is used. Throws ZeroVarianceError when the
/// points carry no spread and no explicit bandwidth was supplied.
DensityModel fit_kde(const std::vector<ReducedPoint>& points,
                     std::optional<double> bandwidth = std::nullopt);

/// The n profiles whose reduced points fall in the highest-density regions;
/// ties broken by profile id.
std::vector<UserProfile> sample_majority(const DensityModel& model,
                                         const std::vector<UserProfile>& profiles,
                                         std::size_t n);

/// Weighted sampling without replacement with weight proportional to
/// 1/(density + 1e-12), deterministic given the seed.
std::vector<UserProfile> sample_minority(const DensityModel& model,
                                         const std::vector<UserProfile>& profiles,
                                         std::size_t n, std::uint64_t seed);

struct VirtualProfile {
  UserProfile profile;
  std::string of_source_id;
  std::string sc_source_id;
};

/// Synthesizes virtual profiles by pairing a random base profile's
/// objective-facts narrative with the subjective-characteristics narrative of
/// one of its k nearest neighbours (cosine over the supplied embeddings).
/// k is clamped to n_profiles - 1 with a warning.
std::vector<VirtualProfile> synthesize_virtual(
    const std::vector<UserProfile>& profiles,
    const std::vector<EmbeddingVector>& embeddings, std::size_t n,
    std::size_t k, std::uint64_t seed,
    std::vector<std::string>* warnings = nullptr);

/// The n candidates least similar to any reference profile, scored by maximum
/// cosine similarity of full narratives on the semantic channel; returned in
/// ascending score order.
std::vector<UserProfile> select_dissimilar(
    const std::vector<UserProfile>& candidates,
    const std::vector<UserProfile>& references, std::size_t n,
    const Gateway& gateway);

/// Local density loss: mean over points of the mean distance to their k
/// nearest neighbours within the subset. Lower means tighter local clustering.
double ldl(const std::vector<ReducedPoint>& points, std::size_t k = 5);

/// Hypersphere uniformity: log of the mean over unordered distinct pairs of
/// exp(-2 * ||x - y||^2), evaluated on L2-normalized copies of the points.
/// Always <= 0; lower means better global coverage.
double uniformity_loss(const std::vector<ReducedPoint>& points);

}  // namespace usp
