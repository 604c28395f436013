#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

// Data-parallel numeric kernels. Every kernel ships in two flavours: a plain
// serial reference (suffix `_serial`) and an OpenMP front-end that distributes
// whole output elements across threads. Because a single thread always owns the
// entire summation for one output element, the parallel results are bitwise
// identical to the serial ones, independent of thread count and schedule.

namespace usp::numeric {

/// Dense row-major matrix backing embeddings, reduced points and kernels.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  std::span<const double> row(std::size_t r) const {
    return {data.data() + r * cols, cols};
  }
  std::span<double> row(std::size_t r) {
    return {data.data() + r * cols, cols};
  }

  static Matrix from_rows(const std::vector<std::vector<double>>& rows_in);
};

double dot(std::span<const double> a, std::span<const double> b);
double l2_norm(std::span<const double> v);
void l2_normalize(std::span<double> v);  // zero vectors pass through unchanged
double cosine_similarity(std::span<const double> a, std::span<const double> b);
double squared_distance(std::span<const double> a, std::span<const double> b);
double euclidean_distance(std::span<const double> a, std::span<const double> b);

// --- Gaussian KDE ----------------------------------------------------------

/// Mixture density at one query point: (1/n) * sum_i K_h(q - x_i) with an
/// isotropic Gaussian kernel of standard deviation `bandwidth` per dimension.
double kde_density_at(const Matrix& points, double bandwidth,
                      std::span<const double> query);

std::vector<double> kde_density_serial(const Matrix& points, double bandwidth,
                                       const Matrix& queries);
std::vector<double> kde_density(const Matrix& points, double bandwidth,
                                const Matrix& queries);

// --- pairwise similarity ----------------------------------------------------

/// result(i, j) = cosine(a.row(i), b.row(j))
Matrix cosine_matrix_serial(const Matrix& a, const Matrix& b);
Matrix cosine_matrix(const Matrix& a, const Matrix& b);

// --- covariance --------------------------------------------------------------

/// Sample covariance (ddof = 1) of the rows of x; cols x cols output.
Matrix covariance_serial(const Matrix& x);
Matrix covariance(const Matrix& x);

// --- k nearest neighbours -----------------------------------------------------

/// For every row, the mean Euclidean distance to its k nearest other rows.
std::vector<double> knn_mean_distance_serial(const Matrix& points,
                                             std::size_t k);
std::vector<double> knn_mean_distance(const Matrix& points, std::size_t k);

// --- edit distance -------------------------------------------------------------

std::size_t edit_distance(std::string_view a, std::string_view b);

/// 1 - levenshtein(a, b) / max(|a|, |b|); 1.0 for two empty strings.
double normalized_edit_similarity(std::string_view a, std::string_view b);

}  // namespace usp::numeric
