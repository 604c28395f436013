#include "usp/numeric/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "usp/errors.hpp"

namespace usp::numeric {

Matrix Matrix::from_rows(const std::vector<std::vector<double>>& rows_in) {
  Matrix m;
  if (rows_in.empty()) return m;
  m.rows = rows_in.size();
  m.cols = rows_in.front().size();
  m.data.reserve(m.rows * m.cols);
  for (const auto& r : rows_in) {
    if (r.size() != m.cols) {
      throw PreconditionError("ragged row in Matrix::from_rows");
    }
    m.data.insert(m.data.end(), r.begin(), r.end());
  }
  return m;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double l2_norm(std::span<const double> v) { return std::sqrt(dot(v, v)); }

void l2_normalize(std::span<double> v) {
  double n = l2_norm(v);
  if (n == 0.0) return;
  for (auto& x : v) x /= n;
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  double na = l2_norm(a);
  double nb = l2_norm(b);
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot(a, b) / (na * nb);
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

double euclidean_distance(std::span<const double> a, std::span<const double> b) {
  return std::sqrt(squared_distance(a, b));
}

double kde_density_at(const Matrix& points, double bandwidth,
                      std::span<const double> query) {
  const std::size_t n = points.rows;
  const std::size_t d = points.cols;
  const double h2 = bandwidth * bandwidth;
  const double norm =
      std::pow(2.0 * std::numbers::pi * h2, -0.5 * static_cast<double>(d));
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sum += norm * std::exp(-0.5 * squared_distance(points.row(i), query) / h2);
  }
  return sum / static_cast<double>(n);
}

std::vector<double> kde_density_serial(const Matrix& points, double bandwidth,
                                       const Matrix& queries) {
  std::vector<double> out(queries.rows, 0.0);
  for (std::size_t q = 0; q < queries.rows; ++q) {
    out[q] = kde_density_at(points, bandwidth, queries.row(q));
  }
  return out;
}

std::vector<double> kde_density(const Matrix& points, double bandwidth,
                                const Matrix& queries) {
  std::vector<double> out(queries.rows, 0.0);
  const std::ptrdiff_t nq = static_cast<std::ptrdiff_t>(queries.rows);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t q = 0; q < nq; ++q) {
    out[static_cast<std::size_t>(q)] =
        kde_density_at(points, bandwidth,
                       queries.row(static_cast<std::size_t>(q)));
  }
  return out;
}

Matrix cosine_matrix_serial(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows, b.rows);
  for (std::size_t i = 0; i < a.rows; ++i) {
    for (std::size_t j = 0; j < b.rows; ++j) {
      out.at(i, j) = cosine_similarity(a.row(i), b.row(j));
    }
  }
  return out;
}

Matrix cosine_matrix(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows, b.rows);
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(a.rows);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < b.rows; ++j) {
      out.at(static_cast<std::size_t>(i), j) =
          cosine_similarity(a.row(static_cast<std::size_t>(i)), b.row(j));
    }
  }
  return out;
}

namespace {

double covariance_entry(const Matrix& x, const std::vector<double>& mean,
                        std::size_t a, std::size_t b) {
  double s = 0.0;
  for (std::size_t r = 0; r < x.rows; ++r) {
    s += (x.at(r, a) - mean[a]) * (x.at(r, b) - mean[b]);
  }
  return s / static_cast<double>(x.rows - 1);
}

std::vector<double> column_means(const Matrix& x) {
  std::vector<double> mean(x.cols, 0.0);
  for (std::size_t r = 0; r < x.rows; ++r) {
    for (std::size_t c = 0; c < x.cols; ++c) mean[c] += x.at(r, c);
  }
  for (auto& m : mean) m /= static_cast<double>(x.rows);
  return mean;
}

}  // namespace

Matrix covariance_serial(const Matrix& x) {
  if (x.rows < 2) throw PreconditionError("covariance needs at least 2 rows");
  const auto mean = column_means(x);
  Matrix cov(x.cols, x.cols);
  for (std::size_t a = 0; a < x.cols; ++a) {
    for (std::size_t b = a; b < x.cols; ++b) {
      double v = covariance_entry(x, mean, a, b);
      cov.at(a, b) = v;
      cov.at(b, a) = v;
    }
  }
  return cov;
}

Matrix covariance(const Matrix& x) {
  if (x.rows < 2) throw PreconditionError("covariance needs at least 2 rows");
  const auto mean = column_means(x);
  Matrix cov(x.cols, x.cols);
  const std::ptrdiff_t d = static_cast<std::ptrdiff_t>(x.cols);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t a = 0; a < d; ++a) {
    for (std::size_t b = static_cast<std::size_t>(a); b < x.cols; ++b) {
      double v = covariance_entry(x, mean, static_cast<std::size_t>(a), b);
      cov.at(static_cast<std::size_t>(a), b) = v;
      cov.at(b, static_cast<std::size_t>(a)) = v;
    }
  }
  return cov;
}

namespace {

double knn_mean_for_row(const Matrix& points, std::size_t i, std::size_t k) {
  std::vector<double> dists;
  dists.reserve(points.rows - 1);
  for (std::size_t j = 0; j < points.rows; ++j) {
    if (j == i) continue;
    dists.push_back(euclidean_distance(points.row(i), points.row(j)));
  }
  std::partial_sort(dists.begin(), dists.begin() + static_cast<std::ptrdiff_t>(k),
                    dists.end());
  double s = 0.0;
  for (std::size_t j = 0; j < k; ++j) s += dists[j];
  return s / static_cast<double>(k);
}

}  // namespace

std::vector<double> knn_mean_distance_serial(const Matrix& points,
                                             std::size_t k) {
  if (points.rows <= k) {
    throw TooFewPointsError("need more than k points for k-NN distances");
  }
  std::vector<double> out(points.rows, 0.0);
  for (std::size_t i = 0; i < points.rows; ++i) {
    out[i] = knn_mean_for_row(points, i, k);
  }
  return out;
}

std::vector<double> knn_mean_distance(const Matrix& points, std::size_t k) {
  if (points.rows <= k) {
    throw TooFewPointsError("need more than k points for k-NN distances");
  }
  std::vector<double> out(points.rows, 0.0);
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(points.rows);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    out[static_cast<std::size_t>(i)] =
        knn_mean_for_row(points, static_cast<std::size_t>(i), k);
  }
  return out;
}

std::size_t edit_distance(std::string_view a, std::string_view b) {
  const std::size_t n = a.size();
  const std::size_t m = b.size();
  if (n == 0) return m;
  if (m == 0) return n;
  std::vector<std::size_t> prev(m + 1), cur(m + 1);
  for (std::size_t j = 0; j <= m; ++j) prev[j] = j;
  for (std::size_t i = 1; i <= n; ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= m; ++j) {
      std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[m];
}

double normalized_edit_similarity(std::string_view a, std::string_view b) {
  const std::size_t longest = std::max(a.size(), b.size());
  if (longest == 0) return 1.0;
  return 1.0 - static_cast<double>(edit_distance(a, b)) /
                   static_cast<double>(longest);
}

}  // namespace usp::numeric
