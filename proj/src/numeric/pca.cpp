#include "usp/numeric/pca.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "usp/errors.hpp"

namespace usp::numeric {

void jacobi_eigen_symmetric(const Matrix& sym, std::vector<double>& eigenvalues,
                            Matrix& eigenvectors) {
  const std::size_t n = sym.rows;
  Matrix a = sym;
  Matrix v(n, n);
  for (std::size_t i = 0; i < n; ++i) v.at(i, i) = 1.0;

  constexpr int kMaxSweeps = 100;
  constexpr double kTol = 1e-14;
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) off += a.at(p, q) * a.at(p, q);
    }
    if (off < kTol * kTol) break;

    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        double apq = a.at(p, q);
        if (std::abs(apq) < 1e-300) continue;
        double app = a.at(p, p);
        double aqq = a.at(q, q);
        double theta = (aqq - app) / (2.0 * apq);
        double t = (theta >= 0.0 ? 1.0 : -1.0) /
                   (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        double c = 1.0 / std::sqrt(t * t + 1.0);
        double s = t * c;

        for (std::size_t k = 0; k < n; ++k) {
          double akp = a.at(k, p);
          double akq = a.at(k, q);
          a.at(k, p) = c * akp - s * akq;
          a.at(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          double apk = a.at(p, k);
          double aqk = a.at(q, k);
          a.at(p, k) = c * apk - s * aqk;
          a.at(q, k) = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          double vkp = v.at(k, p);
          double vkq = v.at(k, q);
          v.at(k, p) = c * vkp - s * vkq;
          v.at(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return a.at(x, x) > a.at(y, y);
  });

  eigenvalues.assign(n, 0.0);
  eigenvectors = Matrix(n, n);
  for (std::size_t r = 0; r < n; ++r) {
    std::size_t src = order[r];
    eigenvalues[r] = a.at(src, src);
    for (std::size_t k = 0; k < n; ++k) eigenvectors.at(r, k) = v.at(k, src);
  }
}

PcaModel fit_pca(const Matrix& x, std::size_t dims) {
  if (x.rows < 2) throw PreconditionError("fit_pca needs at least 2 rows");
  if (dims == 0 || dims > x.cols) {
    throw PreconditionError("fit_pca: dims must be in [1, cols]");
  }

  Matrix cov = covariance(x);
  double total_variance = 0.0;
  for (std::size_t i = 0; i < cov.rows; ++i) total_variance += cov.at(i, i);
  if (total_variance <= 0.0) {
    throw DegenerateCovarianceError("all points identical, covariance is zero");
  }

  std::vector<double> eigenvalues;
  Matrix eigenvectors;
  jacobi_eigen_symmetric(cov, eigenvalues, eigenvectors);

  PcaModel model;
  model.mean.assign(x.cols, 0.0);
  for (std::size_t r = 0; r < x.rows; ++r) {
    for (std::size_t c = 0; c < x.cols; ++c) model.mean[c] += x.at(r, c);
  }
  for (auto& m : model.mean) m /= static_cast<double>(x.rows);

  model.components = Matrix(dims, x.cols);
  model.eigenvalues.assign(eigenvalues.begin(),
                           eigenvalues.begin() + static_cast<std::ptrdiff_t>(dims));
  for (std::size_t r = 0; r < dims; ++r) {
    // Sign convention: make the largest-magnitude entry positive.
    std::size_t arg = 0;
    double best = 0.0;
    for (std::size_t c = 0; c < x.cols; ++c) {
      double mag = std::abs(eigenvectors.at(r, c));
      if (mag > best) {
        best = mag;
        arg = c;
      }
    }
    double sign = eigenvectors.at(r, arg) < 0.0 ? -1.0 : 1.0;
    for (std::size_t c = 0; c < x.cols; ++c) {
      model.components.at(r, c) = sign * eigenvectors.at(r, c);
    }
  }
  return model;
}

Matrix pca_transform(const PcaModel& model, const Matrix& x) {
  if (x.cols != model.mean.size()) {
    throw PreconditionError("pca_transform: column count mismatch");
  }
  Matrix out(x.rows, model.dims());
  for (std::size_t r = 0; r < x.rows; ++r) {
    for (std::size_t d = 0; d < model.dims(); ++d) {
      double s = 0.0;
      for (std::size_t c = 0; c < x.cols; ++c) {
        s += (x.at(r, c) - model.mean[c]) * model.components.at(d, c);
      }
      out.at(r, d) = s;
    }
  }
  return out;
}

}  // namespace usp::numeric
