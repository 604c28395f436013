#pragma once

#include <cstddef>
#include <vector>

#include "usp/numeric/kernels.hpp"

namespace usp::numeric {

/// Principal component analysis fitted by symmetric Jacobi eigendecomposition
/// of the sample covariance. Axes follow a deterministic sign convention: the
/// entry of largest magnitude in each component is made positive, so fitted
/// axes are reproducible across runs and platforms.
struct PcaModel {
  std::vector<double> mean;      // per-column mean of the training data
  Matrix components;             // dims x cols, one principal axis per row
  std::vector<double> eigenvalues;  // variance along each kept axis

  std::size_t dims() const { return components.rows; }
};

/// Throws DegenerateCovarianceError when the data carries no variance at all
/// (every training point identical) and PreconditionError when dims exceeds
/// the column count or fewer than two rows are supplied.
PcaModel fit_pca(const Matrix& x, std::size_t dims);

Matrix pca_transform(const PcaModel& model, const Matrix& x);

/// Eigen-decomposition of a symmetric matrix via cyclic Jacobi rotations.
/// Eigenpairs are returned sorted by descending eigenvalue; ties are broken by
/// original column index so the order is deterministic.
void jacobi_eigen_symmetric(const Matrix& sym, std::vector<double>& eigenvalues,
                            Matrix& eigenvectors);

}  // namespace usp::numeric
