#pragma once

#include <complex>
#include <vector>

#include "qbn/config.hpp"
#include "qbn/errors.hpp"

namespace qbn {

using cplx = std::complex<double>;

// Small dense row-major complex matrix; just enough linear algebra for the
// density-matrix layer. Solvers below are self-contained by design; a vetted
// external solver could be swapped in behind the same signatures.
class ComplexMatrix {
 public:
  ComplexMatrix() = default;
  ComplexMatrix(int rows, int cols) : rows_(rows), cols_(cols), data_(std::size_t(rows) * std::size_t(cols)) {}
  ComplexMatrix(int rows, int cols, std::vector<cplx> data);

  static ComplexMatrix identity(int n);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  cplx& at(int r, int c) { return data_[std::size_t(r) * std::size_t(cols_) + std::size_t(c)]; }
  const cplx& at(int r, int c) const { return data_[std::size_t(r) * std::size_t(cols_) + std::size_t(c)]; }
  const std::vector<cplx>& data() const { return data_; }

  ComplexMatrix adjoint() const;
  ComplexMatrix operator*(const ComplexMatrix& o) const;
  ComplexMatrix operator+(const ComplexMatrix& o) const;
  ComplexMatrix operator-(const ComplexMatrix& o) const;
  ComplexMatrix scaled(cplx s) const;
  cplx trace() const;

  double max_abs() const;
  double max_abs_diff(const ComplexMatrix& o) const;
  bool is_hermitian(double tol) const;
  double frobenius_norm() const;

 private:
  int rows_ = 0, cols_ = 0;
  std::vector<cplx> data_;
};

struct EigResult {
  std::vector<double> eigenvalues;  // descending
  ComplexMatrix eigenvectors;       // columns, unitary
};

// Cyclic Jacobi diagonalization of a Hermitian matrix: M = U D U^dagger with
// U unitary and eigenvalues sorted descending. Deterministic for identical
// input; within a degenerate subspace the eigenvector basis is
// algorithm-determined.
EigResult hermitian_eig(const ComplexMatrix& m, const Config& cfg = default_config());

struct SvdResult {
  ComplexMatrix u;          // rows x rows, unitary
  std::vector<double> s;    // min(rows, cols), descending, nonnegative
  ComplexMatrix v;          // cols x cols, unitary
};

// M = U diag(s) V^dagger via eigendecomposition of M^dagger M plus a polar
// step that rebuilds U from the image columns.
SvdResult svd(const ComplexMatrix& m, const Config& cfg = default_config());

// -sum lambda ln lambda in nats, with 0 ln 0 := 0. Eigenvalues in
// [-eig_clamp, 0) are clamped to zero; the spectrum must sum to 1.
double spectral_entropy(const std::vector<double>& eigenvalues,
                        const Config& cfg = default_config());

}  // namespace qbn
