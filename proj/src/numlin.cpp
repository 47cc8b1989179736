#include "qbn/numlin.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace qbn {

ComplexMatrix::ComplexMatrix(int rows, int cols, std::vector<cplx> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != std::size_t(rows) * std::size_t(cols))
    fail(Errc::ScopeMismatch, "matrix data length != rows*cols");
}

ComplexMatrix ComplexMatrix::identity(int n) {
  ComplexMatrix m(n, n);
  for (int i = 0; i < n; ++i) m.at(i, i) = 1.0;
  return m;
}

ComplexMatrix ComplexMatrix::adjoint() const {
  ComplexMatrix out(cols_, rows_);
  for (int r = 0; r < rows_; ++r)
    for (int c = 0; c < cols_; ++c) out.at(c, r) = std::conj(at(r, c));
  return out;
}

ComplexMatrix ComplexMatrix::operator*(const ComplexMatrix& o) const {
  if (cols_ != o.rows_) fail(Errc::ScopeMismatch, "matrix product shape mismatch");
  ComplexMatrix out(rows_, o.cols_);
  for (int r = 0; r < rows_; ++r)
    for (int k = 0; k < cols_; ++k) {
      cplx a = at(r, k);
      if (a == cplx(0.0)) continue;
      for (int c = 0; c < o.cols_; ++c) out.at(r, c) += a * o.at(k, c);
    }
  return out;
}

ComplexMatrix ComplexMatrix::operator+(const ComplexMatrix& o) const {
  if (rows_ != o.rows_ || cols_ != o.cols_) fail(Errc::ScopeMismatch, "matrix sum shape mismatch");
  ComplexMatrix out = *this;
  for (std::size_t i = 0; i < data_.size(); ++i) out.data_[i] += o.data_[i];
  return out;
}

ComplexMatrix ComplexMatrix::operator-(const ComplexMatrix& o) const {
  if (rows_ != o.rows_ || cols_ != o.cols_) fail(Errc::ScopeMismatch, "matrix diff shape mismatch");
  ComplexMatrix out = *this;
  for (std::size_t i = 0; i < data_.size(); ++i) out.data_[i] -= o.data_[i];
  return out;
}

ComplexMatrix ComplexMatrix::scaled(cplx s) const {
  ComplexMatrix out = *this;
  for (cplx& z : out.data_) z *= s;
  return out;
}

cplx ComplexMatrix::trace() const {
  cplx t = 0;
  for (int i = 0; i < std::min(rows_, cols_); ++i) t += at(i, i);
  return t;
}

double ComplexMatrix::max_abs() const {
  double m = 0;
  for (const cplx& z : data_) m = std::max(m, std::abs(z));
  return m;
}

double ComplexMatrix::max_abs_diff(const ComplexMatrix& o) const {
  double m = 0;
  for (std::size_t i = 0; i < data_.size(); ++i) m = std::max(m, std::abs(data_[i] - o.data_[i]));
  return m;
}

bool ComplexMatrix::is_hermitian(double tol) const {
  if (rows_ != cols_) return false;
  for (int r = 0; r < rows_; ++r)
    for (int c = r; c < cols_; ++c)
      if (std::abs(at(r, c) - std::conj(at(c, r))) > tol) return false;
  return true;
}

double ComplexMatrix::frobenius_norm() const {
  double s = 0;
  for (const cplx& z : data_) s += std::norm(z);
  return std::sqrt(s);
}

namespace {

double off_diagonal_norm(const ComplexMatrix& m) {
  double s = 0;
  for (int r = 0; r < m.rows(); ++r)
    for (int c = 0; c < m.cols(); ++c)
      if (r != c) s += std::norm(m.at(r, c));
  return std::sqrt(s);
}

// One complex Jacobi rotation zeroing m(p,q); accumulates into u.
void jacobi_rotate(ComplexMatrix& m, ComplexMatrix& u, int p, int q) {
  cplx mpq = m.at(p, q);
  double r = std::abs(mpq);
  if (r == 0.0) return;
  double phi = std::arg(mpq);
  cplx eiphi(std::cos(phi), std::sin(phi));

  double app = m.at(p, p).real();
  double aqq = m.at(q, q).real();
  double tau = (aqq - app) / (2.0 * r);
  double t = tau >= 0.0 ? 1.0 / (tau + std::sqrt(1.0 + tau * tau))
                        : 1.0 / (tau - std::sqrt(1.0 + tau * tau));
  double c = 1.0 / std::sqrt(1.0 + t * t);
  double s = t * c;

  // Column update with G = P * R, P = diag(1, e^{-i phi}) on (p,q).
  cplx gqp = -s * std::conj(eiphi);
  cplx gqq = c * std::conj(eiphi);
  int n = m.rows();
  for (int k = 0; k < n; ++k) {
    cplx mp = m.at(k, p), mq = m.at(k, q);
    m.at(k, p) = c * mp + gqp * mq;
    m.at(k, q) = s * mp + gqq * mq;
  }
  for (int k = 0; k < n; ++k) {
    cplx mp = m.at(p, k), mq = m.at(q, k);
    m.at(p, k) = c * mp + std::conj(gqp) * mq;
    m.at(q, k) = s * mp + std::conj(gqq) * mq;
  }
  for (int k = 0; k < n; ++k) {
    cplx up = u.at(k, p), uq = u.at(k, q);
    u.at(k, p) = c * up + gqp * uq;
    u.at(k, q) = s * up + gqq * uq;
  }
  m.at(p, q) = 0.0;
  m.at(q, p) = 0.0;
  m.at(p, p) = cplx(m.at(p, p).real(), 0.0);
  m.at(q, q) = cplx(m.at(q, q).real(), 0.0);
}

// Canonical column phase: largest-magnitude entry made real nonnegative.
void canonicalize_phases(ComplexMatrix& u) {
  for (int c = 0; c < u.cols(); ++c) {
    int best = 0;
    double best_mag = -1;
    for (int r = 0; r < u.rows(); ++r) {
      double mag = std::abs(u.at(r, c));
      if (mag > best_mag + 1e-15) {
        best_mag = mag;
        best = r;
      }
    }
    if (best_mag <= 0) continue;
    cplx z = u.at(best, c);
    cplx rot = std::conj(z) / std::abs(z);
    for (int r = 0; r < u.rows(); ++r) u.at(r, c) *= rot;
  }
}

}  // namespace

EigResult hermitian_eig(const ComplexMatrix& m, const Config& cfg) {
  if (m.rows() != m.cols()) fail(Errc::NotSquare, "eigendecomposition needs a square matrix");
  if (!m.is_hermitian(cfg.hermitian_tol))
    fail(Errc::NotHermitian, "matrix is not Hermitian within tolerance");

  int n = m.rows();
  ComplexMatrix a = m;
  // Symmetrize so rounding in the input cannot bias the sweeps.
  for (int r = 0; r < n; ++r) {
    a.at(r, r) = cplx(a.at(r, r).real(), 0.0);
    for (int c = r + 1; c < n; ++c) {
      cplx avg = 0.5 * (a.at(r, c) + std::conj(a.at(c, r)));
      a.at(r, c) = avg;
      a.at(c, r) = std::conj(avg);
    }
  }
  ComplexMatrix u = ComplexMatrix::identity(n);
  double scale = std::max(1.0, a.frobenius_norm());
  const int max_sweeps = 60;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    if (off_diagonal_norm(a) <= 1e-14 * scale) break;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q)
        if (std::abs(a.at(p, q)) > 1e-300) jacobi_rotate(a, u, p, q);
  }

  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int i, int j) {
    return a.at(i, i).real() > a.at(j, j).real();
  });

  EigResult out;
  out.eigenvalues.resize(static_cast<std::size_t>(n));
  out.eigenvectors = ComplexMatrix(n, n);
  for (int c = 0; c < n; ++c) {
    out.eigenvalues[std::size_t(c)] = a.at(order[std::size_t(c)], order[std::size_t(c)]).real();
    for (int r = 0; r < n; ++r) out.eigenvectors.at(r, c) = u.at(r, order[std::size_t(c)]);
  }
  canonicalize_phases(out.eigenvectors);
  return out;
}

SvdResult svd(const ComplexMatrix& m, const Config& cfg) {
  int p = m.rows(), q = m.cols();
  ComplexMatrix mm = m.adjoint() * m;
  EigResult eig = hermitian_eig(mm, cfg);

  int r = std::min(p, q);
  SvdResult out;
  out.v = eig.eigenvectors;
  out.s.assign(std::size_t(r), 0.0);
  out.u = ComplexMatrix(p, p);

  std::vector<char> filled(std::size_t(p), 0);
  for (int i = 0; i < r; ++i) {
    // Image of the i-th right singular vector; its norm is sigma_i.
    std::vector<cplx> w(std::size_t(p), 0.0);
    double nrm2 = 0.0;
    for (int row = 0; row < p; ++row) {
      cplx acc = 0.0;
      for (int k = 0; k < q; ++k) acc += m.at(row, k) * eig.eigenvectors.at(k, i);
      w[std::size_t(row)] = acc;
      nrm2 += std::norm(acc);
    }
    double sigma = std::sqrt(nrm2);
    out.s[std::size_t(i)] = sigma;
    if (sigma > 1e-300) {
      for (int row = 0; row < p; ++row) out.u.at(row, i) = w[std::size_t(row)] / sigma;
      filled[std::size_t(i)] = 1;
    }
  }

  // Rounding can nudge near-equal image norms out of order; restore the
  // descending contract by permuting (s, u, v) columns together.
  {
    std::vector<int> order(static_cast<std::size_t>(r));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int i, int j) { return out.s[std::size_t(i)] > out.s[std::size_t(j)]; });
    std::vector<double> s2(static_cast<std::size_t>(r));
    ComplexMatrix u2 = out.u, v2 = out.v;
    std::vector<char> f2(std::size_t(p), 0);
    for (int i = 0; i < r; ++i) {
      int src = order[std::size_t(i)];
      s2[std::size_t(i)] = out.s[std::size_t(src)];
      f2[std::size_t(i)] = filled[std::size_t(src)];
      for (int row = 0; row < p; ++row) u2.at(row, i) = out.u.at(row, src);
      for (int row = 0; row < q; ++row) v2.at(row, i) = out.v.at(row, src);
    }
    out.s = std::move(s2);
    out.u = std::move(u2);
    out.v = std::move(v2);
    filled = std::move(f2);
  }

  // Polar step: orthonormalize the image columns in order, then complete the
  // basis from standard vectors.
  auto mgs_column = [&](int col) {
    for (int prev = 0; prev < col; ++prev) {
      cplx dot = 0.0;
      for (int row = 0; row < p; ++row) dot += std::conj(out.u.at(row, prev)) * out.u.at(row, col);
      for (int row = 0; row < p; ++row) out.u.at(row, col) -= dot * out.u.at(row, prev);
    }
    double nrm = 0.0;
    for (int row = 0; row < p; ++row) nrm += std::norm(out.u.at(row, col));
    nrm = std::sqrt(nrm);
    if (nrm < 1e-8) return false;
    for (int row = 0; row < p; ++row) out.u.at(row, col) /= nrm;
    return true;
  };

  for (int col = 0; col < p; ++col) {
    if (col < r && filled[std::size_t(col)]) {
      mgs_column(col);
      continue;
    }
    bool ok = false;
    for (int e = 0; e < p && !ok; ++e) {
      for (int row = 0; row < p; ++row) out.u.at(row, col) = row == e ? 1.0 : 0.0;
      ok = mgs_column(col);
    }
  }
  return out;
}

double spectral_entropy(const std::vector<double>& eigenvalues, const Config& cfg) {
  double sum = 0.0, h = 0.0;
  for (double lam : eigenvalues) {
    if (lam < -cfg.eig_clamp)
      fail(Errc::NegativeEigenvalueBeyondTolerance, "eigenvalue " + std::to_string(lam));
    double v = lam < 0.0 ? 0.0 : lam;
    sum += v;
    if (v > 0.0) h -= v * std::log(v);
  }
  if (std::abs(sum - 1.0) > cfg.entropy_trace_tol)
    fail(Errc::TraceNotOne, "spectrum sums to " + std::to_string(sum));
  // Within the trace tolerance an eigenvalue may top 1 by a hair, which makes
  // the sum dip below zero; the entropy itself is nonnegative.
  if (h < 0.0) h = 0.0;
  return h;
}

}  // namespace qbn
