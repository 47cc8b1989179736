#pragma once

// Test-only numerical oracles, deliberately independent of the library's
// Jacobi solver path.

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "qbn/numlin.hpp"

namespace qbn_test {

using qbn::ComplexMatrix;
using qbn::cplx;

// Hermitian eigenvalues through shifted QR iteration with modified
// Gram-Schmidt factorizations.
inline std::vector<double> qr_eigenvalues(ComplexMatrix a, double tol = 1e-12) {
  int n = a.rows();
  std::vector<double> out;
  while (n > 0) {
    if (n == 1) {
      out.push_back(a.at(0, 0).real());
      break;
    }
    for (int iter = 0; iter < 500; ++iter) {
      double off = 0.0;
      for (int c = 0; c < n - 1; ++c) off += std::abs(a.at(n - 1, c));
      if (off < tol) break;

      cplx shift = a.at(n - 1, n - 1);
      ComplexMatrix m(n, n);
      for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) m.at(r, c) = a.at(r, c) - (r == c ? shift : cplx(0.0));

      // MGS QR: m = q r
      ComplexMatrix q(n, n), r(n, n);
      for (int c = 0; c < n; ++c) {
        std::vector<cplx> v(n);
        for (int k = 0; k < n; ++k) v[std::size_t(k)] = m.at(k, c);
        for (int p = 0; p < c; ++p) {
          cplx dot = 0.0;
          for (int k = 0; k < n; ++k) dot += std::conj(q.at(k, p)) * v[std::size_t(k)];
          r.at(p, c) = dot;
          for (int k = 0; k < n; ++k) v[std::size_t(k)] -= dot * q.at(k, p);
        }
        double nrm = 0.0;
        for (int k = 0; k < n; ++k) nrm += std::norm(v[std::size_t(k)]);
        nrm = std::sqrt(nrm);
        r.at(c, c) = nrm;
        if (nrm < 1e-300) {
          // deficient column: any unit vector orthogonal to the previous ones
          for (int k = 0; k < n; ++k) v[std::size_t(k)] = 0.0;
          v[std::size_t(c)] = 1.0;
          for (int p = 0; p < c; ++p) {
            cplx dot = 0.0;
            for (int k = 0; k < n; ++k) dot += std::conj(q.at(k, p)) * v[std::size_t(k)];
            for (int k = 0; k < n; ++k) v[std::size_t(k)] -= dot * q.at(k, p);
          }
          double nn = 0.0;
          for (int k = 0; k < n; ++k) nn += std::norm(v[std::size_t(k)]);
          nn = std::sqrt(nn);
          for (int k = 0; k < n; ++k) v[std::size_t(k)] /= nn;
        } else {
          for (int k = 0; k < n; ++k) v[std::size_t(k)] /= nrm;
        }
        for (int k = 0; k < n; ++k) q.at(k, c) = v[std::size_t(k)];
      }
      // a <- r q + shift I
      ComplexMatrix next(n, n);
      for (int rr = 0; rr < n; ++rr)
        for (int cc = 0; cc < n; ++cc) {
          cplx acc = rr == cc ? shift : cplx(0.0);
          for (int k = rr; k < n; ++k) acc += r.at(rr, k) * q.at(k, cc);
          next.at(rr, cc) = acc;
        }
      a = next;
    }
    out.push_back(a.at(n - 1, n - 1).real());
    ComplexMatrix sub(n - 1, n - 1);
    for (int r = 0; r < n - 1; ++r)
      for (int c = 0; c < n - 1; ++c) sub.at(r, c) = a.at(r, c);
    a = sub;
    --n;
  }
  std::sort(out.begin(), out.end(), std::greater<double>());
  return out;
}

inline double oracle_entropy(const ComplexMatrix& rho) {
  double h = 0.0;
  for (double lam : qr_eigenvalues(rho))
    if (lam > 1e-15) h -= lam * std::log(lam);
  return h;
}

}  // namespace qbn_test
