#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <vector>

#include "acrodis/errors.hpp"
#include "acrodis/matrix.hpp"

namespace acrodis {

namespace detail {

/// Cyclic Jacobi eigendecomposition of a symmetric matrix. Returns
/// eigenvalues and fills `vectors` with the corresponding eigenvectors as
/// columns. Adequate for the covariance sizes this library sees; sweeps
/// until the off-diagonal mass is negligible.
inline std::vector<double> jacobi_eigen_symmetric(Mat<double> a, Mat<double>& vectors) {
  const std::size_t n = a.rows();
  vectors = Mat<double>(n, n);
  for (std::size_t i = 0; i < n; ++i) vectors(i, i) = 1.0;

  double frob = 0.0;
  for (double v : a.data()) frob += v * v;
  const double tol = 1e-30 * std::max(frob, 1e-300);

  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    }
    if (off <= tol) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = vectors(k, p), vkq = vectors(k, q);
          vectors(k, p) = c * vkp - s * vkq;
          vectors(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  std::vector<double> eigenvalues(n);
  for (std::size_t i = 0; i < n; ++i) eigenvalues[i] = a(i, i);
  return eigenvalues;
}

/// Deterministic sign convention: the entry of largest magnitude (first
/// such on ties) is made positive.
inline void fix_component_sign(std::vector<double>& v) {
  std::size_t arg = 0;
  double best = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (std::abs(v[i]) > best) {
      best = std::abs(v[i]);
      arg = i;
    }
  }
  if (v[arg] < 0.0) {
    for (double& x : v) x = -x;
  }
}

}  // namespace detail

/// Principal-component basis of a point cloud: the column mean, the top
/// out_dim directions (rows of `components`), and the sample variance each
/// captures, in non-increasing order.
struct PcaBasis {
  std::vector<double> mean;
  Mat<double> components;  // out_dim x dim
  std::vector<double> variances;
};

template <typename Scalar>
PcaBasis pca_fit(const Mat<Scalar>& points, std::size_t out_dim) {
  const std::size_t n = points.rows();
  const std::size_t dim = points.cols();
  if (n < 2) throw DegenerateInputError("PCA needs at least 2 vectors");
  if (out_dim == 0 || out_dim > dim) {
    throw InvariantError("PCA output dimension must be in [1, dim]");
  }

  PcaBasis basis;
  basis.mean.assign(dim, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < dim; ++c) basis.mean[c] += static_cast<double>(points(r, c));
  }
  for (double& m : basis.mean) m /= static_cast<double>(n);

  Mat<double> centered(n, dim);
  double spread = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < dim; ++c) {
      centered(r, c) = static_cast<double>(points(r, c)) - basis.mean[c];
      spread = std::max(spread, std::abs(centered(r, c)));
    }
  }
  if (spread == 0.0) throw DegenerateInputError("all input vectors are identical");

  // Eigendecompose whichever of X^T X (dim x dim) or X X^T (n x n) is
  // smaller; the two share nonzero spectra and the directions convert via
  // v = X^T u / ||X^T u||.
  const double norm = 1.0 / static_cast<double>(n - 1);
  Mat<double> eigvecs;
  std::vector<double> eigvals;
  const bool use_gram = n < dim;
  if (!use_gram) {
    Mat<double> cov(dim, dim);
    for (std::size_t i = 0; i < dim; ++i) {
      for (std::size_t j = i; j < dim; ++j) {
        double acc = 0.0;
        for (std::size_t r = 0; r < n; ++r) acc += centered(r, i) * centered(r, j);
        cov(i, j) = cov(j, i) = acc * norm;
      }
    }
    eigvals = detail::jacobi_eigen_symmetric(std::move(cov), eigvecs);
  } else {
    Mat<double> gram(n, n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i; j < n; ++j) {
        double acc = 0.0;
        for (std::size_t c = 0; c < dim; ++c) acc += centered(i, c) * centered(j, c);
        gram(i, j) = gram(j, i) = acc * norm;
      }
    }
    eigvals = detail::jacobi_eigen_symmetric(std::move(gram), eigvecs);
  }

  std::vector<std::size_t> order(eigvals.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return eigvals[a] > eigvals[b]; });

  basis.components = Mat<double>(out_dim, dim);
  basis.variances.assign(out_dim, 0.0);
  std::vector<double> direction(dim);
  for (std::size_t k = 0; k < out_dim; ++k) {
    double lambda = 0.0;
    if (k < order.size()) {
      const std::size_t src = order[k];
      lambda = std::max(0.0, eigvals[src]);
      if (!use_gram) {
        for (std::size_t c = 0; c < dim; ++c) direction[c] = eigvecs(c, src);
      } else {
        // Lift the Gram eigenvector into feature space.
        for (std::size_t c = 0; c < dim; ++c) {
          double acc = 0.0;
          for (std::size_t r = 0; r < n; ++r) acc += centered(r, c) * eigvecs(r, src);
          direction[c] = acc;
        }
      }
    } else {
      std::fill(direction.begin(), direction.end(), 0.0);
    }
    double len = 0.0;
    for (double v : direction) len += v * v;
    len = std::sqrt(len);
    if (len < 1e-12) {
      // Rank-deficient tail: fill in a deterministic unit vector orthogonal
      // to the components found so far.
      for (std::size_t basis_axis = 0; basis_axis < dim; ++basis_axis) {
        std::fill(direction.begin(), direction.end(), 0.0);
        direction[basis_axis] = 1.0;
        for (std::size_t prev = 0; prev < k; ++prev) {
          double dot = 0.0;
          for (std::size_t c = 0; c < dim; ++c) dot += direction[c] * basis.components(prev, c);
          for (std::size_t c = 0; c < dim; ++c) direction[c] -= dot * basis.components(prev, c);
        }
        double rem = 0.0;
        for (double v : direction) rem += v * v;
        if (rem > 1e-12) {
          len = std::sqrt(rem);
          break;
        }
      }
      lambda = 0.0;
    }
    detail::fix_component_sign(direction);
    for (std::size_t c = 0; c < dim; ++c) basis.components(k, c) = direction[c] / len;
    basis.variances[k] = lambda;
  }
  return basis;
}

/// Mean-center and project onto the top out_dim principal directions.
/// Projection variance is non-increasing across components.
template <typename Scalar>
Mat<double> pca_project(const Mat<Scalar>& points, std::size_t out_dim = 2) {
  const PcaBasis basis = pca_fit(points, out_dim);
  const std::size_t n = points.rows();
  const std::size_t dim = points.cols();
  Mat<double> projected(n, out_dim);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t k = 0; k < out_dim; ++k) {
      double acc = 0.0;
      for (std::size_t c = 0; c < dim; ++c) {
        acc += (static_cast<double>(points(r, c)) - basis.mean[c]) * basis.components(k, c);
      }
      projected(r, k) = acc;
    }
  }
  return projected;
}

}  // namespace acrodis
