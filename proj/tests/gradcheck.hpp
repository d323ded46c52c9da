#pragma once

// Central-finite-difference verification of the analytic exact-softmax
// gradients, shared by the unit and acceptance suites.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "acrodis/embedding.hpp"
#include "acrodis/matrix.hpp"

namespace gradcheck {

inline double rel_err(double analytic, double numeric) {
  return std::abs(analytic - numeric) /
         std::max({std::abs(analytic), std::abs(numeric), 1e-3});
}

/// Max relative error between analytic gradients and central differences of
/// the loss, over every parameter of every matrix.
inline double max_gradient_error(acrodis::BasicEmbeddingModel<double> model,
                                 const std::vector<std::vector<std::uint32_t>>& docs,
                                 double step = 1e-5) {
  const acrodis::ModelGradients grads = acrodis::objective_gradients(model, docs);
  double worst = 0.0;
  auto check_matrix = [&](acrodis::Mat<double>& params, const acrodis::Mat<double>& analytic) {
    for (std::size_t i = 0; i < params.data().size(); ++i) {
      const double saved = params.data()[i];
      params.data()[i] = saved + step;
      const double up = acrodis::loss(model, docs);
      params.data()[i] = saved - step;
      const double down = acrodis::loss(model, docs);
      params.data()[i] = saved;
      const double numeric = (up - down) / (2.0 * step);
      worst = std::max(worst, rel_err(analytic.data()[i], numeric));
    }
  };
  check_matrix(model.word_vectors, grads.word_vectors);
  check_matrix(model.output_weights, grads.output_weights);
  check_matrix(model.doc_vectors, grads.doc_vectors);
  return worst;
}

}  // namespace gradcheck
