#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <span>

namespace pic {

// Leave-one-out k-nearest-neighbour classification accuracy under cosine
// similarity. features: one column per sample. Neighbours are ranked by
// (similarity desc, index asc); vote ties go to the class holding the
// best-ranked neighbour, so the result is deterministic.
double knn_eval(const Eigen::MatrixXd& features, std::span<const std::uint32_t> labels,
                std::size_t k);

// Multinomial logistic probe: full-batch gradient descent to convergence on a
// deterministic 75/25 split of the samples; returns held-out accuracy.
double linear_eval(const Eigen::MatrixXd& features, std::span<const std::uint32_t> labels,
                   std::size_t num_classes, std::uint64_t seed = 0);

}  // namespace pic
