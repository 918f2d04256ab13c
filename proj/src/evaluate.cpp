#include "pic/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>
#include <vector>

namespace pic {

double knn_eval(const Eigen::MatrixXd& features, std::span<const std::uint32_t> labels,
                std::size_t k) {
  const std::size_t m = static_cast<std::size_t>(features.cols());
  if (m < 2) throw std::invalid_argument("knn_eval: need at least two samples");
  if (labels.size() != m) throw std::invalid_argument("knn_eval: one label per sample required");
  if (k < 1) throw std::invalid_argument("knn_eval: k must be >= 1");
  if (!features.allFinite()) throw std::invalid_argument("knn_eval: non-finite features");
  k = std::min(k, m - 1);

  Eigen::MatrixXd unit = features;
  for (Eigen::Index c = 0; c < unit.cols(); ++c) {
    const double n = unit.col(c).norm();
    if (n > 0.0) unit.col(c) /= n;
  }
  const Eigen::MatrixXd sim = unit.transpose() * unit;

  std::uint32_t max_label = 0;
  for (const auto l : labels) max_label = std::max(max_label, l);

  std::size_t correct = 0;
  std::vector<std::uint32_t> order(m - 1);
  std::vector<std::size_t> votes(max_label + 1);
  std::vector<std::size_t> best_rank(max_label + 1);
  for (std::size_t i = 0; i < m; ++i) {
    std::size_t idx = 0;
    for (std::size_t j = 0; j < m; ++j) {
      if (j != i) order[idx++] = static_cast<std::uint32_t>(j);
    }
    const auto col = sim.col(static_cast<Eigen::Index>(i));
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                      [&](std::uint32_t a, std::uint32_t b) {
                        if (col(a) != col(b)) return col(a) > col(b);
                        return a < b;
                      });
    std::fill(votes.begin(), votes.end(), 0u);
    std::fill(best_rank.begin(), best_rank.end(), std::numeric_limits<std::size_t>::max());
    for (std::size_t r = 0; r < k; ++r) {
      const std::uint32_t cls = labels[order[r]];
      ++votes[cls];
      best_rank[cls] = std::min(best_rank[cls], r);
    }
    std::uint32_t winner = 0;
    std::size_t winner_votes = 0;
    std::size_t winner_rank = std::numeric_limits<std::size_t>::max();
    for (std::uint32_t cls = 0; cls <= max_label; ++cls) {
      if (votes[cls] > winner_votes ||
          (votes[cls] == winner_votes && votes[cls] > 0 && best_rank[cls] < winner_rank)) {
        winner = cls;
        winner_votes = votes[cls];
        winner_rank = best_rank[cls];
      }
    }
    if (winner == labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(m);
}

double linear_eval(const Eigen::MatrixXd& features, std::span<const std::uint32_t> labels,
                   std::size_t num_classes, std::uint64_t seed) {
  const std::size_t m = static_cast<std::size_t>(features.cols());
  const std::size_t dim = static_cast<std::size_t>(features.rows());
  if (labels.size() != m) throw std::invalid_argument("linear_eval: one label per sample required");
  if (m < 8) throw std::invalid_argument("linear_eval: too few samples to split");
  if (!features.allFinite()) throw std::invalid_argument("linear_eval: non-finite features");
  for (const auto l : labels) {
    if (l >= num_classes) throw std::invalid_argument("linear_eval: label out of range");
  }

  // unit-normalize so one learning rate works across feature scales
  Eigen::MatrixXd x = features;
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    const double n = x.col(c).norm();
    if (n > 0.0) x.col(c) /= n;
  }

  std::vector<std::uint32_t> order(m);
  std::iota(order.begin(), order.end(), 0u);
  std::mt19937_64 rng(seed ^ 0x11ea1ull);
  std::shuffle(order.begin(), order.end(), rng);
  const std::size_t train_n = (3 * m) / 4;
  const std::size_t test_n = m - train_n;

  Eigen::MatrixXd xtr(dim, train_n), xte(dim, test_n);
  std::vector<std::uint32_t> ytr(train_n), yte(test_n);
  for (std::size_t i = 0; i < train_n; ++i) {
    xtr.col(static_cast<Eigen::Index>(i)) = x.col(order[i]);
    ytr[i] = labels[order[i]];
  }
  for (std::size_t i = 0; i < test_n; ++i) {
    xte.col(static_cast<Eigen::Index>(i)) = x.col(order[train_n + i]);
    yte[i] = labels[order[train_n + i]];
  }

  // full-batch softmax regression with heavy-ball momentum; the problem is
  // convex, so run until the loss flattens
  const Eigen::Index c_n = static_cast<Eigen::Index>(num_classes);
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(c_n, static_cast<Eigen::Index>(dim));
  Eigen::VectorXd b = Eigen::VectorXd::Zero(c_n);
  Eigen::MatrixXd mw = w;
  Eigen::VectorXd mb = b;
  double lr = 4.0;
  double prev_loss = std::numeric_limits<double>::infinity();
  const double inv_n = 1.0 / static_cast<double>(train_n);

  for (int iter = 0; iter < 1200; ++iter) {
    Eigen::MatrixXd logits = (w * xtr).colwise() + b;  // C x n
    double loss = 0.0;
    for (Eigen::Index j = 0; j < logits.cols(); ++j) {
      const double mx = logits.col(j).maxCoeff();
      logits.col(j) = (logits.col(j).array() - mx).exp();
      const double denom = logits.col(j).sum();
      loss -= std::log(logits.col(j)(ytr[static_cast<std::size_t>(j)]) / denom);
      logits.col(j) /= denom;  // now probabilities
      logits(ytr[static_cast<std::size_t>(j)], j) -= 1.0;
    }
    loss *= inv_n;
    if (loss > prev_loss + 1e-12) lr *= 0.5;  // overshoot guard
    if (std::fabs(prev_loss - loss) < 1e-9 && iter > 50) break;
    prev_loss = loss;

    const Eigen::MatrixXd gw = (logits * xtr.transpose()) * inv_n;
    const Eigen::VectorXd gb = logits.rowwise().sum() * inv_n;
    mw = 0.9 * mw + gw;
    mb = 0.9 * mb + gb;
    w -= lr * mw;
    b -= lr * mb;
  }

  std::size_t correct = 0;
  const Eigen::MatrixXd logits = (w * xte).colwise() + b;
  for (Eigen::Index j = 0; j < logits.cols(); ++j) {
    Eigen::Index argmax = 0;
    logits.col(j).maxCoeff(&argmax);
    if (static_cast<std::uint32_t>(argmax) == yte[static_cast<std::size_t>(j)]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(test_n);
}

}  // namespace pic
