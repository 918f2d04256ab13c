#include "doctest.h"

#include <cmath>
#include <random>
#include <vector>

#include "pic/cosine_loss.hpp"
#include "support/loss_oracle.hpp"

using pic::FeatureBatch;
using pic::LogitMode;
using pic::MatrixX;

namespace {

MatrixX<double> random_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed,
                              double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, scale);
  MatrixX<double> m(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c)
    for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = gauss(rng);
  return m;
}

std::vector<std::vector<double>> to_columns(const MatrixX<double>& m) {
  std::vector<std::vector<double>> cols(m.cols());
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    cols[j].assign(m.col(j).data(), m.col(j).data() + m.rows());
  }
  return cols;
}

// Central finite difference of the loss wrt one entry of `target`.
double fd_gradient(MatrixX<double>& features, MatrixX<double>& weights,
                   const std::vector<std::uint32_t>& labels, double tau, bool cosine,
                   MatrixX<double>& target, Eigen::Index r, Eigen::Index c, double h = 1e-5) {
  const double saved = target(r, c);
  target(r, c) = saved + h;
  const double up = oracle::loss_reference(to_columns(features), to_columns(weights), labels, tau, cosine);
  target(r, c) = saved - h;
  const double down = oracle::loss_reference(to_columns(features), to_columns(weights), labels, tau, cosine);
  target(r, c) = saved;
  return (up - down) / (2.0 * h);
}

// Entries below the finite-difference noise floor are compared absolutely.
double rel_err(double a, double b) {
  return std::fabs(a - b) / std::max({std::fabs(a), std::fabs(b), 1e-3});
}

}  // namespace

TEST_CASE("cosine logits basic geometry") {
  MatrixX<double> z(2, 1), w(2, 1);
  z << 1, 0;
  w << 2, 0;
  CHECK(pic::cosine_logits(z, w)(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
  w << 0, 3;
  CHECK(pic::cosine_logits(z, w)(0, 0) == doctest::Approx(0.0).epsilon(1e-12));
  z << 1, 1;
  w << 1, 0;
  CHECK(pic::cosine_logits(z, w)(0, 0) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-8));
}

TEST_CASE("cosine logits stay within [-1, 1]") {
  const auto z = random_matrix(5, 8, 1), w = random_matrix(5, 13, 2);
  const auto logits = pic::cosine_logits(z, w);
  CHECK(logits.maxCoeff() <= 1.0 + 1e-12);
  CHECK(logits.minCoeff() >= -1.0 - 1e-12);
}

TEST_CASE("zero-norm inputs are rejected") {
  MatrixX<double> z = MatrixX<double>::Zero(3, 1);
  MatrixX<double> w = random_matrix(3, 2, 3);
  CHECK_THROWS_AS(pic::cosine_logits(z, w), pic::DegenerateInputError);
  CHECK_THROWS_AS(pic::cosine_logits(w, z), pic::DegenerateInputError);
}

TEST_CASE("softmax_xent closed-form values") {
  // single class: numerator equals denominator
  MatrixX<double> one(1, 1);
  one << 0.73;
  const std::vector<std::uint32_t> label0{0};
  CHECK(pic::softmax_xent(one, label0, 0.2).loss == 0.0);

  // cosines [1, 0] at tau = 0.2: loss = log(1 + e^-5)
  MatrixX<double> two(1, 2);
  two << 1.0, 0.0;
  const auto out = pic::softmax_xent(two, label0, 0.2);
  CHECK(out.loss == doctest::Approx(std::log1p(std::exp(-5.0))).epsilon(1e-10));
  CHECK(out.loss == doctest::Approx(0.0067153).epsilon(1e-4));

  // uniform logits: loss = log C
  MatrixX<double> uniform = MatrixX<double>::Constant(3, 7, 0.42);
  const std::vector<std::uint32_t> labels{0, 3, 6};
  CHECK(pic::softmax_xent(uniform, labels, 0.2).loss ==
        doctest::Approx(std::log(7.0)).epsilon(1e-12));
}

TEST_CASE("probability rows sum to one") {
  const auto z = random_matrix(6, 4, 10), w = random_matrix(6, 9, 11);
  const auto logits = pic::cosine_logits(z, w);
  const std::vector<std::uint32_t> labels{0, 1, 2, 3};
  const auto out = pic::softmax_xent(logits, labels, 0.2);
  for (Eigen::Index i = 0; i < out.probs.rows(); ++i) {
    CHECK(out.probs.row(i).sum() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(out.probs.row(i).minCoeff() >= 0.0);
  }
  CHECK(out.loss >= 0.0);
}

TEST_CASE("analytic gradients match finite differences") {
  const Eigen::Index batch = 4, classes = 7, dim = 5;
  auto z = random_matrix(dim, batch, 21);
  auto w = random_matrix(dim, classes, 22);
  const std::vector<std::uint32_t> labels{2, 0, 6, 3};

  for (const bool cosine : {true, false}) {
    const LogitMode mode = cosine ? LogitMode::kCosine : LogitMode::kDot;
    const double tau = cosine ? 0.2 : 1.0;
    FeatureBatch<double> fb{z, labels};
    const auto out = pic::loss_forward_backward(fb, w, tau, mode);

    double worst = 0.0;
    for (Eigen::Index c = 0; c < batch; ++c)
      for (Eigen::Index r = 0; r < dim; ++r)
        worst = std::max(worst, rel_err(out.dZ(r, c), fd_gradient(z, w, labels, tau, cosine, z, r, c)));
    for (Eigen::Index c = 0; c < classes; ++c)
      for (Eigen::Index r = 0; r < dim; ++r)
        worst = std::max(worst, rel_err(out.dW(r, c), fd_gradient(z, w, labels, tau, cosine, w, r, c)));
    CHECK(worst < 1e-6);
  }
}

TEST_CASE("loss is invariant to rescaling features or weights") {
  auto z = random_matrix(6, 5, 31);
  auto w = random_matrix(6, 11, 32);
  const std::vector<std::uint32_t> labels{1, 4, 7, 0, 10};
  FeatureBatch<double> fb{z, labels};
  const auto base = pic::loss_forward_backward(fb, w, 0.2, LogitMode::kCosine);

  MatrixX<double> z_scaled = z;
  z_scaled.col(2) *= 10.0;
  FeatureBatch<double> fb_scaled{z_scaled, labels};
  const auto scaled = pic::loss_forward_backward(fb_scaled, w, 0.2, LogitMode::kCosine);
  CHECK(std::fabs(scaled.loss - base.loss) < 1e-10);
  // gradient of the scaled sample shrinks by the same factor
  CHECK((scaled.dZ.col(2) * 10.0 - base.dZ.col(2)).cwiseAbs().maxCoeff() < 1e-12);

  MatrixX<double> w_scaled = w;
  w_scaled.col(7) *= 3.5;
  FeatureBatch<double> fb2{z, labels};
  const auto wscaled = pic::loss_forward_backward(fb2, w_scaled, 0.2, LogitMode::kCosine);
  CHECK(std::fabs(wscaled.loss - base.loss) < 1e-10);
}

TEST_CASE("saturated correct classification has vanishing gradients") {
  const Eigen::Index dim = 4, classes = 3;
  MatrixX<double> w = MatrixX<double>::Zero(dim, classes);
  w(0, 0) = 1.0;
  w(1, 1) = 1.0;
  w(2, 2) = 1.0;
  MatrixX<double> z = MatrixX<double>::Zero(dim, 1);
  z(0, 0) = 1.0;  // aligned with class 0, orthogonal to the rest
  const std::vector<std::uint32_t> labels{0};
  FeatureBatch<double> fb{z, labels};
  const auto out = pic::loss_forward_backward(fb, w, 0.01, LogitMode::kCosine);
  CHECK(out.loss < 1e-12);
  CHECK(out.dZ.cwiseAbs().maxCoeff() < 1e-12);
  CHECK(out.dW.cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("per-sample probability mass conservation") {
  const auto z = random_matrix(5, 6, 41);
  const auto w = random_matrix(5, 9, 42);
  const std::vector<std::uint32_t> labels{0, 2, 4, 6, 8, 1};
  const auto logits = pic::cosine_logits(z, w);
  const auto out = pic::softmax_xent(logits, labels, 0.2);
  for (Eigen::Index i = 0; i < out.probs.rows(); ++i) {
    double mass = 0.0;
    for (Eigen::Index j = 0; j < out.probs.cols(); ++j) {
      mass += out.probs(i, j) - (labels[i] == static_cast<std::uint32_t>(j) ? 1.0 : 0.0);
    }
    CHECK(std::fabs(mass) < 1e-9);
  }
}

TEST_CASE("library loss equals the brute-force reference over all classes") {
  const auto z = random_matrix(8, 6, 51);
  const auto w = random_matrix(8, 40, 52);  // class set = every class
  const std::vector<std::uint32_t> labels{0, 5, 11, 17, 23, 39};
  FeatureBatch<double> fb{z, labels};
  for (const bool cosine : {true, false}) {
    const double tau = cosine ? 0.2 : 1.0;
    const auto out = pic::loss_forward_backward(
        fb, w, tau, cosine ? LogitMode::kCosine : LogitMode::kDot);
    const double ref = oracle::loss_reference(to_columns(z), to_columns(w), labels, tau, cosine);
    CHECK(std::fabs(out.loss - ref) < 1e-10);
  }
}

TEST_CASE("temperature sharpening rewards the winner and punishes clear losers") {
  // When the positive logit is the strict max, every logit deficit is <= 0,
  // so the loss is monotone nonincreasing as tau shrinks. When another class
  // leads by a margin, the loss blows up as tau -> 0. (Without a margin the
  // second statement can fail: a runner-up ahead by epsilon keeps the sharp
  // loss near log 2 while a soft loss can sit higher.)
  std::mt19937_64 rng(61);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  const std::vector<double> taus{0.5, 0.2, 0.1, 0.05};
  for (int trial = 0; trial < 50; ++trial) {
    MatrixX<double> logits(1, 6);
    for (Eigen::Index j = 0; j < 6; ++j) logits(0, j) = unif(rng);
    Eigen::Index argmax;
    logits.row(0).maxCoeff(&argmax);

    const std::vector<std::uint32_t> winner{static_cast<std::uint32_t>(argmax)};
    double prev = pic::softmax_xent(logits, winner, taus[0]).loss;
    for (std::size_t k = 1; k < taus.size(); ++k) {
      const double cur = pic::softmax_xent(logits, winner, taus[k]).loss;
      CHECK(cur <= prev + 1e-12);
      prev = cur;
    }

    std::uint32_t loser = (winner[0] + 1) % 6;
    if (logits(0, argmax) - logits(0, loser) >= 0.05) {
      const std::vector<std::uint32_t> label{loser};
      const double sharp = pic::softmax_xent(logits, label, 1e-3).loss;
      const double soft = pic::softmax_xent(logits, label, 0.2).loss;
      CHECK(sharp > soft);
    }
  }
}

TEST_CASE("single precision instantiation agrees with double") {
  const auto z = random_matrix(6, 4, 71);
  const auto w = random_matrix(6, 10, 72);
  const std::vector<std::uint32_t> labels{3, 1, 9, 0};
  FeatureBatch<double> fd{z, labels};
  const auto ref = pic::loss_forward_backward(fd, w, 0.2, LogitMode::kCosine);

  FeatureBatch<float> ff{z.cast<float>(), labels};
  const MatrixX<float> wf = w.cast<float>();
  const auto got = pic::loss_forward_backward(ff, wf, 0.2, LogitMode::kCosine);
  CHECK(std::fabs(got.loss - ref.loss) < 1e-5);
  CHECK((got.dZ.cast<double>() - ref.dZ).cwiseAbs().maxCoeff() < 1e-5);
  CHECK((got.dW.cast<double>() - ref.dW).cwiseAbs().maxCoeff() < 1e-5);
}
