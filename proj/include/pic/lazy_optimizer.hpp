#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>

#include "pic/mat2.hpp"

namespace pic {

// Per-iteration SGD hyperparameters (heavy-ball momentum, coupled decay):
//   u' = m*u + (g + lambda*w),  w' = w - eta*u'
struct SgdHyper {
  double lr = 0.0;
  double weight_decay = 0.0;
  double momentum = 0.0;
};

template <typename Scalar>
void sgd_step(std::span<Scalar> w, std::span<Scalar> u, std::span<const Scalar> g,
              const SgdHyper& h) {
  const Scalar m = static_cast<Scalar>(h.momentum);
  const Scalar lambda = static_cast<Scalar>(h.weight_decay);
  const Scalar eta = static_cast<Scalar>(h.lr);
  for (std::size_t i = 0; i < w.size(); ++i) {
    u[i] = m * u[i] + (g[i] + lambda * w[i]);
    w[i] -= eta * u[i];
  }
}

// Plain SGD without momentum buffer, for parameters exempt from decay pass
// lambda = 0 via the hyper.
template <typename Scalar>
void sgd_step_no_decay(std::span<Scalar> w, std::span<Scalar> u, std::span<const Scalar> g,
                       const SgdHyper& h) {
  SgdHyper plain = h;
  plain.weight_decay = 0.0;
  sgd_step(w, u, g, plain);
}

// Applies the 2x2 transfer matrix to every (w[i], u[i]) coordinate pair.
// The matrix arithmetic stays in double regardless of Scalar.
template <typename Scalar>
void apply_transfer(const Mat2& m, std::span<Scalar> w, std::span<Scalar> u) {
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double wi = static_cast<double>(w[i]);
    const double ui = static_cast<double>(u[i]);
    w[i] = static_cast<Scalar>(m.a11 * wi + m.a12 * ui);
    u[i] = static_cast<Scalar>(m.a21 * wi + m.a22 * ui);
  }
}

// Closed-form catch-up for a column skipped between iterations t_last and
// t_now: identical to t_now - t_last zero-gradient sgd_steps under the
// hyperparameters recorded in `log`.
template <typename Scalar>
void lazy_correct(std::span<Scalar> w, std::span<Scalar> u, std::uint64_t t_last,
                  std::uint64_t t_now, const HyperLog& log) {
  if (t_last > t_now) throw std::out_of_range("lazy_correct: t_last > t_now");
  if (t_last == t_now) return;
  apply_transfer(log.range_product(t_last, t_now), w, u);
}

// Linear warm-up to base_lr over warmup_iters, then cosine decay to zero at
// total_iters.
struct LrSchedule {
  double base_lr = 0.06;
  std::uint64_t warmup_iters = 0;
  std::uint64_t total_iters = 0;

  double at(std::uint64_t t) const;
};

// One SGD step over a flat parameter tensor (weights of a layer, a bias
// block, ...). Biases and other decay-exempt groups pass decay = false.
template <typename Scalar>
void step_model(std::span<Scalar> params, std::span<const Scalar> grads,
                std::span<Scalar> momenta, const SgdHyper& h, bool decay = true) {
  if (params.size() != grads.size() || params.size() != momenta.size()) {
    throw std::invalid_argument("step_model: parameter/gradient/momentum sizes differ");
  }
  if (decay) {
    sgd_step(params, momenta, grads, h);
  } else {
    sgd_step_no_decay(params, momenta, grads, h);
  }
}

}  // namespace pic
