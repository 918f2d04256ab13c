#include "pic/verify.hpp"

#include <algorithm>
#include <random>
#include <vector>

#include "pic/instance_store.hpp"
#include "pic/lazy_optimizer.hpp"
#include "pic/mat2.hpp"

namespace pic {

VerifyResult verify_correction(const VerifyOptions& opt) {
  InstanceClassifier<double> store(opt.columns, opt.dim, 0.2, opt.seed);
  MatrixX<double> w_ref = store.weights();
  MatrixX<double> u_ref = store.momenta();
  HyperLog log;
  const LrSchedule schedule{opt.base_lr,
                            static_cast<std::uint64_t>(opt.warmup_frac *
                                                       static_cast<double>(opt.iterations)),
                            opt.iterations};

  std::mt19937_64 rng(opt.seed ^ 0xFEEDull);
  std::uniform_int_distribution<std::uint32_t> pick(0, static_cast<std::uint32_t>(opt.columns - 1));
  std::normal_distribution<double> gauss(0.0, 0.05);

  MatrixX<double> dense_grads(static_cast<Eigen::Index>(opt.dim),
                              static_cast<Eigen::Index>(opt.columns));
  for (std::uint64_t t = 0; t < opt.iterations; ++t) {
    const SgdHyper h{schedule.at(t), opt.weight_decay, opt.momentum};

    std::vector<std::uint32_t> ids(opt.visits_per_iter);
    for (auto& id : ids) id = pick(rng);
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());

    MatrixX<double> grads(static_cast<Eigen::Index>(opt.dim),
                          static_cast<Eigen::Index>(ids.size()));
    for (Eigen::Index j = 0; j < grads.cols(); ++j)
      for (Eigen::Index d = 0; d < grads.rows(); ++d) grads(d, j) = gauss(rng);

    if (opt.correction) {
      store.gather_corrected(ids, t, log);
    } else {
      store.gather_frozen(ids, t);
    }
    store.apply_gradient(ids, grads, h, t);

    // dense reference applies the same step to every column
    dense_grads.setZero();
    for (std::size_t j = 0; j < ids.size(); ++j) {
      dense_grads.col(static_cast<Eigen::Index>(ids[j])) = grads.col(static_cast<Eigen::Index>(j));
    }
    u_ref = h.momentum * u_ref + (dense_grads + h.weight_decay * w_ref);
    w_ref -= h.lr * u_ref;

    log.record(h.lr, h.weight_decay, h.momentum);
  }

  // bring every column up to date before comparing
  std::vector<std::uint32_t> all(opt.columns);
  for (std::size_t i = 0; i < opt.columns; ++i) all[i] = static_cast<std::uint32_t>(i);
  const WeightBlock<double> final_block =
      opt.correction ? store.gather_corrected(all, opt.iterations, log)
                     : store.gather_frozen(all, opt.iterations);

  VerifyResult result;
  result.iterations = opt.iterations;
  if (opt.iterations > 0 || opt.columns > 0) {
    const double dev_w = (final_block.weights - w_ref).cwiseAbs().maxCoeff();
    const double dev_u = (final_block.momenta - u_ref).cwiseAbs().maxCoeff();
    result.max_abs_deviation = std::max(dev_w, dev_u);
  }
  return result;
}

}  // namespace pic
