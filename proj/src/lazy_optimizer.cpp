#include "pic/lazy_optimizer.hpp"

#include <cmath>
#include <numbers>

namespace pic {

double LrSchedule::at(std::uint64_t t) const {
  if (t > total_iters) throw std::out_of_range("LrSchedule::at: t > total_iters");
  if (warmup_iters > 0 && t < warmup_iters) {
    return base_lr * static_cast<double>(t) / static_cast<double>(warmup_iters);
  }
  if (total_iters <= warmup_iters) return base_lr;
  const double progress =
      static_cast<double>(t - warmup_iters) / static_cast<double>(total_iters - warmup_iters);
  return base_lr * 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
}

}  // namespace pic
