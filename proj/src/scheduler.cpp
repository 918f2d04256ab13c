#include "pic/scheduler.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace pic {

EpochScheduler::EpochScheduler(std::size_t n, std::uint64_t seed, bool shuffle)
    : n_(n), shuffle_(shuffle), rng_(seed) {
  if (n == 0) throw std::invalid_argument("EpochScheduler: empty dataset");
}

IndexSequence EpochScheduler::next_epoch() {
  IndexSequence out(n_);
  std::iota(out.begin(), out.end(), 0u);
  if (shuffle_) std::shuffle(out.begin(), out.end(), rng_);
  return out;
}

SlidingWindowScheduler::SlidingWindowScheduler(std::size_t n, std::size_t window,
                                               std::size_t stride, std::uint64_t seed,
                                               bool shuffle_init, bool shuffle_window)
    : n_(n), window_(window), stride_(stride), shuffle_window_(shuffle_window), rng_(seed) {
  if (n == 0) throw std::invalid_argument("SlidingWindowScheduler: empty dataset");
  if (stride < 1 || stride > window || window > n) {
    throw std::invalid_argument("SlidingWindowScheduler: need 1 <= stride <= window <= n");
  }
  perm_.resize(n_);
  std::iota(perm_.begin(), perm_.end(), 0u);
  // The global permutation is shuffled exactly once, here; only the emitted
  // windows are reshuffled afterwards.
  if (shuffle_init) std::shuffle(perm_.begin(), perm_.end(), rng_);
}

IndexSequence SlidingWindowScheduler::next_window() {
  IndexSequence out(window_);
  for (std::size_t j = 0; j < window_; ++j) {
    out[j] = perm_[(start_ + j) % n_];
  }
  if (shuffle_window_) std::shuffle(out.begin(), out.end(), rng_);
  start_ = (start_ + stride_) % n_;
  return out;
}

double majority_ratio(std::size_t window, std::size_t stride) {
  if (stride < 1 || stride > window) {
    throw std::invalid_argument("majority_ratio: need 1 <= stride <= window");
  }
  return static_cast<double>(window - stride) / static_cast<double>(window);
}

double GapStats::frac_within(std::uint64_t threshold) const {
  if (gaps.empty()) return 0.0;
  const auto it = std::upper_bound(gaps.begin(), gaps.end(), threshold);
  return static_cast<double>(it - gaps.begin()) / static_cast<double>(gaps.size());
}

GapStats visit_gap_stats(std::span<const std::uint32_t> stream, std::size_t n) {
  GapStats stats;
  stats.per_instance_counts.assign(n, 0u);
  std::vector<std::uint64_t> last_pos(n, 0);
  std::vector<bool> seen(n, false);

  for (std::size_t pos = 0; pos < stream.size(); ++pos) {
    const std::uint32_t id = stream[pos];
    if (id >= n) throw std::out_of_range("visit_gap_stats: index out of range");
    if (seen[id]) stats.gaps.push_back(pos - last_pos[id]);
    seen[id] = true;
    last_pos[id] = pos;
    ++stats.per_instance_counts[id];
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (stats.per_instance_counts[i] < 2) ++stats.never_revisited;
  }
  if (stats.gaps.empty()) return stats;

  std::sort(stats.gaps.begin(), stats.gaps.end());
  double sum = 0.0;
  for (const auto g : stats.gaps) sum += static_cast<double>(g);
  stats.mean_gap = sum / static_cast<double>(stats.gaps.size());
  const std::size_t k = stats.gaps.size();
  stats.median_gap = (k % 2 == 1)
                         ? static_cast<double>(stats.gaps[k / 2])
                         : 0.5 * (static_cast<double>(stats.gaps[k / 2 - 1]) +
                                  static_cast<double>(stats.gaps[k / 2]));
  return stats;
}

}  // namespace pic
