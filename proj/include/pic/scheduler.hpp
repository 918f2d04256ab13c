#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace pic {

using IndexSequence = std::vector<std::uint32_t>;

// Baseline scheduler: a fresh uniform permutation of {0..N-1} per epoch.
class EpochScheduler {
 public:
  EpochScheduler(std::size_t n, std::uint64_t seed, bool shuffle = true);

  IndexSequence next_epoch();
  std::size_t dataset_size() const { return n_; }

 private:
  std::size_t n_;
  bool shuffle_;
  std::mt19937_64 rng_;
};

// Sliding-window scheduler: a global permutation fixed at construction; each
// call emits the W entries starting at the current offset (wrapping mod N),
// shuffled, then advances the offset by the stride S.
class SlidingWindowScheduler {
 public:
  // shuffle_init: shuffle the global permutation once at construction.
  // shuffle_window: shuffle each emitted window. Disabling both makes the
  // output a pure function of (n, window, stride, start).
  SlidingWindowScheduler(std::size_t n, std::size_t window, std::size_t stride,
                         std::uint64_t seed, bool shuffle_init = true,
                         bool shuffle_window = true);

  IndexSequence next_window();

  std::size_t dataset_size() const { return n_; }
  std::size_t window_size() const { return window_; }
  std::size_t stride() const { return stride_; }
  std::size_t start() const { return start_; }
  std::span<const std::uint32_t> permutation() const { return perm_; }

 private:
  std::size_t n_, window_, stride_;
  std::size_t start_ = 0;
  std::vector<std::uint32_t> perm_;
  bool shuffle_window_;
  std::mt19937_64 rng_;
};

// Fraction (W - S) / W of a window shared with its successor.
double majority_ratio(std::size_t window, std::size_t stride);

// Inter-visit distance statistics over an emitted index stream.
struct GapStats {
  double mean_gap = 0.0;
  double median_gap = 0.0;
  std::vector<std::uint64_t> gaps;                // sorted ascending
  std::vector<std::uint32_t> per_instance_counts; // visits per instance id
  std::size_t never_revisited = 0;                // instances with < 2 visits

  // Fraction of gaps <= threshold; 1.0 once threshold covers every gap.
  double frac_within(std::uint64_t threshold) const;
};

// Collects, for every instance, the distances (in samples) between its
// consecutive occurrences in `stream`. Instances seen fewer than twice
// contribute no gaps and are tallied in never_revisited.
GapStats visit_gap_stats(std::span<const std::uint32_t> stream, std::size_t n);

}  // namespace pic
