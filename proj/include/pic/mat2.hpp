#pragma once

#include <atomic>
#include <cstdint>
#include <deque>
#include <vector>

namespace pic {

// 2x2 real matrix, row-major: [[a11, a12], [a21, a22]].
// Always double precision; this arithmetic is the reference the rest of the
// optimizer stack is checked against.
struct Mat2 {
  double a11 = 0.0, a12 = 0.0;
  double a21 = 0.0, a22 = 0.0;

  static Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
  double det() const { return a11 * a22 - a12 * a21; }
  bool finite() const;
};

// One zero-gradient SGD step on the (weight, momentum) pair:
//   u' = m*u + lambda*w,  w' = w - eta*u'
// collapses to the matrix [[1 - eta*lambda, -eta*m], [lambda, m]].
// Requires eta >= 0, lambda >= 0, 0 <= m < 1.
Mat2 transfer_matrix(double lr, double weight_decay, double momentum);

Mat2 mat2_mul(const Mat2& a, const Mat2& b);

// a^n by exponentiation-by-squaring; a^0 is the identity.
Mat2 mat2_pow(Mat2 a, std::uint64_t n);

// Run-length-encoded history of per-iteration SGD hyperparameters.
// Append-only: a single writer records one iteration at a time; readers may
// concurrently take products over any prefix they have observed via
// total_iters(). Segment products are always formed by forward multiplication
// (never via inverses: det of a t-step product is m^t, which underflows).
class HyperLog {
 public:
  struct Segment {
    double lr;
    double weight_decay;
    double momentum;
    std::uint64_t start;             // first iteration covered
    std::atomic<std::uint64_t> len;  // grows while the segment is current

    Segment(double lr_, double wd_, double m_, std::uint64_t start_, std::uint64_t len_)
        : lr(lr_), weight_decay(wd_), momentum(m_), start(start_), len(len_) {}
  };

  HyperLog() = default;
  HyperLog(const HyperLog& other);
  HyperLog& operator=(const HyperLog& other);

  // Appends `count` iterations with the given hyperparameters, extending the
  // current segment when they are unchanged.
  void record(double lr, double weight_decay, double momentum, std::uint64_t count = 1);

  std::uint64_t total_iters() const { return total_.load(std::memory_order_acquire); }
  std::size_t segment_count() const { return committed_.load(std::memory_order_acquire); }
  const Segment& segment(std::size_t i) const { return segments_[i]; }

  // Ordered product of the per-iteration transfer matrices for iterations
  // [t1, t2): later iterations multiply on the left, so applying the result
  // to a (w, u) state advances it from iteration t1 to t2. t1 == t2 yields
  // the identity. Throws std::out_of_range unless t1 <= t2 <= total_iters().
  Mat2 range_product(std::uint64_t t1, std::uint64_t t2) const;

  // Hyperparameters in effect at iteration t (t < total_iters()).
  Segment const& segment_at(std::uint64_t t) const;

 private:
  std::deque<Segment> segments_;
  std::atomic<std::size_t> committed_{0};
  std::atomic<std::uint64_t> total_{0};
};

}  // namespace pic
