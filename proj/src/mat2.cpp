#include "pic/mat2.hpp"

#include <cmath>
#include <stdexcept>

namespace pic {

bool Mat2::finite() const {
  return std::isfinite(a11) && std::isfinite(a12) && std::isfinite(a21) && std::isfinite(a22);
}

Mat2 transfer_matrix(double lr, double weight_decay, double momentum) {
  if (lr < 0.0 || weight_decay < 0.0 || momentum < 0.0 || momentum >= 1.0) {
    throw std::invalid_argument("transfer_matrix: need lr >= 0, weight_decay >= 0, 0 <= momentum < 1");
  }
  return {1.0 - lr * weight_decay, -lr * momentum, weight_decay, momentum};
}

Mat2 mat2_mul(const Mat2& a, const Mat2& b) {
  return {a.a11 * b.a11 + a.a12 * b.a21, a.a11 * b.a12 + a.a12 * b.a22,
          a.a21 * b.a11 + a.a22 * b.a21, a.a21 * b.a12 + a.a22 * b.a22};
}

Mat2 mat2_pow(Mat2 a, std::uint64_t n) {
  Mat2 result = Mat2::identity();
  while (n > 0) {
    if (n & 1) result = mat2_mul(result, a);
    a = mat2_mul(a, a);
    n >>= 1;
  }
  return result;
}

HyperLog::HyperLog(const HyperLog& other) { *this = other; }

HyperLog& HyperLog::operator=(const HyperLog& other) {
  if (this == &other) return *this;
  segments_.clear();
  const std::size_t n = other.segment_count();
  for (std::size_t i = 0; i < n; ++i) {
    const Segment& s = other.segments_[i];
    segments_.emplace_back(s.lr, s.weight_decay, s.momentum, s.start,
                           s.len.load(std::memory_order_acquire));
  }
  committed_.store(n, std::memory_order_release);
  total_.store(other.total_iters(), std::memory_order_release);
  return *this;
}

void HyperLog::record(double lr, double weight_decay, double momentum, std::uint64_t count) {
  if (count == 0) return;
  if (lr < 0.0 || weight_decay < 0.0 || momentum < 0.0 || momentum >= 1.0) {
    throw std::invalid_argument("HyperLog::record: need lr >= 0, weight_decay >= 0, 0 <= momentum < 1");
  }
  const std::uint64_t total = total_.load(std::memory_order_relaxed);
  const std::size_t committed = committed_.load(std::memory_order_relaxed);
  if (committed > 0) {
    Segment& last = segments_[committed - 1];
    if (last.lr == lr && last.weight_decay == weight_decay && last.momentum == momentum) {
      last.len.fetch_add(count, std::memory_order_release);
      total_.store(total + count, std::memory_order_release);
      return;
    }
  }
  segments_.emplace_back(lr, weight_decay, momentum, total, count);
  committed_.store(committed + 1, std::memory_order_release);
  total_.store(total + count, std::memory_order_release);
}

HyperLog::Segment const& HyperLog::segment_at(std::uint64_t t) const {
  if (t >= total_iters()) throw std::out_of_range("HyperLog::segment_at: iteration not recorded");
  // Binary search over committed segment starts.
  std::size_t lo = 0, hi = committed_.load(std::memory_order_acquire);
  while (hi - lo > 1) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (segments_[mid].start <= t) lo = mid; else hi = mid;
  }
  return segments_[lo];
}

Mat2 HyperLog::range_product(std::uint64_t t1, std::uint64_t t2) const {
  const std::uint64_t total = total_iters();
  if (t1 > t2 || t2 > total) {
    throw std::out_of_range("HyperLog::range_product: need t1 <= t2 <= total_iters()");
  }
  Mat2 result = Mat2::identity();
  if (t1 == t2) return result;

  std::uint64_t t = t1;
  while (t < t2) {
    const Segment& seg = segment_at(t);
    const std::uint64_t seg_end = seg.start + seg.len.load(std::memory_order_acquire);
    const std::uint64_t steps = std::min(seg_end, t2) - t;
    const Mat2 m = mat2_pow(transfer_matrix(seg.lr, seg.weight_decay, seg.momentum), steps);
    result = mat2_mul(m, result);  // later iterations act on the left
    t += steps;
  }
  return result;
}

}  // namespace pic
