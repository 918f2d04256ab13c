#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "pic/instance_store.hpp"
#include "pic/mat2.hpp"

namespace pic {

// Binary classifier checkpoint. Little-endian, layout:
//   magic   8 bytes  "PICCKPT\0"
//   version u32      1
//   width   u32      scalar width in bytes (4 = float, 8 = double)
//   n       u64      instance count
//   dim     u64      feature dimension
//   tau     f64      temperature
//   iter    u64      global iteration the state corresponds to
//   weights n * dim scalars, instance-major (one dim-length record per class)
//   momenta n * dim scalars, same layout
//   last_visit n * u64
//   hyperlog   u64 segment count, then per segment f64 lr, f64 weight_decay,
//              f64 momentum, u64 len
struct CheckpointData {
  std::uint32_t scalar_width = 8;
  std::size_t n = 0;
  std::size_t dim = 0;
  double temperature = 0.0;
  std::uint64_t iteration = 0;
  Eigen::MatrixXd weights;  // dim x n, widened to double on read
  Eigen::MatrixXd momenta;
  std::vector<std::uint64_t> last_visit;
  HyperLog log;
};

template <typename Scalar>
void write_checkpoint(const std::string& path, const InstanceClassifier<Scalar>& classifier,
                      const HyperLog& log, std::uint64_t iteration);

CheckpointData read_checkpoint(const std::string& path);

}  // namespace pic
