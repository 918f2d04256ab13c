#include "pic/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

namespace pic {

namespace {

constexpr char kMagic[8] = {'P', 'I', 'C', 'C', 'K', 'P', 'T', '\0'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void write_pod(std::ofstream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T read_pod(std::ifstream& in) {
  T v;
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!in) throw std::runtime_error("checkpoint: truncated file");
  return v;
}

}  // namespace

template <typename Scalar>
void write_checkpoint(const std::string& path, const InstanceClassifier<Scalar>& classifier,
                      const HyperLog& log, std::uint64_t iteration) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("checkpoint: cannot open for writing: " + path);

  out.write(kMagic, sizeof kMagic);
  write_pod(out, kVersion);
  write_pod(out, static_cast<std::uint32_t>(sizeof(Scalar)));
  write_pod(out, static_cast<std::uint64_t>(classifier.size()));
  write_pod(out, static_cast<std::uint64_t>(classifier.dim()));
  write_pod(out, classifier.temperature());
  write_pod(out, iteration);

  // column-major D x N storage means each class's record is already
  // contiguous; one write per matrix
  const auto& w = classifier.weights();
  const auto& u = classifier.momenta();
  out.write(reinterpret_cast<const char*>(w.data()),
            static_cast<std::streamsize>(sizeof(Scalar) * static_cast<std::size_t>(w.size())));
  out.write(reinterpret_cast<const char*>(u.data()),
            static_cast<std::streamsize>(sizeof(Scalar) * static_cast<std::size_t>(u.size())));
  for (std::size_t i = 0; i < classifier.size(); ++i) {
    write_pod(out, static_cast<std::uint64_t>(classifier.last_visit(i)));
  }

  write_pod(out, static_cast<std::uint64_t>(log.segment_count()));
  for (std::size_t s = 0; s < log.segment_count(); ++s) {
    const auto& seg = log.segment(s);
    write_pod(out, seg.lr);
    write_pod(out, seg.weight_decay);
    write_pod(out, seg.momentum);
    write_pod(out, seg.len.load(std::memory_order_acquire));
  }
  if (!out) throw std::runtime_error("checkpoint: write failed: " + path);
}

template void write_checkpoint<float>(const std::string&, const InstanceClassifier<float>&,
                                      const HyperLog&, std::uint64_t);
template void write_checkpoint<double>(const std::string&, const InstanceClassifier<double>&,
                                       const HyperLog&, std::uint64_t);

CheckpointData read_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("checkpoint: cannot open: " + path);

  char magic[8];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kMagic, sizeof kMagic) != 0) {
    throw std::runtime_error("checkpoint: bad magic");
  }
  const auto version = read_pod<std::uint32_t>(in);
  if (version != kVersion) {
    throw std::runtime_error("checkpoint: unsupported version " + std::to_string(version));
  }

  CheckpointData data;
  data.scalar_width = read_pod<std::uint32_t>(in);
  if (data.scalar_width != 4 && data.scalar_width != 8) {
    throw std::runtime_error("checkpoint: unsupported scalar width");
  }
  data.n = static_cast<std::size_t>(read_pod<std::uint64_t>(in));
  data.dim = static_cast<std::size_t>(read_pod<std::uint64_t>(in));
  data.temperature = read_pod<double>(in);
  data.iteration = read_pod<std::uint64_t>(in);

  const auto read_matrix = [&](Eigen::MatrixXd& m) {
    m.resize(static_cast<Eigen::Index>(data.dim), static_cast<Eigen::Index>(data.n));
    if (data.scalar_width == 8) {
      in.read(reinterpret_cast<char*>(m.data()),
              static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(m.size())));
    } else {
      std::vector<float> buf(data.dim * data.n);
      in.read(reinterpret_cast<char*>(buf.data()),
              static_cast<std::streamsize>(sizeof(float) * buf.size()));
      for (std::size_t i = 0; i < buf.size(); ++i) m.data()[i] = static_cast<double>(buf[i]);
    }
    if (!in) throw std::runtime_error("checkpoint: truncated matrix");
  };
  read_matrix(data.weights);
  read_matrix(data.momenta);

  data.last_visit.resize(data.n);
  for (auto& v : data.last_visit) v = read_pod<std::uint64_t>(in);

  const auto segments = read_pod<std::uint64_t>(in);
  for (std::uint64_t s = 0; s < segments; ++s) {
    const double lr = read_pod<double>(in);
    const double wd = read_pod<double>(in);
    const double m = read_pod<double>(in);
    const std::uint64_t len = read_pod<std::uint64_t>(in);
    data.log.record(lr, wd, m, len);
  }
  return data;
}

}  // namespace pic
