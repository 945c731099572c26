#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <random>

namespace flexqr {

/// Counter-based random stream (Philox4x32-10).
///
/// The 64-bit seed is the cipher key and the stream id occupies the upper
/// half of the 128-bit counter, so (seed, stream_id) pairs address disjoint
/// regions of one keyed sequence. Streams are cheap to construct, which lets
/// per-unit and per-observation updates own their own stream.
class RngStream {
 public:
  using result_type = std::uint64_t;

  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()();

  /// Uniform on the open interval (0, 1).
  double uniform();
  double normal();
  /// Exponential with unit rate.
  double exponential();
  /// Gamma with unit scale.
  double gamma(double shape);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  /// Independent stream keyed by the same seed and a derived id.
  RngStream substream(std::initializer_list<std::uint64_t> path) const;

 private:
  void refill();

  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::uint64_t block_ = 0;
  std::array<std::uint64_t, 2> buffer_{};
  int buffered_ = 0;
  std::normal_distribution<double> normal_;
};

/// Mixes a path of integers into one 64-bit stream id.
std::uint64_t derive_stream_id(std::uint64_t base,
                               std::initializer_list<std::uint64_t> path);

}  // namespace flexqr
