#pragma once

#include <cstdint>
#include <vector>

namespace refinery {

/// Counter-based random stream (Philox4x32-10, Salmon et al. 2011).
///
/// A stream is identified by (seed, stream_id); the generator keeps only a
/// block counter, so draws depend on nothing but the identity and how many
/// values were consumed. Parallel workers get schedule-independent numbers
/// by taking disjoint substreams instead of sharing one generator.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id = 0);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  /// Child stream derived from (this stream, key). Distinct keys give
  /// statistically independent streams; derivation does not disturb the
  /// parent's state.
  RngStream substream(std::uint64_t key) const;

  std::uint64_t next_u64();

  /// Uniform on [0, 1), 53-bit resolution.
  double next_double();

  /// Uniform on [lo, hi).
  double next_double(double lo, double hi);

  /// Uniform integer on [0, n).
  std::uint64_t next_below(std::uint64_t n);

  /// Standard normal via Box-Muller; the paired value is cached.
  double next_gaussian();

 private:
  void refill();

  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::uint64_t block_ = 0;
  std::uint64_t buf_[2];
  int buf_pos_ = 2;
  double gauss_cache_ = 0.0;
  bool has_gauss_cache_ = false;
};

/// SplitMix64 finalizer; used for stream derivation and config hashing.
std::uint64_t mix64(std::uint64_t x);

/// FNV-1a over a byte string, for content hashes in run provenance.
std::uint64_t fnv1a64(const void* data, std::size_t len);

}  // namespace refinery
