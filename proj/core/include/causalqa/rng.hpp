#pragma once

#include <cstdint>
#include <limits>
#include <string_view>

namespace causalqa {

std::uint64_t mix64(std::uint64_t z) noexcept;

/// FNV-1a over the bytes of `label`; used for labeled stream splitting.
std::uint64_t hash_label(std::string_view label) noexcept;

/// Inverse of the standard normal CDF (Wichura AS241, ~1e-16 relative error).
/// `p` must lie strictly inside (0, 1).
double inverse_normal_cdf(double p);

/// Counter-based 64-bit generator ("splitmix64-ctr/1").
///
/// Output number i (1-based) of the stream with key k is mix64(k + i * phi),
/// where phi is the 64-bit golden-ratio increment.  Streams are addressed by
/// key alone, so a run can hand every context, repeat and answer sample its
/// own stream by deriving child keys; no generator state is shared between
/// threads.  Real-valued draws consume one 64-bit output each and go through
/// 53-bit uniforms and inverse CDFs, which keeps datasets reproducible across
/// platforms with IEEE-754 doubles.
class Rng {
 public:
  using result_type = std::uint64_t;

  static constexpr std::string_view kName = "splitmix64-ctr/1";
  static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

  constexpr explicit Rng(std::uint64_t key = 0, std::uint64_t counter = 0) noexcept
      : key_(key), counter_(counter) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept { return mix64(key_ + (++counter_) * kGolden); }

  /// Independent child stream; the parent is not advanced.
  [[nodiscard]] Rng split(std::uint64_t index) const noexcept;
  [[nodiscard]] Rng split(std::string_view label) const noexcept;

  /// Uniform on [0, 1) with 53 bits of resolution.
  double uniform() noexcept;
  /// Uniform on (0, 1); never returns an endpoint.
  double open_uniform() noexcept;
  /// Unbiased integer on [lo, hi] (inclusive) by rejection.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) noexcept;
  bool bernoulli(double p) noexcept;
  double normal(double mu, double sigma);

  std::uint64_t key() const noexcept { return key_; }
  std::uint64_t counter() const noexcept { return counter_; }

  friend bool operator==(const Rng&, const Rng&) = default;

 private:
  std::uint64_t key_;
  std::uint64_t counter_;
};

}  // namespace causalqa
