#ifndef NBSCREEN_RANDOM_HPP
#define NBSCREEN_RANDOM_HPP

#include <cstdint>
#include <span>
#include <utility>

namespace nbscreen {

/// SplitMix64 generator. The state progression and output mix are fixed so
/// that seeded splits and synthetic datasets are reproducible bit-for-bit on
/// any platform.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit constexpr SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  constexpr std::uint64_t operator()() noexcept {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform integer in [0, bound) by the multiply-high reduction. bound > 0.
  constexpr std::uint64_t below(std::uint64_t bound) noexcept {
    __extension__ using wide = unsigned __int128;
    return static_cast<std::uint64_t>((static_cast<wide>((*this)()) * bound) >> 64);
  }

  static constexpr std::uint64_t min() noexcept { return 0; }
  static constexpr std::uint64_t max() noexcept { return ~std::uint64_t{0}; }

 private:
  std::uint64_t state_;
};

/// In-place Fisher-Yates shuffle, walking from the back: element i swaps with
/// a uniform index in [0, i].
template <typename T>
void fisher_yates(std::span<T> items, SplitMix64& rng) noexcept {
  for (std::size_t i = items.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.below(i));
    using std::swap;
    swap(items[i - 1], items[j]);
  }
}

}  // namespace nbscreen

#endif  // NBSCREEN_RANDOM_HPP
