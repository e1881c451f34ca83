#pragma once

#include <cstdint>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace pdms {

/// Seeded 64-bit generator. Draws go through uniform_below so the sequence is
/// identical across standard libraries (std distributions are not portable).
class Rng {
public:
  explicit Rng(std::uint64_t seed = 0) : eng_(seed) {}

  std::uint64_t next() { return eng_(); }

  /// Uniform in [0, n). n must be positive.
  std::uint64_t uniform_below(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = eng_();
    } while (x >= limit);
    return x % n;
  }

  /// Uniform integer in [lo, hi].
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    return lo + static_cast<std::int64_t>(
                    uniform_below(static_cast<std::uint64_t>(hi - lo) + 1));
  }

  double uniform01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return p >= 1.0 || (p > 0.0 && uniform01() < p); }

  template <class T> void shuffle(std::vector<T> &v) {
    for (std::size_t i = v.size(); i > 1; --i)
      std::swap(v[i - 1], v[uniform_below(i)]);
  }

  /// k distinct indices from [0, n), in draw order.
  std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k) {
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i)
      idx[i] = i;
    if (k > n)
      k = n;
    for (std::size_t i = 0; i < k; ++i)
      std::swap(idx[i], idx[i + uniform_below(n - i)]);
    idx.resize(k);
    return idx;
  }

  std::string state() const {
    std::ostringstream os;
    os << eng_;
    return os.str();
  }
  void set_state(const std::string &s) {
    std::istringstream is(s);
    is >> eng_;
  }

  friend bool operator==(const Rng &a, const Rng &b) { return a.eng_ == b.eng_; }

private:
  std::mt19937_64 eng_;
};

} // namespace pdms
