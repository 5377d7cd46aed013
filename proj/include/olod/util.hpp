#pragma once

#include <array>
#include <charconv>
#include <chrono>
#include <cstdint>
#include <cstring>
#include <string>

namespace olod {

// ---------------------------------------------------------------------------
// Counter-based random bits.
//
// Instead of a stateful generator we hash (seed, sample, cell) with the
// splitmix64 finalizer. Every cell's draw is a pure function of its key, so
// results do not depend on evaluation order or thread schedule, and any
// single draw can be reproduced in isolation.
// ---------------------------------------------------------------------------
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t hash_combine(std::uint64_t h, std::uint64_t v) {
  return splitmix64(h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2)));
}

// Uniform double in [0, 1) from a (seed, sample, cell) key.
inline double uniform01(std::uint64_t seed, std::uint64_t sample,
                        std::uint64_t cell) {
  std::uint64_t h = splitmix64(seed);
  h = hash_combine(h, sample);
  h = hash_combine(h, cell);
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

// ---------------------------------------------------------------------------
// CRC-64/XZ (ECMA-182 polynomial, reflected, init/xorout = ~0). Used to
// checksum the offline database payload.
// ---------------------------------------------------------------------------
namespace detail {
inline const std::array<std::uint64_t, 256>& crc64_table() {
  static const std::array<std::uint64_t, 256> table = [] {
    std::array<std::uint64_t, 256> t{};
    const std::uint64_t poly = 0xC96C5795D7870F42ULL;  // reflected ECMA-182
    for (std::uint64_t i = 0; i < 256; ++i) {
      std::uint64_t crc = i;
      for (int b = 0; b < 8; ++b)
        crc = (crc >> 1) ^ ((crc & 1) ? poly : 0);
      t[static_cast<std::size_t>(i)] = crc;
    }
    return t;
  }();
  return table;
}
}  // namespace detail

inline std::uint64_t crc64(const void* data, std::size_t n,
                           std::uint64_t crc = 0) {
  const auto* p = static_cast<const unsigned char*>(data);
  const auto& table = detail::crc64_table();
  crc = ~crc;
  for (std::size_t i = 0; i < n; ++i)
    crc = table[(crc ^ p[i]) & 0xff] ^ (crc >> 8);
  return ~crc;
}

// ---------------------------------------------------------------------------
// Deterministic number formatting (shortest round-trip form, no locale).
// ---------------------------------------------------------------------------
inline std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

// ---------------------------------------------------------------------------
// Wall-clock timer (milliseconds).
// ---------------------------------------------------------------------------
class WallTimer {
 public:
  WallTimer() : start_(clock::now()) {}
  double elapsed_ms() const {
    return std::chrono::duration<double, std::milli>(clock::now() - start_)
        .count();
  }
  void reset() { start_ = clock::now(); }

 private:
  using clock = std::chrono::steady_clock;
  clock::time_point start_;
};

}  // namespace olod
