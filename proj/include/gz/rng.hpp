#pragma once

#include <array>
#include <cstdint>
#include <string_view>

namespace gz {

// Stream ids for named substreams. Combine with an index via substream().
enum class Stream : std::uint64_t {
  Path = 1,
  Frequencies = 2,
  Amplitudes = 3,
  Bootstrap = 4,
  Shift = 5,
  Corpus = 6,
  Calibration = 7,
};

std::uint64_t substream(Stream s, std::uint64_t index);
std::uint64_t substream(std::string_view name, std::uint64_t index);

// Philox4x32-10 counter-based generator. A (seed, stream) pair names an
// independent sequence; position within it is the counter.
class Rng {
 public:
  Rng(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t next_u64();
  // Uniform on (0,1), never exactly 0 or 1.
  double uniform();
  double normal();

 private:
  void refill();

  std::array<std::uint32_t, 2> key_;
  std::uint64_t stream_;
  std::uint64_t counter_ = 0;
  std::array<std::uint32_t, 4> block_{};
  int used_ = 4;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace gz
