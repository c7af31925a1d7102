#pragma once

#include <cstdint>
#include <random>

namespace dasgp {

using Rng = std::mt19937_64;

/// Named substreams derived from one master seed. Every (round, stream)
/// pair gets an independent generator so that consuming more or fewer draws
/// in one stream never shifts another.
enum class Stream : std::uint32_t {
  Field = 1,
  Selection = 2,
  Candidates = 3,
  Sleep = 4,
  Activity = 5,
  Channel = 6,
};

class StreamSeeder {
 public:
  explicit StreamSeeder(std::uint64_t masterSeed) : master_(masterSeed) {}

  Rng stream(std::uint64_t round, Stream which) const {
    std::seed_seq seq{static_cast<std::uint32_t>(master_),
                      static_cast<std::uint32_t>(master_ >> 32),
                      static_cast<std::uint32_t>(round),
                      static_cast<std::uint32_t>(round >> 32),
                      static_cast<std::uint32_t>(which)};
    return Rng(seq);
  }

  std::uint64_t masterSeed() const noexcept { return master_; }

 private:
  std::uint64_t master_;
};

}  // namespace dasgp
