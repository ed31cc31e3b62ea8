#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace lrdh {

using Rng = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Deterministic child seed from a parent seed and a list of stream indices.
/// Distinct index tuples give statistically independent streams.
std::uint64_t derive_seed(std::uint64_t seed,
                          std::initializer_list<std::uint64_t> indices) noexcept;

inline Rng make_rng(std::uint64_t seed) { return Rng(splitmix64(seed)); }

}  // namespace lrdh
