#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace meddial {

uint64_t fnv1a64(std::string_view data);
std::string fnv1a64_hex(std::string_view data);

std::vector<std::string> split(std::string_view s, char delim);

// Splits on a multi-byte separator (e.g. U+3001 "、").
std::vector<std::string> split_on(std::string_view s, std::string_view sep);

std::string join(const std::vector<std::string>& items, std::string_view sep);

std::string to_lower_ascii(std::string_view s);

// Uniform draw in [0, n) using only the raw mt19937_64 stream, so results are
// identical across standard libraries (uniform_int_distribution is not).
uint64_t uniform_below(std::mt19937_64& rng, uint64_t n);

// Seeded sample of k distinct indices from [0, population), returned sorted.
std::vector<std::size_t> stable_sample(std::size_t population, std::size_t k, uint64_t seed);

} // namespace meddial
