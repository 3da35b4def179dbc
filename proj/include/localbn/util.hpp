#ifndef LOCALBN_UTIL_HPP
#define LOCALBN_UTIL_HPP

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace localbn {

// splitmix64 mixing step; used for all seed derivation so that derived
// streams do not overlap for nearby base seeds.
std::uint64_t splitmix64(std::uint64_t x);

// Deterministic child seed for the index-th member of a seeded batch.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index);

// Uniform double in [0, 1) built from the generator's raw bits.  The stream
// is identical across platforms, unlike std::uniform_real_distribution.
double uniform01(std::mt19937_64& rng);

// Index of the largest value; ties resolved to the smallest index.
std::size_t argmax_first(const std::vector<double>& values);

// Shortest decimal form that parses back to the same double (to_chars).
std::string format_double(double value);

// Fixed-point with the given number of decimals, for display strings.
std::string format_fixed(double value, int decimals);

std::vector<std::string> split(const std::string& text, char sep);

// Minimal CSV quoting/unquoting (RFC-style double-quote escaping).
std::string csv_escape(const std::string& cell);
std::vector<std::string> csv_split_line(const std::string& line);

}  // namespace localbn

#endif  // LOCALBN_UTIL_HPP
