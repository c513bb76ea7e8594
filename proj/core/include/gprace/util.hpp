#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace gprace {

/// FNV-1a 64-bit hash of a byte string.
std::uint64_t fnv1a64(std::string_view bytes);

/// FNV-1a 64-bit hash of a file's contents.
std::uint64_t hash_file(const std::filesystem::path& path);

/// Hex string of a 64-bit hash, zero padded to 16 chars.
std::string hash_hex(std::uint64_t h);

/// splitmix64 mixing step; used to derive independent child seeds.
std::uint64_t splitmix64(std::uint64_t x);

/// Deterministic child seed for a named pipeline stage.
/// Identical (master, tag) pairs always give the same child seed.
std::uint64_t derive_seed(std::uint64_t master, std::string_view tag);

/// Shortest round-trip decimal form of a double (printf %.17g trimmed).
std::string format_double(double v);

/// Write a file atomically: write to a temp sibling, then rename over the target.
void atomic_write_file(const std::filesystem::path& path, std::string_view contents);

/// Read an entire file into a string. Throws MissingArtifactError if absent.
std::string read_file(const std::filesystem::path& path);

/// Split one CSV line on commas. No quoting support; fields are trimmed.
std::vector<std::string> split_csv_line(const std::string& line);

/// Parse a string as double, throwing gprace::Error with context on failure.
double parse_double(const std::string& s, const std::string& context);

} // namespace gprace
