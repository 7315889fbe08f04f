#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include <Eigen/Dense>

namespace rayleigh {

/// Identifies what a cached matrix was built from.
struct CacheKey {
  std::string backend_tag;  ///< e.g. "hard_sphere:L" or "hard_sphere:gamma:<field hash>"
  int n_per_axis = 0;
  double v_max = 0.0;
  int angular_order = 0;

  std::string file_name() const;
};

struct CacheHeader {
  std::uint32_t format_version = 0;
  CacheKey key;
  std::uint64_t rows = 0;
  std::uint64_t cols = 0;
  std::uint64_t content_hash = 0;
};

inline constexpr std::uint32_t kCacheFormatVersion = 1;

/// 64-bit FNV-1a, used for cache payload integrity.
std::uint64_t fnv1a(const void* data, std::size_t bytes, std::uint64_t h = 0xcbf29ce484222325ULL);

/// Writes header + row-major payload through a temporary file and rename.
void write_matrix_cache(const std::filesystem::path& path, const CacheKey& key, const Eigen::MatrixXd& m);

/// Reads a cached matrix. Throws CacheError on a bad magic, version or key mismatch,
/// truncated payload, or content-hash mismatch.
Eigen::MatrixXd read_matrix_cache(const std::filesystem::path& path, const CacheKey& expected);

CacheHeader read_cache_header(const std::filesystem::path& path);

/// Directory from RAYLEIGH_CACHE_DIR, or empty when unset.
std::string cache_dir_from_env();

}  // namespace rayleigh
