#include "rayleigh/operator_cache.hpp"

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

#include "rayleigh/errors.hpp"

namespace rayleigh {

namespace {

constexpr char kMagic[8] = {'R', 'L', 'G', 'H', 'C', 'A', 'C', 'H'};

template <class T>
void put(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw CacheError("operator cache: truncated header");
  return v;
}

}  // namespace

std::string CacheKey::file_name() const {
  std::ostringstream os;
  std::string tag = backend_tag;
  for (char& c : tag)
    if (c == ':' || c == '/') c = '_';
  os << tag << "_n" << n_per_axis << "_v" << v_max << "_a" << angular_order << ".bin";
  return os.str();
}

std::uint64_t fnv1a(const void* data, std::size_t bytes, std::uint64_t h) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < bytes; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

void write_matrix_cache(const std::filesystem::path& path, const CacheKey& key, const Eigen::MatrixXd& m) {
  std::filesystem::create_directories(path.parent_path().empty() ? "." : path.parent_path());
  const auto rows = static_cast<std::uint64_t>(m.rows());
  const auto cols = static_cast<std::uint64_t>(m.cols());
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  std::vector<double> row(static_cast<std::size_t>(cols));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) row[static_cast<std::size_t>(j)] = m(i, j);
    hash = fnv1a(row.data(), row.size() * sizeof(double), hash);
  }

  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw CacheError("operator cache: cannot write " + tmp.string());
    os.write(kMagic, sizeof(kMagic));
    put(os, kCacheFormatVersion);
    put(os, static_cast<std::uint32_t>(key.backend_tag.size()));
    os.write(key.backend_tag.data(), static_cast<std::streamsize>(key.backend_tag.size()));
    put(os, static_cast<std::int32_t>(key.n_per_axis));
    put(os, key.v_max);
    put(os, static_cast<std::int32_t>(key.angular_order));
    put(os, rows);
    put(os, cols);
    put(os, hash);
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      for (Eigen::Index j = 0; j < m.cols(); ++j) row[static_cast<std::size_t>(j)] = m(i, j);
      os.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size() * sizeof(double)));
    }
    if (!os) throw CacheError("operator cache: write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

namespace {

CacheHeader read_header(std::istream& is, const std::filesystem::path& path) {
  char magic[8];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw CacheError("operator cache: bad magic in " + path.string());
  CacheHeader h;
  h.format_version = get<std::uint32_t>(is);
  if (h.format_version != kCacheFormatVersion)
    throw CacheError("operator cache: unsupported format version in " + path.string());
  const auto len = get<std::uint32_t>(is);
  if (len > 4096) throw CacheError("operator cache: corrupt tag length in " + path.string());
  h.key.backend_tag.resize(len);
  is.read(h.key.backend_tag.data(), len);
  h.key.n_per_axis = get<std::int32_t>(is);
  h.key.v_max = get<double>(is);
  h.key.angular_order = get<std::int32_t>(is);
  h.rows = get<std::uint64_t>(is);
  h.cols = get<std::uint64_t>(is);
  h.content_hash = get<std::uint64_t>(is);
  return h;
}

}  // namespace

CacheHeader read_cache_header(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw CacheError("operator cache: cannot open " + path.string());
  return read_header(is, path);
}

Eigen::MatrixXd read_matrix_cache(const std::filesystem::path& path, const CacheKey& expected) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw CacheError("operator cache: cannot open " + path.string());
  const CacheHeader h = read_header(is, path);
  if (h.key.backend_tag != expected.backend_tag || h.key.n_per_axis != expected.n_per_axis ||
      h.key.v_max != expected.v_max || h.key.angular_order != expected.angular_order)
    throw CacheError("operator cache: key mismatch in " + path.string());
  Eigen::MatrixXd m(static_cast<Eigen::Index>(h.rows), static_cast<Eigen::Index>(h.cols));
  std::vector<double> row(h.cols);
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    is.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(row.size() * sizeof(double)));
    if (!is) throw CacheError("operator cache: truncated payload in " + path.string());
    hash = fnv1a(row.data(), row.size() * sizeof(double), hash);
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = row[static_cast<std::size_t>(j)];
  }
  if (hash != h.content_hash) throw CacheError("operator cache: content hash mismatch in " + path.string());
  return m;
}

std::string cache_dir_from_env() {
  const char* d = std::getenv("RAYLEIGH_CACHE_DIR");
  return d ? std::string(d) : std::string();
}

}  // namespace rayleigh
