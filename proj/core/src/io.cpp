#include "flowvi/io.hpp"

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace flowvi::io {

namespace {

using RowMajorMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Unique per writer so concurrent writers of the same (deterministic) file
// cannot interleave; the final rename is atomic.
std::string temp_name(const std::string& path) {
  static std::atomic<unsigned> counter{0};
  return path + ".tmp" + std::to_string(counter.fetch_add(1));
}

void rename_over(const std::string& tmp, const std::string& path) {
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw std::runtime_error("io: rename failed for " + path + ": " + ec.message());
}

}  // namespace

std::uint64_t fnv1a64(const void* data, std::size_t n) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001B3ULL;
  }
  return h;
}

void write_text_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = temp_name(path);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("io: cannot open for writing: " + tmp);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw std::runtime_error("io: write failed: " + tmp);
  }
  rename_over(tmp, path);
}

void write_matrix_file(const std::string& path, const SampleMatrix& m, MatrixFileMeta meta) {
  const RowMajorMatrix rm = m;
  const std::size_t bytes = static_cast<std::size_t>(rm.size()) * sizeof(double);
  meta.rows = m.rows();
  meta.cols = m.cols();
  meta.data_hash = fnv1a64(rm.data(), bytes);

  const std::string tmp = temp_name(path);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("io: cannot open for writing: " + tmp);
    out.write(reinterpret_cast<const char*>(rm.data()), static_cast<std::streamsize>(bytes));
    if (!out) throw std::runtime_error("io: write failed: " + tmp);
  }
  rename_over(tmp, path);

  nlohmann::json j;
  j["rows"] = meta.rows;
  j["cols"] = meta.cols;
  j["seed"] = meta.seed;
  j["kind"] = meta.kind;
  j["target"] = meta.target;
  j["layout"] = meta.layout;
  j["fnv1a64"] = meta.data_hash;
  for (const auto& [k, v] : meta.extra) j["extra"][k] = v;
  write_text_atomic(path + ".json", j.dump(2) + "\n");
}

SampleMatrix read_matrix_file(const std::string& path, MatrixFileMeta* meta_out) {
  std::ifstream side(path + ".json");
  if (!side) throw std::runtime_error("io: missing sidecar: " + path + ".json");
  nlohmann::json j;
  side >> j;

  MatrixFileMeta meta;
  meta.rows = j.at("rows").get<Eigen::Index>();
  meta.cols = j.at("cols").get<Eigen::Index>();
  meta.seed = j.value("seed", std::uint64_t{0});
  meta.kind = j.value("kind", std::string{});
  meta.target = j.value("target", std::string{});
  meta.layout = j.value("layout", std::string{});
  meta.data_hash = j.at("fnv1a64").get<std::uint64_t>();
  if (j.contains("extra")) {
    for (const auto& [k, v] : j.at("extra").items()) meta.extra[k] = v.get<std::string>();
  }
  if (meta.layout != "float64_le_rowmajor")
    throw std::runtime_error("io: unsupported layout in sidecar: " + meta.layout);

  const std::size_t bytes = static_cast<std::size_t>(meta.rows) * static_cast<std::size_t>(meta.cols) * sizeof(double);
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("io: cannot open: " + path);
  RowMajorMatrix rm(meta.rows, meta.cols);
  in.read(reinterpret_cast<char*>(rm.data()), static_cast<std::streamsize>(bytes));
  if (static_cast<std::size_t>(in.gcount()) != bytes) throw std::runtime_error("io: short read: " + path);

  if (fnv1a64(rm.data(), bytes) != meta.data_hash)
    throw std::runtime_error("io: payload hash mismatch (corrupt or stale cache): " + path);
  if (meta_out) *meta_out = meta;
  return SampleMatrix(rm);
}

}  // namespace flowvi::io
