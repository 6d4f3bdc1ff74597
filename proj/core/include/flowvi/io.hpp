#pragma once

#include <cstdint>
#include <map>
#include <string>

#include <Eigen/Core>

#include "flowvi/rng.hpp"

namespace flowvi::io {

/// Sidecar metadata stored as JSON at `path + ".json"` next to the raw
/// little-endian float64 row-major payload.
struct MatrixFileMeta {
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
  std::uint64_t seed = 0;
  std::string kind = "samples";
  std::string target;
  std::string layout = "float64_le_rowmajor";
  std::uint64_t data_hash = 0;  // FNV-1a over the payload bytes
  std::map<std::string, std::string> extra;
};

std::uint64_t fnv1a64(const void* data, std::size_t n);

/// Writes payload and sidecar atomically (temp file + rename). rows/cols and
/// data_hash in `meta` are filled from the matrix.
void write_matrix_file(const std::string& path, const SampleMatrix& m, MatrixFileMeta meta);

/// Reads payload, checks it against the sidecar's shape and hash.
SampleMatrix read_matrix_file(const std::string& path, MatrixFileMeta* meta_out = nullptr);

void write_text_atomic(const std::string& path, const std::string& content);

}  // namespace flowvi::io
