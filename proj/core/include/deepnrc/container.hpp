// Copyright (c) 2026, The deepnrc Authors
// SPDX-License-Identifier: Apache-2.0
//
// Binary tensor container shared by dataset files and checkpoints.
//
//   offset 0   8 bytes   magic "DNRCTNS1"
//              u64       header length H (bytes)
//              H bytes   UTF-8 JSON header (may be empty)
//              u64       tensor count T
//   T times:   u64 rows, u64 cols, rows*cols f64 values in row-major order
//
// All integers and floats are little-endian.

#pragma once

#include "deepnrc/linalg.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace deepnrc::container {

struct TensorFile {
  std::string header;  // JSON text
  std::vector<linalg::DenseMatrix> tensors;
};

void write(const std::filesystem::path& path, const TensorFile& file);
TensorFile read(const std::filesystem::path& path);

/// Lowercase hex SHA-256 of raw bytes.
std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

/// SHA-256 over the shapes and exact bit patterns of the given matrices.
std::string fingerprint(const std::vector<const linalg::DenseMatrix*>& matrices);

}  // namespace deepnrc::container
