// Copyright (c) 2026, The deepnrc Authors
// SPDX-License-Identifier: Apache-2.0

#include "deepnrc/container.hpp"

#include "deepnrc/error.hpp"

#include <fmt/format.h>
#include <openssl/evp.h>

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>

namespace deepnrc::container {

static_assert(std::endian::native == std::endian::little,
              "container format is defined little-endian; add byte swapping for this target");

namespace {

constexpr std::array<char, 8> kMagic{'D', 'N', 'R', 'C', 'T', 'N', 'S', '1'};
constexpr std::uint64_t kMaxDim = std::uint64_t{1} << 40;

void put_u64(std::ostream& out, std::uint64_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

std::uint64_t get_u64(std::istream& in, const std::filesystem::path& path) {
  std::uint64_t v = 0;
  if (!in.read(reinterpret_cast<char*>(&v), sizeof v)) {
    throw DataError(fmt::format("{}: truncated container", path.string()));
  }
  return v;
}

void append_matrix_bytes(std::string& buf, const linalg::DenseMatrix& m) {
  const std::uint64_t shape[2] = {static_cast<std::uint64_t>(m.rows()),
                                  static_cast<std::uint64_t>(m.cols())};
  buf.append(reinterpret_cast<const char*>(shape), sizeof shape);
  buf.append(reinterpret_cast<const char*>(m.data()),
             static_cast<std::size_t>(m.size()) * sizeof(double));
}

}  // namespace

void write(const std::filesystem::path& path, const TensorFile& file) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError(fmt::format("{}: cannot open for writing", path.string()));
  out.write(kMagic.data(), kMagic.size());
  put_u64(out, file.header.size());
  out.write(file.header.data(), static_cast<std::streamsize>(file.header.size()));
  put_u64(out, file.tensors.size());
  for (const auto& m : file.tensors) {
    put_u64(out, static_cast<std::uint64_t>(m.rows()));
    put_u64(out, static_cast<std::uint64_t>(m.cols()));
    out.write(reinterpret_cast<const char*>(m.data()),
              static_cast<std::streamsize>(m.size() * sizeof(double)));
  }
  if (!out) throw DataError(fmt::format("{}: write failed", path.string()));
}

TensorFile read(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(fmt::format("{}: cannot open", path.string()));
  std::array<char, 8> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kMagic) {
    throw DataError(fmt::format("{}: not a deepnrc tensor container", path.string()));
  }
  TensorFile file;
  const std::uint64_t header_len = get_u64(in, path);
  if (header_len > (std::uint64_t{1} << 30)) {
    throw DataError(fmt::format("{}: implausible header length {}", path.string(), header_len));
  }
  file.header.resize(header_len);
  if (!in.read(file.header.data(), static_cast<std::streamsize>(header_len))) {
    throw DataError(fmt::format("{}: truncated header", path.string()));
  }
  const std::uint64_t count = get_u64(in, path);
  for (std::uint64_t t = 0; t < count; ++t) {
    const std::uint64_t rows = get_u64(in, path);
    const std::uint64_t cols = get_u64(in, path);
    if (rows > kMaxDim || cols > kMaxDim || (rows != 0 && cols > kMaxDim / rows)) {
      throw DataError(fmt::format("{}: tensor {} has implausible shape {}x{}", path.string(), t,
                                  rows, cols));
    }
    linalg::DenseMatrix m(static_cast<linalg::Index>(rows), static_cast<linalg::Index>(cols));
    if (!in.read(reinterpret_cast<char*>(m.data()),
                 static_cast<std::streamsize>(rows * cols * sizeof(double)))) {
      throw DataError(fmt::format("{}: tensor {} truncated", path.string(), t));
    }
    file.tensors.push_back(std::move(m));
  }
  return file;
}

std::string sha256_hex(std::string_view bytes) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest.data(), &len) != 1) {
    throw Error("sha256: OpenSSL digest failed");
  }
  std::string hex;
  hex.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", digest[i]);
  return hex;
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(fmt::format("{}: cannot open", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return sha256_hex(ss.str());
}

std::string fingerprint(const std::vector<const linalg::DenseMatrix*>& matrices) {
  std::string buf;
  for (const auto* m : matrices) append_matrix_bytes(buf, *m);
  return sha256_hex(buf);
}

}  // namespace deepnrc::container
