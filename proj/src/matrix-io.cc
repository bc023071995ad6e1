// src/matrix-io.cc

// Copyright 2026 The edlab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "edlab/matrix-io.h"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

namespace edlab {

static_assert(std::endian::native == std::endian::little,
              "matrix files are written in host byte order, which must be little-endian");

namespace {

constexpr char kMagic[4] = {'E', 'D', 'L', 'M'};
constexpr std::uint32_t kVersion = 1;

}  // namespace

void WriteMatrix(const std::string &path, const Matrix &m) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw MissingInputError("cannot open " + path + " for writing");
  const std::uint64_t rows = static_cast<std::uint64_t>(m.rows());
  const std::uint64_t cols = static_cast<std::uint64_t>(m.cols());
  os.write(kMagic, 4);
  os.write(reinterpret_cast<const char *>(&kVersion), sizeof(kVersion));
  os.write(reinterpret_cast<const char *>(&rows), sizeof(rows));
  os.write(reinterpret_cast<const char *>(&cols), sizeof(cols));
  os.write(reinterpret_cast<const char *>(m.data()),
           static_cast<std::streamsize>(sizeof(double) * m.size()));
}

Matrix ReadMatrix(const std::string &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw MissingInputError("matrix file not found: " + path);
  char magic[4];
  std::uint32_t version = 0;
  std::uint64_t rows = 0, cols = 0;
  is.read(magic, 4);
  is.read(reinterpret_cast<char *>(&version), sizeof(version));
  is.read(reinterpret_cast<char *>(&rows), sizeof(rows));
  is.read(reinterpret_cast<char *>(&cols), sizeof(cols));
  if (!is || std::memcmp(magic, kMagic, 4) != 0 || version != kVersion)
    throw ShapeError(path + ": not an EDLM v1 matrix file");
  Matrix m(static_cast<Index>(rows), static_cast<Index>(cols));
  is.read(reinterpret_cast<char *>(m.data()), static_cast<std::streamsize>(sizeof(double) * m.size()));
  if (!is) throw ShapeError(path + ": truncated matrix data");
  return m;
}

std::string ReadTextFile(const std::string &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw MissingInputError("file not found: " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

void WriteTextFile(const std::string &path, const std::string &text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw MissingInputError("cannot open " + path + " for writing");
  os << text;
}

}  // namespace edlab
