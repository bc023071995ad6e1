// include/edlab/matrix-io.h

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

#ifndef EDLAB_MATRIX_IO_H_
#define EDLAB_MATRIX_IO_H_

#include <string>

#include "edlab/types.h"

namespace edlab {

// Binary matrix file: "EDLM", uint32 version (1), uint64 rows, uint64 cols,
// then rows*cols little-endian float64 values in row-major order.
void WriteMatrix(const std::string &path, const Matrix &m);
Matrix ReadMatrix(const std::string &path);

std::string ReadTextFile(const std::string &path);
void WriteTextFile(const std::string &path, const std::string &text);

}  // namespace edlab

#endif  // EDLAB_MATRIX_IO_H_
