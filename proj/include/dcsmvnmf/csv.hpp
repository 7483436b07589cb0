// Copyright 2026 The dcsmvnmf Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "dcsmvnmf/types.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace dcsmvnmf::csv {

// Dense matrices are stored one row per line, comma separated, no header.
// Values are written in shortest round-trip decimal form, so a write/read
// cycle reproduces every double bit for bit.

Matrix read_matrix(std::istream& in, const std::string& source = "<stream>");
Matrix read_matrix(const std::filesystem::path& path);

void write_matrix(std::ostream& out, const Matrix& m);
void write_matrix(const std::filesystem::path& path, const Matrix& m);

// Label files hold one base-10 integer per line; -1 marks an unlabeled sample.
std::vector<int> read_labels(std::istream& in,
                             const std::string& source = "<stream>");
std::vector<int> read_labels(const std::filesystem::path& path);

void write_labels(std::ostream& out, const std::vector<int>& labels);
void write_labels(const std::filesystem::path& path,
                  const std::vector<int>& labels);

/// Shortest decimal string that parses back to exactly `value`.
std::string format_double(double value);

}  // namespace dcsmvnmf::csv
