// Copyright (c) 2026 sasv-fusion authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SASV_IO_H_
#define SASV_IO_H_

#include <cstddef>
#include <string>
#include <vector>

#include "sasv/core.h"

namespace sasv {

// Embedding files.
//
// Binary layout (all integers little-endian):
//   "SASVEMB1"            8 ASCII bytes
//   dim                   uint32
//   count                 uint32
//   count x {
//     id_len              uint16
//     id                  id_len bytes of UTF-8
//     values              dim x float32
//   }
//
// Text layout: one record per line, "id<TAB>v1,v2,...,vdim". The format is
// picked by sniffing the first 8 bytes. Values are stored as float32 in
// both layouts, so loaded values are exactly representable as float.
inline constexpr char kEmbeddingMagic[] = "SASVEMB1";

enum class EmbeddingFormat { kBinary, kText };

EmbeddingTable LoadEmbeddings(const std::string& path,
                              std::size_t expected_dim);
void WriteEmbeddings(const std::string& path, const EmbeddingTable& table,
                     EmbeddingFormat format = EmbeddingFormat::kBinary);

// Protocol: "<speaker_id> <test_utt_id> [<label>]" per line, '#' comments.
std::vector<Trial> LoadProtocol(const std::string& path);
void WriteProtocol(const std::string& path, const std::vector<Trial>& trials);

// Enrollment: "<speaker_id> <utt_id>" per line, '#' comments.
EnrollmentMap LoadEnrollment(const std::string& path);
void WriteEnrollment(const std::string& path, const EnrollmentMap& map);

// Splits on ASCII whitespace; shared by the text loaders.
std::vector<std::string> SplitFields(const std::string& line);

// "%.*g" formatting without locale surprises.
std::string FormatDouble(double value, int significant_digits);

}  // namespace sasv

#endif  // SASV_IO_H_
