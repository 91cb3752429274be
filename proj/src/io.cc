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

#include "sasv/io.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <sstream>

namespace sasv {

namespace {

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, path + ": cannot open for reading");
  return std::string(std::istreambuf_iterator<char>(in),
                     std::istreambuf_iterator<char>());
}

std::ofstream OpenForWrite(const std::string& path, bool binary = false) {
  std::ofstream out(path, binary ? std::ios::binary | std::ios::trunc
                                 : std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, path + ": cannot open for writing");
  return out;
}

[[noreturn]] void Fail(ErrorCode code, const std::string& path,
                       std::size_t line, const std::string& what) {
  throw Error(code, path + ":" + std::to_string(line) + ": " + what);
}

// Wraps an Error raised by EmbeddingTable::Add with file context.
void AddWithContext(EmbeddingTable* table, Embedding e,
                    const std::string& where) {
  try {
    table->Add(std::move(e));
  } catch (const Error& err) {
    throw Error(err.code(), where + ": " + err.what());
  }
}

class ByteReader {
 public:
  ByteReader(const std::string& data, const std::string& path)
      : data_(data), path_(path) {}

  void Need(std::size_t n) const {
    if (pos_ + n > data_.size()) {
      throw Error(ErrorCode::kTruncated,
                  path_ + ": unexpected end of file at byte " +
                      std::to_string(pos_));
    }
  }
  std::uint16_t U16() {
    Need(2);
    std::uint16_t v = Byte(0) | (Byte(1) << 8);
    pos_ += 2;
    return v;
  }
  std::uint32_t U32() {
    Need(4);
    std::uint32_t v = static_cast<std::uint32_t>(Byte(0)) |
                      (static_cast<std::uint32_t>(Byte(1)) << 8) |
                      (static_cast<std::uint32_t>(Byte(2)) << 16) |
                      (static_cast<std::uint32_t>(Byte(3)) << 24);
    pos_ += 4;
    return v;
  }
  float F32() {
    std::uint32_t bits = U32();
    float f;
    std::memcpy(&f, &bits, sizeof(f));
    return f;
  }
  std::string Bytes(std::size_t n) {
    Need(n);
    std::string s = data_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  std::size_t pos() const { return pos_; }
  bool AtEnd() const { return pos_ == data_.size(); }

 private:
  std::uint32_t Byte(std::size_t off) const {
    return static_cast<unsigned char>(data_[pos_ + off]);
  }

  const std::string& data_;
  const std::string& path_;
  std::size_t pos_ = 0;
};

void PutU16(std::string* out, std::uint16_t v) {
  out->push_back(static_cast<char>(v & 0xff));
  out->push_back(static_cast<char>((v >> 8) & 0xff));
}

void PutU32(std::string* out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out->push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void CheckDim(std::size_t dim, std::size_t expected, const std::string& path) {
  if (expected != 0 && dim != expected) {
    throw Error(ErrorCode::kDimensionMismatch,
                path + ": embedding dimension " + std::to_string(dim) +
                    " does not match expected " + std::to_string(expected));
  }
}

EmbeddingTable LoadBinary(const std::string& data, const std::string& path,
                          std::size_t expected_dim) {
  ByteReader r(data, path);
  r.Bytes(8);
  std::size_t dim = r.U32();
  std::size_t count = r.U32();
  CheckDim(dim, expected_dim, path);
  EmbeddingTable table(dim);
  for (std::size_t i = 0; i < count; ++i) {
    Embedding e;
    e.id = r.Bytes(r.U16());
    e.values.resize(dim);
    for (std::size_t d = 0; d < dim; ++d) e.values[d] = r.F32();
    AddWithContext(&table, std::move(e),
                   path + ": record " + std::to_string(i));
  }
  if (!r.AtEnd()) {
    throw Error(ErrorCode::kMalformedLine,
                path + ": trailing bytes after " + std::to_string(count) +
                    " records");
  }
  return table;
}

bool ParseFloat32(const std::string& token, double* out) {
  if (token.empty()) return false;
  char* end = nullptr;
  double v = std::strtod(token.c_str(), &end);
  if (end != token.c_str() + token.size()) return false;
  // Storage precision is float32; overflow becomes inf and is caught later.
  *out = static_cast<double>(static_cast<float>(v));
  return true;
}

EmbeddingTable LoadText(const std::string& data, const std::string& path,
                        std::size_t expected_dim) {
  EmbeddingTable table(expected_dim);
  std::istringstream in(data);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos) {
      Fail(ErrorCode::kMalformedLine, path, lineno, "expected 'id<TAB>values'");
    }
    Embedding e;
    e.id = line.substr(0, tab);
    if (e.id.empty()) Fail(ErrorCode::kBlankField, path, lineno, "empty id");
    std::string rest = line.substr(tab + 1);
    std::size_t start = 0;
    while (start <= rest.size()) {
      auto comma = rest.find(',', start);
      if (comma == std::string::npos) comma = rest.size();
      double v;
      if (!ParseFloat32(rest.substr(start, comma - start), &v)) {
        Fail(ErrorCode::kMalformedLine, path, lineno,
             "bad value '" + rest.substr(start, comma - start) + "'");
      }
      e.values.push_back(v);
      start = comma + 1;
    }
    if (table.empty() && expected_dim == 0) {
      table = EmbeddingTable(e.values.size());
    }
    CheckDim(e.values.size(), table.dim(),
             path + ":" + std::to_string(lineno));
    AddWithContext(&table, std::move(e), path + ":" + std::to_string(lineno));
  }
  return table;
}

bool IsCommentOrBlank(const std::string& line) {
  for (char c : line) {
    if (c == ' ' || c == '\t') continue;
    return c == '#';
  }
  return true;
}

// Tab-separated lines keep empty fields so that blanks can be reported;
// otherwise fields are whitespace runs and a leading blank is an empty field.
std::vector<std::string> SplitRecord(const std::string& line, bool* has_blank) {
  *has_blank = false;
  if (line.find('\t') == std::string::npos) {
    if (line[0] == ' ') *has_blank = true;
    return SplitFields(line);
  }
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    auto tab = line.find('\t', start);
    auto len = tab == std::string::npos ? std::string::npos : tab - start;
    auto trimmed = SplitFields(line.substr(start, len));
    fields.push_back(trimmed.empty() ? std::string() : trimmed.front());
    if (trimmed.size() > 1) fields.insert(fields.end(), trimmed.begin() + 1, trimmed.end());
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  while (fields.size() > 1 && fields.back().empty()) fields.pop_back();
  for (const auto& f : fields) {
    if (f.empty()) *has_blank = true;
  }
  return fields;
}

std::vector<std::string> ReadRecordLines(const std::string& path,
                                         std::vector<std::size_t>* linenos) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, path + ": cannot open for reading");
  std::vector<std::string> lines;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (IsCommentOrBlank(line)) continue;
    lines.push_back(line);
    linenos->push_back(lineno);
  }
  return lines;
}

}  // namespace

std::vector<std::string> SplitFields(const std::string& line) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

std::string FormatDouble(double value, int significant_digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*g", significant_digits, value);
  return buf;
}

EmbeddingTable LoadEmbeddings(const std::string& path,
                              std::size_t expected_dim) {
  std::string data = ReadFile(path);
  const std::size_t magic_len = sizeof(kEmbeddingMagic) - 1;
  if (data.size() >= magic_len &&
      data.compare(0, magic_len, kEmbeddingMagic) == 0) {
    return LoadBinary(data, path, expected_dim);
  }
  // Anything that starts like our binary header, or is not text, is a
  // binary file we do not understand.
  std::size_t probe = std::min(data.size(), magic_len);
  bool binary_like = data.compare(0, magic_len - 1, kEmbeddingMagic,
                                  magic_len - 1) == 0;
  for (std::size_t i = 0; i < probe && !binary_like; ++i) {
    unsigned char c = static_cast<unsigned char>(data[i]);
    if (c < 0x09 || (c > 0x0d && c < 0x20) || c == 0x7f) binary_like = true;
  }
  if (binary_like) {
    throw Error(ErrorCode::kBadMagic,
                path + ": bad magic, expected '" +
                    std::string(kEmbeddingMagic) + "' or text records");
  }
  return LoadText(data, path, expected_dim);
}

void WriteEmbeddings(const std::string& path, const EmbeddingTable& table,
                     EmbeddingFormat format) {
  if (format == EmbeddingFormat::kBinary) {
    std::string out(kEmbeddingMagic, sizeof(kEmbeddingMagic) - 1);
    PutU32(&out, static_cast<std::uint32_t>(table.dim()));
    PutU32(&out, static_cast<std::uint32_t>(table.size()));
    for (const auto& e : table) {
      if (e.id.size() > std::numeric_limits<std::uint16_t>::max()) {
        throw Error(ErrorCode::kInvalidArgument, "embedding id too long");
      }
      PutU16(&out, static_cast<std::uint16_t>(e.id.size()));
      out += e.id;
      for (double v : e.values) {
        float f = static_cast<float>(v);
        std::uint32_t bits;
        std::memcpy(&bits, &f, sizeof(bits));
        PutU32(&out, bits);
      }
    }
    auto os = OpenForWrite(path, true);
    os.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!os) throw Error(ErrorCode::kIo, path + ": write failed");
    return;
  }
  auto os = OpenForWrite(path);
  for (const auto& e : table) {
    os << e.id << '\t';
    for (std::size_t d = 0; d < e.values.size(); ++d) {
      if (d) os << ',';
      // 9 significant digits round-trip any float32.
      os << FormatDouble(static_cast<float>(e.values[d]), 9);
    }
    os << '\n';
  }
  if (!os) throw Error(ErrorCode::kIo, path + ": write failed");
}

std::vector<Trial> LoadProtocol(const std::string& path) {
  std::vector<std::size_t> linenos;
  auto lines = ReadRecordLines(path, &linenos);
  std::vector<Trial> trials;
  trials.reserve(lines.size());
  for (std::size_t i = 0; i < lines.size(); ++i) {
    bool blank = false;
    auto fields = SplitRecord(lines[i], &blank);
    if (blank) {
      Fail(ErrorCode::kBlankField, path, linenos[i],
           "blank speaker or utterance field");
    }
    if (fields.size() != 2 && fields.size() != 3) {
      Fail(ErrorCode::kMalformedLine, path, linenos[i],
           "expected 2 or 3 fields, got " + std::to_string(fields.size()));
    }
    Trial t{fields[0], fields[1], std::nullopt};
    if (fields.size() == 3) {
      t.label = ParseTrialClass(fields[2]);
      if (!t.label) {
        Fail(ErrorCode::kUnknownLabel, path, linenos[i],
             "unknown label '" + fields[2] + "'");
      }
    }
    trials.push_back(std::move(t));
  }
  return trials;
}

void WriteProtocol(const std::string& path, const std::vector<Trial>& trials) {
  auto os = OpenForWrite(path);
  for (const auto& t : trials) {
    os << t.speaker_id << ' ' << t.test_utt_id;
    if (t.label) os << ' ' << TrialClassName(*t.label);
    os << '\n';
  }
  if (!os) throw Error(ErrorCode::kIo, path + ": write failed");
}

EnrollmentMap LoadEnrollment(const std::string& path) {
  std::vector<std::size_t> linenos;
  auto lines = ReadRecordLines(path, &linenos);
  if (lines.empty()) {
    throw Error(ErrorCode::kEmptyProtocol, path + ": no enrollment records");
  }
  EnrollmentMap map;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    bool blank = false;
    auto fields = SplitRecord(lines[i], &blank);
    if (blank) Fail(ErrorCode::kBlankField, path, linenos[i], "blank field");
    if (fields.size() != 2) {
      Fail(ErrorCode::kMalformedLine, path, linenos[i],
           "expected 'speaker_id utt_id'");
    }
    try {
      map.Add(fields[0], fields[1]);
    } catch (const Error& e) {
      Fail(e.code(), path, linenos[i], e.what());
    }
  }
  return map;
}

void WriteEnrollment(const std::string& path, const EnrollmentMap& map) {
  auto os = OpenForWrite(path);
  for (const auto& spk : map.speakers()) {
    for (const auto& utt : *map.Find(spk)) os << spk << ' ' << utt << '\n';
  }
  if (!os) throw Error(ErrorCode::kIo, path + ": write failed");
}

}  // namespace sasv
