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

#ifndef SASV_CORE_H_
#define SASV_CORE_H_

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace sasv {

// Identifies the kind of failure so callers (and tests) can tell apart
// errors that share a message format.
enum class ErrorCode {
  kIo,
  kBadMagic,
  kTruncated,
  kDimensionMismatch,
  kDuplicateId,
  kNonFinite,
  kMalformedLine,
  kUnknownLabel,
  kBlankField,
  kDuplicateEntry,
  kEmptyProtocol,
  kUnresolvedId,
  kEmptyInput,
  kZeroVector,
  kSingleClass,
  kNonConvergence,
  kInsufficientData,
  kInvalidArgument,
};

const char* ErrorCodeName(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

// The three test-utterance classes of a spoofing-aware trial.
enum class TrialClass { kTarget, kNonTarget, kSpoof };

// Sub-labels: ASV says "same speaker", CM says "bona fide".
// A Spoof trial has no meaningful ASV label; it is reported as 0.
int AsvLabel(TrialClass c);
int CmLabel(TrialClass c);
// Positive for the joint decision iff both sub-labels are positive.
bool IsSasvPositive(TrialClass c);
bool IsBonafide(TrialClass c);

std::string_view TrialClassName(TrialClass c);
// Exact match on {target, nontarget, spoof}.
std::optional<TrialClass> ParseTrialClass(std::string_view token);

struct Embedding {
  std::string id;
  std::vector<double> values;
};

// Insertion-ordered collection of embeddings with unique ids and a
// common dimension.
class EmbeddingTable {
 public:
  explicit EmbeddingTable(std::size_t dim = 0) : dim_(dim) {}

  // Throws kDuplicateId, kDimensionMismatch or kNonFinite.
  void Add(Embedding embedding);

  const Embedding* Find(const std::string& id) const;
  // Throws kUnresolvedId when absent.
  const Embedding& At(const std::string& id) const;
  bool Contains(const std::string& id) const { return Find(id) != nullptr; }

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return items_.size(); }
  bool empty() const { return items_.empty(); }

  auto begin() const { return items_.begin(); }
  auto end() const { return items_.end(); }
  const Embedding& operator[](std::size_t i) const { return items_[i]; }

 private:
  std::size_t dim_;
  std::vector<Embedding> items_;
  std::unordered_map<std::string, std::size_t> index_;
};

struct Trial {
  std::string speaker_id;
  std::string test_utt_id;
  std::optional<TrialClass> label;
};

// speaker_id -> enrollment utterance ids, in first-seen speaker order.
class EnrollmentMap {
 public:
  // Throws kDuplicateEntry on a repeated (speaker, utterance) pair.
  void Add(const std::string& speaker_id, const std::string& utt_id);

  const std::vector<std::string>* Find(const std::string& speaker_id) const;
  bool Contains(const std::string& speaker_id) const {
    return Find(speaker_id) != nullptr;
  }

  const std::vector<std::string>& speakers() const { return order_; }
  std::size_t size() const { return order_.size(); }
  bool empty() const { return order_.empty(); }

 private:
  std::vector<std::string> order_;
  std::unordered_map<std::string, std::vector<std::string>> utts_;
};

struct ScoreRecord {
  Trial trial;
  double s_asv = 0.0;
  double s_cm = 0.0;
  // Empty until a fusion strategy has been applied.
  std::optional<double> s_sasv;
};

}  // namespace sasv

#endif  // SASV_CORE_H_
