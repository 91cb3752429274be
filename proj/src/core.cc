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

#include "sasv/core.h"

#include <cmath>

namespace sasv {

const char* ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kIo: return "io";
    case ErrorCode::kBadMagic: return "bad-magic";
    case ErrorCode::kTruncated: return "truncated";
    case ErrorCode::kDimensionMismatch: return "dimension-mismatch";
    case ErrorCode::kDuplicateId: return "duplicate-id";
    case ErrorCode::kNonFinite: return "non-finite";
    case ErrorCode::kMalformedLine: return "malformed-line";
    case ErrorCode::kUnknownLabel: return "unknown-label";
    case ErrorCode::kBlankField: return "blank-field";
    case ErrorCode::kDuplicateEntry: return "duplicate-entry";
    case ErrorCode::kEmptyProtocol: return "empty-protocol";
    case ErrorCode::kUnresolvedId: return "unresolved-id";
    case ErrorCode::kEmptyInput: return "empty-input";
    case ErrorCode::kZeroVector: return "zero-vector";
    case ErrorCode::kSingleClass: return "single-class";
    case ErrorCode::kNonConvergence: return "non-convergence";
    case ErrorCode::kInsufficientData: return "insufficient-data";
    case ErrorCode::kInvalidArgument: return "invalid-argument";
  }
  return "unknown";
}

int AsvLabel(TrialClass c) { return c == TrialClass::kTarget ? 1 : 0; }

int CmLabel(TrialClass c) { return c == TrialClass::kSpoof ? 0 : 1; }

bool IsSasvPositive(TrialClass c) { return AsvLabel(c) == 1 && CmLabel(c) == 1; }

bool IsBonafide(TrialClass c) { return CmLabel(c) == 1; }

std::string_view TrialClassName(TrialClass c) {
  switch (c) {
    case TrialClass::kTarget: return "target";
    case TrialClass::kNonTarget: return "nontarget";
    case TrialClass::kSpoof: return "spoof";
  }
  return "?";
}

std::optional<TrialClass> ParseTrialClass(std::string_view token) {
  if (token == "target") return TrialClass::kTarget;
  if (token == "nontarget") return TrialClass::kNonTarget;
  if (token == "spoof") return TrialClass::kSpoof;
  return std::nullopt;
}

void EmbeddingTable::Add(Embedding embedding) {
  if (embedding.id.empty()) {
    throw Error(ErrorCode::kBlankField, "embedding with empty id");
  }
  if (items_.empty() && dim_ == 0) dim_ = embedding.values.size();
  if (embedding.values.size() != dim_) {
    throw Error(ErrorCode::kDimensionMismatch,
                "embedding '" + embedding.id + "' has dimension " +
                    std::to_string(embedding.values.size()) + ", expected " +
                    std::to_string(dim_));
  }
  for (double v : embedding.values) {
    if (!std::isfinite(v)) {
      throw Error(ErrorCode::kNonFinite,
                  "embedding '" + embedding.id + "' has a non-finite value");
    }
  }
  if (index_.count(embedding.id) != 0) {
    throw Error(ErrorCode::kDuplicateId,
                "duplicate embedding id '" + embedding.id + "'");
  }
  index_.emplace(embedding.id, items_.size());
  items_.push_back(std::move(embedding));
}

const Embedding* EmbeddingTable::Find(const std::string& id) const {
  auto it = index_.find(id);
  return it == index_.end() ? nullptr : &items_[it->second];
}

const Embedding& EmbeddingTable::At(const std::string& id) const {
  const Embedding* e = Find(id);
  if (e == nullptr) {
    throw Error(ErrorCode::kUnresolvedId, "no embedding for id '" + id + "'");
  }
  return *e;
}

void EnrollmentMap::Add(const std::string& speaker_id,
                        const std::string& utt_id) {
  if (speaker_id.empty() || utt_id.empty()) {
    throw Error(ErrorCode::kBlankField, "blank enrollment field");
  }
  auto it = utts_.find(speaker_id);
  if (it == utts_.end()) {
    order_.push_back(speaker_id);
    utts_[speaker_id].push_back(utt_id);
    return;
  }
  for (const auto& u : it->second) {
    if (u == utt_id) {
      throw Error(ErrorCode::kDuplicateEntry,
                  "duplicate enrollment entry '" + speaker_id + " " + utt_id +
                      "'");
    }
  }
  it->second.push_back(utt_id);
}

const std::vector<std::string>* EnrollmentMap::Find(
    const std::string& speaker_id) const {
  auto it = utts_.find(speaker_id);
  return it == utts_.end() ? nullptr : &it->second;
}

}  // namespace sasv
