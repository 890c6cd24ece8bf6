// Copyright 2026 The amrkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "amr/error.hpp"

namespace amr {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::MalformedLine: return "MalformedLine";
    case ErrorKind::CountMismatch: return "CountMismatch";
    case ErrorKind::InvalidReading: return "InvalidReading";
    case ErrorKind::GeometryError: return "GeometryError";
    case ErrorKind::InvalidPair: return "InvalidPair";
    case ErrorKind::EmptyDataset: return "EmptyDataset";
    case ErrorKind::MissingAnnotation: return "MissingAnnotation";
    case ErrorKind::MissingImage: return "MissingImage";
    case ErrorKind::BadMagic: return "BadMagic";
    case ErrorKind::UnsupportedVersion: return "UnsupportedVersion";
    case ErrorKind::UnsupportedDtype: return "UnsupportedDtype";
    case ErrorKind::TruncatedPayload: return "TruncatedPayload";
    case ErrorKind::NonFiniteValue: return "NonFiniteValue";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::NotFound: return "NotFound";
    case ErrorKind::InsufficientBoxes: return "InsufficientBoxes";
    case ErrorKind::EmptyRange: return "EmptyRange";
    case ErrorKind::NonDistribution: return "NonDistribution";
    case ErrorKind::DuplicateGt: return "DuplicateGt";
    case ErrorKind::MissingGroundTruth: return "MissingGroundTruth";
    case ErrorKind::ZeroVariance: return "ZeroVariance";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace amr
