/*
 * Copyright 2026 The gpslc Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "gpslc/error.hpp"

namespace gpslc {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::NotSymmetric: return "NotSymmetric";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::MissingField: return "MissingField";
    case ErrorCode::NoiseOnRectangular: return "NoiseOnRectangular";
    case ErrorCode::NonPositiveInput: return "NonPositiveInput";
    case ErrorCode::NonBinaryTreatment: return "NonBinaryTreatment";
    case ErrorCode::ShapeTooSmall: return "ShapeTooSmall";
    case ErrorCode::IterationCap: return "IterationCap";
    case ErrorCode::ObjectTooSmall: return "ObjectTooSmall";
    case ErrorCode::NoSolution: return "NoSolution";
    case ErrorCode::DegenerateWeights: return "DegenerateWeights";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::NonRectangular: return "NonRectangular";
    case ErrorCode::GridMismatch: return "GridMismatch";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

bool is_data_contract_error(ErrorCode code) {
  switch (code) {
    case ErrorCode::SchemaError:
    case ErrorCode::NonRectangular:
    case ErrorCode::GridMismatch:
    case ErrorCode::NonBinaryTreatment:
    case ErrorCode::ObjectTooSmall:
    case ErrorCode::ShapeMismatch:
      return true;
    default:
      return false;
  }
}

}  // namespace gpslc
