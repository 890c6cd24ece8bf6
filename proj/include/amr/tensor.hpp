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

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace amr {

/// Dense row-major float32 array with 1 to 4 dimensions; every value finite.
class PredictionTensor {
 public:
  PredictionTensor() = default;
  /// Throws ShapeMismatch if the dims do not describe `data`, NonFiniteValue on NaN/inf.
  PredictionTensor(std::vector<std::uint32_t> dims, std::vector<float> data);
  /// Zero-filled tensor of the given shape.
  explicit PredictionTensor(std::vector<std::uint32_t> dims, float fill = 0.0f);

  const std::vector<std::uint32_t>& dims() const { return dims_; }
  std::span<const float> data() const { return data_; }
  std::span<float> mutable_data() { return data_; }
  std::size_t size() const { return data_.size(); }
  std::size_t rank() const { return dims_.size(); }

  float at(std::size_t i, std::size_t j) const { return data_[i * dims_[1] + j]; }
  float at(std::size_t i, std::size_t j, std::size_t k) const {
    return data_[(i * dims_[1] + j) * dims_[2] + k];
  }
  float& at(std::size_t i, std::size_t j) { return data_[i * dims_[1] + j]; }
  float& at(std::size_t i, std::size_t j, std::size_t k) {
    return data_[(i * dims_[1] + j) * dims_[2] + k];
  }

  friend bool operator==(const PredictionTensor&, const PredictionTensor&) = default;

 private:
  std::vector<std::uint32_t> dims_;
  std::vector<float> data_;
};

// .amrt layout, little-endian:
//   0  "AMRT"
//   4  u32 version (1)
//   8  u8 dtype (0 = f32)
//   9  u8 ndim
//   10 6 zero bytes
//   16 ndim x u32 dims
//   .. product(dims) x f32
inline constexpr std::uint32_t kTensorVersion = 1;
inline constexpr std::size_t kTensorFixedHeader = 16;

std::size_t encoded_size(const PredictionTensor& t);

std::vector<std::uint8_t> write_tensor(const PredictionTensor& t);
PredictionTensor read_tensor(std::span<const std::uint8_t> bytes);

PredictionTensor load_tensor(const std::filesystem::path& path);
void save_tensor(const std::filesystem::path& path, const PredictionTensor& t);

}  // namespace amr
