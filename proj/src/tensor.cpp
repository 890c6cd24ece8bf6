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

#include "amr/tensor.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <numeric>
#include <string_view>

#include "amr/error.hpp"
#include "amr/fileio.hpp"

namespace amr {
namespace {

constexpr std::array<std::uint8_t, 4> kMagic{'A', 'M', 'R', 'T'};

std::size_t product(const std::vector<std::uint32_t>& dims) {
  return std::accumulate(dims.begin(), dims.end(), std::size_t{1},
                         [](std::size_t a, std::uint32_t b) { return a * b; });
}

void check_dims(const std::vector<std::uint32_t>& dims) {
  if (dims.empty() || dims.size() > 4) {
    throw Error(ErrorKind::ShapeMismatch, "tensor rank must be 1..4, got " + std::to_string(dims.size()));
  }
  for (auto d : dims) {
    if (d == 0) throw Error(ErrorKind::ShapeMismatch, "tensor dims must be positive");
  }
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8 |
         static_cast<std::uint32_t>(p[2]) << 16 | static_cast<std::uint32_t>(p[3]) << 24;
}

}  // namespace

PredictionTensor::PredictionTensor(std::vector<std::uint32_t> dims, std::vector<float> data)
    : dims_(std::move(dims)), data_(std::move(data)) {
  check_dims(dims_);
  if (product(dims_) != data_.size()) {
    throw Error(ErrorKind::ShapeMismatch, "dims describe " + std::to_string(product(dims_)) +
                                              " values but data has " + std::to_string(data_.size()));
  }
  for (float v : data_) {
    if (!std::isfinite(v)) throw Error(ErrorKind::NonFiniteValue, "tensor holds a non-finite value");
  }
}

PredictionTensor::PredictionTensor(std::vector<std::uint32_t> dims, float fill) : dims_(std::move(dims)) {
  check_dims(dims_);
  if (!std::isfinite(fill)) throw Error(ErrorKind::NonFiniteValue, "non-finite fill value");
  data_.assign(product(dims_), fill);
}

std::size_t encoded_size(const PredictionTensor& t) {
  return kTensorFixedHeader + 4 * t.rank() + 4 * t.size();
}

std::vector<std::uint8_t> write_tensor(const PredictionTensor& t) {
  std::vector<std::uint8_t> out;
  out.reserve(encoded_size(t));
  out.insert(out.end(), kMagic.begin(), kMagic.end());
  put_u32(out, kTensorVersion);
  out.push_back(0);  // dtype f32
  out.push_back(static_cast<std::uint8_t>(t.rank()));
  out.resize(kTensorFixedHeader, 0);
  for (auto d : t.dims()) put_u32(out, d);
  for (float v : t.data()) put_u32(out, std::bit_cast<std::uint32_t>(v));
  return out;
}

PredictionTensor read_tensor(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4 || !std::equal(kMagic.begin(), kMagic.end(), bytes.begin())) {
    throw Error(ErrorKind::BadMagic, "stream does not start with AMRT");
  }
  if (bytes.size() < kTensorFixedHeader) throw Error(ErrorKind::TruncatedPayload, "header cut short");
  const auto version = get_u32(bytes.data() + 4);
  if (version != kTensorVersion) {
    throw Error(ErrorKind::UnsupportedVersion, "version " + std::to_string(version));
  }
  if (bytes[8] != 0) throw Error(ErrorKind::UnsupportedDtype, "dtype " + std::to_string(bytes[8]));
  const std::size_t ndim = bytes[9];
  for (std::size_t i = 10; i < kTensorFixedHeader; ++i) {
    if (bytes[i] != 0) throw Error(ErrorKind::BadMagic, "non-zero header padding");
  }
  if (ndim < 1 || ndim > 4) throw Error(ErrorKind::ShapeMismatch, "rank " + std::to_string(ndim));
  if (bytes.size() < kTensorFixedHeader + 4 * ndim) {
    throw Error(ErrorKind::TruncatedPayload, "dims cut short");
  }
  std::vector<std::uint32_t> dims(ndim);
  for (std::size_t i = 0; i < ndim; ++i) dims[i] = get_u32(bytes.data() + kTensorFixedHeader + 4 * i);
  check_dims(dims);

  const std::size_t count = product(dims);
  const std::size_t offset = kTensorFixedHeader + 4 * ndim;
  if (bytes.size() < offset + 4 * count) throw Error(ErrorKind::TruncatedPayload, "payload cut short");
  if (bytes.size() > offset + 4 * count) {
    throw Error(ErrorKind::ShapeMismatch, "trailing bytes after payload");
  }
  std::vector<float> data(count);
  for (std::size_t i = 0; i < count; ++i) {
    data[i] = std::bit_cast<float>(get_u32(bytes.data() + offset + 4 * i));
  }
  return PredictionTensor(std::move(dims), std::move(data));
}

PredictionTensor load_tensor(const std::filesystem::path& path) {
  const auto s = read_file(path);
  return read_tensor(std::span(reinterpret_cast<const std::uint8_t*>(s.data()), s.size()));
}

void save_tensor(const std::filesystem::path& path, const PredictionTensor& t) {
  const auto bytes = write_tensor(t);
  write_file_atomic(path, std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

}  // namespace amr
