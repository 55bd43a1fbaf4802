// Copyright 2026 The mrfcnn Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include <unsupported/Eigen/FFT>

namespace mrfcnn {

// Smallest m >= n whose only prime factors are 2, 3 and 5.
inline std::size_t next_fast_size(std::size_t n) {
  if (n <= 1) return 1;
  for (std::size_t m = n;; ++m) {
    std::size_t r = m;
    for (std::size_t p : {2u, 3u, 5u})
      while (r % p == 0) r /= p;
    if (r == 1) return m;
  }
}

// In-place 2D complex FFT over a rows x cols row-major buffer. Not
// thread-safe; give each worker its own instance.
template <typename T>
class Fft2d {
 public:
  using Complex = std::complex<T>;

  Fft2d(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), line_(std::max(rows, cols)),
        out_(std::max(rows, cols)) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return rows_ * cols_; }

  void forward(std::vector<Complex>& data) { transform(data, false); }
  // Scaled by 1/(rows*cols), so inverse(forward(x)) == x.
  void inverse(std::vector<Complex>& data) { transform(data, true); }

 private:
  void transform(std::vector<Complex>& data, bool inverse) {
    for (std::size_t r = 0; r < rows_; ++r) {
      Complex* row = data.data() + r * cols_;
      std::copy(row, row + cols_, line_.begin());
      run(out_.data(), line_.data(), cols_, inverse);
      std::copy(out_.begin(), out_.begin() + cols_, row);
    }
    for (std::size_t c = 0; c < cols_; ++c) {
      for (std::size_t r = 0; r < rows_; ++r) line_[r] = data[r * cols_ + c];
      run(out_.data(), line_.data(), rows_, inverse);
      for (std::size_t r = 0; r < rows_; ++r) data[r * cols_ + c] = out_[r];
    }
  }

  void run(Complex* dst, const Complex* src, std::size_t n, bool inverse) {
    if (n == 1) {
      dst[0] = src[0];
      return;
    }
    const auto len = static_cast<Eigen::Index>(n);
    if (inverse)
      fft_.inv(dst, src, len);
    else
      fft_.fwd(dst, src, len);
  }

  std::size_t rows_, cols_;
  std::vector<Complex> line_, out_;
  Eigen::FFT<T> fft_;
};

}  // namespace mrfcnn
