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


#include "mrfcnn/bss_eval.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <unsupported/Eigen/FFT>

#include "mrfcnn/errors.hpp"
#include "mrfcnn/fft.hpp"

namespace mrfcnn {

void BssConfig::validate() const {
  if (filter_len < 1) throw ParameterError("bss_eval: filter_len must be >= 1");
  if (!(cap_db > 0.0)) throw ParameterError("bss_eval: cap_db must be positive");
}

namespace {

using Spectrum = std::vector<std::complex<double>>;

class Projector {
 public:
  Projector(const std::vector<std::vector<double>>& refs, const std::vector<double>& estimate,
            std::size_t taps)
      : taps_(taps), n_(estimate.size()), size_(next_fast_size(n_ + taps - 1)) {
    for (const auto& r : refs) spectra_.push_back(transform(r));
    est_ = transform(estimate);
  }

  // Orthogonal projection of the estimate onto delays 0..taps-1 of the
  // selected references, as a length n + taps - 1 signal.
  std::vector<double> project(const std::vector<std::size_t>& which, bool& regularized) {
    const std::size_t L = taps_, k = which.size();
    Eigen::MatrixXd gram(k * L, k * L);
    Eigen::VectorXd rhs(k * L);
    for (std::size_t a = 0; a < k; ++a) {
      const auto ce = correlate(spectra_[which[a]], est_);
      for (std::size_t t = 0; t < L; ++t) rhs(static_cast<Eigen::Index>(a * L + t)) = ce[t];
      for (std::size_t b = a; b < k; ++b) {
        // c[d] = sum_u s_a(u) s_b(u + d), so gram((a,t1),(b,t2)) = c[t1 - t2].
        const auto c = correlate(spectra_[which[a]], spectra_[which[b]]);
        for (std::size_t t1 = 0; t1 < L; ++t1)
          for (std::size_t t2 = 0; t2 < L; ++t2) {
            const std::size_t lag = (t1 + size_ - t2) % size_;
            const auto r = static_cast<Eigen::Index>(a * L + t1);
            const auto col = static_cast<Eigen::Index>(b * L + t2);
            gram(r, col) = c[lag];
            gram(col, r) = c[lag];
          }
      }
    }
    Eigen::VectorXd coef = solve(gram, rhs, regularized);

    Spectrum acc(size_, 0.0);
    std::vector<double> filt(size_);
    for (std::size_t a = 0; a < k; ++a) {
      std::fill(filt.begin(), filt.end(), 0.0);
      for (std::size_t t = 0; t < L; ++t) filt[t] = coef(static_cast<Eigen::Index>(a * L + t));
      const Spectrum f = transform(filt);
      const Spectrum& s = spectra_[which[a]];
      for (std::size_t i = 0; i < size_; ++i) acc[i] += f[i] * s[i];
    }
    std::vector<double> out;
    fft_.inv(out, acc);
    out.resize(n_ + L - 1);
    return out;
  }

 private:
  Spectrum transform(const std::vector<double>& x) {
    std::vector<double> padded(size_, 0.0);
    std::copy(x.begin(), x.end(), padded.begin());
    Spectrum out;
    fft_.fwd(out, padded);
    return out;
  }

  std::vector<double> correlate(const Spectrum& x, const Spectrum& y) {
    Spectrum p(size_);
    for (std::size_t i = 0; i < size_; ++i) p[i] = std::conj(x[i]) * y[i];
    std::vector<double> out;
    fft_.inv(out, p);
    return out;
  }

  static Eigen::VectorXd solve(const Eigen::MatrixXd& gram, const Eigen::VectorXd& rhs,
                               bool& regularized) {
    Eigen::LLT<Eigen::MatrixXd> llt(gram);
    if (llt.info() == Eigen::Success) {
      const Eigen::ArrayXd d = llt.matrixLLT().diagonal().array().square();
      if (d.minCoeff() > 1e-14 * d.maxCoeff()) return llt.solve(rhs);
    }
    regularized = true;
    const double ridge = std::max(1e-12 * gram.trace(), 1e-300);
    Eigen::MatrixXd reg = gram;
    reg.diagonal().array() += ridge;
    return reg.ldlt().solve(rhs);
  }

  std::size_t taps_, n_, size_;
  Eigen::FFT<double> fft_;
  std::vector<Spectrum> spectra_;
  Spectrum est_;
};

double energy(const std::vector<double>& x) {
  double e = 0.0;
  for (double v : x) e += v * v;
  return e;
}

double ratio_db(double num, double den, double floor, double cap) {
  if (den < floor) return cap;
  if (num <= 0.0) return -cap;
  return std::clamp(10.0 * std::log10(num / den), -cap, cap);
}

}  // namespace

EvalResult bss_eval(const std::vector<double>& estimate,
                    const std::vector<std::vector<double>>& references, std::size_t target,
                    const BssConfig& config) {
  config.validate();
  if (references.empty()) throw ShapeError("bss_eval: no references");
  if (target >= references.size())
    throw ShapeError("bss_eval: target index " + std::to_string(target) + " out of range");
  for (const auto& r : references)
    if (r.size() != estimate.size())
      throw ShapeError("bss_eval: reference length " + std::to_string(r.size()) +
                       " differs from estimate length " + std::to_string(estimate.size()));
  if (estimate.empty()) throw ShapeError("bss_eval: empty signals");

  EvalResult r;
  const double cap = config.cap_db;
  const double e_est = energy(estimate);
  if (e_est == 0.0) {
    r.zero_estimate = true;
    r.sdr = r.sir = r.sar = -cap;
    return r;
  }
  Projector proj(references, estimate, config.filter_len);
  const std::vector<double> s_target = proj.project({target}, r.regularized);
  std::vector<std::size_t> all(references.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  const std::vector<double> p_all = proj.project(all, r.regularized);

  const std::size_t m = s_target.size();
  std::vector<double> interf(m), artif(m), total(m), target_interf(m);
  for (std::size_t t = 0; t < m; ++t) {
    const double e = t < estimate.size() ? estimate[t] : 0.0;
    interf[t] = p_all[t] - s_target[t];
    artif[t] = e - p_all[t];
    total[t] = interf[t] + artif[t];
    target_interf[t] = s_target[t] + interf[t];
  }
  const double floor = 1e-12 * e_est;
  const double e_target = energy(s_target);
  r.sdr = ratio_db(e_target, energy(total), floor, cap);
  r.sir = ratio_db(e_target, energy(interf), floor, cap);
  r.sar = ratio_db(energy(target_interf), energy(artif), floor, cap);
  return r;
}

}  // namespace mrfcnn
