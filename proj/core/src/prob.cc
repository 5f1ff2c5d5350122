// Copyright 2026 The HPAC Authors
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

#include "hpac/prob.h"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "hpac/kernels.h"

namespace hpac {
namespace {

std::atomic<int64_t> g_peak_symbols{0};

void NotePeak(int64_t n) {
  int64_t cur = g_peak_symbols.load(std::memory_order_relaxed);
  while (n > cur && !g_peak_symbols.compare_exchange_weak(cur, n)) {
  }
}

// log(e^d - 1) for d > 0.
double LogExpm1(double d) {
  return d > 30.0 ? d + std::log1p(-std::exp(-d)) : std::log(std::expm1(d));
}

void LogSoftmax(const MixtureParams& p, double* out) {
  double mx = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < p.k; ++k) mx = std::max(mx, p.logit[k]);
  double sum = 0.0;
  for (int k = 0; k < p.k; ++k) sum += std::exp(p.logit[k] - mx);
  const double lse = mx + std::log(sum);
  for (int k = 0; k < p.k; ++k) out[k] = p.logit[k] - lse;
}

// Lower and upper tail of one logistic at z: sigma(z) and sigma(-z), both
// with full relative precision.
struct Tails {
  double lo;
  double hi;
};

Tails LogisticTails(double z) {
  const double e = std::exp(-std::fabs(z));
  const double a = 1.0 / (1.0 + e);
  const double b = e / (1.0 + e);
  return z >= 0 ? Tails{a, b} : Tails{b, a};
}

}  // namespace

void MixtureParams::Validate() const {
  if (k < 1 || k > kMaxMixtures) {
    throw std::invalid_argument("mixture count " + std::to_string(k) +
                                " outside [1, " +
                                std::to_string(kMaxMixtures) + "]");
  }
  for (int i = 0; i < k; ++i) {
    if (!std::isfinite(logit[i]) || !std::isfinite(mean[i]) ||
        !std::isfinite(scale[i])) {
      throw std::invalid_argument("non-finite mixture parameter");
    }
    if (scale[i] < kMinScale * (1 - 1e-6)) {
      throw std::invalid_argument("mixture scale below floor");
    }
  }
}

double LogBinProb(const MixtureParams& p, int x, const PixelRange& range,
                  MixtureGrad* grad) {
  const int top = range.max_value();
  if (x < 0 || x > top) throw std::invalid_argument("sample outside alphabet");
  p.Validate();
  const double xn = range.Normalize(x);
  const double h = range.half_bin();
  double log_pi[kMaxMixtures];
  double log_m[kMaxMixtures];
  double da[kMaxMixtures] = {};
  double dc[kMaxMixtures] = {};
  double av[kMaxMixtures] = {};
  double cv[kMaxMixtures] = {};
  LogSoftmax(p, log_pi);
  for (int k = 0; k < p.k; ++k) {
    const double s = p.scale[k];
    const double a = (xn + h - p.mean[k]) / s;
    const double c = (xn - h - p.mean[k]) / s;
    av[k] = a;
    cv[k] = c;
    if (x == 0 && x == top) {
      log_m[k] = 0.0;
    } else if (x == 0) {
      log_m[k] = -SoftplusScalar(-a);
      da[k] = Sigmoid(-a);
    } else if (x == top) {
      log_m[k] = -SoftplusScalar(c);
      dc[k] = -Sigmoid(c);
    } else {
      const double d = a - c;
      log_m[k] = c + LogExpm1(d) - SoftplusScalar(a) - SoftplusScalar(c);
      da[k] = 1.0 / (-std::expm1(-d)) - Sigmoid(a);
      dc[k] = -1.0 / std::expm1(d) - Sigmoid(c);
    }
  }
  double mx = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < p.k; ++k) mx = std::max(mx, log_pi[k] + log_m[k]);
  double sum = 0.0;
  for (int k = 0; k < p.k; ++k) sum += std::exp(log_pi[k] + log_m[k] - mx);
  const double log_p = mx + std::log(sum);
  if (grad) {
    for (int k = 0; k < p.k; ++k) {
      const double resp = std::exp(log_pi[k] + log_m[k] - log_p);
      const double s = p.scale[k];
      grad->logit[k] = resp - std::exp(log_pi[k]);
      grad->mean[k] = -resp * (da[k] + dc[k]) / s;
      grad->scale[k] = -resp * (av[k] * da[k] + cv[k] * dc[k]) / s;
    }
  }
  return log_p;
}

double BinProb(const MixtureParams& p, int x, const PixelRange& range) {
  return std::exp(LogBinProb(p, x, range));
}

double AfcCenter(const MixtureParams& p, const PixelRange& range) {
  double log_pi[kMaxMixtures];
  LogSoftmax(p, log_pi);
  double c = 0.0;
  for (int k = 0; k < p.k; ++k) c += std::exp(log_pi[k]) * p.mean[k];
  return range.ToPixel(c);
}

std::vector<uint32_t> QuantizePmf(std::span<const double> probs) {
  const int64_t n = static_cast<int64_t>(probs.size());
  if (n < 1 || n > static_cast<int64_t>(kCdfTotal)) {
    throw std::invalid_argument("PMF size outside [1, 65536]");
  }
  double total = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0) || !std::isfinite(p)) {
      throw std::invalid_argument("PMF entries must be finite and >= 0");
    }
    total += p;
  }
  std::vector<uint32_t> freq(n, 1);
  if (!(total > 0.0)) {
    // Degenerate input: spread evenly.
    uint32_t left = kCdfTotal - static_cast<uint32_t>(n);
    for (int64_t i = 0; i < n; ++i) freq[i] += left / n + (i < left % n ? 1 : 0);
    return freq;
  }
  // Entries at the floor; grows until every remaining share is >= 1.
  std::vector<uint8_t> floored(n, 0);
  int64_t num_floored = 0;
  double free_mass = total;
  std::vector<double> share(n, 0.0);
  for (;;) {
    const double budget = static_cast<double>(kCdfTotal - num_floored);
    bool changed = false;
    for (int64_t i = 0; i < n; ++i) {
      if (floored[i]) continue;
      share[i] = free_mass > 0 ? probs[i] / free_mass * budget : 0.0;
      if (share[i] < 1.0) {
        floored[i] = 1;
        ++num_floored;
        free_mass -= probs[i];
        changed = true;
      }
    }
    if (!changed) break;
  }
  int64_t assigned = num_floored;
  std::vector<int64_t> order;
  order.reserve(n);
  for (int64_t i = 0; i < n; ++i) {
    if (floored[i]) continue;
    freq[i] = static_cast<uint32_t>(std::floor(share[i]));
    assigned += freq[i];
    order.push_back(i);
  }
  int64_t rem = static_cast<int64_t>(kCdfTotal) - assigned;
  if (rem < 0 || rem > static_cast<int64_t>(order.size())) {
    throw std::logic_error("PMF quantization remainder out of range");
  }
  if (rem > 0) {
    auto better = [&](int64_t a, int64_t b) {
      const double fa = share[a] - std::floor(share[a]);
      const double fb = share[b] - std::floor(share[b]);
      return fa != fb ? fa > fb : a < b;
    };
    std::nth_element(order.begin(), order.begin() + (rem - 1), order.end(),
                     better);
    for (int64_t j = 0; j < rem; ++j) ++freq[order[j]];
  }
  return freq;
}

CodingWindow AfcWindow(const MixtureParams& p, int r, const PixelRange& range) {
  if (r < kMinWindow || r > kMaxWindow) {
    throw std::invalid_argument("window size " + std::to_string(r) +
                                " outside [2, 32768]");
  }
  p.Validate();
  const int top = range.max_value();
  CodingWindow win;
  win.nominal = r;
  if (r > top) {
    win.x_lo = 0;
    win.x_hi = top;
  } else {
    const double c = std::clamp(AfcCenter(p, range), 0.0,
                                static_cast<double>(top));
    win.x_lo = static_cast<int>(std::max<double>(0, std::round(c - r / 2.0)));
    win.x_hi = static_cast<int>(std::min<double>(top, std::round(c + r / 2.0)));
  }
  const int n = win.count();
  double log_pi[kMaxMixtures];
  {
    double mx = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < p.k; ++k) mx = std::max(mx, p.logit[k]);
    double sum = 0.0;
    for (int k = 0; k < p.k; ++k) sum += std::exp(p.logit[k] - mx);
    for (int k = 0; k < p.k; ++k) log_pi[k] = p.logit[k] - mx - std::log(sum);
  }
  std::vector<double> probs(static_cast<size_t>(n) + 1, 0.0);
  const double h = range.half_bin();
  double escape = 0.0;
  for (int k = 0; k < p.k; ++k) {
    const double pi = std::exp(log_pi[k]);
    const double inv_s = 1.0 / p.scale[k];
    const double mu = p.mean[k];
    // Edge e sits between samples x_lo + e - 1 and x_lo + e.
    auto edge = [&](int e) {
      const int x = win.x_lo + e;
      if (x <= 0) return Tails{0.0, 1.0};
      if (x > top) return Tails{1.0, 0.0};
      return LogisticTails((range.Normalize(x) - h - mu) * inv_s);
    };
    Tails prev = edge(0);
    escape += pi * prev.lo;
    for (int e = 1; e <= n; ++e) {
      const Tails cur = edge(e);
      // Difference on the side with the smaller tail keeps precision.
      const double m = cur.lo <= 0.5 ? cur.lo - prev.lo : prev.hi - cur.hi;
      probs[e - 1] += pi * std::max(m, 0.0);
      prev = cur;
    }
    escape += pi * prev.hi;
  }
  win.escape_mass = std::clamp(escape, 0.0, 1.0);
  probs[n] = win.escape_mass;
  win.table = CdfTable::FromFrequencies(QuantizePmf(probs));
  NotePeak(n + 1);
  return win;
}

uint64_t EscapeMap(int64_t s, int64_t r_prime) {
  if (s >= 0 && s < r_prime) {
    throw std::invalid_argument("in-window index passed to escape map");
  }
  return s >= r_prime ? static_cast<uint64_t>(2 * (s - r_prime))
                      : static_cast<uint64_t>(-2 * s - 1);
}

int64_t EscapeUnmap(uint64_t residual, int64_t r_prime) {
  const int64_t half = static_cast<int64_t>(residual >> 1);
  return (residual & 1u) ? -half - 1 : half + r_prime;
}

void EncodeWithWindow(RangeEncoder& enc, const CodingWindow& win, int x) {
  const int64_t s = static_cast<int64_t>(x) - win.x_lo;
  if (s >= 0 && s < win.count()) {
    enc.Encode(static_cast<int>(s), win.table);
    return;
  }
  enc.Encode(win.sentinel(), win.table);
  WriteExpGolomb(enc, EscapeMap(s, win.count()));
}

int DecodeWithWindow(RangeDecoder& dec, const CodingWindow& win,
                     const PixelRange& range) {
  const int sym = dec.Decode(win.table);
  if (sym < win.count()) return win.x_lo + sym;
  const uint64_t res = ReadExpGolomb(dec);
  if (res > (uint64_t{1} << 40)) throw DecodeError("escape residual too large");
  const int64_t x = win.x_lo + EscapeUnmap(res, win.count());
  if (x < 0 || x > range.max_value() || (x >= win.x_lo && x <= win.x_hi)) {
    throw DecodeError("escaped sample outside alphabet");
  }
  return static_cast<int>(x);
}

double WindowCostBits(const CodingWindow& win, int x) {
  const int64_t s = static_cast<int64_t>(x) - win.x_lo;
  if (s >= 0 && s < win.count()) return win.table.CostBits(static_cast<int>(s));
  const uint64_t res = EscapeMap(s, win.count());
  const int n = static_cast<int>(std::bit_width(res + 1));
  return win.table.CostBits(win.sentinel()) + (2 * n - 1);
}

int64_t PeakTableSymbols() { return g_peak_symbols.load(); }
void ResetPeakTableSymbols() { g_peak_symbols.store(0); }

}  // namespace hpac
