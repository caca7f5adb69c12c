// Copyright 2026 The GridSwap Authors
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

#ifndef GRIDSWAP_COMMON_H_
#define GRIDSWAP_COMMON_H_

#include <cstddef>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace gridswap {

// Base of every error raised by the library. The CLI maps these to exit
// code 1 (domain error).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or contract-violating input.
class InputError : public Error {
 public:
  using Error::Error;
};

// A mathematical function was evaluated outside its domain.
class DomainError : public Error {
 public:
  using Error::Error;
};

// A constrained program has no feasible point.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

// Exhaustive enumeration was requested on an instance that is too large.
class SizeError : public Error {
 public:
  using Error::Error;
};

// Scenario files that do not validate against the documented schema.
class SchemaError : public Error {
 public:
  using Error::Error;
};

// Grid tariff in $/kWh. The grid buys exports at `wholesale` and sells
// imports at `retail`.
struct Tariff {
  double wholesale = 0.0;
  double retail = 0.0;
};

// Throws InputError unless retail > wholesale >= 0 and both are finite.
void validate_tariff(const Tariff& tariff);

// Seeded generator with a portable draw sequence. std::mt19937_64 output is
// fully specified by the standard; the distribution helpers below are
// implemented here so results do not depend on the standard library vendor.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform on [0, 1).
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer on [0, n). n must be positive.
  std::size_t below(std::size_t n);

  // Uniform integer on [lo, hi], inclusive.
  long long between(long long lo, long long hi) {
    return lo + static_cast<long long>(
                    below(static_cast<std::size_t>(hi - lo + 1)));
  }

  // Fisher-Yates shuffle.
  template <typename It>
  void shuffle(It first, It last) {
    const auto n = static_cast<std::size_t>(last - first);
    for (std::size_t i = n; i > 1; --i) {
      std::size_t j = below(i);
      std::swap(first[i - 1], first[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

// Environment-configurable worker count (GRIDSWAP_THREADS, 0 = hardware
// concurrency). Always at least 1.
unsigned worker_threads();

}  // namespace gridswap

#endif  // GRIDSWAP_COMMON_H_
