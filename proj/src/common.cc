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

#include "gridswap/common.h"

#include <cmath>
#include <cstdlib>
#include <limits>
#include <thread>

namespace gridswap {

void validate_tariff(const Tariff& tariff) {
  if (!std::isfinite(tariff.wholesale) || !std::isfinite(tariff.retail)) {
    throw InputError("tariff prices must be finite");
  }
  if (tariff.wholesale < 0.0) {
    throw InputError("wholesale price must be non-negative");
  }
  if (!(tariff.retail > tariff.wholesale)) {
    throw InputError("retail price must exceed wholesale price (got retail " +
                     std::to_string(tariff.retail) + ", wholesale " +
                     std::to_string(tariff.wholesale) + ")");
  }
}

std::size_t Rng::below(std::size_t n) {
  if (n == 0) throw InputError("Rng::below requires n > 0");
  // Rejection sampling removes modulo bias.
  const std::uint64_t range = static_cast<std::uint64_t>(n);
  const std::uint64_t limit =
      std::numeric_limits<std::uint64_t>::max() -
      std::numeric_limits<std::uint64_t>::max() % range;
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return static_cast<std::size_t>(x % range);
}

unsigned worker_threads() {
  unsigned n = 0;
  if (const char* env = std::getenv("GRIDSWAP_THREADS")) {
    n = static_cast<unsigned>(std::strtoul(env, nullptr, 10));
  }
  if (n == 0) n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : n;
}

}  // namespace gridswap
