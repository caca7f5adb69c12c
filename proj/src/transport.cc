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

#include "transport.h"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace gridswap::ev::detail {
namespace {

constexpr double kPriceLimit = 1e12;

class DualState {
 public:
  DualState(const TransportProblem& p, std::vector<double> prices)
      : p_(p), prices_(std::move(prices)), gain_(p.columns), row_(p.columns) {}

  // Energy sent toward `column` when its price is `lambda` and all other
  // prices are held at their current values.
  double sent_toward(std::size_t column, double lambda) {
    const double saved = prices_[column];
    prices_[column] = lambda;
    double total = 0.0;
    for (std::size_t j = 0; j < p_.capacity.size(); ++j) {
      fill(j);
      total += row_[column];
    }
    prices_[column] = saved;
    return total;
  }

  double excess(std::size_t column, double lambda) {
    return p_.eta * sent_toward(column, lambda) - p_.response(column, lambda);
  }

  // Finds a zero of the nondecreasing excess in the column's own price.
  void update(std::size_t column) {
    double lo = prices_[column];
    double hi = prices_[column];
    double step = std::max(1e-3, std::abs(prices_[column]) * 0.5);
    double f_lo = excess(column, lo);
    if (f_lo == 0.0) return;
    double f_hi = f_lo;
    if (f_lo < 0.0) {
      while (f_hi < 0.0 && hi < kPriceLimit) {
        lo = hi;
        hi += step;
        step *= 2.0;
        f_hi = excess(column, hi);
      }
    } else {
      while (f_lo > 0.0 && lo > -kPriceLimit) {
        hi = lo;
        lo -= step;
        step *= 2.0;
        f_lo = excess(column, lo);
      }
    }
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      if (excess(column, mid) < 0.0) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    prices_[column] = 0.5 * (lo + hi);
  }

  void fill(std::size_t row) {
    for (std::size_t i = 0; i < p_.columns; ++i) {
      gain_[i] = p_.gain[row][i] + p_.eta * prices_[i];
    }
    fill_row(gain_, p_.quad[row], p_.capacity[row], row_);
  }

  std::vector<std::vector<double>> primal() {
    std::vector<std::vector<double>> sent(p_.capacity.size());
    for (std::size_t j = 0; j < p_.capacity.size(); ++j) {
      fill(j);
      sent[j] = row_;
    }
    return sent;
  }

  double residual() {
    const auto sent = primal();
    double worst = 0.0;
    for (std::size_t i = 0; i < p_.columns; ++i) {
      double s = 0.0;
      for (const auto& row : sent) s += row[i];
      worst = std::max(worst,
                       std::abs(p_.eta * s - p_.response(i, prices_[i])));
    }
    return worst;
  }

  const std::vector<double>& prices() const { return prices_; }

 private:
  const TransportProblem& p_;
  std::vector<double> prices_;
  std::vector<double> gain_;
  std::vector<double> row_;
};

}  // namespace

void fill_row(const std::vector<double>& effective_gain, double quad,
              double capacity, std::vector<double>& out) {
  const std::size_t n = effective_gain.size();
  out.assign(n, 0.0);
  double unconstrained = 0.0;
  for (double g : effective_gain) unconstrained += std::max(g, 0.0);
  unconstrained /= 2.0 * quad;
  double level = 0.0;
  if (unconstrained > capacity) {
    std::vector<double> sorted(effective_gain);
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    double prefix = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      prefix += sorted[k];
      const double mu = (prefix - 2.0 * quad * capacity) /
                        static_cast<double>(k + 1);
      if (k + 1 == n || mu >= sorted[k + 1]) {
        level = mu;
        break;
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = std::max(0.0, (effective_gain[i] - level) / (2.0 * quad));
  }
}

TransportSolution solve_transport(const TransportProblem& problem,
                                  std::vector<double> initial_prices,
                                  double tolerance, int max_sweeps) {
  initial_prices.resize(problem.columns, 0.0);
  DualState state(problem, std::move(initial_prices));
  TransportSolution out;
  for (int sweep = 1; sweep <= max_sweeps; ++sweep) {
    for (std::size_t i = 0; i < problem.columns; ++i) state.update(i);
    out.sweeps = sweep;
    out.residual = state.residual();
    if (out.residual <= tolerance) {
      out.converged = true;
      break;
    }
  }
  out.sent = state.primal();
  out.prices = state.prices();
  return out;
}

}  // namespace gridswap::ev::detail
