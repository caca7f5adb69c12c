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

// Concave transportation program shared by the welfare solver and the
// auctioneer:
//
//   max  sum_i G_i(x_i) + sum_j sum_i (gain_ji * d_ji - quad_j * d_ji^2)
//   s.t. x_i = eta * sum_j d_ji,  lo_i <= x_i <= hi_i,
//        sum_i d_ji <= capacity_j,  d >= 0.
//
// Solved on the dual of the coupling x_i = eta * sum_j d_ji. For column
// prices lambda (per delivered kWh) every row is a closed-form water-filling
// problem, and every column answers with the maximizer of G_i(x) - lambda*x
// on [lo_i, hi_i]. Column prices are updated by exact coordinate search
// (Gauss-Seidel) on the monotone excess eta * s_i(lambda) - x_i(lambda).

#ifndef GRIDSWAP_SRC_TRANSPORT_H_
#define GRIDSWAP_SRC_TRANSPORT_H_

#include <functional>
#include <vector>

namespace gridswap::ev::detail {

struct TransportProblem {
  double eta = 1.0;
  std::vector<double> capacity;             // per row
  std::vector<double> quad;                 // per row, > 0
  std::vector<std::vector<double>> gain;    // [row][column]
  // Nonincreasing in lambda; returns the column's preferred delivered
  // quantity, already clamped to its bounds.
  std::function<double(std::size_t column, double lambda)> response;
  std::size_t columns = 0;
};

struct TransportSolution {
  std::vector<std::vector<double>> sent;  // [row][column]
  std::vector<double> prices;             // per column
  double residual = 0.0;                  // max |eta*s_i - x_i|
  int sweeps = 0;
  bool converged = false;
};

// Water-filling for one row: maximize sum_i (g_i d_i - a d_i^2) subject to
// sum_i d_i <= cap, d >= 0. Writes into `out`.
void fill_row(const std::vector<double>& effective_gain, double quad,
              double capacity, std::vector<double>& out);

TransportSolution solve_transport(const TransportProblem& problem,
                                  std::vector<double> initial_prices,
                                  double tolerance, int max_sweeps);

}  // namespace gridswap::ev::detail

#endif  // GRIDSWAP_SRC_TRANSPORT_H_
