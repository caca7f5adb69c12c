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

// EV-to-EV energy exchange at a charging station.
//
// Charging EV i values delivered energy x_i with
//     U_i = w_i * ln(x_i - c_min_i + 1),   c_min_i <= x_i <= c_max_i,
// where x_i = eta * sum_j d_ji is what arrives after transmission losses.
// Discharging EV j pays
//     L_j = l1_j * sum_i d_ji^2 + l2_j * sum_i d_ji,   sum_i d_ji <= d_max_j.
// The station maximizes sum_i U_i - sum_j L_j, either directly
// (solve_social_welfare) or through an iterative double auction where the
// agents only report marginal prices.

#ifndef GRIDSWAP_EV_EXCHANGE_H_
#define GRIDSWAP_EV_EXCHANGE_H_

#include <limits>
#include <span>
#include <string>
#include <vector>

#include "gridswap/common.h"

namespace gridswap::ev {

inline constexpr double kUnbounded = std::numeric_limits<double>::infinity();

struct ChargingEv {
  std::string id;
  double willingness = 1.0;  // w_i > 0
  double min_demand = 0.0;   // delivered kWh
  double max_demand = kUnbounded;
  double bid_price = 0.0;    // last reported $/kWh delivered
};

struct DischargingEv {
  std::string id;
  double quad_cost = 0.0;    // l1 >= 0
  double linear_cost = 0.0;  // l2 >= 0
  double max_supply = 0.0;   // kWh sent, > 0
  double ask_price = 0.0;    // last reported $/kWh sent (quantity-weighted)
};

// Energy transfer between dischargers and chargers.
struct EvAllocation {
  double eta = 1.0;
  // sent[j][i]: kWh discharger j sends toward charger i.
  std::vector<std::vector<double>> sent;
  // received[i][j] == eta * sent[j][i]: kWh charger i receives from j.
  std::vector<std::vector<double>> received;

  static EvAllocation from_sent(std::vector<std::vector<double>> sent,
                                std::size_t chargers, double eta);

  double delivered_to(std::size_t charger) const;
  double sent_by(std::size_t discharger) const;
  double sent_toward(std::size_t charger) const;
  double total_sent() const;
  double total_delivered() const;
};

// w * ln(eta * sum(received) - c_min + 1). `received` is the energy
// dispatched toward the charger before losses. Throws DomainError when the
// log argument is not positive.
double satisfaction(const ChargingEv& ev, std::span<const double> received,
                    double eta);

// l1 * sum d^2 + l2 * sum d. Throws InputError on negative entries.
double discharge_cost(const DischargingEv& ev, std::span<const double> sent);

// Sum of satisfactions minus sum of discharge costs.
double social_welfare(std::span<const ChargingEv> chargers,
                      std::span<const DischargingEv> dischargers,
                      const EvAllocation& allocation);

// Validates parameter ranges and aggregate feasibility
// (eta * sum d_max >= sum c_min). Throws InputError / InfeasibleError.
void validate_market(std::span<const ChargingEv> chargers,
                     std::span<const DischargingEv> dischargers, double eta);

// Welfare-maximizing allocation. Requires l1 > 0 for every discharger so the
// optimizer is unique.
EvAllocation solve_social_welfare(std::span<const ChargingEv> chargers,
                                  std::span<const DischargingEv> dischargers,
                                  double eta);

struct AuctionOptions {
  double eps = 1e-4;
  int max_iter = 500;
};

struct AuctionIteration {
  std::vector<double> bids;               // per charger, $/kWh delivered
  std::vector<std::vector<double>> asks;  // [j][i], $/kWh sent
  double welfare = 0.0;
  double max_price_change = 0.0;
};

struct AuctionTrace {
  std::vector<AuctionIteration> iterations;
  bool converged = false;
  int iteration_count() const { return static_cast<int>(iterations.size()); }
};

// One bilateral trade at its settlement price ($/kWh sent).
struct PairTrade {
  std::size_t discharger = 0;
  std::size_t charger = 0;
  double sent = 0.0;
  double price = 0.0;
};

struct EvSettlement {
  std::vector<PairTrade> trades;
  std::vector<double> charger_payments;
  std::vector<double> discharger_receipts;
  // Collected minus paid out; never negative.
  double auctioneer_surplus = 0.0;
};

struct AuctionResult {
  std::vector<ChargingEv> chargers;  // with final reported bids
  std::vector<DischargingEv> dischargers;
  double eta = 1.0;
  AuctionOptions options;
  EvAllocation allocation;
  AuctionTrace trace;
  EvSettlement settlement;
  double welfare = 0.0;
};

// Iterative double auction. Each round the agents report their marginal
// price and its slope at the current allocation; the auctioneer allocates
// by maximizing the surplus those linear marginal reports imply; the loop
// stops once no reported price moves by more than eps (infinity norm).
// Non-convergence after max_iter is reported through trace.converged.
AuctionResult run_iterative_auction(std::span<const ChargingEv> chargers,
                                    std::span<const DischargingEv> dischargers,
                                    double eta, const AuctionOptions& options);

struct DisconnectionResult {
  AuctionResult restarted;
  std::string departed_id;
  double committed_quantity = 0.0;
  double penalty = 0.0;
};

// Re-runs the auction without the departing agent and charges it
// penalty_rate per kWh it was committed to trade. When the departure
// empties one side of the market the restart trades nothing. Unknown ids throw
// InputError.
DisconnectionResult apply_disconnection(const AuctionResult& prior,
                                        const std::string& agent_id,
                                        double penalty_rate);

struct GridPrices {
  double sell_out = 0.0;  // grid price to buyers
  double buy_back = 0.0;  // grid price paid to sellers
};

struct HybridOptions {
  double eta_p2p = 0.9;
  double eta_hybrid = 0.7;
  AuctionOptions auction;
};

struct HybridComparison {
  GridPrices grid;
  double delivered = 0.0;
  double p2p_avg_buy = 0.0;
  double p2p_avg_sell = 0.0;
  double p2p_transmitted = 0.0;
  double hybrid_avg_buy = 0.0;
  double hybrid_avg_sell = 0.0;
  double hybrid_transmitted = 0.0;
  // Fraction of traded energy routed through the grid in the hybrid model.
  double hybrid_grid_share = 0.0;
};

struct HybridSettlement {
  std::vector<double> charger_costs;        // per charger
  std::vector<double> discharger_revenues;  // per discharger
  double local_sent = 0.0;
  double grid_sent = 0.0;
};

// Reprices the trades of a finished auction under the hybrid rule below.
// Flows routed through the grid pay sell_out and earn buy_back per kWh sent.
HybridSettlement settle_hybrid(const AuctionResult& p2p, const GridPrices& grid);

// P2P-only trading versus a hybrid model where each flow may go through the
// grid. A flow stays local only when the grid sell-out price is not below
// the flow's ask and the buy-back price does not beat its P2P price.
std::vector<HybridComparison> compare_hybrid(
    std::span<const ChargingEv> chargers,
    std::span<const DischargingEv> dischargers,
    std::span<const GridPrices> points, const HybridOptions& options = {});

}  // namespace gridswap::ev

#endif  // GRIDSWAP_EV_EXCHANGE_H_
