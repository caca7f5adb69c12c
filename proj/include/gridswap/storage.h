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

// Auction in which shared facility controllers (SFCs) lease storage space
// from residential units (RUs). Prices are $/kWh of storage, quantities kWh.

#ifndef GRIDSWAP_STORAGE_H_
#define GRIDSWAP_STORAGE_H_

#include <span>
#include <string>
#include <vector>

#include "gridswap/common.h"

namespace gridswap::storage {

struct ResidentialUnit {
  std::string id;
  double capacity = 0.0;           // A_k
  double reservation_price = 0.0;  // r_k
  double reluctance = 1.0;         // alpha_k > 0
};

struct SfcAgent {
  std::string id;
  double requirement = 0.0;  // q_m > 0
  double bid_price = 0.0;    // b_m
};

enum class BurdenRule { kProportional, kEqual };

void validate(std::span<const ResidentialUnit> rus, std::span<const SfcAgent> sfcs);

struct Participants {
  double vickrey_price = 0.0;
  std::vector<std::size_t> rus;   // indices into the input, ascending
  std::vector<std::size_t> sfcs;
  bool empty() const { return rus.empty() || sfcs.empty(); }
};

// Vickrey price = second-highest SFC bid (the only bid if there is one).
// RUs with r_k <= v take part; SFCs whose bid is at least the lowest
// participating reservation price take part.
Participants determine_participants(std::span<const ResidentialUnit> rus,
                                    std::span<const SfcAgent> sfcs);

// argmax over [0, A] of (p - r) a - alpha/2 a^2.
double follower_best_response(const ResidentialUnit& ru, double price);

// (p - r) a - alpha/2 a^2.
double follower_utility(const ResidentialUnit& ru, double price, double share);

double total_supply(std::span<const ResidentialUnit> rus, double price);

// Lowest p on the grid floor + k * resolution (plus the ceiling itself)
// maximizing (mean_bid - p) * min(S(p), requirement).
double stackelberg_price(std::span<const ResidentialUnit> rus, double requirement,
                         double mean_bid, double floor, double ceiling,
                         double resolution = 1e-4);

struct ShareAllocation {
  std::vector<double> sfc_allocations;  // per SFC
  std::vector<double> burden;           // per RU, unsold kWh
};

// Fills SFC requirements in descending bid order. If shares exceed the
// total requirement, the unsold space is spread over RUs in proportion to
// reservation price or equally; no unit carries more than its own share, the
// excess is passed on to the others.
ShareAllocation allocate_shares(std::span<const double> shares,
                                std::span<const ResidentialUnit> rus,
                                std::span<const SfcAgent> sfcs, BurdenRule rule);

struct StorageOutcome {
  double vickrey_price = 0.0;
  std::vector<std::string> ru_participants;
  std::vector<std::string> sfc_participants;
  double auction_price = 0.0;
  // The vectors below are indexed like the input and are zero for
  // non-participants.
  std::vector<double> shares;
  std::vector<double> burden;
  std::vector<double> ru_utility;  // at share minus burden
  std::vector<double> sfc_allocations;
  std::vector<double> sfc_utility;  // (bid - price) * allocation
  bool empty() const { return ru_participants.empty(); }
  double traded() const;
  double total_ru_utility() const;
};

StorageOutcome run_storage_auction(std::span<const ResidentialUnit> rus,
                                   std::span<const SfcAgent> sfcs, BurdenRule rule);

struct StorageScenario {
  std::vector<ResidentialUnit> rus;
  std::vector<SfcAgent> sfcs;
};

// 3 to 8 RUs of 5 to 25 households with 25 kWh each, reservation prices in
// [0.05, 0.15], reluctance in [5e-4, 5e-3]; 2 to 5 SFCs needing 100 to 500 kWh
// and bidding in [0.15, 0.30].
StorageScenario random_scenario(Rng& rng);

// Multiplicative misreport factors 0.5, 0.55, ..., 1.5.
std::vector<double> default_deviation_grid();

enum class Misreport { kReservationPrice, kCapacity, kBid };

struct Deviation {
  std::size_t scenario = 0;
  std::string agent_id;
  Misreport kind = Misreport::kReservationPrice;
  double factor = 1.0;
  double truthful_utility = 0.0;
  double deviating_utility = 0.0;
  double gain() const { return deviating_utility - truthful_utility; }
};

struct IrViolation {
  std::size_t scenario = 0;
  std::string agent_id;
  double utility = 0.0;
};

struct IcReport {
  std::size_t scenarios = 0;
  std::size_t runs = 0;
  std::vector<Deviation> profitable;  // gain > 1e-9
  std::vector<IrViolation> ir_violations;
  // SFC bid raises that lowered the auction price or raised the SFC's own
  // true utility.
  std::vector<Deviation> sfc_bid_anomalies;
};

// For each scenario and agent, re-runs the auction under every unilateral
// misreport on the grid: RUs misreport reservation price or capacity, SFCs
// raise their bid (factors above 1). Realized utilities use the true
// parameters; an RU cannot deliver more than its true capacity.
IcReport check_incentive_compatibility(std::span<const StorageScenario> scenarios,
                                       std::span<const double> factors,
                                       BurdenRule rule);

// Requirement split equally over the participating RUs, each capped at its
// capacity, paid at the Vickrey price. Per-RU utility, indexed like the input.
std::vector<double> equal_distribution_utility(std::span<const ResidentialUnit> rus,
                                               std::span<const SfcAgent> sfcs);

// Each RU leases its best response at the fixed feed-in price.
std::vector<double> feed_in_utility(std::span<const ResidentialUnit> rus,
                                    double feed_in_price);

}  // namespace gridswap::storage

#endif  // GRIDSWAP_STORAGE_H_
