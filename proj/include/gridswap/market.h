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

// Closed-order-book double auction for one 15-minute slot.
//
// Buy orders are ranked by limit price descending, sell orders ascending,
// ties broken by agent id and then submission index. The best remaining bid
// is matched against the best remaining ask while bid >= ask, splitting
// quantities. Every matched kWh trades at one uniform price; unmatched
// quantity falls back to the grid at the tariff.

#ifndef GRIDSWAP_MARKET_H_
#define GRIDSWAP_MARKET_H_

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gridswap/common.h"

namespace gridswap::market {

enum class Side { kBuy, kSell };

struct Order {
  std::string agent_id;
  Side side = Side::kBuy;
  double quantity = 0.0;     // kWh, > 0
  double limit_price = 0.0;  // $/kWh, >= 0
  int slot = 0;
};

struct Match {
  std::string buyer_id;
  std::string seller_id;
  double quantity = 0.0;
};

enum class PricingRule {
  // Limit price of the lowest-priced buy order that received an allocation.
  kMarginalBid,
  // Midpoint of the marginal bid and the marginal (highest allocated) ask.
  kMidpoint,
};

struct SlotClearing {
  int slot = 0;
  std::optional<double> clearing_price;
  std::vector<Match> matches;
  // Unmatched quantity per agent, keyed by agent id.
  std::map<std::string, double> residual_buys;
  std::map<std::string, double> residual_sells;

  double matched_quantity() const;
};

struct CashFlow {
  double p2p_payment = 0.0;  // paid to sellers for matched energy
  double p2p_receipt = 0.0;  // received from buyers for matched energy
  double grid_charge = 0.0;  // imports at retail
  double grid_credit = 0.0;  // exports at wholesale

  // Positive when the agent pays out more than it receives.
  double net_cost() const {
    return p2p_payment + grid_charge - p2p_receipt - grid_credit;
  }
};

struct Settlement {
  std::map<std::string, CashFlow> flows;
  double total_p2p_payments = 0.0;
  double total_p2p_receipts = 0.0;
  double grid_import_kwh = 0.0;
  double grid_export_kwh = 0.0;
};

// Orders must all carry the same slot and the side matching their list.
// Throws InputError on mixed slots, wrong sides, non-positive quantities or
// invalid limit prices. Empty or non-crossing books give an empty clearing.
SlotClearing clear_double_auction(std::span<const Order> buys,
                                  std::span<const Order> sells,
                                  PricingRule rule = PricingRule::kMarginalBid);

Settlement settle_slot(const SlotClearing& clearing, const Tariff& tariff);

}  // namespace gridswap::market

#endif  // GRIDSWAP_MARKET_H_
