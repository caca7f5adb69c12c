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

#include "gridswap/market.h"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace gridswap::market {
namespace {

struct Ranked {
  const Order* order;
  std::size_t index;
  double remaining;
};

void validate_orders(std::span<const Order> orders, Side side,
                     std::optional<int>& slot) {
  for (const Order& o : orders) {
    if (o.side != side) {
      throw InputError("order from '" + o.agent_id + "' is on the wrong side");
    }
    if (!(o.quantity > 0.0) || !std::isfinite(o.quantity)) {
      throw InputError("order from '" + o.agent_id +
                       "' must have a positive finite quantity");
    }
    if (!(o.limit_price >= 0.0) || !std::isfinite(o.limit_price)) {
      throw InputError("order from '" + o.agent_id +
                       "' must have a finite non-negative limit price");
    }
    if (slot && *slot != o.slot) {
      throw InputError("orders span more than one slot (" +
                       std::to_string(*slot) + " and " +
                       std::to_string(o.slot) + ")");
    }
    slot = o.slot;
  }
}

std::vector<Ranked> rank(std::span<const Order> orders, bool descending) {
  std::vector<Ranked> out;
  out.reserve(orders.size());
  for (std::size_t i = 0; i < orders.size(); ++i) {
    out.push_back({&orders[i], i, orders[i].quantity});
  }
  std::sort(out.begin(), out.end(), [descending](const Ranked& a,
                                                 const Ranked& b) {
    if (a.order->limit_price != b.order->limit_price) {
      return descending ? a.order->limit_price > b.order->limit_price
                        : a.order->limit_price < b.order->limit_price;
    }
    if (a.order->agent_id != b.order->agent_id) {
      return a.order->agent_id < b.order->agent_id;
    }
    return a.index < b.index;
  });
  return out;
}

}  // namespace

double SlotClearing::matched_quantity() const {
  double total = 0.0;
  for (const Match& m : matches) total += m.quantity;
  return total;
}

SlotClearing clear_double_auction(std::span<const Order> buys,
                                  std::span<const Order> sells,
                                  PricingRule rule) {
  std::optional<int> slot;
  validate_orders(buys, Side::kBuy, slot);
  validate_orders(sells, Side::kSell, slot);

  SlotClearing result;
  result.slot = slot.value_or(0);

  std::vector<Ranked> bids = rank(buys, /*descending=*/true);
  std::vector<Ranked> asks = rank(sells, /*descending=*/false);

  std::size_t b = 0;
  std::size_t a = 0;
  const Ranked* marginal_bid = nullptr;
  const Ranked* marginal_ask = nullptr;
  while (b < bids.size() && a < asks.size() &&
         bids[b].order->limit_price >= asks[a].order->limit_price) {
    const double q = std::min(bids[b].remaining, asks[a].remaining);
    // Identical agents on consecutive orders collapse into one match row.
    if (!result.matches.empty() &&
        result.matches.back().buyer_id == bids[b].order->agent_id &&
        result.matches.back().seller_id == asks[a].order->agent_id) {
      result.matches.back().quantity += q;
    } else {
      result.matches.push_back(
          {bids[b].order->agent_id, asks[a].order->agent_id, q});
    }
    marginal_bid = &bids[b];
    marginal_ask = &asks[a];
    bids[b].remaining -= q;
    asks[a].remaining -= q;
    // Exact float equality is intended: q equals one of the remainders.
    if (bids[b].remaining <= 0.0) ++b;
    if (asks[a].remaining <= 0.0) ++a;
  }

  if (marginal_bid != nullptr) {
    switch (rule) {
      case PricingRule::kMarginalBid:
        result.clearing_price = marginal_bid->order->limit_price;
        break;
      case PricingRule::kMidpoint:
        result.clearing_price = 0.5 * (marginal_bid->order->limit_price +
                                       marginal_ask->order->limit_price);
        break;
    }
  }

  for (const Ranked& r : bids) {
    if (r.remaining > 0.0) result.residual_buys[r.order->agent_id] += r.remaining;
  }
  for (const Ranked& r : asks) {
    if (r.remaining > 0.0) {
      result.residual_sells[r.order->agent_id] += r.remaining;
    }
  }
  return result;
}

Settlement settle_slot(const SlotClearing& clearing, const Tariff& tariff) {
  validate_tariff(tariff);
  Settlement s;
  if (clearing.clearing_price) {
    const double price = *clearing.clearing_price;
    for (const Match& m : clearing.matches) {
      const double value = m.quantity * price;
      s.flows[m.buyer_id].p2p_payment += value;
      s.flows[m.seller_id].p2p_receipt += value;
      s.total_p2p_payments += value;
      s.total_p2p_receipts += value;
    }
  }
  for (const auto& [id, q] : clearing.residual_buys) {
    s.flows[id].grid_charge += q * tariff.retail;
    s.grid_import_kwh += q;
  }
  for (const auto& [id, q] : clearing.residual_sells) {
    s.flows[id].grid_credit += q * tariff.wholesale;
    s.grid_export_kwh += q;
  }
  return s;
}

}  // namespace gridswap::market
