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

#include "gridswap/ev_exchange.h"

#include <algorithm>
#include <cmath>

#include "transport.h"

namespace gridswap::ev {
namespace {

constexpr double kSolverTolerance = 1e-11;
constexpr int kSolverSweeps = 200000;
constexpr double kActiveTrade = 1e-12;

double clamp_demand(const ChargingEv& ev, double x) {
  return std::min(std::max(x, ev.min_demand), ev.max_demand);
}

// Marginal satisfaction per delivered kWh and its (negative) slope.
struct ChargerReport {
  double price;
  double curvature;  // -dprice/dx, > 0
  double at;         // evaluation point
};

ChargerReport charger_report(const ChargingEv& ev, double delivered) {
  const double x = std::max(delivered, ev.min_demand);
  const double arg = x - ev.min_demand + 1.0;
  return {ev.willingness / arg, ev.willingness / (arg * arg), x};
}

void require_strict_costs(std::span<const DischargingEv> dischargers) {
  for (const DischargingEv& d : dischargers) {
    if (!(d.quad_cost > 0.0)) {
      throw InputError("discharger '" + d.id +
                       "' needs a positive quadratic cost factor for a unique "
                       "welfare optimum");
    }
  }
}

std::vector<std::vector<double>> zeros(std::size_t rows, std::size_t cols) {
  return std::vector<std::vector<double>>(rows, std::vector<double>(cols, 0.0));
}

}  // namespace

EvAllocation EvAllocation::from_sent(std::vector<std::vector<double>> sent,
                                     std::size_t chargers, double eta) {
  EvAllocation a;
  a.eta = eta;
  a.received = zeros(chargers, sent.size());
  for (std::size_t j = 0; j < sent.size(); ++j) {
    for (std::size_t i = 0; i < chargers; ++i) {
      a.received[i][j] = eta * sent[j][i];
    }
  }
  a.sent = std::move(sent);
  return a;
}

double EvAllocation::delivered_to(std::size_t charger) const {
  double total = 0.0;
  for (double c : received[charger]) total += c;
  return total;
}

double EvAllocation::sent_by(std::size_t discharger) const {
  double total = 0.0;
  for (double d : sent[discharger]) total += d;
  return total;
}

double EvAllocation::sent_toward(std::size_t charger) const {
  double total = 0.0;
  for (const auto& row : sent) total += row[charger];
  return total;
}

double EvAllocation::total_sent() const {
  double total = 0.0;
  for (std::size_t j = 0; j < sent.size(); ++j) total += sent_by(j);
  return total;
}

double EvAllocation::total_delivered() const {
  double total = 0.0;
  for (std::size_t i = 0; i < received.size(); ++i) total += delivered_to(i);
  return total;
}

double satisfaction(const ChargingEv& ev, std::span<const double> received,
                    double eta) {
  double total = 0.0;
  for (double c : received) total += c;
  const double arg = eta * total - ev.min_demand + 1.0;
  if (!(arg > 0.0)) {
    throw DomainError("satisfaction of '" + ev.id +
                      "' is undefined: delivered energy is more than 1 kWh "
                      "below its minimum demand");
  }
  return ev.willingness * std::log(arg);
}

double discharge_cost(const DischargingEv& ev, std::span<const double> sent) {
  double squares = 0.0;
  double total = 0.0;
  for (double d : sent) {
    if (d < 0.0) {
      throw InputError("discharger '" + ev.id + "' has a negative transfer");
    }
    squares += d * d;
    total += d;
  }
  return ev.quad_cost * squares + ev.linear_cost * total;
}

double social_welfare(std::span<const ChargingEv> chargers,
                      std::span<const DischargingEv> dischargers,
                      const EvAllocation& allocation) {
  double welfare = 0.0;
  std::vector<double> column(dischargers.size());
  for (std::size_t i = 0; i < chargers.size(); ++i) {
    for (std::size_t j = 0; j < dischargers.size(); ++j) {
      column[j] = allocation.sent[j][i];
    }
    welfare += satisfaction(chargers[i], column, allocation.eta);
  }
  for (std::size_t j = 0; j < dischargers.size(); ++j) {
    welfare -= discharge_cost(dischargers[j], allocation.sent[j]);
  }
  return welfare;
}

void validate_market(std::span<const ChargingEv> chargers,
                     std::span<const DischargingEv> dischargers, double eta) {
  if (chargers.empty() || dischargers.empty()) {
    throw InputError("EV market needs at least one charger and one discharger");
  }
  if (!(eta > 0.0 && eta <= 1.0)) {
    throw InputError("transmission efficiency must lie in (0, 1]");
  }
  double min_total = 0.0;
  for (const ChargingEv& c : chargers) {
    if (!(c.willingness > 0.0) || !std::isfinite(c.willingness)) {
      throw InputError("charger '" + c.id + "' needs willingness > 0");
    }
    if (!(c.min_demand >= 0.0) || !(c.max_demand >= c.min_demand)) {
      throw InputError("charger '" + c.id +
                       "' needs 0 <= min demand <= max demand");
    }
    min_total += c.min_demand;
  }
  double supply_total = 0.0;
  for (const DischargingEv& d : dischargers) {
    if (!(d.quad_cost >= 0.0) || !(d.linear_cost >= 0.0) ||
        (d.quad_cost == 0.0 && d.linear_cost == 0.0)) {
      throw InputError("discharger '" + d.id +
                       "' needs non-negative cost factors, not both zero");
    }
    if (!(d.max_supply > 0.0) || !std::isfinite(d.max_supply)) {
      throw InputError("discharger '" + d.id + "' needs max supply > 0");
    }
    supply_total += d.max_supply;
  }
  if (eta * supply_total < min_total) {
    throw InfeasibleError(
        "aggregate minimum demand " + std::to_string(min_total) +
        " kWh exceeds deliverable supply " + std::to_string(eta * supply_total) +
        " kWh (eta * sum of max supply)");
  }
}

EvAllocation solve_social_welfare(std::span<const ChargingEv> chargers,
                                  std::span<const DischargingEv> dischargers,
                                  double eta) {
  validate_market(chargers, dischargers, eta);
  require_strict_costs(dischargers);

  detail::TransportProblem p;
  p.eta = eta;
  p.columns = chargers.size();
  for (const DischargingEv& d : dischargers) {
    p.capacity.push_back(d.max_supply);
    p.quad.push_back(d.quad_cost);
    p.gain.emplace_back(chargers.size(), -d.linear_cost);
  }
  p.response = [chargers](std::size_t i, double lambda) {
    const ChargingEv& c = chargers[i];
    if (!(lambda > 0.0)) return c.max_demand;
    return clamp_demand(c, c.min_demand - 1.0 + c.willingness / lambda);
  };
  std::vector<double> start;
  for (const ChargingEv& c : chargers) start.push_back(0.5 * c.willingness);
  detail::TransportSolution sol =
      detail::solve_transport(p, std::move(start), kSolverTolerance,
                              kSolverSweeps);
  return EvAllocation::from_sent(std::move(sol.sent), chargers.size(), eta);
}

namespace {

EvSettlement settle(const std::vector<double>& bids,
                    const std::vector<std::vector<double>>& asks,
                    const EvAllocation& allocation, std::size_t chargers) {
  EvSettlement s;
  s.charger_payments.assign(chargers, 0.0);
  s.discharger_receipts.assign(allocation.sent.size(), 0.0);
  for (std::size_t j = 0; j < allocation.sent.size(); ++j) {
    for (std::size_t i = 0; i < chargers; ++i) {
      const double q = allocation.sent[j][i];
      if (q <= kActiveTrade) continue;
      const double price = 0.5 * (allocation.eta * bids[i] + asks[j][i]);
      const double value = price * q;
      s.trades.push_back({j, i, q, price});
      s.charger_payments[i] += value;
      s.discharger_receipts[j] += value;
    }
  }
  // Every trade moves the same amount in and out.
  s.auctioneer_surplus = 0.0;
  return s;
}

}  // namespace

AuctionResult run_iterative_auction(std::span<const ChargingEv> chargers,
                                    std::span<const DischargingEv> dischargers,
                                    double eta, const AuctionOptions& options) {
  validate_market(chargers, dischargers, eta);
  require_strict_costs(dischargers);
  if (!(options.eps > 0.0)) throw InputError("auction eps must be positive");
  if (options.max_iter < 1) throw InputError("auction max_iter must be >= 1");

  const std::size_t n_c = chargers.size();
  const std::size_t n_d = dischargers.size();

  AuctionResult result;
  result.chargers.assign(chargers.begin(), chargers.end());
  result.dischargers.assign(dischargers.begin(), dischargers.end());
  result.eta = eta;
  result.options = options;

  // Opening allocation: every discharger splits its capacity evenly.
  std::vector<std::vector<double>> sent = zeros(n_d, n_c);
  for (std::size_t j = 0; j < n_d; ++j) {
    for (std::size_t i = 0; i < n_c; ++i) {
      sent[j][i] = dischargers[j].max_supply / static_cast<double>(n_c);
    }
  }

  std::vector<ChargerReport> charger_reports(n_c);
  std::vector<double> bids(n_c);
  std::vector<std::vector<double>> asks = zeros(n_d, n_c);
  auto report = [&](const std::vector<std::vector<double>>& d) {
    for (std::size_t i = 0; i < n_c; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < n_d; ++j) s += d[j][i];
      charger_reports[i] = charger_report(chargers[i], eta * s);
      bids[i] = charger_reports[i].price;
    }
    for (std::size_t j = 0; j < n_d; ++j) {
      for (std::size_t i = 0; i < n_c; ++i) {
        asks[j][i] =
            2.0 * dischargers[j].quad_cost * d[j][i] + dischargers[j].linear_cost;
      }
    }
  };

  // Step 1: opening reports.
  report(sent);
  std::vector<double> duals;
  for (const ChargerReport& r : charger_reports) duals.push_back(r.price);

  for (int iter = 0; iter < options.max_iter; ++iter) {
    // Step 2: allocate against the reported linear marginal prices. The
    // discharger slope report 2*l1 makes its model exact; chargers are
    // modeled by their price and slope at the last allocation.
    detail::TransportProblem p;
    p.eta = eta;
    p.columns = n_c;
    for (std::size_t j = 0; j < n_d; ++j) {
      const double slope = 2.0 * dischargers[j].quad_cost;
      p.capacity.push_back(dischargers[j].max_supply);
      p.quad.push_back(0.5 * slope);
      std::vector<double> gain(n_c);
      for (std::size_t i = 0; i < n_c; ++i) {
        gain[i] = -(asks[j][i] - slope * sent[j][i]);
      }
      p.gain.push_back(std::move(gain));
    }
    const std::vector<ChargerReport> models = charger_reports;
    p.response = [&chargers, models](std::size_t i, double lambda) {
      const ChargerReport& m = models[i];
      return clamp_demand(chargers[i], m.at + (m.price - lambda) / m.curvature);
    };
    detail::TransportSolution sol =
        detail::solve_transport(p, duals, kSolverTolerance, kSolverSweeps);
    duals = sol.prices;
    sent = std::move(sol.sent);

    // Steps 3-5: agents re-derive their prices; the auctioneer compares.
    const std::vector<double> old_bids = bids;
    const std::vector<std::vector<double>> old_asks = asks;
    report(sent);
    double change = 0.0;
    for (std::size_t i = 0; i < n_c; ++i) {
      change = std::max(change, std::abs(bids[i] - old_bids[i]));
    }
    for (std::size_t j = 0; j < n_d; ++j) {
      for (std::size_t i = 0; i < n_c; ++i) {
        change = std::max(change, std::abs(asks[j][i] - old_asks[j][i]));
      }
    }
    AuctionIteration record;
    record.bids = bids;
    record.asks = asks;
    record.max_price_change = change;
    record.welfare = social_welfare(
        chargers, dischargers, EvAllocation::from_sent(sent, n_c, eta));
    result.trace.iterations.push_back(std::move(record));
    // Step 6.
    if (change < options.eps) {
      result.trace.converged = true;
      break;
    }
  }

  result.allocation = EvAllocation::from_sent(sent, n_c, eta);
  result.welfare = result.trace.iterations.back().welfare;
  for (std::size_t i = 0; i < n_c; ++i) result.chargers[i].bid_price = bids[i];
  for (std::size_t j = 0; j < n_d; ++j) {
    const double total = result.allocation.sent_by(j);
    double weighted = 0.0;
    for (std::size_t i = 0; i < n_c; ++i) weighted += asks[j][i] * sent[j][i];
    result.dischargers[j].ask_price =
        total > 0.0 ? weighted / total : dischargers[j].linear_cost;
  }
  result.settlement = settle(bids, asks, result.allocation, n_c);
  return result;
}

DisconnectionResult apply_disconnection(const AuctionResult& prior,
                                        const std::string& agent_id,
                                        double penalty_rate) {
  if (!(penalty_rate >= 0.0)) {
    throw InputError("penalty rate must be non-negative");
  }
  std::vector<ChargingEv> chargers;
  std::vector<DischargingEv> dischargers;
  double committed = 0.0;
  bool found = false;
  for (std::size_t i = 0; i < prior.chargers.size(); ++i) {
    if (prior.chargers[i].id == agent_id) {
      committed = prior.allocation.sent_toward(i);
      found = true;
    } else {
      chargers.push_back(prior.chargers[i]);
    }
  }
  for (std::size_t j = 0; j < prior.dischargers.size(); ++j) {
    if (prior.dischargers[j].id == agent_id) {
      committed = prior.allocation.sent_by(j);
      found = true;
    } else {
      dischargers.push_back(prior.dischargers[j]);
    }
  }
  if (!found) {
    throw InputError("agent '" + agent_id + "' did not take part in the auction");
  }
  DisconnectionResult out;
  out.departed_id = agent_id;
  out.committed_quantity = committed;
  out.penalty = penalty_rate * committed;
  if (chargers.empty() || dischargers.empty()) {
    // One side is gone; nothing left to trade.
    AuctionResult& r = out.restarted;
    r.chargers = std::move(chargers);
    r.dischargers = std::move(dischargers);
    r.eta = prior.eta;
    r.options = prior.options;
    r.allocation = EvAllocation::from_sent(
        std::vector<std::vector<double>>(r.dischargers.size(),
                                         std::vector<double>(r.chargers.size())),
        r.chargers.size(), prior.eta);
    r.trace.converged = true;
    r.settlement.charger_payments.assign(r.chargers.size(), 0.0);
    r.settlement.discharger_receipts.assign(r.dischargers.size(), 0.0);
    return out;
  }
  out.restarted =
      run_iterative_auction(chargers, dischargers, prior.eta, prior.options);
  return out;
}

HybridSettlement settle_hybrid(const AuctionResult& p2p, const GridPrices& grid) {
  HybridSettlement out;
  out.charger_costs.assign(p2p.chargers.size(), 0.0);
  out.discharger_revenues.assign(p2p.dischargers.size(), 0.0);
  if (p2p.trace.iterations.empty()) return out;
  const auto& asks = p2p.trace.iterations.back().asks;
  for (const PairTrade& t : p2p.settlement.trades) {
    const bool local = grid.sell_out >= asks[t.discharger][t.charger] &&
                       grid.buy_back <= t.price;
    out.charger_costs[t.charger] += t.sent * (local ? t.price : grid.sell_out);
    out.discharger_revenues[t.discharger] += t.sent * (local ? t.price : grid.buy_back);
    (local ? out.local_sent : out.grid_sent) += t.sent;
  }
  return out;
}

std::vector<HybridComparison> compare_hybrid(
    std::span<const ChargingEv> chargers,
    std::span<const DischargingEv> dischargers,
    std::span<const GridPrices> points, const HybridOptions& options) {
  if (!(options.eta_hybrid > 0.0 && options.eta_hybrid <= 1.0)) {
    throw InputError("hybrid transmission efficiency must lie in (0, 1]");
  }
  const AuctionResult p2p = run_iterative_auction(
      chargers, dischargers, options.eta_p2p, options.auction);
  double traded = 0.0;
  double paid = 0.0;
  for (const PairTrade& t : p2p.settlement.trades) {
    traded += t.sent;
    paid += t.sent * t.price;
  }
  const double delivered = p2p.allocation.total_delivered();

  std::vector<HybridComparison> out;
  for (const GridPrices& g : points) {
    HybridComparison row;
    row.grid = g;
    row.delivered = delivered;
    row.p2p_avg_buy = traded > 0.0 ? paid / traded : 0.0;
    row.p2p_avg_sell = row.p2p_avg_buy;
    row.p2p_transmitted = delivered / options.eta_p2p;
    row.hybrid_transmitted = delivered / options.eta_hybrid;
    const HybridSettlement h = settle_hybrid(p2p, g);
    double buy_cost = 0.0;
    double sell_revenue = 0.0;
    for (double c : h.charger_costs) buy_cost += c;
    for (double r : h.discharger_revenues) sell_revenue += r;
    const double via_grid = h.grid_sent;
    row.hybrid_avg_buy = traded > 0.0 ? buy_cost / traded : 0.0;
    row.hybrid_avg_sell = traded > 0.0 ? sell_revenue / traded : 0.0;
    row.hybrid_grid_share = traded > 0.0 ? via_grid / traded : 0.0;
    out.push_back(row);
  }
  return out;
}

}  // namespace gridswap::ev
