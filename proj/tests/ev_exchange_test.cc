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

#include <cmath>

#include "gtest/gtest.h"
#include "oracles.h"

namespace gridswap::ev {
namespace {

ChargingEv charger(std::string id, double w, double cmin, double cmax) {
  ChargingEv c;
  c.id = std::move(id);
  c.willingness = w;
  c.min_demand = cmin;
  c.max_demand = cmax;
  return c;
}

DischargingEv discharger(std::string id, double l1, double l2, double dmax) {
  DischargingEv d;
  d.id = std::move(id);
  d.quad_cost = l1;
  d.linear_cost = l2;
  d.max_supply = dmax;
  return d;
}

// Random feasible allocation, built by sampling a transfer matrix and scaling
// it into capacity and demand bounds. Returns false when the draw misses.
bool sample_feasible(Rng& rng, const std::vector<ChargingEv>& cs,
                     const std::vector<DischargingEv>& ds, double eta,
                     EvAllocation& out) {
  std::vector<std::vector<double>> sent(ds.size(),
                                        std::vector<double>(cs.size()));
  for (std::size_t j = 0; j < ds.size(); ++j) {
    double total = 0.0;
    for (std::size_t i = 0; i < cs.size(); ++i) {
      sent[j][i] = rng.uniform();
      total += sent[j][i];
    }
    const double use = rng.uniform(0.3, 1.0) * ds[j].max_supply;
    for (auto& v : sent[j]) v *= use / total;
  }
  out = EvAllocation::from_sent(sent, cs.size(), eta);
  for (std::size_t i = 0; i < cs.size(); ++i) {
    const double x = out.delivered_to(i);
    if (x < cs[i].min_demand || x > cs[i].max_demand) return false;
  }
  return true;
}

TEST(Satisfaction, Examples) {
  EXPECT_DOUBLE_EQ(satisfaction(charger("a", 2, 5, 20), std::vector{5.0}, 1.0),
                   0.0);
  EXPECT_NEAR(satisfaction(charger("a", 1, 5, 20), std::vector{4.0, 6.0}, 0.9),
              std::log(5.0), 1e-12);
  EXPECT_THROW(satisfaction(charger("a", 1, 5, 20), std::vector{8.0}, 0.5),
               DomainError);
}

TEST(DischargeCost, Examples) {
  EXPECT_DOUBLE_EQ(discharge_cost(discharger("d", 1, 0, 10), std::vector{2.0, 3.0}),
                   13.0);
  EXPECT_DOUBLE_EQ(discharge_cost(discharger("d", 0, 1, 10), std::vector{2.0, 3.0}),
                   5.0);
  EXPECT_DOUBLE_EQ(discharge_cost(discharger("d", 1, 1, 10), std::vector{0.0, 0.0}),
                   0.0);
  EXPECT_THROW(discharge_cost(discharger("d", 1, 1, 10), std::vector{-1.0}),
               InputError);
}

TEST(SolveSocialWelfare, SinglePairMatchesStationarity) {
  std::vector cs = {charger("c", 1.0, 0.0, kUnbounded)};
  std::vector ds = {discharger("d", 0.1, 0.05, 100.0)};
  EvAllocation a = solve_social_welfare(cs, ds, 1.0);
  EXPECT_NEAR(a.sent[0][0], oracle::single_pair_optimum(1.0, 0.1, 0.05), 1e-7);
}

TEST(SolveSocialWelfare, SymmetricInstanceGivesSymmetricAllocation) {
  std::vector cs = {charger("c1", 2, 6, 15), charger("c2", 2, 6, 15)};
  std::vector ds = {discharger("d1", 0.01, 0.03, 15),
                    discharger("d2", 0.01, 0.03, 15)};
  EvAllocation a = solve_social_welfare(cs, ds, 0.9);
  EXPECT_NEAR(a.sent[0][0], a.sent[1][1], 1e-7);
  EXPECT_NEAR(a.sent[0][1], a.sent[1][0], 1e-7);
  EXPECT_NEAR(a.delivered_to(0), a.delivered_to(1), 1e-7);
}

TEST(SolveSocialWelfare, MatchesGridOracleOn2x2) {
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    oracle::EvInstance inst = oracle::random_ev_instance(rng, 2, 2);
    EvAllocation a = solve_social_welfare(inst.chargers, inst.dischargers, 0.9);
    const double w = social_welfare(inst.chargers, inst.dischargers, a);
    const double grid =
        oracle::grid_welfare_2x2(inst.chargers, inst.dischargers, 0.9, 0.1).welfare;
    const double refined =
        oracle::refined_welfare_2x2(inst.chargers, inst.dischargers, 0.9, 0.1, 2)
            .welfare;
    EXPECT_GE(w, grid - 1e-9) << "trial " << trial;
    EXPECT_NEAR(w, refined, 1e-3) << "trial " << trial;
  }
}

TEST(SolveSocialWelfare, DominatesRandomFeasibleAllocations) {
  Rng rng(5);
  for (int trial = 0; trial < 5; ++trial) {
    oracle::EvInstance inst = oracle::random_ev_instance(rng, 3, 2);
    for (auto& c : inst.chargers) c.min_demand = 0.5 * c.min_demand;
    EvAllocation a = solve_social_welfare(inst.chargers, inst.dischargers, 0.9);
    const double best = social_welfare(inst.chargers, inst.dischargers, a);
    int checked = 0;
    for (int s = 0; s < 1000; ++s) {
      EvAllocation cand;
      if (!sample_feasible(rng, inst.chargers, inst.dischargers, 0.9, cand)) continue;
      ++checked;
      EXPECT_LE(social_welfare(inst.chargers, inst.dischargers, cand), best + 1e-9);
    }
    EXPECT_GT(checked, 0);
  }
}

TEST(SolveSocialWelfare, HigherWillingnessNeverReducesDelivery) {
  Rng rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    oracle::EvInstance inst = oracle::random_ev_instance(rng, 2, 2);
    EvAllocation base = solve_social_welfare(inst.chargers, inst.dischargers, 0.9);
    inst.chargers[0].willingness *= 1.5;
    EvAllocation more = solve_social_welfare(inst.chargers, inst.dischargers, 0.9);
    EXPECT_GE(more.delivered_to(0), base.delivered_to(0) - 1e-7);
  }
}

TEST(SolveSocialWelfare, ConservesEnergyAndCapacity) {
  Rng rng(3);
  oracle::EvInstance inst = oracle::random_ev_instance(rng, 3, 3);
  EvAllocation a = solve_social_welfare(inst.chargers, inst.dischargers, 0.9);
  for (std::size_t j = 0; j < 3; ++j) {
    EXPECT_LE(a.sent_by(j), inst.dischargers[j].max_supply + 1e-9);
    for (std::size_t i = 0; i < 3; ++i) {
      EXPECT_GE(a.sent[j][i], 0.0);
      EXPECT_DOUBLE_EQ(a.received[i][j], 0.9 * a.sent[j][i]);
    }
  }
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_GE(a.delivered_to(i), inst.chargers[i].min_demand - 1e-8);
    EXPECT_LE(a.delivered_to(i), inst.chargers[i].max_demand + 1e-8);
  }
}

TEST(SolveSocialWelfare, RejectsInfeasibleAndDegenerateInputs) {
  std::vector cs = {charger("c", 1, 20, 25)};
  std::vector ds = {discharger("d", 0.01, 0.01, 10)};
  EXPECT_THROW(solve_social_welfare(cs, ds, 0.9), InfeasibleError);
  std::vector linear = {discharger("d", 0.0, 0.01, 30)};
  EXPECT_THROW(solve_social_welfare(cs, linear, 0.9), InputError);
  std::vector<ChargingEv> none;
  EXPECT_THROW(solve_social_welfare(none, ds, 0.9), InputError);
}

TEST(IterativeAuction, ConvergesToTheWelfareOptimum) {
  Rng rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    oracle::EvInstance inst = oracle::random_ev_instance(rng, 2, 2);
    AuctionOptions opt;
    AuctionResult r = run_iterative_auction(inst.chargers, inst.dischargers, 0.9, opt);
    ASSERT_TRUE(r.trace.converged) << "trial " << trial;
    EvAllocation best = solve_social_welfare(inst.chargers, inst.dischargers, 0.9);
    const double w_best = social_welfare(inst.chargers, inst.dischargers, best);
    EXPECT_LE(std::abs(r.welfare - w_best), 10 * opt.eps);
    EXPECT_GE(r.settlement.auctioneer_surplus, 0.0);
  }
}

TEST(IterativeAuction, ReportsMatchTrueMarginalsAtTheFixedPoint) {
  Rng rng(4);
  oracle::EvInstance inst = oracle::random_ev_instance(rng, 3, 2);
  AuctionOptions opt;
  AuctionResult r = run_iterative_auction(inst.chargers, inst.dischargers, 0.9, opt);
  ASSERT_TRUE(r.trace.converged);
  ASSERT_GE(r.trace.iteration_count(), 2);
  const auto& last = r.trace.iterations.back();
  const auto& before = r.trace.iterations[r.trace.iterations.size() - 2];
  for (std::size_t i = 0; i < 3; ++i) {
    const auto& c = inst.chargers[i];
    const double x = std::max(r.allocation.delivered_to(i), c.min_demand);
    const double marginal = c.willingness / (x - c.min_demand + 1.0);
    EXPECT_NEAR(last.bids[i], marginal, 1e-12);
    EXPECT_NEAR(before.bids[i], marginal, opt.eps);
  }
  for (std::size_t j = 0; j < 2; ++j) {
    for (std::size_t i = 0; i < 3; ++i) {
      const auto& d = inst.dischargers[j];
      const double marginal = 2 * d.quad_cost * r.allocation.sent[j][i] + d.linear_cost;
      EXPECT_NEAR(before.asks[j][i], marginal, opt.eps);
    }
  }
}

TEST(IterativeAuction, SymmetricAgentsGetEqualPrices) {
  std::vector cs = {charger("c1", 2, 6, 15), charger("c2", 2, 6, 15)};
  std::vector ds = {discharger("d1", 0.01, 0.03, 15),
                    discharger("d2", 0.01, 0.03, 15)};
  AuctionResult r = run_iterative_auction(cs, ds, 0.9, {});
  ASSERT_TRUE(r.trace.converged);
  EXPECT_NEAR(r.chargers[0].bid_price, r.chargers[1].bid_price, 1e-9);
  EXPECT_NEAR(r.dischargers[0].ask_price, r.dischargers[1].ask_price, 1e-9);
}

TEST(IterativeAuction, IterationCapFlagsNonConvergence) {
  Rng rng(2);
  oracle::EvInstance inst = oracle::random_ev_instance(rng, 2, 2);
  AuctionOptions opt;
  opt.eps = 1e-4;
  opt.max_iter = 1;
  AuctionResult r = run_iterative_auction(inst.chargers, inst.dischargers, 0.9, opt);
  EXPECT_FALSE(r.trace.converged);
  EXPECT_EQ(r.trace.iteration_count(), 1);
}

TEST(IterativeAuction, PaymentsAreIndividuallyRationalAndBalanced) {
  Rng rng(17);
  for (int trial = 0; trial < 10; ++trial) {
    oracle::EvInstance inst = oracle::random_ev_instance(rng, 2, 3);
    AuctionResult r = run_iterative_auction(inst.chargers, inst.dischargers, 0.9, {});
    ASSERT_TRUE(r.trace.converged);
    double paid = 0.0;
    double received = 0.0;
    for (double p : r.settlement.charger_payments) paid += p;
    for (double p : r.settlement.discharger_receipts) received += p;
    EXPECT_GE(paid - received, -1e-9);
    const auto& asks = r.trace.iterations.back().asks;
    for (const PairTrade& t : r.settlement.trades) {
      EXPECT_GE(t.price, asks[t.discharger][t.charger] - 1e-9);
      // Chargers held at their minimum demand may value the marginal kWh
      // below its price; everyone else pays at most their marginal value.
      if (r.allocation.delivered_to(t.charger) >
          inst.chargers[t.charger].min_demand + 1e-6) {
        EXPECT_LE(t.price, 0.9 * r.chargers[t.charger].bid_price + 1e-9);
      }
    }
  }
}

TEST(Disconnection, PenaltyAndRestart) {
  Rng rng(9);
  oracle::EvInstance inst = oracle::random_ev_instance(rng, 2, 2);
  AuctionResult prior = run_iterative_auction(inst.chargers, inst.dischargers, 0.9, {});
  DisconnectionResult d = apply_disconnection(prior, "dv1", 0.02);
  EXPECT_NEAR(d.penalty, 0.02 * prior.allocation.sent_by(1), 1e-12);

  std::vector<DischargingEv> rest = {inst.dischargers[0]};
  // Shrink minimum demands so the 2x1 market stays feasible.
  for (auto& c : inst.chargers) c.min_demand = 0.0;
  AuctionResult prior2 = run_iterative_auction(inst.chargers, inst.dischargers, 0.9, {});
  DisconnectionResult d2 = apply_disconnection(prior2, "dv1", 0.02);
  AuctionResult fresh = run_iterative_auction(inst.chargers, rest, 0.9, {});
  ASSERT_EQ(d2.restarted.allocation.sent.size(), 1u);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_DOUBLE_EQ(d2.restarted.allocation.sent[0][i], fresh.allocation.sent[0][i]);
  }
  EXPECT_EQ(d2.restarted.welfare, fresh.welfare);

  EXPECT_THROW(apply_disconnection(prior, "nobody", 0.02), InputError);
}

TEST(Disconnection, IdleAgentPaysNothing) {
  // The second discharger is far too expensive to be dispatched.
  std::vector cs = {charger("c", 1.0, 0.0, 10.0)};
  std::vector ds = {discharger("cheap", 0.01, 0.01, 20.0),
                    discharger("dear", 0.01, 5.0, 20.0)};
  AuctionResult prior = run_iterative_auction(cs, ds, 0.9, {});
  ASSERT_NEAR(prior.allocation.sent_by(1), 0.0, 1e-12);
  DisconnectionResult d = apply_disconnection(prior, "dear", 0.02);
  EXPECT_DOUBLE_EQ(d.penalty, 0.0);
  DischargingEv six = discharger("x", 0.01, 0.01, 6.0);
  std::vector one_ds = {six};
  std::vector big = {charger("c", 50.0, 0.0, 100.0)};
  AuctionResult all_in = run_iterative_auction(big, one_ds, 1.0, {});
  EXPECT_NEAR(apply_disconnection(all_in, "c", 0.02).penalty, 0.12, 1e-9);
}

TEST(CompareHybrid, GridPriceRegimes) {
  Rng rng(12);
  oracle::EvInstance inst = oracle::random_ev_instance(rng, 2, 2);
  std::vector<GridPrices> points = {{0.001, 0.0}, {10.0, 0.0}};
  auto rows = compare_hybrid(inst.chargers, inst.dischargers, points);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_NEAR(rows[0].hybrid_avg_buy, 0.001, 1e-12);
  EXPECT_LE(rows[0].hybrid_avg_buy, rows[0].p2p_avg_buy);
  EXPECT_DOUBLE_EQ(rows[1].hybrid_avg_buy, rows[1].p2p_avg_buy);
  EXPECT_DOUBLE_EQ(rows[1].hybrid_grid_share, 0.0);
  for (const auto& r : rows) {
    EXPECT_NEAR(r.p2p_transmitted / r.hybrid_transmitted, 7.0 / 9.0, 1e-9);
  }
}

}  // namespace
}  // namespace gridswap::ev
