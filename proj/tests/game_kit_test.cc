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

#include "gridswap/game_kit.h"

#include <cmath>

#include "gridswap/storage.h"
#include "gtest/gtest.h"
#include "oracles.h"

namespace gridswap::game {
namespace {

// Two-player game from row-major payoff pairs.
FiniteGame bimatrix(std::size_t rows, std::size_t cols, std::vector<double> u0,
                    std::vector<double> u1) {
  FiniteGame g({rows, cols});
  for (std::size_t i = 0; i < rows * cols; ++i) {
    g.utilities(0)[i] = u0[i];
    g.utilities(1)[i] = u1[i];
  }
  return g;
}

// 0 = cooperate, 1 = defect.
FiniteGame prisoners_dilemma() { return bimatrix(2, 2, {3, 0, 5, 1}, {3, 5, 0, 1}); }
FiniteGame matching_pennies() { return bimatrix(2, 2, {1, -1, -1, 1}, {-1, 1, 1, -1}); }
FiniteGame coordination() { return bimatrix(2, 2, {2, 0, 0, 1}, {2, 0, 0, 1}); }

TEST(IsNash, ClassicGames) {
  const FiniteGame pd = prisoners_dilemma();
  EXPECT_TRUE(is_nash(pd, Profile{1, 1}).is_nash);
  NashCheck cc = is_nash(pd, Profile{0, 0});
  ASSERT_FALSE(cc.is_nash);
  EXPECT_EQ(cc.best_deviation->player, 0u);
  EXPECT_EQ(cc.best_deviation->strategy, 1u);
  EXPECT_DOUBLE_EQ(cc.best_deviation->gain, 2.0);
  const FiniteGame mp = matching_pennies();
  for (std::size_t i = 0; i < 4; ++i) EXPECT_FALSE(is_nash(mp, mp.profile_at(i)).is_nash);
  EXPECT_THROW(is_nash(pd, Profile{0}), InputError);
  EXPECT_THROW(is_nash(pd, Profile{0, 2}), InputError);
}

TEST(FindPureNash, ClassicGames) {
  EXPECT_TRUE(find_pure_nash(matching_pennies()).empty());
  EXPECT_EQ(find_pure_nash(prisoners_dilemma()), (std::vector<Profile>{{1, 1}}));
  EXPECT_EQ(find_pure_nash(coordination()), (std::vector<Profile>{{0, 0}, {1, 1}}));
}

TEST(FindPureNash, AgreesWithOracleOnRandomGames) {
  Rng rng(2026);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t players = static_cast<std::size_t>(rng.between(1, 3));
    std::vector<std::size_t> counts;
    for (std::size_t n = 0; n < players; ++n) counts.push_back(rng.between(1, 5));
    FiniteGame g = random_game(rng, counts);
    // Coarse payoffs make ties common.
    for (std::size_t n = 0; n < players; ++n) {
      for (double& x : g.utilities(n)) x = std::floor(x * 4);
    }
    const std::vector<Profile> found = find_pure_nash(g);
    EXPECT_EQ(found, oracle::pure_nash_by_best_values(g)) << "trial " << trial;
    for (std::size_t i = 0; i < g.profile_count(); ++i) {
      const Profile p = g.profile_at(i);
      const bool listed = std::find(found.begin(), found.end(), p) != found.end();
      EXPECT_EQ(is_nash(g, p).is_nash, listed);
    }
  }
}

TEST(IsNash, InvariantUnderPositiveAffineMaps) {
  Rng rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    FiniteGame g = random_game(rng, {3, 4, 2});
    FiniteGame h = g;
    const std::size_t who = rng.below(3);
    const double a = rng.uniform(0.1, 10.0);
    const double b = rng.uniform(-5.0, 5.0);
    for (double& x : h.utilities(who)) x = a * x + b;
    for (std::size_t i = 0; i < g.profile_count(); ++i) {
      EXPECT_EQ(is_nash(g, g.profile_at(i)).is_nash, is_nash(h, h.profile_at(i)).is_nash);
    }
  }
}

TEST(BestResponseIteration, FixedPointsAndCycles) {
  BestResponseResult at_nash = best_response_iteration(prisoners_dilemma(), {1, 1}, 10);
  EXPECT_TRUE(at_nash.converged);
  EXPECT_EQ(at_nash.rounds, 1);
  EXPECT_EQ(at_nash.profile, (Profile{1, 1}));

  BestResponseResult cycle = best_response_iteration(matching_pennies(), {0, 0}, 25);
  EXPECT_FALSE(cycle.converged);
  EXPECT_EQ(cycle.rounds, 25);
  EXPECT_THROW(best_response_iteration(matching_pennies(), {0, 0}, 0), InputError);
}

TEST(BestResponseIteration, ConvergedProfilesAreNash) {
  Rng rng(77);
  int converged = 0;
  for (int trial = 0; trial < 300; ++trial) {
    FiniteGame g = random_game(rng, {5, 5, 5});
    BestResponseResult r = best_response_iteration(g, {0, 0, 0}, 100);
    if (!r.converged) continue;
    ++converged;
    EXPECT_TRUE(is_nash(g, r.profile).is_nash);
  }
  EXPECT_GT(converged, 0);
}

TEST(BestResponseIteration, DiscretizedFollowerSubgame) {
  const storage::ResidentialUnit rus[] = {{"a", 200, 0.08, 0.002}, {"b", 150, 0.11, 0.001}};
  const double price = 0.21;
  const double step = 0.5;
  FiniteGame g({401, 301});
  for (std::size_t i = 0; i < g.profile_count(); ++i) {
    const Profile p = g.profile_at(i);
    for (std::size_t n = 0; n < 2; ++n) {
      g.utilities(n)[i] = storage::follower_utility(rus[n], price, p[n] * step);
    }
  }
  BestResponseResult r = best_response_iteration(g, {0, 0}, 10);
  ASSERT_TRUE(r.converged);
  for (std::size_t n = 0; n < 2; ++n) {
    EXPECT_NEAR(r.profile[n] * step, storage::follower_best_response(rus[n], price), step / 2);
  }
}

TEST(FiniteGame, SizeAndCsvRoundTrip) {
  EXPECT_THROW(FiniteGame({1000, 1001}), SizeError);
  EXPECT_THROW(FiniteGame({2, 0}), InputError);
  const FiniteGame pd = prisoners_dilemma();
  const std::string text = game_to_csv(pd);
  EXPECT_EQ(text, "s0,s1,u0,u1\n0,0,3,3\n0,1,0,5\n1,0,5,0\n1,1,1,1\n");
  const FiniteGame back = parse_game_csv(text);
  EXPECT_EQ(game_to_csv(back), text);
  EXPECT_THROW(parse_game_csv("s0,s1,u0,u1\n0,0,1,1\n1,1,2,2\n"), SchemaError);
  EXPECT_THROW(parse_game_csv("s0,s1,u0,u1\n0,0,1,1\n0,0,2,2\n"), SchemaError);
  EXPECT_THROW(parse_game_csv("s0,u0\n0,x\n"), SchemaError);
}

}  // namespace
}  // namespace gridswap::game
