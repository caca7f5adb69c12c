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

// Finite strategic-form games with pure strategies.

#ifndef GRIDSWAP_GAME_KIT_H_
#define GRIDSWAP_GAME_KIT_H_

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gridswap/common.h"

namespace gridswap::game {

using Profile = std::vector<std::size_t>;

// Utilities are stored densely, one tensor per player, with player 0 as the
// most significant index so flat order is lexicographic.
class FiniteGame {
 public:
  // Every player needs at least one strategy. Throws SizeError above
  // kMaxProfiles joint profiles.
  explicit FiniteGame(std::vector<std::size_t> strategy_counts);

  static constexpr std::size_t kMaxProfiles = 1'000'000;

  std::size_t players() const { return counts_.size(); }
  std::size_t strategies(std::size_t player) const { return counts_.at(player); }
  std::size_t profile_count() const { return profiles_; }

  // Throws InputError unless the profile names one valid strategy per player.
  std::size_t index(std::span<const std::size_t> profile) const;
  Profile profile_at(std::size_t index) const;

  double utility(std::size_t player, std::span<const std::size_t> profile) const;
  void set_utility(std::size_t player, std::span<const std::size_t> profile, double value);

  // Flat tensor for one player, indexed by index().
  std::span<double> utilities(std::size_t player) { return utility_.at(player); }
  std::span<const double> utilities(std::size_t player) const { return utility_.at(player); }

 private:
  std::vector<std::size_t> counts_;
  std::vector<std::size_t> stride_;
  std::size_t profiles_ = 1;
  std::vector<std::vector<double>> utility_;
};

struct Improvement {
  std::size_t player = 0;
  std::size_t strategy = 0;
  double gain = 0.0;
};

struct NashCheck {
  bool is_nash = true;
  // Largest strict gain over all players and strategies; lowest player and
  // strategy index on ties.
  std::optional<Improvement> best_deviation;
};

NashCheck is_nash(const FiniteGame& game, std::span<const std::size_t> profile);

// All pure equilibria in lexicographic order.
std::vector<Profile> find_pure_nash(const FiniteGame& game);

struct BestResponseResult {
  Profile profile;
  bool converged = false;
  int rounds = 0;
};

// Players update in turn. A player keeps its strategy while it is a best
// response and otherwise moves to the lowest-index best response. Converges
// when a full round changes nothing.
BestResponseResult best_response_iteration(const FiniteGame& game, Profile initial,
                                           int max_rounds);

// Uniform random utilities in [0, 1).
FiniteGame random_game(Rng& rng, std::vector<std::size_t> strategy_counts);

// CSV with header s0,...,s{N-1},u0,...,u{N-1} and one row per joint profile.
// Strategy counts are one more than the largest index seen in each column.
FiniteGame parse_game_csv(std::string_view text);
std::string game_to_csv(const FiniteGame& game);

}  // namespace gridswap::game

#endif  // GRIDSWAP_GAME_KIT_H_
