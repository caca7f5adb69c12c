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

#include <algorithm>
#include <cmath>

#include "gridswap/csv.h"

namespace gridswap::game {

FiniteGame::FiniteGame(std::vector<std::size_t> strategy_counts)
    : counts_(std::move(strategy_counts)) {
  if (counts_.empty()) throw InputError("a game needs at least one player");
  for (std::size_t c : counts_) {
    if (c == 0) throw InputError("every player needs at least one strategy");
    if (profiles_ > kMaxProfiles / c) {
      throw SizeError("game exceeds " + std::to_string(kMaxProfiles) +
                      " joint profiles");
    }
    profiles_ *= c;
  }
  stride_.assign(counts_.size(), 1);
  for (std::size_t n = counts_.size() - 1; n > 0; --n) {
    stride_[n - 1] = stride_[n] * counts_[n];
  }
  utility_.assign(counts_.size(), std::vector<double>(profiles_, 0.0));
}

std::size_t FiniteGame::index(std::span<const std::size_t> profile) const {
  if (profile.size() != counts_.size()) {
    throw InputError("profile has " + std::to_string(profile.size()) +
                     " strategies for " + std::to_string(counts_.size()) + " players");
  }
  std::size_t idx = 0;
  for (std::size_t n = 0; n < counts_.size(); ++n) {
    if (profile[n] >= counts_[n]) {
      throw InputError("player " + std::to_string(n) + " has no strategy " +
                       std::to_string(profile[n]));
    }
    idx += profile[n] * stride_[n];
  }
  return idx;
}

Profile FiniteGame::profile_at(std::size_t index) const {
  Profile p(counts_.size());
  for (std::size_t n = 0; n < counts_.size(); ++n) {
    p[n] = index / stride_[n] % counts_[n];
  }
  return p;
}

double FiniteGame::utility(std::size_t player, std::span<const std::size_t> profile) const {
  return utility_.at(player)[index(profile)];
}

void FiniteGame::set_utility(std::size_t player, std::span<const std::size_t> profile,
                             double value) {
  if (!std::isfinite(value)) throw InputError("utilities must be finite");
  utility_.at(player)[index(profile)] = value;
}

NashCheck is_nash(const FiniteGame& game, std::span<const std::size_t> profile) {
  const std::size_t base = game.index(profile);
  NashCheck out;
  for (std::size_t n = 0; n < game.players(); ++n) {
    const auto u = game.utilities(n);
    const double here = u[base];
    Profile alt(profile.begin(), profile.end());
    for (std::size_t s = 0; s < game.strategies(n); ++s) {
      if (s == profile[n]) continue;
      alt[n] = s;
      const double gain = u[game.index(alt)] - here;
      if (gain > 0.0 && (!out.best_deviation || gain > out.best_deviation->gain)) {
        out.is_nash = false;
        out.best_deviation = Improvement{n, s, gain};
      }
    }
  }
  return out;
}

std::vector<Profile> find_pure_nash(const FiniteGame& game) {
  std::vector<Profile> out;
  for (std::size_t i = 0; i < game.profile_count(); ++i) {
    Profile p = game.profile_at(i);
    if (is_nash(game, p).is_nash) out.push_back(std::move(p));
  }
  return out;
}

BestResponseResult best_response_iteration(const FiniteGame& game, Profile initial,
                                           int max_rounds) {
  if (max_rounds < 1) throw InputError("max_rounds must be at least 1");
  game.index(initial);  // validates
  BestResponseResult out;
  out.profile = std::move(initial);
  Profile& p = out.profile;
  for (int round = 1; round <= max_rounds; ++round) {
    out.rounds = round;
    bool changed = false;
    for (std::size_t n = 0; n < game.players(); ++n) {
      const auto u = game.utilities(n);
      const std::size_t current = p[n];
      double best = u[game.index(p)];
      std::size_t choice = current;
      for (std::size_t s = 0; s < game.strategies(n); ++s) {
        p[n] = s;
        const double v = u[game.index(p)];
        // Strict improvement only; the ascending scan keeps the lowest index.
        if (v > best) {
          best = v;
          choice = s;
        }
      }
      p[n] = choice;
      changed = changed || choice != current;
    }
    if (!changed) {
      out.converged = true;
      return out;
    }
  }
  return out;
}

FiniteGame random_game(Rng& rng, std::vector<std::size_t> strategy_counts) {
  FiniteGame g(std::move(strategy_counts));
  for (std::size_t n = 0; n < g.players(); ++n) {
    for (double& x : g.utilities(n)) x = rng.uniform();
  }
  return g;
}

FiniteGame parse_game_csv(std::string_view text) {
  const csv::Table t = csv::parse(text, "game");
  if (t.header.size() % 2 != 0 || t.header.empty()) {
    throw SchemaError("game: header must list s0..s{N-1} then u0..u{N-1}");
  }
  const std::size_t n = t.header.size() / 2;
  for (std::size_t k = 0; k < n; ++k) {
    t.column("s" + std::to_string(k));
    t.column("u" + std::to_string(k));
  }
  std::vector<Profile> profiles;
  std::vector<std::size_t> counts(n, 0);
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    Profile p(n);
    for (std::size_t k = 0; k < n; ++k) {
      const double v = t.number(r, t.column("s" + std::to_string(k)));
      if (v < 0.0 || v != std::floor(v) || v > 1e6) {
        throw SchemaError("game:" + std::to_string(t.lines[r]) +
                          ": strategy index must be a non-negative integer");
      }
      p[k] = static_cast<std::size_t>(v);
      counts[k] = std::max(counts[k], p[k] + 1);
    }
    profiles.push_back(std::move(p));
  }
  if (profiles.empty()) throw SchemaError("game: no profiles");
  FiniteGame g(counts);
  if (profiles.size() != g.profile_count()) {
    throw SchemaError("game: expected " + std::to_string(g.profile_count()) +
                      " profile rows, found " + std::to_string(profiles.size()));
  }
  std::vector<bool> seen(g.profile_count(), false);
  for (std::size_t r = 0; r < profiles.size(); ++r) {
    const std::size_t idx = g.index(profiles[r]);
    if (seen[idx]) {
      throw SchemaError("game:" + std::to_string(t.lines[r]) + ": duplicate profile");
    }
    seen[idx] = true;
    for (std::size_t k = 0; k < n; ++k) {
      g.utilities(k)[idx] = t.number(r, t.column("u" + std::to_string(k)));
    }
  }
  return g;
}

std::string game_to_csv(const FiniteGame& game) {
  std::string out;
  for (std::size_t k = 0; k < game.players(); ++k) out += (k ? ",s" : "s") + std::to_string(k);
  for (std::size_t k = 0; k < game.players(); ++k) out += ",u" + std::to_string(k);
  out += '\n';
  for (std::size_t i = 0; i < game.profile_count(); ++i) {
    const Profile p = game.profile_at(i);
    for (std::size_t k = 0; k < p.size(); ++k) out += (k ? "," : "") + std::to_string(p[k]);
    for (std::size_t k = 0; k < game.players(); ++k) {
      out += "," + csv::format(game.utilities(k)[i]);
    }
    out += '\n';
  }
  return out;
}

}  // namespace gridswap::game
