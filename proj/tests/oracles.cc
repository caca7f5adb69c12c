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

#include "oracles.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace gridswap::oracle {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct PairSearch {
  std::vector<std::pair<int, int>> pairs;
  std::vector<int> buy_left;
  std::vector<int> sell_left;
  std::vector<double> gain;
  double best = 0.0;

  void run(std::size_t k, double total) {
    best = std::max(best, total);
    if (k == pairs.size()) return;
    const auto [b, s] = pairs[k];
    const int cap = std::min(buy_left[b], sell_left[s]);
    for (int t = cap; t >= 0; --t) {
      buy_left[b] -= t;
      sell_left[s] -= t;
      run(k + 1, total + t * gain[k]);
      buy_left[b] += t;
      sell_left[s] += t;
    }
  }
};

}  // namespace

double max_crossing_surplus(std::span<const market::Order> buys,
                            std::span<const market::Order> sells, double unit) {
  PairSearch search;
  for (const auto& o : buys) {
    search.buy_left.push_back(static_cast<int>(std::lround(o.quantity / unit)));
  }
  for (const auto& o : sells) {
    search.sell_left.push_back(static_cast<int>(std::lround(o.quantity / unit)));
  }
  for (std::size_t b = 0; b < buys.size(); ++b) {
    for (std::size_t s = 0; s < sells.size(); ++s) {
      if (buys[b].limit_price >= sells[s].limit_price) {
        search.pairs.emplace_back(static_cast<int>(b), static_cast<int>(s));
        search.gain.push_back(buys[b].limit_price - sells[s].limit_price);
      }
    }
  }
  search.run(0, 0);
  return search.best * unit;
}

double max_crossing_volume(std::span<const market::Order> buys,
                           std::span<const market::Order> sells, double unit) {
  // Unit gain on every crossing pair turns the surplus search into a
  // volume search.
  PairSearch search;
  for (const auto& o : buys) {
    search.buy_left.push_back(static_cast<int>(std::lround(o.quantity / unit)));
  }
  for (const auto& o : sells) {
    search.sell_left.push_back(static_cast<int>(std::lround(o.quantity / unit)));
  }
  for (std::size_t b = 0; b < buys.size(); ++b) {
    for (std::size_t s = 0; s < sells.size(); ++s) {
      if (buys[b].limit_price >= sells[s].limit_price) {
        search.pairs.emplace_back(static_cast<int>(b), static_cast<int>(s));
        search.gain.push_back(1.0);
      }
    }
  }
  search.run(0, 0);
  return search.best * unit;
}

double max_uniform_price_volume(std::span<const market::Order> buys,
                                std::span<const market::Order> sells) {
  double best = 0.0;
  auto consider = [&](double p) {
    double demand = 0.0;
    double supply = 0.0;
    for (const auto& o : buys) {
      if (o.limit_price >= p) demand += o.quantity;
    }
    for (const auto& o : sells) {
      if (o.limit_price <= p) supply += o.quantity;
    }
    best = std::max(best, std::min(demand, supply));
  };
  for (const auto& o : buys) consider(o.limit_price);
  for (const auto& o : sells) consider(o.limit_price);
  return best;
}

Book random_book(Rng& rng, int max_orders) {
  Book book;
  const int n = static_cast<int>(rng.between(0, max_orders));
  for (int k = 0; k < n; ++k) {
    market::Order o;
    o.side = rng.uniform() < 0.5 ? market::Side::kBuy : market::Side::kSell;
    // A small id alphabet produces equal-id ties on purpose.
    o.agent_id = std::string(1, static_cast<char>('a' + rng.below(4)));
    o.quantity = 0.5 * static_cast<double>(rng.between(1, 5));
    o.limit_price = 0.01 * static_cast<double>(rng.between(5, 30));
    o.slot = 3;
    (o.side == market::Side::kBuy ? book.buys : book.sells).push_back(o);
  }
  return book;
}

double single_pair_optimum(double w, double l1, double l2) {
  auto f = [&](double d) { return w / (d + 1.0) - 2.0 * l1 * d - l2; };
  if (f(0.0) <= 0.0) return 0.0;
  double lo = 0.0;
  double hi = 1.0;
  while (f(hi) > 0.0) hi *= 2.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

GridOptimum grid_welfare_2x2(std::span<const ev::ChargingEv> chargers,
                             std::span<const ev::DischargingEv> dischargers,
                             double eta, double step) {
  const double cap0 = dischargers[0].max_supply;
  const double cap1 = dischargers[1].max_supply;
  const int n1 = static_cast<int>(std::floor(cap0 / step + 1e-9));
  const int n2 = static_cast<int>(std::floor(cap1 / step + 1e-9));
  const double frac0 = cap0 - n1 * step;
  const double frac1 = cap1 - n2 * step;
  auto pair_cost = [&](int j, double d) {
    return dischargers[j].quad_cost * d * d + dischargers[j].linear_cost * d;
  };
  auto value = [&](int i, double d0, double d1) {
    const double x = eta * (d0 + d1);
    const auto& c = chargers[i];
    if (x < c.min_demand - 1e-12 || x > c.max_demand + 1e-12) return kNegInf;
    return c.willingness * std::log(x - c.min_demand + 1.0) - pair_cost(0, d0) -
           pair_cost(1, d1);
  };
  // Candidate amounts from discharger j are the lattice points k * step plus
  // "top" points k * step + frac_j that use up the capacity left over by the
  // other charger. f[tu][tv][k][l] is charger 1's value at such a point.
  using Table = std::vector<std::vector<double>>;
  auto table = [&] { return Table(n1 + 1, std::vector<double>(n2 + 1, kNegInf)); };
  Table f[2][2] = {{table(), table()}, {table(), table()}};
  for (int tu = 0; tu < 2; ++tu) {
    for (int tv = 0; tv < 2; ++tv) {
      for (int k = 0; k <= n1; ++k) {
        for (int l = 0; l <= n2; ++l) {
          f[tu][tv][k][l] = value(1, k * step + tu * frac0, l * step + tv * frac1);
        }
      }
    }
  }
  // Prefix maxima over the lattice coordinates.
  Table both = f[0][0];
  Table row_top = f[1][0];  // u on top at k, v lattice l' <= l
  Table col_top = f[0][1];  // u lattice k' <= k, v on top at l
  for (int k = 0; k <= n1; ++k) {
    for (int l = 0; l <= n2; ++l) {
      if (k > 0) both[k][l] = std::max(both[k][l], both[k - 1][l]);
      if (l > 0) both[k][l] = std::max(both[k][l], both[k][l - 1]);
      if (l > 0) row_top[k][l] = std::max(row_top[k][l], row_top[k][l - 1]);
      if (k > 0) col_top[k][l] = std::max(col_top[k][l], col_top[k - 1][l]);
    }
  }
  auto rest = [&](int m1, int m2, bool top0, bool top1) {
    double v = both[m1][m2];
    if (top0) v = std::max(v, row_top[m1][m2]);
    if (top1) v = std::max(v, col_top[m1][m2]);
    if (top0 && top1) v = std::max(v, f[1][1][m1][m2]);
    return v;
  };
  double best = kNegInf;
  double d00 = 0.0;
  double d10 = 0.0;
  for (int a = 0; a <= n1; ++a) {
    for (int ta = 0; ta < (a == n1 ? 2 : 1); ++ta) {
      for (int b = 0; b <= n2; ++b) {
        for (int tb = 0; tb < (b == n2 ? 2 : 1); ++tb) {
          const double v = value(0, a * step + ta * frac0, b * step + tb * frac1);
          if (v == kNegInf) continue;
          // After charger 0 takes a top point, nothing is left to top up.
          const double r = rest(n1 - a, n2 - b, ta == 0, tb == 0);
          if (r == kNegInf) continue;
          if (v + r > best) {
            best = v + r;
            d00 = a * step + ta * frac0;
            d10 = b * step + tb * frac1;
          }
        }
      }
    }
  }
  GridOptimum out;
  out.welfare = best;
  if (best == kNegInf) return out;
  // Recover charger 1's point by scanning its candidates directly.
  out.sent = {{d00, 0.0}, {d10, 0.0}};
  double best1 = kNegInf;
  const double r0 = cap0 - d00;
  const double r1 = cap1 - d10;
  std::vector<double> u_opts;
  std::vector<double> v_opts;
  for (int k = 0; k * step <= r0 + 1e-9; ++k) u_opts.push_back(std::min(k * step, r0));
  for (int l = 0; l * step <= r1 + 1e-9; ++l) v_opts.push_back(std::min(l * step, r1));
  u_opts.push_back(r0);
  v_opts.push_back(r1);
  for (double u : u_opts) {
    for (double v : v_opts) {
      const double val = value(1, u, v);
      if (val > best1) {
        best1 = val;
        out.sent[0][1] = u;
        out.sent[1][1] = v;
      }
    }
  }
  return out;
}

GridOptimum refined_welfare_2x2(std::span<const ev::ChargingEv> chargers,
                                std::span<const ev::DischargingEv> dischargers,
                                double eta, double step, int levels) {
  GridOptimum best = grid_welfare_2x2(chargers, dischargers, eta, step);
  if (best.welfare == kNegInf) return best;
  auto welfare = [&](const std::vector<std::vector<double>>& sent) {
    for (std::size_t j = 0; j < 2; ++j) {
      double used = 0.0;
      for (std::size_t i = 0; i < 2; ++i) {
        if (sent[j][i] < 0.0) return kNegInf;
        used += sent[j][i];
      }
      if (used > dischargers[j].max_supply + 1e-12) return kNegInf;
    }
    double total = 0.0;
    for (std::size_t i = 0; i < 2; ++i) {
      const double x = eta * (sent[0][i] + sent[1][i]);
      const auto& c = chargers[i];
      if (x < c.min_demand - 1e-12 || x > c.max_demand + 1e-12) return kNegInf;
      total += c.willingness * std::log(x - c.min_demand + 1.0);
    }
    for (std::size_t j = 0; j < 2; ++j) {
      for (std::size_t i = 0; i < 2; ++i) {
        const double d = sent[j][i];
        total -= dischargers[j].quad_cost * d * d + dischargers[j].linear_cost * d;
      }
    }
    return total;
  };
  // Each level scans a window of +-2 coarse steps at a ten times finer step
  // around the incumbent, in all four coordinates.
  constexpr int kHalf = 20;
  for (int level = 0; level < levels; ++level) {
    const double fine = step / 10.0;
    const auto center = best.sent;
    auto trial = center;
    for (int a = -kHalf; a <= kHalf; ++a) {
      trial[0][0] = center[0][0] + a * fine;
      for (int b = -kHalf; b <= kHalf; ++b) {
        trial[1][0] = center[1][0] + b * fine;
        for (int c = -kHalf; c <= kHalf; ++c) {
          trial[0][1] = center[0][1] + c * fine;
          for (int d = -kHalf; d <= kHalf; ++d) {
            trial[1][1] = center[1][1] + d * fine;
            const double w = welfare(trial);
            if (w > best.welfare) {
              best.welfare = w;
              best.sent = trial;
            }
          }
        }
      }
    }
    step = fine;
  }
  return best;
}

EvInstance random_ev_instance(Rng& rng, std::size_t chargers,
                              std::size_t dischargers) {
  for (;;) {
    EvInstance inst;
    double min_total = 0.0;
    double supply = 0.0;
    for (std::size_t i = 0; i < chargers; ++i) {
      ev::ChargingEv c;
      c.id = "cv" + std::to_string(i);
      c.willingness = rng.uniform(1.0, 3.0);
      c.min_demand = rng.uniform(5.0, 10.0);
      c.max_demand = rng.uniform(12.0, 18.0);
      min_total += c.min_demand;
      inst.chargers.push_back(c);
    }
    for (std::size_t j = 0; j < dischargers; ++j) {
      ev::DischargingEv d;
      d.id = "dv" + std::to_string(j);
      d.quad_cost = rng.uniform(0.005, 0.02);
      d.linear_cost = rng.uniform(0.01, 0.05);
      d.max_supply = rng.uniform(10.0, 20.0);
      supply += d.max_supply;
      inst.dischargers.push_back(d);
    }
    // Redraw until the 90% efficient station can meet every minimum.
    if (0.9 * supply >= min_total) return inst;
  }
}

std::vector<double> shapley_by_orderings(
    const coalition::CoalitionInstance& instance) {
  const std::size_t n = instance.customers.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::vector<double> total(n, 0.0);
  double orderings = 0.0;
  auto value = [&](std::size_t count) {
    double surplus = 0.0;
    double deficit = 0.0;
    for (std::size_t k = 0; k < count; ++k) {
      const double e = instance.customers[order[k]].net_energy;
      (e >= 0.0 ? surplus : deficit) += std::abs(e);
    }
    return surplus >= deficit ? instance.tariff.wholesale * (surplus - deficit)
                              : -instance.tariff.retail * (deficit - surplus);
  };
  do {
    orderings += 1.0;
    for (std::size_t k = 0; k < n; ++k) {
      total[order[k]] += value(k + 1) - value(k);
    }
  } while (std::next_permutation(order.begin(), order.end()));
  for (double& x : total) x /= orderings;
  return total;
}

double share_by_grid(const storage::ResidentialUnit& ru, double price, double step) {
  double best_a = 0.0;
  double best_u = 0.0;
  const long long n = static_cast<long long>(std::floor(ru.capacity / step));
  for (long long k = 0; k <= n; ++k) {
    const double a = k * step;
    const double u = (price - ru.reservation_price) * a - 0.5 * ru.reluctance * a * a;
    if (u > best_u) {
      best_u = u;
      best_a = a;
    }
  }
  return best_a;
}

double storage_price_scan(std::span<const storage::ResidentialUnit> rus,
                          double requirement, double mean_bid, double floor,
                          double ceiling, double step) {
  double best_p = floor;
  double best_j = -std::numeric_limits<double>::infinity();
  const long long n = static_cast<long long>(std::floor((ceiling - floor) / step + 1e-9));
  for (long long k = 0; k <= n; ++k) {
    const double p = floor + k * step;
    double supply = 0.0;
    for (const auto& ru : rus) {
      // Stationary point of the follower's concave quadratic, clamped.
      double a = (p - ru.reservation_price) / ru.reluctance;
      a = a < 0.0 ? 0.0 : (a > ru.capacity ? ru.capacity : a);
      supply += a;
    }
    const double j = (mean_bid - p) * (supply < requirement ? supply : requirement);
    if (j > best_j) {
      best_j = j;
      best_p = p;
    }
  }
  return best_p;
}

std::vector<game::Profile> pure_nash_by_best_values(const game::FiniteGame& g) {
  std::vector<game::Profile> out;
  game::Profile p(g.players(), 0);
  for (;;) {
    bool stable = true;
    for (std::size_t n = 0; n < g.players() && stable; ++n) {
      game::Profile q = p;
      double best = -std::numeric_limits<double>::infinity();
      for (std::size_t s = 0; s < g.strategies(n); ++s) {
        q[n] = s;
        best = std::max(best, g.utility(n, q));
      }
      stable = g.utility(n, p) >= best;
    }
    if (stable) out.push_back(p);
    // Last player is the fastest digit, giving lexicographic order.
    std::size_t k = g.players();
    while (k > 0 && ++p[k - 1] == g.strategies(k - 1)) p[--k] = 0;
    if (k == 0) break;
  }
  return out;
}

}  // namespace gridswap::oracle
