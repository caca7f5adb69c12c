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

#include "gridswap/storage.h"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace gridswap::storage {
namespace {

constexpr double kGainTol = 1e-9;

bool finite_nonneg(double x) { return std::isfinite(x) && x >= 0.0; }

// Burden weights: reservation prices, or all ones. Falls back to equal
// weights when every reservation price is zero.
std::vector<double> burden_weights(std::span<const ResidentialUnit> rus,
                                   BurdenRule rule) {
  std::vector<double> w(rus.size(), 1.0);
  if (rule == BurdenRule::kProportional) {
    double total = 0.0;
    for (std::size_t k = 0; k < rus.size(); ++k) {
      w[k] = rus[k].reservation_price;
      total += w[k];
    }
    if (total <= 0.0) std::fill(w.begin(), w.end(), 1.0);
  }
  return w;
}

}  // namespace

void validate(std::span<const ResidentialUnit> rus, std::span<const SfcAgent> sfcs) {
  if (rus.empty() || sfcs.empty()) {
    throw InputError("storage auction needs at least one RU and one SFC");
  }
  for (const ResidentialUnit& ru : rus) {
    if (!finite_nonneg(ru.capacity)) {
      throw InputError("RU '" + ru.id + "' needs a finite non-negative capacity");
    }
    if (!finite_nonneg(ru.reservation_price)) {
      throw InputError("RU '" + ru.id + "' needs a finite non-negative reservation price");
    }
    if (!(ru.reluctance > 0.0) || !std::isfinite(ru.reluctance)) {
      throw InputError("RU '" + ru.id + "' needs a positive reluctance");
    }
  }
  for (const SfcAgent& s : sfcs) {
    if (!(s.requirement > 0.0) || !std::isfinite(s.requirement)) {
      throw InputError("SFC '" + s.id + "' needs a positive requirement");
    }
    if (!finite_nonneg(s.bid_price)) {
      throw InputError("SFC '" + s.id + "' needs a finite non-negative bid");
    }
  }
}

Participants determine_participants(std::span<const ResidentialUnit> rus,
                                    std::span<const SfcAgent> sfcs) {
  validate(rus, sfcs);
  std::vector<double> bids;
  for (const SfcAgent& s : sfcs) bids.push_back(s.bid_price);
  std::sort(bids.begin(), bids.end(), std::greater<>());
  Participants out;
  out.vickrey_price = bids.size() > 1 ? bids[1] : bids[0];
  double lowest = 0.0;
  for (std::size_t k = 0; k < rus.size(); ++k) {
    if (rus[k].reservation_price <= out.vickrey_price) {
      lowest = out.rus.empty() ? rus[k].reservation_price
                               : std::min(lowest, rus[k].reservation_price);
      out.rus.push_back(k);
    }
  }
  if (out.rus.empty()) return out;
  for (std::size_t m = 0; m < sfcs.size(); ++m) {
    if (sfcs[m].bid_price >= lowest) out.sfcs.push_back(m);
  }
  return out;
}

double follower_best_response(const ResidentialUnit& ru, double price) {
  return std::clamp((price - ru.reservation_price) / ru.reluctance, 0.0, ru.capacity);
}

double follower_utility(const ResidentialUnit& ru, double price, double share) {
  return (price - ru.reservation_price) * share - 0.5 * ru.reluctance * share * share;
}

double total_supply(std::span<const ResidentialUnit> rus, double price) {
  double s = 0.0;
  for (const ResidentialUnit& ru : rus) s += follower_best_response(ru, price);
  return s;
}

double stackelberg_price(std::span<const ResidentialUnit> rus, double requirement,
                         double mean_bid, double floor, double ceiling,
                         double resolution) {
  if (!(floor <= ceiling) || !std::isfinite(floor) || !std::isfinite(ceiling)) {
    throw InputError("price bounds must satisfy floor <= ceiling");
  }
  if (!(requirement > 0.0)) throw InputError("total requirement must be positive");
  if (!(resolution > 0.0)) throw InputError("price resolution must be positive");
  auto objective = [&](double p) {
    return (mean_bid - p) * std::min(total_supply(rus, p), requirement);
  };
  const auto steps = static_cast<long long>(std::floor((ceiling - floor) / resolution + 1e-9));
  double best_p = floor;
  double best_j = objective(floor);
  for (long long k = 1; k <= steps; ++k) {
    const double p = floor + static_cast<double>(k) * resolution;
    const double j = objective(p);
    if (j > best_j) {
      best_j = j;
      best_p = p;
    }
  }
  if (floor + static_cast<double>(steps) * resolution < ceiling && objective(ceiling) > best_j) {
    best_p = ceiling;
  }
  return best_p;
}

ShareAllocation allocate_shares(std::span<const double> shares,
                                std::span<const ResidentialUnit> rus,
                                std::span<const SfcAgent> sfcs, BurdenRule rule) {
  if (shares.size() != rus.size()) throw InputError("one share per RU is required");
  double supply = 0.0;
  for (double a : shares) {
    if (!finite_nonneg(a)) throw InputError("shares must be finite and non-negative");
    supply += a;
  }
  double demand = 0.0;
  for (const SfcAgent& s : sfcs) {
    if (!finite_nonneg(s.requirement)) {
      throw InputError("requirements must be finite and non-negative");
    }
    demand += s.requirement;
  }

  ShareAllocation out;
  out.sfc_allocations.assign(sfcs.size(), 0.0);
  out.burden.assign(rus.size(), 0.0);

  std::vector<std::size_t> order(sfcs.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return sfcs[a].bid_price > sfcs[b].bid_price;
  });
  double left = std::min(supply, demand);
  for (std::size_t m : order) {
    const double q = std::min(left, sfcs[m].requirement);
    out.sfc_allocations[m] = q;
    left -= q;
  }

  double unsold = supply - demand;
  if (unsold <= 0.0) return out;
  const std::vector<double> weight = burden_weights(rus, rule);
  std::vector<bool> full(rus.size(), false);
  for (std::size_t k = 0; k < rus.size(); ++k) full[k] = shares[k] <= 0.0;
  // Each pass either places everything or caps at least one more unit.
  while (unsold > 0.0) {
    double w_total = 0.0;
    for (std::size_t k = 0; k < rus.size(); ++k) {
      if (!full[k]) w_total += weight[k];
    }
    if (w_total <= 0.0) {
      // Only zero-weight units have room left; share equally among them.
      for (std::size_t k = 0; k < rus.size(); ++k) if (!full[k]) w_total += 1.0;
      if (w_total <= 0.0) break;
      for (std::size_t k = 0; k < rus.size(); ++k) {
        if (!full[k] && weight[k] <= 0.0) {
          const double give = std::min(unsold / w_total, shares[k] - out.burden[k]);
          out.burden[k] += give;
        }
      }
      break;
    }
    bool capped = false;
    for (std::size_t k = 0; k < rus.size(); ++k) {
      if (full[k]) continue;
      if (out.burden[k] + unsold * weight[k] / w_total >= shares[k]) {
        capped = true;
        unsold -= shares[k] - out.burden[k];
        out.burden[k] = shares[k];
        full[k] = true;
      }
    }
    if (capped) continue;
    for (std::size_t k = 0; k < rus.size(); ++k) {
      if (!full[k]) out.burden[k] += unsold * weight[k] / w_total;
    }
    unsold = 0.0;
  }
  return out;
}

double StorageOutcome::traded() const {
  return std::accumulate(sfc_allocations.begin(), sfc_allocations.end(), 0.0);
}

double StorageOutcome::total_ru_utility() const {
  return std::accumulate(ru_utility.begin(), ru_utility.end(), 0.0);
}

StorageOutcome run_storage_auction(std::span<const ResidentialUnit> rus,
                                   std::span<const SfcAgent> sfcs, BurdenRule rule) {
  const Participants part = determine_participants(rus, sfcs);
  StorageOutcome out;
  out.vickrey_price = part.vickrey_price;
  out.shares.assign(rus.size(), 0.0);
  out.burden.assign(rus.size(), 0.0);
  out.ru_utility.assign(rus.size(), 0.0);
  out.sfc_allocations.assign(sfcs.size(), 0.0);
  out.sfc_utility.assign(sfcs.size(), 0.0);
  if (part.empty()) return out;

  std::vector<ResidentialUnit> ru_in;
  for (std::size_t k : part.rus) {
    ru_in.push_back(rus[k]);
    out.ru_participants.push_back(rus[k].id);
  }
  std::vector<SfcAgent> sfc_in;
  double requirement = 0.0;
  double weighted_bid = 0.0;
  double max_bid = 0.0;
  for (std::size_t m : part.sfcs) {
    sfc_in.push_back(sfcs[m]);
    out.sfc_participants.push_back(sfcs[m].id);
    requirement += sfcs[m].requirement;
    weighted_bid += sfcs[m].requirement * sfcs[m].bid_price;
    max_bid = std::max(max_bid, sfcs[m].bid_price);
  }
  const double mean_bid = weighted_bid / requirement;
  out.auction_price =
      stackelberg_price(ru_in, requirement, mean_bid, part.vickrey_price, max_bid);

  std::vector<double> shares;
  for (const ResidentialUnit& ru : ru_in) {
    shares.push_back(follower_best_response(ru, out.auction_price));
  }
  const ShareAllocation alloc = allocate_shares(shares, ru_in, sfc_in, rule);
  for (std::size_t n = 0; n < part.rus.size(); ++n) {
    const std::size_t k = part.rus[n];
    out.shares[k] = shares[n];
    out.burden[k] = alloc.burden[n];
    out.ru_utility[k] = follower_utility(rus[k], out.auction_price, shares[n] - alloc.burden[n]);
  }
  for (std::size_t n = 0; n < part.sfcs.size(); ++n) {
    const std::size_t m = part.sfcs[n];
    out.sfc_allocations[m] = alloc.sfc_allocations[n];
    out.sfc_utility[m] = (sfcs[m].bid_price - out.auction_price) * alloc.sfc_allocations[n];
  }
  return out;
}

StorageScenario random_scenario(Rng& rng) {
  StorageScenario sc;
  const auto n_ru = rng.between(3, 8);
  for (long long k = 0; k < n_ru; ++k) {
    ResidentialUnit ru;
    ru.id = "ru" + std::to_string(k);
    ru.capacity = 25.0 * static_cast<double>(rng.between(5, 25));
    ru.reservation_price = rng.uniform(0.05, 0.15);
    ru.reluctance = rng.uniform(5e-4, 5e-3);
    sc.rus.push_back(ru);
  }
  const auto n_sfc = rng.between(2, 5);
  for (long long m = 0; m < n_sfc; ++m) {
    SfcAgent s;
    s.id = "sfc" + std::to_string(m);
    s.requirement = rng.uniform(100.0, 500.0);
    s.bid_price = rng.uniform(0.15, 0.30);
    sc.sfcs.push_back(s);
  }
  return sc;
}

std::vector<double> default_deviation_grid() {
  std::vector<double> f;
  for (int k = 0; k <= 20; ++k) f.push_back(0.5 + 0.05 * k);
  return f;
}

IcReport check_incentive_compatibility(std::span<const StorageScenario> scenarios,
                                       std::span<const double> factors,
                                       BurdenRule rule) {
  IcReport report;
  report.scenarios = scenarios.size();
  for (std::size_t s = 0; s < scenarios.size(); ++s) {
    const StorageScenario& sc = scenarios[s];
    const StorageOutcome truth = run_storage_auction(sc.rus, sc.sfcs, rule);
    ++report.runs;
    for (std::size_t k = 0; k < sc.rus.size(); ++k) {
      if (truth.ru_utility[k] < -kGainTol) {
        report.ir_violations.push_back({s, sc.rus[k].id, truth.ru_utility[k]});
      }
    }
    for (std::size_t m = 0; m < sc.sfcs.size(); ++m) {
      if (truth.sfc_utility[m] < -kGainTol) {
        report.ir_violations.push_back({s, sc.sfcs[m].id, truth.sfc_utility[m]});
      }
    }

    for (std::size_t k = 0; k < sc.rus.size(); ++k) {
      const ResidentialUnit& real = sc.rus[k];
      for (Misreport kind : {Misreport::kReservationPrice, Misreport::kCapacity}) {
        for (double f : factors) {
          std::vector<ResidentialUnit> reported = sc.rus;
          if (kind == Misreport::kReservationPrice) {
            reported[k].reservation_price *= f;
          } else {
            reported[k].capacity *= f;
          }
          const StorageOutcome dev = run_storage_auction(reported, sc.sfcs, rule);
          ++report.runs;
          const double sold = std::min(dev.shares[k] - dev.burden[k], real.capacity);
          const double u = follower_utility(real, dev.auction_price, sold);
          Deviation d{s, real.id, kind, f, truth.ru_utility[k], u};
          if (d.gain() > kGainTol) report.profitable.push_back(d);
        }
      }
    }

    for (std::size_t m = 0; m < sc.sfcs.size(); ++m) {
      for (double f : factors) {
        if (f <= 1.0) continue;
        std::vector<SfcAgent> reported = sc.sfcs;
        reported[m].bid_price *= f;
        const StorageOutcome dev = run_storage_auction(sc.rus, reported, rule);
        ++report.runs;
        const double u = (sc.sfcs[m].bid_price - dev.auction_price) * dev.sfc_allocations[m];
        Deviation d{s, sc.sfcs[m].id, Misreport::kBid, f, truth.sfc_utility[m], u};
        if (d.gain() > kGainTol) report.profitable.push_back(d);
        if (d.gain() > kGainTol || dev.auction_price < truth.auction_price - kGainTol) {
          report.sfc_bid_anomalies.push_back(d);
        }
      }
    }
  }
  return report;
}

std::vector<double> equal_distribution_utility(std::span<const ResidentialUnit> rus,
                                               std::span<const SfcAgent> sfcs) {
  const Participants part = determine_participants(rus, sfcs);
  std::vector<double> u(rus.size(), 0.0);
  if (part.empty()) return u;
  double requirement = 0.0;
  for (std::size_t m : part.sfcs) requirement += sfcs[m].requirement;
  const double each = requirement / static_cast<double>(part.rus.size());
  for (std::size_t k : part.rus) {
    u[k] = follower_utility(rus[k], part.vickrey_price, std::min(each, rus[k].capacity));
  }
  return u;
}

std::vector<double> feed_in_utility(std::span<const ResidentialUnit> rus,
                                    double feed_in_price) {
  std::vector<double> u;
  for (const ResidentialUnit& ru : rus) {
    u.push_back(follower_utility(ru, feed_in_price, follower_best_response(ru, feed_in_price)));
  }
  return u;
}

}  // namespace gridswap::storage
