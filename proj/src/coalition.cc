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

#include "gridswap/coalition.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <numeric>

namespace gridswap::coalition {
namespace {

constexpr double kTol = 1e-9;

void require_at_most(const CoalitionInstance& instance, std::size_t limit,
                     const char* what) {
  if (instance.size() > limit) {
    throw SizeError(std::string(what) + " enumerates every coalition and is "
                    "limited to " + std::to_string(limit) + " customers (got " +
                    std::to_string(instance.size()) +
                    "); use the Monte-Carlo estimate instead");
  }
}

double log_choose(int n, int k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

}  // namespace

void validate_instance(const CoalitionInstance& instance) {
  if (instance.customers.empty()) {
    throw InputError("coalition instance has no customers");
  }
  validate_tariff(instance.tariff);
  for (const Customer& c : instance.customers) {
    if (!std::isfinite(c.net_energy)) {
      throw InputError("customer '" + c.id + "' has non-finite net energy");
    }
    if (c.role == Role::kSupplier && c.net_energy < 0.0) {
      throw InputError("supplier '" + c.id + "' has negative net energy");
    }
    if (c.role == Role::kUser && c.net_energy > 0.0) {
      throw InputError("user '" + c.id + "' has positive net energy");
    }
  }
}

double coalition_value(double net_energy, const Tariff& tariff) {
  return net_energy >= 0.0 ? tariff.wholesale * net_energy
                           : tariff.retail * net_energy;
}

double coalition_value(std::span<const Customer> members, const Tariff& tariff) {
  double net = 0.0;
  for (const Customer& c : members) net += c.net_energy;
  return coalition_value(net, tariff);
}

double coalition_value(const CoalitionInstance& instance, Mask members) {
  double net = 0.0;
  for (std::size_t i = 0; i < instance.size(); ++i) {
    if (members >> i & 1) net += instance.customers[i].net_energy;
  }
  return coalition_value(net, instance.tariff);
}

std::vector<double> all_values(const CoalitionInstance& instance) {
  require_at_most(instance, 20, "coalition value table");
  const std::size_t n = instance.size();
  std::vector<double> net(std::size_t{1} << n, 0.0);
  std::vector<double> value(net.size(), 0.0);
  for (Mask s = 1; s < net.size(); ++s) {
    const int low = std::countr_zero(s);
    net[s] = net[s & (s - 1)] + instance.customers[low].net_energy;
    value[s] = coalition_value(net[s], instance.tariff);
  }
  return value;
}

SuperadditivityCheck check_superadditivity(const CoalitionInstance& instance) {
  require_at_most(instance, 12, "superadditivity check");
  const std::vector<double> value = all_values(instance);
  const Mask full = (Mask{1} << instance.size()) - 1;
  SuperadditivityCheck out;
  for (Mask s = 1; s <= full; ++s) {
    const Mask rest = full & ~s;
    for (Mask t = rest; t != 0; t = (t - 1) & rest) {
      const double gap = value[s] + value[t] - value[s | t];
      if (gap > kTol) {
        out.holds = false;
        out.s = s;
        out.t = t;
        out.shortfall = gap;
        return out;
      }
    }
  }
  return out;
}

std::vector<double> shapley_exact(const CoalitionInstance& instance) {
  validate_instance(instance);
  require_at_most(instance, 10, "exact Shapley value");
  const std::size_t n = instance.size();
  const std::vector<double> value = all_values(instance);
  // weight[s] = s! (n - s - 1)! / n!
  std::vector<double> weight(n);
  for (std::size_t s = 0; s < n; ++s) {
    weight[s] = std::exp(std::lgamma(s + 1.0) + std::lgamma(double(n - s)) -
                         std::lgamma(n + 1.0));
  }
  std::vector<double> phi(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const Mask bit = Mask{1} << i;
    for (Mask s = 0; s < value.size(); ++s) {
      if (s & bit) continue;
      phi[i] += weight[std::popcount(s)] * (value[s | bit] - value[s]);
    }
  }
  return phi;
}

std::vector<double> shapley_monte_carlo(const CoalitionInstance& instance,
                                        std::size_t samples, std::uint64_t seed) {
  validate_instance(instance);
  if (samples == 0) throw InputError("Monte-Carlo Shapley needs at least one sample");
  const std::size_t n = instance.size();
  const Tariff& tariff = instance.tariff;
  Rng rng(seed);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> sum(n, 0.0);
  for (std::size_t k = 0; k < samples; ++k) {
    rng.shuffle(order.begin(), order.end());
    double net = 0.0;
    double before = 0.0;
    for (std::size_t i : order) {
      net += instance.customers[i].net_energy;
      const double after = coalition_value(net, tariff);
      sum[i] += after - before;
      before = after;
    }
  }
  std::vector<double> phi(n);
  for (std::size_t i = 0; i < n; ++i) phi[i] = sum[i] / static_cast<double>(samples);

  // Customers with equal net energy are interchangeable; pool their estimates.
  std::map<double, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < n; ++i) groups[instance.customers[i].net_energy].push_back(i);
  for (const auto& [net, members] : groups) {
    if (members.size() < 2) continue;
    double mean = 0.0;
    for (std::size_t i : members) mean += phi[i];
    mean /= static_cast<double>(members.size());
    for (std::size_t i : members) phi[i] = mean;
  }

  double grand_net = 0.0;
  for (const Customer& c : instance.customers) grand_net += c.net_energy;
  const double residual =
      coalition_value(grand_net, tariff) - std::accumulate(phi.begin(), phi.end(), 0.0);
  double mass = 0.0;
  for (double x : phi) mass += std::abs(x);
  for (std::size_t i = 0; i < n; ++i) {
    phi[i] += mass > 0.0 ? residual * std::abs(phi[i]) / mass
                         : residual / static_cast<double>(n);
  }
  return phi;
}

std::vector<double> shapley_by_group(std::span<const CustomerGroup> groups,
                                     const Tariff& tariff) {
  validate_tariff(tariff);
  int n = 0;
  for (const CustomerGroup& g : groups) {
    if (g.count < 0) throw InputError("customer group count must be non-negative");
    if (!std::isfinite(g.net_energy)) throw InputError("group net energy must be finite");
    n += g.count;
  }
  std::vector<double> phi(groups.size(), 0.0);
  if (n == 0) return phi;
  std::vector<int> others(groups.size());
  std::vector<int> k(groups.size());
  for (std::size_t g = 0; g < groups.size(); ++g) {
    if (groups[g].count == 0) continue;
    for (std::size_t t = 0; t < groups.size(); ++t) {
      others[t] = groups[t].count - (t == g ? 1 : 0);
    }
    // Odometer over how many of each group precede the player.
    std::fill(k.begin(), k.end(), 0);
    for (;;) {
      int before = 0;
      double net = 0.0;
      double log_ways = 0.0;
      for (std::size_t t = 0; t < groups.size(); ++t) {
        before += k[t];
        net += k[t] * groups[t].net_energy;
        log_ways += log_choose(others[t], k[t]);
      }
      const double p = std::exp(log_ways - log_choose(n - 1, before)) / n;
      phi[g] += p * (coalition_value(net + groups[g].net_energy, tariff) -
                     coalition_value(net, tariff));
      std::size_t t = 0;
      while (t < groups.size() && k[t] == others[t]) k[t++] = 0;
      if (t == groups.size()) break;
      ++k[t];
    }
  }
  return phi;
}

CoreCheck in_core(std::span<const double> allocation,
                  const CoalitionInstance& instance) {
  require_at_most(instance, 10, "core check");
  if (allocation.size() != instance.size()) {
    throw InputError("allocation has " + std::to_string(allocation.size()) +
                     " entries for " + std::to_string(instance.size()) +
                     " customers");
  }
  const std::vector<double> value = all_values(instance);
  std::vector<double> paid(value.size(), 0.0);
  for (Mask s = 1; s < value.size(); ++s) {
    paid[s] = paid[s & (s - 1)] + allocation[std::countr_zero(s)];
  }
  const Mask full = value.size() - 1;
  if (std::abs(paid[full] - value[full]) > kTol * std::max(1.0, std::abs(value[full]))) {
    throw InputError("allocation is not efficient: pays " +
                     std::to_string(paid[full]) + " against a grand-coalition value of " +
                     std::to_string(value[full]));
  }
  CoreCheck out;
  for (Mask s = 1; s < full; ++s) {
    const double v = value[s] - paid[s];
    if (v > kTol && v > out.violation) {
      out.in_core = false;
      out.blocking = s;
      out.violation = v;
    }
  }
  return out;
}

std::vector<double> uniform_price_allocation(const CoalitionInstance& instance) {
  validate_instance(instance);
  double net = 0.0;
  for (const Customer& c : instance.customers) net += c.net_energy;
  const double price = net >= 0.0 ? instance.tariff.wholesale : instance.tariff.retail;
  std::vector<double> x;
  for (const Customer& c : instance.customers) x.push_back(price * c.net_energy);
  return x;
}

PriceReport implied_p2p_prices(const CoalitionInstance& instance,
                               std::span<const double> allocation) {
  if (allocation.size() != instance.size()) {
    throw InputError("allocation size does not match the instance");
  }
  const Tariff& t = instance.tariff;
  PriceReport out;
  for (std::size_t i = 0; i < instance.size(); ++i) {
    ImpliedPrice p;
    p.id = instance.customers[i].id;
    const double e = instance.customers[i].net_energy;
    if (e != 0.0) {
      // Suppliers receive x > 0 for e > 0; users pay -x > 0 for e < 0.
      p.price = allocation[i] / e;
      p.in_band = *p.price >= t.wholesale - kTol && *p.price <= t.retail + kTol;
    }
    out.all_in_band = out.all_in_band && p.in_band;
    out.prices.push_back(std::move(p));
  }
  return out;
}

FitComparison revenue_vs_fit(const CoalitionInstance& instance,
                             std::span<const double> allocation) {
  if (allocation.size() != instance.size()) {
    throw InputError("allocation size does not match the instance");
  }
  FitComparison out;
  out.p2p.assign(allocation.begin(), allocation.end());
  for (std::size_t i = 0; i < instance.size(); ++i) {
    out.fit.push_back(coalition_value(instance.customers[i].net_energy, instance.tariff));
    out.p2p_total += out.p2p[i];
    out.fit_total += out.fit[i];
  }
  return out;
}

CoalitionInstance random_instance(Rng& rng, int suppliers, int users,
                                  const Tariff& tariff) {
  CoalitionInstance inst;
  inst.tariff = tariff;
  for (int i = 0; i < suppliers; ++i) {
    inst.customers.push_back(
        {"s" + std::to_string(i), Role::kSupplier, rng.uniform(0.0, 20.0)});
  }
  for (int i = 0; i < users; ++i) {
    inst.customers.push_back(
        {"u" + std::to_string(i), Role::kUser, -rng.uniform(0.0, 15.0)});
  }
  return inst;
}

std::vector<SupplierSweepRow> supplier_sweep(int first, int last, int users,
                                             double surplus, double demand,
                                             const Tariff& tariff) {
  if (first < 1 || last < first || users < 0) {
    throw InputError("supplier sweep needs 1 <= first <= last and users >= 0");
  }
  if (!(surplus >= 0.0) || !(demand >= 0.0)) {
    throw InputError("supplier surplus and user demand must be non-negative");
  }
  std::vector<SupplierSweepRow> rows;
  for (int s = first; s <= last; ++s) {
    const CustomerGroup groups[] = {{surplus, s}, {-demand, users}};
    const std::vector<double> phi = shapley_by_group(groups, tariff);
    SupplierSweepRow row;
    row.suppliers = s;
    row.supplier_payoff = phi[0];
    row.user_payoff = phi[1];
    row.user_saving =
        users > 0 && demand > 0.0 ? 1.0 + phi[1] / (tariff.retail * demand) : 0.0;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace gridswap::coalition
