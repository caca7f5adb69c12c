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

// Cooperative game among prosumers that pool their net energy and settle the
// coalition's residual with the grid.

#ifndef GRIDSWAP_COALITION_H_
#define GRIDSWAP_COALITION_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gridswap/common.h"

namespace gridswap::coalition {

enum class Role { kSupplier, kUser };

struct Customer {
  std::string id;
  Role role = Role::kSupplier;
  // kWh; positive is surplus to sell, negative is demand to buy.
  double net_energy = 0.0;
};

struct CoalitionInstance {
  std::vector<Customer> customers;
  Tariff tariff;

  std::size_t size() const { return customers.size(); }
};

// Bit i set means customer i is a member.
using Mask = std::uint64_t;

// Throws InputError on an empty instance, a supplier with negative net
// energy, a user with positive net energy, or an invalid tariff.
void validate_instance(const CoalitionInstance& instance);

// wholesale * max(net, 0) - retail * max(-net, 0).
double coalition_value(double net_energy, const Tariff& tariff);
double coalition_value(std::span<const Customer> members, const Tariff& tariff);
double coalition_value(const CoalitionInstance& instance, Mask members);

// nu(S) for every mask S over the instance's customers. N <= 20.
std::vector<double> all_values(const CoalitionInstance& instance);

struct SuperadditivityCheck {
  bool holds = true;
  // First pair (in enumeration order) with nu(S | T) < nu(S) + nu(T).
  Mask s = 0;
  Mask t = 0;
  double shortfall = 0.0;
};

// Exhaustive over all 3^N ordered disjoint pairs. Does not validate the
// tariff so that broken tariffs can be diagnosed. N > 12 throws SizeError;
// use sampling instead.
SuperadditivityCheck check_superadditivity(const CoalitionInstance& instance);

// Exact Shapley value by subset-weighted enumeration. N > 10 throws SizeError.
std::vector<double> shapley_exact(const CoalitionInstance& instance);

// Permutation-sampling estimate. The residual ν(N) - Σ x_i left by rounding
// is spread in proportion to |x_i| (equally if all are zero).
std::vector<double> shapley_monte_carlo(const CoalitionInstance& instance,
                                        std::size_t samples, std::uint64_t seed);

// Exact Shapley value for a game whose customers fall into groups with equal
// net energy. Returns one value per group; cost is the product of
// (count + 1) over groups.
struct CustomerGroup {
  double net_energy = 0.0;
  int count = 0;
};
std::vector<double> shapley_by_group(std::span<const CustomerGroup> groups,
                                     const Tariff& tariff);

struct CoreCheck {
  bool in_core = true;
  // Coalition with the largest violation nu(S) - Σ_{i in S} x_i.
  Mask blocking = 0;
  double violation = 0.0;
};

// Requires Σ x_i = nu(N) within 1e-9 (InputError otherwise). N > 10 throws
// SizeError.
CoreCheck in_core(std::span<const double> allocation,
                  const CoalitionInstance& instance);

// Everyone trades at the wholesale price when the grand coalition has a net
// surplus and at the retail price otherwise. Always in the core.
std::vector<double> uniform_price_allocation(const CoalitionInstance& instance);

struct ImpliedPrice {
  std::string id;
  std::optional<double> price;  // empty for zero net energy
  bool in_band = true;
};

struct PriceReport {
  std::vector<ImpliedPrice> prices;
  bool all_in_band = true;
};

// $/kWh each customer effectively trades at under `allocation`, checked
// against [wholesale, retail].
PriceReport implied_p2p_prices(const CoalitionInstance& instance,
                               std::span<const double> allocation);

struct FitComparison {
  std::vector<double> p2p;  // the allocation itself
  std::vector<double> fit;  // nu({i}): sell at wholesale, buy at retail
  double p2p_total = 0.0;
  double fit_total = 0.0;
};

FitComparison revenue_vs_fit(const CoalitionInstance& instance,
                             std::span<const double> allocation);

// Suppliers with surplus uniform on [0, 20] kWh and users with demand
// uniform on [0, 15] kWh.
CoalitionInstance random_instance(Rng& rng, int suppliers, int users,
                                  const Tariff& tariff);

struct SupplierSweepRow {
  int suppliers = 0;
  double supplier_payoff = 0.0;  // per supplier, Shapley
  double user_payoff = 0.0;      // per user, Shapley (negative is a cost)
  double user_saving = 0.0;      // fraction of the retail bill saved
};

// Identical suppliers (surplus each) against a fixed set of identical users
// (demand each), for every supplier count in [first, last].
std::vector<SupplierSweepRow> supplier_sweep(int first, int last, int users,
                                             double surplus, double demand,
                                             const Tariff& tariff);

}  // namespace gridswap::coalition

#endif  // GRIDSWAP_COALITION_H_
