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

// Time-series scenarios: agent profiles, per-slot mechanism runs, baselines
// and parameter sweeps.
//
// Config files are `key = value` lines; '#' starts a comment. Keys:
//
//   mechanism        double_auction | ev_auction | coalition | storage_auction
//   horizon          slot count, >= 1
//   slot_minutes     default 15
//   seed             default 0
//   tariff.wholesale, tariff.retail
//   margin.min, margin.max         limit-price margins, default 0
//   pricing          marginal_bid | midpoint (double_auction)
//   coalition.samples              Monte-Carlo permutations above 10 customers
//   ev.eta, ev.eps, ev.max_iter, ev.min_fraction
//   hybrid.eta, hybrid.sell_out, hybrid.buy_back
//   storage.rule     proportional | equal
//   agent.<id>       <role>, <series file relative to the data directory>
//   param.<id>.<name>              per-agent parameter
//
// Series files have the header slot_index,load_kwh,gen_kwh and one row per
// slot in order.

#ifndef GRIDSWAP_SCENARIO_H_
#define GRIDSWAP_SCENARIO_H_

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gridswap/common.h"
#include "gridswap/market.h"
#include "gridswap/storage.h"

namespace gridswap::scenario {

enum class Role { kConsumer, kProsumer, kEv, kResidentialUnit, kSfc };
enum class Mechanism { kDoubleAuction, kEvAuction, kCoalition, kStorageAuction };

std::string_view to_string(Role role);
std::string_view to_string(Mechanism mechanism);
Role parse_role(std::string_view text);
Mechanism parse_mechanism(std::string_view text);

// Parameters by role:
//   ev                willingness, quad_cost, linear_cost
//   residential_unit  reservation_price, reluctance
//   sfc               bid_price
// For EVs a slot with positive net position discharges and a negative one
// charges. RUs offer gen_kwh of storage space; SFCs require load_kwh.
struct AgentProfile {
  std::string id;
  Role role = Role::kConsumer;
  std::vector<double> load;
  std::vector<double> generation;
  std::map<std::string, double> params;

  double param(const std::string& name) const;  // SchemaError if absent
};

struct EvSettings {
  double eta = 0.9;
  double eps = 1e-4;
  int max_iter = 500;
  double min_fraction = 0.0;  // share of charging need that must be met
};

struct HybridSettings {
  double eta = 0.7;
  std::optional<double> sell_out;  // defaults to the retail tariff
  std::optional<double> buy_back;  // defaults to the wholesale tariff
};

struct Scenario {
  std::vector<AgentProfile> agents;
  Tariff tariff;
  int slot_minutes = 15;
  int horizon = 1;
  Mechanism mechanism = Mechanism::kDoubleAuction;
  std::uint64_t seed = 0;
  double margin_min = 0.0;
  double margin_max = 0.0;
  market::PricingRule pricing = market::PricingRule::kMarginalBid;
  int coalition_samples = 20000;
  EvSettings ev;
  HybridSettings hybrid;
  storage::BurdenRule storage_rule = storage::BurdenRule::kProportional;
};

// Throws SchemaError on any violation of the invariants above.
void validate(const Scenario& scenario);

// Parses the config and the series it names. Errors carry the file name and
// line, or the agent id.
Scenario load_scenario(const std::filesystem::path& config,
                       const std::filesystem::path& data_dir);
Scenario parse_scenario(std::string_view config_text, const std::string& source,
                        const std::filesystem::path& data_dir);

struct SyntheticOptions {
  Mechanism mechanism = Mechanism::kDoubleAuction;
  int consumers = 5;
  int prosumers = 5;
  int evs = 0;
  int residential_units = 0;
  int sfcs = 0;
  int horizon = 96;
  std::uint64_t seed = 0;
  Tariff tariff{0.05, 0.25};
};

// Seeded diurnal solar shape and household load with appliance spikes; EV,
// RU and SFC series follow the same slot grid.
Scenario synthetic_scenario(const SyntheticOptions& options);

// Inverse of load_scenario: scenario.cfg plus one series CSV per agent, as
// (file name, content) pairs with the config first.
std::vector<std::pair<std::string, std::string>> render_scenario(const Scenario& scenario);
void write_scenario(const Scenario& scenario, const std::filesystem::path& dir);

struct AgentMetrics {
  std::string id;
  Role role = Role::kConsumer;
  double bill = 0.0;     // $ paid for energy or storage space
  double revenue = 0.0;  // $ received
  double utility = 0.0;  // revenue - bill, or the auction utility for RUs
  double traded_kwh = 0.0;
  double grid_import_kwh = 0.0;
  double grid_export_kwh = 0.0;
  // Baseline figures gathered during the run where the mechanism has them.
  std::optional<double> hybrid_net_cost;  // ev_auction
  std::optional<double> ed_utility;       // storage_auction, RUs
  std::optional<double> fit_utility;      // storage_auction, RUs
  double net_cost() const { return bill - revenue; }
};

struct SlotRecord {
  int slot = 0;
  double generation = 0.0;
  double consumption = 0.0;
  double matched = 0.0;  // kWh taken out of sellers' hands
  double delivered = 0.0;
  double grid_import = 0.0;
  double grid_export = 0.0;
  double losses = 0.0;
  double agent_payments = 0.0;  // sum of agent bills
  double agent_receipts = 0.0;  // sum of agent revenues
  double grid_receipts = 0.0;   // imports at retail
  double grid_payouts = 0.0;    // exports at wholesale
  double auctioneer_surplus = 0.0;
  double buy_value = 0.0;       // $ buyers paid for P2P energy
  double sell_value = 0.0;      // $ sellers earned from P2P energy
  std::optional<double> price;  // uniform clearing price when there is one

  // generation + import - consumption - export - losses.
  double energy_residual() const;
  // payments - receipts - (grid receipts - payouts) - auctioneer surplus.
  double money_residual() const;
};

struct MetricsReport {
  Mechanism mechanism = Mechanism::kDoubleAuction;
  int horizon = 0;
  std::vector<AgentMetrics> agents;
  std::vector<SlotRecord> slots;
  double matched_kwh = 0.0;
  double grid_import_kwh = 0.0;
  double grid_export_kwh = 0.0;
  double losses_kwh = 0.0;
  double generation_kwh = 0.0;
  double consumption_kwh = 0.0;
  double avg_buy_price = 0.0;  // P2P $ per kWh matched, 0 without trades
  double avg_sell_price = 0.0;
  bool converged = true;  // every EV auction met its tolerance
  double total_bill = 0.0;
  double total_revenue = 0.0;
  double total_utility = 0.0;
  double max_energy_residual = 0.0;  // worst slot, absolute
  double max_money_residual = 0.0;
};

MetricsReport run_simulation(const Scenario& scenario);

struct BaselineRow {
  std::string agent;  // "*" for the aggregate row
  std::string baseline;  // fit | ed | hybrid
  std::string basis;     // cost or utility
  double p2p = 0.0;
  double value = 0.0;
  // Improvement of P2P over the baseline: baseline cost - P2P cost, or
  // P2P utility - baseline utility.
  double delta = 0.0;
  // delta / baseline for a positive baseline value.
  std::optional<double> delta_pct;
};

struct BaselineTable {
  std::vector<BaselineRow> rows;
  std::vector<std::string> notes;  // one per omitted baseline
};

BaselineTable compare_baselines(const Scenario& scenario);
BaselineTable compare_baselines(const Scenario& scenario, const MetricsReport& report);

inline constexpr std::string_view kSweepParameters[] = {
    "supplier_count", "solar_fraction", "sfc_requirement", "grid_price"};

// supplier_count   prosumers cloned cyclically from the template to the count
// solar_fraction   first round(f * n) consumer/prosumer agents keep generation
// sfc_requirement  every SFC requires the value in every slot
// grid_price       retail tariff
Scenario apply_sweep_value(const Scenario& base, std::string_view parameter, double value);

struct SweepRow {
  double value = 0.0;
  MetricsReport report;
  double supplier_revenue = 0.0;  // mean over prosumer, EV-seller and RU agents
  double supplier_utility = 0.0;
  double user_cost = 0.0;         // mean net cost over consumers
};

// One simulation per value, run concurrently, returned in input order.
// Throws InputError listing kSweepParameters for an unknown name.
std::vector<SweepRow> sweep(const Scenario& base, std::string_view parameter,
                            std::span<const double> values);

std::string agents_csv(const MetricsReport& report);
std::string slots_csv(const MetricsReport& report);
std::string summary_text(const MetricsReport& report);
std::string baselines_csv(const BaselineTable& table);
std::string sweep_csv(std::string_view parameter, std::span<const SweepRow> rows);

}  // namespace gridswap::scenario

#endif  // GRIDSWAP_SCENARIO_H_
