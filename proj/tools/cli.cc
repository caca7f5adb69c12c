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

#include "cli.h"

#include <CLI11.hpp>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <functional>
#include <map>

#include "gridswap/coalition.h"
#include "gridswap/common.h"
#include "gridswap/csv.h"
#include "gridswap/ev_exchange.h"
#include "gridswap/game_kit.h"
#include "gridswap/market.h"
#include "gridswap/scenario.h"
#include "gridswap/storage.h"

#ifndef GRIDSWAP_VERSION
#define GRIDSWAP_VERSION "0.0.0"
#endif

namespace gridswap::cli {
namespace {

namespace fs = std::filesystem;

using csv::format;

// Output files are built in memory and written only once the command has
// succeeded, so a failing run leaves the output directory untouched.
struct Outputs {
  std::vector<std::pair<std::string, std::string>> files;
  std::vector<std::pair<std::string, std::string>> inputs;  // name, digest
  std::optional<std::uint64_t> seed;

  void add(std::string name, std::string content) {
    files.emplace_back(std::move(name), std::move(content));
  }
};

std::string digest(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return std::string("fnv1a64:") + buf;
}

std::string read_input(Outputs& o, const std::string& path) {
  std::string text = csv::read_file(path);
  o.inputs.emplace_back(fs::path(path).filename().string(), digest(text));
  return text;
}

std::string kv(const std::string& key, const std::string& value) {
  return key + " = " + value + "\n";
}

// Reads an optional numeric field; empty means absent.
std::optional<double> field(const csv::Table& t, std::size_t row, const std::string& name) {
  for (std::size_t c = 0; c < t.header.size(); ++c) {
    if (t.header[c] != name) continue;
    if (t.rows[row][c].empty()) return std::nullopt;
    return t.number(row, c);
  }
  return std::nullopt;
}

double required(const csv::Table& t, std::size_t row, const std::string& name) {
  t.column(name);
  if (auto v = field(t, row, name)) return *v;
  throw SchemaError(t.source + ":" + std::to_string(t.lines[row]) + ": '" + name +
                    "' is required for this row");
}

Tariff tariff_from(const RunConfig& c) {
  if (!c.wholesale || !c.retail) {
    throw InputError("this command needs --wholesale and --retail");
  }
  Tariff t{*c.wholesale, *c.retail};
  validate_tariff(t);
  return t;
}

storage::BurdenRule rule_from(const RunConfig& c) {
  return c.rule && *c.rule == "equal" ? storage::BurdenRule::kEqual
                                      : storage::BurdenRule::kProportional;
}

// --- run / sweep --------------------------------------------------------

scenario::Scenario load_with_overrides(const RunConfig& c, Outputs& o) {
  const fs::path config(c.config);
  const fs::path data = c.data_dir.empty() ? config.parent_path() : fs::path(c.data_dir);
  read_input(o, c.config);
  scenario::Scenario s = scenario::load_scenario(config, data);
  if (c.seed) s.seed = *c.seed;
  if (c.eps) s.ev.eps = *c.eps;
  if (c.rule) s.storage_rule = rule_from(c);
  if (c.wholesale) s.tariff.wholesale = *c.wholesale;
  if (c.retail) s.tariff.retail = *c.retail;
  if (c.samples) s.coalition_samples = *c.samples;
  scenario::validate(s);
  std::string all;
  for (const scenario::AgentProfile& a : s.agents) {
    all += a.id + ";";
    for (std::size_t t = 0; t < a.load.size(); ++t) {
      all += format(a.load[t]) + "," + format(a.generation[t]) + ";";
    }
  }
  o.inputs.emplace_back("series", digest(all));
  o.seed = s.seed;
  return s;
}

void cmd_run(const RunConfig& c, Outputs& o) {
  const scenario::Scenario s = load_with_overrides(c, o);
  const scenario::MetricsReport r = scenario::run_simulation(s);
  o.add("agents.csv", scenario::agents_csv(r));
  o.add("slots.csv", scenario::slots_csv(r));
  o.add("summary.txt", scenario::summary_text(r));
  o.add("baselines.csv", scenario::baselines_csv(scenario::compare_baselines(s, r)));
}

std::vector<double> parse_values(const std::string& text) {
  std::vector<double> out;
  const auto number = [&](const std::string& f) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
    if (ec != std::errc() || ptr != f.data() + f.size() || !std::isfinite(v)) {
      throw InputError("bad sweep value '" + f + "'");
    }
    return v;
  };
  if (csv::trim(text).empty()) return out;
  const std::vector<std::string> range = csv::split(text, ':');
  if (range.size() == 3) {  // start:stop:step
    const double start = number(range[0]), stop = number(range[1]), step = number(range[2]);
    if (!(step > 0.0) || stop < start) throw InputError("sweep range needs start <= stop, step > 0");
    const auto n = static_cast<long long>(std::floor((stop - start) / step + 1e-9));
    if (n > 1'000'000) throw InputError("sweep range is too long");
    for (long long k = 0; k <= n; ++k) out.push_back(start + static_cast<double>(k) * step);
    return out;
  }
  for (const std::string& f : csv::split(text)) out.push_back(number(f));
  return out;
}

void cmd_sweep(const RunConfig& c, Outputs& o) {
  const scenario::Scenario s = load_with_overrides(c, o);
  const std::vector<double> values = parse_values(c.values);
  const std::vector<scenario::SweepRow> rows = scenario::sweep(s, c.param, values);
  o.add("sweep.csv", scenario::sweep_csv(c.param, rows));
}

// --- clear --------------------------------------------------------------

void cmd_clear(const RunConfig& c, Outputs& o) {
  const std::string name = fs::path(c.config).filename().string();
  const csv::Table t = csv::parse(read_input(o, c.config), name);
  const std::size_t id = t.column("agent_id"), side = t.column("side");
  const std::size_t qty = t.column("quantity"), price = t.column("limit_price");
  std::vector<market::Order> buys, sells;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    market::Order ord{t.text(r, id), market::Side::kBuy, t.number(r, qty), t.number(r, price), 0};
    if (t.text(r, side) == "buy") {
      buys.push_back(ord);
    } else if (t.text(r, side) == "sell") {
      ord.side = market::Side::kSell;
      sells.push_back(ord);
    } else {
      throw SchemaError(name + ":" + std::to_string(t.lines[r]) + ": side must be buy or sell");
    }
  }
  const auto rule = c.pricing == "midpoint" ? market::PricingRule::kMidpoint
                                            : market::PricingRule::kMarginalBid;
  const market::SlotClearing cl = market::clear_double_auction(buys, sells, rule);
  std::string matches = "buyer_id,seller_id,quantity,price\n";
  for (const market::Match& m : cl.matches) {
    matches += m.buyer_id + "," + m.seller_id + "," + format(m.quantity) + "," +
               format(*cl.clearing_price) + "\n";
  }
  std::string residual = "agent_id,side,quantity\n";
  for (const auto& [a, q] : cl.residual_buys) residual += a + ",buy," + format(q) + "\n";
  for (const auto& [a, q] : cl.residual_sells) residual += a + ",sell," + format(q) + "\n";
  o.add("clearing.csv", matches);
  o.add("residuals.csv", residual);
  std::string summary = kv("clearing_price", cl.clearing_price ? format(*cl.clearing_price) : "none");
  summary += kv("matched_kwh", format(cl.matched_quantity()));
  summary += kv("pricing", c.pricing);
  if (c.wholesale || c.retail) {
    const market::Settlement st = market::settle_slot(cl, tariff_from(c));
    std::string flows = "agent_id,p2p_payment,p2p_receipt,grid_charge,grid_credit,net_cost\n";
    for (const auto& [a, f] : st.flows) {
      flows += a + "," + format(f.p2p_payment) + "," + format(f.p2p_receipt) + "," +
               format(f.grid_charge) + "," + format(f.grid_credit) + "," + format(f.net_cost()) +
               "\n";
    }
    o.add("settlement.csv", flows);
    summary += kv("grid_import_kwh", format(st.grid_import_kwh));
    summary += kv("grid_export_kwh", format(st.grid_export_kwh));
  }
  o.add("summary.txt", summary);
}

// --- ev-auction -----------------------------------------------------------

void cmd_ev(const RunConfig& c, Outputs& o) {
  const std::string name = fs::path(c.config).filename().string();
  const csv::Table t = csv::parse(read_input(o, c.config), name);
  const std::size_t id = t.column("id"), role = t.column("role");
  std::vector<ev::ChargingEv> ch;
  std::vector<ev::DischargingEv> dis;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    if (t.text(r, role) == "charger") {
      ch.push_back({t.text(r, id), required(t, r, "willingness"),
                    field(t, r, "min_demand").value_or(0.0),
                    field(t, r, "max_demand").value_or(ev::kUnbounded), 0.0});
    } else if (t.text(r, role) == "discharger") {
      dis.push_back({t.text(r, id), required(t, r, "quad_cost"), required(t, r, "linear_cost"),
                     required(t, r, "max_supply"), 0.0});
    } else {
      throw SchemaError(name + ":" + std::to_string(t.lines[r]) +
                        ": role must be charger or discharger");
    }
  }
  ev::AuctionOptions opts;
  if (c.eps) opts.eps = *c.eps;
  const double eta = c.eta.value_or(0.9);
  const ev::AuctionResult res = ev::run_iterative_auction(ch, dis, eta, opts);
  const ev::EvAllocation best = ev::solve_social_welfare(ch, dis, eta);
  const double optimum = ev::social_welfare(ch, dis, best);

  std::string trades = "discharger_id,charger_id,sent_kwh,delivered_kwh,price\n";
  for (const ev::PairTrade& tr : res.settlement.trades) {
    trades += dis[tr.discharger].id + "," + ch[tr.charger].id + "," + format(tr.sent) + "," +
              format(tr.sent * eta) + "," + format(tr.price) + "\n";
  }
  std::string agents = "id,role,energy_kwh,payment,receipt,final_price\n";
  for (std::size_t i = 0; i < ch.size(); ++i) {
    agents += ch[i].id + ",charger," + format(res.allocation.delivered_to(i)) + "," +
              format(res.settlement.charger_payments[i]) + ",0," +
              format(res.chargers[i].bid_price) + "\n";
  }
  for (std::size_t j = 0; j < dis.size(); ++j) {
    agents += dis[j].id + ",discharger," + format(res.allocation.sent_by(j)) + ",0," +
              format(res.settlement.discharger_receipts[j]) + "," +
              format(res.dischargers[j].ask_price) + "\n";
  }
  std::string trace = "iteration,welfare,max_price_change\n";
  for (std::size_t k = 0; k < res.trace.iterations.size(); ++k) {
    trace += std::to_string(k + 1) + "," + format(res.trace.iterations[k].welfare) + "," +
             format(res.trace.iterations[k].max_price_change) + "\n";
  }
  o.add("trades.csv", trades);
  o.add("agents.csv", agents);
  o.add("trace.csv", trace);
  o.add("summary.txt", kv("converged", res.trace.converged ? "true" : "false") +
                           kv("iterations", std::to_string(res.trace.iteration_count())) +
                           kv("eta", format(eta)) + kv("eps", format(opts.eps)) +
                           kv("welfare", format(res.welfare)) +
                           kv("optimal_welfare", format(optimum)) +
                           kv("auctioneer_surplus", format(res.settlement.auctioneer_surplus)));
}

// --- shapley -----------------------------------------------------------

void cmd_shapley(const RunConfig& c, Outputs& o) {
  const std::string name = fs::path(c.config).filename().string();
  const csv::Table t = csv::parse(read_input(o, c.config), name);
  const std::size_t id = t.column("id"), net = t.column("net_energy");
  coalition::CoalitionInstance inst;
  inst.tariff = tariff_from(c);
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const double x = t.number(r, net);
    inst.customers.push_back(
        {t.text(r, id), x >= 0.0 ? coalition::Role::kSupplier : coalition::Role::kUser, x});
  }
  coalition::validate_instance(inst);
  const int samples = c.samples.value_or(10000);
  o.seed = c.seed.value_or(0);
  const std::vector<double> phi = c.exact ? coalition::shapley_exact(inst)
                                          : coalition::shapley_monte_carlo(inst, samples, *o.seed);
  const coalition::PriceReport prices = coalition::implied_p2p_prices(inst, phi);
  const coalition::FitComparison fit = coalition::revenue_vs_fit(inst, phi);
  std::string alloc = "id,role,net_energy,shapley,implied_price,in_band,fit_value\n";
  for (std::size_t i = 0; i < inst.size(); ++i) {
    const coalition::Customer& cu = inst.customers[i];
    const auto& p = prices.prices[i];
    alloc += cu.id + "," + (cu.role == coalition::Role::kSupplier ? "supplier" : "user") + "," +
             format(cu.net_energy) + "," + format(phi[i]) + "," +
             (p.price ? format(*p.price) : "") + "," + (p.in_band ? "true" : "false") + "," +
             format(fit.fit[i]) + "\n";
  }
  o.add("allocation.csv", alloc);
  std::string summary = kv("method", c.exact ? "exact" : "monte_carlo");
  if (!c.exact) summary += kv("samples", std::to_string(samples));
  summary += kv("grand_value", format(coalition::coalition_value(inst, (coalition::Mask{1} << inst.size()) - 1)));
  summary += kv("fit_total", format(fit.fit_total));
  summary += kv("prices_in_band", prices.all_in_band ? "true" : "false");
  if (inst.size() <= 10) {
    const coalition::CoreCheck core = coalition::in_core(phi, inst);
    std::string blocking;
    for (std::size_t i = 0; i < inst.size(); ++i) {
      if (core.blocking >> i & 1) blocking += (blocking.empty() ? "" : ";") + inst.customers[i].id;
    }
    summary += kv("in_core", core.in_core ? "true" : "false");
    summary += kv("max_core_violation", format(core.violation));
    summary += kv("blocking_coalition", blocking);
  }
  o.add("summary.txt", summary);
}

// --- storage-auction / ic-check ------------------------------------------

storage::StorageScenario read_storage(const RunConfig& c, Outputs& o) {
  const std::string name = fs::path(c.config).filename().string();
  const csv::Table t = csv::parse(read_input(o, c.config), name);
  const std::size_t id = t.column("id"), kind = t.column("kind");
  storage::StorageScenario sc;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    if (t.text(r, kind) == "ru") {
      sc.rus.push_back({t.text(r, id), required(t, r, "capacity"),
                        required(t, r, "reservation_price"), required(t, r, "reluctance")});
    } else if (t.text(r, kind) == "sfc") {
      sc.sfcs.push_back({t.text(r, id), required(t, r, "requirement"), required(t, r, "bid_price")});
    } else {
      throw SchemaError(name + ":" + std::to_string(t.lines[r]) + ": kind must be ru or sfc");
    }
  }
  storage::validate(sc.rus, sc.sfcs);
  return sc;
}

void cmd_storage(const RunConfig& c, Outputs& o) {
  const storage::StorageScenario sc = read_storage(c, o);
  const storage::StorageOutcome out = storage::run_storage_auction(sc.rus, sc.sfcs, rule_from(c));
  const std::vector<double> ed = storage::equal_distribution_utility(sc.rus, sc.sfcs);
  std::string rows = "id,kind,participant,share,burden,traded_kwh,payment,utility,ed_utility\n";
  const auto joined = [](const std::vector<std::string>& ids, const std::string& x) {
    return std::find(ids.begin(), ids.end(), x) != ids.end();
  };
  double ed_total = 0.0;
  for (std::size_t k = 0; k < sc.rus.size(); ++k) {
    const double sold = out.shares[k] - out.burden[k];
    ed_total += ed[k];
    rows += sc.rus[k].id + ",ru," + (joined(out.ru_participants, sc.rus[k].id) ? "true" : "false") +
            "," + format(out.shares[k]) + "," + format(out.burden[k]) + "," + format(sold) + "," +
            format(out.auction_price * sold) + "," + format(out.ru_utility[k]) + "," +
            format(ed[k]) + "\n";
  }
  for (std::size_t m = 0; m < sc.sfcs.size(); ++m) {
    const double got = out.sfc_allocations[m];
    rows += sc.sfcs[m].id + ",sfc," +
            (joined(out.sfc_participants, sc.sfcs[m].id) ? "true" : "false") + ",,," +
            format(got) + "," + format(out.auction_price * got) + "," +
            format(out.sfc_utility[m]) + ",\n";
  }
  o.add("outcome.csv", rows);
  std::string summary = kv("rule", rule_from(c) == storage::BurdenRule::kEqual ? "equal" : "proportional");
  summary += kv("vickrey_price", format(out.vickrey_price));
  summary += kv("auction_price", format(out.auction_price));
  summary += kv("traded_kwh", format(out.traded()));
  summary += kv("ru_utility", format(out.total_ru_utility()));
  summary += kv("ed_ru_utility", format(ed_total));
  if (c.wholesale) {
    double fit = 0.0;
    for (double u : storage::feed_in_utility(sc.rus, *c.wholesale)) fit += u;
    summary += kv("fit_ru_utility", format(fit));
  }
  o.add("summary.txt", summary);
}

std::string_view misreport_name(storage::Misreport m) {
  switch (m) {
    case storage::Misreport::kReservationPrice: return "reservation_price";
    case storage::Misreport::kCapacity: return "capacity";
    case storage::Misreport::kBid: return "bid";
  }
  return "?";
}

void cmd_ic(const RunConfig& c, Outputs& o) {
  std::vector<storage::StorageScenario> scenarios;
  if (!c.config.empty()) {
    scenarios.push_back(read_storage(c, o));
  } else {
    const int n = c.samples.value_or(100);
    if (n < 1) throw InputError("--samples must be positive");
    o.seed = c.seed.value_or(0);
    Rng rng(*o.seed);
    for (int k = 0; k < n; ++k) scenarios.push_back(storage::random_scenario(rng));
  }
  const std::vector<double> grid = storage::default_deviation_grid();
  const storage::IcReport rep = storage::check_incentive_compatibility(scenarios, grid, rule_from(c));
  const auto dev_rows = [](const std::vector<storage::Deviation>& devs) {
    std::string s = "scenario,agent_id,misreport,factor,truthful_utility,deviating_utility,gain\n";
    for (const storage::Deviation& d : devs) {
      s += std::to_string(d.scenario) + "," + d.agent_id + "," + std::string(misreport_name(d.kind)) +
           "," + format(d.factor) + "," + format(d.truthful_utility) + "," +
           format(d.deviating_utility) + "," + format(d.gain()) + "\n";
    }
    return s;
  };
  std::string ir = "scenario,agent_id,utility\n";
  for (const storage::IrViolation& v : rep.ir_violations) {
    ir += std::to_string(v.scenario) + "," + v.agent_id + "," + format(v.utility) + "\n";
  }
  double max_gain = 0.0;
  for (const storage::Deviation& d : rep.profitable) max_gain = std::max(max_gain, d.gain());
  o.add("deviations.csv", dev_rows(rep.profitable));
  o.add("bid_anomalies.csv", dev_rows(rep.sfc_bid_anomalies));
  o.add("ir_violations.csv", ir);
  o.add("summary.txt", kv("scenarios", std::to_string(rep.scenarios)) +
                           kv("runs", std::to_string(rep.runs)) +
                           kv("profitable_deviations", std::to_string(rep.profitable.size())) +
                           kv("max_gain", format(max_gain)) +
                           kv("ir_violations", std::to_string(rep.ir_violations.size())) +
                           kv("sfc_bid_anomalies", std::to_string(rep.sfc_bid_anomalies.size())) +
                           kv("truthful", rep.profitable.empty() ? "true" : "false"));
}

// --- nash ----------------------------------------------------------------

void cmd_nash(const RunConfig& c, Outputs& o) {
  const game::FiniteGame g = game::parse_game_csv(read_input(o, c.config));
  std::string eq;
  for (std::size_t k = 0; k < g.players(); ++k) eq += (k ? ",s" : "s") + std::to_string(k);
  for (std::size_t k = 0; k < g.players(); ++k) eq += ",u" + std::to_string(k);
  eq += "\n";
  const std::vector<game::Profile> all = game::find_pure_nash(g);
  for (const game::Profile& p : all) {
    for (std::size_t k = 0; k < p.size(); ++k) eq += (k ? "," : "") + std::to_string(p[k]);
    for (std::size_t k = 0; k < g.players(); ++k) eq += "," + format(g.utility(k, p));
    eq += "\n";
  }
  o.add("equilibria.csv", eq);
  const game::BestResponseResult br =
      game::best_response_iteration(g, game::Profile(g.players(), 0), 1000);
  std::string profile;
  for (std::size_t k = 0; k < br.profile.size(); ++k) {
    profile += (k ? ";" : "") + std::to_string(br.profile[k]);
  }
  o.add("summary.txt", kv("players", std::to_string(g.players())) +
                           kv("profiles", std::to_string(g.profile_count())) +
                           kv("pure_equilibria", std::to_string(all.size())) +
                           kv("best_response_converged", br.converged ? "true" : "false") +
                           kv("best_response_rounds", std::to_string(br.rounds)) +
                           kv("best_response_profile", profile));
}

// --- generate ------------------------------------------------------------

struct GenerateFlags {
  std::string mechanism = "double_auction";
  int consumers = 5, prosumers = 5, evs = 0, rus = 0, sfcs = 0, horizon = 96;
};

void cmd_generate(const GenerateFlags& g, const RunConfig& c, Outputs& o) {
  scenario::SyntheticOptions opt;
  opt.mechanism = scenario::parse_mechanism(g.mechanism);
  opt.consumers = g.consumers;
  opt.prosumers = g.prosumers;
  opt.evs = g.evs;
  opt.residential_units = g.rus;
  opt.sfcs = g.sfcs;
  opt.horizon = g.horizon;
  opt.seed = c.seed.value_or(0);
  if (c.wholesale) opt.tariff.wholesale = *c.wholesale;
  if (c.retail) opt.tariff.retail = *c.retail;
  o.seed = opt.seed;
  const scenario::Scenario s = scenario::synthetic_scenario(opt);
  for (auto& [name, content] : scenario::render_scenario(s)) o.add(name, std::move(content));
}

void write_outputs(const RunConfig& c, const std::vector<std::string>& args, Outputs& o) {
  std::string manifest = kv("tool", "gridswap") + kv("version", GRIDSWAP_VERSION) +
                         kv("subcommand", c.subcommand);
  std::string argv;
  for (const std::string& a : args) argv += (argv.empty() ? "" : " ") + a;
  manifest += kv("argv", argv);
  manifest += kv("seed", o.seed ? std::to_string(*o.seed) : "none");
  for (const auto& [name, d] : o.inputs) manifest += kv("input." + name, d);
  for (const auto& [name, content] : o.files) manifest += kv("output." + name, digest(content));
  o.add("manifest.txt", manifest);

  const fs::path dir(c.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw InputError("output directory '" + c.out_dir + "' is not writable");
  }
  for (const auto& [name, content] : o.files) csv::write_file(dir / name, content);
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Peer-to-peer energy trading simulator", "gridswap"};
  app.require_subcommand(1, 1);
  app.set_version_flag("--version", GRIDSWAP_VERSION);
  RunConfig c;

  const auto common = [&c](CLI::App* sub, bool config_required) {
    auto* opt = sub->add_option("--config", c.config, "Input file")->check(CLI::ExistingFile);
    if (config_required) opt->required();
    sub->add_option("--out", c.out_dir, "Output directory")->required();
    sub->add_flag("--quiet", c.quiet, "Suppress progress messages");
  };
  const auto seed = [&c](CLI::App* sub) {
    sub->add_option("--seed", c.seed, "Random seed (default 0)");
  };
  const auto tariff = [&c](CLI::App* sub) {
    sub->add_option("--wholesale", c.wholesale, "Grid buy-back price, $/kWh");
    sub->add_option("--retail", c.retail, "Grid retail price, $/kWh");
  };
  const auto rule = [&c](CLI::App* sub) {
    sub->add_option("--rule", c.rule, "Unsold-space burden rule")
        ->check(CLI::IsMember({"proportional", "equal"}));
  };

  std::map<std::string, std::function<void(const RunConfig&, Outputs&)>> handlers;

  auto* run = app.add_subcommand("run", "Simulate a scenario over its horizon");
  common(run, true);
  seed(run);
  tariff(run);
  rule(run);
  run->add_option("--data", c.data_dir, "Series directory (default: the config's directory)")
      ->check(CLI::ExistingDirectory);
  run->add_option("--eps", c.eps, "EV auction tolerance");
  run->add_option("--samples", c.samples, "Shapley permutations");
  handlers["run"] = cmd_run;

  auto* clear = app.add_subcommand("clear", "Clear one slot of orders");
  common(clear, true);
  tariff(clear);
  clear->add_option("--pricing", c.pricing, "Clearing price rule")
      ->check(CLI::IsMember({"marginal_bid", "midpoint"}));
  handlers["clear"] = cmd_clear;

  auto* evs = app.add_subcommand("ev-auction", "Run the iterative EV exchange auction");
  common(evs, true);
  evs->add_option("--eps", c.eps, "Price convergence tolerance");
  evs->add_option("--eta", c.eta, "Station transmission efficiency (default 0.9)");
  handlers["ev-auction"] = cmd_ev;

  auto* shap = app.add_subcommand("shapley", "Shapley allocation of a coalition instance");
  common(shap, true);
  seed(shap);
  tariff(shap);
  shap->add_flag("--exact", c.exact, "Enumerate coalitions instead of sampling");
  shap->add_option("--samples", c.samples, "Monte-Carlo permutations (default 10000)");
  handlers["shapley"] = cmd_shapley;

  auto* stor = app.add_subcommand("storage-auction", "Run the storage-space auction");
  common(stor, true);
  rule(stor);
  stor->add_option("--wholesale", c.wholesale, "Feed-in price for the baseline, $/kWh");
  handlers["storage-auction"] = cmd_storage;

  auto* ic = app.add_subcommand("ic-check", "Search unilateral misreports in storage auctions");
  common(ic, false);
  seed(ic);
  rule(ic);
  ic->add_option("--samples", c.samples, "Random scenarios when no --config (default 100)");
  handlers["ic-check"] = cmd_ic;

  auto* nash = app.add_subcommand("nash", "Pure Nash equilibria of a finite game");
  common(nash, true);
  handlers["nash"] = cmd_nash;

  auto* sw = app.add_subcommand("sweep", "Run a scenario once per parameter value");
  common(sw, true);
  seed(sw);
  tariff(sw);
  rule(sw);
  sw->add_option("--data", c.data_dir, "Series directory (default: the config's directory)")
      ->check(CLI::ExistingDirectory);
  sw->add_option("--eps", c.eps, "EV auction tolerance");
  sw->add_option("--samples", c.samples, "Shapley permutations");
  sw->add_option("--param", c.param, "supplier_count | solar_fraction | sfc_requirement | grid_price")
      ->required();
  sw->add_option("--values", c.values, "Comma list or start:stop:step")->required();
  handlers["sweep"] = cmd_sweep;

  GenerateFlags generate_flags;
  auto* gen = app.add_subcommand("generate", "Write a synthetic scenario directory");
  gen->add_option("--out", c.out_dir, "Output directory")->required();
  gen->add_flag("--quiet", c.quiet, "Suppress progress messages");
  seed(gen);
  tariff(gen);
  gen->add_option("--mechanism", generate_flags.mechanism, "Mechanism the scenario runs")
      ->check(CLI::IsMember({"double_auction", "ev_auction", "coalition", "storage_auction"}));
  gen->add_option("--consumers", generate_flags.consumers, "Consumer households")->check(CLI::NonNegativeNumber);
  gen->add_option("--prosumers", generate_flags.prosumers, "Households with solar")->check(CLI::NonNegativeNumber);
  gen->add_option("--evs", generate_flags.evs, "Electric vehicles")->check(CLI::NonNegativeNumber);
  gen->add_option("--rus", generate_flags.rus, "Residential storage units")->check(CLI::NonNegativeNumber);
  gen->add_option("--sfcs", generate_flags.sfcs, "Shared facility controllers")->check(CLI::NonNegativeNumber);
  gen->add_option("--horizon", generate_flags.horizon, "Slots of 15 minutes")->check(CLI::PositiveNumber);
  handlers["generate"] = [&generate_flags](const RunConfig& rc, Outputs& o) {
    cmd_generate(generate_flags, rc, o);
  };

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    const auto subs = app.get_subcommands();
    out << (subs.empty() ? app.help() : subs.front()->help());
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << GRIDSWAP_VERSION << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n";
    const auto subs = app.get_subcommands();
    err << (subs.empty() ? app.help() : subs.front()->help());
    return kExitUsage;
  }
  c.subcommand = app.get_subcommands().front()->get_name();
  if (c.samples && *c.samples < 1) {
    err << "error: --samples must be positive\n";
    return kExitUsage;
  }
  if (c.eps && !(*c.eps > 0.0)) {
    err << "error: --eps must be positive\n";
    return kExitUsage;
  }

  try {
    Outputs o;
    handlers.at(c.subcommand)(c, o);
    write_outputs(c, args, o);
    if (!c.quiet) {
      err << "gridswap " << c.subcommand << ": wrote " << o.files.size() << " files to "
          << c.out_dir << "\n";
    }
  } catch (const Error& e) {
    err << "gridswap " << c.subcommand << ": " << e.what() << "\n";
    return kExitDomainError;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "gridswap " << c.subcommand << ": " << e.what() << "\n";
    return kExitDomainError;
  }
  return kExitOk;
}

}  // namespace gridswap::cli
