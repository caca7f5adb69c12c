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

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <thread>

#include "gridswap/coalition.h"
#include "gridswap/csv.h"
#include "gridswap/ev_exchange.h"
#include "gridswap/scenario.h"

namespace gridswap::scenario {

double SlotRecord::energy_residual() const {
  return generation + grid_import - consumption - grid_export - losses;
}

double SlotRecord::money_residual() const {
  return agent_payments - agent_receipts - (grid_receipts - grid_payouts) - auctioneer_surplus;
}

namespace {

std::uint64_t slot_seed(std::uint64_t seed, int slot) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(slot) + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double net(const AgentProfile& a, std::size_t t) { return a.generation[t] - a.load[t]; }

struct Run {
  const Scenario& s;
  MetricsReport& r;

  void double_auction_slot(int t, const std::vector<double>& margin) {
    const auto k = static_cast<std::size_t>(t);
    std::vector<market::Order> buys, sells;
    std::map<std::string, std::size_t> where;
    for (std::size_t i = 0; i < s.agents.size(); ++i) {
      const AgentProfile& a = s.agents[i];
      where[a.id] = i;
      const double x = net(a, k);
      if (x < 0.0) {
        buys.push_back({a.id, market::Side::kBuy, -x, s.tariff.retail - margin[i], t});
      } else if (x > 0.0) {
        sells.push_back({a.id, market::Side::kSell, x, s.tariff.wholesale + margin[i], t});
      }
    }
    const market::SlotClearing c = market::clear_double_auction(buys, sells, s.pricing);
    const market::Settlement st = market::settle_slot(c, s.tariff);
    SlotRecord rec = base_record(t);
    rec.price = c.clearing_price;
    rec.matched = rec.delivered = c.matched_quantity();
    rec.grid_import = st.grid_import_kwh;
    rec.grid_export = st.grid_export_kwh;
    for (const market::Match& m : c.matches) {
      r.agents[where[m.buyer_id]].traded_kwh += m.quantity;
      r.agents[where[m.seller_id]].traded_kwh += m.quantity;
    }
    for (const auto& [id, q] : c.residual_buys) r.agents[where[id]].grid_import_kwh += q;
    for (const auto& [id, q] : c.residual_sells) r.agents[where[id]].grid_export_kwh += q;
    for (const auto& [id, f] : st.flows) {
      AgentMetrics& m = r.agents[where[id]];
      const double bill = f.p2p_payment + f.grid_charge;
      const double revenue = f.p2p_receipt + f.grid_credit;
      m.bill += bill;
      m.revenue += revenue;
      rec.agent_payments += bill;
      rec.agent_receipts += revenue;
      rec.grid_receipts += f.grid_charge;
      rec.grid_payouts += f.grid_credit;
      rec.buy_value += f.p2p_payment;
      rec.sell_value += f.p2p_receipt;
    }
    r.slots.push_back(rec);
  }

  void coalition_slot(int t) {
    const auto k = static_cast<std::size_t>(t);
    coalition::CoalitionInstance inst;
    inst.tariff = s.tariff;
    std::vector<std::size_t> who;
    double supply = 0.0, demand = 0.0;
    for (std::size_t i = 0; i < s.agents.size(); ++i) {
      const double x = net(s.agents[i], k);
      if (x == 0.0) continue;  // null player, payoff 0
      inst.customers.push_back(
          {s.agents[i].id, x > 0.0 ? coalition::Role::kSupplier : coalition::Role::kUser, x});
      who.push_back(i);
      (x > 0.0 ? supply : demand) += std::abs(x);
    }
    SlotRecord rec = base_record(t);
    const double matched = std::min(supply, demand);
    rec.matched = rec.delivered = matched;
    rec.grid_export = supply - matched;
    rec.grid_import = demand - matched;
    rec.grid_receipts = s.tariff.retail * rec.grid_import;
    rec.grid_payouts = s.tariff.wholesale * rec.grid_export;
    if (!inst.customers.empty()) {
      const std::vector<double> phi =
          inst.size() <= 10
              ? coalition::shapley_exact(inst)
              : coalition::shapley_monte_carlo(inst, s.coalition_samples, slot_seed(s.seed, t));
      for (std::size_t n = 0; n < who.size(); ++n) {
        AgentMetrics& m = r.agents[who[n]];
        const double x = inst.customers[n].net_energy;
        const double side = x > 0.0 ? supply : demand;
        m.traded_kwh += std::abs(x) * matched / side;
        (x > 0.0 ? m.grid_export_kwh : m.grid_import_kwh) +=
            std::abs(x) * (side - matched) / side;
        if (phi[n] >= 0.0) {
          m.revenue += phi[n];
          rec.agent_receipts += phi[n];
        } else {
          m.bill -= phi[n];
          rec.agent_payments -= phi[n];
        }
      }
    }
    // Whatever users pay beyond their grid share is the price of local energy.
    rec.buy_value = rec.agent_payments - rec.grid_receipts;
    rec.sell_value = rec.agent_receipts - rec.grid_payouts;
    r.slots.push_back(rec);
  }

  void ev_slot(int t) {
    const auto k = static_cast<std::size_t>(t);
    std::vector<ev::ChargingEv> ch;
    std::vector<ev::DischargingEv> dis;
    std::vector<std::size_t> ch_idx, dis_idx;
    SlotRecord rec = base_record(t);
    rec.generation = 0.0;
    for (std::size_t i = 0; i < s.agents.size(); ++i) {
      const AgentProfile& a = s.agents[i];
      rec.generation += std::min(a.generation[k], a.load[k]);  // self-consumed
      const double x = net(a, k);
      if (x < 0.0) {
        ch.push_back({a.id, a.param("willingness"), s.ev.min_fraction * -x, -x, 0.0});
        ch_idx.push_back(i);
      } else if (x > 0.0) {
        dis.push_back({a.id, a.param("quad_cost"), a.param("linear_cost"), x, 0.0});
        dis_idx.push_back(i);
      }
    }
    std::vector<double> delivered(ch.size(), 0.0);
    const ev::GridPrices grid{s.hybrid.sell_out.value_or(s.tariff.retail),
                              s.hybrid.buy_back.value_or(s.tariff.wholesale)};
    std::vector<double> hybrid_cost(ch.size(), 0.0), hybrid_revenue(dis.size(), 0.0);
    if (!ch.empty() && !dis.empty()) {
      const ev::AuctionResult res =
          ev::run_iterative_auction(ch, dis, s.ev.eta, {s.ev.eps, s.ev.max_iter});
      r.converged = r.converged && res.trace.converged;
      const ev::HybridSettlement h = ev::settle_hybrid(res, grid);
      for (std::size_t i = 0; i < ch.size(); ++i) {
        delivered[i] = res.allocation.delivered_to(i);
        AgentMetrics& m = r.agents[ch_idx[i]];
        m.bill += res.settlement.charger_payments[i];
        m.traded_kwh += delivered[i];
        rec.agent_payments += res.settlement.charger_payments[i];
        rec.buy_value += res.settlement.charger_payments[i];
        hybrid_cost[i] = h.charger_costs[i];
      }
      for (std::size_t j = 0; j < dis.size(); ++j) {
        AgentMetrics& m = r.agents[dis_idx[j]];
        const double sent = res.allocation.sent_by(j);
        m.revenue += res.settlement.discharger_receipts[j];
        m.traded_kwh += sent;
        rec.agent_receipts += res.settlement.discharger_receipts[j];
        rec.sell_value += res.settlement.discharger_receipts[j];
        rec.generation += sent;
        rec.matched += sent;
        hybrid_revenue[j] = h.discharger_revenues[j];
      }
      rec.delivered = res.allocation.total_delivered();
      rec.losses = rec.matched - rec.delivered;
      rec.auctioneer_surplus = res.settlement.auctioneer_surplus;
    }
    for (std::size_t i = 0; i < ch.size(); ++i) {
      // Grid fallback for whatever the exchange did not deliver.
      const double unmet = std::max(0.0, ch[i].max_demand - delivered[i]);
      AgentMetrics& m = r.agents[ch_idx[i]];
      m.bill += s.tariff.retail * unmet;
      m.grid_import_kwh += unmet;
      rec.agent_payments += s.tariff.retail * unmet;
      rec.grid_receipts += s.tariff.retail * unmet;
      rec.grid_import += unmet;
      *m.hybrid_net_cost += hybrid_cost[i] + s.tariff.retail * unmet;
    }
    for (std::size_t j = 0; j < dis.size(); ++j) {
      *r.agents[dis_idx[j]].hybrid_net_cost -= hybrid_revenue[j];
    }
    r.slots.push_back(rec);
  }

  void storage_slot(int t) {
    const auto k = static_cast<std::size_t>(t);
    std::vector<storage::ResidentialUnit> rus;
    std::vector<storage::SfcAgent> sfcs;
    std::vector<std::size_t> ru_idx, sfc_idx;
    for (std::size_t i = 0; i < s.agents.size(); ++i) {
      const AgentProfile& a = s.agents[i];
      if (a.role == Role::kResidentialUnit && a.generation[k] > 0.0) {
        rus.push_back({a.id, a.generation[k], a.param("reservation_price"), a.param("reluctance")});
        ru_idx.push_back(i);
      } else if (a.role == Role::kSfc && a.load[k] > 0.0) {
        sfcs.push_back({a.id, a.load[k], a.param("bid_price")});
        sfc_idx.push_back(i);
      }
    }
    SlotRecord rec = base_record(t);
    // Storage space changes hands, not energy.
    rec.generation = rec.consumption = 0.0;
    if (!rus.empty() && !sfcs.empty()) {
      const storage::StorageOutcome out = storage::run_storage_auction(rus, sfcs, s.storage_rule);
      const std::vector<double> ed = storage::equal_distribution_utility(rus, sfcs);
      const std::vector<double> fit = storage::feed_in_utility(rus, s.tariff.wholesale);
      if (!out.empty()) rec.price = out.auction_price;
      for (std::size_t n = 0; n < rus.size(); ++n) {
        AgentMetrics& m = r.agents[ru_idx[n]];
        const double sold = out.shares[n] - out.burden[n];
        m.revenue += out.auction_price * sold;
        m.utility += out.ru_utility[n];
        m.traded_kwh += sold;
        *m.ed_utility += ed[n];
        *m.fit_utility += fit[n];
        rec.agent_receipts += out.auction_price * sold;
      }
      for (std::size_t n = 0; n < sfcs.size(); ++n) {
        AgentMetrics& m = r.agents[sfc_idx[n]];
        const double got = out.sfc_allocations[n];
        m.bill += out.auction_price * got;
        m.utility += out.sfc_utility[n];
        m.traded_kwh += got;
        rec.agent_payments += out.auction_price * got;
        rec.matched += got;
      }
      rec.delivered = rec.matched;
      rec.buy_value = rec.agent_payments;
      rec.sell_value = rec.agent_receipts;
    }
    r.slots.push_back(rec);
  }

  SlotRecord base_record(int t) const {
    SlotRecord rec;
    rec.slot = t;
    const auto k = static_cast<std::size_t>(t);
    for (const AgentProfile& a : s.agents) {
      rec.generation += a.generation[k];
      rec.consumption += a.load[k];
    }
    return rec;
  }
};

}  // namespace

MetricsReport run_simulation(const Scenario& s) {
  validate(s);
  MetricsReport r;
  r.mechanism = s.mechanism;
  r.horizon = s.horizon;
  for (const AgentProfile& a : s.agents) {
    AgentMetrics m;
    m.id = a.id;
    m.role = a.role;
    if (s.mechanism == Mechanism::kEvAuction) m.hybrid_net_cost = 0.0;
    if (a.role == Role::kResidentialUnit) m.ed_utility = m.fit_utility = 0.0;
    r.agents.push_back(std::move(m));
  }
  // Limit-price margins are drawn once per agent, in config order.
  Rng rng(s.seed);
  std::vector<double> margin;
  for (std::size_t i = 0; i < s.agents.size(); ++i) {
    margin.push_back(rng.uniform(s.margin_min, s.margin_max));
  }

  Run run{s, r};
  for (int t = 0; t < s.horizon; ++t) {
    switch (s.mechanism) {
      case Mechanism::kDoubleAuction: run.double_auction_slot(t, margin); break;
      case Mechanism::kCoalition: run.coalition_slot(t); break;
      case Mechanism::kEvAuction: run.ev_slot(t); break;
      case Mechanism::kStorageAuction: run.storage_slot(t); break;
    }
  }

  double buy_value = 0.0, sell_value = 0.0, delivered = 0.0;
  for (const SlotRecord& rec : r.slots) {
    r.matched_kwh += rec.matched;
    delivered += rec.delivered;
    r.grid_import_kwh += rec.grid_import;
    r.grid_export_kwh += rec.grid_export;
    r.losses_kwh += rec.losses;
    r.generation_kwh += rec.generation;
    r.consumption_kwh += rec.consumption;
    buy_value += rec.buy_value;
    sell_value += rec.sell_value;
    r.max_energy_residual = std::max(r.max_energy_residual, std::abs(rec.energy_residual()));
    r.max_money_residual = std::max(r.max_money_residual, std::abs(rec.money_residual()));
  }
  // Buyers pay per kWh received, sellers earn per kWh sent.
  r.avg_buy_price = delivered > 0.0 ? buy_value / delivered : 0.0;
  r.avg_sell_price = r.matched_kwh > 0.0 ? sell_value / r.matched_kwh : 0.0;
  for (AgentMetrics& m : r.agents) {
    if (s.mechanism != Mechanism::kStorageAuction) m.utility = m.revenue - m.bill;
    r.total_bill += m.bill;
    r.total_revenue += m.revenue;
    r.total_utility += m.utility;
  }
  return r;
}

namespace {

void add_row(BaselineTable& table, const std::string& agent, const char* baseline,
             const char* basis, double p2p, double value) {
  BaselineRow row{agent, baseline, basis, p2p, value, 0.0, std::nullopt};
  row.delta = std::string_view(basis) == "cost" ? value - p2p : p2p - value;
  if (value > 0.0) row.delta_pct = row.delta / value;
  table.rows.push_back(std::move(row));
}

}  // namespace

BaselineTable compare_baselines(const Scenario& s) {
  return compare_baselines(s, run_simulation(s));
}

BaselineTable compare_baselines(const Scenario& s, const MetricsReport& report) {
  if (report.agents.size() != s.agents.size()) {
    throw InputError("report does not belong to this scenario");
  }
  BaselineTable table;
  const bool storage_run = s.mechanism == Mechanism::kStorageAuction;
  if (!storage_run) {
    // Feed-in tariff: every surplus kWh at wholesale, every deficit at retail.
    double p2p_total = 0.0, fit_total = 0.0;
    for (std::size_t i = 0; i < s.agents.size(); ++i) {
      const AgentProfile& a = s.agents[i];
      double fit = 0.0;
      for (std::size_t t = 0; t < a.load.size(); ++t) {
        const double x = net(a, t);
        fit += x < 0.0 ? -x * s.tariff.retail : -x * s.tariff.wholesale;
      }
      add_row(table, a.id, "fit", "cost", report.agents[i].net_cost(), fit);
      p2p_total += report.agents[i].net_cost();
      fit_total += fit;
    }
    add_row(table, "*", "fit", "cost", p2p_total, fit_total);
  } else {
    for (const char* name : {"fit", "ed"}) {
      double p2p_total = 0.0, base_total = 0.0;
      for (const AgentMetrics& m : report.agents) {
        if (m.role != Role::kResidentialUnit) continue;
        const double base = std::string_view(name) == "ed" ? *m.ed_utility : *m.fit_utility;
        add_row(table, m.id, name, "utility", m.utility, base);
        p2p_total += m.utility;
        base_total += base;
      }
      add_row(table, "*", name, "utility", p2p_total, base_total);
    }
  }
  if (s.mechanism == Mechanism::kEvAuction) {
    double p2p_total = 0.0, hybrid_total = 0.0;
    for (const AgentMetrics& m : report.agents) {
      add_row(table, m.id, "hybrid", "cost", m.net_cost(), *m.hybrid_net_cost);
      p2p_total += m.net_cost();
      hybrid_total += *m.hybrid_net_cost;
    }
    add_row(table, "*", "hybrid", "cost", p2p_total, hybrid_total);
  } else {
    table.notes.push_back("hybrid: applies to ev_auction scenarios only");
  }
  if (!storage_run) table.notes.push_back("ed: applies to storage_auction scenarios only");
  return table;
}

Scenario apply_sweep_value(const Scenario& base, std::string_view parameter, double value) {
  Scenario s = base;
  if (!std::isfinite(value)) throw InputError("sweep values must be finite");
  if (parameter == "supplier_count") {
    const Role role = base.mechanism == Mechanism::kStorageAuction ? Role::kResidentialUnit
                                                                    : Role::kProsumer;
    if (value < 0.0 || value != std::floor(value) || value > 100000) {
      throw InputError("supplier_count must be a non-negative integer");
    }
    std::vector<AgentProfile> suppliers;
    s.agents.clear();
    for (const AgentProfile& a : base.agents) {
      (a.role == role ? suppliers : s.agents).push_back(a);
    }
    if (suppliers.empty()) {
      throw InputError("supplier_count needs at least one " + std::string(to_string(role)) +
                       " agent in the template");
    }
    const auto n = static_cast<std::size_t>(value);
    for (std::size_t j = 0; j < n; ++j) {
      AgentProfile a = suppliers[j % suppliers.size()];
      if (j >= suppliers.size()) a.id += "_" + std::to_string(j / suppliers.size());
      s.agents.push_back(std::move(a));
    }
  } else if (parameter == "solar_fraction") {
    if (value < 0.0 || value > 1.0) throw InputError("solar_fraction must lie in [0, 1]");
    std::size_t n = 0;
    for (const AgentProfile& a : s.agents) {
      n += a.role == Role::kConsumer || a.role == Role::kProsumer;
    }
    if (n == 0) throw InputError("solar_fraction needs consumer or prosumer agents");
    const auto keep = static_cast<std::size_t>(std::lround(value * static_cast<double>(n)));
    std::size_t k = 0;
    for (AgentProfile& a : s.agents) {
      if (a.role != Role::kConsumer && a.role != Role::kProsumer) continue;
      if (k++ < keep) {
        a.role = Role::kProsumer;
      } else {
        a.role = Role::kConsumer;
        std::fill(a.generation.begin(), a.generation.end(), 0.0);
      }
    }
  } else if (parameter == "sfc_requirement") {
    if (value < 0.0) throw InputError("sfc_requirement must be non-negative");
    bool any = false;
    for (AgentProfile& a : s.agents) {
      if (a.role != Role::kSfc) continue;
      std::fill(a.load.begin(), a.load.end(), value);
      any = true;
    }
    if (!any) throw InputError("sfc_requirement needs sfc agents");
  } else if (parameter == "grid_price") {
    s.tariff.retail = value;
  } else {
    std::string names;
    for (std::string_view p : kSweepParameters) names += (names.empty() ? "" : ", ") + std::string(p);
    throw InputError("unknown sweep parameter '" + std::string(parameter) +
                     "' (expected one of " + names + ")");
  }
  validate(s);
  return s;
}

std::vector<SweepRow> sweep(const Scenario& base, std::string_view parameter,
                            std::span<const double> values) {
  if (std::find(std::begin(kSweepParameters), std::end(kSweepParameters), parameter) ==
      std::end(kSweepParameters)) {
    apply_sweep_value(base, parameter, 0.0);  // throws the listing error
  }
  std::vector<Scenario> points;
  for (double v : values) points.push_back(apply_sweep_value(base, parameter, v));

  std::vector<SweepRow> rows(points.size());
  std::vector<std::exception_ptr> errors(points.size());
  std::atomic<std::size_t> next{0};
  const auto work = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < points.size();) {
      try {
        SweepRow& row = rows[i];
        row.value = values[i];
        row.report = run_simulation(points[i]);
        double supplier = 0.0, supplier_u = 0.0, user = 0.0;
        int n_supplier = 0, n_user = 0;
        for (std::size_t k = 0; k < points[i].agents.size(); ++k) {
          const AgentProfile& a = points[i].agents[k];
          const AgentMetrics& m = row.report.agents[k];
          double gen = 0.0;
          for (double g : a.generation) gen += g;
          const bool sells = a.role == Role::kProsumer || a.role == Role::kResidentialUnit ||
                             (a.role == Role::kEv && gen > 0.0);
          if (sells) {
            supplier += m.revenue;
            supplier_u += m.utility;
            ++n_supplier;
          } else {
            user += m.net_cost();
            ++n_user;
          }
        }
        row.supplier_revenue = n_supplier ? supplier / n_supplier : 0.0;
        row.supplier_utility = n_supplier ? supplier_u / n_supplier : 0.0;
        row.user_cost = n_user ? user / n_user : 0.0;
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::min<std::size_t>(worker_threads(), points.size());
  std::vector<std::thread> pool;
  for (std::size_t k = 1; k < threads; ++k) pool.emplace_back(work);
  work();
  for (std::thread& th : pool) th.join();
  for (const std::exception_ptr& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return rows;
}

namespace {

std::string fmt(double v) { return csv::format(v); }
std::string fmt(const std::optional<double>& v) { return v ? csv::format(*v) : ""; }

}  // namespace

std::string agents_csv(const MetricsReport& r) {
  std::string out =
      "id,role,bill,revenue,net_cost,utility,traded_kwh,grid_import_kwh,grid_export_kwh\n";
  for (const AgentMetrics& m : r.agents) {
    out += m.id + "," + std::string(to_string(m.role)) + "," + fmt(m.bill) + "," +
           fmt(m.revenue) + "," + fmt(m.net_cost()) + "," + fmt(m.utility) + "," +
           fmt(m.traded_kwh) + "," + fmt(m.grid_import_kwh) + "," + fmt(m.grid_export_kwh) +
           "\n";
  }
  return out;
}

std::string slots_csv(const MetricsReport& r) {
  std::string out =
      "slot,generation_kwh,consumption_kwh,matched_kwh,delivered_kwh,grid_import_kwh,"
      "grid_export_kwh,losses_kwh,price,agent_payments,agent_receipts,grid_receipts,"
      "grid_payouts,auctioneer_surplus,energy_residual,money_residual\n";
  for (const SlotRecord& s : r.slots) {
    out += std::to_string(s.slot) + "," + fmt(s.generation) + "," + fmt(s.consumption) + "," +
           fmt(s.matched) + "," + fmt(s.delivered) + "," + fmt(s.grid_import) + "," +
           fmt(s.grid_export) + "," + fmt(s.losses) + "," + fmt(s.price) + "," +
           fmt(s.agent_payments) + "," + fmt(s.agent_receipts) + "," + fmt(s.grid_receipts) +
           "," + fmt(s.grid_payouts) + "," + fmt(s.auctioneer_surplus) + "," +
           fmt(s.energy_residual()) + "," + fmt(s.money_residual()) + "\n";
  }
  return out;
}

std::string summary_text(const MetricsReport& r) {
  std::string out;
  const auto line = [&out](const char* key, const std::string& value) {
    out += std::string(key) + " = " + value + "\n";
  };
  line("mechanism", std::string(to_string(r.mechanism)));
  line("horizon", std::to_string(r.horizon));
  line("agents", std::to_string(r.agents.size()));
  line("matched_kwh", fmt(r.matched_kwh));
  line("grid_import_kwh", fmt(r.grid_import_kwh));
  line("grid_export_kwh", fmt(r.grid_export_kwh));
  line("losses_kwh", fmt(r.losses_kwh));
  line("generation_kwh", fmt(r.generation_kwh));
  line("consumption_kwh", fmt(r.consumption_kwh));
  line("avg_buy_price", fmt(r.avg_buy_price));
  line("avg_sell_price", fmt(r.avg_sell_price));
  line("total_bill", fmt(r.total_bill));
  line("total_revenue", fmt(r.total_revenue));
  line("total_utility", fmt(r.total_utility));
  line("max_energy_residual", fmt(r.max_energy_residual));
  line("max_money_residual", fmt(r.max_money_residual));
  line("converged", r.converged ? "true" : "false");
  return out;
}

std::string baselines_csv(const BaselineTable& t) {
  std::string out;
  for (const std::string& n : t.notes) out += "# " + n + "\n";
  out += "agent,baseline,basis,p2p,baseline_value,delta,delta_pct\n";
  for (const BaselineRow& b : t.rows) {
    out += b.agent + "," + b.baseline + "," + b.basis + "," + fmt(b.p2p) + "," + fmt(b.value) +
           "," + fmt(b.delta) + "," + fmt(b.delta_pct) + "\n";
  }
  return out;
}

std::string sweep_csv(std::string_view parameter, std::span<const SweepRow> rows) {
  std::string out = std::string(parameter) +
                    ",matched_kwh,grid_import_kwh,grid_export_kwh,losses_kwh,total_bill,"
                    "total_revenue,total_utility,supplier_revenue,supplier_utility,user_cost,avg_buy_price\n";
  for (const SweepRow& row : rows) {
    const MetricsReport& r = row.report;
    out += fmt(row.value) + "," + fmt(r.matched_kwh) + "," + fmt(r.grid_import_kwh) + "," +
           fmt(r.grid_export_kwh) + "," + fmt(r.losses_kwh) + "," + fmt(r.total_bill) + "," +
           fmt(r.total_revenue) + "," + fmt(r.total_utility) + "," + fmt(row.supplier_revenue) +
           "," + fmt(row.supplier_utility) + "," + fmt(row.user_cost) + "," + fmt(r.avg_buy_price) + "\n";
  }
  return out;
}

}  // namespace gridswap::scenario
