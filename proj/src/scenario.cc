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

#include "gridswap/scenario.h"

#include <charconv>
#include <cmath>
#include <numbers>
#include <set>

#include "gridswap/csv.h"

namespace gridswap::scenario {
namespace {

constexpr std::pair<Role, std::string_view> kRoles[] = {
    {Role::kConsumer, "consumer"},
    {Role::kProsumer, "prosumer"},
    {Role::kEv, "ev"},
    {Role::kResidentialUnit, "residential_unit"},
    {Role::kSfc, "sfc"},
};

constexpr std::pair<Mechanism, std::string_view> kMechanisms[] = {
    {Mechanism::kDoubleAuction, "double_auction"},
    {Mechanism::kEvAuction, "ev_auction"},
    {Mechanism::kCoalition, "coalition"},
    {Mechanism::kStorageAuction, "storage_auction"},
};

bool role_allowed(Mechanism m, Role r) {
  switch (m) {
    case Mechanism::kDoubleAuction:
    case Mechanism::kCoalition:
      return r == Role::kConsumer || r == Role::kProsumer;
    case Mechanism::kEvAuction:
      return r == Role::kEv;
    case Mechanism::kStorageAuction:
      return r == Role::kResidentialUnit || r == Role::kSfc;
  }
  return false;
}

struct ParamSpec {
  std::string_view name;
  bool positive;  // otherwise non-negative
};

std::vector<ParamSpec> required_params(Role r) {
  switch (r) {
    case Role::kEv:
      return {{"willingness", true}, {"quad_cost", false}, {"linear_cost", false}};
    case Role::kResidentialUnit:
      return {{"reservation_price", false}, {"reluctance", true}};
    case Role::kSfc:
      return {{"bid_price", false}};
    default:
      return {};
  }
}

struct Entry {
  std::string value;
  std::size_t line = 0;
  bool used = false;
};

class KeyValues {
 public:
  KeyValues(std::string_view text, std::string source) : source_(std::move(source)) {
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
      auto end = text.find('\n', start);
      if (end == std::string_view::npos) end = text.size();
      std::string_view line = text.substr(start, end - start);
      start = end + 1;
      ++line_no;
      if (const auto hash = line.find('#'); hash != std::string_view::npos) {
        line = line.substr(0, hash);
      }
      line = csv::trim(line);
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string_view::npos) fail(line_no, "expected 'key = value'");
      std::string key(csv::trim(line.substr(0, eq)));
      std::string value(csv::trim(line.substr(eq + 1)));
      if (key.empty()) fail(line_no, "empty key");
      if (entries_.count(key)) fail(line_no, "duplicate key '" + key + "'");
      order_.push_back(key);
      entries_[key] = Entry{std::move(value), line_no, false};
    }
  }

  [[noreturn]] void fail(std::size_t line, const std::string& what) const {
    throw SchemaError(source_ + ":" + std::to_string(line) + ": " + what);
  }

  const std::string& source() const { return source_; }
  const std::vector<std::string>& keys() const { return order_; }
  Entry& entry(const std::string& key) { return entries_.at(key); }

  const Entry* find(const std::string& key) {
    auto it = entries_.find(key);
    if (it == entries_.end()) return nullptr;
    it->second.used = true;
    return &it->second;
  }

  const Entry& require(const std::string& key) {
    const Entry* e = find(key);
    if (!e) throw SchemaError(source_ + ": missing required key '" + key + "'");
    return *e;
  }

  double number(const Entry& e, const std::string& key) const {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(e.value.data(), e.value.data() + e.value.size(), v);
    if (ec != std::errc() || ptr != e.value.data() + e.value.size() || !std::isfinite(v)) {
      fail(e.line, "'" + key + "' is not a number: '" + e.value + "'");
    }
    return v;
  }

  long long integer(const Entry& e, const std::string& key) const {
    long long v = 0;
    const auto [ptr, ec] = std::from_chars(e.value.data(), e.value.data() + e.value.size(), v);
    if (ec != std::errc() || ptr != e.value.data() + e.value.size()) {
      fail(e.line, "'" + key + "' is not an integer: '" + e.value + "'");
    }
    return v;
  }

  void number_if(const std::string& key, double& out) {
    if (const Entry* e = find(key)) out = number(*e, key);
  }

  void report_unused() const {
    for (const std::string& k : order_) {
      const Entry& e = entries_.at(k);
      if (!e.used) fail(e.line, "unknown key '" + k + "'");
    }
  }

 private:
  std::string source_;
  std::vector<std::string> order_;
  std::map<std::string, Entry> entries_;
};

void load_series(AgentProfile& agent, const std::filesystem::path& path, int horizon) {
  const std::string name = path.filename().string();
  std::string text;
  try {
    text = csv::read_file(path);
  } catch (const InputError&) {
    throw SchemaError("agent '" + agent.id + "': missing series file '" + path.string() + "'");
  }
  const csv::Table t = csv::parse(text, name);
  const std::size_t slot_col = t.column("slot_index");
  const std::size_t load_col = t.column("load_kwh");
  const std::size_t gen_col = t.column("gen_kwh");
  if (t.rows.size() != static_cast<std::size_t>(horizon)) {
    throw SchemaError("agent '" + agent.id + "': series '" + name + "' has " +
                      std::to_string(t.rows.size()) + " rows but the horizon is " +
                      std::to_string(horizon));
  }
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const std::string where = name + ":" + std::to_string(t.lines[r]) + ": ";
    if (t.number(r, slot_col) != static_cast<double>(r)) {
      throw SchemaError(where + "slot_index must be " + std::to_string(r));
    }
    const double load = t.number(r, load_col);
    const double gen = t.number(r, gen_col);
    if (load < 0.0) throw SchemaError(where + "load_kwh is negative");
    if (gen < 0.0) throw SchemaError(where + "gen_kwh is negative");
    agent.load.push_back(load);
    agent.generation.push_back(gen);
  }
}

template <typename E, std::size_t N>
std::string_view name_of(const std::pair<E, std::string_view> (&table)[N], E value) {
  for (const auto& [e, name] : table) {
    if (e == value) return name;
  }
  return "?";
}

template <typename E, std::size_t N>
std::optional<E> lookup(const std::pair<E, std::string_view> (&table)[N],
                        std::string_view text) {
  for (const auto& [e, name] : table) {
    if (name == text) return e;
  }
  return std::nullopt;
}

template <typename E, std::size_t N>
std::string choices(const std::pair<E, std::string_view> (&table)[N]) {
  std::string out;
  for (const auto& [e, name] : table) out += (out.empty() ? "" : ", ") + std::string(name);
  return out;
}

}  // namespace

std::string_view to_string(Role role) { return name_of(kRoles, role); }
std::string_view to_string(Mechanism mechanism) { return name_of(kMechanisms, mechanism); }

Role parse_role(std::string_view text) {
  if (auto r = lookup(kRoles, text)) return *r;
  throw SchemaError("unknown role '" + std::string(text) + "' (expected " + choices(kRoles) +
                    ")");
}

Mechanism parse_mechanism(std::string_view text) {
  if (auto m = lookup(kMechanisms, text)) return *m;
  throw SchemaError("unknown mechanism '" + std::string(text) + "' (expected " +
                    choices(kMechanisms) + ")");
}

double AgentProfile::param(const std::string& name) const {
  auto it = params.find(name);
  if (it == params.end()) {
    throw SchemaError("agent '" + id + "': missing parameter '" + name + "'");
  }
  return it->second;
}

void validate(const Scenario& s) {
  if (s.horizon < 1) throw SchemaError("horizon must be at least 1");
  if (s.slot_minutes < 1) throw SchemaError("slot_minutes must be positive");
  const Tariff& t = s.tariff;
  if (!(std::isfinite(t.wholesale) && std::isfinite(t.retail) && t.wholesale >= 0.0)) {
    throw SchemaError("tariff prices must be finite and non-negative");
  }
  if (!(t.retail > t.wholesale)) {
    throw SchemaError("tariff.retail must exceed tariff.wholesale");
  }
  if (!(s.margin_min >= 0.0 && s.margin_min <= s.margin_max &&
        s.margin_max <= t.retail - t.wholesale)) {
    throw SchemaError("margins must satisfy 0 <= margin.min <= margin.max <= retail - wholesale");
  }
  if (s.coalition_samples < 1) throw SchemaError("coalition.samples must be positive");
  if (!(s.ev.eta > 0.0 && s.ev.eta <= 1.0)) throw SchemaError("ev.eta must lie in (0, 1]");
  if (!(s.ev.eps > 0.0)) throw SchemaError("ev.eps must be positive");
  if (s.ev.max_iter < 1) throw SchemaError("ev.max_iter must be at least 1");
  if (!(s.ev.min_fraction >= 0.0 && s.ev.min_fraction <= 1.0)) {
    throw SchemaError("ev.min_fraction must lie in [0, 1]");
  }
  if (!(s.hybrid.eta > 0.0 && s.hybrid.eta <= 1.0)) {
    throw SchemaError("hybrid.eta must lie in (0, 1]");
  }
  for (const auto* p : {&s.hybrid.sell_out, &s.hybrid.buy_back}) {
    if (*p && !(std::isfinite(**p) && **p >= 0.0)) {
      throw SchemaError("hybrid grid prices must be finite and non-negative");
    }
  }
  if (s.agents.empty()) throw SchemaError("scenario has no agents");
  std::set<std::string> ids;
  for (const AgentProfile& a : s.agents) {
    const std::string who = "agent '" + a.id + "': ";
    if (a.id.empty()) throw SchemaError("agent with empty id");
    if (!ids.insert(a.id).second) throw SchemaError(who + "duplicate id");
    if (!role_allowed(s.mechanism, a.role)) {
      throw SchemaError(who + "role " + std::string(to_string(a.role)) +
                        " does not take part in " + std::string(to_string(s.mechanism)));
    }
    const auto n = static_cast<std::size_t>(s.horizon);
    if (a.load.size() != n || a.generation.size() != n) {
      throw SchemaError(who + "series length " + std::to_string(a.load.size()) +
                        " does not match horizon " + std::to_string(s.horizon));
    }
    for (std::size_t k = 0; k < n; ++k) {
      if (!(a.load[k] >= 0.0 && a.generation[k] >= 0.0 && std::isfinite(a.load[k]) &&
            std::isfinite(a.generation[k]))) {
        throw SchemaError(who + "negative or non-finite value in slot " + std::to_string(k));
      }
    }
    for (const ParamSpec& p : required_params(a.role)) {
      const double v = a.param(std::string(p.name));
      if (!std::isfinite(v) || v < 0.0 || (p.positive && v == 0.0)) {
        throw SchemaError(who + "parameter '" + std::string(p.name) + "' must be " +
                          (p.positive ? "positive" : "non-negative"));
      }
    }
  }
}

Scenario parse_scenario(std::string_view config_text, const std::string& source,
                        const std::filesystem::path& data_dir) {
  KeyValues kv(config_text, source);
  Scenario s;
  {
    const Entry& e = kv.require("mechanism");
    try {
      s.mechanism = parse_mechanism(e.value);
    } catch (const SchemaError& err) {
      kv.fail(e.line, err.what());
    }
  }
  {
    const Entry& e = kv.require("horizon");
    const long long h = kv.integer(e, "horizon");
    if (h < 1 || h > 10'000'000) kv.fail(e.line, "horizon must be at least 1");
    s.horizon = static_cast<int>(h);
  }
  if (const Entry* e = kv.find("slot_minutes")) {
    const long long m = kv.integer(*e, "slot_minutes");
    if (m < 1 || m > 1440) kv.fail(e->line, "slot_minutes must lie in [1, 1440]");
    s.slot_minutes = static_cast<int>(m);
  }
  if (const Entry* e = kv.find("seed")) {
    const long long v = kv.integer(*e, "seed");
    if (v < 0) kv.fail(e->line, "seed must be non-negative");
    s.seed = static_cast<std::uint64_t>(v);
  }
  s.tariff.wholesale = kv.number(kv.require("tariff.wholesale"), "tariff.wholesale");
  s.tariff.retail = kv.number(kv.require("tariff.retail"), "tariff.retail");
  kv.number_if("margin.min", s.margin_min);
  kv.number_if("margin.max", s.margin_max);
  if (const Entry* e = kv.find("pricing")) {
    if (e->value == "marginal_bid") {
      s.pricing = market::PricingRule::kMarginalBid;
    } else if (e->value == "midpoint") {
      s.pricing = market::PricingRule::kMidpoint;
    } else {
      kv.fail(e->line, "pricing must be marginal_bid or midpoint");
    }
  }
  if (const Entry* e = kv.find("coalition.samples")) {
    const long long v = kv.integer(*e, "coalition.samples");
    if (v < 1 || v > 100'000'000) kv.fail(e->line, "coalition.samples must be positive");
    s.coalition_samples = static_cast<int>(v);
  }
  kv.number_if("ev.eta", s.ev.eta);
  kv.number_if("ev.eps", s.ev.eps);
  kv.number_if("ev.min_fraction", s.ev.min_fraction);
  if (const Entry* e = kv.find("ev.max_iter")) {
    const long long v = kv.integer(*e, "ev.max_iter");
    if (v < 1 || v > 1'000'000) kv.fail(e->line, "ev.max_iter must be at least 1");
    s.ev.max_iter = static_cast<int>(v);
  }
  kv.number_if("hybrid.eta", s.hybrid.eta);
  if (const Entry* e = kv.find("hybrid.sell_out")) s.hybrid.sell_out = kv.number(*e, "hybrid.sell_out");
  if (const Entry* e = kv.find("hybrid.buy_back")) s.hybrid.buy_back = kv.number(*e, "hybrid.buy_back");
  if (const Entry* e = kv.find("storage.rule")) {
    if (e->value == "proportional") {
      s.storage_rule = storage::BurdenRule::kProportional;
    } else if (e->value == "equal") {
      s.storage_rule = storage::BurdenRule::kEqual;
    } else {
      kv.fail(e->line, "storage.rule must be proportional or equal");
    }
  }

  std::map<std::string, std::size_t> index;
  for (const std::string& key : kv.keys()) {
    if (!key.starts_with("agent.")) continue;
    Entry& e = kv.entry(key);
    e.used = true;
    AgentProfile a;
    a.id = key.substr(6);
    if (a.id.empty() || a.id.find_first_of(", .") != std::string::npos) {
      kv.fail(e.line, "agent id must be non-empty without spaces, dots or commas");
    }
    const std::vector<std::string> parts = csv::split(e.value);
    if (parts.size() != 2 || parts[1].empty()) {
      kv.fail(e.line, "expected 'agent." + a.id + " = <role>, <series file>'");
    }
    try {
      a.role = parse_role(parts[0]);
    } catch (const SchemaError& err) {
      kv.fail(e.line, err.what());
    }
    load_series(a, data_dir / parts[1], s.horizon);
    index[a.id] = s.agents.size();
    s.agents.push_back(std::move(a));
  }
  for (const std::string& key : kv.keys()) {
    if (!key.starts_with("param.")) continue;
    Entry& e = kv.entry(key);
    e.used = true;
    const auto dot = key.find('.', 6);
    if (dot == std::string::npos || dot + 1 == key.size()) {
      kv.fail(e.line, "expected 'param.<agent>.<name> = value'");
    }
    const std::string id = key.substr(6, dot - 6);
    auto it = index.find(id);
    if (it == index.end()) kv.fail(e.line, "parameter for undeclared agent '" + id + "'");
    s.agents[it->second].params[key.substr(dot + 1)] = kv.number(e, key);
  }
  kv.report_unused();
  try {
    validate(s);
  } catch (const SchemaError& err) {
    throw SchemaError(source + ": " + err.what());
  }
  return s;
}

Scenario load_scenario(const std::filesystem::path& config,
                       const std::filesystem::path& data_dir) {
  std::string text;
  try {
    text = csv::read_file(config);
  } catch (const InputError&) {
    throw SchemaError("cannot read scenario config '" + config.string() + "'");
  }
  return parse_scenario(text, config.filename().string(), data_dir);
}

namespace {

// kW to kWh for one slot.
double slot_energy(double kw, int slot_minutes) { return kw * slot_minutes / 60.0; }

double solar_shape(double hour) {
  if (hour <= 6.0 || hour >= 18.0) return 0.0;
  return std::sin(std::numbers::pi * (hour - 6.0) / 12.0);
}

std::vector<double> household_load(Rng& rng, int horizon, int slot_minutes) {
  const double base = rng.uniform(0.3, 0.8);
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(horizon));
  for (int t = 0; t < horizon; ++t) {
    const double hour = std::fmod(t * slot_minutes / 60.0, 24.0);
    double kw = base;
    if (hour >= 6.0 && hour < 9.0) kw *= 1.3;
    if (hour >= 17.0 && hour < 22.0) kw *= 1.8;
    kw *= rng.uniform(0.85, 1.15);
    if (rng.uniform() < 0.08) kw += rng.uniform(0.5, 2.5);  // appliance cycle
    out.push_back(slot_energy(kw, slot_minutes));
  }
  return out;
}

std::vector<double> solar_output(Rng& rng, int horizon, int slot_minutes) {
  const double peak = rng.uniform(2.0, 6.0);
  const int slots_per_day = std::max(1, 1440 / slot_minutes);
  double cloud = 1.0;
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(horizon));
  for (int t = 0; t < horizon; ++t) {
    if (t % slots_per_day == 0) cloud = rng.uniform(0.6, 1.0);
    const double hour = std::fmod(t * slot_minutes / 60.0, 24.0);
    out.push_back(slot_energy(peak * solar_shape(hour) * cloud, slot_minutes));
  }
  return out;
}

AgentProfile make_agent(std::string id, Role role, int horizon) {
  AgentProfile a;
  a.id = std::move(id);
  a.role = role;
  a.load.assign(static_cast<std::size_t>(horizon), 0.0);
  a.generation.assign(static_cast<std::size_t>(horizon), 0.0);
  return a;
}

}  // namespace

Scenario synthetic_scenario(const SyntheticOptions& o) {
  if (o.horizon < 1) throw InputError("horizon must be at least 1");
  for (int n : {o.consumers, o.prosumers, o.evs, o.residential_units, o.sfcs}) {
    if (n < 0) throw InputError("agent counts must be non-negative");
  }
  Scenario s;
  s.mechanism = o.mechanism;
  s.horizon = o.horizon;
  s.seed = o.seed;
  s.tariff = o.tariff;
  s.margin_max = std::min(0.02, (o.tariff.retail - o.tariff.wholesale) / 2.0);
  Rng rng(o.seed);
  const int h = o.horizon;
  const int m = s.slot_minutes;
  for (int k = 0; k < o.consumers; ++k) {
    AgentProfile a = make_agent("c" + std::to_string(k), Role::kConsumer, h);
    a.load = household_load(rng, h, m);
    s.agents.push_back(std::move(a));
  }
  for (int k = 0; k < o.prosumers; ++k) {
    AgentProfile a = make_agent("p" + std::to_string(k), Role::kProsumer, h);
    a.load = household_load(rng, h, m);
    a.generation = solar_output(rng, h, m);
    s.agents.push_back(std::move(a));
  }
  for (int k = 0; k < o.evs; ++k) {
    AgentProfile a = make_agent("ev" + std::to_string(k), Role::kEv, h);
    a.params = {{"willingness", rng.uniform(1.0, 3.0)},
                {"quad_cost", rng.uniform(0.005, 0.02)},
                {"linear_cost", rng.uniform(0.01, 0.05)}};
    for (std::size_t t = 0; t < a.load.size(); ++t) {
      const double u = rng.uniform();
      const double kwh = rng.uniform(2.0, 12.0);
      if (u < 0.45) {
        a.load[t] = kwh;
      } else if (u < 0.9) {
        a.generation[t] = kwh;
      }
    }
    s.agents.push_back(std::move(a));
  }
  for (int k = 0; k < o.residential_units; ++k) {
    AgentProfile a = make_agent("ru" + std::to_string(k), Role::kResidentialUnit, h);
    a.params = {{"reservation_price", rng.uniform(0.05, 0.15)},
                {"reluctance", rng.uniform(5e-4, 5e-3)}};
    a.generation.assign(a.generation.size(), 25.0 * static_cast<double>(rng.between(5, 25)));
    s.agents.push_back(std::move(a));
  }
  for (int k = 0; k < o.sfcs; ++k) {
    AgentProfile a = make_agent("sfc" + std::to_string(k), Role::kSfc, h);
    a.params = {{"bid_price", rng.uniform(0.15, 0.30)}};
    for (double& q : a.load) q = rng.uniform(100.0, 500.0);
    s.agents.push_back(std::move(a));
  }
  validate(s);
  return s;
}

std::vector<std::pair<std::string, std::string>> render_scenario(const Scenario& s) {
  validate(s);
  std::vector<std::pair<std::string, std::string>> files(1);
  const auto f = [](double v) { return csv::format(v); };
  std::string cfg = "# gridswap scenario\n";
  cfg += "mechanism = " + std::string(to_string(s.mechanism)) + "\n";
  cfg += "horizon = " + std::to_string(s.horizon) + "\n";
  cfg += "slot_minutes = " + std::to_string(s.slot_minutes) + "\n";
  cfg += "seed = " + std::to_string(s.seed) + "\n";
  cfg += "tariff.wholesale = " + f(s.tariff.wholesale) + "\n";
  cfg += "tariff.retail = " + f(s.tariff.retail) + "\n";
  cfg += "margin.min = " + f(s.margin_min) + "\n";
  cfg += "margin.max = " + f(s.margin_max) + "\n";
  cfg += std::string("pricing = ") +
         (s.pricing == market::PricingRule::kMidpoint ? "midpoint" : "marginal_bid") + "\n";
  cfg += "coalition.samples = " + std::to_string(s.coalition_samples) + "\n";
  cfg += "ev.eta = " + f(s.ev.eta) + "\n";
  cfg += "ev.eps = " + f(s.ev.eps) + "\n";
  cfg += "ev.max_iter = " + std::to_string(s.ev.max_iter) + "\n";
  cfg += "ev.min_fraction = " + f(s.ev.min_fraction) + "\n";
  cfg += "hybrid.eta = " + f(s.hybrid.eta) + "\n";
  if (s.hybrid.sell_out) cfg += "hybrid.sell_out = " + f(*s.hybrid.sell_out) + "\n";
  if (s.hybrid.buy_back) cfg += "hybrid.buy_back = " + f(*s.hybrid.buy_back) + "\n";
  cfg += std::string("storage.rule = ") +
         (s.storage_rule == storage::BurdenRule::kEqual ? "equal" : "proportional") + "\n";
  for (const AgentProfile& a : s.agents) {
    const std::string file = a.id + ".csv";
    cfg += "agent." + a.id + " = " + std::string(to_string(a.role)) + ", " + file + "\n";
    for (const auto& [name, value] : a.params) {
      cfg += "param." + a.id + "." + name + " = " + f(value) + "\n";
    }
    std::string series = "slot_index,load_kwh,gen_kwh\n";
    for (std::size_t t = 0; t < a.load.size(); ++t) {
      series += std::to_string(t) + "," + f(a.load[t]) + "," + f(a.generation[t]) + "\n";
    }
    files.emplace_back(file, std::move(series));
  }
  files[0] = {"scenario.cfg", std::move(cfg)};
  return files;
}

void write_scenario(const Scenario& s, const std::filesystem::path& dir) {
  const auto files = render_scenario(s);
  std::filesystem::create_directories(dir);
  for (const auto& [name, content] : files) csv::write_file(dir / name, content);
}

}  // namespace gridswap::scenario
