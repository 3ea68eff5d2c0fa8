#include "rts/harness/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <vector>

#include "rts/map.hpp"
#include "rts/unit_types.hpp"

namespace rts::harness {

namespace pt = boost::property_tree;

namespace {

struct Field {
  std::string section;
  std::string key;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

[[noreturn]] void bad(const Field& f, const std::string& v) {
  throw ConfigError("config: bad value '" + v + "' for " + f.section + "." + f.key);
}

template <class T>
T parse_number(const Field& f, const std::string& v) {
  T out{};
  const char* end = v.data() + v.size();
  auto [p, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || p != end) bad(f, v);
  return out;
}

std::string fmt_double(double d) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", d);
  return buf;
}

template <class T>
Field number(const char* section, const char* key, T RunConfig::*member) {
  Field f{section, key, {}, {}};
  f.set = [f, member](RunConfig& c, const std::string& v) { c.*member = parse_number<T>(f, v); };
  f.get = [member](const RunConfig& c) {
    if constexpr (std::is_floating_point_v<T>) return fmt_double(c.*member);
    else return std::to_string(c.*member);
  };
  return f;
}

template <class T, class S>
Field nested(const char* section, const char* key, S RunConfig::*outer, T S::*member) {
  Field f{section, key, {}, {}};
  f.set = [f, outer, member](RunConfig& c, const std::string& v) { c.*outer.*member = parse_number<T>(f, v); };
  f.get = [outer, member](const RunConfig& c) {
    if constexpr (std::is_floating_point_v<T>) return fmt_double(c.*outer.*member);
    else return std::to_string(c.*outer.*member);
  };
  return f;
}

Field text(const char* section, const char* key, std::string RunConfig::*member) {
  return {section, key, [member](RunConfig& c, const std::string& v) { c.*member = v; },
          [member](const RunConfig& c) { return c.*member; }};
}

const std::vector<Field>& fields() {
  static const std::vector<Field> all = [] {
    std::vector<Field> v;
    v.push_back(number("run", "seed", &RunConfig::seed));
    v.push_back(text("run", "out_dir", &RunConfig::out_dir));
    v.push_back({"run", "protocol",
                 [](RunConfig& c, const std::string& s) { c.protocol = learn::head_from_name(s); },
                 [](const RunConfig& c) { return std::string(learn::name_of(c.protocol)); }});
    v.push_back(number("run", "checkpoint_every", &RunConfig::checkpoint_every));
    v.push_back(number("run", "max_updates", &RunConfig::max_updates));
    v.push_back({"run", "kernels",
                 [](RunConfig& c, const std::string& s) {
                   if (s == "serial") c.kernels = learn::Exec::Serial;
                   else if (s == "parallel") c.kernels = learn::Exec::Parallel;
                   else throw ConfigError("config: kernels must be serial or parallel");
                 },
                 [](const RunConfig& c) { return std::string(c.kernels == learn::Exec::Serial ? "serial" : "parallel"); }});

    v.push_back(text("env", "map", &RunConfig::map));
    v.push_back(text("env", "utt", &RunConfig::utt));
    v.push_back(number("env", "max_ticks", &RunConfig::max_ticks));
    v.push_back({"env", "mask", [](RunConfig& c, const std::string& s) { c.mask = mask_level_from_name(s); },
                 [](const RunConfig& c) { return std::string(name_of(c.mask)); }});
    v.push_back(text("env", "opponents", &RunConfig::opponents));

    using P = learn::PpoConfig;
    v.push_back(nested("ppo", "total_steps", &RunConfig::ppo, &P::total_steps));
    v.push_back(nested("ppo", "envs", &RunConfig::ppo, &P::envs));
    v.push_back(nested("ppo", "steps", &RunConfig::ppo, &P::steps));
    v.push_back(nested("ppo", "minibatches", &RunConfig::ppo, &P::minibatches));
    v.push_back(nested("ppo", "epochs", &RunConfig::ppo, &P::epochs));
    v.push_back(nested("ppo", "gamma", &RunConfig::ppo, &P::gamma));
    v.push_back(nested("ppo", "lambda", &RunConfig::ppo, &P::lambda));
    v.push_back(nested("ppo", "clip", &RunConfig::ppo, &P::clip));
    v.push_back(nested("ppo", "max_grad_norm", &RunConfig::ppo, &P::max_grad_norm));
    v.push_back(nested("ppo", "lr", &RunConfig::ppo, &P::lr));
    v.push_back({"ppo", "anneal_lr",
                 [](RunConfig& c, const std::string& s) {
                   if (s == "true" || s == "1") c.ppo.anneal_lr = true;
                   else if (s == "false" || s == "0") c.ppo.anneal_lr = false;
                   else throw ConfigError("config: anneal_lr must be true or false");
                 },
                 [](const RunConfig& c) { return std::string(c.ppo.anneal_lr ? "true" : "false"); }});
    v.push_back(nested("ppo", "c1", &RunConfig::ppo, &P::c1));
    v.push_back(nested("ppo", "c2", &RunConfig::ppo, &P::c2));
    v.push_back(nested("ppo", "adam_eps", &RunConfig::ppo, &P::adam_eps));
    v.push_back({"ppo", "variant",
                 [](RunConfig& c, const std::string& s) {
                   if (s == "canonical") c.ppo.variant = learn::MaskVariant::Canonical;
                   else if (s == "naive") c.ppo.variant = learn::MaskVariant::Naive;
                   else throw ConfigError("config: variant must be canonical or naive");
                 },
                 [](const RunConfig& c) {
                   return std::string(c.ppo.variant == learn::MaskVariant::Canonical ? "canonical" : "naive");
                 }});

    v.push_back(number("network", "hidden1", &RunConfig::hidden1));
    v.push_back(number("network", "hidden2", &RunConfig::hidden2));

    using W = RewardWeights;
    v.push_back(nested("rewards", "win", &RunConfig::rewards, &W::win));
    v.push_back(nested("rewards", "draw", &RunConfig::rewards, &W::draw));
    v.push_back(nested("rewards", "loss", &RunConfig::rewards, &W::loss));
    v.push_back(nested("rewards", "harvest", &RunConfig::rewards, &W::harvest));
    v.push_back(nested("rewards", "return_resource", &RunConfig::rewards, &W::return_resource));
    v.push_back(nested("rewards", "produce_worker", &RunConfig::rewards, &W::produce_worker));
    v.push_back(nested("rewards", "construct_building", &RunConfig::rewards, &W::construct_building));
    v.push_back(nested("rewards", "valid_attack", &RunConfig::rewards, &W::valid_attack));
    v.push_back(nested("rewards", "produce_combat_unit", &RunConfig::rewards, &W::produce_combat_unit));

    using B = BenchConfig;
    v.push_back(nested("bench", "trials", &RunConfig::bench, &B::trials));
    v.push_back(nested("bench", "engine_ticks", &RunConfig::bench, &B::engine_ticks));
    v.push_back(nested("bench", "pipeline_ticks", &RunConfig::bench, &B::pipeline_ticks));
    v.push_back({"bench", "map", [](RunConfig& c, const std::string& s) { c.bench.map = s; },
                 [](const RunConfig& c) { return c.bench.map; }});
    return v;
  }();
  return all;
}

void validate(const RunConfig& c) {
  c.ppo.validate();
  if (c.max_ticks <= 0) throw ConfigError("config: env.max_ticks must be positive");
  if (c.hidden1 <= 0 || c.hidden2 <= 0) throw ConfigError("config: network sizes must be positive");
  if (c.checkpoint_every < 0 || c.max_updates < 0) throw ConfigError("config: negative update count");
  if (c.bench.trials <= 0 || c.bench.engine_ticks <= 0 || c.bench.pipeline_ticks <= 0) {
    throw ConfigError("config: bench sizes must be positive");
  }
  c.slot_plan();
}

}  // namespace

EnvConfig RunConfig::env_config() const {
  EnvConfig e;
  e.map = resolve_map(map, base_dir);
  if (!utt.empty()) {
    std::filesystem::path p = utt;
    if (!std::filesystem::exists(p) && !base_dir.empty()) p = base_dir / utt;
    e.utt = load_unit_types(p);
  }
  e.max_ticks = max_ticks;
  e.mask = mask;
  e.weights = rewards;
  return e;
}

learn::NetSpec RunConfig::net_spec() const {
  const MapSpec m = resolve_map(map, base_dir);
  return learn::NetSpec{m.h, m.w, protocol, hidden1, hidden2};
}

OpponentSlotPlan RunConfig::slot_plan() const {
  OpponentSlotPlan plan = OpponentSlotPlan::parse(ppo.envs, opponents);
  if (protocol == learn::Head::Uas && plan.self_slots() > 0) throw ConfigError("config: self-play needs gridnet");
  return plan;
}

RunConfig parse_config(std::string_view text) {
  pt::ptree tree;
  std::istringstream in{std::string(text)};
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  std::map<std::string, std::map<std::string, const Field*>> index;
  for (const auto& f : fields()) index[f.section][f.key] = &f;
  RunConfig c;
  for (const auto& [section, body] : tree) {
    auto s = index.find(section);
    if (s == index.end()) throw ConfigError("config: unknown section [" + section + "]");
    if (!body.data().empty()) throw ConfigError("config: key outside any section: " + section);
    for (const auto& [key, node] : body) {
      auto k = s->second.find(key);
      if (k == s->second.end()) throw ConfigError("config: unknown key " + section + "." + key);
      k->second->set(c, node.data());
    }
  }
  validate(c);
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  RunConfig c = parse_config(ss.str());
  c.base_dir = path.parent_path();
  return c;
}

std::string format_config(const RunConfig& c) {
  std::ostringstream os;
  std::string section;
  for (const auto& f : fields()) {
    if (f.section != section) {
      if (!section.empty()) os << '\n';
      section = f.section;
      os << '[' << section << "]\n";
    }
    os << f.key << " = " << f.get(c) << '\n';
  }
  return os.str();
}

MapSpec resolve_map(const std::string& name_or_path, const std::filesystem::path& base_dir) {
  if (name_or_path == "basesWorkers8x8") return bases_workers_8x8();
  if (name_or_path == "basesWorkers16x16") return bases_workers_16x16();
  std::filesystem::path p = name_or_path;
  if (!std::filesystem::exists(p) && !base_dir.empty() && std::filesystem::exists(base_dir / p)) p = base_dir / p;
  if (!std::filesystem::exists(p)) throw ConfigError("map not found: " + name_or_path);
  return load_map(p);
}

}  // namespace rts::harness
