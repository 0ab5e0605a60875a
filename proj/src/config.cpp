#include "dcsgl/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

namespace dcsgl {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <class T>
T parse_number(const std::string& key, const std::string& v) {
  T out{};
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size())
    throw ConfigError("invalid value '" + v + "' for key '" + key + "'");
  return out;
}

template <class Fn>
auto parse_named(const std::string& key, const std::string& v, Fn fn) {
  try {
    return fn(v);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("invalid value '" + v + "' for key '" + key + "'");
  }
}

struct Field {
  const char* key;
  std::function<void(RunConfig&, const std::string&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

#define INT_FIELD(KEY, MEMBER)                                                                          \
  Field {                                                                                               \
    KEY, [](RunConfig& c, const std::string& k, const std::string& v) { c.MEMBER = parse_number<int>(k, v); }, \
        [](const RunConfig& c) { return std::to_string(c.MEMBER); }                                     \
  }
#define DOUBLE_FIELD(KEY, MEMBER)                                                                          \
  Field {                                                                                                  \
    KEY, [](RunConfig& c, const std::string& k, const std::string& v) { c.MEMBER = parse_number<double>(k, v); }, \
        [](const RunConfig& c) { return format_double(c.MEMBER); }                                         \
  }
#define SEED_FIELD(KEY, MEMBER)                                                                                   \
  Field {                                                                                                         \
    KEY, [](RunConfig& c, const std::string& k, const std::string& v) { c.MEMBER = parse_number<std::uint64_t>(k, v); }, \
        [](const RunConfig& c) { return std::to_string(c.MEMBER); }                                               \
  }
#define ENUM_FIELD(KEY, MEMBER, PARSE, NAME)                                                                   \
  Field {                                                                                                      \
    KEY, [](RunConfig& c, const std::string& k, const std::string& v) { c.MEMBER = parse_named(k, v, PARSE); }, \
        [](const RunConfig& c) { return std::string(NAME(c.MEMBER)); }                                         \
  }

const std::vector<Field>& fields() {
  static const std::vector<Field> f = {
      ENUM_FIELD("gen.family", gen.family, parse_family, family_name),
      INT_FIELD("gen.count", gen.count),
      Field{"gen.bias",
            [](RunConfig& c, const std::string& k, const std::string& v) {
              if (v == "balanced")
                c.gen.bias.reset();
              else
                c.gen.bias = parse_number<double>(k, v);
            },
            [](const RunConfig& c) { return c.gen.bias ? format_double(*c.gen.bias) : std::string("balanced"); }},
      ENUM_FIELD("gen.task", gen.task, parse_task, task_name),
      INT_FIELD("gen.base_min", gen.base_min),
      INT_FIELD("gen.base_max", gen.base_max),
      INT_FIELD("gen.feature_dim", gen.feature_dim),
      SEED_FIELD("gen.seed", gen.seed),
      INT_FIELD("train.m", train.m),
      INT_FIELD("train.K", train.K),
      DOUBLE_FIELD("train.lambda", train.lambda),
      DOUBLE_FIELD("train.lr", train.lr),
      Field{"train.lr_alignment",
            [](RunConfig& c, const std::string& k, const std::string& v) {
              if (v == "lr")
                c.train.lr_alignment.reset();
              else
                c.train.lr_alignment = parse_number<double>(k, v);
            },
            [](const RunConfig& c) {
              return c.train.lr_alignment ? format_double(*c.train.lr_alignment) : std::string("lr");
            }},
      ENUM_FIELD("train.optimizer", train.optimizer, parse_optimizer, optimizer_name),
      INT_FIELD("train.epochs", train.epochs),
      INT_FIELD("train.max_epochs", train.max_epochs),
      INT_FIELD("train.patience", train.patience),
      INT_FIELD("train.batch_size", train.batch_size),
      ENUM_FIELD("train.mode", train.mode, parse_mode, mode_name),
      SEED_FIELD("train.seed", train.seed),
      ENUM_FIELD("train.alternation", train.alternation, parse_alternation, alternation_name),
      ENUM_FIELD("train.domain", train.domain, parse_domain, domain_name),
      DOUBLE_FIELD("train.replace_fraction", train.replace_fraction),
      ENUM_FIELD("model.backbone", model.backbone, parse_backbone, backbone_name),
      INT_FIELD("model.num_layers", model.num_layers),
      INT_FIELD("model.hidden_dim", model.hidden_dim),
      INT_FIELD("model.head_hidden", model.head_hidden),
  };
  return f;
}

const Field& find(const std::string& key) {
  for (const auto& f : fields())
    if (key == f.key) return f;
  throw ConfigError("unknown key '" + key + "'");
}

}  // namespace

void RunConfig::set(const std::string& key, const std::string& value) { find(key).set(*this, key, trim(value)); }

std::string RunConfig::get(const std::string& key) const { return find(key).get(*this); }

const std::vector<std::string>& RunConfig::keys() {
  static const std::vector<std::string> k = [] {
    std::vector<std::string> out;
    for (const auto& f : fields()) out.emplace_back(f.key);
    return out;
  }();
  return k;
}

void apply_config(RunConfig& cfg, std::istream& in) {
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    try {
      cfg.set(trim(line.substr(0, eq)), line.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
}

void apply_config_file(RunConfig& cfg, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  apply_config(cfg, in);
}

std::string resolved_config(const RunConfig& cfg) {
  std::string out;
  for (const auto& f : fields()) out += std::string(f.key) + " = " + f.get(cfg) + "\n";
  return out;
}

const char* task_name(Task t) { return t == Task::GraphCls ? "graph" : "node"; }

Task parse_task(const std::string& s) {
  if (s == "graph") return Task::GraphCls;
  if (s == "node") return Task::NodeCls;
  throw std::invalid_argument("unknown task '" + s + "'");
}

const char* optimizer_name(OptimizerKind k) { return k == OptimizerKind::Adam ? "adam" : "sgd"; }

OptimizerKind parse_optimizer(const std::string& s) {
  if (s == "adam") return OptimizerKind::Adam;
  if (s == "sgd") return OptimizerKind::Sgd;
  throw std::invalid_argument("unknown optimizer '" + s + "'");
}

const char* alternation_name(Alternation a) { return a == Alternation::PerBatch ? "per-batch" : "per-epoch"; }

Alternation parse_alternation(const std::string& s) {
  if (s == "per-batch") return Alternation::PerBatch;
  if (s == "per-epoch") return Alternation::PerEpoch;
  throw std::invalid_argument("unknown alternation '" + s + "'");
}

const char* domain_name(OracleDomain d) { return d == OracleDomain::Junction ? "junction" : "marker"; }

OracleDomain parse_domain(const std::string& s) {
  if (s == "junction") return OracleDomain::Junction;
  if (s == "marker") return OracleDomain::Marker;
  throw std::invalid_argument("unknown domain '" + s + "'");
}

std::string format_double(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

}  // namespace dcsgl
