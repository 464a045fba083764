#include "slotbench/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "slotbench/sha256.hpp"

namespace slotbench {

namespace {

struct KeyDef {
  const char* key;
  const char* def;
};

// The full key schema with defaults. K, iteration counts and widths beyond
// what the sprite benchmark needs are engineering defaults, not tuned
// values; see README.
const KeyDef kSchema[] = {
    {"seed", "0"},
    {"repr.kind", "slot"},  // slot | dense | global

    {"enc.patch", "8"},
    {"enc.d_feat", "64"},
    {"enc.c1", "16"},
    {"enc.c2", "32"},
    {"enc.c3", "48"},

    {"slot.k", "6"},
    {"slot.d_slot", "64"},
    {"slot.d_attn", "64"},
    {"slot.iters", "3"},
    {"slot.mlp_hidden", "128"},
    {"slot.epsilon", "1e-8"},

    {"temporal.heads", "4"},
    {"temporal.ffn_hidden", "128"},
    {"temporal.bptt", "4"},

    {"dec.d_pos", "32"},
    {"dec.hidden", "64"},

    {"policy.d_tok", "128"},
    {"policy.layers", "4"},
    {"policy.heads", "4"},
    {"policy.ffn_hidden", "256"},
    {"policy.head_hidden", "128"},
    {"policy.t_hist", "2"},

    {"train.lr", "3e-4"},
    {"train.weight_decay", "1e-4"},
    {"train.warmup_frac", "0.05"},

    {"pretrain.steps", "1500"},
    {"pretrain.batch", "32"},
    {"pretrain.frames", "2000"},
    {"pretrain.video", "false"},
    {"pretrain.clip_len", "4"},
    {"pretrain.features", ""},  // optional Feature Archive replacing the env frame source

    {"bc.steps", "1200"},
    {"bc.batch", "64"},

    {"demos.per_task", "50"},

    {"eval.rollouts", "50"},
    {"eval.seeds", "3"},
    {"eval.jobs", "1"},

    {"shift.distractors", "3"},
    {"shift.texture_id", "100"},
    {"shift.brightness", "0.6"},
    {"shift.gradient", "0.8"},
    {"shift.gradient_dir", "0.9"},  // radians
};

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

RunConfig::RunConfig() {
  for (const auto& kv : kSchema) values_[kv.key] = kv.def;
}

RunConfig RunConfig::from_file(const std::string& path) {
  RunConfig c;
  c.load_file(path);
  return c;
}

void RunConfig::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash_pos = line.find('#');
    if (hash_pos != std::string::npos) line = line.substr(0, hash_pos);
    line = trim(line);
    if (line.empty()) continue;
    try {
      set_line(line);
    } catch (const ConfigError& e) {
      throw ConfigError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
}

void RunConfig::set_line(const std::string& line) {
  const std::size_t eq = line.find('=');
  if (eq == std::string::npos) throw ConfigError("expected `key = value`, got `" + line + "`");
  set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
}

void RunConfig::set(const std::string& key, const std::string& value) {
  require_known(key);
  values_[key] = value;
}

void RunConfig::require_known(const std::string& key) const {
  if (values_.find(key) == values_.end()) throw ConfigError("unknown key `" + key + "`");
}

bool RunConfig::has(const std::string& key) const { return values_.count(key) != 0; }

const std::string& RunConfig::get_str(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("unknown key `" + key + "`");
  return it->second;
}

std::int64_t RunConfig::get_int(const std::string& key) const {
  const std::string& s = get_str(key);
  std::size_t used = 0;
  std::int64_t v = 0;
  try {
    v = std::stoll(s, &used);
  } catch (const std::exception&) {
    throw ConfigError("key `" + key + "` expects an integer, got `" + s + "`");
  }
  if (used != s.size()) throw ConfigError("key `" + key + "` expects an integer, got `" + s + "`");
  return v;
}

double RunConfig::get_double(const std::string& key) const {
  const std::string& s = get_str(key);
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw ConfigError("key `" + key + "` expects a number, got `" + s + "`");
  }
  if (used != s.size()) throw ConfigError("key `" + key + "` expects a number, got `" + s + "`");
  return v;
}

bool RunConfig::get_bool(const std::string& key) const {
  const std::string& s = get_str(key);
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw ConfigError("key `" + key + "` expects a boolean, got `" + s + "`");
}

std::string RunConfig::effective_text() const {
  std::ostringstream out;
  for (const auto& [k, v] : values_) out << k << " = " << v << "\n";
  return out.str();
}

std::array<std::uint8_t, 32> RunConfig::hash() const { return Sha256::digest(effective_text()); }

}  // namespace slotbench
