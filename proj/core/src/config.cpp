#include "tain/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

#include "tain/error.hpp"

namespace tain {

RunConfig RunConfig::toy() {
  RunConfig c;
  c.model = ModelConfig::toy();
  c.augment.crop_h = 64;
  c.augment.crop_w = 64;
  return c;
}

void RunConfig::validate() const {
  model.validate();
  train.validate();
  augment.validate();
}

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value, const char* expected) {
  throw ConfigError("config key '" + std::string(key) + "': expected " + expected + ", got '" + std::string(value) +
                    "'");
}

bool parse_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  bad_value(key, v, "a boolean");
}

template <typename U>
U parse_number(std::string_view key, std::string_view v) {
  U out{};
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size()) {
    bad_value(key, v, std::is_floating_point_v<U> ? "a number" : "a non-negative integer");
  }
  return out;
}

std::string format(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

struct Field {
  const char* key;
  std::function<void(RunConfig&, std::string_view key, std::string_view value)> set;
  std::function<std::string(const RunConfig&)> get;
};

#define TAIN_FIELD_SIZE(name, member)                                                                       \
  Field {                                                                                                   \
    name, [](RunConfig& c, std::string_view k, std::string_view v) { c.member = parse_number<std::size_t>(k, v); }, \
        [](const RunConfig& c) { return std::to_string(c.member); }                                        \
  }
#define TAIN_FIELD_U64(name, member)                                                                           \
  Field {                                                                                                      \
    name, [](RunConfig& c, std::string_view k, std::string_view v) { c.member = parse_number<std::uint64_t>(k, v); }, \
        [](const RunConfig& c) { return std::to_string(c.member); }                                           \
  }
#define TAIN_FIELD_DOUBLE(name, member)                                                                    \
  Field {                                                                                                  \
    name, [](RunConfig& c, std::string_view k, std::string_view v) { c.member = parse_number<double>(k, v); }, \
        [](const RunConfig& c) { return format(c.member); }                                               \
  }
#define TAIN_FIELD_BOOL(name, member)                                                             \
  Field {                                                                                         \
    name, [](RunConfig& c, std::string_view k, std::string_view v) { c.member = parse_bool(k, v); }, \
        [](const RunConfig& c) { return std::string(c.member ? "true" : "false"); }              \
  }

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      TAIN_FIELD_SIZE("model.s", model.s),
      TAIN_FIELD_SIZE("model.d", model.d),
      TAIN_FIELD_SIZE("model.n_resgroups", model.n_resgroups),
      TAIN_FIELD_SIZE("model.n_resblocks", model.n_resblocks),
      TAIN_FIELD_SIZE("model.ca_reduction", model.ca_reduction),
      TAIN_FIELD_BOOL("model.enable_cs", model.enable_cs),
      TAIN_FIELD_BOOL("model.enable_ia", model.enable_ia),
      TAIN_FIELD_BOOL("model.normalize_qk", model.normalize_qk),
      TAIN_FIELD_BOOL("model.mean_shift", model.mean_shift),
      TAIN_FIELD_U64("model.seed", model.seed),
      TAIN_FIELD_DOUBLE("train.lr", train.lr),
      TAIN_FIELD_DOUBLE("train.beta1", train.beta1),
      TAIN_FIELD_DOUBLE("train.beta2", train.beta2),
      TAIN_FIELD_DOUBLE("train.eps", train.eps),
      TAIN_FIELD_DOUBLE("train.gamma", train.gamma),
      TAIN_FIELD_SIZE("train.batch_size", train.batch_size),
      TAIN_FIELD_SIZE("train.max_steps", train.max_steps),
      TAIN_FIELD_SIZE("train.checkpoint_every", train.checkpoint_every),
      TAIN_FIELD_U64("train.seed", train.seed),
      TAIN_FIELD_DOUBLE("augment.flip_h", augment.flip_h),
      TAIN_FIELD_DOUBLE("augment.flip_v", augment.flip_v),
      TAIN_FIELD_SIZE("augment.crop_h", augment.crop_h),
      TAIN_FIELD_SIZE("augment.crop_w", augment.crop_w),
      TAIN_FIELD_DOUBLE("augment.brightness", augment.brightness),
      TAIN_FIELD_DOUBLE("augment.contrast", augment.contrast),
      TAIN_FIELD_DOUBLE("augment.saturation", augment.saturation),
      TAIN_FIELD_BOOL("augment.occluder.enabled", augment.occluder.enabled),
      TAIN_FIELD_SIZE("augment.occluder.min_size", augment.occluder.min_size),
      TAIN_FIELD_SIZE("augment.occluder.max_size", augment.occluder.max_size),
      TAIN_FIELD_DOUBLE("augment.occluder.probability", augment.occluder.probability),
      TAIN_FIELD_SIZE("augment.occluder.pretrain_steps", augment.occluder.pretrain_steps),
      TAIN_FIELD_U64("augment.seed", augment.seed),
  };
  return table;
}

#undef TAIN_FIELD_SIZE
#undef TAIN_FIELD_U64
#undef TAIN_FIELD_DOUBLE
#undef TAIN_FIELD_BOOL

}  // namespace

void set_config_value(RunConfig& cfg, std::string_view key, std::string_view value) {
  for (const auto& f : fields()) {
    if (key == f.key) {
      f.set(cfg, key, trim(value));
      return;
    }
  }
  throw ConfigError("unknown config key '" + std::string(key) + "'");
}

void apply_override(RunConfig& cfg, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) {
    throw ConfigError("override '" + std::string(assignment) + "': expected key=value");
  }
  set_config_value(cfg, trim(assignment.substr(0, eq)), assignment.substr(eq + 1));
}

RunConfig parse_config(std::string_view text, RunConfig cfg) {
  std::string section;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("config line " + std::to_string(line_no) + ": malformed section header");
      section = std::string(trim(line.substr(1, line.size() - 2)));
      if (section != "model" && section != "train" && section != "augment" && section != "run") {
        throw ConfigError("unknown config section '" + section + "'");
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string_view key = trim(line.substr(0, eq));
    const std::string_view value = trim(line.substr(eq + 1));
    if (section == "run") continue;
    const std::string full = section.empty() ? std::string(key) : section + "." + std::string(key);
    set_config_value(cfg, full, value);
  }
  return cfg;
}

RunConfig load_config_file(const std::filesystem::path& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), std::move(base));
}

std::vector<std::string> config_keys() {
  std::vector<std::string> out;
  for (const auto& f : fields()) out.emplace_back(f.key);
  return out;
}

std::string to_config_text(const RunConfig& cfg, const std::vector<std::pair<std::string, std::string>>& run_info) {
  std::string out;
  std::string section;
  for (const auto& f : fields()) {
    const std::string_view key = f.key;
    const auto dot = key.find('.');
    const std::string sec(key.substr(0, dot));
    if (sec != section) {
      out += (section.empty() ? "[" : "\n[") + sec + "]\n";
      section = sec;
    }
    out += std::string(key.substr(dot + 1)) + " = " + f.get(cfg) + "\n";
  }
  if (!run_info.empty()) {
    out += "\n[run]\n";
    for (const auto& [k, v] : run_info) out += k + " = " + v + "\n";
  }
  return out;
}

}  // namespace tain
