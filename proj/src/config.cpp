#include "spinann/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <vector>

#include "spinann/benchmark.hpp"
#include "spinann/errors.hpp"

namespace spinann {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct Binding {
  std::string key;
  std::function<void(std::string_view)> set;
  std::function<std::string()> get;
};

double parse_number(std::string_view key, std::string_view text) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(v)) {
    throw ConfigError(std::string(key) + ": '" + std::string(text) + "' is not a number");
  }
  return v;
}

template <typename Int>
Int parse_integer(std::string_view key, std::string_view text) {
  Int v{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw ConfigError(std::string(key) + ": '" + std::string(text) + "' is not an integer");
  }
  return v;
}

class Registry {
public:
  explicit Registry(std::filesystem::path base) : base_(std::move(base)) {}

  // Stored value = written value * scale.
  void number(std::string key, double& field, double scale = 1.0) {
    list_.push_back({key, [&field, scale, key](std::string_view t) { field = parse_number(key, t) * scale; },
                     [&field, scale] { return format_double(field / scale); }});
  }
  template <typename Int>
  void integer(std::string key, Int& field) {
    list_.push_back({key, [&field, key](std::string_view t) { field = parse_integer<Int>(key, t); },
                     [&field] { return std::to_string(field); }});
  }
  void boolean(std::string key, bool& field) {
    list_.push_back({key,
                     [&field, key](std::string_view t) {
                       if (t == "true") {
                         field = true;
                       } else if (t == "false") {
                         field = false;
                       } else {
                         throw ConfigError(key + ": expected true or false");
                       }
                     },
                     [&field] { return std::string(field ? "true" : "false"); }});
  }
  void path(std::string key, std::filesystem::path& field) {
    list_.push_back({key,
                     [&field, base = base_](std::string_view t) {
                       std::filesystem::path p{std::string(t)};
                       field = p.is_absolute() ? p : (base / p).lexically_normal();
                     },
                     [&field] { return field.generic_string(); }});
  }

  const std::vector<Binding>& list() const { return list_; }

private:
  std::filesystem::path base_;
  std::vector<Binding> list_;
};

Registry bind(RunConfig& c, const std::filesystem::path& base) {
  Registry r(base);
  r.path("paths.velocity_table", c.velocity_table);
  r.path("paths.glyph_dir", c.glyph_dir);
  r.path("paths.out_dir", c.out_dir);

  r.number("material.damping", c.material.damping);
  r.number("material.anisotropy_j_per_m3", c.material.k_u);
  r.number("material.saturation_magnetization_a_per_m", c.material.m_s);
  r.number("material.exchange_stiffness_j_per_m", c.material.a_ex);
  r.number("material.spin_polarization", c.material.polarization);

  r.number("device.length_nm", c.geometry.length, 1e-9);
  r.number("device.width_nm", c.geometry.width, 1e-9);
  r.number("device.thickness_nm", c.geometry.thickness, 1e-9);
  r.number("device.dw_length_nm", c.geometry.dw_length, 1e-9);
  r.number("device.sense_current_ua", c.sense_current, 1e-6);
  r.number("device.sense_safety_fraction", c.sense_safety_fraction);
  r.number("device.reset_current_ua", c.reset_current, 1e-6);
  r.number("device.r_lateral_ohm", c.r_lateral);

  r.number("mtj.ra_ap_ohm_um2", c.mtj.ra_ap, 1e-12);
  r.number("mtj.ra_p_ohm_um2", c.mtj.ra_p, 1e-12);
  r.number("mtj.ra_dw_ohm_um2", c.mtj.ra_dw, 1e-12);
  r.number("mtj.r_ref_ohm", c.mtj.r_ref);
  r.number("mtj.v_sense_mv", c.mtj.v_sense, 1e-3);
  r.number("mtj.i_crit_vertical_ua", c.mtj.i_crit_vertical, 1e-6);

  auto& n = c.network;
  r.number("schedule.t_program_ns", n.schedule.t_program, 1e-9);
  r.number("schedule.t_sense_ns", n.schedule.t_sense, 1e-9);
  r.number("schedule.t_reset_ns", n.schedule.t_reset, 1e-9);
  r.number("operating.i_program_ua", n.operating_point.i_program, 1e-6);
  r.number("operating.i_sense_ua", n.operating_point.i_sense, 1e-6);
  r.number("operating.i_reset_ua", n.operating_point.i_reset, 1e-6);

  r.number("crossbar.g_min_us", n.range.g_min, 1e-6);
  r.number("crossbar.g_max_us", n.range.g_max, 1e-6);
  r.number("crossbar.g_off_us", n.range.g_off, 1e-6);
  r.integer("crossbar.levels", n.range.levels);
  r.number("crossbar.variation_sigma", n.variation_sigma);

  r.number("write.current_ua", c.write.write_current, 1e-6);
  r.number("write.reference_current_ua", c.write.reference_current, 1e-6);
  r.number("write.ramp_rate_ohm_per_ns", c.write.ramp_rate, 1e9);
  r.number("write.pulse_width_ns", c.write.pulse_width, 1e-9);
  r.number("write.comparator_resolution_ohm", c.write.comparator_resolution);
  r.number("write.initial_resistance_ohm", c.write.initial_resistance);
  r.integer("write.max_pulses", c.write.max_pulses);

  r.number("dtcs.v_dd_v", n.dtcs.v_dd);
  r.number("dtcs.v_t_v", n.dtcs.v_t);
  r.number("dtcs.delta_v_mv", n.dtcs.delta_v, 1e-3);
  r.number("dtcs.utilization", n.utilization);
  r.number("dtcs.unit_current_ua", c.unit_current, 1e-6);

  r.integer("network.n_hidden", c.n_hidden);
  r.integer("network.bias_rows", n.bias_rows);
  r.boolean("network.quantize", n.options.quantize);
  r.boolean("network.ideal_dtcs", n.options.ideal_dtcs);
  r.boolean("network.ideal_neuron", n.options.ideal_neuron);
  r.number("readout.inverter_threshold_mv", c.inverter_threshold, 1e-3);

  auto& t = c.train;
  r.number("train.learning_rate", t.learning_rate);
  r.number("train.momentum", t.momentum);
  r.integer("train.epochs", t.epochs);
  r.integer("train.qat_epochs", t.qat_epochs);
  r.integer("train.anneal_epochs", t.anneal_epochs);
  r.integer("train.selection_trials", t.selection_trials);
  r.integer("train.seed", t.seed);
  r.integer("train.restarts", t.restarts);
  r.number("train.target_accuracy", t.target_accuracy);
  r.number("train.weight_clip", t.weight_clip);
  r.number("train.step_slope", t.step_slope);
  r.number("train.init_spread", t.init_spread);
  r.number("train.noise_sigma", t.noise_sigma);
  r.number("train.logit_scale", t.logit_scale);
  r.boolean("train.hardware_aware", c.hardware_aware);

  r.integer("search.epochs", c.search_epochs);
  r.integer("search.restarts", c.search_restarts);
  r.integer("search.max_hidden", c.search_max_hidden);

  r.integer("montecarlo.trials", c.mc_trials);
  r.integer("montecarlo.seed", c.mc_seed);
  return r;
}

}  // namespace

DeviceParams RunConfig::device() const {
  DeviceParams d(VelocityTable::from_csv(velocity_table));
  d.material = material;
  d.geometry = geometry;
  d.mtj = mtj;
  d.sense_current = sense_current;
  d.sense_safety_fraction = sense_safety_fraction;
  d.reset_current = reset_current;
  d.reset_duration = network.schedule.t_reset;
  d.r_lateral = r_lateral;
  d.validate();
  return d;
}

TrainConfig RunConfig::benchmark_training() const {
  TrainConfig t = train;
  if (hardware_aware) {
    t.load_ratio = hardware_load_ratio(network, unit_current);
    if (network.options.quantize) t.quantization = network.range;
  } else {
    t.noise_sigma = 0.0;
  }
  return t;
}

TrainConfig RunConfig::search_training() const {
  TrainConfig t = train;
  t.epochs = search_epochs;
  t.qat_epochs = 0;
  t.anneal_epochs = 0;
  t.noise_sigma = 0.0;
  t.restarts = search_restarts;
  t.max_hidden = search_max_hidden;
  return t;
}

void RunConfig::validate() const {
  if (velocity_table.empty()) throw ConfigError("paths.velocity_table is required");
  if (glyph_dir.empty()) throw ConfigError("paths.glyph_dir is required");
  if (!std::filesystem::is_regular_file(velocity_table)) {
    throw ConfigError("velocity table not found: " + velocity_table.string());
  }
  if (!std::filesystem::is_directory(glyph_dir)) {
    throw ConfigError("glyph directory not found: " + glyph_dir.string());
  }
  material.validate();
  geometry.validate();
  mtj.validate();
  network.validate();
  write.validate();
  train.validate();
  if (!(unit_current > 0.0)) throw ConfigError("dtcs.unit_current_ua must be positive");
  if (n_hidden < 1) throw ConfigError("network.n_hidden must be at least 1");
  if (search_epochs < 1 || search_restarts < 1 || search_max_hidden < 1) {
    throw ConfigError("search settings must be positive");
  }
  if (mc_trials < 1) throw ConfigError("montecarlo.trials must be at least 1");
}

RunConfig parse_config(std::string_view text, const std::filesystem::path& base_dir) {
  RunConfig cfg;
  Registry reg = bind(cfg, base_dir);
  std::map<std::string, const Binding*, std::less<>> by_key;
  for (const auto& b : reg.list()) by_key.emplace(b.key, &b);

  std::map<std::string, int, std::less<>> seen;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    }
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    const auto it = by_key.find(key);
    if (it == by_key.end()) {
      throw ConfigError("line " + std::to_string(line_no) + ": unknown key '" + std::string(key) + "'");
    }
    if (auto [pos, fresh] = seen.emplace(std::string(key), line_no); !fresh) {
      throw ConfigError("line " + std::to_string(line_no) + ": '" + std::string(key) +
                        "' already set on line " + std::to_string(pos->second));
    }
    if (value.empty()) {
      throw ConfigError("line " + std::to_string(line_no) + ": '" + std::string(key) + "' has no value");
    }
    it->second->set(value);
  }
  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open config file " + file.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), file.parent_path().empty() ? std::filesystem::path(".") : file.parent_path());
}

std::string canonical_config(const RunConfig& cfg) {
  RunConfig copy = cfg;
  Registry reg = bind(copy, {});
  std::string out;
  for (const auto& b : reg.list()) {
    // Paths contribute their file name only, so the hash does not depend on
    // where the checkout lives.
    std::string v = b.get();
    if (b.key.rfind("paths.", 0) == 0) v = std::filesystem::path(v).filename().generic_string();
    out += b.key + " = " + v + "\n";
  }
  return out;
}

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string config_hash(const RunConfig& cfg) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(canonical_config(cfg))));
  return buf;
}

}  // namespace spinann
