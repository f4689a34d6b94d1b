#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "spinann/axon.hpp"
#include "spinann/benchmark.hpp"
#include "spinann/config.hpp"
#include "spinann/crossbar.hpp"
#include "spinann/device.hpp"
#include "spinann/errors.hpp"
#include "spinann/network.hpp"
#include "spinann/serialize.hpp"
#include "spinann/trainer.hpp"
#include "spinann/transfer.hpp"

namespace fs = std::filesystem;
using namespace spinann;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string format = "csv";
  bool deterministic = false;
  bool error_json = false;
};

struct Context {
  Globals g;
  RunConfig cfg;
  std::string hash;
  fs::path out;

  DeviceParams device() const { return cfg.device(); }
  std::shared_ptr<const SttCurve> curve(const DeviceParams& d) const {
    return std::make_shared<const SttCurve>(SttCurve::from_device(d, cfg.network.schedule.t_program));
  }
};

std::string timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

Context make_context(const Globals& g) {
  Context c;
  c.g = g;
  std::string path = g.config;
  if (path.empty()) {
    if (const char* env = std::getenv("SPIN_ANN_CONFIG")) path = env;
  }
  if (path.empty()) throw UsageError("no config: pass --config PATH or set SPIN_ANN_CONFIG");
  c.cfg = load_config(path);
  if (g.seed) {
    c.cfg.train.seed = *g.seed;
    c.cfg.mc_seed = *g.seed;
  }
  c.hash = config_hash(c.cfg);
  c.out = g.out.empty() ? c.cfg.out_dir : fs::path(g.out);
  return c;
}

fs::path emit_json(const Context& c, const std::string& name, Json j) {
  j["config_hash"] = c.hash;
  if (!c.g.deterministic) j["generated_at"] = timestamp();
  const fs::path file = c.out / (name + ".json");
  write_text(file, j.dump(2) + "\n");
  return file;
}

fs::path emit_table(const Context& c, const std::string& name, const CsvTable& t) {
  if (c.g.format == "json") {
    Json j;
    j["columns"] = t.header();
    Json rows = Json::array();
    for (const auto& r : t.rows()) {
      Json row = Json::object();
      for (std::size_t k = 0; k < r.size(); ++k) row[t.header()[k]] = r[k];
      rows.push_back(std::move(row));
    }
    j["rows"] = std::move(rows);
    return emit_json(c, name, std::move(j));
  }
  std::string text = t.str();
  if (!c.g.deterministic) text = "# generated: " + timestamp() + "\n" + text;
  const fs::path file = c.out / (name + ".csv");
  write_text(file, text);
  return file;
}

void report(const fs::path& file) { std::cout << "wrote " << file.generic_string() << "\n"; }

TrainedNetwork load_weights(const Context& c, const std::string& file, const DeviceParams& d) {
  if (file.empty()) throw UsageError("--weights FILE is required");
  return weights_from_json(read_json(file), c.curve(d));
}

Dataset corpus_dataset(const Context& c, Corpus* keep = nullptr) {
  Corpus corpus = load_corpus(c.cfg.glyph_dir);
  Dataset d = make_dataset(corpus);
  if (keep) *keep = std::move(corpus);
  return d;
}

// --- commands --------------------------------------------------------------

struct SweepTransferOpts {
  int points = 201;
  double i_max_ua = 80.0;
  bool vs_position = false;
};

void cmd_sweep_transfer(const Context& c, const SweepTransferOpts& o) {
  if (o.points < 2) throw UsageError("--points must be at least 2");
  const DeviceParams d = c.device();
  const auto& geo = d.geometry;
  if (o.vs_position) {
    CsvTable t(c.hash, {"x_m", "r_ohm", "v_out_v"});
    for (int k = 0; k < o.points; ++k) {
      const double x = geo.x_min() + geo.travel() * k / (o.points - 1);
      t.add_numbers({x, neuron_resistance(x, geo, d.mtj), output_voltage(x, geo, d.mtj)});
    }
    report(emit_table(c, "sweep_transfer_position", t));
    return;
  }
  const double t_prog = c.cfg.network.schedule.t_program;
  CsvTable t(c.hash, {"i_prog_a", "x_m", "v_out_v"});
  for (int k = 0; k < o.points; ++k) {
    const double i = o.i_max_ua * 1e-6 * k / (o.points - 1);
    NeuronDevice n(d);
    n.reset();
    n.program(i, t_prog);
    const double x = n.state().x;
    t.add_numbers({i, x, n.sense(divider_current(x, geo, d.mtj))});
  }
  std::cout << "th1 = " << format_number(threshold_low(d)) << " A, th2 = "
            << format_number(threshold_high(d, t_prog)) << " A\n";
  report(emit_table(c, "sweep_transfer", t));
}

struct SweepDtcsOpts {
  int points = 101;
  double load_us = 1000.0;
  double full_scale_ua = 20.0;
};

void cmd_sweep_dtcs(const Context& c, const SweepDtcsOpts& o) {
  if (o.points < 2) throw UsageError("--points must be at least 2");
  DtcsParams p = c.cfg.network.dtcs;
  p.k_beta = k_beta_for_current(o.full_scale_ua * 1e-6, p, 1.0);
  const double load = o.load_us * 1e-6;
  CsvTable t(c.hash, {"v_g_v", "i_ideal_a", "i_loaded_a"});
  for (int k = 0; k < o.points; ++k) {
    const double v = p.v_dd * k / (o.points - 1);
    t.add_numbers({v, dtcs_current(v, p), dtcs_current(v, p, load)});
  }
  std::cout << "k_beta = " << format_number(p.k_beta) << " A/V^2\n";
  report(emit_table(c, "sweep_dtcs", t));
}

struct TrainOpts {
  std::string kind = "stt_snn";
  int hidden = 0;
};

void cmd_train(const Context& c, const TrainOpts& o) {
  const TransferTag tag = parse_transfer_tag(o.kind);
  const DeviceParams d = c.device();
  const Dataset data = corpus_dataset(c);
  const TransferFunction f = make_transfer(tag, c.curve(d), c.cfg.unit_current, c.cfg.train.step_slope);
  TrainConfig t = c.cfg.train;
  if (tag == TransferTag::stt_snn) {
    t = c.cfg.benchmark_training();
  } else {
    t.noise_sigma = 0.0;
  }
  const std::size_t h = o.hidden > 0 ? static_cast<std::size_t>(o.hidden) : c.cfg.n_hidden;
  const RestartResult r = train_with_restarts(data, h, f, t);
  const auto& net = r.network;
  std::cout << "kind " << o.kind << ", hidden " << h << ", restart " << r.restart << ", accuracy "
            << format_number(net.accuracy) << ", loss " << format_number(net.loss) << "\n";

  const NetworkConfig* hw = tag == TransferTag::stt_snn ? &c.cfg.network : nullptr;
  report(emit_json(c, "weights", weights_to_json(net, hw, c.hash)));
  CsvTable log(c.hash, {"epoch", "loss", "accuracy"});
  for (const auto& row : net.log) {
    log.add({std::to_string(row.epoch), format_number(row.loss), format_number(row.accuracy)});
  }
  report(emit_table(c, "train_log", log));
}

struct WeightsOpts {
  std::string weights;
};

struct MapOpts {
  std::string weights;
  std::optional<double> sigma;
};

void cmd_map(const Context& c, const MapOpts& o) {
  const DeviceParams d = c.device();
  const TrainedNetwork net = load_weights(c, o.weights, d);
  const Network hw(net, d, c.cfg.network);
  const double sigma = o.sigma.value_or(c.cfg.network.variation_sigma);
  const Network varied = hw.with_variation(sigma, c.cfg.mc_seed);
  Json doc = crossbar_document(hw, &varied, sigma, c.cfg.mc_seed, c.hash);

  // Program every active nominal cell with the ramp/compare write scheme.
  long pulses = 0;
  int cells = 0;
  double energy = 0.0, worst = 0.0;
  for (const Layer* l : {&hw.hidden(), &hw.output()}) {
    for (const Matrix* m : {&l->nominal().g_plus(), &l->nominal().g_minus()}) {
      for (double g : m->data()) {
        if (g <= c.cfg.network.range.g_off) continue;
        const WriteResult w = program_cell(g, c.cfg.write, c.cfg.network.range);
        ++cells;
        pulses += w.pulses;
        energy += w.energy;
        worst = std::max(worst, std::abs(w.achieved_g - g) / g);
      }
    }
  }
  doc["write"] = {{"cells", cells},
                  {"pulses", pulses},
                  {"energy_j", energy},
                  {"max_relative_error", worst}};
  std::cout << "programmed " << cells << " cells with " << pulses << " pulses\n";
  report(emit_json(c, "crossbar", std::move(doc)));
}

struct InferOpts {
  std::string weights;
  std::string letter;
  std::string glyph;
};

void cmd_infer(const Context& c, const InferOpts& o) {
  const DeviceParams d = c.device();
  const TrainedNetwork net = load_weights(c, o.weights, d);
  const Network hw(net, d, c.cfg.network);
  Corpus corpus;
  const Dataset data = corpus_dataset(c, &corpus);

  if (o.letter.empty() && o.glyph.empty()) {
    const Evaluation e = evaluate(hw, data);
    std::vector<std::string> header{"letter"};
    for (int k = 0; k < kLetters; ++k) header.push_back(std::string("O") + std::to_string(k + 1));
    CsvTable m(c.hash, header);
    for (std::size_t i = 0; i < data.size(); ++i) {
      std::vector<std::string> row{std::string(1, static_cast<char>('A' + data.labels[i]))};
      for (double v : e.normalized.row(i)) row.push_back(format_number(v));
      m.add(std::move(row));
    }
    report(emit_table(c, "result_matrix", m));
    Json s;
    s["correct"] = e.correct;
    s["accuracy"] = e.accuracy;
    s["min_margin_v"] = e.min_margin;
    s["predicted"] = e.predicted;
    s["margins_v"] = e.margins;
    s["energy_per_recognition"] = energy_to_json(e.energy);
    std::cout << "correct " << e.correct << "/" << data.size() << ", min margin "
              << format_number(e.min_margin) << " V, energy " << format_number(e.energy.total())
              << " J\n";
    report(emit_json(c, "evaluation", std::move(s)));
    return;
  }

  FeatureVector f{};
  std::string name;
  if (!o.glyph.empty()) {
    const Glyph g = load_glyph(o.glyph, '?');
    f = extract_features(g, corpus.normalization);
    name = fs::path(o.glyph).filename().string();
  } else {
    if (o.letter.size() != 1 || o.letter[0] < 'A' || o.letter[0] > 'Z') {
      throw UsageError("--letter expects one of A..Z");
    }
    f = extract_features(corpus.glyphs[static_cast<std::size_t>(o.letter[0] - 'A')], corpus.normalization);
    name = o.letter;
  }
  const ForwardResult r = hw.forward(f);
  const Readout ro = readout(r.output_voltages);
  const auto bits = threshold_readout(r.output_voltages, c.cfg.inverter_threshold);
  std::cout << name << " -> " << static_cast<char>('A' + ro.label) << " (O" << ro.label + 1
            << "), margin " << format_number(ro.margin) << " V, energy "
            << format_number(r.energy.total()) << " J\n";
  if (c.g.format == "json") {
    Json j;
    j["input"] = name;
    j["label"] = std::string(1, static_cast<char>('A' + ro.label));
    j["winner"] = ro.label + 1;
    j["margin_v"] = ro.margin;
    j["output_voltages_v"] = r.output_voltages;
    j["inverter_bits"] = bits;
    j["hidden_voltages_v"] = r.hidden_voltages;
    j["energy"] = energy_to_json(r.energy);
    report(emit_json(c, "infer", std::move(j)));
    return;
  }
  CsvTable t(c.hash, {"neuron", "v_out_v", "inverter_bit"});
  for (std::size_t k = 0; k < r.output_voltages.size(); ++k) {
    t.add({std::string("O") + std::to_string(k + 1), format_number(r.output_voltages[k]),
           std::to_string(bits[k])});
  }
  report(emit_table(c, "infer", t));
  report(emit_table(c, "infer_energy", energy_csv(r.energy, c.hash)));
}

struct MonteCarloOpts {
  std::string weights;
  int trials = 0;
  std::optional<double> sigma;
};

void cmd_montecarlo(const Context& c, const MonteCarloOpts& o) {
  const DeviceParams d = c.device();
  const TrainedNetwork net = load_weights(c, o.weights, d);
  const Network hw(net, d, c.cfg.network);
  const Dataset data = corpus_dataset(c);
  const int trials = o.trials > 0 ? o.trials : c.cfg.mc_trials;
  const double sigma = o.sigma.value_or(c.cfg.network.variation_sigma);
  const MonteCarloStats s = monte_carlo(hw, data, trials, sigma, c.cfg.mc_seed);
  std::cout << s.fully_correct << "/" << s.trials << " trials fully correct at sigma "
            << format_number(sigma) << "\n";
  Json j;
  j["trials"] = s.trials;
  j["sigma"] = s.sigma;
  j["seed"] = c.cfg.mc_seed;
  j["fully_correct"] = s.fully_correct;
  j["fraction_fully_correct"] = s.fraction_fully_correct;
  j["margin_v"] = {{"min", s.margin_min}, {"mean", s.margin_mean}, {"p5", s.margin_p5},
                   {"p50", s.margin_p50}, {"p95", s.margin_p95}};
  j["trial_min_margin_v"] = s.trial_min_margin;
  report(emit_json(c, "montecarlo", std::move(j)));
  CsvTable t(c.hash, {"letter", "error_rate"});
  for (std::size_t i = 0; i < s.letter_error_rate.size(); ++i) {
    t.add({std::string(1, static_cast<char>('A' + i)), format_number(s.letter_error_rate[i])});
  }
  report(emit_table(c, "montecarlo_letters", t));
}

void cmd_table2(const Context& c) {
  const DeviceParams d = c.device();
  const Dataset data = corpus_dataset(c);
  const TrainConfig t = c.cfg.search_training();
  CsvTable out(c.hash, {"transfer", "min_hidden", "restart", "epochs_run"});
  for (TransferTag tag : {TransferTag::step, TransferTag::sat_linear, TransferTag::sigmoid,
                          TransferTag::stt_snn}) {
    const TransferFunction f = make_transfer(tag, c.curve(d), c.cfg.unit_current, t.step_slope);
    const std::string name(to_string(tag));
    try {
      const HiddenSearchResult r = min_hidden_search(data, f, t);
      out.add({name, std::to_string(r.n_hidden), std::to_string(r.restart),
               std::to_string(r.network.epochs_run)});
      std::cout << name << ": " << r.n_hidden << "\n";
    } catch (const SearchExhaustedError&) {
      out.add({name, "exhausted", "", ""});
      std::cout << name << ": none up to " << t.max_hidden << "\n";
    }
  }
  report(emit_table(c, "table2", out));
}

void cmd_energy(const Context& c, const WeightsOpts& o) {
  const DeviceParams d = c.device();
  const auto& n = c.cfg.network;
  const auto& op = n.operating_point;
  const auto& s = n.schedule;
  const EnergyReport one = neuron_energy(op.i_program, s.t_program, op.i_sense, s.t_sense,
                                         op.i_reset, s.t_reset, d.r_lateral, d.mtj.v_sense);
  const std::size_t neurons = c.cfg.n_hidden + static_cast<std::size_t>(kLetters);
  const EnergyReport sub = neuron_count_energy(neurons, s, op, d);

  CsvTable t(c.hash, {"scope", "component", "energy_j"});
  auto add = [&](const std::string& scope, const EnergyReport& e, bool neuron_only) {
    t.add({scope, "neuron_program", format_number(e.neuron_program)});
    t.add({scope, "neuron_sense", format_number(e.neuron_sense)});
    t.add({scope, "neuron_reset", format_number(e.neuron_reset)});
    if (!neuron_only) {
      t.add({scope, "crossbar_static", format_number(e.crossbar_static)});
      t.add({scope, "dtcs_static", format_number(e.dtcs_static)});
    }
    t.add({scope, "total", format_number(neuron_only ? e.neuron_total() : e.total())});
  };
  add("per_neuron", one, true);
  add("neuron_subtotal_" + std::to_string(neurons), sub, true);
  std::cout << "per-neuron " << format_number(one.neuron_total()) << " J, " << neurons
            << " neurons " << format_number(sub.neuron_total()) << " J\n";
  if (!o.weights.empty()) {
    const TrainedNetwork net = load_weights(c, o.weights, d);
    const Network hw(net, d, n);
    const Evaluation e = evaluate(hw, corpus_dataset(c));
    add("recognition_mean", e.energy, false);
    std::cout << "recognition " << format_number(e.energy.total()) << " J (mean over corpus)\n";
  }
  report(emit_table(c, "energy", t));
}

int fail(const Globals& g, int code, const std::string& kind, const std::string& message) {
  if (g.error_json) {
    Json j;
    j["error"] = kind;
    j["message"] = message;
    j["exit_code"] = code;
    std::cerr << j.dump() << "\n";
  } else {
    std::cerr << "error: " << message << "\n";
  }
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spin-CMOS neural network simulator"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config, "Configuration file (falls back to SPIN_ANN_CONFIG)");
  app.add_option("--seed", g.seed, "Override the training and Monte-Carlo seeds");
  app.add_option("--out", g.out, "Output directory");
  app.add_option("--format", g.format, "Table output format")->check(CLI::IsMember({"csv", "json"}));
  app.add_flag("--deterministic", g.deterministic, "Omit timestamps from outputs");
  app.add_flag("--error-json", g.error_json, "Report errors as JSON on stderr");

  SweepTransferOpts st;
  auto* sweep_transfer = app.add_subcommand("sweep-transfer", "Output voltage vs programming current");
  sweep_transfer->add_option("--points", st.points, "Sample count");
  sweep_transfer->add_option("--i-max-ua", st.i_max_ua, "Largest programming current, uA");
  sweep_transfer->add_flag("--vs-position", st.vs_position, "Sweep domain-wall position instead");

  SweepDtcsOpts sd;
  auto* sweep_dtcs = app.add_subcommand("sweep-dtcs", "DTCS current vs gate voltage");
  sweep_dtcs->add_option("--points", sd.points, "Sample count");
  sweep_dtcs->add_option("--load-us", sd.load_us, "Load conductance, uS");
  sweep_dtcs->add_option("--full-scale-ua", sd.full_scale_ua, "Ideal current at zero gate voltage, uA");

  TrainOpts tr;
  auto* train_cmd = app.add_subcommand("train", "Train the benchmark network");
  train_cmd->add_option("--kind", tr.kind, "Transfer function")
      ->check(CLI::IsMember({"step", "sat_linear", "sigmoid", "stt_snn"}));
  train_cmd->add_option("--hidden", tr.hidden, "Hidden neuron count (default from config)");

  MapOpts mp;
  auto* map_cmd = app.add_subcommand("map", "Map trained weights onto crossbars");
  map_cmd->add_option("--weights", mp.weights, "Weights file")->required();
  map_cmd->add_option("--sigma", mp.sigma, "Variation for the perturbed copy");

  InferOpts in;
  auto* infer_cmd = app.add_subcommand("infer", "Run the hardware network on a glyph or the corpus");
  infer_cmd->add_option("--weights", in.weights, "Weights file")->required();
  auto* letter_opt = infer_cmd->add_option("--letter", in.letter, "Corpus letter A..Z");
  infer_cmd->add_option("--glyph", in.glyph, "16x16 glyph file")->excludes(letter_opt);

  MonteCarloOpts mc;
  auto* mc_cmd = app.add_subcommand("montecarlo", "Conductance-variation Monte-Carlo study");
  mc_cmd->add_option("--weights", mc.weights, "Weights file")->required();
  mc_cmd->add_option("--trials", mc.trials, "Trial count (default from config)");
  mc_cmd->add_option("--sigma", mc.sigma, "Relative conductance sigma (default from config)");

  auto* table2_cmd = app.add_subcommand("table2", "Minimal hidden size per transfer function");

  WeightsOpts en;
  auto* energy_cmd = app.add_subcommand("energy", "Itemized energy report");
  energy_cmd->add_option("--weights", en.weights, "Weights file for a full-recognition estimate");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail(g, kExitUsage, "usage", e.what());
  }

  try {
    const Context c = make_context(g);
    if (*sweep_transfer) cmd_sweep_transfer(c, st);
    if (*sweep_dtcs) cmd_sweep_dtcs(c, sd);
    if (*train_cmd) cmd_train(c, tr);
    if (*map_cmd) cmd_map(c, mp);
    if (*infer_cmd) cmd_infer(c, in);
    if (*mc_cmd) cmd_montecarlo(c, mc);
    if (*table2_cmd) cmd_table2(c);
    if (*energy_cmd) cmd_energy(c, en);
  } catch (const UsageError& e) {
    return fail(g, kExitUsage, "usage", e.what());
  } catch (const ConfigError& e) {
    return fail(g, kExitConfig, e.kind(), e.what());
  } catch (const GlyphError& e) {
    return fail(g, kExitConfig, e.kind(), e.what());
  } catch (const Error& e) {
    return fail(g, kExitRuntime, e.kind(), e.what());
  } catch (const std::exception& e) {
    return fail(g, kExitRuntime, "runtime", e.what());
  }
  return kExitOk;
}
