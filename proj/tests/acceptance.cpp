// End-to-end acceptance run: one PASS/FAIL line per criterion.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "spinann/benchmark.hpp"
#include "spinann/config.hpp"
#include "spinann/crossbar.hpp"
#include "spinann/device.hpp"
#include "spinann/errors.hpp"
#include "spinann/network.hpp"
#include "spinann/trainer.hpp"
#include "support.hpp"

using namespace spinann;

namespace {

// Tolerances.
constexpr double kResistanceTol = 0.01;        // vs. 2330 / 1079 ohm
constexpr double kResistanceBand = 0.15;       // vs. ~1 k / ~2.5 k ohm
constexpr double kRationalTol = 1e-10;         // relative to C
constexpr double kVelocityRefTol = 0.10;       // 60 m/s reference
constexpr double kVoltageTol = 0.02;           // V_min / V_max
constexpr double kNeuronEnergyLo = 3.4e-15, kNeuronEnergyHi = 4.1e-15;
constexpr double kSystemEnergyLo = 325e-15, kSystemEnergyHi = 1300e-15;
constexpr double kSystemRuntime = 1.0;         // s, one recognition
constexpr double kCrossbarTol = 1e-12;
constexpr double kMonteCarloPass = 0.95;
constexpr int kMonteCarloTrials = 100;
constexpr double kBenchmarkRuntime = 60.0;     // s
constexpr int kSigmoidBand = 2;
constexpr double kTableRuntime = 600.0;        // s
constexpr double kGradientTol = 1e-4;

struct Outcome {
  bool pass;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

const DeviceParams& device() { return testing::device(); }

const RunConfig& default_config() {
  static const RunConfig c = load_config(testing::default_config_path());
  return c;
}

struct Trained {
  TrainedNetwork net;
  double seconds;
};

const Trained& benchmark_network() {
  static const Trained t = [] {
    const auto t0 = std::chrono::steady_clock::now();
    const RunConfig& c = default_config();
    const auto f = make_transfer(TransferTag::stt_snn, testing::curve(), c.unit_current);
    TrainedNetwork net =
        train_with_restarts(testing::dataset(), c.n_hidden, f, c.benchmark_training()).network;
    return Trained{std::move(net), seconds_since(t0)};
  }();
  return t;
}

Outcome resistance_range() {
  const auto& g = device().geometry;
  const auto& m = device().mtj;
  const double hi = neuron_resistance(g.x_min(), g, m);
  const double lo = neuron_resistance(g.x_max(), g, m);
  // Parallel-region oracle.
  const double hi_oracle =
      1.0 / (g.width * (g.dw_length / m.ra_dw + (g.length - g.dw_length) / m.ra_ap));
  const double lo_oracle =
      1.0 / (g.width * ((g.length - g.dw_length) / m.ra_p + g.dw_length / m.ra_dw));
  const bool ok = std::abs(hi / 2330.0 - 1.0) <= kResistanceTol &&
                  std::abs(lo / 1079.0 - 1.0) <= kResistanceTol &&
                  std::abs(hi / hi_oracle - 1.0) <= 1e-12 &&
                  std::abs(lo / lo_oracle - 1.0) <= 1e-12 &&
                  std::abs(hi / 2500.0 - 1.0) <= kResistanceBand &&
                  std::abs(lo / 1000.0 - 1.0) <= kResistanceBand;
  return {ok, fmt("R(x_min)=%.1f ohm, R(x_max)=%.1f ohm", hi, lo)};
}

Outcome rational_form() {
  const auto& g = device().geometry;
  const auto& m = device().mtj;
  const auto k = rational_coefficients(g, m);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(g.x_min(), g.x_max());
  double worst = 0.0;
  for (int n = 0; n < 1000; ++n) {
    const double x = u(rng);
    const double p_len = x - 0.5 * g.dw_length, ap_len = g.length - x - 0.5 * g.dw_length;
    const double r = 1.0 / (g.width * (p_len / m.ra_p + g.dw_length / m.ra_dw + ap_len / m.ra_ap));
    worst = std::max(worst, std::abs((k.a / r - k.c) - k.b * x) / std::abs(k.c));
    worst = std::max(worst, std::abs(neuron_resistance(x, g, m) / r - 1.0));
  }
  return {worst <= kRationalTol, fmt("max residual %.2e over 1000 positions", worst)};
}

Outcome velocity_calibration() {
  const auto& t = device().velocity;
  bool exact = t.anchors().size() >= 4;
  for (const auto& a : t.anchors()) exact = exact && t.velocity(a.j) == a.v;
  bool zero = t.j_th() == 6e11;
  for (int n = 0; n <= 60; ++n) zero = zero && t.velocity(6e11 * n / 60.0) == 0.0;
  const VelocityAnchor* ref = nullptr;
  for (const auto& a : t.anchors()) {
    if (!ref || std::abs(a.v - 60.0) < std::abs(ref->v - 60.0)) ref = &a;
  }
  const bool near = std::abs(t.velocity(ref->j) / 60.0 - 1.0) <= kVelocityRefTol;
  return {exact && zero && near,
          fmt("%zu anchors, v(%.2g A/m^2)=%.1f m/s", t.anchors().size(), ref->j, t.velocity(ref->j))};
}

Outcome transfer_shape() {
  const auto& d = device();
  const double th1 = threshold_low(d), th2 = threshold_high(d, 1e-9);
  const double v_min = output_voltage_min(d), v_max = output_voltage_max(d);
  bool ok = std::abs(th1 / 24e-6 - 1.0) <= 1e-12;
  ok = ok && d.velocity.velocity(th2 / d.geometry.cross_section()) >= 83.0 - 1e-9;
  double prev = 0.0;
  for (int n = 0; n <= 2000; ++n) {
    const double i = 60e-6 * n / 2000.0;
    const double v = transfer(i, 1e-9, d);
    if (i < th1) ok = ok && v == v_min;
    if (i >= th2) ok = ok && std::abs(v / v_max - 1.0) <= 1e-12;
    ok = ok && v >= prev;
    prev = v;
  }
  ok = ok && std::abs(v_min / 51.8e-3 - 1.0) <= kVoltageTol &&
       std::abs(v_max / 69.9e-3 - 1.0) <= kVoltageTol;
  return {ok, fmt("th1=%.2f uA, th2=%.3f uA, V_min=%.2f mV, V_max=%.2f mV", th1 * 1e6, th2 * 1e6,
                  v_min * 1e3, v_max * 1e3)};
}

Outcome neuron_energy_check() {
  const auto e = neuron_energy(40e-6, 1e-9, 25e-6, 1e-9, 50e-6, 1e-9, 300.0, 0.1);
  const double t = e.neuron_total();
  return {t >= kNeuronEnergyLo && t <= kNeuronEnergyHi, fmt("%.3f fJ per neuron", t * 1e15)};
}

Outcome system_energy() {
  const Network hw(benchmark_network().net, device(), default_config().network);
  const auto t0 = std::chrono::steady_clock::now();
  const auto r = hw.forward(testing::dataset().features.row(0));
  const double dt = seconds_since(t0);
  const auto& e = r.energy;
  const double sum =
      e.neuron_program + e.neuron_sense + e.neuron_reset + e.crossbar_static + e.dtcs_static;
  const bool consistent = std::abs(sum - e.total()) <= 1e-12 * e.total() &&
                          std::min({e.neuron_program, e.neuron_sense, e.neuron_reset,
                                    e.crossbar_static, e.dtcs_static}) >= 0.0 &&
                          neuron_count_energy(hw).neuron_total() <= e.total();
  const bool ok = consistent && e.total() >= kSystemEnergyLo && e.total() <= kSystemEnergyHi &&
                  dt < kSystemRuntime;
  return {ok, fmt("%.1f fJ for letter A (neurons %.1f, crossbar %.1f, dtcs %.1f), %.3f s",
                  e.total() * 1e15, e.neuron_total() * 1e15, e.crossbar_static * 1e15,
                  e.dtcs_static * 1e15, dt)};
}

Outcome crossbar_oracle() {
  const ConductanceRange range;
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> w(-1.0, 1.0), cur(0.0, 2e-6);
  double worst = 0.0, superposition = 0.0;
  for (int n = 0; n < 100; ++n) {
    Matrix m(8, 4);
    for (double& v : m.data()) v = w(rng);
    const auto a = map_weights(m, range).array;
    std::vector<double> ip(8), im(8), bp(8), bm(8), sp(8), sm(8);
    for (std::size_t i = 0; i < 8; ++i) {
      ip[i] = cur(rng);
      im[i] = cur(rng);
      bp[i] = cur(rng);
      bm[i] = cur(rng);
      sp[i] = ip[i] + bp[i];
      sm[i] = im[i] + bm[i];
    }
    const auto got = weighted_sum(a, ip, im);
    // Dense oracle: each bar's current divides over all of its cells.
    std::vector<double> want(4, 0.0);
    for (std::size_t i = 0; i < 8; ++i) {
      double tp = 0.0, tm = 0.0;
      for (std::size_t j = 0; j < 4; ++j) {
        tp += a.g_plus()(i, j);
        tm += a.g_minus()(i, j);
      }
      for (std::size_t j = 0; j < a.dummy_cols(); ++j) {
        tp += a.dummy_plus()(i, j);
        tm += a.dummy_minus()(i, j);
      }
      for (std::size_t j = 0; j < 4; ++j) {
        want[j] += ip[i] * a.g_plus()(i, j) / tp - im[i] * a.g_minus()(i, j) / tm;
      }
    }
    double scale = 0.0;
    for (double v : want) scale = std::max(scale, std::abs(v));
    for (std::size_t j = 0; j < 4; ++j) worst = std::max(worst, std::abs(got[j] - want[j]) / scale);
    const auto gb = weighted_sum(a, bp, bm);
    const auto gs = weighted_sum(a, sp, sm);
    for (std::size_t j = 0; j < 4; ++j) {
      superposition = std::max(superposition, std::abs(gs[j] - got[j] - gb[j]) / scale);
    }
  }
  return {worst <= kCrossbarTol && superposition <= kCrossbarTol,
          fmt("max relative error %.2e, superposition %.2e", worst, superposition)};
}

Outcome benchmark_accuracy() {
  const auto t0 = std::chrono::steady_clock::now();
  const Trained& trained = benchmark_network();
  const Network hw(trained.net, device(), default_config().network);
  const auto e = evaluate(hw, testing::dataset());
  bool diagonal = true;
  for (std::size_t i = 0; i < e.normalized.rows(); ++i) {
    for (std::size_t j = 0; j < e.normalized.cols(); ++j) {
      if (j != i && e.normalized(i, j) >= e.normalized(i, i)) diagonal = false;
    }
  }
  const auto mc = monte_carlo(hw, testing::dataset(), kMonteCarloTrials,
                              default_config().network.variation_sigma, default_config().mc_seed);
  // Training is shared with the energy check; count it here.
  const double dt = seconds_since(t0) + trained.seconds;
  const bool ok = e.correct == 26 && diagonal && mc.fraction_fully_correct >= kMonteCarloPass &&
                  dt < kBenchmarkRuntime;
  return {ok, fmt("nominal %d/26, min margin %.2f mV; sigma=%.2f: %d/%d trials fully correct; %.1f s",
                  e.correct, e.min_margin * 1e3, mc.sigma, mc.fully_correct, mc.trials, dt)};
}

Outcome table_ordering() {
  const auto t0 = std::chrono::steady_clock::now();
  const TrainConfig cfg = default_config().search_training();
  auto count = [&](TransferTag tag) {
    const auto f = make_transfer(tag, testing::curve(), default_config().unit_current, cfg.step_slope);
    try {
      return static_cast<int>(min_hidden_search(testing::dataset(), f, cfg).n_hidden);
    } catch (const SearchExhaustedError&) {
      return cfg.max_hidden + 1;
    }
  };
  const int step = count(TransferTag::step);
  const int stt = count(TransferTag::stt_snn);
  const int sig = count(TransferTag::sigmoid);
  const double dt = seconds_since(t0);
  return {step > stt && stt <= sig + kSigmoidBand && dt < kTableRuntime,
          fmt("step %d, stt_snn %d, sigmoid %d; %.0f s", step, stt, sig, dt)};
}

Outcome gradient_check() {
  const auto f = testing::stt();
  const auto& c = *testing::curve();
  double worst = 0.0;
  // Smooth region: interiors of the interpolation segments between th1 and th2.
  for (std::size_t k = 0; k + 1 < c.samples().size(); ++k) {
    for (double frac : {0.25, 0.5, 0.75}) {
      const double z = (c.th1() + (k + frac) * c.spacing()) / f.unit_current();
      const double h = 1e-3 * c.spacing() / f.unit_current();
      const double fd = (f(z + h) - f(z - h)) / (2.0 * h);
      if (fd == 0.0) continue;
      worst = std::max(worst, std::abs(f.derivative(z) - fd) / std::abs(fd));
    }
  }
  return {worst <= kGradientTol, fmt("max relative deviation %.2e over %zu segments", worst,
                                     c.samples().size() - 1)};
}

Outcome cli_determinism() {
  const std::vector<std::string> commands = {
      "sweep-transfer",
      "sweep-transfer --vs-position",
      "sweep-dtcs",
      "train",
      "map --weights {w} --sigma 0.05",
      "infer --weights {w}",
      "infer --weights {w} --letter A",
      "--format json infer --weights {w} --letter Q",
      "montecarlo --weights {w}",
      "table2",
      "energy --weights {w}",
  };
  const auto root = testing::scratch_dir("acceptance-determinism");
  const auto weights = root / "weights.json";
  const std::string base = testing::cli_path() + " --config " +
                           testing::fast_config_path().string() + " --deterministic";
  if (testing::run(base + " --out " + root.string() + " train > /dev/null") != 0) {
    return {false, "could not produce reference weights"};
  }
  int compared = 0;
  for (std::size_t n = 0; n < commands.size(); ++n) {
    std::string cmd = commands[n];
    if (auto p = cmd.find("{w}"); p != std::string::npos) cmd.replace(p, 3, weights.string());
    std::vector<std::filesystem::path> dirs;
    for (int run = 0; run < 2; ++run) {
      // Both runs write to the same directory so echoed paths match.
      const auto work = root / "work";
      std::filesystem::remove_all(work);
      std::filesystem::create_directories(work);
      const std::string line = base + " --out " + work.string() + " " + cmd + " > " +
                               (work / "stdout.txt").string() + " 2>&1";
      if (testing::run(line) != 0) return {false, "command failed: " + cmd};
      const auto dir = root / ("cmd" + std::to_string(n) + "_" + std::to_string(run));
      std::filesystem::remove_all(dir);
      std::filesystem::rename(work, dir);
      dirs.push_back(dir);
    }
    for (const auto& entry : std::filesystem::directory_iterator(dirs[0])) {
      const auto other = dirs[1] / entry.path().filename();
      if (testing::read_file(entry.path()) != testing::read_file(other)) {
        return {false, "differs: " + cmd + " -> " + entry.path().filename().string()};
      }
      ++compared;
    }
  }
  return {true, fmt("%zu commands, %d output files byte-identical", commands.size(), compared)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"resistance-range", resistance_range},
      {"rational-form", rational_form},
      {"velocity-calibration", velocity_calibration},
      {"transfer-shape", transfer_shape},
      {"neuron-energy", neuron_energy_check},
      {"system-energy", system_energy},
      {"crossbar-oracle", crossbar_oracle},
      {"benchmark-accuracy", benchmark_accuracy},
      {"table2-ordering", table_ordering},
      {"gradient-check", gradient_check},
      {"cli-determinism", cli_determinism},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed,
              criteria.size());
  return failed == 0 ? 0 : 1;
}
