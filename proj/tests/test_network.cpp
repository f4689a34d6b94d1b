#include <doctest.h>

#include <cmath>
#include <random>

#include "spinann/benchmark.hpp"
#include "spinann/errors.hpp"
#include "spinann/network.hpp"
#include "support.hpp"

using namespace spinann;
using testing::dataset;
using testing::device;

namespace {

NetworkConfig ideal_config(bool ideal_dtcs) {
  NetworkConfig cfg = testing::fast_config().network;
  cfg.options.quantize = false;
  cfg.options.ideal_dtcs = ideal_dtcs;
  cfg.options.ideal_neuron = true;
  return cfg;
}

TrainedNetwork float_network(double load_ratio) {
  TrainConfig t;
  t.epochs = 400;
  t.load_ratio = load_ratio;
  return train(dataset(), 5, testing::stt(), t);
}

double normalized(double v, const SttCurve& c) { return (v - c.v_min()) / (c.v_max() - c.v_min()); }

void check_equivalence(const TrainedNetwork& net, const NetworkConfig& cfg, double tol) {
  const Network hw(net, device(), cfg);
  for (std::size_t n = 0; n < dataset().size(); ++n) {
    const auto x = dataset().features.row(n);
    const auto want_hidden = net.hidden(x);
    const auto want = net.forward(x);
    const auto got = hw.forward(x);
    for (std::size_t k = 0; k < want_hidden.size(); ++k) {
      CHECK(std::abs(normalized(got.hidden_voltages[k], hw.curve()) - want_hidden[k]) <= tol);
    }
    for (std::size_t k = 0; k < want.size(); ++k) {
      CHECK(std::abs(normalized(got.output_voltages[k], hw.curve()) - want[k]) <= tol);
    }
  }
}

}  // namespace

TEST_SUITE("network") {

TEST_CASE("neuron bank enforces the clock phases") {
  NeuronBank bank(device(), 3);
  std::vector<double> v;
  const std::vector<double> currents(3, 30e-6);
  CHECK(bank.phase() == Phase::idle);
  CHECK_THROWS_AS(bank.program(currents, 1e-9), PhaseError);
  CHECK_THROWS_AS(bank.sense_all(1e-9, v), PhaseError);
  CHECK_THROWS_AS(bank.enter(Phase::program), PhaseError);
  bank.enter(Phase::reset);
  CHECK(bank.reset_all() > 0.0);
  CHECK_THROWS_AS(bank.sense_all(1e-9, v), PhaseError);
  CHECK_THROWS_AS(bank.enter(Phase::sense), PhaseError);
  bank.enter(Phase::program);
  CHECK_THROWS_AS(bank.reset_all(), PhaseError);
  CHECK_THROWS_AS(bank.program(std::vector<double>(2, 0.0), 1e-9), DimensionError);
  CHECK(bank.program(currents, 1e-9) > 0.0);
  CHECK_THROWS_AS(bank.enter(Phase::reset), PhaseError);
  bank.enter(Phase::sense);
  CHECK_THROWS_AS(bank.program(currents, 1e-9), PhaseError);
  CHECK(bank.sense_all(1e-9, v) > 0.0);
  CHECK(v.size() == 3);
  bank.enter(Phase::reset);
  bank.enter(Phase::program);
  bank.enter(Phase::sense);
  bank.enter(Phase::idle);
}

TEST_CASE("schedule and configuration validation") {
  PhaseSchedule s;
  CHECK_NOTHROW(s.validate());
  s.t_sense = 0.0;
  CHECK_THROWS_AS(s.validate(), ConfigError);
  NetworkConfig cfg;
  cfg.bias_rows = -1;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = NetworkConfig{};
  cfg.utilization = 1.5;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);

  TrainedNetwork sig = float_network(0.0);
  sig.transfer = TransferFunction::sigmoid();
  CHECK_THROWS_AS(Network(sig, device(), NetworkConfig{}), ConfigError);
}

TEST_CASE("zero features with zero bias leave every neuron at V_min") {
  TrainedNetwork net;
  net.transfer = testing::stt();
  net.w1 = Matrix(kFeatureCount + 1, 5, 0.0);
  net.w2 = Matrix(6, kLetters, 0.0);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    for (std::size_t j = 0; j < 5; ++j) net.w1(i, j) = u(rng);
  }
  for (std::size_t i = 0; i < 5; ++i) {
    for (std::size_t j = 0; j < static_cast<std::size_t>(kLetters); ++j) net.w2(i, j) = u(rng);
  }
  const Network hw(net, device(), NetworkConfig{});
  const std::vector<double> zero(kFeatureCount, 0.0);
  const auto r = hw.forward(zero);
  const double v_min = output_voltage_min(device());
  for (double i : r.hidden_currents) CHECK(i == doctest::Approx(0.0).epsilon(1e-12).scale(1e-6));
  for (double v : r.hidden_voltages) CHECK(v == v_min);
  for (double v : r.output_voltages) CHECK(v == v_min);
  CHECK_THROWS_AS(hw.forward(std::vector<double>(3, 0.0)), DimensionError);
}

TEST_CASE("ideal mode reproduces the float network") {
  check_equivalence(float_network(0.0), ideal_config(true), 1e-6);
}

TEST_CASE("load-aware training matches loaded current sources") {
  const NetworkConfig cfg = ideal_config(false);
  check_equivalence(float_network(hardware_load_ratio(cfg, 1e-6)), cfg, 1e-6);
}

TEST_CASE("domain-wall kinematics agree with the sampled curve") {
  const NetworkConfig base = ideal_config(true);
  NetworkConfig real = base;
  real.options.ideal_neuron = false;
  const auto net = float_network(0.0);
  const Network a(net, device(), base), b(net, device(), real);
  for (std::size_t n = 0; n < dataset().size(); ++n) {
    const auto x = dataset().features.row(n);
    const auto ra = a.forward(x), rb = b.forward(x);
    for (std::size_t k = 0; k < ra.output_voltages.size(); ++k) {
      CHECK(std::abs(ra.output_voltages[k] - rb.output_voltages[k]) < 1e-4 * ra.output_voltages[k]);
    }
  }
}

TEST_CASE("layer geometry and bias rows") {
  const auto& net = testing::fast_network();
  const Network hw(net, device(), testing::fast_config().network);
  CHECK(hw.hidden().n_inputs() == kFeatureCount);
  CHECK(hw.hidden().n_neurons() == 5);
  CHECK(hw.output().n_inputs() == 5);
  CHECK(hw.output().n_neurons() == static_cast<std::size_t>(kLetters));
  CHECK(hw.neuron_count() == 31);
  for (const Layer* l : {&hw.hidden(), &hw.output()}) {
    CHECK(l->bias_rows() >= 1);
    CHECK(l->bias_rows() <= kMaxBiasRows);
    CHECK(l->array().rows() == l->n_inputs() + l->bias_rows());
    // Every bias source stays inside its headroom.
    CHECK(l->bias_row_current() <=
          kBiasHeadroom * hw.config().dtcs.delta_v * l->mapping().g_tr * (1 + 1e-12));
  }
  NetworkConfig forced = testing::fast_config().network;
  forced.bias_rows = 40;
  const Network wide(net, device(), forced);
  CHECK(wide.hidden().bias_rows() == 40);
}

TEST_CASE("energy ledger is additive, non-negative and deterministic") {
  const Network hw(testing::fast_network(), device(), testing::fast_config().network);
  const auto x = dataset().features.row(0);
  const auto a = hw.forward(x);
  const auto b = hw.forward(x);
  CHECK(a.output_voltages == b.output_voltages);
  CHECK(a.energy == b.energy);
  const auto& e = a.energy;
  for (double part : {e.neuron_program, e.neuron_sense, e.neuron_reset, e.crossbar_static,
                      e.dtcs_static}) {
    CHECK(part > 0.0);
  }
  CHECK(e.total() == doctest::Approx(e.neuron_program + e.neuron_sense + e.neuron_reset +
                                     e.crossbar_static + e.dtcs_static));
  const auto sub = neuron_count_energy(hw);
  CHECK(sub.neuron_total() <= e.total());
  CHECK(sub.crossbar_static == 0.0);

  const auto v1 = hw.forward(x, 7), v2 = hw.forward(x, 7), v3 = hw.forward(x, 8);
  CHECK(v1.output_voltages == v2.output_voltages);
  CHECK(v1.energy == v2.energy);
  CHECK(v1.output_voltages != v3.output_voltages);
  CHECK(hw.with_variation(0.0, 7).forward(x).output_voltages == a.output_voltages);
}

TEST_CASE("readout") {
  std::vector<double> one_hot(26, 0.0);
  one_hot[4] = 0.07;
  const auto r = readout(one_hot);
  CHECK(r.label == 4);
  CHECK(r.margin == doctest::Approx(0.07));
  CHECK_THROWS_AS(readout(std::vector<double>{0.06, 0.06, 0.05}), TieError);
  CHECK_THROWS_AS(readout(std::vector<double>{}), DimensionError);
  CHECK(readout(std::vector<double>{0.05}).label == 0);

  const auto bits = threshold_readout(std::vector<double>{0.052, 0.069, 0.060, 0.061}, 0.0605);
  CHECK(bits == std::vector<int>{1, 0, 1, 0});
}

TEST_CASE("closed-form neuron energy subtotal") {
  const NetworkConfig cfg;
  const auto e = neuron_count_energy(31, cfg.schedule, cfg.operating_point, device());
  CHECK(e.neuron_total() == doctest::Approx(31 * 3.73e-15).epsilon(1e-9));
  CHECK(e.neuron_total() == doctest::Approx(115.6e-15).epsilon(1e-3));
  const PhaseSchedule zero{0.0, 0.0, 0.0};
  CHECK(neuron_count_energy(31, zero, cfg.operating_point, device()).total() == 0.0);
}

TEST_CASE("seed mixing") {
  CHECK(mix_seed(1, 2) == mix_seed(1, 2));
  CHECK(mix_seed(1, 2) != mix_seed(1, 3));
  CHECK(mix_seed(1, 2) != mix_seed(2, 2));
}

}
