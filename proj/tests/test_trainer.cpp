#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "spinann/errors.hpp"
#include "spinann/trainer.hpp"
#include "support.hpp"

using namespace spinann;

namespace {

Dataset toy_two_class() {
  Dataset d;
  d.n_classes = 2;
  d.features = Matrix(8, 2);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 0.3);
  for (std::size_t n = 0; n < 8; ++n) {
    const bool one = n % 2 == 1;
    d.features(n, 0) = (one ? 0.7 : 0.0) + u(rng);
    d.features(n, 1) = (one ? 0.0 : 0.7) + u(rng);
    d.labels.push_back(one ? 1 : 0);
  }
  return d;
}

// Equal up to the rounding of a recomputed scale factor.
bool nearly_equal(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  for (std::size_t k = 0; k < a.data().size(); ++k) {
    const double x = a.data()[k], y = b.data()[k];
    if (std::abs(x - y) > 1e-12 * std::max(std::abs(x), std::abs(y))) return false;
  }
  return true;
}

Dataset random_dataset(std::size_t n, std::size_t dims, int classes, std::uint64_t seed) {
  Dataset d;
  d.n_classes = classes;
  d.features = Matrix(n, dims);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (double& v : d.features.data()) v = u(rng);
  for (std::size_t k = 0; k < n; ++k) d.labels.push_back(static_cast<int>(k % classes));
  return d;
}

double loss_of(const TrainedNetwork& net, const Dataset& d) { return loss_gradient(net, d).loss; }

}  // namespace

TEST_SUITE("trainer") {

TEST_CASE("separable toy set with one sigmoid hidden unit") {
  TrainConfig cfg;
  cfg.epochs = 3000;
  cfg.learning_rate = 0.05;
  const auto net = train(toy_two_class(), 1, TransferFunction::sigmoid(), cfg);
  CHECK(net.accuracy == 1.0);
  CHECK(accuracy(net, toy_two_class()) == 1.0);
  CHECK(net.n_inputs() == 2);
  CHECK(net.n_hidden() == 1);
  CHECK(net.n_classes() == 2);
  CHECK(net.log.size() == 3000);
  CHECK(net.epochs_run == 3000);
}

TEST_CASE("training is reproducible for a seed") {
  TrainConfig cfg;
  cfg.epochs = 300;
  const auto& data = testing::dataset();
  const auto a = train(data, 4, testing::stt(), cfg);
  const auto b = train(data, 4, testing::stt(), cfg);
  CHECK(a.w1 == b.w1);
  CHECK(a.w2 == b.w2);
  CHECK(a.loss == b.loss);
  cfg.seed = 2;
  const auto c = train(data, 4, testing::stt(), cfg);
  CHECK(!(a.w1 == c.w1));
}

TEST_CASE("loss gradient matches central finite differences") {
  const Dataset data = random_dataset(12, 6, 3, 5);
  TrainConfig cfg;
  cfg.epochs = 50;
  for (TransferTag tag : {TransferTag::stt_snn, TransferTag::sigmoid}) {
    CAPTURE(to_string(tag));
    TrainedNetwork net = train(data, 3, make_transfer(tag, testing::curve()), cfg);
    const auto g = loss_gradient(net, data);
    double gmax = 0.0;
    for (double v : g.d_w1.data()) gmax = std::max(gmax, std::abs(v));
    for (double v : g.d_w2.data()) gmax = std::max(gmax, std::abs(v));
    REQUIRE(gmax > 0.0);
    auto check = [&](Matrix TrainedNetwork::*m, const Matrix& grad) {
      for (std::size_t k = 0; k < grad.data().size(); ++k) {
        // Only entries large enough for a relative comparison.
        if (std::abs(grad.data()[k]) < 1e-3 * gmax) continue;
        TrainedNetwork probe = net;
        double& w = (probe.*m).data()[k];
        const double w0 = w;
        const double h = 1e-6 * std::max(1.0, std::abs(w0));
        w = w0 + h;
        const double up = loss_of(probe, data);
        w = w0 - h;
        const double down = loss_of(probe, data);
        const double fd = (up - down) / (2.0 * h);
        CHECK(std::abs(fd - grad.data()[k]) <= 1e-4 * std::abs(grad.data()[k]));
      }
    };
    check(&TrainedNetwork::w1, g.d_w1);
    check(&TrainedNetwork::w2, g.d_w2);
  }
}

TEST_CASE("gradient descent reduces the loss") {
  TrainConfig cfg;
  cfg.epochs = 400;
  const auto net = train(testing::dataset(), 5, testing::stt(), cfg);
  CHECK(net.log.back().loss < net.log.front().loss);
}

TEST_CASE("load compression model") {
  Matrix w(3, 2, 0.0);
  w(0, 0) = 2.0;
  w(1, 1) = -5.0;
  w(2, 0) = 100.0;  // bias row is excluded
  CHECK(layer_compression(w, 0.02) == doctest::Approx(0.1));
  CHECK(layer_compression(w, 0.0) == 0.0);

  TrainedNetwork net;
  net.transfer = TransferFunction::sat_linear();
  net.w1 = Matrix(2, 1, 0.0);
  net.w1(0, 0) = 1.0;
  net.w2 = Matrix(2, 1, 0.0);
  net.w2(0, 0) = 1.0;
  net.load_ratio = 0.5;
  // x = 0.6 reaches the layer as 0.6 / (1 + 0.5 * 0.6).
  const std::vector<double> x{0.6};
  CHECK(net.hidden(x)[0] == doctest::Approx(0.6 / 1.3));
}

TEST_CASE("hardware quantization is idempotent and bounded") {
  TrainConfig cfg;
  cfg.epochs = 200;
  const auto net = train(testing::dataset(), 5, testing::stt(), cfg);
  const ConductanceRange r;
  for (const Matrix* w : {&net.w1, &net.w2}) {
    const Matrix q = hardware_quantize(*w, r);
    CHECK(nearly_equal(hardware_quantize(q, r), q));
    double max_feature = 0.0;
    for (std::size_t i = 0; i + 1 < w->rows(); ++i) {
      for (double v : w->row(i)) max_feature = std::max(max_feature, std::abs(v));
    }
    const double bound = 0.5 * r.step() * max_feature / r.g_max;
    for (std::size_t i = 0; i + 1 < w->rows(); ++i) {
      for (std::size_t j = 0; j < w->cols(); ++j) {
        if (q(i, j) != 0.0) CHECK(std::abs(q(i, j) - (*w)(i, j)) <= bound * (1 + 1e-9));
      }
    }
  }
  CHECK_THROWS_AS(hardware_quantize(Matrix(1, 3, 1.0), r), DimensionError);
  CHECK_THROWS_AS(hardware_quantize(Matrix(3, 3, 0.0), r), DegenerateScaleError);
}

TEST_CASE("quantize_weights follows the crossbar quantizer") {
  Matrix w(2, 2);
  w(0, 0) = 1.0;
  w(0, 1) = -0.5;
  w(1, 0) = 0.001;
  w(1, 1) = 0.3;
  const auto q = quantize_weights(w, 32);
  CHECK(q.weights(0, 0) == doctest::Approx(1.0));
  CHECK(q.weights(1, 0) == 0.0);
  CHECK(q.pruned == 1);
  CHECK(q.weights(0, 1) < 0.0);
  const double step = (1.0 - 1.0 / 32.0) / 31.0;
  CHECK(std::abs(q.weights(1, 1) - 0.3) <= 0.5 * step + 1e-12);
  double worst = 0.0;
  for (std::size_t k = 0; k < 4; ++k) {
    worst = std::max(worst, std::abs(q.weights.data()[k] - w.data()[k]));
  }
  CHECK(q.max_abs_error == doctest::Approx(worst));
}

TEST_CASE("single-class dataset needs one hidden neuron") {
  Dataset d = random_dataset(5, 3, 1, 2);
  TrainConfig cfg;
  cfg.epochs = 50;
  const auto r = min_hidden_search(d, TransferFunction::sigmoid(), cfg);
  CHECK(r.n_hidden == 1);
  CHECK(r.network.accuracy == 1.0);
}

TEST_CASE("unreachable target exhausts the search") {
  Dataset d;
  d.n_classes = 2;
  d.features = Matrix(2, 2, 0.5);  // identical inputs, different labels
  d.labels = {0, 1};
  TrainConfig cfg;
  cfg.epochs = 20;
  cfg.restarts = 2;
  cfg.max_hidden = 2;
  CHECK_THROWS_AS(min_hidden_search(d, TransferFunction::sigmoid(), cfg), SearchExhaustedError);
  const auto best = train_with_restarts(d, 1, TransferFunction::sigmoid(), cfg);
  CHECK(best.network.accuracy < 1.0);
}

TEST_CASE("quantization-aware training returns stored weights") {
  TrainConfig cfg;
  cfg.epochs = 300;
  cfg.qat_epochs = 100;
  cfg.quantization = ConductanceRange{};
  const auto net = train(testing::dataset(), 5, testing::stt(), cfg);
  CHECK(nearly_equal(hardware_quantize(net.w1, *cfg.quantization), net.w1));
  CHECK(nearly_equal(hardware_quantize(net.w2, *cfg.quantization), net.w2));
}

TEST_CASE("noise robustness estimate") {
  const auto net = train(toy_two_class(), 1, TransferFunction::sigmoid(), [] {
    TrainConfig c;
    c.epochs = 3000;
    c.learning_rate = 0.05;
    return c;
  }());
  CHECK(noisy_accuracy(net, toy_two_class(), 0.0, 5, 1) == 1.0);
  CHECK(noisy_accuracy(net, toy_two_class(), 0.05, 20, 1) ==
        noisy_accuracy(net, toy_two_class(), 0.05, 20, 1));
  CHECK_THROWS_AS(noisy_accuracy(net, toy_two_class(), 0.05, 0, 1), ConfigError);
}

TEST_CASE("configuration and dataset validation") {
  TrainConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.learning_rate = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = TrainConfig{};
  cfg.target_accuracy = 1.5;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = TrainConfig{};
  cfg.quantization = ConductanceRange{};
  cfg.qat_epochs = cfg.epochs + 1;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);

  Dataset d = random_dataset(4, 2, 2, 1);
  d.labels[0] = 5;
  CHECK_THROWS_AS(d.validate(), DomainError);
  d.labels.pop_back();
  CHECK_THROWS_AS(d.validate(), DimensionError);
  CHECK_THROWS_AS(train(random_dataset(4, 2, 2, 1), 0, TransferFunction::sigmoid(), TrainConfig{}),
                  ConfigError);
}

}
