#include "support.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

namespace testing {

using namespace spinann;

std::filesystem::path source_dir() { return SPINANN_SOURCE_DIR; }
std::filesystem::path data_dir() { return source_dir() / "data"; }
std::filesystem::path default_config_path() { return source_dir() / "configs" / "default.cfg"; }
std::filesystem::path fast_config_path() { return source_dir() / "tests" / "data" / "fast.cfg"; }
std::string cli_path() { return SPINANN_CLI; }

std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("spinann-test-" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

const DeviceParams& device() {
  static const DeviceParams d(VelocityTable::from_csv(data_dir() / "velocity_table.csv"));
  return d;
}

std::shared_ptr<const SttCurve> curve() {
  static const auto c = std::make_shared<const SttCurve>(SttCurve::from_device(device(), 1e-9));
  return c;
}

TransferFunction stt() { return TransferFunction::stt_snn(curve(), 1e-6); }

const Corpus& corpus() {
  static const Corpus c = load_corpus(data_dir() / "glyphs");
  return c;
}

const Dataset& dataset() {
  static const Dataset d = make_dataset(corpus());
  return d;
}

const RunConfig& fast_config() {
  static const RunConfig c = load_config(fast_config_path());
  return c;
}

const TrainedNetwork& fast_network() {
  static const TrainedNetwork net = [] {
    const RunConfig& c = fast_config();
    const auto f = make_transfer(TransferTag::stt_snn, curve(), c.unit_current);
    return train_with_restarts(dataset(), c.n_hidden, f, c.benchmark_training()).network;
  }();
  return net;
}

int run(const std::string& command) {
  const int status = std::system(command.c_str());
  if (status == -1 || !WIFEXITED(status)) return -1;
  return WEXITSTATUS(status);
}

std::string read_file(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace testing
