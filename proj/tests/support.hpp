#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include "spinann/benchmark.hpp"
#include "spinann/config.hpp"
#include "spinann/device.hpp"
#include "spinann/transfer.hpp"

namespace testing {

std::filesystem::path source_dir();
std::filesystem::path data_dir();
std::filesystem::path default_config_path();
std::filesystem::path fast_config_path();
std::string cli_path();

// Fresh scratch directory under the system temp dir.
std::filesystem::path scratch_dir(const std::string& name);

const spinann::DeviceParams& device();
std::shared_ptr<const spinann::SttCurve> curve();
spinann::TransferFunction stt();
const spinann::Corpus& corpus();
const spinann::Dataset& dataset();

// 64-5-26 network trained with the reduced-effort configuration, hardware
// aware (load + 5-bit quantization).
const spinann::RunConfig& fast_config();
const spinann::TrainedNetwork& fast_network();

// Runs a shell command and returns its exit code.
int run(const std::string& command);
std::string read_file(const std::filesystem::path& file);

}  // namespace testing
