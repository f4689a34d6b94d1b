#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "spinann/crossbar.hpp"
#include "spinann/device.hpp"
#include "spinann/network.hpp"
#include "spinann/trainer.hpp"

namespace spinann {

// Everything a CLI run needs. Loaded from a key = value file whose key names
// carry their units (device.length_nm, mtj.ra_ap_ohm_um2, ...).
struct RunConfig {
  std::filesystem::path velocity_table;
  std::filesystem::path glyph_dir;
  std::filesystem::path out_dir = "out";

  MaterialParams material;
  NeuronGeometry geometry;
  MtjStack mtj;
  double sense_current = 25e-6;
  double sense_safety_fraction = 0.5;
  double reset_current = -50e-6;
  double r_lateral = 300.0;

  NetworkConfig network;
  WriteParams write;
  double unit_current = 1e-6;  // programming current per trainer unit
  std::size_t n_hidden = 5;
  double inverter_threshold = 0.0605;  // V

  TrainConfig train;
  // Train against the loaded, quantized hardware rather than ideal sources.
  bool hardware_aware = true;

  int search_epochs = 30000;
  int search_restarts = 10;
  int search_max_hidden = 40;

  int mc_trials = 100;
  std::uint64_t mc_seed = 2024;

  // Device built from the parameters above and the velocity table file.
  DeviceParams device() const;
  // Training settings for the benchmark network, with the hardware load and
  // quantizer filled in when hardware_aware is set.
  TrainConfig benchmark_training() const;
  TrainConfig search_training() const;

  void validate() const;
};

// Parses `text`; relative paths resolve against `base_dir`. Unknown keys,
// duplicates, malformed values and missing files raise ConfigError.
RunConfig parse_config(std::string_view text, const std::filesystem::path& base_dir);
RunConfig load_config(const std::filesystem::path& file);

// key = value dump of every setting in a fixed order, values at full precision.
std::string canonical_config(const RunConfig& cfg);
// FNV-1a over canonical_config, as 16 hex digits.
std::string config_hash(const RunConfig& cfg);

std::uint64_t fnv1a(std::string_view bytes);

}  // namespace spinann
