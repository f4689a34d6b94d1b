#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "spinann/benchmark.hpp"
#include "spinann/crossbar.hpp"
#include "spinann/energy.hpp"
#include "spinann/network.hpp"
#include "spinann/trainer.hpp"

namespace spinann {

using Json = nlohmann::ordered_json;

inline constexpr const char* kWeightsSchema = "spin-ann/1";
inline constexpr const char* kCrossbarSchema = "crossbar/1";

Json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const Json& j);

// Float weights plus, when a hardware config is given, the quantized
// conductances and scales each layer would be programmed with.
Json weights_to_json(const TrainedNetwork& net, const NetworkConfig* hardware,
                     const std::string& config_hash);
// `curve` is required for stt_snn weights.
TrainedNetwork weights_from_json(const Json& j, std::shared_ptr<const SttCurve> curve);

Json crossbar_to_json(const CrossbarArray& array);
Json crossbar_document(const Network& nominal, const Network* perturbed, double sigma,
                       std::uint64_t seed, const std::string& config_hash);

Json energy_to_json(const EnergyReport& e);

Json read_json(const std::filesystem::path& file);
void write_text(const std::filesystem::path& file, const std::string& text);

// Comma-separated table: a "# config-hash" comment line, a header, then rows.
class CsvTable {
public:
  CsvTable(std::string config_hash, std::vector<std::string> header);

  void add(std::vector<std::string> row);
  void add_numbers(const std::vector<double>& row);
  std::string str() const;
  const std::vector<std::string>& header() const noexcept { return header_; }
  const std::vector<std::vector<std::string>>& rows() const noexcept { return rows_; }
  const std::string& config_hash() const noexcept { return hash_; }

private:
  std::string hash_;
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

std::string format_number(double v);

CsvTable energy_csv(const EnergyReport& e, const std::string& config_hash);

}  // namespace spinann
