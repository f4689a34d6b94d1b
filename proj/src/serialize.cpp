#include "spinann/serialize.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "spinann/errors.hpp"

namespace spinann {

Json matrix_to_json(const Matrix& m) {
  Json rows = Json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (double v : m.row(r)) row.push_back(v);
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const Json& j) {
  if (!j.is_array() || j.empty()) throw ConfigError("matrix must be a non-empty array of rows");
  const std::size_t cols = j.front().size();
  Matrix m(j.size(), cols);
  for (std::size_t r = 0; r < j.size(); ++r) {
    if (!j[r].is_array() || j[r].size() != cols) throw ConfigError("matrix rows differ in length");
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = j[r][c].get<double>();
  }
  return m;
}

namespace {

Json layer_json(const std::string& name, const Matrix& w, double unit_current,
                const NetworkConfig* hardware) {
  Json l;
  l["name"] = name;
  l["n_inputs"] = w.rows() - 1;
  l["n_neurons"] = w.cols();
  l["weights"] = matrix_to_json(w);
  if (hardware) {
    const Layer layer(w, unit_current, *hardware);
    Json q;
    q["levels"] = hardware->range.levels;
    q["scale_s_per_unit"] = layer.mapping().scale;
    q["g_tr_s"] = layer.mapping().g_tr;
    q["pruned"] = layer.mapping().pruned;
    q["max_abs_error"] = layer.mapping().max_abs_error;
    q["bias_rows"] = layer.bias_rows();
    q["full_scale_current_a"] = layer.full_scale_current();
    q["bias_row_current_a"] = layer.bias_row_current();
    q["g_plus_s"] = matrix_to_json(layer.nominal().g_plus());
    q["g_minus_s"] = matrix_to_json(layer.nominal().g_minus());
    l["quantized"] = std::move(q);
  }
  return l;
}

}  // namespace

Json weights_to_json(const TrainedNetwork& net, const NetworkConfig* hardware,
                     const std::string& config_hash) {
  Json j;
  j["schema"] = kWeightsSchema;
  j["config_hash"] = config_hash;
  j["transfer"] = std::string(to_string(net.transfer.tag()));
  j["unit_current_a"] = net.transfer.unit_current();
  j["step_slope"] = net.transfer.surrogate_slope();
  j["load_ratio"] = net.load_ratio;
  j["logit_scale"] = net.logit_scale;
  j["training"] = {{"accuracy", net.accuracy}, {"loss", net.loss}, {"epochs_run", net.epochs_run}};
  const bool hw = hardware && net.transfer.tag() == TransferTag::stt_snn;
  j["layers"] = Json::array({layer_json("hidden", net.w1, net.transfer.unit_current(), hw ? hardware : nullptr),
                             layer_json("output", net.w2, net.transfer.unit_current(), hw ? hardware : nullptr)});
  return j;
}

TrainedNetwork weights_from_json(const Json& j, std::shared_ptr<const SttCurve> curve) {
  try {
    if (j.at("schema") != kWeightsSchema) {
      throw ConfigError("weights file schema is not " + std::string(kWeightsSchema));
    }
    const TransferTag tag = parse_transfer_tag(j.at("transfer").get<std::string>());
    TrainedNetwork net;
    net.transfer = make_transfer(tag, std::move(curve), j.at("unit_current_a").get<double>(),
                                 j.at("step_slope").get<double>());
    net.load_ratio = j.at("load_ratio").get<double>();
    net.logit_scale = j.at("logit_scale").get<double>();
    const auto& t = j.at("training");
    net.accuracy = t.at("accuracy").get<double>();
    net.loss = t.at("loss").get<double>();
    net.epochs_run = t.at("epochs_run").get<int>();
    const auto& layers = j.at("layers");
    if (layers.size() != 2) throw ConfigError("weights file must hold exactly two layers");
    net.w1 = matrix_from_json(layers[0].at("weights"));
    net.w2 = matrix_from_json(layers[1].at("weights"));
    if (net.w2.rows() != net.w1.cols() + 1) throw DimensionError("layer sizes do not chain");
    return net;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed weights file: ") + e.what());
  }
}

Json crossbar_to_json(const CrossbarArray& a) {
  Json j;
  j["rows"] = a.rows();
  j["cols"] = a.cols();
  j["g_plus_s"] = matrix_to_json(a.g_plus());
  j["g_minus_s"] = matrix_to_json(a.g_minus());
  j["dummy_plus_s"] = matrix_to_json(a.dummy_plus());
  j["dummy_minus_s"] = matrix_to_json(a.dummy_minus());
  j["g_tr_plus_s"] = std::vector<double>(a.g_tr_plus().begin(), a.g_tr_plus().end());
  j["g_tr_minus_s"] = std::vector<double>(a.g_tr_minus().begin(), a.g_tr_minus().end());
  return j;
}

Json crossbar_document(const Network& nominal, const Network* perturbed, double sigma,
                       std::uint64_t seed, const std::string& config_hash) {
  Json j;
  j["schema"] = kCrossbarSchema;
  j["config_hash"] = config_hash;
  const auto& r = nominal.config().range;
  j["range"] = {{"g_min_s", r.g_min}, {"g_max_s", r.g_max}, {"g_off_s", r.g_off}, {"levels", r.levels}};
  j["variation"] = {{"sigma", sigma}, {"seed", seed}};
  Json layers = Json::array();
  const Layer* nom[] = {&nominal.hidden(), &nominal.output()};
  const Layer* per[] = {perturbed ? &perturbed->hidden() : nullptr,
                        perturbed ? &perturbed->output() : nullptr};
  const char* names[] = {"hidden", "output"};
  for (int k = 0; k < 2; ++k) {
    Json l;
    l["name"] = names[k];
    l["scale_s_per_unit"] = nom[k]->mapping().scale;
    l["g_tr_s"] = nom[k]->mapping().g_tr;
    l["bias_rows"] = nom[k]->bias_rows();
    l["nominal"] = crossbar_to_json(nom[k]->nominal());
    if (per[k]) l["perturbed"] = crossbar_to_json(per[k]->array());
    layers.push_back(std::move(l));
  }
  j["layers"] = std::move(layers);
  return j;
}

Json energy_to_json(const EnergyReport& e) {
  Json j;
  j["neuron_program_j"] = e.neuron_program;
  j["neuron_sense_j"] = e.neuron_sense;
  j["neuron_reset_j"] = e.neuron_reset;
  j["crossbar_static_j"] = e.crossbar_static;
  j["dtcs_static_j"] = e.dtcs_static;
  j["total_j"] = e.total();
  return j;
}

Json read_json(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open " + file.string());
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(file.string() + ": " + e.what());
  }
}

void write_text(const std::filesystem::path& file, const std::string& text) {
  if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
  std::ofstream out(file, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  out << text;
}

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

CsvTable::CsvTable(std::string config_hash, std::vector<std::string> header)
    : hash_(std::move(config_hash)), header_(std::move(header)) {}

void CsvTable::add(std::vector<std::string> row) {
  if (row.size() != header_.size()) throw DimensionError("CSV row width differs from header");
  rows_.push_back(std::move(row));
}

void CsvTable::add_numbers(const std::vector<double>& row) {
  std::vector<std::string> cells;
  cells.reserve(row.size());
  for (double v : row) cells.push_back(format_number(v));
  add(std::move(cells));
}

std::string CsvTable::str() const {
  std::ostringstream out;
  out << "# config-hash: " << hash_ << "\n";
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t k = 0; k < cells.size(); ++k) out << (k ? "," : "") << cells[k];
    out << "\n";
  };
  line(header_);
  for (const auto& r : rows_) line(r);
  return out.str();
}

CsvTable energy_csv(const EnergyReport& e, const std::string& config_hash) {
  CsvTable t(config_hash, {"component", "energy_j"});
  t.add({"neuron_program", format_number(e.neuron_program)});
  t.add({"neuron_sense", format_number(e.neuron_sense)});
  t.add({"neuron_reset", format_number(e.neuron_reset)});
  t.add({"crossbar_static", format_number(e.crossbar_static)});
  t.add({"dtcs_static", format_number(e.dtcs_static)});
  t.add({"total", format_number(e.total())});
  return t;
}

}  // namespace spinann
