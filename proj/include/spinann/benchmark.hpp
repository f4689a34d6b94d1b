#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string_view>
#include <vector>

#include "spinann/energy.hpp"
#include "spinann/matrix.hpp"
#include "spinann/network.hpp"
#include "spinann/trainer.hpp"

namespace spinann {

inline constexpr std::size_t kGlyphSize = 16;
inline constexpr std::size_t kPoolGrid = 4;
inline constexpr std::size_t kDirections = 4;
inline constexpr std::size_t kFeatureCount = kDirections * kPoolGrid * kPoolGrid;
inline constexpr int kLetters = 26;

struct Glyph {
  char letter = 'A';
  std::array<std::uint8_t, kGlyphSize * kGlyphSize> ink{};

  bool at(std::size_t r, std::size_t c) const { return ink[r * kGlyphSize + c] != 0; }
  std::size_t ink_count() const;
};

// 16 lines of 16 characters, '#' for ink and '.' for background.
Glyph parse_glyph(std::string_view text, char letter);
Glyph load_glyph(const std::filesystem::path& file, char letter);

enum class Direction { horizontal, vertical, diagonal_up, diagonal_down };

using Kernel = std::array<std::array<int, 3>, 3>;
const Kernel& direction_kernel(Direction d);

using FeatureVector = std::array<double, kFeatureCount>;

// Zero-padded 3x3 correlation of the bitmap with one kernel, magnitude only.
Matrix edge_response(const Glyph& glyph, Direction d);

// Feature index: direction * 16 + pool_row * 4 + pool_col.
constexpr std::size_t feature_index(Direction d, std::size_t pool_row, std::size_t pool_col) {
  return static_cast<std::size_t>(d) * kPoolGrid * kPoolGrid + pool_row * kPoolGrid + pool_col;
}

// Pooled responses before normalization.
FeatureVector raw_features(const Glyph& glyph);
FeatureVector extract_features(const Glyph& glyph, double normalization);

struct Corpus {
  std::vector<Glyph> glyphs;  // 'A'..'Z' in order
  double normalization = 1.0;  // largest raw feature over the corpus
};

Corpus make_corpus(std::vector<Glyph> glyphs);
// Reads A.txt .. Z.txt from a directory.
Corpus load_corpus(const std::filesystem::path& dir);

Dataset make_dataset(const Corpus& corpus);

// Trainer load ratio that matches the hardware DTCS/crossbar loading.
double hardware_load_ratio(const NetworkConfig& cfg, double unit_current);

struct Evaluation {
  Matrix voltages;    // row = input letter, column = output neuron, V
  Matrix normalized;  // voltages min-max normalized over the whole matrix
  std::vector<int> predicted;  // -1 on a tie
  std::vector<double> margins;  // correct neuron minus best other, V (negative if wrong)
  int correct = 0;
  double accuracy = 0.0;
  double min_margin = 0.0;
  EnergyReport energy;  // mean per recognition
};

Evaluation evaluate(const Network& network, const Dataset& data);

struct MonteCarloStats {
  int trials = 0;
  double sigma = 0.0;
  int fully_correct = 0;
  double fraction_fully_correct = 0.0;
  std::vector<double> letter_error_rate;
  std::vector<double> trial_min_margin;
  double margin_min = 0.0;
  double margin_mean = 0.0;
  double margin_p5 = 0.0;
  double margin_p50 = 0.0;
  double margin_p95 = 0.0;
};

MonteCarloStats monte_carlo(const Network& network, const Dataset& data, int trials, double sigma,
                            std::uint64_t seed);

}  // namespace spinann
