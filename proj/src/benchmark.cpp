#include "spinann/benchmark.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>

#include "spinann/errors.hpp"

namespace spinann {

std::size_t Glyph::ink_count() const {
  return static_cast<std::size_t>(std::count(ink.begin(), ink.end(), std::uint8_t{1}));
}

Glyph parse_glyph(std::string_view text, char letter) {
  Glyph g;
  g.letter = letter;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t r = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (r == kGlyphSize) throw GlyphError(std::string("glyph '") + letter + "' has more than 16 rows");
    if (line.size() != kGlyphSize) {
      throw GlyphError(std::string("glyph '") + letter + "' row " + std::to_string(r + 1) +
                       " is not 16 characters");
    }
    for (std::size_t c = 0; c < kGlyphSize; ++c) {
      if (line[c] == '#') {
        g.ink[r * kGlyphSize + c] = 1;
      } else if (line[c] != '.') {
        throw GlyphError(std::string("glyph '") + letter + "' contains '" + line[c] + "'");
      }
    }
    ++r;
  }
  if (r != kGlyphSize) throw GlyphError(std::string("glyph '") + letter + "' has fewer than 16 rows");
  if (g.ink_count() == 0) throw GlyphError(std::string("glyph '") + letter + "' has no ink");
  return g;
}

Glyph load_glyph(const std::filesystem::path& file, char letter) {
  std::ifstream in(file);
  if (!in) throw GlyphError("cannot open glyph file " + file.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_glyph(ss.str(), letter);
}

const Kernel& direction_kernel(Direction d) {
  static const std::array<Kernel, kDirections> kernels{{
      {{{-1, -2, -1}, {0, 0, 0}, {1, 2, 1}}},
      {{{-1, 0, 1}, {-2, 0, 2}, {-1, 0, 1}}},
      {{{0, 1, 2}, {-1, 0, 1}, {-2, -1, 0}}},
      {{{-2, -1, 0}, {-1, 0, 1}, {0, 1, 2}}},
  }};
  return kernels[static_cast<std::size_t>(d)];
}

Matrix edge_response(const Glyph& glyph, Direction d) {
  const auto& k = direction_kernel(d);
  const auto n = static_cast<int>(kGlyphSize);
  Matrix out(kGlyphSize, kGlyphSize);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      int acc = 0;
      for (int dr = -1; dr <= 1; ++dr) {
        for (int dc = -1; dc <= 1; ++dc) {
          const int rr = r + dr, cc = c + dc;
          if (rr < 0 || rr >= n || cc < 0 || cc >= n) continue;
          if (glyph.at(static_cast<std::size_t>(rr), static_cast<std::size_t>(cc))) {
            acc += k[static_cast<std::size_t>(dr + 1)][static_cast<std::size_t>(dc + 1)];
          }
        }
      }
      out(static_cast<std::size_t>(r), static_cast<std::size_t>(c)) = std::abs(acc);
    }
  }
  return out;
}

FeatureVector raw_features(const Glyph& glyph) {
  if (glyph.ink_count() == 0) throw GlyphError("glyph has no ink");
  constexpr std::size_t cell = kGlyphSize / kPoolGrid;
  FeatureVector f{};
  for (std::size_t d = 0; d < kDirections; ++d) {
    const auto dir = static_cast<Direction>(d);
    const Matrix resp = edge_response(glyph, dir);
    for (std::size_t pr = 0; pr < kPoolGrid; ++pr) {
      for (std::size_t pc = 0; pc < kPoolGrid; ++pc) {
        double sum = 0.0;
        for (std::size_t r = 0; r < cell; ++r) {
          for (std::size_t c = 0; c < cell; ++c) sum += resp(pr * cell + r, pc * cell + c);
        }
        f[feature_index(dir, pr, pc)] = sum / static_cast<double>(cell * cell);
      }
    }
  }
  return f;
}

FeatureVector extract_features(const Glyph& glyph, double normalization) {
  if (!(normalization > 0.0)) throw DomainError("feature normalization must be positive");
  FeatureVector f = raw_features(glyph);
  for (double& v : f) v = std::clamp(v / normalization, 0.0, 1.0);
  return f;
}

Corpus make_corpus(std::vector<Glyph> glyphs) {
  if (glyphs.empty()) throw GlyphError("empty corpus");
  Corpus c;
  c.normalization = 0.0;
  for (const auto& g : glyphs) {
    const auto f = raw_features(g);
    c.normalization = std::max(c.normalization, *std::max_element(f.begin(), f.end()));
  }
  c.glyphs = std::move(glyphs);
  return c;
}

Corpus load_corpus(const std::filesystem::path& dir) {
  std::vector<Glyph> glyphs;
  for (int k = 0; k < kLetters; ++k) {
    const char letter = static_cast<char>('A' + k);
    glyphs.push_back(load_glyph(dir / (std::string(1, letter) + ".txt"), letter));
  }
  return make_corpus(std::move(glyphs));
}

Dataset make_dataset(const Corpus& corpus) {
  Dataset d;
  d.features = Matrix(corpus.glyphs.size(), kFeatureCount);
  for (std::size_t i = 0; i < corpus.glyphs.size(); ++i) {
    const auto f = extract_features(corpus.glyphs[i], corpus.normalization);
    std::copy(f.begin(), f.end(), d.features.row(i).begin());
    d.labels.push_back(corpus.glyphs[i].letter - 'A');
  }
  d.n_classes = kLetters;
  return d;
}

double hardware_load_ratio(const NetworkConfig& cfg, double unit_current) {
  if (cfg.options.ideal_dtcs) return 0.0;
  return unit_current / (cfg.range.g_max * cfg.dtcs.delta_v);
}

Evaluation evaluate(const Network& network, const Dataset& data) {
  data.validate();
  const std::size_t n = data.size();
  const std::size_t m = network.output().n_neurons();
  Evaluation e;
  e.voltages = Matrix(n, m);
  e.predicted.assign(n, -1);
  e.margins.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = network.forward(data.features.row(i));
    std::copy(r.output_voltages.begin(), r.output_voltages.end(), e.voltages.row(i).begin());
    e.energy += r.energy;
    const auto label = static_cast<std::size_t>(data.labels[i]);
    double other = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < m; ++j) {
      if (j != label) other = std::max(other, r.output_voltages[j]);
    }
    e.margins[i] = r.output_voltages[label] - other;
    try {
      e.predicted[i] = readout(r.output_voltages).label;
    } catch (const TieError&) {
      e.predicted[i] = -1;
    }
    if (e.predicted[i] == data.labels[i]) ++e.correct;
  }
  e.energy = e.energy.scaled(1.0 / static_cast<double>(n));
  e.accuracy = static_cast<double>(e.correct) / static_cast<double>(n);
  e.min_margin = *std::min_element(e.margins.begin(), e.margins.end());

  const double lo = *std::min_element(e.voltages.data().begin(), e.voltages.data().end());
  const double hi = *std::max_element(e.voltages.data().begin(), e.voltages.data().end());
  e.normalized = Matrix(n, m);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      e.normalized(i, j) = hi > lo ? (e.voltages(i, j) - lo) / (hi - lo) : 0.0;
    }
  }
  return e;
}

namespace {

double percentile(const std::vector<double>& sorted, double p) {
  if (sorted.size() == 1) return sorted.front();
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

}  // namespace

MonteCarloStats monte_carlo(const Network& network, const Dataset& data, int trials, double sigma,
                            std::uint64_t seed) {
  if (trials < 1) throw DomainError("at least one Monte-Carlo trial is required");
  MonteCarloStats s;
  s.trials = trials;
  s.sigma = sigma;
  s.letter_error_rate.assign(data.size(), 0.0);
  std::vector<double> margins;
  margins.reserve(static_cast<std::size_t>(trials) * data.size());
  for (int t = 0; t < trials; ++t) {
    const Network varied = network.with_variation(sigma, mix_seed(seed, static_cast<std::uint64_t>(t)));
    const Evaluation e = evaluate(varied, data);
    if (e.correct == static_cast<int>(data.size())) ++s.fully_correct;
    for (std::size_t i = 0; i < data.size(); ++i) {
      if (e.predicted[i] != data.labels[i]) s.letter_error_rate[i] += 1.0;
    }
    s.trial_min_margin.push_back(e.min_margin);
    margins.insert(margins.end(), e.margins.begin(), e.margins.end());
  }
  for (double& r : s.letter_error_rate) r /= trials;
  s.fraction_fully_correct = static_cast<double>(s.fully_correct) / trials;
  std::sort(margins.begin(), margins.end());
  s.margin_min = margins.front();
  s.margin_mean = std::accumulate(margins.begin(), margins.end(), 0.0) /
                  static_cast<double>(margins.size());
  s.margin_p5 = percentile(margins, 0.05);
  s.margin_p50 = percentile(margins, 0.50);
  s.margin_p95 = percentile(margins, 0.95);
  return s;
}

}  // namespace spinann
