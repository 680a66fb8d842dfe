// Copyright 2026 The Decision Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "decision/domains.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <numeric>
#include <sstream>

#include "decision/random.h"

namespace decision {

std::string ToString(GeneratorKind kind) {
  switch (kind) {
    case GeneratorKind::kTwoMoons:
      return "two-moons";
    case GeneratorKind::kGaussianMixture:
      return "gaussian-mixture";
  }
  return "unknown";
}

GeneratorKind ParseGeneratorKind(const std::string& name) {
  if (name == "two-moons") return GeneratorKind::kTwoMoons;
  if (name == "gaussian-mixture") return GeneratorKind::kGaussianMixture;
  throw std::invalid_argument("kind: unknown generator '" + name + "'");
}

void DomainSpec::Validate() const {
  if (!(noise_std >= 0.0) || !std::isfinite(noise_std)) {
    throw std::invalid_argument("noise_std: must be finite and >= 0");
  }
  if (!(label_noise >= 0.0 && label_noise <= 1.0)) {
    throw std::invalid_argument("label_noise: must lie in [0, 1]");
  }
  if (samples < 1) throw std::invalid_argument("samples: must be >= 1");
  if (!std::isfinite(rotation)) throw std::invalid_argument("rotation: must be finite");
  if (kind == GeneratorKind::kTwoMoons && num_classes != 2) {
    throw std::invalid_argument("num_classes: two-moons has exactly 2 classes");
  }
  if (num_classes < 2) throw std::invalid_argument("num_classes: must be >= 2");
}

UnlabeledSet StripLabels(const LabeledSet& set) { return UnlabeledSet{set.inputs}; }

LabeledSet GenerateDomain(const DomainSpec& spec) {
  spec.Validate();
  Rng rng(spec.seed);
  std::uniform_real_distribution<double> angle(0.0, std::numbers::pi);
  std::normal_distribution<double> noise(0.0, 1.0);

  const std::size_t n = spec.samples;
  const std::size_t k = spec.num_classes;
  std::vector<double> xs(2 * n);
  std::vector<int> labels(n);

  for (std::size_t i = 0; i < n; ++i) {
    double x = 0.0, y = 0.0;
    int label = 0;
    if (spec.kind == GeneratorKind::kTwoMoons) {
      label = i < (n + 1) / 2 ? 0 : 1;
      const double t = angle(rng);
      x = std::cos(t) - 0.5;
      y = std::sin(t) - 0.25;
      if (label == 1) {
        x = -x;
        y = -y;
      }
    } else {
      label = static_cast<int>(i % k);
      const double phi = 2.0 * std::numbers::pi * label / static_cast<double>(k);
      x = 2.0 * std::cos(phi);
      y = 2.0 * std::sin(phi);
    }
    if (spec.noise_std > 0.0) {
      x += spec.noise_std * noise(rng);
      y += spec.noise_std * noise(rng);
    }
    const double c = std::cos(spec.rotation), s = std::sin(spec.rotation);
    xs[2 * i] = c * x - s * y + spec.translation[0];
    xs[2 * i + 1] = s * x + c * y + spec.translation[1];
    labels[i] = label;
  }

  if (spec.label_noise > 0.0) {
    std::bernoulli_distribution flip(spec.label_noise);
    std::uniform_int_distribution<int> any(0, static_cast<int>(k) - 1);
    for (auto& label : labels) {
      if (flip(rng)) label = any(rng);
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);

  LabeledSet out;
  out.num_classes = k;
  out.inputs = Tensor({n, 2});
  out.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.inputs[2 * i] = xs[2 * order[i]];
    out.inputs[2 * i + 1] = xs[2 * order[i] + 1];
    out.labels[i] = labels[order[i]];
  }
  return out;
}

LabeledSet SelectRows(const LabeledSet& set, const std::vector<std::size_t>& rows) {
  LabeledSet out;
  out.num_classes = set.num_classes;
  out.inputs = kernels::GatherRows(set.inputs, rows);
  out.labels.reserve(rows.size());
  for (auto r : rows) out.labels.push_back(set.labels[r]);
  return out;
}

TrainEvalSplit SplitTrainEval(const LabeledSet& set, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw std::invalid_argument("train_fraction: must lie in (0, 1)");
  }
  const std::size_t n = set.size();
  const auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n)));
  if (n_train == 0 || n_train == n) {
    throw std::invalid_argument("split: " + std::to_string(n) + " rows cannot be split into two non-empty parts");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::size_t> train(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  std::vector<std::size_t> eval(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
  std::sort(train.begin(), train.end());
  std::sort(eval.begin(), eval.end());
  return {SelectRows(set, train), SelectRows(set, eval)};
}

std::vector<std::vector<std::size_t>> MakeBatches(std::size_t n, std::size_t batch_size,
                                                  std::uint64_t epoch_seed) {
  if (batch_size < 1) throw std::invalid_argument("batch_size: must be >= 1");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(epoch_seed);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t start = 0; start < n; start += batch_size) {
    const std::size_t end = std::min(n, start + batch_size);
    batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                         order.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return batches;
}

namespace {

std::vector<std::string> SplitCells(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::string Trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double ParseNumber(const std::string& raw, std::size_t line, std::size_t column) {
  const std::string cell = Trim(raw);
  double v = 0.0;
  const auto* first = cell.data();
  const auto* last = cell.data() + cell.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (cell.empty() || ec != std::errc() || ptr != last || !std::isfinite(v)) {
    throw CsvError("line " + std::to_string(line) + ", column " + std::to_string(column) +
                       ": not a number: '" + cell + "'",
                   line);
  }
  return v;
}

}  // namespace

std::variant<LabeledSet, UnlabeledSet> LoadCsv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::ios_base::failure("cannot open " + path.string());

  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (!Trim(line).empty()) {
      header = SplitCells(line);
      break;
    }
  }
  if (header.empty()) throw CsvError("missing header row", line_no == 0 ? 1 : line_no);
  const bool labeled = Trim(header.back()) == "label";
  const std::size_t width = header.size();
  const std::size_t in_dim = labeled ? width - 1 : width;
  if (in_dim == 0) throw CsvError("line 1: no input columns", 1);

  std::vector<double> values;
  std::vector<int> labels;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (Trim(line).empty()) continue;
    const auto cells = SplitCells(line);
    if (cells.size() != width) {
      throw CsvError("line " + std::to_string(line_no) + ": expected " + std::to_string(width) +
                         " columns, found " + std::to_string(cells.size()),
                     line_no);
    }
    for (std::size_t c = 0; c < in_dim; ++c) values.push_back(ParseNumber(cells[c], line_no, c + 1));
    if (labeled) {
      const double v = ParseNumber(cells.back(), line_no, width);
      if (v < 0.0 || v != std::floor(v) || v > 1e9) {
        throw CsvError("line " + std::to_string(line_no) + ": label must be a non-negative integer", line_no);
      }
      labels.push_back(static_cast<int>(v));
    }
    ++rows;
  }
  if (rows == 0) throw CsvError("no data rows", line_no);

  Tensor inputs({rows, in_dim}, std::move(values));
  if (!labeled) return UnlabeledSet{std::move(inputs)};
  LabeledSet set;
  set.inputs = std::move(inputs);
  set.num_classes = static_cast<std::size_t>(*std::max_element(labels.begin(), labels.end())) + 1;
  set.labels = std::move(labels);
  return set;
}

void WriteCsv(const std::filesystem::path& path, const LabeledSet& set) {
  std::ofstream out(path);
  if (!out) throw std::ios_base::failure("cannot write " + path.string());
  const std::size_t d = set.input_dim();
  for (std::size_t c = 0; c < d; ++c) out << 'x' << c << ',';
  out << "label\n";
  out << std::setprecision(17);
  for (std::size_t r = 0; r < set.size(); ++r) {
    for (std::size_t c = 0; c < d; ++c) out << set.inputs.at(r, c) << ',';
    out << set.labels[r] << '\n';
  }
}

}  // namespace decision
