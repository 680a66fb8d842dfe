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

#include "decision/checkpoint.h"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace decision {
namespace {

using nlohmann::json;

std::vector<std::pair<std::string, const Parameter*>> NamedParameters(const SourceModel& m) {
  std::vector<std::pair<std::string, const Parameter*>> out;
  for (std::size_t i = 0; i < m.features.layers().size(); ++i) {
    const auto& layer = m.features.layers()[i];
    out.emplace_back("features." + std::to_string(i) + ".weight", &layer.weight());
    out.emplace_back("features." + std::to_string(i) + ".bias", &layer.bias());
  }
  out.emplace_back("classifier.weight", &m.classifier.layer().weight());
  out.emplace_back("classifier.bias", &m.classifier.layer().bias());
  return out;
}

}  // namespace

std::string SerializeCheckpoint(const SourceModel& model) {
  const ModelShape s = model.shape();
  json j;
  j["version"] = kCheckpointVersion;
  j["domain"] = model.domain;
  j["label_smoothing"] = model.label_smoothing;
  j["classifier_frozen"] = model.classifier.frozen();
  j["shape"] = {{"input_dim", s.input_dim},
                {"hidden", s.hidden},
                {"feature_dim", s.feature_dim},
                {"num_classes", s.num_classes}};
  json params = json::array();
  for (const auto& [name, p] : NamedParameters(model)) {
    params.push_back({{"name", name}, {"shape", p->value().shape()}, {"values", p->value().data()}});
  }
  j["parameters"] = std::move(params);
  return j.dump(1) + "\n";
}

SourceModel ParseCheckpoint(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw CheckpointError(std::string("checkpoint: malformed JSON: ") + e.what());
  }
  try {
    if (j.at("version").get<std::string>() != kCheckpointVersion) {
      throw CheckpointError("checkpoint: unsupported version '" + j.at("version").get<std::string>() + "'");
    }
    const json& s = j.at("shape");
    ModelShape shape{s.at("input_dim").get<std::size_t>(), s.at("hidden").get<std::size_t>(),
                     s.at("feature_dim").get<std::size_t>(), s.at("num_classes").get<std::size_t>()};
    SourceModel m = SourceModel::Create(j.at("domain").get<std::string>(), shape, 0);
    m.label_smoothing = j.at("label_smoothing").get<double>();
    if (j.value("classifier_frozen", false)) m.classifier.Freeze();

    const json& params = j.at("parameters");
    auto named = NamedParameters(m);
    if (params.size() != named.size()) {
      throw CheckpointError("checkpoint: expected " + std::to_string(named.size()) + " parameter tensors, found " +
                            std::to_string(params.size()));
    }
    for (std::size_t i = 0; i < named.size(); ++i) {
      const json& p = params[i];
      if (p.at("name").get<std::string>() != named[i].first) {
        throw CheckpointError("checkpoint: expected parameter '" + named[i].first + "', found '" +
                              p.at("name").get<std::string>() + "'");
      }
      Shape ps = p.at("shape").get<Shape>();
      auto* target = const_cast<Parameter*>(named[i].second);
      if (ps != target->value().shape()) {
        throw CheckpointError("checkpoint: parameter '" + named[i].first + "' has shape " + ShapeToString(ps) +
                              ", expected " + ShapeToString(target->value().shape()));
      }
      *target = Parameter(Tensor(ps, p.at("values").get<std::vector<double>>()));
    }
    return m;
  } catch (const json::exception& e) {
    throw CheckpointError(std::string("checkpoint: ") + e.what());
  } catch (const ShapeError& e) {
    throw CheckpointError(std::string("checkpoint: ") + e.what());
  }
}

void SaveCheckpoint(const SourceModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::ios_base::failure("cannot write " + path.string());
  out << SerializeCheckpoint(model);
  if (!out) throw std::ios_base::failure("write failed for " + path.string());
}

SourceModel LoadCheckpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::ios_base::failure("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ParseCheckpoint(ss.str());
}

}  // namespace decision
