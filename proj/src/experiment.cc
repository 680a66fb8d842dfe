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

#include "decision/experiment.h"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "decision/checkpoint.h"
#include "decision/random.h"
#include "json.hpp"

namespace decision {
namespace {

// A YAML mapping whose keys must all be consumed before Finish().
class Section {
 public:
  Section(YAML::Node node, std::string path) : node_(std::move(node)), path_(std::move(path)) {
    if (node_ && !node_.IsNull() && !node_.IsMap()) throw ConfigError("config: '" + Label() + "' must be a mapping");
  }

  bool Has(const std::string& key) {
    known_.insert(key);
    return node_ && node_.IsMap() && node_[key] && !node_[key].IsNull();
  }

  double Number(const std::string& key, double fallback) {
    if (!Has(key)) return fallback;
    try {
      return node_[key].as<double>();
    } catch (const YAML::Exception&) {
      throw ConfigError("config: field '" + Field(key) + "' must be a number");
    }
  }

  long long Integer(const std::string& key, long long fallback, long long min_value) {
    if (!Has(key)) return fallback;
    long long v = 0;
    try {
      v = node_[key].as<long long>();
    } catch (const YAML::Exception&) {
      throw ConfigError("config: field '" + Field(key) + "' must be an integer");
    }
    if (v < min_value) {
      throw ConfigError("config: field '" + Field(key) + "' must be >= " + std::to_string(min_value));
    }
    return v;
  }

  std::size_t Count(const std::string& key, std::size_t fallback, long long min_value) {
    return static_cast<std::size_t>(Integer(key, static_cast<long long>(fallback), min_value));
  }

  bool Flag(const std::string& key, bool fallback) {
    if (!Has(key)) return fallback;
    try {
      return node_[key].as<bool>();
    } catch (const YAML::Exception&) {
      throw ConfigError("config: field '" + Field(key) + "' must be true or false");
    }
  }

  std::string Text(const std::string& key, const std::string& fallback) {
    if (!Has(key)) return fallback;
    if (!node_[key].IsScalar()) throw ConfigError("config: field '" + Field(key) + "' must be a string");
    return node_[key].as<std::string>();
  }

  std::vector<double> Numbers(const std::string& key) {
    if (!Has(key)) return {};
    const YAML::Node list = node_[key];
    if (!list.IsSequence()) throw ConfigError("config: field '" + Field(key) + "' must be a list of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < list.size(); ++i) {
      try {
        out.push_back(list[i].as<double>());
      } catch (const YAML::Exception&) {
        throw ConfigError("config: field '" + Field(key) + "[" + std::to_string(i) + "]' must be a number");
      }
    }
    return out;
  }

  Section Child(const std::string& key) {
    Has(key);
    return Section(node_ && node_.IsMap() ? node_[key] : YAML::Node(), Field(key));
  }

  YAML::Node Raw(const std::string& key) {
    Has(key);
    return node_[key];
  }

  std::string Field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  void Finish() const {
    if (!node_ || !node_.IsMap()) return;
    for (const auto& kv : node_) {
      const std::string key = kv.first.as<std::string>();
      if (!known_.count(key)) throw ConfigError("config: unknown key '" + Field(key) + "'");
    }
  }

 private:
  std::string Label() const { return path_.empty() ? "<root>" : path_; }

  YAML::Node node_;
  std::string path_;
  std::set<std::string> known_;
};

DomainSpec ParseDomain(Section s) {
  DomainSpec d;
  d.name = s.Text("name", "");
  if (d.name.empty()) throw ConfigError("config: missing required field '" + s.Field("name") + "'");
  try {
    d.kind = ParseGeneratorKind(s.Text("generator", "two-moons"));
  } catch (const std::invalid_argument& e) {
    throw ConfigError("config: field '" + s.Field("generator") + "': " + e.what());
  }
  const bool has_rad = s.Has("rotation");
  const bool has_deg = s.Has("rotation_deg");
  if (has_rad && has_deg) {
    throw ConfigError("config: fields '" + s.Field("rotation") + "' and '" + s.Field("rotation_deg") +
                      "' are mutually exclusive");
  }
  d.rotation = has_deg ? s.Number("rotation_deg", 0.0) * std::numbers::pi / 180.0 : s.Number("rotation", 0.0);
  const std::vector<double> t = s.Numbers("translation");
  if (!t.empty()) {
    if (t.size() != 2) throw ConfigError("config: field '" + s.Field("translation") + "' must have 2 entries");
    d.translation = {t[0], t[1]};
  }
  d.noise_std = s.Number("noise_std", d.noise_std);
  d.label_noise = s.Number("label_noise", d.label_noise);
  d.samples = s.Count("samples", d.samples, 1);
  d.num_classes = s.Count("num_classes", d.num_classes, 2);
  if (!s.Has("seed")) throw ConfigError("config: missing required field '" + s.Field("seed") + "'");
  d.seed = static_cast<std::uint64_t>(s.Integer("seed", 0, 0));
  s.Finish();
  try {
    d.Validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("config: " + s.Field(e.what()));
  }
  return d;
}

std::string FormatDouble(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void WriteFile(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw IoError("failed writing " + path.string());
}

double EvalAccuracy(std::span<const SourceModel> models, std::span<const double> alpha, const LabeledSet& eval) {
  return Accuracy(EnsemblePredict(models, alpha, eval.inputs), eval.labels);
}

std::vector<double> Uniform(std::size_t n) { return std::vector<double>(n, 1.0 / static_cast<double>(n)); }

}  // namespace

ExperimentConfig ParseConfig(const std::string& yaml) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml);
  } catch (const YAML::Exception& e) {
    throw ConfigError("config: YAML parse error at line " + std::to_string(e.mark.line + 1) + ": " + e.msg);
  }
  ExperimentConfig cfg;
  cfg.text = yaml;
  Section s(root, "");
  cfg.seed = static_cast<std::uint64_t>(s.Integer("seed", 0, 0));
  cfg.output_dir = s.Text("output_dir", cfg.output_dir);
  cfg.train_fraction = s.Number("train_fraction", cfg.train_fraction);
  if (!(cfg.train_fraction > 0.0 && cfg.train_fraction < 1.0)) {
    throw ConfigError("config: field 'train_fraction' must lie in (0, 1)");
  }

  {
    Section m = s.Child("model");
    cfg.model.hidden = m.Count("hidden", cfg.model.hidden, 1);
    cfg.model.feature_dim = m.Count("feature_dim", cfg.model.feature_dim, 1);
    m.Finish();
  }

  if (!s.Has("sources")) throw ConfigError("config: missing required field 'sources'");
  const YAML::Node sources = s.Raw("sources");
  if (!sources.IsSequence() || sources.size() == 0) {
    throw ConfigError("config: field 'sources' must be a non-empty list");
  }
  for (std::size_t i = 0; i < sources.size(); ++i) {
    cfg.sources.push_back(ParseDomain(Section(sources[i], "sources[" + std::to_string(i) + "]")));
  }
  if (!s.Has("target")) throw ConfigError("config: missing required field 'target'");
  cfg.target = ParseDomain(s.Child("target"));
  for (const auto& src : cfg.sources) {
    if (src.num_classes != cfg.target.num_classes) {
      throw ConfigError("config: source '" + src.name + "' has num_classes " + std::to_string(src.num_classes) +
                        " but the target has " + std::to_string(cfg.target.num_classes));
    }
  }
  cfg.model.num_classes = cfg.target.num_classes;

  {
    Section t = s.Child("source_training");
    auto& st = cfg.source_training;
    st.epochs = t.Count("epochs", st.epochs, 1);
    st.batch_size = t.Count("batch_size", st.batch_size, 1);
    st.learning_rate = t.Number("learning_rate", st.learning_rate);
    st.momentum = t.Number("momentum", st.momentum);
    st.weight_decay = t.Number("weight_decay", st.weight_decay);
    st.label_smoothing = t.Number("label_smoothing", st.label_smoothing);
    t.Finish();
    if (!(st.learning_rate > 0.0)) throw ConfigError("config: field 'source_training.learning_rate' must be > 0");
    if (!(st.label_smoothing >= 0.0 && st.label_smoothing < 1.0)) {
      throw ConfigError("config: field 'source_training.label_smoothing' must lie in [0, 1)");
    }
  }

  {
    Section a = s.Child("adaptation");
    auto& ac = cfg.adaptation;
    ac.lambda = a.Number("lambda", ac.lambda);
    ac.epochs = a.Count("epochs", ac.epochs, 0);
    ac.batch_size = a.Count("batch_size", ac.batch_size, 1);
    ac.backbone_lr = a.Number("backbone_lr", ac.backbone_lr);
    ac.alpha_lr = a.Number("alpha_lr", ac.alpha_lr);
    ac.momentum = a.Number("momentum", ac.momentum);
    ac.weight_decay = a.Number("weight_decay", ac.weight_decay);
    ac.refinement_rounds = a.Count("refinement_rounds", ac.refinement_rounds, 0);
    const std::string distance = a.Text("distance", "per-source");
    if (distance == "per-source") {
      ac.distance = CentroidDistance::kPerSource;
    } else if (distance == "combined") {
      ac.distance = CentroidDistance::kCombined;
    } else {
      throw ConfigError("config: field 'adaptation.distance' must be 'per-source' or 'combined'");
    }
    ac.check_invariants = a.Flag("check_invariants", ac.check_invariants);
    Section terms = a.Child("terms");
    ac.terms.entropy = terms.Flag("entropy", true);
    ac.terms.diversity = terms.Flag("diversity", true);
    ac.terms.pseudo_label = terms.Flag("pseudo_label", true);
    terms.Finish();
    cfg.lambda_sweep = a.Numbers("lambda_sweep");
    a.Finish();
    try {
      ac.Validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("config: adaptation.") + e.what());
    }
    for (double l : cfg.lambda_sweep) {
      if (!(l >= 0.0)) throw ConfigError("config: field 'adaptation.lambda_sweep' entries must be >= 0");
    }
  }

  {
    Section d = s.Child("distill");
    auto& dc = cfg.distill;
    dc.epochs = d.Count("epochs", dc.epochs, 0);
    dc.batch_size = d.Count("batch_size", dc.batch_size, 1);
    dc.learning_rate = d.Number("learning_rate", dc.learning_rate);
    dc.momentum = d.Number("momentum", dc.momentum);
    dc.weight_decay = d.Number("weight_decay", dc.weight_decay);
    d.Finish();
  }

  {
    Section b = s.Child("baselines");
    auto& bt = cfg.baselines;
    bt.source_best = b.Flag("source_best", bt.source_best);
    bt.source_worst = b.Flag("source_worst", bt.source_worst);
    bt.uniform_ensemble = b.Flag("uniform_ensemble", bt.uniform_ensemble);
    bt.shot_best = b.Flag("shot_best", bt.shot_best);
    bt.shot_worst = b.Flag("shot_worst", bt.shot_worst);
    bt.shot_ens = b.Flag("shot_ens", bt.shot_ens);
    bt.weights_only = b.Flag("weights_only", bt.weights_only);
    bt.decision = b.Flag("decision", bt.decision);
    bt.distill = b.Flag("distill", bt.distill);
    bt.ablations = b.Flag("ablations", bt.ablations);
    b.Finish();
  }
  s.Finish();
  return cfg;
}

ExperimentConfig LoadConfig(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ParseConfig(ss.str());
}

std::uint64_t StreamSeed(std::uint64_t global, SeedStream stream, std::uint64_t index) {
  return DeriveSeed(DeriveSeed(global, static_cast<std::uint64_t>(stream)), index);
}

DomainSpec ResolveDomain(const ExperimentConfig& cfg, const DomainSpec& spec) {
  DomainSpec out = spec;
  out.seed = StreamSeed(cfg.seed, SeedStream::kData, spec.seed);
  return out;
}

TrainedSources TrainSources(const ExperimentConfig& cfg) {
  TrainedSources out;
  for (std::size_t j = 0; j < cfg.sources.size(); ++j) {
    const DomainSpec spec = ResolveDomain(cfg, cfg.sources[j]);
    const LabeledSet data = GenerateDomain(spec);
    const TrainEvalSplit split = SplitTrainEval(data, cfg.train_fraction, StreamSeed(cfg.seed, SeedStream::kSplit, j + 1));
    SourceModel model = SourceModel::Create(spec.name, cfg.model, StreamSeed(cfg.seed, SeedStream::kInit, j));
    SourceTrainConfig tc = cfg.source_training;
    tc.seed = StreamSeed(cfg.seed, SeedStream::kSourceTrain, j);
    out.metrics.push_back(TrainSource(model, split.train, tc));
    out.models.push_back(std::move(model));
  }
  return out;
}

TargetData PrepareTarget(const ExperimentConfig& cfg) {
  const LabeledSet data = GenerateDomain(ResolveDomain(cfg, cfg.target));
  TrainEvalSplit split = SplitTrainEval(data, cfg.train_fraction, StreamSeed(cfg.seed, SeedStream::kSplit, 0));
  return {StripLabels(split.train), std::move(split.eval)};
}

const MethodResult& RunReport::Method(const std::string& name) const {
  for (const auto& m : methods) {
    if (m.method == name) return m;
  }
  throw std::out_of_range("run report has no method '" + name + "'");
}

bool RunReport::HasMethod(const std::string& name) const {
  return std::any_of(methods.begin(), methods.end(), [&](const MethodResult& m) { return m.method == name; });
}

RunReport RunAdaptation(const ExperimentConfig& cfg, const std::vector<SourceModel>& sources) {
  const auto start = std::chrono::steady_clock::now();
  RequireCompatible(sources);
  const TargetData target = PrepareTarget(cfg);
  if (target.train.input_dim() != sources[0].features.input_dim()) {
    throw ShapeError("adapt", target.train.inputs.shape(), Shape{0, sources[0].features.input_dim()});
  }
  const std::size_t n = sources.size();
  const auto& toggles = cfg.baselines;

  AdaptationConfig ac = cfg.adaptation;
  ac.seed = StreamSeed(cfg.seed, SeedStream::kAdapt);

  RunReport report;
  auto label_entropy = [&](std::span<const SourceModel> models, std::span<const double> alpha) {
    return DiversityLoss(AggregateLogits(models, alpha, target.train.inputs));
  };
  auto add = [&report](const char* name, double acc, std::optional<double> h = std::nullopt) {
    report.methods.push_back({name, acc, h});
  };

  for (const auto& m : sources) {
    report.source_names.push_back(m.domain);
    const SourceModel* one = &m;
    report.unadapted_accuracy.push_back(EvalAccuracy({one, 1}, std::vector<double>{1.0}, target.eval));
  }
  const auto [worst_src, best_src] =
      std::minmax_element(report.unadapted_accuracy.begin(), report.unadapted_accuracy.end());
  if (toggles.source_best) add(methods::kSourceBest, *best_src);
  if (toggles.source_worst) add(methods::kSourceWorst, *worst_src);
  if (toggles.uniform_ensemble) {
    add(methods::kUniformEnsemble, EvalAccuracy(sources, Uniform(n), target.eval),
        label_entropy(sources, Uniform(n)));
  }

  if (toggles.shot_best || toggles.shot_worst || toggles.shot_ens) {
    std::vector<SourceModel> adapted;
    for (const auto& m : sources) {
      AdaptationResult r = Adapt({m}, target.train, ac);
      report.shot_accuracy.push_back(EvalAccuracy(r.models, r.alpha, target.eval));
      adapted.push_back(std::move(r.models[0]));
    }
    const auto [lo, hi] = std::minmax_element(report.shot_accuracy.begin(), report.shot_accuracy.end());
    if (toggles.shot_best) add(methods::kShotBest, *hi);
    if (toggles.shot_worst) add(methods::kShotWorst, *lo);
    if (toggles.shot_ens) add(methods::kShotEns, Accuracy(ShotEnsemblePredict(adapted, target.eval.inputs), target.eval.labels));
  }

  if (toggles.weights_only) {
    AdaptationResult r = WeightsOnlyAdapt(sources, target.train, ac);
    report.weights_only_alpha = r.alpha;
    add(methods::kWeightsOnly, EvalAccuracy(r.models, r.alpha, target.eval), label_entropy(r.models, r.alpha));
  }

  if (toggles.decision || toggles.distill) {
    AdaptHooks hooks;
    hooks.evaluate = [&target](std::span<const SourceModel> models, std::span<const double> alpha) {
      return EvalAccuracy(models, alpha, target.eval);
    };
    AdaptationResult r = Adapt(sources, target.train, ac, hooks);
    report.alpha = r.alpha;
    report.decision_epochs = r.epochs;
    if (toggles.decision) {
      add(methods::kDecision, EvalAccuracy(r.models, r.alpha, target.eval), label_entropy(r.models, r.alpha));
    }
    if (toggles.distill) {
      const TeacherView teacher(r.models, r.alpha);
      StudentConfig sc = cfg.distill;
      sc.seed = StreamSeed(cfg.seed, SeedStream::kDistill);
      StudentResult s = TrainStudent(teacher, target.train, sc);
      report.student_agreement = s.agreement;
      add(methods::kDistill,
          Accuracy(kernels::ArgmaxRows(s.student.Logits(target.eval.inputs)), target.eval.labels));
      report.student = std::move(s.student);
    }
    report.decision = std::move(r);
  }

  if (toggles.ablations) {
    struct Variant {
      const char* name;
      ObjectiveTerms terms;
      double lambda;
    };
    // The pseudo-label-only variant trains on L_pl itself, not lambda * L_pl.
    const Variant variants[] = {
        {methods::kEntropyOnly, {true, false, false}, ac.lambda},
        {methods::kEntropyDiversity, {true, true, false}, ac.lambda},
        {methods::kPseudoLabelOnly, {false, false, true}, 1.0},
    };
    for (const auto& v : variants) {
      AdaptationConfig vc = ac;
      vc.terms = v.terms;
      vc.lambda = v.lambda;
      AdaptationResult r = Adapt(sources, target.train, vc);
      add(v.name, EvalAccuracy(r.models, r.alpha, target.eval), label_entropy(r.models, r.alpha));
    }
  }

  for (double lambda : cfg.lambda_sweep) {
    AdaptationConfig vc = ac;
    vc.lambda = lambda;
    AdaptationResult r = Adapt(sources, target.train, vc);
    report.lambda_sweep.emplace_back(lambda, EvalAccuracy(r.models, r.alpha, target.eval));
  }

  report.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

void WriteRunArtifacts(const ExperimentConfig& cfg, const RunReport& report, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir / "adapted", ec);
  if (ec) throw IoError("cannot create " + (dir / "adapted").string() + ": " + ec.message());

  std::string methods_csv = "method,accuracy\n";
  for (const auto& m : report.methods) methods_csv += m.method + "," + FormatDouble(m.accuracy) + "\n";
  WriteFile(dir / "methods.csv", methods_csv);

  std::string per_source = "domain,unadapted_accuracy,alpha,shot_accuracy\n";
  for (std::size_t j = 0; j < report.source_names.size(); ++j) {
    per_source += report.source_names[j] + "," + FormatDouble(report.unadapted_accuracy[j]) + "," +
                  (report.alpha.empty() ? "" : FormatDouble(report.alpha[j])) + "," +
                  (report.shot_accuracy.empty() ? "" : FormatDouble(report.shot_accuracy[j])) + "\n";
  }
  WriteFile(dir / "per_source.csv", per_source);

  const std::size_t n = report.source_names.size();
  std::string alpha_csv = "epoch";
  for (std::size_t j = 0; j < n; ++j) alpha_csv += ",alpha_" + std::to_string(j + 1);
  alpha_csv += "\n0";
  for (double a : Uniform(n)) alpha_csv += "," + FormatDouble(a);
  alpha_csv += "\n";
  std::string jsonl;
  for (const auto& e : report.decision_epochs) {
    alpha_csv += std::to_string(e.epoch);
    for (double a : e.alpha) alpha_csv += "," + FormatDouble(a);
    alpha_csv += "\n";
    nlohmann::json line;
    line["epoch"] = e.epoch;
    line["L_ent"] = e.entropy;
    line["L_div"] = e.diversity;
    line["L_pl"] = e.pseudo_label;
    line["L_tot"] = e.total;
    line["label_entropy"] = e.full_diversity;
    line["alpha"] = e.alpha;
    if (e.target_accuracy) line["target_accuracy"] = *e.target_accuracy;
    jsonl += line.dump() + "\n";
  }
  if (report.decision) {
    WriteFile(dir / "alpha.csv", alpha_csv);
    WriteFile(dir / "metrics.jsonl", jsonl);
  }

  if (!report.lambda_sweep.empty()) {
    std::string sweep = "lambda,accuracy\n";
    for (const auto& [l, a] : report.lambda_sweep) sweep += FormatDouble(l) + "," + FormatDouble(a) + "\n";
    WriteFile(dir / "lambda_sweep.csv", sweep);
  }

  nlohmann::json j;
  j["seed"] = cfg.seed;
  j["config"] = cfg.text;
  j["methods"] = nlohmann::json::array();
  for (const auto& m : report.methods) {
    nlohmann::json row{{"method", m.method}, {"accuracy", m.accuracy}};
    if (m.label_entropy) row["label_entropy"] = *m.label_entropy;
    j["methods"].push_back(row);
  }
  j["per_source"] = nlohmann::json::array();
  for (std::size_t s = 0; s < n; ++s) {
    nlohmann::json row{{"domain", report.source_names[s]}, {"unadapted_accuracy", report.unadapted_accuracy[s]}};
    if (!report.alpha.empty()) row["alpha"] = report.alpha[s];
    if (!report.shot_accuracy.empty()) row["shot_accuracy"] = report.shot_accuracy[s];
    j["per_source"].push_back(row);
  }
  j["weights_only_alpha"] = report.weights_only_alpha;
  nlohmann::json trajectory = nlohmann::json::array();
  nlohmann::json curves{{"L_ent", nlohmann::json::array()},
                        {"L_div", nlohmann::json::array()},
                        {"L_pl", nlohmann::json::array()},
                        {"L_tot", nlohmann::json::array()}};
  if (report.decision) trajectory.push_back(Uniform(n));
  for (const auto& e : report.decision_epochs) {
    trajectory.push_back(e.alpha);
    curves["L_ent"].push_back(e.entropy);
    curves["L_div"].push_back(e.diversity);
    curves["L_pl"].push_back(e.pseudo_label);
    curves["L_tot"].push_back(e.total);
  }
  j["alpha_trajectory"] = trajectory;
  j["loss_curves"] = curves;
  j["lambda_sweep"] = nlohmann::json::array();
  for (const auto& [l, a] : report.lambda_sweep) j["lambda_sweep"].push_back({{"lambda", l}, {"accuracy", a}});
  if (report.student) j["student_agreement"] = report.student_agreement;
  j["wall_clock_seconds"] = report.wall_clock_seconds;
  WriteFile(dir / "run_report.json", j.dump(2) + "\n");

  if (report.decision) {
    nlohmann::json manifest{{"domains", nlohmann::json::array()}, {"files", nlohmann::json::array()},
                            {"alpha", report.decision->alpha}};
    for (std::size_t s = 0; s < report.decision->models.size(); ++s) {
      const std::string file = std::to_string(s) + "-" + report.decision->models[s].domain + ".ckpt.json";
      SaveCheckpoint(report.decision->models[s], dir / "adapted" / file);
      manifest["domains"].push_back(report.decision->models[s].domain);
      manifest["files"].push_back(file);
    }
    WriteFile(dir / "adapted" / "manifest.json", manifest.dump(2) + "\n");
  }
  if (report.student) SaveCheckpoint(*report.student, dir / "student.ckpt.json");
}

double SpearmanCorrelation(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.size() < 2) throw std::invalid_argument("spearman: need two equal-length series");
  auto ranks = [](std::span<const double> v) {
    std::vector<std::size_t> order(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return v[x] < v[y]; });
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < order.size();) {
      std::size_t j = i;
      while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
      const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
      for (std::size_t k = i; k <= j; ++k) r[order[k]] = avg;
      i = j + 1;
    }
    return r;
  };
  const auto ra = ranks(a), rb = ranks(b);
  const double n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    ma += ra[i] / n;
    mb += rb[i] / n;
  }
  double cov = 0.0, va = 0.0, vb = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    cov += (ra[i] - ma) * (rb[i] - mb);
    va += (ra[i] - ma) * (ra[i] - ma);
    vb += (rb[i] - mb) * (rb[i] - mb);
  }
  if (va == 0.0 || vb == 0.0) return 0.0;
  return cov / std::sqrt(va * vb);
}

}  // namespace decision
