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

#include "decision/commands.h"

#include <fstream>
#include <functional>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "decision/checkpoint.h"
#include "decision/experiment.h"
#include "decision/oracle.h"
#include "json.hpp"

namespace decision {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

int Guard(std::ostream& err, const std::function<int()>& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kExitIoError;
  } catch (const CheckpointError& e) {
    err << "error: " << e.what() << "\n";
    return kExitIoError;
  } catch (const CsvError& e) {
    err << "error: " << e.what() << "\n";
    return kExitIoError;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitIoError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfigError;
  }
}

ExperimentConfig Load(const CommandOptions& opts) {
  if (opts.config.empty()) throw ConfigError("--config is required");
  ExperimentConfig cfg = LoadConfig(opts.config);
  if (opts.seed) cfg.seed = *opts.seed;
  return cfg;
}

fs::path OutDir(const CommandOptions& opts, const ExperimentConfig& cfg) {
  return opts.out.empty() ? fs::path(cfg.output_dir) : opts.out;
}

std::string ReadText(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void WriteText(const fs::path& path, const std::string& text) {
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
}

json ReadJson(const fs::path& path) {
  try {
    return json::parse(ReadText(path));
  } catch (const json::exception& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

// Models listed by a manifest.json written next to them.
std::vector<SourceModel> LoadManifest(const fs::path& dir, std::vector<double>* alpha = nullptr) {
  const json manifest = ReadJson(dir / "manifest.json");
  std::vector<SourceModel> models;
  try {
    for (const auto& f : manifest.at("files")) models.push_back(LoadCheckpoint(dir / f.get<std::string>()));
    if (alpha) *alpha = manifest.at("alpha").get<std::vector<double>>();
  } catch (const json::exception& e) {
    throw IoError((dir / "manifest.json").string() + ": " + e.what());
  }
  if (models.empty()) throw IoError((dir / "manifest.json").string() + ": no models listed");
  return models;
}

using CsvRows = std::vector<std::vector<std::string>>;

CsvRows ReadCsv(const fs::path& path) {
  std::istringstream in(ReadText(path));
  CsvRows rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(std::move(cells));
  }
  if (rows.empty()) throw IoError(path.string() + ": empty file");
  return rows;
}

}  // namespace

int CmdTrainSources(const CommandOptions& opts, std::ostream& out, std::ostream& err) {
  return Guard(err, [&] {
    const ExperimentConfig cfg = Load(opts);
    const fs::path dir = OutDir(opts, cfg) / "checkpoints";
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());

    const TrainedSources trained = TrainSources(cfg);
    json manifest{{"domains", json::array()}, {"files", json::array()}};
    json report = json::array();
    for (std::size_t j = 0; j < trained.models.size(); ++j) {
      const SourceModel& m = trained.models[j];
      const std::string file = std::to_string(j) + "-" + m.domain + ".ckpt.json";
      SaveCheckpoint(m, dir / file);
      manifest["domains"].push_back(m.domain);
      manifest["files"].push_back(file);
      report.push_back({{"domain", m.domain},
                        {"epochs", trained.metrics[j].epochs},
                        {"final_loss", trained.metrics[j].final_loss},
                        {"train_accuracy", trained.metrics[j].train_accuracy}});
      out << m.domain << ": train accuracy " << trained.metrics[j].train_accuracy << "\n";
    }
    WriteText(dir / "manifest.json", manifest.dump(2) + "\n");
    WriteText(dir / "train_report.json", report.dump(2) + "\n");
    out << "wrote " << trained.models.size() << " checkpoints to " << dir.string() << "\n";
    return kExitOk;
  });
}

int CmdAdapt(const CommandOptions& opts, std::ostream& out, std::ostream& err) {
  return Guard(err, [&] {
    const ExperimentConfig cfg = Load(opts);
    const fs::path dir = OutDir(opts, cfg);
    const fs::path ckpt = opts.checkpoints.empty() ? dir / "checkpoints" : opts.checkpoints;
    const std::vector<SourceModel> sources = LoadManifest(ckpt);
    const RunReport report = RunAdaptation(cfg, sources);
    WriteRunArtifacts(cfg, report, dir);
    for (const auto& m : report.methods) {
      out << std::left << std::setw(18) << m.method << std::fixed << std::setprecision(2) << 100.0 * m.accuracy
          << "\n";
    }
    if (!report.alpha.empty()) {
      out << "alpha:";
      for (std::size_t j = 0; j < report.alpha.size(); ++j) {
        out << " " << report.source_names[j] << "=" << std::setprecision(4) << report.alpha[j];
      }
      out << "\n";
    }
    return kExitOk;
  });
}

int CmdDistill(const CommandOptions& opts, std::ostream& out, std::ostream& err) {
  return Guard(err, [&] {
    const ExperimentConfig cfg = Load(opts);
    const fs::path dir = OutDir(opts, cfg);
    std::vector<double> alpha;
    const std::vector<SourceModel> models = LoadManifest(dir / "adapted", &alpha);
    const TeacherView teacher(models, alpha);
    const TargetData target = PrepareTarget(cfg);
    StudentConfig sc = cfg.distill;
    sc.seed = StreamSeed(cfg.seed, SeedStream::kDistill);
    const StudentResult s = TrainStudent(teacher, target.train, sc);
    const double teacher_acc = Accuracy(teacher.Label(target.eval.inputs), target.eval.labels);
    const double student_acc =
        Accuracy(kernels::ArgmaxRows(s.student.Logits(target.eval.inputs)), target.eval.labels);
    SaveCheckpoint(s.student, dir / "student.ckpt.json");
    const json report{{"teacher_accuracy", teacher_acc}, {"student_accuracy", student_acc}, {"agreement", s.agreement}};
    WriteText(dir / "distill_report.json", report.dump(2) + "\n");
    out << "teacher " << teacher_acc << " student " << student_acc << " agreement " << s.agreement << "\n";
    return kExitOk;
  });
}

int CmdOracle(const CommandOptions& opts, std::ostream& out, std::ostream& err) {
  return Guard(err, [&] {
    oracle::SuiteOptions so;
    so.trials = opts.trials;
    if (opts.seed) {
      so.seed = *opts.seed;
    } else if (!opts.config.empty()) {
      so.seed = LoadConfig(opts.config).seed;
    }
    so.check.corrupt_target_predictor = opts.inject_corrupt_predictor;
    const oracle::SuiteReport report = oracle::RunLemmaSuite(so);
    const std::string text = oracle::ToJson(report);
    if (!opts.out.empty()) WriteText(opts.out / "oracle_report.json", text);
    out << text;
    return report.violations.empty() ? kExitOk : kExitViolation;
  });
}

int CmdReport(const CommandOptions& opts, std::ostream& out, std::ostream& err) {
  return Guard(err, [&] {
    if (opts.runs.empty()) throw ConfigError("report: at least one run directory is required");
    const fs::path dir = opts.out.empty() ? fs::path("report") : opts.out;

    std::string methods = "run,method,accuracy\n";
    std::string pairs = "run,domain,unadapted_accuracy,alpha\n";
    std::string sweep = "run,lambda,accuracy\n";
    bool any_sweep = false;
    json summary = json::array();
    for (const auto& run : opts.runs) {
      const std::string name = run.filename().empty() ? run.parent_path().filename().string() : run.filename().string();
      const CsvRows m = ReadCsv(run / "methods.csv");
      for (std::size_t i = 1; i < m.size(); ++i) {
        if (m[i].size() != 2) throw IoError((run / "methods.csv").string() + ": malformed row " + std::to_string(i + 1));
        methods += name + "," + m[i][0] + "," + m[i][1] + "\n";
      }
      const CsvRows p = ReadCsv(run / "per_source.csv");
      std::vector<double> acc, alpha;
      for (std::size_t i = 1; i < p.size(); ++i) {
        if (p[i].size() < 3) throw IoError((run / "per_source.csv").string() + ": malformed row " + std::to_string(i + 1));
        pairs += name + "," + p[i][0] + "," + p[i][1] + "," + p[i][2] + "\n";
        if (!p[i][2].empty()) {
          acc.push_back(std::stod(p[i][1]));
          alpha.push_back(std::stod(p[i][2]));
        }
      }
      json entry{{"run", name}};
      if (acc.size() >= 2) {
        const double rho = SpearmanCorrelation(acc, alpha);
        entry["spearman_alpha_vs_unadapted_accuracy"] = rho;
        out << name << ": spearman(alpha, unadapted accuracy) = " << rho << "\n";
      }
      summary.push_back(entry);
      if (fs::exists(run / "lambda_sweep.csv")) {
        any_sweep = true;
        const CsvRows s = ReadCsv(run / "lambda_sweep.csv");
        for (std::size_t i = 1; i < s.size(); ++i) sweep += name + "," + s[i][0] + "," + s[i][1] + "\n";
      }
    }
    WriteText(dir / "methods.csv", methods);
    WriteText(dir / "alpha_vs_accuracy.csv", pairs);
    if (any_sweep) WriteText(dir / "lambda_sweep.csv", sweep);
    WriteText(dir / "summary.json", summary.dump(2) + "\n");
    out << methods;
    return kExitOk;
  });
}

}  // namespace decision
