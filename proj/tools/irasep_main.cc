// Copyright 2026 The irasep Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)
//
// irasep: simulate / train / evaluate / extract / report.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "irasep/audio.h"
#include "irasep/error.h"
#include "irasep/manifest.h"
#include "irasep/metrics.h"
#include "irasep/mixsim.h"
#include "irasep/model.h"
#include "irasep/trainer.h"
#include "plot.h"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace irasep::tools {
namespace {

struct Globals {
  std::string workdir = ".";
  std::string config_file;
};

fs::path Resolve(const Globals& g, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : fs::path(g.workdir) / path;
}

// Top level of the config file: {"simulate": {...}, "model": {...}, "train": {...}}.
json LoadConfigFile(const Globals& g) {
  json cfg = json::object();
  if (g.config_file.empty()) return cfg;
  const fs::path path = Resolve(g, g.config_file);
  std::ifstream in(path);
  if (!in) throw Error("io", "cannot open config " + path.string());
  try {
    cfg = json::parse(in);
  } catch (const json::exception& e) {
    throw Error("config", path.string() + ": " + e.what());
  }
  if (!cfg.is_object()) throw Error("config", "config file must hold an object");
  for (const auto& item : cfg.items()) {
    if (item.key() != "simulate" && item.key() != "model" && item.key() != "train") {
      throw Error("config", "unknown config section: " + item.key());
    }
  }
  return cfg;
}

json Section(const json& cfg, const char* name) {
  return cfg.contains(name) ? cfg.at(name) : json::object();
}

void EchoConfig(const fs::path& dir, const std::string& command, const json& effective) {
  fs::create_directories(dir);
  json out;
  out["command"] = command;
  for (const auto& item : effective.items()) out[item.key()] = item.value();
  const fs::path path = dir / "effective_config.json";
  std::ofstream f(path);
  f << out.dump(2) << '\n';
  if (!f) throw Error("io", "cannot write " + path.string());
}

// ---- simulate ------------------------------------------------------------

struct SimulateFlags {
  std::optional<int> profiles, n_train, n_valid, n_test, test_speakers;
  std::vector<double> snr_range, noise_snr_range, utterance_s;
  std::optional<std::string> noise;
  std::optional<double> reference_s;
  std::optional<uint64_t> seed;
  std::optional<bool> open_condition, both_targets;
  std::string out_dir = "corpus";
};

const char* kSimulateKeys[] = {"profiles", "train", "valid", "test", "snr_range", "noise",
                               "noise_snr_range", "utterance_s", "reference_s",
                               "open_condition", "test_speakers", "both_targets", "seed"};

json SimulateDefaults() {
  json j;
  j["profiles"] = 24;
  j["train"] = 100;
  j["valid"] = 20;
  j["test"] = 20;
  j["snr_range"] = {-5.0, 5.0};
  j["noise"] = false;
  j["noise_snr_range"] = {-3.0, 6.0};
  j["utterance_s"] = {4.0, 4.0};
  j["reference_s"] = 4.0;
  j["open_condition"] = true;
  j["test_speakers"] = 0;
  j["both_targets"] = false;
  j["seed"] = 1;
  return j;
}

template <typename T>
T GetKey(const json& j, const char* section, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw Error("config", std::string("bad value for ") + section + " key " + key);
  }
}

std::pair<double, double> GetRange(const json& j, const char* key) {
  const auto v = GetKey<std::vector<double>>(j, "simulate", key);
  if (v.size() != 2) throw Error("config", std::string("simulate key ") + key + " needs two values");
  return {v[0], v[1]};
}

void RunSimulate(const Globals& g, const SimulateFlags& f) {
  json sim = SimulateDefaults();
  const json file_section = Section(LoadConfigFile(g), "simulate");
  for (const auto& item : file_section.items()) {
    if (std::find(std::begin(kSimulateKeys), std::end(kSimulateKeys), item.key()) ==
        std::end(kSimulateKeys)) {
      throw Error("config", "unknown simulate key: " + item.key());
    }
    sim[item.key()] = item.value();
  }
  if (f.profiles) sim["profiles"] = *f.profiles;
  if (f.n_train) sim["train"] = *f.n_train;
  if (f.n_valid) sim["valid"] = *f.n_valid;
  if (f.n_test) sim["test"] = *f.n_test;
  if (f.test_speakers) sim["test_speakers"] = *f.test_speakers;
  if (!f.snr_range.empty()) sim["snr_range"] = f.snr_range;
  if (!f.noise_snr_range.empty()) sim["noise_snr_range"] = f.noise_snr_range;
  if (!f.utterance_s.empty()) sim["utterance_s"] = f.utterance_s;
  if (f.noise) sim["noise"] = (*f.noise == "on");
  if (f.reference_s) sim["reference_s"] = *f.reference_s;
  if (f.seed) sim["seed"] = *f.seed;
  if (f.open_condition) sim["open_condition"] = *f.open_condition;
  if (f.both_targets) sim["both_targets"] = *f.both_targets;

  CorpusConfig cc;
  cc.out_dir = Resolve(g, f.out_dir);
  cc.n_train = GetKey<int>(sim, "simulate", "train");
  cc.n_valid = GetKey<int>(sim, "simulate", "valid");
  cc.n_test = GetKey<int>(sim, "simulate", "test");
  std::tie(cc.snr_min_db, cc.snr_max_db) = GetRange(sim, "snr_range");
  std::tie(cc.noise_snr_min_db, cc.noise_snr_max_db) = GetRange(sim, "noise_snr_range");
  std::tie(cc.utterance_min_s, cc.utterance_max_s) = GetRange(sim, "utterance_s");
  cc.noise = GetKey<bool>(sim, "simulate", "noise");
  cc.reference_s = GetKey<double>(sim, "simulate", "reference_s");
  cc.open_condition = GetKey<bool>(sim, "simulate", "open_condition");
  cc.test_speakers = GetKey<int>(sim, "simulate", "test_speakers");
  cc.both_targets = GetKey<bool>(sim, "simulate", "both_targets");
  cc.seed = GetKey<uint64_t>(sim, "simulate", "seed");
  const int profiles = GetKey<int>(sim, "simulate", "profiles");

  const CorpusManifests m = BuildCorpus(MakeProfiles(profiles, cc.seed), cc);
  std::size_t total = 0;
  for (const auto& p : {m.train, m.valid, m.test}) total += ReadManifest(p).size();
  json eff;
  eff["simulate"] = sim;
  EchoConfig(cc.out_dir, "simulate", eff);
  std::cout << "wrote " << total << " examples to " << cc.out_dir.string() << '\n';
}

// ---- train ---------------------------------------------------------------

struct TrainFlags {
  std::string train_manifest = "corpus/train.jsonl";
  std::string valid_manifest = "corpus/valid.jsonl";
  std::string out_dir = "run";
  std::optional<int64_t> ira_iterations, epochs, batch_size, patience, steps_per_epoch,
      max_steps;
  std::optional<double> lambda, lr, segment_s;
  std::optional<uint64_t> seed;
};

void RunTrain(const Globals& g, const TrainFlags& f) {
  const json file = LoadConfigFile(g);
  json model = ToJson(ModelConfigFromJson(Section(file, "model")));
  json train = ToJson(TrainConfigFromJson(Section(file, "train")));
  if (f.ira_iterations) model["ira_iterations"] = *f.ira_iterations;
  if (f.lambda) model["lambda"] = *f.lambda;
  if (f.epochs) train["epochs"] = *f.epochs;
  if (f.batch_size) train["batch_size"] = *f.batch_size;
  if (f.patience) train["patience"] = *f.patience;
  if (f.steps_per_epoch) train["steps_per_epoch"] = *f.steps_per_epoch;
  if (f.max_steps) train["max_steps"] = *f.max_steps;
  if (f.lr) train["lr0"] = *f.lr;
  if (f.segment_s) train["segment_s"] = *f.segment_s;
  if (f.seed) train["seed"] = *f.seed;
  const ModelConfig model_cfg = ModelConfigFromJson(model);
  const TrainConfig train_cfg = TrainConfigFromJson(train);
  train_cfg.Validate();

  const fs::path out = Resolve(g, f.out_dir);
  json eff;
  eff["model"] = model;
  eff["train"] = train;
  eff["train_manifest"] = Resolve(g, f.train_manifest).string();
  eff["valid_manifest"] = Resolve(g, f.valid_manifest).string();
  EchoConfig(out, "train", eff);

  const TrainResult result = Train(
      Resolve(g, f.train_manifest), Resolve(g, f.valid_manifest), model_cfg, train_cfg, out,
      [](const EpochStats& e) {
        std::cout << "epoch " << e.epoch << " train_loss " << e.train_loss << " valid_loss "
                  << e.valid_loss << " lr " << e.lr << std::endl;
      });
  // reload to make sure what we wrote is usable
  LoadCheckpoint(result.best_checkpoint);
  LoadCheckpoint(result.last_checkpoint);
  std::cout << "best checkpoint " << result.best_checkpoint.string() << '\n';
}

// ---- evaluate ------------------------------------------------------------

struct EvaluateFlags {
  std::string manifest = "corpus/test.jsonl";
  std::vector<std::string> checkpoints;
  std::vector<int64_t> iterations;
  std::string out_dir = "eval";
  std::string pesq_cmd;
};

std::string SafeName(std::string s) {
  for (char& c : s) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_') c = '_';
  }
  return s;
}

// Runs an external scorer. {reference} and {estimate} in the template are
// replaced by WAV paths; the last number on stdout is the score.
ExternalScorer MakeCommandScorer(const std::string& cmd, const fs::path& scratch) {
  return [cmd, scratch](const AudioSegment& est, const AudioSegment& ref) -> std::optional<double> {
    fs::create_directories(scratch);
    const fs::path est_path = scratch / "estimate.wav", ref_path = scratch / "reference.wav";
    WriteAudio(est_path, est);
    WriteAudio(ref_path, ref);
    std::string line = cmd;
    auto sub = [&](const std::string& key, const std::string& value) {
      for (std::size_t pos; (pos = line.find(key)) != std::string::npos;) line.replace(pos, key.size(), value);
    };
    sub("{estimate}", est_path.string());
    sub("{reference}", ref_path.string());
    std::unique_ptr<FILE, int (*)(FILE*)> pipe(popen(line.c_str(), "r"), pclose);
    if (!pipe) throw Error("pesq", "cannot run " + line);
    std::string output;
    char buf[256];
    while (std::fgets(buf, sizeof(buf), pipe.get())) output += buf;
    const int status = pclose(pipe.release());
    if (status != 0) throw Error("pesq", "scorer exited with status " + std::to_string(status));
    std::istringstream tokens(output);
    std::optional<double> last;
    for (std::string tok; tokens >> tok;) {
      try {
        std::size_t used = 0;
        const double v = std::stod(tok, &used);
        if (used == tok.size()) last = v;
      } catch (const std::exception&) {
      }
    }
    if (!last) throw Error("pesq", "scorer printed no number");
    return last;
  };
}

void RunEvaluate(const Globals& g, const EvaluateFlags& f) {
  if (f.checkpoints.empty()) throw Error("usage", "at least one --checkpoint is required");
  const fs::path out = Resolve(g, f.out_dir);
  const fs::path manifest = Resolve(g, f.manifest);
  json eff;
  eff["manifest"] = manifest.string();
  eff["checkpoints"] = json::array();
  for (const auto& c : f.checkpoints) eff["checkpoints"].push_back(Resolve(g, c).string());
  eff["iterations"] = f.iterations;
  eff["pesq_cmd"] = f.pesq_cmd;
  EchoConfig(out, "evaluate", eff);

  ExternalScorer scorer;
  if (!f.pesq_cmd.empty()) scorer = MakeCommandScorer(f.pesq_cmd, out / "pesq_scratch");
  std::vector<MetricReport> reports;
  for (const auto& c : f.checkpoints) {
    const fs::path ckpt_path = Resolve(g, c);
    LoadedCheckpoint ckpt = LoadCheckpoint(ckpt_path);
    std::vector<int64_t> ns = f.iterations;
    if (ns.empty()) ns.push_back(ckpt.model->config().ira_iterations);
    for (int64_t n : ns) {
      const std::string stem = ckpt_path.parent_path().filename().string() + "/" +
                               ckpt_path.stem().string();
      const std::string label = stem + " n=" + std::to_string(n);
      MetricReport report = Evaluate(manifest, ckpt.model, n, label, scorer);
      const fs::path csv = out / (SafeName(stem + "_n" + std::to_string(n)) + ".csv");
      WriteReportCsv(report, csv);
      if (ReadReportCsv(csv).rows.size() != report.rows.size()) {
        throw Error("io", "report check failed for " + csv.string());
      }
      reports.push_back(std::move(report));
    }
  }
  const std::string table = SummaryTable(reports);
  std::ofstream(out / "summary.txt") << table;
  std::cout << table;
}

// ---- extract -------------------------------------------------------------

struct ExtractFlags {
  std::string mixture, reference, checkpoint, output = "estimate.wav";
  std::optional<int64_t> iterations;
};

void RunExtract(const Globals& g, const ExtractFlags& f) {
  const AudioSegment mix = LoadAudio(Resolve(g, f.mixture));
  const AudioSegment ref = LoadAudio(Resolve(g, f.reference));
  LoadedCheckpoint ckpt = LoadCheckpoint(Resolve(g, f.checkpoint));
  const int64_t n = f.iterations.value_or(ckpt.model->config().ira_iterations);
  const ExtractionResult result = ckpt.model->Extract(mix, ref, n);
  const fs::path out = Resolve(g, f.output);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  WriteAudio(out, result.final_estimate());
  if (LoadAudio(out).size() != mix.size()) throw Error("io", "written estimate has wrong length");
  json eff;
  eff["mixture"] = Resolve(g, f.mixture).string();
  eff["reference"] = Resolve(g, f.reference).string();
  eff["checkpoint"] = Resolve(g, f.checkpoint).string();
  eff["iterations"] = n;
  eff["output"] = out.string();
  const fs::path dir = out.has_parent_path() ? out.parent_path() : fs::path(".");
  EchoConfig(dir, "extract", eff);
  std::cout << "wrote " << mix.size() << " samples to " << out.string() << '\n';
}

// ---- report --------------------------------------------------------------

struct ReportFlags {
  std::vector<std::string> reports;
  double threshold = 15.0;
  double bin_width = 1.0;
  std::string out_dir = "report";
};

void RunReport(const Globals& g, const ReportFlags& f) {
  if (f.reports.empty()) throw Error("usage", "at least one --report is required");
  std::vector<MetricReport> reports;
  for (const auto& r : f.reports) {
    MetricReport rep = ReadReportCsv(Resolve(g, r));
    rep.label = fs::path(r).stem().string();
    reports.push_back(std::move(rep));
  }
  const double start = CommonHistogramStart(reports, f.threshold, f.bin_width);
  std::vector<LabelledHistogram> series;
  for (const auto& rep : reports) {
    series.push_back({rep.label, ComputeBadcaseHistogram(rep, f.threshold, f.bin_width, start)});
  }
  const fs::path out = Resolve(g, f.out_dir);
  json eff;
  eff["reports"] = json::array();
  for (const auto& r : f.reports) eff["reports"].push_back(Resolve(g, r).string());
  eff["threshold_db"] = f.threshold;
  eff["bin_width_db"] = f.bin_width;
  EchoConfig(out, "report", eff);
  WriteHistogramCsv(series, out / "badcase_histogram.csv");
  {
    std::ofstream svg(out / "badcase_histogram.svg");
    svg << RenderHistogramSvg(series);
    if (!svg) throw Error("io", "cannot write histogram image");
  }
  std::cout << SummaryTable(reports);
  for (const auto& s : series) {
    std::cout << s.label << ": " << s.histogram.Total() << " below " << f.threshold << " dB\n";
  }
}

}  // namespace
}  // namespace irasep::tools

int main(int argc, char** argv) {
  using namespace irasep::tools;
  CLI::App app{"Target speaker extraction with iterative embedding refinement"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--workdir", g.workdir, "Root for all relative paths");
  app.add_option("--config", g.config_file, "JSON config file (sections simulate/model/train)");

  SimulateFlags sim;
  auto* s = app.add_subcommand("simulate", "Generate a synthetic two-speaker corpus");
  s->add_option("--profiles", sim.profiles, "Number of synthetic speakers");
  s->add_option("--train", sim.n_train, "Training mixtures");
  s->add_option("--valid", sim.n_valid, "Validation mixtures");
  s->add_option("--test", sim.n_test, "Test mixtures");
  s->add_option("--snr-range", sim.snr_range, "Target-to-interferer SNR range (dB)")
      ->expected(2)->delimiter(',');
  s->add_option("--noise", sim.noise, "Add background noise")->check(CLI::IsMember({"on", "off"}));
  s->add_option("--noise-snr-range", sim.noise_snr_range, "Speech-to-noise range (dB)")
      ->expected(2)->delimiter(',');
  s->add_option("--utterance-s", sim.utterance_s, "Utterance length range (s)")
      ->expected(2)->delimiter(',');
  s->add_option("--reference-s", sim.reference_s, "Reference utterance length (s)");
  s->add_option("--open-condition", sim.open_condition, "Hold out test speakers (true/false)");
  s->add_option("--test-speakers", sim.test_speakers, "Held-out speaker count (0: auto)");
  s->add_option("--both-targets", sim.both_targets, "One record per speaker (true/false)");
  s->add_option("--seed", sim.seed, "Master seed");
  s->add_option("--out-dir", sim.out_dir, "Corpus directory");

  TrainFlags tr;
  auto* t = app.add_subcommand("train", "Train a model");
  t->add_option("--train-manifest", tr.train_manifest);
  t->add_option("--valid-manifest", tr.valid_manifest);
  t->add_option("--out-dir", tr.out_dir);
  t->add_option("-n,--ira-iterations", tr.ira_iterations, "Unrolled refinement iterations");
  t->add_option("--lambda", tr.lambda, "Speaker classification loss weight");
  t->add_option("--lr", tr.lr, "Initial learning rate");
  t->add_option("--epochs", tr.epochs);
  t->add_option("--batch-size", tr.batch_size);
  t->add_option("--segment-s", tr.segment_s, "Training segment length (s)");
  t->add_option("--patience", tr.patience, "Epochs without improvement before halving");
  t->add_option("--steps-per-epoch", tr.steps_per_epoch, "0: one pass");
  t->add_option("--max-steps", tr.max_steps, "0: unlimited");
  t->add_option("--seed", tr.seed);

  EvaluateFlags ev;
  auto* e = app.add_subcommand("evaluate", "Score checkpoints on a manifest");
  e->add_option("--manifest", ev.manifest);
  e->add_option("--checkpoint", ev.checkpoints, "Checkpoint(s) to score")->required();
  e->add_option("-n,--iterations", ev.iterations, "Iteration counts (default: trained n)");
  e->add_option("--out-dir", ev.out_dir);
  e->add_option("--pesq-cmd", ev.pesq_cmd,
                "External scorer command with {reference} and {estimate} placeholders");

  ExtractFlags ex;
  auto* x = app.add_subcommand("extract", "Extract the target speaker from one mixture");
  x->add_option("--mixture", ex.mixture)->required();
  x->add_option("--reference", ex.reference)->required();
  x->add_option("--checkpoint", ex.checkpoint)->required();
  x->add_option("-n,--iterations", ex.iterations);
  x->add_option("--output", ex.output);

  ReportFlags rp;
  auto* r = app.add_subcommand("report", "Bad-case histogram from metric CSVs");
  r->add_option("--report", rp.reports, "Metric CSV(s)")->required();
  r->add_option("--threshold", rp.threshold, "SI-SDR threshold (dB)");
  r->add_option("--bin-width", rp.bin_width, "Histogram bin width (dB)");
  r->add_option("--out-dir", rp.out_dir);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& err) {
    return app.exit(err);
  } catch (const CLI::ParseError& err) {
    std::cerr << "error: usage: " << err.what() << '\n';
    return 2;
  }
  try {
    if (s->parsed()) RunSimulate(g, sim);
    if (t->parsed()) RunTrain(g, tr);
    if (e->parsed()) RunEvaluate(g, ev);
    if (x->parsed()) RunExtract(g, ex);
    if (r->parsed()) RunReport(g, rp);
  } catch (const irasep::Error& err) {
    std::cerr << "error: " << err.code() << ": " << err.what() << '\n';
    return 1;
  } catch (const std::exception& err) {
    std::cerr << "error: internal: " << err.what() << '\n';
    return 1;
  }
  return 0;
}
