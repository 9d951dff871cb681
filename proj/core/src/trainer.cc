// Copyright 2026 The irasep Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "irasep/trainer.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "irasep/audio.h"
#include "irasep/error.h"

namespace irasep {

void TrainConfig::Validate() const {
  if (!(lr0 > 0)) throw Error("config", "lr0 must be > 0");
  if (!(lr_factor > 0 && lr_factor < 1)) throw Error("config", "lr_factor must be in (0, 1)");
  if (patience < 1) throw Error("config", "patience must be >= 1");
  if (epochs < 1) throw Error("config", "epochs must be >= 1");
  if (batch_size < 1) throw Error("config", "batch_size must be >= 1");
  if (!(segment_s > 0)) throw Error("config", "segment_s must be > 0");
  if (steps_per_epoch < 0 || max_steps < 0) throw Error("config", "step caps must be >= 0");
}

nlohmann::json ToJson(const TrainConfig& c) {
  nlohmann::ordered_json j;
  j["lr0"] = c.lr0;
  j["epochs"] = c.epochs;
  j["batch_size"] = c.batch_size;
  j["segment_s"] = c.segment_s;
  j["patience"] = c.patience;
  j["lr_factor"] = c.lr_factor;
  j["seed"] = c.seed;
  j["beta1"] = c.beta1;
  j["beta2"] = c.beta2;
  j["adam_eps"] = c.adam_eps;
  j["grad_clip"] = c.grad_clip;
  j["steps_per_epoch"] = c.steps_per_epoch;
  j["max_steps"] = c.max_steps;
  return j;
}

TrainConfig TrainConfigFromJson(const nlohmann::json& j) {
  static const char* const kKeys[] = {"lr0", "epochs", "batch_size", "segment_s", "patience",
                                      "lr_factor", "seed", "beta1", "beta2", "adam_eps",
                                      "grad_clip", "steps_per_epoch", "max_steps"};
  if (!j.is_object()) throw Error("config", "train config must be an object");
  for (const auto& item : j.items()) {
    if (std::find(std::begin(kKeys), std::end(kKeys), item.key()) == std::end(kKeys)) {
      throw Error("config", "unknown train key: " + item.key());
    }
  }
  TrainConfig c;
  auto get = [&](const char* key, auto* out) {
    if (j.contains(key)) {
      try {
        j.at(key).get_to(*out);
      } catch (const nlohmann::json::exception&) {
        throw Error("config", std::string("bad value for train key ") + key);
      }
    }
  };
  get("lr0", &c.lr0);
  get("epochs", &c.epochs);
  get("batch_size", &c.batch_size);
  get("segment_s", &c.segment_s);
  get("patience", &c.patience);
  get("lr_factor", &c.lr_factor);
  get("seed", &c.seed);
  get("beta1", &c.beta1);
  get("beta2", &c.beta2);
  get("adam_eps", &c.adam_eps);
  get("grad_clip", &c.grad_clip);
  get("steps_per_epoch", &c.steps_per_epoch);
  get("max_steps", &c.max_steps);
  c.Validate();
  return c;
}

double LrStep(std::span<const double> history, double current_lr, const TrainConfig& config) {
  if (history.empty()) throw Error("invalid_argument", "empty validation history");
  double best = history[0];
  int64_t bad = 0;
  bool reduce_now = false;
  for (std::size_t i = 1; i < history.size(); ++i) {
    reduce_now = false;
    if (history[i] < best) {
      best = history[i];
      bad = 0;
    } else if (++bad >= config.patience) {
      reduce_now = true;
      bad = 0;
    }
  }
  return reduce_now ? current_lr * config.lr_factor : current_lr;
}

std::string ConfigHash(const ModelConfig& model, const TrainConfig& train) {
  const std::string text = ToJson(model).dump() + ToJson(train).dump();
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

constexpr char kMagic[8] = {'I', 'R', 'A', 'S', 'E', 'P', 'C', 'K'};
constexpr uint32_t kCheckpointVersion = 1;

template <typename T>
void WritePod(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T ReadPod(std::istream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw Error("format", "truncated checkpoint");
  return value;
}

nlohmann::json MetaToJson(const CheckpointMeta& m) {
  nlohmann::ordered_json j;
  j["epoch"] = m.epoch;
  j["step"] = m.step;
  j["train_loss"] = m.train_loss;
  j["valid_loss"] = m.valid_loss;
  j["current_lr"] = m.current_lr;
  j["best_epoch"] = m.best_epoch;
  j["best_valid_loss"] = m.best_valid_loss;
  j["config_hash"] = m.config_hash;
  return j;
}

CheckpointMeta MetaFromJson(const nlohmann::json& j) {
  CheckpointMeta m;
  m.epoch = j.at("epoch").get<int64_t>();
  m.step = j.at("step").get<int64_t>();
  m.train_loss = j.at("train_loss").get<double>();
  m.valid_loss = j.at("valid_loss").get<double>();
  m.current_lr = j.at("current_lr").get<double>();
  m.best_epoch = j.at("best_epoch").get<int64_t>();
  m.best_valid_loss = j.at("best_valid_loss").get<double>();
  m.config_hash = j.at("config_hash").get<std::string>();
  return m;
}

}  // namespace

void SaveCheckpoint(const std::filesystem::path& path, SpeakerExtractor& model,
                    const TrainConfig& train, const CheckpointMeta& meta,
                    const std::vector<std::string>& speakers) {
  nlohmann::ordered_json header;
  header["model"] = ToJson(model->config());
  header["train"] = ToJson(train);
  CheckpointMeta stamped = meta;
  stamped.config_hash = ConfigHash(model->config(), train);
  header["meta"] = MetaToJson(stamped);
  header["speakers"] = speakers;
  const auto dtype = model->parameters().front().scalar_type();
  header["dtype"] = dtype == torch::kDouble ? "float64" : "float32";
  const std::string header_text = header.dump();

  torch::serialize::OutputArchive archive;
  model->save(archive);
  std::ostringstream blob;
  archive.save_to(blob);
  const std::string blob_text = blob.str();

  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("io", "cannot write checkpoint " + path.string());
    out.write(kMagic, sizeof(kMagic));
    WritePod<uint32_t>(out, kCheckpointVersion);
    WritePod<uint64_t>(out, header_text.size());
    out.write(header_text.data(), static_cast<std::streamsize>(header_text.size()));
    WritePod<uint64_t>(out, blob_text.size());
    out.write(blob_text.data(), static_cast<std::streamsize>(blob_text.size()));
    if (!out) throw Error("io", "short write to " + path.string());
  }
  std::filesystem::rename(tmp, path);
}

LoadedCheckpoint LoadCheckpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("io", "cannot open checkpoint " + path.string());
  char magic[sizeof(kMagic)];
  in.read(magic, sizeof(magic));
  if (!in || !std::equal(std::begin(magic), std::end(magic), std::begin(kMagic))) {
    throw Error("format", "not an irasep checkpoint: " + path.string());
  }
  const auto version = ReadPod<uint32_t>(in);
  if (version != kCheckpointVersion) {
    throw Error("format", "unsupported checkpoint version " + std::to_string(version));
  }
  std::string header_text(ReadPod<uint64_t>(in), '\0');
  in.read(header_text.data(), static_cast<std::streamsize>(header_text.size()));
  std::string blob_text(ReadPod<uint64_t>(in), '\0');
  in.read(blob_text.data(), static_cast<std::streamsize>(blob_text.size()));
  if (!in) throw Error("format", "truncated checkpoint " + path.string());

  LoadedCheckpoint out;
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(header_text);
    out.train = TrainConfigFromJson(header.at("train"));
    out.meta = MetaFromJson(header.at("meta"));
    out.speakers = header.at("speakers").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw Error("format", std::string("bad checkpoint header: ") + e.what());
  }
  const ModelConfig model_config = ModelConfigFromJson(header.at("model"));
  if (ConfigHash(model_config, out.train) != out.meta.config_hash) {
    throw Error("format", "checkpoint config hash mismatch: " + path.string());
  }
  out.model = SpeakerExtractor(model_config);
  if (header.value("dtype", "float32") == "float64") out.model->to(torch::kDouble);
  torch::serialize::InputArchive archive;
  std::istringstream blob(blob_text);
  archive.load_from(blob);
  out.model->load(archive);
  return out;
}

std::vector<std::string> SpeakerVocabulary(const std::vector<ExampleRecord>& records) {
  std::vector<std::string> ids;
  for (const auto& r : records) ids.push_back(r.target_speaker_id);
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

std::vector<TrainingItem> LoadTrainingItems(const std::filesystem::path& manifest,
                                            double segment_s,
                                            const std::vector<std::string>& vocabulary,
                                            torch::ScalarType dtype) {
  const auto records = ReadManifest(manifest);
  if (records.empty()) throw Error("invalid_argument", "empty manifest " + manifest.string());
  std::vector<TrainingItem> items;
  for (const auto& r : records) {
    const AudioSegment mix = LoadAudio(ResolveManifestPath(manifest, r.mixture_path));
    const AudioSegment target = LoadAudio(ResolveManifestPath(manifest, r.target_path));
    const AudioSegment ref = LoadAudio(ResolveManifestPath(manifest, r.reference_path));
    if (mix.size() != target.size()) {
      throw Error("format", "mixture/target length mismatch for " + r.mixture_path);
    }
    auto it = std::lower_bound(vocabulary.begin(), vocabulary.end(), r.target_speaker_id);
    const int64_t speaker = (it != vocabulary.end() && *it == r.target_speaker_id)
                                ? static_cast<int64_t>(it - vocabulary.begin())
                                : -1;
    const auto mix_segments = SegmentFixed(mix, segment_s);
    const auto target_segments = SegmentFixed(target, segment_s);
    const torch::Tensor ref_tensor = ToTensor(ref, dtype);
    for (std::size_t i = 0; i < mix_segments.size(); ++i) {
      const auto& t = target_segments[i].samples;
      if (std::all_of(t.begin(), t.end(), [](double v) { return v == 0.0; })) continue;
      items.push_back({ToTensor(mix_segments[i], dtype), ToTensor(target_segments[i], dtype),
                       ref_tensor, speaker});
    }
  }
  return items;
}

Batch MakeBatch(std::span<const TrainingItem* const> items) {
  if (items.empty()) throw Error("invalid_argument", "empty batch");
  int64_t ref_len = items.front()->reference.size(0);
  for (const auto* it : items) ref_len = std::min(ref_len, it->reference.size(0));
  std::vector<torch::Tensor> mix, target, ref;
  std::vector<int64_t> speakers;
  for (const auto* it : items) {
    mix.push_back(it->mixture);
    target.push_back(it->target);
    ref.push_back(it->reference.narrow(0, 0, ref_len));
    speakers.push_back(it->speaker);
  }
  Batch b;
  b.mixture = torch::stack(mix);
  b.target = torch::stack(target);
  b.reference = torch::stack(ref);
  b.speakers = torch::tensor(speakers, torch::kLong);
  return b;
}

Trainer::Trainer(const ModelConfig& model_config, const TrainConfig& train_config,
                 std::vector<TrainingItem> train_items, std::vector<TrainingItem> valid_items)
    : model_config_(model_config),
      train_config_(train_config),
      train_items_(std::move(train_items)),
      valid_items_(std::move(valid_items)),
      rng_(train_config.seed) {
  model_config_.Validate();
  train_config_.Validate();
  if (train_items_.empty()) throw Error("invalid_argument", "no training items");
  torch::manual_seed(train_config_.seed);
  model_ = SpeakerExtractor(model_config_);
  const auto dtype = train_items_.front().mixture.scalar_type();
  model_->to(dtype);
  lr_ = train_config_.lr0;
  optimizer_ = std::make_unique<torch::optim::Adam>(
      model_->parameters(),
      torch::optim::AdamOptions(lr_)
          .betas({train_config_.beta1, train_config_.beta2})
          .eps(train_config_.adam_eps));
  order_.resize(train_items_.size());
  std::iota(order_.begin(), order_.end(), 0);
  cursor_ = order_.size();
}

Batch Trainer::NextBatch() {
  std::vector<const TrainingItem*> picked;
  const auto want = static_cast<std::size_t>(
      std::min<int64_t>(train_config_.batch_size, static_cast<int64_t>(train_items_.size())));
  while (picked.size() < want) {
    if (cursor_ >= order_.size()) {
      std::shuffle(order_.begin(), order_.end(), rng_);
      cursor_ = 0;
    }
    picked.push_back(&train_items_[order_[cursor_++]]);
  }
  return MakeBatch(picked);
}

LossTerms Trainer::ComputeLoss(const Batch& batch) {
  model_->train();
  const ExtractionTrace trace = model_->Forward(batch.mixture, batch.reference);
  torch::Tensor estimate_loss;
  if (model_config_.loss_all_iterations) {
    std::vector<torch::Tensor> per_iteration;
    for (const auto& est : trace.estimates) {
      per_iteration.push_back(-SiSdrTensor(est, batch.target).mean());
    }
    estimate_loss = torch::stack(per_iteration).mean();
  } else {
    estimate_loss = -SiSdrTensor(trace.final_estimate(), batch.target).mean();
  }

  LossTerms terms;
  terms.si_sdr_loss = estimate_loss;
  terms.ce_loss = torch::zeros({}, estimate_loss.options());
  terms.total = estimate_loss;
  const double lambda = model_config_.lambda;
  auto known = (batch.speakers >= 0).nonzero().squeeze(1);
  if (lambda != 0.0 && model_->aux()->has_classifier() && known.numel() > 0) {
    auto labels = batch.speakers.index_select(0, known);
    std::vector<torch::Tensor> ce_terms;
    const std::size_t last = model_config_.ce_on_refined ? trace.embeddings.size() : 1;
    for (std::size_t i = 0; i < last; ++i) {
      auto log_probs = model_->aux()->Classify(trace.embeddings[i].index_select(0, known));
      ce_terms.push_back(torch::nll_loss(log_probs, labels));
    }
    terms.ce_loss = torch::stack(ce_terms).mean();
    terms.total = estimate_loss + lambda * terms.ce_loss;
  }
  return terms;
}

void Trainer::SetLr(double lr) {
  lr_ = lr;
  for (auto& group : optimizer_->param_groups()) {
    static_cast<torch::optim::AdamOptions&>(group.options()).lr(lr);
  }
}

double Trainer::Step() {
  const Batch batch = NextBatch();
  optimizer_->zero_grad();
  LossTerms terms = ComputeLoss(batch);
  const double loss = terms.total.item<double>();
  if (!std::isfinite(loss)) {
    throw Error("diverged", "non-finite training loss at step " + std::to_string(steps_));
  }
  terms.total.backward();
  if (train_config_.grad_clip > 0) {
    torch::nn::utils::clip_grad_norm_(model_->parameters(), train_config_.grad_clip);
  }
  optimizer_->step();
  ++steps_;
  return loss;
}

double Trainer::ValidationLoss() {
  if (valid_items_.empty()) return 0.0;
  torch::NoGradGuard no_grad;
  model_->eval();
  double total = 0.0;
  const auto bs = static_cast<std::size_t>(train_config_.batch_size);
  for (std::size_t start = 0; start < valid_items_.size(); start += bs) {
    std::vector<const TrainingItem*> chunk;
    for (std::size_t i = start; i < std::min(valid_items_.size(), start + bs); ++i) {
      chunk.push_back(&valid_items_[i]);
    }
    const Batch b = MakeBatch(chunk);
    const auto trace = model_->Forward(b.mixture, b.reference);
    total += -SiSdrTensor(trace.final_estimate(), b.target).sum().item<double>();
  }
  model_->train();
  return total / static_cast<double>(valid_items_.size());
}

EpochStats Trainer::RunEpoch() {
  int64_t steps = train_config_.steps_per_epoch;
  if (steps == 0) {
    steps = (static_cast<int64_t>(train_items_.size()) + train_config_.batch_size - 1) /
            train_config_.batch_size;
  }
  double sum = 0.0;
  int64_t done = 0;
  for (int64_t i = 0; i < steps; ++i) {
    if (train_config_.max_steps > 0 && steps_ >= train_config_.max_steps) break;
    sum += Step();
    ++done;
  }
  EpochStats stats;
  stats.epoch = ++epoch_;
  stats.train_loss = done > 0 ? sum / static_cast<double>(done) : 0.0;
  stats.valid_loss = ValidationLoss();
  valid_history_.push_back(stats.valid_loss);
  SetLr(LrStep(valid_history_, lr_, train_config_));
  stats.lr = lr_;
  return stats;
}

TrainResult Train(const std::filesystem::path& train_manifest,
                  const std::filesystem::path& valid_manifest, ModelConfig model_config,
                  const TrainConfig& train_config, const std::filesystem::path& out_dir,
                  const EpochCallback& on_epoch) {
  train_config.Validate();
  const auto records = ReadManifest(train_manifest);
  if (records.empty()) throw Error("invalid_argument", "empty training manifest");
  const auto speakers = SpeakerVocabulary(records);
  model_config.aux.num_speakers = static_cast<int64_t>(speakers.size());
  model_config.Validate();

  auto train_items = LoadTrainingItems(train_manifest, train_config.segment_s, speakers);
  auto valid_items = LoadTrainingItems(valid_manifest, train_config.segment_s, speakers);
  if (valid_items.empty()) throw Error("invalid_argument", "empty validation split");
  Trainer trainer(model_config, train_config, std::move(train_items), std::move(valid_items));

  std::filesystem::create_directories(out_dir);
  TrainResult result;
  result.best_checkpoint = out_dir / "best.ckpt";
  result.last_checkpoint = out_dir / "last.ckpt";
  result.log = out_dir / "train_log.csv";
  std::ofstream log(result.log, std::ios::trunc);
  if (!log) throw Error("io", "cannot write " + result.log.string());
  log << "# optimizer=adam beta1=" << train_config.beta1 << " beta2=" << train_config.beta2
      << " eps=" << train_config.adam_eps << " grad_clip=" << train_config.grad_clip
      << " weight_decay=0 lr0=" << train_config.lr0 << " lambda=" << model_config.lambda
      << " ira_iterations=" << model_config.ira_iterations << '\n';
  log << "epoch,train_loss,valid_loss,lr\n";
  log << std::setprecision(10);

  CheckpointMeta meta;
  meta.config_hash = ConfigHash(model_config, train_config);
  meta.best_valid_loss = std::numeric_limits<double>::infinity();
  for (int64_t e = 0; e < train_config.epochs; ++e) {
    if (train_config.max_steps > 0 && trainer.steps() >= train_config.max_steps) break;
    const EpochStats stats = trainer.RunEpoch();
    result.epochs.push_back(stats);
    log << stats.epoch << ',' << stats.train_loss << ',' << stats.valid_loss << ','
        << stats.lr << '\n'
        << std::flush;
    meta.epoch = stats.epoch;
    meta.step = trainer.steps();
    meta.train_loss = stats.train_loss;
    meta.valid_loss = stats.valid_loss;
    meta.current_lr = stats.lr;
    auto model = trainer.model();
    if (stats.valid_loss < meta.best_valid_loss) {
      meta.best_valid_loss = stats.valid_loss;
      meta.best_epoch = stats.epoch;
      SaveCheckpoint(result.best_checkpoint, model, train_config, meta, speakers);
    }
    SaveCheckpoint(result.last_checkpoint, model, train_config, meta, speakers);
    if (on_epoch) on_epoch(stats);
  }
  if (result.epochs.empty()) throw Error("invalid_argument", "no epochs were run");
  return result;
}

MetricReport Evaluate(const std::filesystem::path& manifest, SpeakerExtractor& model,
                      int64_t iterations, const std::string& label,
                      const ExternalScorer& scorer) {
  const auto records = ReadManifest(manifest);
  if (records.empty()) throw Error("invalid_argument", "empty manifest " + manifest.string());
  MetricReport report;
  report.label = label;
  for (const auto& r : records) {
    const AudioSegment mix = LoadAudio(ResolveManifestPath(manifest, r.mixture_path));
    const AudioSegment target = LoadAudio(ResolveManifestPath(manifest, r.target_path));
    const AudioSegment ref = LoadAudio(ResolveManifestPath(manifest, r.reference_path));
    const ExtractionResult result = model->Extract(mix, ref, iterations);
    std::string name = r.target_path;
    MetricRow row =
        ScoreExample(name, result.final_estimate().samples, mix.samples, target.samples);
    if (scorer) row.pesq = scorer(result.final_estimate(), target);
    report.rows.push_back(std::move(row));
  }
  return report;
}

MetricReport Validate(const std::filesystem::path& manifest,
                      const std::filesystem::path& checkpoint) {
  LoadedCheckpoint ckpt = LoadCheckpoint(checkpoint);
  return Evaluate(manifest, ckpt.model, ckpt.model->config().ira_iterations,
                  checkpoint.stem().string());
}

}  // namespace irasep
