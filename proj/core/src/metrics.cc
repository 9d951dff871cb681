// Copyright 2026 The irasep Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "irasep/metrics.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "irasep/error.h"

namespace irasep {
namespace {

void CheckPair(std::span<const double> est, std::span<const double> ref) {
  if (est.size() != ref.size()) {
    throw Error("invalid_argument", "length mismatch: " + std::to_string(est.size()) +
                                        " vs " + std::to_string(ref.size()));
  }
  if (ref.empty()) throw Error("invalid_argument", "empty signal");
}

std::vector<double> Centered(std::span<const double> x) {
  double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
  std::vector<double> out(x.begin(), x.end());
  for (double& v : out) v -= mean;
  return out;
}

double Dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

std::string FormatDb(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

double ParseDb(const std::string& s) {
  if (s == "inf") return kPlusInfDb;
  if (s == "-inf") return kMinusInfDb;
  try {
    std::size_t used = 0;
    double v = std::stod(s, &used);
    if (used != s.size()) throw Error("format", "bad number in report: " + s);
    return v;
  } catch (const std::logic_error&) {
    throw Error("format", "bad number in report: " + s);
  }
}

}  // namespace

double SiSdr(std::span<const double> est, std::span<const double> ref) {
  CheckPair(est, ref);
  std::vector<double> e = Centered(est);
  std::vector<double> r = Centered(ref);
  const double ref_energy = Dot(r, r);
  if (ref_energy == 0.0) throw Error("invalid_argument", "zero-energy reference");
  const double alpha = Dot(e, r) / ref_energy;
  if (alpha == 0.0) return kMinusInfDb;
  double target_energy = 0.0, noise_energy = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    const double t = alpha * r[i];
    const double n = t - e[i];
    target_energy += t * t;
    noise_energy += n * n;
  }
  if (noise_energy == 0.0) return kPlusInfDb;
  return 10.0 * std::log10(target_energy / noise_energy);
}

double Sdr(std::span<const double> est, std::span<const double> ref) {
  CheckPair(est, ref);
  double ref_energy = 0.0, noise_energy = 0.0;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    ref_energy += ref[i] * ref[i];
    const double n = ref[i] - est[i];
    noise_energy += n * n;
  }
  if (ref_energy == 0.0) throw Error("invalid_argument", "zero-energy reference");
  if (noise_energy == 0.0) return kPlusInfDb;
  return 10.0 * std::log10(ref_energy / noise_energy);
}

namespace {

// inf - inf would be NaN; an exact estimate always reports +inf improvement
// and a mixture that is already exact reports -inf for any other estimate.
double Improvement(double est_score, double mix_score) {
  if (std::isinf(est_score) || std::isinf(mix_score)) {
    if (est_score == mix_score) return 0.0;
    if (est_score == kPlusInfDb || mix_score == kMinusInfDb) return kPlusInfDb;
    return kMinusInfDb;
  }
  return est_score - mix_score;
}

}  // namespace

double SiSdrImprovement(std::span<const double> est,
                        std::span<const double> mixture,
                        std::span<const double> target) {
  return Improvement(SiSdr(est, target), SiSdr(mixture, target));
}

double SdrImprovement(std::span<const double> est,
                      std::span<const double> mixture,
                      std::span<const double> target) {
  return Improvement(Sdr(est, target), Sdr(mixture, target));
}

double CrossEntropy(std::span<const double> log_probs, int64_t label) {
  if (label < 0 || label >= static_cast<int64_t>(log_probs.size())) {
    throw Error("invalid_argument", "class index " + std::to_string(label) +
                                        " out of range [0, " +
                                        std::to_string(log_probs.size()) + ")");
  }
  return -log_probs[static_cast<std::size_t>(label)];
}

double MultitaskLoss(std::span<const double> est, std::span<const double> target,
                     std::span<const double> logits, int64_t label,
                     double lambda) {
  if (label < 0 || label >= static_cast<int64_t>(logits.size())) {
    throw Error("invalid_argument", "class index out of range");
  }
  const double peak = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (double l : logits) sum += std::exp(l - peak);
  const double log_norm = peak + std::log(sum);
  const double ce = log_norm - logits[static_cast<std::size_t>(label)];
  const double loss = -SiSdr(est, target);
  if (lambda == 0.0) return loss;
  return loss + lambda * ce;
}

MetricRow ScoreExample(std::string example, std::span<const double> est,
                       std::span<const double> mixture,
                       std::span<const double> target) {
  MetricRow row;
  row.example = std::move(example);
  row.si_sdr_db = SiSdr(est, target);
  row.si_sdri_db = Improvement(row.si_sdr_db, SiSdr(mixture, target));
  row.sdr_db = Sdr(est, target);
  row.sdri_db = Improvement(row.sdr_db, Sdr(mixture, target));
  return row;
}

MeanStat FiniteMean(std::span<const double> values) {
  MeanStat s;
  double sum = 0.0;
  for (double v : values) {
    if (std::isfinite(v)) {
      sum += v;
      ++s.count;
    } else {
      ++s.excluded;
    }
  }
  s.mean = s.count > 0 ? sum / static_cast<double>(s.count) : 0.0;
  return s;
}

namespace {

template <typename Field>
MeanStat MeanOf(const std::vector<MetricRow>& rows, Field field) {
  std::vector<double> v;
  v.reserve(rows.size());
  for (const auto& r : rows) v.push_back(r.*field);
  return FiniteMean(v);
}

}  // namespace

MeanStat MetricReport::MeanSiSdr() const { return MeanOf(rows, &MetricRow::si_sdr_db); }
MeanStat MetricReport::MeanSiSdri() const { return MeanOf(rows, &MetricRow::si_sdri_db); }
MeanStat MetricReport::MeanSdr() const { return MeanOf(rows, &MetricRow::sdr_db); }
MeanStat MetricReport::MeanSdri() const { return MeanOf(rows, &MetricRow::sdri_db); }

std::vector<double> MetricReport::SiSdrValues() const {
  std::vector<double> v;
  v.reserve(rows.size());
  for (const auto& r : rows) v.push_back(r.si_sdr_db);
  return v;
}

void WriteReportCsv(const MetricReport& report, const std::filesystem::path& path) {
  const bool has_pesq = !report.rows.empty() &&
                        std::all_of(report.rows.begin(), report.rows.end(),
                                    [](const MetricRow& r) { return r.pesq.has_value(); });
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("io", "cannot write report " + path.string());
  out << "example,si_sdr_db,si_sdri_db,sdr_db,sdri_db" << (has_pesq ? ",pesq" : "") << '\n';
  for (const auto& r : report.rows) {
    if (r.example.find(',') != std::string::npos) {
      throw Error("invalid_argument", "example name contains a comma: " + r.example);
    }
    out << r.example << ',' << FormatDb(r.si_sdr_db) << ',' << FormatDb(r.si_sdri_db)
        << ',' << FormatDb(r.sdr_db) << ',' << FormatDb(r.sdri_db);
    if (has_pesq) out << ',' << FormatDb(*r.pesq);
    out << '\n';
  }
  if (!out) throw Error("io", "short write to " + path.string());
}

MetricReport ReadReportCsv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("io", "cannot open report " + path.string());
  MetricReport report;
  report.label = path.stem().string();
  std::string line;
  if (!std::getline(in, line) || line.rfind("example,si_sdr_db,si_sdri_db,sdr_db,sdri_db", 0) != 0) {
    throw Error("format", "missing report header in " + path.string());
  }
  const bool has_pesq = line.find(",pesq") != std::string::npos;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != (has_pesq ? 6u : 5u)) {
      throw Error("format", "bad report row in " + path.string() + ": " + line);
    }
    MetricRow r;
    r.example = cells[0];
    r.si_sdr_db = ParseDb(cells[1]);
    r.si_sdri_db = ParseDb(cells[2]);
    r.sdr_db = ParseDb(cells[3]);
    r.sdri_db = ParseDb(cells[4]);
    if (has_pesq) r.pesq = ParseDb(cells[5]);
    report.rows.push_back(std::move(r));
  }
  return report;
}

std::string SummaryTable(const std::vector<MetricReport>& reports) {
  std::size_t width = 10;
  for (const auto& r : reports) width = std::max(width, r.label.size());
  const bool any_pesq = std::any_of(reports.begin(), reports.end(), [](const MetricReport& r) {
    return !r.rows.empty() && r.rows.front().pesq.has_value();
  });
  std::ostringstream os;
  os << std::left << std::setw(static_cast<int>(width)) << "Model" << " | "
     << std::right << std::setw(8) << "SI-SDRi" << " | " << std::setw(8) << "SDRi";
  if (any_pesq) os << " | " << std::setw(6) << "PESQ";
  os << " | " << std::setw(6) << "N" << " | excluded\n";
  os << std::string(width, '-') << "-+-" << std::string(8, '-') << "-+-" << std::string(8, '-');
  if (any_pesq) os << "-+-" << std::string(6, '-');
  os << "-+-" << std::string(6, '-') << "-+---------\n";
  os << std::fixed << std::setprecision(2);
  for (const auto& r : reports) {
    const MeanStat si = r.MeanSiSdri();
    const MeanStat sdr = r.MeanSdri();
    os << std::left << std::setw(static_cast<int>(width)) << r.label << " | " << std::right
       << std::setw(8) << si.mean << " | " << std::setw(8) << sdr.mean;
    if (any_pesq) {
      std::vector<double> p;
      for (const auto& row : r.rows) {
        if (row.pesq) p.push_back(*row.pesq);
      }
      if (p.empty()) {
        os << " | " << std::setw(6) << "-";
      } else {
        os << " | " << std::setw(6) << FiniteMean(p).mean;
      }
    }
    os << " | " << std::setw(6) << r.rows.size() << " | " << si.excluded + sdr.excluded << '\n';
  }
  return os.str();
}

int64_t BadcaseHistogram::Total() const {
  return std::accumulate(counts.begin(), counts.end(), int64_t{0});
}

BadcaseHistogram ComputeBadcaseHistogram(std::span<const double> si_sdr_db,
                                         double threshold_db,
                                         double bin_width_db,
                                         std::optional<double> start_db) {
  if (si_sdr_db.empty()) throw Error("invalid_argument", "empty report");
  if (!(bin_width_db > 0)) throw Error("invalid_argument", "bin width must be positive");
  BadcaseHistogram h;
  h.threshold_db = threshold_db;
  h.bin_width_db = bin_width_db;
  if (start_db) {
    h.start_db = *start_db;
  } else {
    double lo = threshold_db;
    for (double v : si_sdr_db) {
      if (std::isfinite(v) && v < lo) lo = v;
    }
    h.start_db = std::floor(lo / bin_width_db) * bin_width_db;
    if (h.start_db >= threshold_db) h.start_db = threshold_db - bin_width_db;
  }
  if (!(h.start_db < threshold_db)) {
    throw Error("invalid_argument", "histogram start must lie below the threshold");
  }
  const auto bins = static_cast<std::size_t>(
      std::ceil((threshold_db - h.start_db) / bin_width_db));
  h.counts.assign(std::max<std::size_t>(bins, 1), 0);
  for (double v : si_sdr_db) {
    if (!(v < threshold_db)) continue;
    std::size_t bin = 0;
    if (v > h.start_db) {
      bin = static_cast<std::size_t>(std::floor((v - h.start_db) / bin_width_db));
      bin = std::min(bin, h.counts.size() - 1);
    }
    ++h.counts[bin];
  }
  return h;
}

BadcaseHistogram ComputeBadcaseHistogram(const MetricReport& report,
                                         double threshold_db,
                                         double bin_width_db,
                                         std::optional<double> start_db) {
  std::vector<double> v = report.SiSdrValues();
  return ComputeBadcaseHistogram(v, threshold_db, bin_width_db, start_db);
}

double CommonHistogramStart(const std::vector<MetricReport>& reports,
                            double threshold_db, double bin_width_db) {
  if (!(bin_width_db > 0)) throw Error("invalid_argument", "bin width must be positive");
  double lo = threshold_db;
  for (const auto& r : reports) {
    for (const auto& row : r.rows) {
      if (std::isfinite(row.si_sdr_db) && row.si_sdr_db < lo) lo = row.si_sdr_db;
    }
  }
  double start = std::floor(lo / bin_width_db) * bin_width_db;
  if (start >= threshold_db) start = threshold_db - bin_width_db;
  return start;
}

double Median(std::vector<double> values) {
  if (values.empty()) throw Error("invalid_argument", "median of empty set");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  if (n % 2 == 1) return values[n / 2];
  return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

}  // namespace irasep
