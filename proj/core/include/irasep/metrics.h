// Copyright 2026 The irasep Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef IRASEP_METRICS_H_
#define IRASEP_METRICS_H_

#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace irasep {

// Sentinels for degenerate scores. +inf: the estimate is an exact multiple of
// the reference (no residual). -inf: the estimate has zero projection on it.
// Aggregates skip both and report how many were skipped.
inline constexpr double kPlusInfDb = std::numeric_limits<double>::infinity();
inline constexpr double kMinusInfDb = -std::numeric_limits<double>::infinity();

// Scale-invariant SDR in dB. Both signals are mean-centred first; the target
// is alpha * ref with alpha = <est, ref> / <ref, ref>.
double SiSdr(std::span<const double> est, std::span<const double> ref);

// Plain SDR 10 log10(|ref|^2 / |ref - est|^2) without the BSS-eval
// distortion filter.
double Sdr(std::span<const double> est, std::span<const double> ref);

double SiSdrImprovement(std::span<const double> est,
                        std::span<const double> mixture,
                        std::span<const double> target);
double SdrImprovement(std::span<const double> est,
                      std::span<const double> mixture,
                      std::span<const double> target);

// Cross-entropy of log-probabilities against a class index.
double CrossEntropy(std::span<const double> log_probs, int64_t label);

// -SiSdr(est, target) + lambda * CE.
double MultitaskLoss(std::span<const double> est, std::span<const double> target,
                     std::span<const double> logits, int64_t label,
                     double lambda);

struct MetricRow {
  std::string example;
  double si_sdr_db = 0.0;
  double si_sdri_db = 0.0;
  double sdr_db = 0.0;
  double sdri_db = 0.0;
  std::optional<double> pesq;
};

MetricRow ScoreExample(std::string example, std::span<const double> est,
                       std::span<const double> mixture,
                       std::span<const double> target);

struct MeanStat {
  double mean = 0.0;
  int64_t count = 0;     // finite values that entered the mean
  int64_t excluded = 0;  // +-inf sentinels
};

MeanStat FiniteMean(std::span<const double> values);

struct MetricReport {
  std::string label;  // model / iteration setting, e.g. "ckpt n=1"
  std::vector<MetricRow> rows;

  MeanStat MeanSiSdr() const;
  MeanStat MeanSiSdri() const;
  MeanStat MeanSdr() const;
  MeanStat MeanSdri() const;
  std::vector<double> SiSdrValues() const;
};

// CSV with header example,si_sdr_db,si_sdri_db,sdr_db,sdri_db[,pesq].
// Infinite values are written as "inf" / "-inf".
void WriteReportCsv(const MetricReport& report, const std::filesystem::path& path);
MetricReport ReadReportCsv(const std::filesystem::path& path);

// Table with one row per report; columns SI-SDRi and SDRi (PESQ when every
// row of the report carries a score).
std::string SummaryTable(const std::vector<MetricReport>& reports);

// Counts of examples with SI-SDR strictly below the threshold, binned by
// width bin_width_db starting at `start_db`. Values below start land in the
// first bin (this includes -inf sentinels).
struct BadcaseHistogram {
  double start_db = 0.0;
  double bin_width_db = 0.0;
  double threshold_db = 0.0;
  std::vector<int64_t> counts;

  int64_t Total() const;
  double BinLow(std::size_t bin) const { return start_db + bin * bin_width_db; }
};

// start_db defaults to floor(min finite value below threshold / width) * width.
BadcaseHistogram ComputeBadcaseHistogram(std::span<const double> si_sdr_db,
                                         double threshold_db,
                                         double bin_width_db,
                                         std::optional<double> start_db = {});
BadcaseHistogram ComputeBadcaseHistogram(const MetricReport& report,
                                         double threshold_db,
                                         double bin_width_db,
                                         std::optional<double> start_db = {});

// Shared lower edge for comparing several reports bin for bin.
double CommonHistogramStart(const std::vector<MetricReport>& reports,
                            double threshold_db, double bin_width_db);

double Median(std::vector<double> values);

}  // namespace irasep

#endif  // IRASEP_METRICS_H_
