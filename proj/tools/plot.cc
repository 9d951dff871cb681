// Copyright 2026 The irasep Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "plot.h"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "irasep/error.h"

namespace irasep::tools {
namespace {

std::size_t NumBins(const std::vector<LabelledHistogram>& series) {
  std::size_t bins = 0;
  for (const auto& s : series) bins = std::max(bins, s.histogram.counts.size());
  return bins;
}

void CheckAligned(const std::vector<LabelledHistogram>& series) {
  if (series.empty()) throw Error("invalid_argument", "no histograms to write");
  for (const auto& s : series) {
    if (s.histogram.start_db != series[0].histogram.start_db ||
        s.histogram.bin_width_db != series[0].histogram.bin_width_db) {
      throw Error("invalid_argument", "histograms use different bin layouts");
    }
  }
}

int64_t CountAt(const BadcaseHistogram& h, std::size_t bin) {
  return bin < h.counts.size() ? h.counts[bin] : 0;
}

std::string Escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

void WriteHistogramCsv(const std::vector<LabelledHistogram>& series,
                       const std::filesystem::path& path) {
  CheckAligned(series);
  std::ofstream out(path);
  if (!out) throw Error("io", "cannot write " + path.string());
  out << "bin_low_db,bin_high_db";
  for (const auto& s : series) out << ',' << s.label;
  out << '\n';
  const auto& ref = series[0].histogram;
  for (std::size_t b = 0; b < NumBins(series); ++b) {
    out << ref.BinLow(b) << ',' << ref.BinLow(b) + ref.bin_width_db;
    for (const auto& s : series) out << ',' << CountAt(s.histogram, b);
    out << '\n';
  }
  if (!out) throw Error("io", "short write to " + path.string());
}

std::string RenderHistogramSvg(const std::vector<LabelledHistogram>& series) {
  CheckAligned(series);
  static const char* kColours[] = {"#4477aa", "#ee6677", "#228833", "#ccbb44", "#66ccee",
                                   "#aa3377"};
  const std::size_t bins = std::max<std::size_t>(1, NumBins(series));
  int64_t peak = 1;
  for (const auto& s : series)
    for (auto c : s.histogram.counts) peak = std::max(peak, c);

  const double left = 60, top = 40, plot_w = 640, plot_h = 300;
  const double group_w = plot_w / static_cast<double>(bins);
  const double bar_w = group_w * 0.8 / static_cast<double>(series.size());
  const auto& ref = series[0].histogram;

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << left + plot_w + 180
      << "\" height=\"" << top + plot_h + 70 << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << left << "\" y=\"20\" font-size=\"13\">Utterances with SI-SDR below "
      << ref.threshold_db << " dB</text>\n";
  // axes
  svg << "<line x1=\"" << left << "\" y1=\"" << top + plot_h << "\" x2=\"" << left + plot_w
      << "\" y2=\"" << top + plot_h << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\""
      << top + plot_h << "\" stroke=\"black\"/>\n";
  for (int tick = 0; tick <= 4; ++tick) {
    const double v = static_cast<double>(peak) * tick / 4.0;
    const double y = top + plot_h - plot_h * tick / 4.0;
    svg << "<text x=\"" << left - 6 << "\" y=\"" << y + 4 << "\" text-anchor=\"end\">"
        << static_cast<int64_t>(v + 0.5) << "</text>\n";
  }
  for (std::size_t b = 0; b < bins; ++b) {
    const double gx = left + group_w * static_cast<double>(b) + group_w * 0.1;
    for (std::size_t s = 0; s < series.size(); ++s) {
      const double h = plot_h * static_cast<double>(CountAt(series[s].histogram, b)) /
                       static_cast<double>(peak);
      svg << "<rect x=\"" << gx + bar_w * static_cast<double>(s) << "\" y=\""
          << top + plot_h - h << "\" width=\"" << bar_w << "\" height=\"" << h << "\" fill=\""
          << kColours[s % std::size(kColours)] << "\"/>\n";
    }
    svg << "<text x=\"" << left + group_w * (static_cast<double>(b) + 0.5) << "\" y=\""
        << top + plot_h + 14 << "\" text-anchor=\"middle\">" << ref.BinLow(b) << "</text>\n";
  }
  svg << "<text x=\"" << left + plot_w / 2 << "\" y=\"" << top + plot_h + 34
      << "\" text-anchor=\"middle\">SI-SDR bin start (dB)</text>\n";
  for (std::size_t s = 0; s < series.size(); ++s) {
    const double y = top + 14.0 * static_cast<double>(s);
    svg << "<rect x=\"" << left + plot_w + 12 << "\" y=\"" << y << "\" width=\"10\" height=\"10\" fill=\""
        << kColours[s % std::size(kColours)] << "\"/>\n";
    svg << "<text x=\"" << left + plot_w + 26 << "\" y=\"" << y + 9 << "\">"
        << Escape(series[s].label) << " (" << series[s].histogram.Total() << ")</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace irasep::tools
