// Copyright 2026 The irasep Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef IRASEP_TOOLS_PLOT_H_
#define IRASEP_TOOLS_PLOT_H_

#include <filesystem>
#include <string>
#include <vector>

#include "irasep/metrics.h"

namespace irasep::tools {

struct LabelledHistogram {
  std::string label;
  BadcaseHistogram histogram;
};

// One row per bin: bin_low_db,bin_high_db,<label>... Histograms must share
// start and bin width; shorter ones are padded with zero counts.
void WriteHistogramCsv(const std::vector<LabelledHistogram>& series,
                       const std::filesystem::path& path);

// Grouped bar chart, plain SVG.
std::string RenderHistogramSvg(const std::vector<LabelledHistogram>& series);

}  // namespace irasep::tools

#endif  // IRASEP_TOOLS_PLOT_H_
