#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "nsurf/core/image.hpp"

namespace nsurf::io {

// One row of a per-frame fusion report CSV.
struct ReportRow {
  int frame_index = 0;
  std::size_t merged = 0;
  std::size_t inserted = 0;
  std::size_t total_surfels = 0;
  std::size_t bytes = 0;
  double ms = 0.0;
};

std::vector<ReportRow> read_report_csv(const std::filesystem::path& path);

// Growth plot over keyframes: top panel total surfel count (blue) and, on
// the same normalised axis, the no-fusion cumulative sum of merged+inserted
// (grey); bottom panel new surfels per keyframe (orange bars) and
// integration time (green line).
ImageF growth_plot(const std::vector<ReportRow>& rows, int width = 640, int height = 480);

}  // namespace nsurf::io
