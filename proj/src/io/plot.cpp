#include "nsurf/io/plot.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "nsurf/core/binary_io.hpp"

namespace nsurf::io {

std::vector<ReportRow> read_report_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError(path.string() + ": cannot open report");
  std::string line;
  if (!std::getline(in, line)) throw FormatError(path.string() + ": empty report");
  std::vector<ReportRow> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    ReportRow r;
    if (!(ss >> r.frame_index >> r.merged >> r.inserted >> r.total_surfels >> r.bytes >> r.ms)) {
      throw FormatError(path.string() + ":" + std::to_string(lineno) + ": malformed report row");
    }
    rows.push_back(r);
  }
  return rows;
}

namespace {

struct Canvas {
  ImageF img;
  Canvas(int w, int h) : img(w, h, 3, 1.0f) {}
  void put(int x, int y, const float (&c)[3]) {
    if (x < 0 || y < 0 || x >= img.width || y >= img.height) return;
    for (int k = 0; k < 3; ++k) img.at(x, y, k) = c[k];
  }
  void line(double x0, double y0, double x1, double y1, const float (&c)[3]) {
    const int steps = static_cast<int>(std::max(std::abs(x1 - x0), std::abs(y1 - y0))) + 1;
    for (int i = 0; i <= steps; ++i) {
      const double t = static_cast<double>(i) / steps;
      const int x = static_cast<int>(std::lround(x0 + t * (x1 - x0)));
      const int y = static_cast<int>(std::lround(y0 + t * (y1 - y0)));
      put(x, y, c);
      put(x, y + 1, c);
    }
  }
  void rect(int x0, int y0, int x1, int y1, const float (&c)[3]) {
    for (int y = std::min(y0, y1); y <= std::max(y0, y1); ++y) {
      for (int x = std::min(x0, x1); x <= std::max(x0, x1); ++x) put(x, y, c);
    }
  }
};

constexpr float kBlack[3] = {0.f, 0.f, 0.f};
constexpr float kGrid[3] = {0.85f, 0.85f, 0.85f};
constexpr float kBlue[3] = {0.12f, 0.47f, 0.71f};
constexpr float kGrey[3] = {0.5f, 0.5f, 0.5f};
constexpr float kOrange[3] = {1.0f, 0.5f, 0.05f};
constexpr float kGreen[3] = {0.17f, 0.63f, 0.17f};

}  // namespace

ImageF growth_plot(const std::vector<ReportRow>& rows, int width, int height) {
  Canvas c(width, height);
  const int margin = 24;
  const int mid = height / 2;
  const int panels[2][2] = {{margin, mid - margin / 2}, {mid + margin / 2, height - margin}};
  for (const auto& p : panels) {
    for (int g = 1; g < 4; ++g) {
      const int y = p[1] - (p[1] - p[0]) * g / 4;
      c.line(margin, y, width - margin, y, kGrid);
    }
    c.line(margin, p[0], margin, p[1], kBlack);
    c.line(margin, p[1], width - margin, p[1], kBlack);
  }
  if (rows.empty()) return c.img;
  const std::size_t n = rows.size();
  double no_fusion = 0.0;
  std::vector<double> cumulative(n);
  double max_new = 1.0, max_ms = 1e-9;
  for (std::size_t i = 0; i < n; ++i) {
    no_fusion += static_cast<double>(rows[i].merged + rows[i].inserted);
    cumulative[i] = no_fusion;
    max_new = std::max(max_new, static_cast<double>(rows[i].inserted));
    max_ms = std::max(max_ms, rows[i].ms);
  }
  const double top = std::max(1.0, no_fusion);
  auto xpos = [&](std::size_t i) {
    return margin + (width - 2.0 * margin) * (n == 1 ? 0.5 : static_cast<double>(i) / (n - 1));
  };
  auto ypos = [&](int panel, double v, double vmax) {
    return panels[panel][1] - (panels[panel][1] - panels[panel][0]) * v / vmax;
  };
  const int bar = std::max(1, static_cast<int>((width - 2 * margin) / (2.0 * n)));
  for (std::size_t i = 0; i < n; ++i) {
    const int x = static_cast<int>(xpos(i));
    c.rect(x - bar / 2, static_cast<int>(ypos(1, static_cast<double>(rows[i].inserted), max_new)), x + bar / 2,
           panels[1][1] - 1, kOrange);
  }
  for (std::size_t i = 1; i < n; ++i) {
    c.line(xpos(i - 1), ypos(0, cumulative[i - 1], top), xpos(i), ypos(0, cumulative[i], top), kGrey);
    c.line(xpos(i - 1), ypos(0, static_cast<double>(rows[i - 1].total_surfels), top), xpos(i),
           ypos(0, static_cast<double>(rows[i].total_surfels), top), kBlue);
    c.line(xpos(i - 1), ypos(1, rows[i - 1].ms, max_ms), xpos(i), ypos(1, rows[i].ms, max_ms), kGreen);
  }
  return c.img;
}

}  // namespace nsurf::io
