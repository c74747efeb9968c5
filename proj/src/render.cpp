#include "besim/render.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "besim/errors.hpp"

namespace besim {

namespace {

constexpr const char* kPalette[] = {
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b",
    "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
};
constexpr int kPaletteSize = 10;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

std::string svg_open(double min_x, double min_y, double w, double h) {
  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"" << num(min_x)
    << ' ' << num(min_y) << ' ' << num(w) << ' ' << num(h)
    << "\" width=\"640\" height=\"" << num(640.0 * h / w) << "\">\n";
  return s.str();
}

}  // namespace

std::string render_fly_svg(std::span<const std::vector<FlyPose>> trajectories,
                           const Chamber& chamber,
                           std::vector<std::string>* warnings) {
  double half_w, half_h;
  if (chamber.shape == Chamber::Shape::RECT) {
    half_w = chamber.width / 2;
    half_h = chamber.height / 2;
  } else {
    half_w = half_h = chamber.radius;
  }
  const double margin = std::max(half_w, half_h) * 0.1;

  std::ostringstream s;
  // SVG y grows downward; flip with a group transform so the scene keeps
  // mathematical orientation.
  s << svg_open(-half_w - margin, -half_h - margin, 2 * (half_w + margin),
                2 * (half_h + margin));
  s << "<g transform=\"scale(1,-1)\" fill=\"none\" stroke-width=\"0.5\">\n";
  if (chamber.shape == Chamber::Shape::RECT) {
    s << "<rect x=\"" << num(-half_w) << "\" y=\"" << num(-half_h)
      << "\" width=\"" << num(chamber.width) << "\" height=\""
      << num(chamber.height) << "\" stroke=\"#333333\"/>\n";
  } else {
    s << "<circle cx=\"0\" cy=\"0\" r=\"" << num(chamber.radius)
      << "\" stroke=\"#333333\"/>\n";
  }

  bool drew = false;
  for (size_t a = 0; a < trajectories.size(); ++a) {
    if (trajectories[a].empty()) continue;
    drew = true;
    s << "<polyline stroke=\"" << kPalette[a % kPaletteSize] << "\" points=\"";
    for (size_t i = 0; i < trajectories[a].size(); ++i) {
      if (i) s << ' ';
      s << num(trajectories[a][i].x) << ',' << num(trajectories[a][i].y);
    }
    s << "\"/>\n";
  }
  if (!drew && warnings)
    warnings->push_back("render: no trajectory points, canvas is empty");
  s << "</g>\n</svg>\n";
  return s.str();
}

std::string render_strokes_svg(std::span<const Vec> strokes,
                               std::vector<std::string>* warnings) {
  double x = 0.0, y = 0.0;
  double min_x = 0.0, max_x = 0.0, min_y = 0.0, max_y = 0.0;
  struct Seg {
    double x0, y0, x1, y1;
  };
  std::vector<Seg> segs;
  for (const Vec& m : strokes) {
    require(m.size() == 3, "render: strokes must be (dx, dy, z) rows");
    const double nx = x + m[0], ny = y + m[1];
    if (m[2] != 0.0) segs.push_back({x, y, nx, ny});
    x = nx;
    y = ny;
    min_x = std::min(min_x, nx);
    max_x = std::max(max_x, nx);
    min_y = std::min(min_y, ny);
    max_y = std::max(max_y, ny);
  }
  if (segs.empty() && warnings)
    warnings->push_back("render: no visible stroke segments, canvas is empty");

  const double margin = std::max({max_x - min_x, max_y - min_y, 1.0}) * 0.1;
  std::ostringstream s;
  s << svg_open(min_x - margin, min_y - margin, max_x - min_x + 2 * margin,
                max_y - min_y + 2 * margin);
  s << "<g fill=\"none\" stroke=\"#1f77b4\" stroke-width=\""
    << num(std::max({max_x - min_x, max_y - min_y, 1.0}) / 200.0)
    << "\" stroke-linecap=\"round\">\n";
  for (const Seg& g : segs)
    s << "<line x1=\"" << num(g.x0) << "\" y1=\"" << num(g.y0) << "\" x2=\""
      << num(g.x1) << "\" y2=\"" << num(g.y1) << "\"/>\n";
  s << "</g>\n</svg>\n";
  return s.str();
}

void save_svg(const std::filesystem::path& path, const std::string& svg) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw data_error("cannot write " + path.string());
  f << svg;
}

}  // namespace besim
