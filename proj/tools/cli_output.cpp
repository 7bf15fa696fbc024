#include "cli_output.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "cli_config.hpp"

namespace jdcli {

std::string csv_text(const std::vector<CsvRow>& rows) {
  std::ostringstream os;
  os << "estimator,param_name,param_value,t,value,branch_count_or_dim,flags\n";
  for (const auto& r : rows) {
    os << r.estimator << ',' << r.param_name << ','
       << format_double(r.param_value) << ',' << format_double(r.t) << ','
       << format_double(r.value) << ',' << format_double(r.branch) << ','
       << r.flags << '\n';
  }
  return os.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file '" + path + "'");
  out << text;
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

namespace {

const char* kColors[] = {"#1f6fb2", "#c0392b", "#27805d", "#8e44ad",
                         "#b7791f", "#2c3e50", "#d35400", "#16747f"};

}  // namespace

std::string svg_plot(const std::vector<PlotSeries>& series,
                     const std::string& x_label, const std::string& y_label) {
  const double W = 720, H = 440;
  const double L = 70, R = 30, T = 30, B = 50;  // margins
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  for (const auto& s : series) {
    for (auto [x, y] : s.points) {
      if (!std::isfinite(x) || !std::isfinite(y)) continue;
      xmin = std::min(xmin, x);
      xmax = std::max(xmax, x);
      ymin = std::min(ymin, y);
      ymax = std::max(ymax, y);
    }
  }
  if (!(xmin < xmax)) {
    xmin -= 0.5;
    xmax += 0.5;
  }
  if (!(ymin < ymax)) {
    ymin -= 0.5;
    ymax += 0.5;
  }
  double ypad = 0.05 * (ymax - ymin);
  ymin -= ypad;
  ymax += ypad;
  auto px = [&](double x) {
    return L + (x - xmin) / (xmax - xmin) * (W - L - R);
  };
  auto py = [&](double y) {
    return H - B - (y - ymin) / (ymax - ymin) * (H - T - B);
  };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W
     << "\" height=\"" << H << "\" viewBox=\"0 0 " << W << ' ' << H
     << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  // axes
  os << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R
     << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L
     << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
  // zero line when visible
  if (ymin < 0 && ymax > 0)
    os << "<line x1=\"" << L << "\" y1=\"" << py(0) << "\" x2=\"" << W - R
       << "\" y2=\"" << py(0)
       << "\" stroke=\"#999999\" stroke-dasharray=\"4 3\"/>\n";
  auto text = [&](double x, double y, const std::string& s,
                  const std::string& anchor) {
    os << "<text x=\"" << x << "\" y=\"" << y
       << "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\""
       << anchor << "\">" << s << "</text>\n";
  };
  text(px(xmin), H - B + 18, format_double(xmin), "start");
  text(px(xmax), H - B + 18, format_double(xmax), "end");
  text(L - 6, py(ymin), format_double(ymin), "end");
  text(L - 6, py(ymax), format_double(ymax), "end");
  text((L + W - R) / 2, H - 14, x_label, "middle");
  text(L, T - 10, y_label, "start");

  int color = 0;
  double legend_y = T + 6;
  for (const auto& s : series) {
    const char* col = kColors[color % 8];
    std::ostringstream pts;
    bool open = false;
    for (auto [x, y] : s.points) {
      if (!std::isfinite(x) || !std::isfinite(y)) {
        if (open) {
          os << "<polyline fill=\"none\" stroke=\"" << col
             << "\" stroke-width=\"1.5\" points=\"" << pts.str() << "\"/>\n";
          pts.str("");
          open = false;
        }
        continue;
      }
      pts << px(x) << ',' << py(y) << ' ';
      open = true;
    }
    if (open)
      os << "<polyline fill=\"none\" stroke=\"" << col
         << "\" stroke-width=\"1.5\" points=\"" << pts.str() << "\"/>\n";
    if (!s.label.empty()) {
      os << "<rect x=\"" << W - R - 150 << "\" y=\"" << legend_y - 9
         << "\" width=\"10\" height=\"10\" fill=\"" << col << "\"/>\n";
      text(W - R - 136, legend_y, s.label, "start");
      legend_y += 16;
    }
    ++color;
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace jdcli
