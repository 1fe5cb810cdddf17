#include "carskit/svg_plot.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

namespace carskit {

namespace {

constexpr double kWidth = 900.0;
constexpr double kHeight = 480.0;
constexpr double kMarginLeft = 64.0;
constexpr double kMarginRight = 16.0;
constexpr double kMarginTop = 40.0;
constexpr double kMarginBottom = 44.0;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

struct Mapper {
  double x0, x1, y0, y1;

  double px(double x) const {
    return kMarginLeft +
           (x - x0) / (x1 - x0) * (kWidth - kMarginLeft - kMarginRight);
  }
  double py(double y) const {
    return kHeight - kMarginBottom -
           (y - y0) / (y1 - y0) * (kHeight - kMarginTop - kMarginBottom);
  }
};

void polyline(std::ostringstream& svg, const Mapper& map, const Array& x,
              const Array& y, const char* stroke, const char* dash) {
  svg << "<polyline fill=\"none\" stroke=\"" << stroke
      << "\" stroke-width=\"1.5\"";
  if (dash != nullptr) svg << " stroke-dasharray=\"" << dash << "\"";
  svg << " points=\"";
  for (Index i = 0; i < x.size(); ++i) {
    if (i > 0) svg << " ";
    svg << fmt(map.px(x[i])) << "," << fmt(map.py(y[i]));
  }
  svg << "\"/>\n";
}

}  // namespace

std::string render_figure_svg(const SpectrumFigure& figure) {
  const Index n = figure.omega.size();
  if (n < 2 || figure.cars.size() != n || figure.pred_mean.size() != n ||
      figure.pred_std.size() != n) {
    throw DataError("figure: curve length mismatch");
  }

  const Array band_lo = figure.pred_mean - 2.0 * figure.pred_std;
  const Array band_hi = figure.pred_mean + 2.0 * figure.pred_std;

  double y_min = std::min({figure.cars.minCoeff(), band_lo.minCoeff()});
  double y_max = std::max({figure.cars.maxCoeff(), band_hi.maxCoeff()});
  if (figure.raman_true.size() == n) {
    y_min = std::min(y_min, figure.raman_true.minCoeff());
    y_max = std::max(y_max, figure.raman_true.maxCoeff());
  }
  if (figure.pred_nrb.size() == n) {
    y_min = std::min(y_min, figure.pred_nrb.minCoeff());
    y_max = std::max(y_max, figure.pred_nrb.maxCoeff());
  }
  if (!(y_max > y_min)) y_max = y_min + 1.0;
  const double pad = 0.05 * (y_max - y_min);

  Mapper map{figure.omega.minCoeff(), figure.omega.maxCoeff(), y_min - pad,
             y_max + pad};

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
      << "\" height=\"" << kHeight << "\" viewBox=\"0 0 " << kWidth << " "
      << kHeight << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << kMarginLeft << "\" y=\"24\" font-family=\"sans-serif\""
      << " font-size=\"15\">" << figure.title << "</text>\n";

  // axes
  svg << "<line x1=\"" << fmt(map.px(map.x0)) << "\" y1=\""
      << fmt(map.py(map.y0)) << "\" x2=\"" << fmt(map.px(map.x1))
      << "\" y2=\"" << fmt(map.py(map.y0))
      << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
  svg << "<line x1=\"" << fmt(map.px(map.x0)) << "\" y1=\""
      << fmt(map.py(map.y0)) << "\" x2=\"" << fmt(map.px(map.x0))
      << "\" y2=\"" << fmt(map.py(map.y1))
      << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
  svg << "<text x=\"" << fmt(kWidth / 2.0) << "\" y=\"" << fmt(kHeight - 12.0)
      << "\" font-family=\"sans-serif\" font-size=\"12\" "
         "text-anchor=\"middle\">normalized Raman shift</text>\n";

  // +/- 2 sigma band polygon
  svg << "<polygon fill=\"#aecbe8\" fill-opacity=\"0.6\" stroke=\"none\" "
         "points=\"";
  for (Index i = 0; i < n; ++i) {
    if (i > 0) svg << " ";
    svg << fmt(map.px(figure.omega[i])) << "," << fmt(map.py(band_hi[i]));
  }
  for (Index i = n - 1; i >= 0; --i) {
    svg << " " << fmt(map.px(figure.omega[i])) << ","
        << fmt(map.py(band_lo[i]));
  }
  svg << "\"/>\n";

  polyline(svg, map, figure.omega, figure.cars, "#999999", nullptr);
  if (figure.raman_true.size() == n) {
    polyline(svg, map, figure.omega, figure.raman_true, "#000000", "5,3");
  }
  polyline(svg, map, figure.omega, figure.pred_mean, "#1f5fa8", nullptr);
  if (figure.pred_nrb.size() == n) {
    polyline(svg, map, figure.omega, figure.pred_nrb, "#d97712", nullptr);
  }

  // legend
  double ly = kMarginTop + 6.0;
  auto legend = [&](const char* color, const char* dash, const char* label) {
    svg << "<line x1=\"" << fmt(kWidth - 190.0) << "\" y1=\"" << fmt(ly)
        << "\" x2=\"" << fmt(kWidth - 160.0) << "\" y2=\"" << fmt(ly)
        << "\" stroke=\"" << color << "\" stroke-width=\"2\"";
    if (dash != nullptr) svg << " stroke-dasharray=\"" << dash << "\"";
    svg << "/>\n<text x=\"" << fmt(kWidth - 152.0) << "\" y=\""
        << fmt(ly + 4.0)
        << "\" font-family=\"sans-serif\" font-size=\"12\">" << label
        << "</text>\n";
    ly += 18.0;
  };
  legend("#999999", nullptr, "CARS input");
  if (figure.raman_true.size() == n) legend("#000000", "5,3", "true Raman");
  legend("#1f5fa8", nullptr, "predicted mean (&#177;2&#963;)");
  if (figure.pred_nrb.size() == n) legend("#d97712", nullptr, "predicted NRB");

  svg << "</svg>\n";
  return svg.str();
}

}  // namespace carskit
