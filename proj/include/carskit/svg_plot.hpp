#pragma once

#include "carskit/common.hpp"

#include <string>

namespace carskit {

// One reconstruction panel: input CARS, optional true Raman, predicted mean
// with a +/- 2 sigma band, optional predicted NRB. Output bytes are
// deterministic for fixed inputs.
struct SpectrumFigure {
  Array omega;
  Array cars;
  Array pred_mean;
  Array pred_std;
  Array raman_true;  // may be empty
  Array pred_nrb;    // may be empty
  std::string title;
};

std::string render_figure_svg(const SpectrumFigure& figure);

}  // namespace carskit
