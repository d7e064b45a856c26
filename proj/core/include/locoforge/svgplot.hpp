/*
 Copyright 2026 The Locoforge Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/
#ifndef LOCOFORGE_SVGPLOT_HPP
#define LOCOFORGE_SVGPLOT_HPP

#include <string>
#include <vector>

namespace locoforge {

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct PlotOptions {
  std::string title;
  std::string x_label;
  std::string y_label;
  int width = 860;
  int height = 520;
};

/// Renders line series into a standalone SVG file. Non-finite samples
/// break the polyline. Throws std::invalid_argument when no series has a
/// finite point or a series has mismatched x/y lengths.
void write_line_plot(const std::string& path, const std::vector<PlotSeries>& series,
                     const PlotOptions& opts);

struct PlotBar {
  std::string label;
  double value = 0.0;
};

/// Renders labeled bars into a standalone SVG file.
void write_bar_plot(const std::string& path, const std::vector<PlotBar>& bars,
                    const PlotOptions& opts);

}  // namespace locoforge

#endif  // LOCOFORGE_SVGPLOT_HPP
