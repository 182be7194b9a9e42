#pragma once

#include <string>
#include <vector>

namespace qdsim::svg {

struct Series {
    std::string label;
    std::vector<std::pair<double, double>> points;
};

struct Plot {
    Plot(std::string x, std::string y) : x_label(std::move(x)), y_label(std::move(y)) {}
    std::string x_label, y_label;
    std::vector<Series> series;
    int width = 640, height = 480;
};

std::string render_plot(const Plot& plot);
void write_plot(const Plot& plot, const std::string& path);

} // namespace qdsim::svg
