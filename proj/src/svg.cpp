#include "qdsim/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "qdsim/errors.hpp"

namespace qdsim::svg {

namespace {
const char* kColors[] = {"#1f6fb4", "#7bb2e0", "#b0306a", "#e08ab0", "#2c8c50", "#888888"};

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.5g", v);
    return buf;
}
} // namespace

std::string render_plot(const Plot& plot) {
    double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
    bool first = true;
    for (const auto& s : plot.series) {
        for (const auto& [x, y] : s.points) {
            if (!std::isfinite(x) || !std::isfinite(y)) continue;
            if (first) { xmin = xmax = x; ymin = ymax = y; first = false; }
            xmin = std::min(xmin, x); xmax = std::max(xmax, x);
            ymin = std::min(ymin, y); ymax = std::max(ymax, y);
        }
    }
    if (xmax == xmin) xmax = xmin + 1;
    if (ymax == ymin) ymax = ymin + 1;
    const double padx = 0.06 * (xmax - xmin), pady = 0.08 * (ymax - ymin);
    xmin -= padx; xmax += padx; ymin -= pady; ymax += pady;

    const double ml = 60, mr = 20, mt = 20, mb = 45;
    const double pw = plot.width - ml - mr, ph = plot.height - mt - mb;
    auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * pw; };
    auto py = [&](double y) { return mt + (1.0 - (y - ymin) / (ymax - ymin)) * ph; };

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << plot.width << "\" height=\""
       << plot.height << "\" viewBox=\"0 0 " << plot.width << " " << plot.height << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << pw << "\" height=\"" << ph
       << "\" fill=\"none\" stroke=\"#333\"/>\n";

    for (int t = 0; t <= 4; ++t) {
        const double fx = xmin + (xmax - xmin) * t / 4.0;
        const double fy = ymin + (ymax - ymin) * t / 4.0;
        os << "<text x=\"" << px(fx) << "\" y=\"" << (mt + ph + 16)
           << "\" font-size=\"11\" text-anchor=\"middle\" fill=\"#333\">" << num(fx)
           << "</text>\n";
        os << "<text x=\"" << (ml - 6) << "\" y=\"" << (py(fy) + 4)
           << "\" font-size=\"11\" text-anchor=\"end\" fill=\"#333\">" << num(fy) << "</text>\n";
    }
    os << "<text x=\"" << (ml + pw / 2) << "\" y=\"" << (plot.height - 8)
       << "\" font-size=\"12\" text-anchor=\"middle\" fill=\"#111\">" << plot.x_label
       << "</text>\n";
    os << "<text x=\"14\" y=\"" << (mt + ph / 2)
       << "\" font-size=\"12\" text-anchor=\"middle\" fill=\"#111\" transform=\"rotate(-90 14 "
       << (mt + ph / 2) << ")\">" << plot.y_label << "</text>\n";

    int ci = 0;
    double ly = mt + 14;
    for (const auto& s : plot.series) {
        const char* color = kColors[ci % 6];
        ++ci;
        std::vector<std::pair<double, double>> pts = s.points;
        std::sort(pts.begin(), pts.end());
        os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        for (const auto& [x, y] : pts)
            if (std::isfinite(x) && std::isfinite(y)) os << px(x) << "," << py(y) << " ";
        os << "\"/>\n";
        for (const auto& [x, y] : pts)
            if (std::isfinite(x) && std::isfinite(y))
                os << "<circle cx=\"" << px(x) << "\" cy=\"" << py(y) << "\" r=\"3\" fill=\""
                   << color << "\"/>\n";
        if (!s.label.empty()) {
            os << "<rect x=\"" << (ml + pw - 150) << "\" y=\"" << (ly - 9)
               << "\" width=\"10\" height=\"10\" fill=\"" << color << "\"/>\n";
            os << "<text x=\"" << (ml + pw - 136) << "\" y=\"" << ly
               << "\" font-size=\"11\" fill=\"#111\">" << s.label << "</text>\n";
            ly += 16;
        }
    }
    os << "</svg>\n";
    return os.str();
}

void write_plot(const Plot& plot, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot open for writing: " + path);
    f << render_plot(plot);
}

} // namespace qdsim::svg
