#include <algorithm>
#include <cstdio>
#include <fstream>
#include <string>

#include "deskrl/errors.hpp"
#include "deskrl/metrics.hpp"
#include "deskrl/runner.hpp"

namespace deskrl::runner {

namespace {

constexpr double kWidth = 720.0, kHeight = 420.0;
constexpr double kLeft = 60.0, kRight = 660.0, kTop = 40.0, kBottom = 380.0;

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

struct Series {
    std::vector<double> x, y;
    double ymin = 0.0, ymax = 1.0;
    const char* color;

    double sx(std::size_t i, double xmin, double xmax) const {
        if (xmax == xmin) return (kLeft + kRight) / 2.0;
        return kLeft + (x[i] - xmin) / (xmax - xmin) * (kRight - kLeft);
    }
    double sy(std::size_t i) const {
        if (ymax == ymin) return (kTop + kBottom) / 2.0;
        return kBottom - (y[i] - ymin) / (ymax - ymin) * (kBottom - kTop);
    }
};

void draw_series(std::string& svg, const Series& s, double xmin, double xmax) {
    svg += "<polyline fill=\"none\" stroke=\"";
    svg += s.color;
    svg += "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
        if (i) svg += ' ';
        svg += fmt(s.sx(i, xmin, xmax)) + "," + fmt(s.sy(i));
    }
    svg += "\"/>\n";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
        svg += "<circle cx=\"" + fmt(s.sx(i, xmin, xmax)) + "\" cy=\"" + fmt(s.sy(i)) +
               "\" r=\"2.5\" fill=\"";
        svg += s.color;
        svg += "\"/>\n";
    }
}

} // namespace

void plot(const std::filesystem::path& metrics_path, const std::filesystem::path& out_path) {
    const auto records = metrics::read_metrics(metrics_path);
    if (records.empty()) throw config_error("plot: metrics file has no records");

    Series reward{.color = "#7a4fbf"}, length{.color = "#e08020"};
    double xmin = 1e300, xmax = -1e300, len_max = 1.0;
    for (const auto& m : records) {
        const auto it = static_cast<double>(m.iteration);
        reward.x.push_back(it);
        reward.y.push_back(m.mean_reward);
        length.x.push_back(it);
        length.y.push_back(m.mean_response_length);
        xmin = std::min(xmin, it);
        xmax = std::max(xmax, it);
        len_max = std::max(len_max, m.mean_response_length);
    }
    reward.ymin = 0.0;
    reward.ymax = 1.0;
    length.ymin = 0.0;
    length.ymax = len_max;

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(kWidth) +
           "\" height=\"" + fmt(kHeight) + "\" viewBox=\"0 0 " + fmt(kWidth) + " " +
           fmt(kHeight) + "\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    // axes
    svg += "<line x1=\"" + fmt(kLeft) + "\" y1=\"" + fmt(kBottom) + "\" x2=\"" + fmt(kRight) +
           "\" y2=\"" + fmt(kBottom) + "\" stroke=\"black\"/>\n";
    svg += "<line x1=\"" + fmt(kLeft) + "\" y1=\"" + fmt(kTop) + "\" x2=\"" + fmt(kLeft) +
           "\" y2=\"" + fmt(kBottom) + "\" stroke=\"black\"/>\n";
    svg += "<line x1=\"" + fmt(kRight) + "\" y1=\"" + fmt(kTop) + "\" x2=\"" + fmt(kRight) +
           "\" y2=\"" + fmt(kBottom) + "\" stroke=\"black\"/>\n";
    // labels
    svg += "<text x=\"" + fmt(kLeft) + "\" y=\"25\" font-size=\"13\" fill=\"#7a4fbf\">mean reward (left)</text>\n";
    svg += "<text x=\"" + fmt(kRight - 220.0) + "\" y=\"25\" font-size=\"13\" fill=\"#e08020\">mean response length (right)</text>\n";
    svg += "<text x=\"" + fmt((kLeft + kRight) / 2.0 - 25.0) + "\" y=\"" + fmt(kBottom + 30.0) +
           "\" font-size=\"12\">iteration</text>\n";
    svg += "<text x=\"8\" y=\"" + fmt(kBottom) + "\" font-size=\"11\">0</text>\n";
    svg += "<text x=\"8\" y=\"" + fmt(kTop + 4.0) + "\" font-size=\"11\">1</text>\n";
    svg += "<text x=\"" + fmt(kRight + 6.0) + "\" y=\"" + fmt(kBottom) + "\" font-size=\"11\">0</text>\n";
    svg += "<text x=\"" + fmt(kRight + 6.0) + "\" y=\"" + fmt(kTop + 4.0) + "\" font-size=\"11\">" +
           fmt(len_max) + "</text>\n";

    draw_series(svg, reward, xmin, xmax);
    draw_series(svg, length, xmin, xmax);
    svg += "</svg>\n";

    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw config_error("plot: cannot write " + out_path.string());
    out << svg;
}

} // namespace deskrl::runner
