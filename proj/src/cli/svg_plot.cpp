#include "eplab/cli/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace eplab::cli {

namespace {

constexpr double kWidth = 720.0;
constexpr double kPanelHeight = 360.0;
constexpr double kLeft = 80.0, kRight = 150.0, kTop = 36.0, kBottom = 52.0;
constexpr const char* kColors[] = {"#d95f02", "#1b9e77", "#7570b3", "#e7298a", "#66a61e", "#e6ab02"};

std::string num(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::string tick_label(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3g", std::abs(v) < 1e-300 ? 0.0 : v);
    return buf;
}

std::string escape(const std::string& s)
{
    std::string out;
    for (char c : s) {
        switch (c) {
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '&': out += "&amp;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

struct Extent {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();

    void add(double v)
    {
        if (std::isfinite(v)) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    void finish()
    {
        if (!std::isfinite(lo)) {
            lo = 0.0;
            hi = 1.0;
        } else if (lo == hi) {
            const double pad = lo == 0.0 ? 1.0 : std::abs(lo) * 0.05;
            lo -= pad;
            hi += pad;
        }
    }
};

std::vector<double> ticks(const Extent& e)
{
    const double raw = (e.hi - e.lo) / 5.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double m : {1.0, 2.0, 5.0, 10.0})
        if (m * mag >= raw) {
            step = m * mag;
            break;
        }
    std::vector<double> out;
    for (double t = std::ceil(e.lo / step) * step; t <= e.hi + step * 1e-9; t += step)
        out.push_back(t);
    return out;
}

void render_panel(std::ostringstream& os, const Panel& panel, double y_off)
{
    Extent xe, ye;
    for (const auto& s : panel.series)
        for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
            if (std::isfinite(s.y[i])) {
                xe.add(s.x[i]);
                ye.add(s.y[i]);
            }
        }
    xe.finish();
    ye.finish();

    const double pw = kWidth - kLeft - kRight;
    const double ph = kPanelHeight - kTop - kBottom;
    auto px = [&](double x) { return kLeft + (x - xe.lo) / (xe.hi - xe.lo) * pw; };
    auto py = [&](double y) { return y_off + kTop + (ye.hi - y) / (ye.hi - ye.lo) * ph; };

    os << "<text x=\"" << num(kLeft + pw / 2) << "\" y=\"" << num(y_off + 22)
       << "\" text-anchor=\"middle\" font-size=\"15\">" << escape(panel.title) << "</text>\n";
    os << "<rect x=\"" << num(kLeft) << "\" y=\"" << num(y_off + kTop) << "\" width=\"" << num(pw)
       << "\" height=\"" << num(ph) << "\" fill=\"none\" stroke=\"#333\"/>\n";

    for (double t : ticks(xe)) {
        os << "<line x1=\"" << num(px(t)) << "\" y1=\"" << num(y_off + kTop + ph) << "\" x2=\""
           << num(px(t)) << "\" y2=\"" << num(y_off + kTop + ph + 5) << "\" stroke=\"#333\"/>\n";
        os << "<text x=\"" << num(px(t)) << "\" y=\"" << num(y_off + kTop + ph + 18)
           << "\" text-anchor=\"middle\" font-size=\"11\">" << tick_label(t) << "</text>\n";
    }
    for (double t : ticks(ye)) {
        os << "<line x1=\"" << num(kLeft - 5) << "\" y1=\"" << num(py(t)) << "\" x2=\""
           << num(kLeft) << "\" y2=\"" << num(py(t)) << "\" stroke=\"#333\"/>\n";
        os << "<text x=\"" << num(kLeft - 8) << "\" y=\"" << num(py(t) + 4)
           << "\" text-anchor=\"end\" font-size=\"11\">" << tick_label(t) << "</text>\n";
    }
    if (ye.lo < 0.0 && ye.hi > 0.0)
        os << "<line x1=\"" << num(kLeft) << "\" y1=\"" << num(py(0.0)) << "\" x2=\""
           << num(kLeft + pw) << "\" y2=\"" << num(py(0.0))
           << "\" stroke=\"#bbb\" stroke-dasharray=\"4 3\"/>\n";

    os << "<text x=\"" << num(kLeft + pw / 2) << "\" y=\"" << num(y_off + kPanelHeight - 12)
       << "\" text-anchor=\"middle\" font-size=\"13\">" << escape(panel.x_label) << "</text>\n";
    const double ly = y_off + kTop + ph / 2;
    os << "<text x=\"18\" y=\"" << num(ly) << "\" text-anchor=\"middle\" font-size=\"13\" "
       << "transform=\"rotate(-90 18 " << num(ly) << ")\">" << escape(panel.y_label) << "</text>\n";

    for (std::size_t k = 0; k < panel.series.size(); ++k) {
        const auto& s = panel.series[k];
        const char* color = kColors[k % std::size(kColors)];
        std::string points;
        auto flush = [&] {
            if (!points.empty())
                os << "<polyline fill=\"none\" stroke=\"" << color
                   << "\" stroke-width=\"1.5\" points=\"" << points << "\"/>\n";
            points.clear();
        };
        for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) {
                flush();
                continue;
            }
            if (!points.empty())
                points += ' ';
            points += num(px(s.x[i])) + "," + num(py(s.y[i]));
        }
        flush();

        const double ky = y_off + kTop + 12 + 18.0 * static_cast<double>(k);
        const double kx = kLeft + pw + 14;
        os << "<line x1=\"" << num(kx) << "\" y1=\"" << num(ky) << "\" x2=\"" << num(kx + 20)
           << "\" y2=\"" << num(ky) << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
        os << "<text x=\"" << num(kx + 26) << "\" y=\"" << num(ky + 4) << "\" font-size=\"12\">"
           << escape(s.label) << "</text>\n";
    }
}

}  // namespace

std::string render_svg(const std::vector<Panel>& panels)
{
    const double height = kPanelHeight * static_cast<double>(std::max<std::size_t>(panels.size(), 1));
    std::ostringstream os;
    os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
       << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << num(kWidth)
       << "\" height=\"" << num(height) << "\" viewBox=\"0 0 " << num(kWidth) << " "
       << num(height) << "\" font-family=\"sans-serif\">\n"
       << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    for (std::size_t i = 0; i < panels.size(); ++i)
        render_panel(os, panels[i], kPanelHeight * static_cast<double>(i));
    os << "</svg>\n";
    return os.str();
}

}  // namespace eplab::cli
