#include "ntklab/svg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace ntklab {

namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

struct AxisScale {
    bool log = false;
    double lo = 0.0, hi = 1.0;
    double px0 = 0.0, px1 = 1.0;

    double to_px(double v) const {
        double t = log ? (std::log10(v) - lo) / (hi - lo) : (v - lo) / (hi - lo);
        return px0 + t * (px1 - px0);
    }
};

std::string fmt(double v) {
    std::ostringstream s;
    s.precision(6);
    s << v;
    return s.str();
}

std::string tick_label(double v) {
    std::ostringstream s;
    s.precision(3);
    s << v;
    return s.str();
}

}  // namespace

std::string SvgChart::render(int width, int height) const {
    const double ml = 72, mr = 140, mt = 36, mb = 48;

    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
    double ymin = xmin, ymax = -xmin;
    for (const SvgSeries& s : series) {
        for (size_t i = 0; i < s.x.size(); ++i) {
            const double xv = s.x[i];
            if (x_log && !(xv > 0)) continue;
            double lo = i < s.y_lo.size() ? s.y_lo[i] : s.y[i];
            double hi = i < s.y_hi.size() ? s.y_hi[i] : s.y[i];
            if (y_log) {
                if (!(s.y[i] > 0)) continue;
                if (!(lo > 0)) lo = s.y[i];
                if (!(hi > 0)) hi = s.y[i];
            }
            xmin = std::min(xmin, xv);
            xmax = std::max(xmax, xv);
            ymin = std::min(ymin, lo);
            ymax = std::max(ymax, hi);
        }
    }
    if (!(xmin < xmax)) { xmin -= 0.5; xmax = xmin + 1.0; }
    if (!(ymin < ymax)) { ymin -= 0.5; ymax = ymin + 1.0; }

    AxisScale xs, ys;
    xs.log = x_log;
    ys.log = y_log;
    xs.lo = x_log ? std::log10(xmin) : xmin;
    xs.hi = x_log ? std::log10(xmax) : xmax;
    ys.lo = y_log ? std::log10(ymin) : ymin;
    ys.hi = y_log ? std::log10(ymax) : ymax;
    const double xpad = 0.02 * (xs.hi - xs.lo + 1e-300);
    const double ypad = 0.05 * (ys.hi - ys.lo + 1e-300);
    xs.lo -= xpad; xs.hi += xpad;
    ys.lo -= ypad; ys.hi += ypad;
    xs.px0 = ml; xs.px1 = width - mr;
    ys.px0 = height - mb; ys.px1 = mt;  // svg y grows downward

    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
        << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << " "
        << height << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << width / 2 << "\" y=\"20\" text-anchor=\"middle\" "
        << "font-family=\"sans-serif\" font-size=\"14\">" << title << "</text>\n";

    // frame
    out << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\""
        << width - ml - mr << "\" height=\"" << height - mt - mb
        << "\" fill=\"none\" stroke=\"#333\"/>\n";

    auto draw_tick = [&](bool on_x, double value, const std::string& label) {
        if (on_x) {
            const double px = xs.to_px(value);
            out << "<line x1=\"" << px << "\" y1=\"" << height - mb
                << "\" x2=\"" << px << "\" y2=\"" << height - mb + 5
                << "\" stroke=\"#333\"/>\n";
            out << "<text x=\"" << px << "\" y=\"" << height - mb + 18
                << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
                << "font-size=\"11\">" << label << "</text>\n";
        } else {
            const double py = ys.to_px(value);
            out << "<line x1=\"" << ml - 5 << "\" y1=\"" << py << "\" x2=\""
                << ml << "\" y2=\"" << py << "\" stroke=\"#333\"/>\n";
            out << "<text x=\"" << ml - 8 << "\" y=\"" << py + 4
                << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
                << "font-size=\"11\">" << label << "</text>\n";
        }
    };

    auto ticks_for = [&](const AxisScale& sc, bool on_x) {
        if (sc.log) {
            const int d0 = static_cast<int>(std::ceil(sc.lo));
            const int d1 = static_cast<int>(std::floor(sc.hi));
            if (d1 - d0 <= 10) {
                for (int d = d0; d <= d1; ++d) {
                    std::ostringstream lbl;
                    lbl << "1e" << d;
                    draw_tick(on_x, std::pow(10.0, d), lbl.str());
                }
                return;
            }
        }
        const int count = 5;
        for (int i = 0; i <= count; ++i) {
            const double t = sc.lo + (sc.hi - sc.lo) * i / count;
            const double v = sc.log ? std::pow(10.0, t) : t;
            draw_tick(on_x, v, tick_label(v));
        }
    };
    ticks_for(xs, true);
    ticks_for(ys, false);

    out << "<text x=\"" << (ml + width - mr) / 2 << "\" y=\"" << height - 10
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
        << "font-size=\"12\">" << x_label << "</text>\n";
    out << "<text x=\"16\" y=\"" << (mt + height - mb) / 2
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
        << "font-size=\"12\" transform=\"rotate(-90 16 "
        << (mt + height - mb) / 2 << ")\">" << y_label << "</text>\n";

    for (size_t si = 0; si < series.size(); ++si) {
        const SvgSeries& s = series[si];
        const char* color = kPalette[si % (sizeof kPalette / sizeof *kPalette)];

        auto usable = [&](size_t i) {
            if (x_log && !(s.x[i] > 0)) return false;
            if (y_log && !(s.y[i] > 0)) return false;
            return std::isfinite(s.x[i]) && std::isfinite(s.y[i]);
        };

        if (s.y_lo.size() == s.x.size() && s.y_hi.size() == s.x.size()) {
            std::ostringstream pts;
            for (size_t i = 0; i < s.x.size(); ++i) {
                if (!usable(i)) continue;
                double hi = s.y_hi[i];
                if (y_log && !(hi > 0)) hi = s.y[i];
                pts << fmt(xs.to_px(s.x[i])) << ',' << fmt(ys.to_px(hi)) << ' ';
            }
            for (size_t ri = s.x.size(); ri-- > 0;) {
                if (!usable(ri)) continue;
                double lo = s.y_lo[ri];
                if (y_log && !(lo > 0)) lo = s.y[ri];
                pts << fmt(xs.to_px(s.x[ri])) << ',' << fmt(ys.to_px(lo)) << ' ';
            }
            out << "<polygon points=\"" << pts.str() << "\" fill=\"" << color
                << "\" fill-opacity=\"0.15\" stroke=\"none\"/>\n";
        }

        std::ostringstream pts;
        for (size_t i = 0; i < s.x.size(); ++i) {
            if (!usable(i)) continue;
            pts << fmt(xs.to_px(s.x[i])) << ',' << fmt(ys.to_px(s.y[i])) << ' ';
        }
        out << "<polyline points=\"" << pts.str() << "\" fill=\"none\" stroke=\""
            << color << "\" stroke-width=\"1.5\"/>\n";

        const double ly = mt + 16 + 18 * static_cast<double>(si);
        out << "<line x1=\"" << width - mr + 8 << "\" y1=\"" << ly << "\" x2=\""
            << width - mr + 28 << "\" y2=\"" << ly << "\" stroke=\"" << color
            << "\" stroke-width=\"2\"/>\n";
        out << "<text x=\"" << width - mr + 34 << "\" y=\"" << ly + 4
            << "\" font-family=\"sans-serif\" font-size=\"11\">" << s.label
            << "</text>\n";
    }

    out << "</svg>\n";
    return out.str();
}

}  // namespace ntklab
