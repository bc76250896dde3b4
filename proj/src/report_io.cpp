#include "gapbound/report_io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace gapbound {

namespace {

std::string fmt_full(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmt_px(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string fmt_tick(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

std::string xml_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
        case '&':
            out += "&amp;";
            break;
        case '<':
            out += "&lt;";
            break;
        case '>':
            out += "&gt;";
            break;
        default:
            out += c;
        }
    }
    return out;
}

void require_complete(const RunReport& report, const char* who) {
    if (report.failed) {
        throw std::invalid_argument(std::string(who) + ": report carries a failure marker: " +
                                    report.failure);
    }
    if (report.gap.size() != report.grid.size()) {
        throw std::invalid_argument(std::string(who) + ": gap and grid sizes disagree");
    }
    for (const BoundReport& b : report.bounds) {
        if (b.result.lower.size() != report.grid.size() ||
            b.result.upper.size() != report.grid.size()) {
            throw std::invalid_argument(std::string(who) + ": bound band sizes disagree");
        }
    }
}

const char* kind_color(BoundKind k) {
    switch (k) {
    case BoundKind::bound1:
        return "#1f77b4";
    case BoundKind::bound1_tight:
        return "#2ca02c";
    case BoundKind::bound2:
        return "#ff7f0e";
    case BoundKind::theorem2:
        return "#d62728";
    }
    return "#000000";
}

} // namespace

std::string bound_kind_name(BoundKind k) {
    switch (k) {
    case BoundKind::bound1:
        return "bound1";
    case BoundKind::bound1_tight:
        return "bound1_tight";
    case BoundKind::bound2:
        return "bound2";
    case BoundKind::theorem2:
        return "theorem2";
    }
    return "bound1";
}

std::string render_csv(const RunReport& report) {
    require_complete(report, "render_csv");
    static const char* entry_name[2] = {"delta", "omega"};
    std::string out = "t,gap_delta,gap_omega";
    for (const BoundReport& b : report.bounds) {
        const std::string kind = bound_kind_name(b.result.kind);
        for (int e = 0; e < 2; ++e) {
            out += "," + kind + "_lower_" + entry_name[e];
            out += "," + kind + "_upper_" + entry_name[e];
        }
    }
    out += "\n";
    for (std::size_t i = 0; i < report.grid.size(); ++i) {
        out += fmt_full(report.grid[i]);
        out += ",";
        out += fmt_full(report.gap[i][0]);
        out += ",";
        out += fmt_full(report.gap[i][1]);
        for (const BoundReport& b : report.bounds) {
            for (int e = 0; e < 2; ++e) {
                out += ",";
                out += fmt_full(b.result.lower[i][e]);
                out += ",";
                out += fmt_full(b.result.upper[i][e]);
            }
        }
        out += "\n";
    }
    return out;
}

std::string render_svg(const RunReport& report) {
    require_complete(report, "render_svg");

    constexpr double width = 900.0;
    constexpr double height = 640.0;
    constexpr double px0 = 70.0;
    constexpr double px1 = 870.0;
    const double panel_y0[2] = {40.0, 360.0};
    const double panel_y1[2] = {300.0, 620.0};
    static const char* panel_label[2] = {"rotor angle gap [rad]", "speed gap [p.u.]"};

    const double t_lo = report.grid.front();
    const double t_hi = report.grid.back();
    const double t_span = std::max(t_hi - t_lo, 1e-12);

    std::string out;
    out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" + fmt_px(width) +
           "\" height=\"" + fmt_px(height) + "\" viewBox=\"0 0 " + fmt_px(width) + " " +
           fmt_px(height) + "\">\n";
    out += "  <title>" + xml_escape(report.config.name) + "</title>\n";
    out += "  <rect x=\"0\" y=\"0\" width=\"" + fmt_px(width) + "\" height=\"" + fmt_px(height) +
           "\" fill=\"#ffffff\"/>\n";

    // Legend along the top edge.
    {
        double lx = px0;
        out += "  <text x=\"" + fmt_px(lx) + "\" y=\"20\" font-size=\"13\" fill=\"#000000\">" +
               "gap</text>\n";
        lx += 60.0;
        for (const BoundReport& b : report.bounds) {
            out += "  <text x=\"" + fmt_px(lx) + "\" y=\"20\" font-size=\"13\" fill=\"" +
                   kind_color(b.result.kind) + "\">" + bound_kind_name(b.result.kind) +
                   "</text>\n";
            lx += 110.0;
        }
    }

    for (int panel = 0; panel < 2; ++panel) {
        const int e = panel;
        const double y0 = panel_y0[panel];
        const double y1 = panel_y1[panel];

        double v_lo = report.gap[0][e];
        double v_hi = v_lo;
        auto widen = [&v_lo, &v_hi](double v) {
            v_lo = std::min(v_lo, v);
            v_hi = std::max(v_hi, v);
        };
        for (const Vector& v : report.gap) {
            widen(v[e]);
        }
        for (const BoundReport& b : report.bounds) {
            for (std::size_t i = 0; i < report.grid.size(); ++i) {
                widen(b.result.lower[i][e]);
                widen(b.result.upper[i][e]);
            }
        }
        const double v_span = std::max(v_hi - v_lo, 1e-12);
        const double pad = 0.05 * v_span;
        const double lo = v_lo - pad;
        const double hi = v_hi + pad;

        auto x_px = [&](double t) { return px0 + (t - t_lo) / t_span * (px1 - px0); };
        auto y_px = [&](double v) { return y1 - (v - lo) / (hi - lo) * (y1 - y0); };

        out += "  <rect x=\"" + fmt_px(px0) + "\" y=\"" + fmt_px(y0) + "\" width=\"" +
               fmt_px(px1 - px0) + "\" height=\"" + fmt_px(y1 - y0) +
               "\" fill=\"none\" stroke=\"#000000\"/>\n";
        out += "  <text x=\"" + fmt_px(px0) + "\" y=\"" + fmt_px(y0 - 6.0) +
               "\" font-size=\"13\" fill=\"#000000\">" + panel_label[panel] + "</text>\n";
        out += "  <text x=\"" + fmt_px(px0 - 64.0) + "\" y=\"" + fmt_px(y0 + 12.0) +
               "\" font-size=\"11\" fill=\"#000000\">" + fmt_tick(v_hi) + "</text>\n";
        out += "  <text x=\"" + fmt_px(px0 - 64.0) + "\" y=\"" + fmt_px(y1) +
               "\" font-size=\"11\" fill=\"#000000\">" + fmt_tick(v_lo) + "</text>\n";
        out += "  <text x=\"" + fmt_px(px0) + "\" y=\"" + fmt_px(y1 + 16.0) +
               "\" font-size=\"11\" fill=\"#000000\">" + fmt_tick(t_lo) + "</text>\n";
        out += "  <text x=\"" + fmt_px(px1 - 30.0) + "\" y=\"" + fmt_px(y1 + 16.0) +
               "\" font-size=\"11\" fill=\"#000000\">" + fmt_tick(t_hi) + "</text>\n";
        if (panel == 1) {
            out += "  <text x=\"" + fmt_px(0.5 * (px0 + px1)) + "\" y=\"" + fmt_px(y1 + 16.0) +
                   "\" font-size=\"12\" fill=\"#000000\">t [s]</text>\n";
        }

        auto polyline = [&](const std::string& cls, const std::string& color, double stroke_width,
                            const std::function<double(std::size_t)>& value) {
            out += "  <polyline class=\"" + cls + "\" fill=\"none\" stroke=\"" + color +
                   "\" stroke-width=\"" + fmt_px(stroke_width) + "\" points=\"";
            for (std::size_t i = 0; i < report.grid.size(); ++i) {
                if (i != 0U) {
                    out += " ";
                }
                out += fmt_px(x_px(report.grid[i])) + "," + fmt_px(y_px(value(i)));
            }
            out += "\"/>\n";
        };

        for (const BoundReport& b : report.bounds) {
            const std::string kind = bound_kind_name(b.result.kind);
            const std::string color = kind_color(b.result.kind);
            polyline(kind + "-lower", color, 1.0,
                     [&b, e](std::size_t i) { return b.result.lower[i][e]; });
            polyline(kind + "-upper", color, 1.0,
                     [&b, e](std::size_t i) { return b.result.upper[i][e]; });
        }
        polyline("gap", "#000000", 1.5, [&report, e](std::size_t i) { return report.gap[i][e]; });
    }

    out += "</svg>\n";
    return out;
}

namespace {

void write_file(const std::string& text, const std::string& path, const char* who) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error(std::string(who) + ": cannot open '" + path + "' for writing");
    }
    out << text;
    out.flush();
    if (!out.good()) {
        throw std::runtime_error(std::string(who) + ": write to '" + path + "' failed");
    }
}

} // namespace

void emit_csv(const RunReport& report, const std::string& path) {
    write_file(render_csv(report), path, "emit_csv");
}

void emit_svg(const RunReport& report, const std::string& path) {
    write_file(render_svg(report), path, "emit_svg");
}

} // namespace gapbound
