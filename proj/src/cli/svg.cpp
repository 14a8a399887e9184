#include "sorted_effects/cli/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace sorted_effects::cli {

namespace {

constexpr double width = 640, height = 440;
constexpr double left = 70, right = 20, top = 40, bottom = 60;

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string label(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            case '"': out += "&quot;"; break;
            default: out.push_back(c);
        }
    }
    return out;
}

struct Range {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();

    void add(const std::vector<double>& v) {
        for (double x : v) add(x);
    }
    void add(double x) {
        if (!std::isfinite(x)) return;
        lo = std::min(lo, x);
        hi = std::max(hi, x);
    }
    void finish() {
        if (!(lo <= hi)) lo = 0.0, hi = 1.0;
        if (hi - lo < 1e-12) {
            const double pad = std::max(1e-3, std::abs(lo) * 0.05);
            lo -= pad;
            hi += pad;
        } else {
            const double pad = 0.04 * (hi - lo);
            lo -= pad;
            hi += pad;
        }
    }
};

class Canvas {
public:
    Canvas(Range x, Range y, const std::string& title, const std::string& xlabel, const std::string& ylabel)
        : x_(x), y_(y) {
        out_ << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
             << "\" viewBox=\"0 0 " << width << ' ' << height << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
        out_ << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
        if (!title.empty()) {
            out_ << "<text x=\"" << num(width / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
                 << escape(title) << "</text>\n";
        }
        axes(xlabel, ylabel);
    }

    double px(double x) const { return left + (x - x_.lo) / (x_.hi - x_.lo) * (width - left - right); }
    double py(double y) const { return height - bottom - (y - y_.lo) / (y_.hi - y_.lo) * (height - top - bottom); }

    void polyline(const std::vector<double>& xs, const std::vector<double>& ys, const std::string& style) {
        out_ << "<polyline fill=\"none\" " << style << " points=\"";
        for (std::size_t k = 0; k < xs.size(); ++k) out_ << (k ? " " : "") << num(px(xs[k])) << ',' << num(py(ys[k]));
        out_ << "\"/>\n";
    }

    void band(const std::vector<double>& xs, const std::vector<double>& lo, const std::vector<double>& hi,
              const std::string& fill) {
        out_ << "<polygon stroke=\"none\" fill=\"" << fill << "\" points=\"";
        for (std::size_t k = 0; k < xs.size(); ++k) out_ << (k ? " " : "") << num(px(xs[k])) << ',' << num(py(hi[k]));
        for (std::size_t k = xs.size(); k-- > 0;) out_ << ' ' << num(px(xs[k])) << ',' << num(py(lo[k]));
        out_ << "\"/>\n";
    }

    void circle(double x, double y, const std::string& style) {
        out_ << "<circle cx=\"" << num(px(x)) << "\" cy=\"" << num(py(y)) << "\" r=\"2.5\" " << style << "/>\n";
    }

    void legend(const std::vector<std::pair<std::string, std::string>>& entries) {
        double y = top + 10;
        for (const auto& [text, style] : entries) {
            const double x = width - right - 170;
            out_ << "<line x1=\"" << num(x) << "\" y1=\"" << num(y) << "\" x2=\"" << num(x + 24) << "\" y2=\"" << num(y)
                 << "\" " << style << "/>\n";
            out_ << "<text x=\"" << num(x + 30) << "\" y=\"" << num(y + 4) << "\">" << escape(text) << "</text>\n";
            y += 16;
        }
    }

    std::string finish() {
        out_ << "</svg>\n";
        return out_.str();
    }

private:
    void axes(const std::string& xlabel, const std::string& ylabel) {
        const double x0 = left, x1 = width - right, y0 = height - bottom, y1 = top;
        out_ << "<rect x=\"" << num(x0) << "\" y=\"" << num(y1) << "\" width=\"" << num(x1 - x0) << "\" height=\""
             << num(y0 - y1) << "\" fill=\"none\" stroke=\"black\"/>\n";
        for (int k = 0; k <= 5; ++k) {
            const double xv = x_.lo + (x_.hi - x_.lo) * k / 5.0;
            const double yv = y_.lo + (y_.hi - y_.lo) * k / 5.0;
            out_ << "<line x1=\"" << num(px(xv)) << "\" y1=\"" << num(y0) << "\" x2=\"" << num(px(xv)) << "\" y2=\""
                 << num(y0 + 5) << "\" stroke=\"black\"/>\n";
            out_ << "<text x=\"" << num(px(xv)) << "\" y=\"" << num(y0 + 18) << "\" text-anchor=\"middle\">"
                 << label(xv) << "</text>\n";
            out_ << "<line x1=\"" << num(x0 - 5) << "\" y1=\"" << num(py(yv)) << "\" x2=\"" << num(x0) << "\" y2=\""
                 << num(py(yv)) << "\" stroke=\"black\"/>\n";
            out_ << "<text x=\"" << num(x0 - 8) << "\" y=\"" << num(py(yv) + 4) << "\" text-anchor=\"end\">"
                 << label(yv) << "</text>\n";
        }
        out_ << "<text x=\"" << num((x0 + x1) / 2) << "\" y=\"" << num(height - 18) << "\" text-anchor=\"middle\">"
             << escape(xlabel) << "</text>\n";
        out_ << "<text transform=\"translate(18," << num((y0 + y1) / 2) << ") rotate(-90)\" text-anchor=\"middle\">"
             << escape(ylabel) << "</text>\n";
    }

    Range x_, y_;
    std::ostringstream out_;
};

// Right-continuous step function through (x_k, y_k).
void steps(const std::vector<double>& xs, const std::vector<double>& ys, std::vector<double>& sx,
           std::vector<double>& sy) {
    sx.clear();
    sy.clear();
    for (std::size_t k = 0; k < xs.size(); ++k) {
        if (k) {
            sx.push_back(xs[k]);
            sy.push_back(ys[k - 1]);
        }
        sx.push_back(xs[k]);
        sy.push_back(ys[k]);
    }
}

}  // namespace

std::string spe_svg(const SpePlotData& d) {
    Range x, y;
    x.add(d.u);
    x.finish();
    for (const auto* v : {&d.estimate, &d.uniform_lower, &d.uniform_upper, &d.pointwise_lower, &d.pointwise_upper}) {
        y.add(*v);
    }
    y.add(d.ape_lower);
    y.add(d.ape_upper);
    y.finish();
    Canvas c(x, y, d.title, "Percentile Index", d.ylabel);
    c.band(d.u, d.uniform_lower, d.uniform_upper, "#c6dbef");
    c.polyline(d.u, d.pointwise_lower, "stroke=\"#08519c\" stroke-dasharray=\"5,4\"");
    c.polyline(d.u, d.pointwise_upper, "stroke=\"#08519c\" stroke-dasharray=\"5,4\"");
    c.polyline(d.u, d.estimate, "stroke=\"black\" stroke-width=\"2\"");
    const std::vector<double> ends{d.u.front(), d.u.back()};
    c.polyline(ends, {d.ape, d.ape}, "stroke=\"#cb181d\" stroke-width=\"1.5\"");
    c.polyline(ends, {d.ape_lower, d.ape_lower}, "stroke=\"#cb181d\" stroke-dasharray=\"2,3\"");
    c.polyline(ends, {d.ape_upper, d.ape_upper}, "stroke=\"#cb181d\" stroke-dasharray=\"2,3\"");
    c.legend({{"SPE", "stroke=\"black\" stroke-width=\"2\""},
              {"uniform band", "stroke=\"#c6dbef\" stroke-width=\"8\""},
              {"pointwise band", "stroke=\"#08519c\" stroke-dasharray=\"5,4\""},
              {"APE", "stroke=\"#cb181d\" stroke-width=\"1.5\""}});
    return c.finish();
}

std::string dist_svg(const DistPlotData& d) {
    Range x, y;
    x.add(d.points);
    x.finish();
    y.add(0.0);
    y.add(1.0);
    y.finish();
    Canvas c(x, y, d.variable, d.variable, "CDF");
    std::vector<double> sx, lo, hi, est;
    auto group = [&](const std::vector<double>& e, const std::vector<double>& l, const std::vector<double>& h,
                     const std::string& color, const std::string& name) {
        std::vector<double> tmp;
        steps(d.points, l, sx, lo);
        steps(d.points, h, tmp, hi);
        steps(d.points, e, tmp, est);
        c.band(sx, lo, hi, color + "\" fill-opacity=\"0.25");
        c.polyline(sx, est, "stroke=\"" + color + "\" stroke-width=\"2\"");
        return std::pair<std::string, std::string>{name, "stroke=\"" + color + "\" stroke-width=\"2\""};
    };
    const auto a = group(d.most, d.most_lower, d.most_upper, "#cb181d", "most affected");
    const auto b = group(d.least, d.least_lower, d.least_upper, "#2171b5", "least affected");
    c.legend({a, b});
    return c.finish();
}

std::string scatter_svg(const ScatterPlotData& d) {
    Range x, y;
    x.add(d.most_x);
    x.add(d.least_x);
    y.add(d.most_y);
    y.add(d.least_y);
    x.finish();
    y.finish();
    Canvas c(x, y, "", d.varx, d.vary);
    for (std::size_t k = 0; k < d.least_x.size(); ++k) {
        c.circle(d.least_x[k], d.least_y[k], "fill=\"none\" stroke=\"#2171b5\"");
    }
    for (std::size_t k = 0; k < d.most_x.size(); ++k) {
        c.circle(d.most_x[k], d.most_y[k], "fill=\"#cb181d\" fill-opacity=\"0.6\" stroke=\"none\"");
    }
    c.legend({{"most affected", "stroke=\"#cb181d\" stroke-width=\"4\""},
              {"least affected", "stroke=\"#2171b5\" stroke-width=\"1.5\""}});
    return c.finish();
}

}  // namespace sorted_effects::cli
