#include "pshlab/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

#include "pshlab/errors.hpp"

namespace pshlab {

namespace {

constexpr char kMagic[8] = {'P', 'S', 'H', 'L', 'A', 'B', '1', '\0'};

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::ofstream open_out(const std::string& path, std::ios::openmode mode) {
    std::ofstream out(path, mode);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    return out;
}

} // namespace

void write_grid_function(const std::string& path, const GridFunction& f) {
    if (!f.has_grid()) throw ParameterError("write_grid_function: empty field");
    const PeriodicGrid& g = f.grid();
    auto out = open_out(path, std::ios::binary);

    char header[32] = {0};
    std::memcpy(header, kMagic, 8);
    const std::uint32_t n = static_cast<std::uint32_t>(g.n());
    const std::uint32_t res = static_cast<std::uint32_t>(g.res());
    const double period = g.period();
    std::memcpy(header + 8, &n, 4);
    std::memcpy(header + 12, &res, 4);
    std::memcpy(header + 16, &period, 8);
    out.write(header, sizeof(header));
    out.write(reinterpret_cast<const char*>(f.values().data()),
              static_cast<std::streamsize>(f.size() * sizeof(double)));
    if (!out) throw IoError("short write to '" + path + "'");
}

GridFunction read_grid_function(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "' for reading");

    char header[32];
    in.read(header, sizeof(header));
    if (!in || std::memcmp(header, kMagic, 8) != 0)
        throw IoError("'" + path + "' is not a field file (bad magic)");
    std::uint32_t n = 0, res = 0;
    double period = 0.0;
    std::memcpy(&n, header + 8, 4);
    std::memcpy(&res, header + 12, 4);
    std::memcpy(&period, header + 16, 8);
    if (n != 1 && n != 2)
        throw IoError("'" + path + "' has unsupported dimension");

    const PeriodicGrid grid(static_cast<int>(n), static_cast<int>(res), period);
    GridFunction f(grid, 0.0);
    in.read(reinterpret_cast<char*>(f.values().data()),
            static_cast<std::streamsize>(f.size() * sizeof(double)));
    if (!in) throw IoError("'" + path + "' is truncated");
    char extra;
    if (in.read(&extra, 1))
        throw IoError("'" + path + "' has trailing bytes");
    try {
        f.check_finite("field read from " + path);
    } catch (const Error& e) {
        throw IoError(e.what()); // corrupt content is a file problem
    }
    return f;
}

void write_grid_function_csv(const std::string& path, const GridFunction& f) {
    if (!f.has_grid()) throw ParameterError("write_grid_function_csv: empty field");
    const PeriodicGrid& g = f.grid();
    auto out = open_out(path, std::ios::out);
    out << "index,x1,y1,x2,y2,value\n";
    for (std::size_t i = 0; i < f.size(); ++i) {
        out << i;
        for (int a = 0; a < 4; ++a)
            out << ',' << fmt(a < g.dims() ? g.coord(i, a) : 0.0);
        out << ',' << fmt(f[i]) << '\n';
    }
    if (!out) throw IoError("short write to '" + path + "'");
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
    auto out = open_out(path, std::ios::out);
    for (std::size_t c = 0; c < header.size(); ++c)
        out << (c ? "," : "") << header[c];
    out << '\n';
    for (const auto& row : rows) {
        if (row.size() != header.size())
            throw ParameterError("write_csv: row width does not match header");
        for (std::size_t c = 0; c < row.size(); ++c)
            out << (c ? "," : "") << fmt(row[c]);
        out << '\n';
    }
    if (!out) throw IoError("short write to '" + path + "'");
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
    auto out = open_out(path, std::ios::binary);
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw IoError("short write to '" + path + "'");
}

void write_svg_plot(const std::string& path, const std::string& title,
                    const std::vector<PlotSeries>& series) {
    const double W = 720, H = 480, ml = 70, mr = 20, mt = 40, mb = 45;
    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
    double ymin = xmin, ymax = -xmin;
    for (const auto& s : series)
        for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
            xmin = std::min(xmin, s.x[i]);
            xmax = std::max(xmax, s.x[i]);
            ymin = std::min(ymin, s.y[i]);
            ymax = std::max(ymax, s.y[i]);
        }
    if (!(xmin <= xmax)) { xmin = 0; xmax = 1; ymin = 0; ymax = 1; }
    if (xmax == xmin) { xmax = xmin + 1; }
    if (ymax == ymin) { ymax = ymin + 1; }

    auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * (W - ml - mr); };
    auto py = [&](double y) { return H - mb - (y - ymin) / (ymax - ymin) * (H - mt - mb); };
    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c",
                                    "#9467bd", "#ff7f0e", "#17becf"};

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W
        << "\" height=\"" << H << "\" viewBox=\"0 0 " << W << ' ' << H << "\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" "
           "font-family=\"sans-serif\" font-size=\"15\">" << title << "</text>\n"
        << "<line x1=\"" << ml << "\" y1=\"" << H - mb << "\" x2=\"" << W - mr
        << "\" y2=\"" << H - mb << "\" stroke=\"black\"/>\n"
        << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml
        << "\" y2=\"" << H - mb << "\" stroke=\"black\"/>\n";
    for (int k = 0; k <= 4; ++k) {
        const double fx = xmin + k * (xmax - xmin) / 4;
        const double fy = ymin + k * (ymax - ymin) / 4;
        svg << "<text x=\"" << px(fx) << "\" y=\"" << H - mb + 18
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
               "font-size=\"11\">" << fmt(fx) << "</text>\n"
            << "<text x=\"" << ml - 6 << "\" y=\"" << py(fy) + 4
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
               "font-size=\"11\">" << fmt(fy) << "</text>\n";
    }
    for (std::size_t s = 0; s < series.size(); ++s) {
        const auto& sr = series[s];
        const char* color = palette[s % 6];
        svg << "<polyline fill=\"none\" stroke=\"" << color
            << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < std::min(sr.x.size(), sr.y.size()); ++i) {
            if (!std::isfinite(sr.x[i]) || !std::isfinite(sr.y[i])) continue;
            svg << px(sr.x[i]) << ',' << py(sr.y[i]) << ' ';
        }
        svg << "\"/>\n"
            << "<text x=\"" << W - mr - 8 << "\" y=\"" << mt + 16 * (s + 1)
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
               "font-size=\"12\" fill=\"" << color << "\">" << sr.label
            << "</text>\n";
    }
    svg << "</svg>\n";
    write_text_file(path, svg.str());
}

} // namespace pshlab
