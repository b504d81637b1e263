#pragma once

#include <string>
#include <vector>

#include "pshlab/grid.hpp"

namespace pshlab {

// Binary field format: a 32-byte header — 8-byte magic "PSHLAB1\0",
// uint32 n, uint32 res, float64 period, 8 reserved zero bytes — followed by
// the node values in index order as 64-bit IEEE doubles, little-endian (all
// supported targets are little-endian; the reader rejects mismatched sizes).
void write_grid_function(const std::string& path, const GridFunction& f);
GridFunction read_grid_function(const std::string& path);

// CSV export of a field: header "index,x1,y1,x2,y2,value", one row per node.
void write_grid_function_csv(const std::string& path, const GridFunction& f);

// Small-table CSV: one header row, then numeric rows printed with enough
// digits to round-trip doubles exactly.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

std::string read_text_file(const std::string& path); // IoError when unreadable
void write_text_file(const std::string& path, const std::string& text);

// Minimal self-contained SVG polyline plot (optional output; CSV is the
// contract).  One polyline per series, shared axes, linear scales.
struct PlotSeries {
    std::string label;
    std::vector<double> x, y;
};

void write_svg_plot(const std::string& path, const std::string& title,
                    const std::vector<PlotSeries>& series);

} // namespace pshlab
