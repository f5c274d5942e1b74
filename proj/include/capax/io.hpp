#pragma once

#include <string>

#include "capax/grid.hpp"

namespace capax {

enum class FileFormat { text, json };

// .json extension selects json, everything else the text format
FileFormat infer_format(const std::string& path);

// Text format: one header line "dim h shape_x shape_y origin_x origin_y",
// then the cell values in row-major order, whitespace separated. The json
// format carries the same fields as an object. Round trips exactly.
void write_field(const std::string& path, const Field& f);
Field read_field(const std::string& path);

// Same container; masses must be nonnegative.
void write_measure(const std::string& path, const DiscreteMeasure& mu);
DiscreteMeasure read_measure(const std::string& path);

}  // namespace capax
