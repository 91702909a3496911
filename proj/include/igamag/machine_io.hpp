#pragma once

#include <stdexcept>
#include <string>

#include "igamag/geometry.hpp"

namespace igamag::io {

struct ParseError : std::runtime_error {
    ParseError(const std::string& path, int line, const std::string& what)
        : std::runtime_error(path + ":" + std::to_string(line) + ": " + what),
          line(line) {}
    int line;
};

/// Structured text machine file. Numbers are written with 17 significant
/// digits so doubles round-trip exactly.
void write_machine(const geom::MultiPatchModel& model, const std::string& path);
geom::MultiPatchModel read_machine(const std::string& path);

}  // namespace igamag::io
