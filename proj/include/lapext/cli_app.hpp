#pragma once

#include "lapext/mesh.hpp"

#include <string>

namespace lapext {

/// Length token: a decimal number with an optional "pi" suffix whose numeric
/// prefix multiplies pi ("pi", "2pi", "0.5pi", "3.25").
double parse_length(const std::string& token);

/// Domain text: "interval:<len>" or "rectangle:<len_x>,<len_y>".
struct DomainSpec {
    DomainKind kind = DomainKind::interval;
    double lengths[2] = {0.0, 0.0};
};

DomainSpec parse_domain(const std::string& text);

/// Grid size text: "<n>" or "<nx>,<ny>"; the single form is used for both
/// axes of a rectangle.
void parse_grid(const std::string& text, DomainKind kind, int n_out[2]);

/// Entry point of the command line tool. Returns the process exit code:
/// 0 success, 1 configuration error, 2 missing eigenphase gap, 3 solver
/// failure, 4 verification reports failed.
int cli_main(int argc, const char* const* argv);

} // namespace lapext
