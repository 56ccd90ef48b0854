#pragma once

#include <string>

#include "conecoord/solver.hpp"

namespace conecoord {

// Shortest decimal form that parses back to exactly the same double.
std::string format_double(double value);

// CSV with header k,block,eps,objective,suboptimality,feasibility,
// dual_residual,lyapunov,wall_ns; optional fields are left empty.
std::string trace_to_csv(const IterationTrace& trace);

IterationTrace trace_from_csv(const std::string& text);

void write_trace(const IterationTrace& trace, const std::string& path);

IterationTrace read_trace(const std::string& path);

}  // namespace conecoord
