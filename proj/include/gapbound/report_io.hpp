#pragma once

#include "gapbound/scenario.hpp"

#include <string>

namespace gapbound {

/// Stable lowercase id used in column headers and plot classes.
std::string bound_kind_name(BoundKind k);

/// CSV table of the run: one row per grid time with the measured gap and the
/// per-kind band edges, full double precision, '\n' line endings. The report
/// must be complete (no failure marker).
std::string render_csv(const RunReport& report);

/// Two-panel SVG (angle on top, speed below) plotting the gap and every
/// band edge as polylines with one point per grid time.
std::string render_svg(const RunReport& report);

/// File-writing wrappers; throw std::runtime_error when the path cannot be
/// opened for writing.
void emit_csv(const RunReport& report, const std::string& path);
void emit_svg(const RunReport& report, const std::string& path);

} // namespace gapbound
