#pragma once

#include <iosfwd>
#include <string>

#include "ddrlab/metric_domain.hpp"

namespace ddrlab {

/// Mesh JSON: vertices, boundary_flags, boundary_order, edges [i, j, length],
/// h, domain_kind, metric_name, plus stencil_radius and shape for reloading.
/// Doubles are written as shortest round-trip decimals.
std::string mesh_to_json(const Mesh& mesh);
void write_mesh(std::ostream& out, const Mesh& mesh);
void write_mesh_file(const std::string& path, const Mesh& mesh);

/// The metric is re-created from metric_name through make_scenario; edge
/// lengths are taken from the file. Throws std::runtime_error on malformed input.
Mesh read_mesh(std::istream& in);
Mesh read_mesh_file(const std::string& path);

/// Whole file into a string; throws std::runtime_error if unreadable.
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace ddrlab
