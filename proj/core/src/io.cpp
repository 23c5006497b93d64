#include "ddrlab/io.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace ddrlab {

using nlohmann::json;

std::string mesh_to_json(const Mesh& mesh) {
  json j;
  json verts = json::array();
  for (const Vec2& v : mesh.vertices) verts.push_back({v.x(), v.y()});
  j["vertices"] = std::move(verts);
  json flags = json::array();
  for (auto f : mesh.boundary_flags) flags.push_back(f != 0);
  j["boundary_flags"] = std::move(flags);
  j["boundary_order"] = mesh.boundary_order;
  json edges = json::array();
  for (const auto& e : mesh.stencil_edges()) edges.push_back({e.i, e.j, e.length});
  j["edges"] = std::move(edges);
  j["h"] = mesh.h;
  j["domain_kind"] = to_string(mesh.domain_kind);
  j["shape"] = mesh.shape_descriptor;
  j["metric_name"] = mesh.metric_name;
  j["stencil_radius"] = mesh.stencil_radius;
  return j.dump();
}

void write_mesh(std::ostream& out, const Mesh& mesh) {
  out << mesh_to_json(mesh) << '\n';
  if (!out) throw std::runtime_error("failed to write mesh");
}

void write_mesh_file(const std::string& path, const Mesh& mesh) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path);
  write_mesh(out, mesh);
}

Mesh read_mesh(std::istream& in) {
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("mesh JSON: ") + e.what());
  }
  try {
    const std::string metric_name = j.at("metric_name").get<std::string>();
    MetricDomain domain = make_scenario(metric_name);
    Mesh mesh;
    mesh.h = j.at("h").get<double>();
    mesh.stencil_radius = j.value("stencil_radius", 3);
    mesh.metric_name = metric_name;
    if (j.contains("shape")) domain.shape = Shape::from_descriptor(j["shape"].get<std::string>());
    mesh.shape = domain.shape;
    mesh.shape_descriptor = domain.shape.descriptor();
    mesh.domain_kind = domain_kind_from_string(j.at("domain_kind").get<std::string>());
    if (mesh.domain_kind != domain.shape.kind()) throw std::runtime_error("domain_kind does not match the shape");
    for (const auto& v : j.at("vertices")) mesh.vertices.emplace_back(v.at(0).get<double>(), v.at(1).get<double>());
    for (const auto& f : j.at("boundary_flags")) mesh.boundary_flags.push_back(f.get<bool>() ? 1 : 0);
    mesh.boundary_order = j.at("boundary_order").get<std::vector<std::vector<VertexId>>>();
    std::vector<StencilEdge> edges;
    for (const auto& e : j.at("edges")) {
      edges.push_back({e.at(0).get<VertexId>(), e.at(1).get<VertexId>(), e.at(2).get<double>()});
    }
    if (!(mesh.h > 0.0)) throw std::runtime_error("h must be positive");
    mesh.finalize(domain, edges);
    return mesh;
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("mesh JSON: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error(std::string("mesh JSON: ") + e.what());
  }
}

Mesh read_mesh_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  return read_mesh(in);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << text;
  if (!out) throw std::runtime_error("failed to write " + path);
}

}  // namespace ddrlab
