#pragma once

#include <map>
#include <memory>
#include <string>
#include <utility>

#include "ddrlab/verification.hpp"

namespace fixtures {

// Meshes and tables are built once per (scenario, resolution) and shared
// across test cases.
inline const ddrlab::Mesh& mesh(const std::string& scenario, int inv_h) {
  static std::map<std::pair<std::string, int>, std::unique_ptr<ddrlab::Mesh>> cache;
  auto& slot = cache[{scenario, inv_h}];
  if (!slot) slot = std::make_unique<ddrlab::Mesh>(ddrlab::build_mesh(ddrlab::make_scenario(scenario), 1.0 / inv_h, 3));
  return *slot;
}

inline const ddrlab::FrameTable& table(const std::string& scenario, int inv_h, ddrlab::Scheme scheme) {
  static std::map<std::tuple<std::string, int, int>, std::unique_ptr<ddrlab::FrameTable>> cache;
  auto& slot = cache[{scenario, inv_h, static_cast<int>(scheme)}];
  if (!slot) {
    const auto& m = mesh(scenario, inv_h);
    slot = std::make_unique<ddrlab::FrameTable>(ddrlab::FrameTable::compute(m, ddrlab::make_frame(m, 2.0 * m.h), scheme));
  }
  return *slot;
}

inline ddrlab::VertexId at(const ddrlab::Mesh& m, double x, double y) { return m.nearest_vertex(ddrlab::Vec2(x, y)); }

}  // namespace fixtures
