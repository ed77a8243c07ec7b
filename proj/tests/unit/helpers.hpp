#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "hullrec/hin_graph.hpp"

namespace testing {

inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("hullrec_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline void write_file(const std::filesystem::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  out << content;
}

/// 2 users, 2 items, 1 entity; edges u0-i0, u0-i1, u0-e0, u1-i1.
struct FixtureGraph {
  hullrec::HinGraph g;
  hullrec::NodeId u0, u1, i0, i1, e0;

  FixtureGraph() {
    using hullrec::NodeType;
    u0 = g.add_node("user:u0", NodeType::User);
    u1 = g.add_node("user:u1", NodeType::User);
    i0 = g.add_node("item:i0", NodeType::Item);
    i1 = g.add_node("item:i1", NodeType::Item);
    e0 = g.add_node("entity:e0", NodeType::Entity);
    g.add_edge(u0, i0);
    g.add_edge(u0, i1);
    g.add_edge(u0, e0);
    g.add_edge(u1, i1);
    g.freeze();
  }
};

}  // namespace testing
