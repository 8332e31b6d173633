#pragma once

// JSON files: polytopes, point sets, built structures.

#include "apm/ann.hpp"
#include "apm/canonical.hpp"
#include "apm/hierarchy.hpp"

#include "json.hpp"

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace apm::io {

using json = nlohmann::json;

namespace detail {

inline json vec_to_json(const Vec& v) {
  json a = json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

inline Vec vec_from_json(const json& a, int dim = -1) {
  require(a.is_array(), ErrorCode::Input, "expected a number array");
  require(dim < 0 || static_cast<int>(a.size()) == dim, ErrorCode::Input, "vector has the wrong dimension");
  require(a.size() <= static_cast<std::size_t>(kMaxDim), ErrorCode::Input, "vector dimension out of range");
  Vec v(static_cast<int>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) {
    require(a[i].is_number(), ErrorCode::Input, "vector entry is not a number");
    v[static_cast<int>(i)] = a[i].get<double>();
  }
  require(all_finite(v), ErrorCode::Input, "vector has non-finite entries");
  return v;
}

inline json mat_to_json(const Mat& m) {
  json a = json::array();
  for (int i = 0; i < m.rows(); ++i) a.push_back(vec_to_json(m.row(i).transpose()));
  return a;
}

inline Mat mat_from_json(const json& a, int dim) {
  require(a.is_array() && static_cast<int>(a.size()) == dim, ErrorCode::Input, "matrix has the wrong shape");
  Mat m(dim, dim);
  for (int i = 0; i < dim; ++i) m.row(i) = vec_from_json(a[i], dim).transpose();
  return m;
}

template <class T>
T get(const json& j, const char* key) {
  require(j.is_object() && j.contains(key), ErrorCode::Input, std::string("missing field: ") + key);
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorCode::Input, std::string("bad field: ") + key);
  }
}

inline const json& field(const json& j, const char* key) {
  require(j.is_object() && j.contains(key), ErrorCode::Input, std::string("missing field: ") + key);
  return j.at(key);
}

}  // namespace detail

inline json read_json(const std::string& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorCode::Input, "cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::Input, "malformed JSON in " + path + ": " + e.what());
  }
}

inline void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), ErrorCode::Input, "cannot write " + path);
  out << text;
  require(static_cast<bool>(out), ErrorCode::Input, "write failed: " + path);
}

inline json polytope_to_json(const HPolytope& p) {
  json hs = json::array();
  for (const auto& h : p.halfspaces()) hs.push_back({{"normal", detail::vec_to_json(h.normal)}, {"offset", h.offset}});
  return {{"dim", p.dim()}, {"halfspaces", hs}};
}

inline HPolytope polytope_from_json(const json& j) {
  const int d = detail::get<int>(j, "dim");
  require(d >= 1 && d <= kMaxDim - 1, ErrorCode::Input, "polytope dimension out of range");
  const json& hs = detail::field(j, "halfspaces");
  require(hs.is_array(), ErrorCode::Input, "halfspaces must be an array");
  std::vector<Halfspace> out;
  for (const auto& h : hs) {
    Vec n = detail::vec_from_json(detail::field(h, "normal"), d);
    require(n.norm() > 0.0, ErrorCode::Input, "halfspace normal is zero");
    out.push_back({n, detail::get<double>(h, "offset")});
  }
  return HPolytope(d, std::move(out));
}

inline json points_to_json(const std::vector<Vec>& pts) {
  json a = json::array();
  for (const auto& p : pts) a.push_back(detail::vec_to_json(p));
  return {{"dim", pts.empty() ? 0 : static_cast<int>(pts[0].size())}, {"points", a}};
}

inline std::vector<Vec> points_from_json(const json& j) {
  const int d = detail::get<int>(j, "dim");
  require(d >= 1 && d <= kMaxDim, ErrorCode::Input, "point dimension out of range");
  const json& a = detail::field(j, "points");
  require(a.is_array(), ErrorCode::Input, "points must be an array");
  std::vector<Vec> out;
  for (const auto& p : a) out.push_back(detail::vec_from_json(p, d));
  return out;
}

inline json canonical_to_json(const CanonicalBody& k) {
  return {{"body", polytope_to_json(k.body)},
          {"gamma", k.gamma},
          {"distance_bound", k.distance_bound},
          {"map",
           {{"matrix", detail::mat_to_json(k.map.matrix)},
            {"translation", detail::vec_to_json(k.map.translation)},
            {"inverse", detail::mat_to_json(k.map.inverse)}}}};
}

inline CanonicalBody canonical_from_json(const json& j) {
  CanonicalBody k;
  k.body = polytope_from_json(detail::field(j, "body"));
  const int d = k.body.dim();
  k.gamma = detail::get<double>(j, "gamma");
  k.distance_bound = detail::get<double>(j, "distance_bound");
  const json& m = detail::field(j, "map");
  k.map.matrix = detail::mat_from_json(detail::field(m, "matrix"), d);
  k.map.translation = detail::vec_from_json(detail::field(m, "translation"), d);
  k.map.inverse = detail::mat_from_json(detail::field(m, "inverse"), d);
  return k;
}

inline json dag_to_json(const LayeredDag& dag) {
  const auto& p = dag.params;
  json j;
  j["params"] = {{"dim", p.dim},     {"gamma", p.gamma}, {"delta0", p.delta0},
                 {"lambda0", p.lambda0}, {"eps", p.eps},     {"ell", p.ell},
                 {"strict_constants", p.strict_constants}};
  json stats = json::array();
  for (const auto& s : dag.stats.levels)
    stats.push_back({{"nodes", s.nodes},
                     {"candidates", s.candidates},
                     {"repair_rounds", s.repair_rounds},
                     {"repair_inserted", s.repair_inserted},
                     {"repair_accepted", s.repair_accepted},
                     {"sandwich_failures", s.sandwich_failures}});
  j["stats"] = {{"levels", stats},
                {"max_fanout", dag.stats.max_fanout},
                {"edges", dag.stats.edges},
                {"witness_fallbacks", dag.stats.witness_fallbacks},
                {"sampled_sandwich", dag.stats.sampled_sandwich}};
  json levels = json::array();
  for (const auto& level : dag.levels) {
    json nodes = json::array();
    for (const auto& n : level) {
      json jn = {{"center", detail::vec_to_json(n.center)},
                 {"ellipsoid_center", detail::vec_to_json(n.ellipsoid.center)},
                 {"shape", detail::mat_to_json(n.ellipsoid.shape)},
                 {"children", n.children}};
      if (!n.witnesses.empty()) jn["witnesses"] = n.witnesses;
      nodes.push_back(std::move(jn));
    }
    levels.push_back(std::move(nodes));
  }
  j["levels"] = std::move(levels);
  return j;
}

inline LayeredDag dag_from_json(const json& j) {
  LayeredDag dag;
  const json& p = detail::field(j, "params");
  auto& q = dag.params;
  q.dim = detail::get<int>(p, "dim");
  require(q.dim >= 1 && q.dim <= kMaxDim - 1, ErrorCode::Input, "dag dimension out of range");
  q.gamma = detail::get<double>(p, "gamma");
  q.delta0 = detail::get<double>(p, "delta0");
  q.lambda0 = detail::get<double>(p, "lambda0");
  q.eps = detail::get<double>(p, "eps");
  q.ell = detail::get<int>(p, "ell");
  q.strict_constants = detail::get<bool>(p, "strict_constants");
  const json& st = detail::field(j, "stats");
  for (const auto& s : detail::field(st, "levels")) {
    LevelStats l;
    l.nodes = detail::get<int>(s, "nodes");
    l.candidates = detail::get<long>(s, "candidates");
    l.repair_rounds = detail::get<int>(s, "repair_rounds");
    l.repair_inserted = detail::get<int>(s, "repair_inserted");
    l.repair_accepted = detail::get<int>(s, "repair_accepted");
    l.sandwich_failures = detail::get<int>(s, "sandwich_failures");
    dag.stats.levels.push_back(l);
  }
  dag.stats.max_fanout = detail::get<int>(st, "max_fanout");
  dag.stats.edges = detail::get<long>(st, "edges");
  dag.stats.witness_fallbacks = detail::get<int>(st, "witness_fallbacks");
  dag.stats.sampled_sandwich = detail::get<bool>(st, "sampled_sandwich");
  const json& levels = detail::field(j, "levels");
  require(levels.is_array() && static_cast<int>(levels.size()) == q.ell + 1, ErrorCode::Input,
          "dag level count does not match ell");
  for (std::size_t i = 0; i < levels.size(); ++i) {
    std::vector<DagNode> nodes;
    for (const auto& jn : levels[i]) {
      DagNode n;
      n.center = detail::vec_from_json(detail::field(jn, "center"), q.dim);
      n.ellipsoid.center = detail::vec_from_json(detail::field(jn, "ellipsoid_center"), q.dim);
      n.ellipsoid.shape = detail::mat_from_json(detail::field(jn, "shape"), q.dim);
      n.level = static_cast<int>(i);
      n.children = detail::get<std::vector<int>>(jn, "children");
      if (jn.contains("witnesses")) n.witnesses = detail::get<std::vector<int>>(jn, "witnesses");
      nodes.push_back(std::move(n));
    }
    dag.levels.push_back(std::move(nodes));
  }
  for (std::size_t i = 0; i < dag.levels.size(); ++i)
    for (const auto& n : dag.levels[i]) {
      const std::size_t next = i + 1 < dag.levels.size() ? dag.levels[i + 1].size() : 0;
      for (int c : n.children)
        require(c >= 0 && static_cast<std::size_t>(c) < next, ErrorCode::Input, "child index out of range");
      require(i + 1 == dag.levels.size() || !n.children.empty(), ErrorCode::Input, "inner node without children");
    }
  return dag;
}

struct DagFile {
  CanonicalBody body;
  LayeredDag dag;
};

inline json dag_file_to_json(const CanonicalBody& k, const LayeredDag& dag) {
  return {{"format", "apm-dag"}, {"version", 1}, {"canonical", canonical_to_json(k)}, {"dag", dag_to_json(dag)}};
}

inline DagFile dag_file_from_json(const json& j) {
  require(j.is_object() && j.value("format", "") == "apm-dag", ErrorCode::Input, "not a dag file");
  DagFile f{canonical_from_json(detail::field(j, "canonical")), dag_from_json(detail::field(j, "dag"))};
  require(f.body.dim() == f.dag.dim(), ErrorCode::Input, "body and dag dimensions differ");
  for (const auto& leaf : f.dag.levels.back())
    for (int w : leaf.witnesses)
      require(w >= 0 && static_cast<std::size_t>(w) < f.body.body.size(), ErrorCode::Input,
              "witness index out of range");
  return f;
}

inline void save_dag(const std::string& path, const CanonicalBody& k, const LayeredDag& dag) {
  write_file(path, dag_file_to_json(k, dag).dump());
}

inline DagFile load_dag(const std::string& path) { return dag_file_from_json(read_json(path)); }

inline HPolytope load_polytope(const std::string& path) { return polytope_from_json(read_json(path)); }

inline std::vector<Vec> load_points(const std::string& path) { return points_from_json(read_json(path)); }

// Cells with a structure store it in the dag file layout.
inline json ann_to_json(const AnnIndex& idx) {
  json cells = json::array();
  for (const auto& c : idx.cells) cells.push_back({c.rep_begin, c.rep_count, c.structure});
  json structures = json::array();
  for (const auto& s : idx.structures)
    structures.push_back({{"cell", s.cell},
                          {"center", detail::vec_to_json(s.center)},
                          {"norm_scale", s.norm_scale},
                          {"rep_of_facet", s.cs.rep_of_facet},
                          {"canonical", canonical_to_json(s.cs.body)},
                          {"dag", dag_to_json(s.cs.dag)}});
  return {{"format", "apm-ann"},
          {"version", 1},
          {"points", points_to_json(idx.points)},
          {"unique", idx.unique},
          {"eps", idx.eps},
          {"m", idx.m},
          {"t", idx.t},
          {"center", detail::vec_to_json(idx.center)},
          {"half", idx.half},
          {"first_child", idx.first_child},
          {"leaf", idx.leaf},
          {"cells", cells},
          {"rep_pool", idx.rep_pool},
          {"structures", structures},
          {"stats",
           {{"leaves", idx.stats.leaves},
            {"total_reps", idx.stats.total_reps},
            {"max_reps", idx.stats.max_reps},
            {"dag_cells", idx.stats.dag_cells},
            {"depth", idx.stats.depth},
            {"m_clamped", idx.stats.m_clamped}}},
          {"warnings", idx.warnings}};
}

inline AnnIndex ann_from_json(const json& j) {
  require(j.is_object() && j.value("format", "") == "apm-ann", ErrorCode::Input, "not an ann index file");
  AnnIndex idx;
  idx.points = points_from_json(detail::field(j, "points"));
  require(!idx.points.empty(), ErrorCode::Input, "index has no points");
  const int d = idx.dim();
  idx.unique = detail::get<std::vector<int>>(j, "unique");
  idx.eps = detail::get<double>(j, "eps");
  idx.m = detail::get<int>(j, "m");
  idx.t = detail::get<double>(j, "t");
  idx.center = detail::vec_from_json(detail::field(j, "center"), d);
  idx.half = detail::get<double>(j, "half");
  idx.first_child = detail::get<std::vector<int>>(j, "first_child");
  idx.leaf = detail::get<std::vector<int>>(j, "leaf");
  for (const auto& c : detail::field(j, "cells")) {
    require(c.is_array() && c.size() == 3, ErrorCode::Input, "bad cell record");
    idx.cells.push_back({c[0].get<int>(), c[1].get<int>(), c[2].get<int>()});
  }
  idx.rep_pool = detail::get<std::vector<int>>(j, "rep_pool");
  for (const auto& s : detail::field(j, "structures")) {
    AnnStructure st;
    st.cell = detail::get<int>(s, "cell");
    st.center = detail::vec_from_json(detail::field(s, "center"), d);
    st.norm_scale = detail::get<double>(s, "norm_scale");
    st.cs.rep_of_facet = detail::get<std::vector<int>>(s, "rep_of_facet");
    st.cs.body = canonical_from_json(detail::field(s, "canonical"));
    st.cs.dag = dag_from_json(detail::field(s, "dag"));
    idx.structures.push_back(std::move(st));
  }
  const json& st = detail::field(j, "stats");
  idx.stats.leaves = detail::get<long>(st, "leaves");
  idx.stats.total_reps = detail::get<long>(st, "total_reps");
  idx.stats.max_reps = detail::get<int>(st, "max_reps");
  idx.stats.dag_cells = detail::get<int>(st, "dag_cells");
  idx.stats.depth = detail::get<int>(st, "depth");
  idx.stats.m_clamped = detail::get<bool>(st, "m_clamped");
  idx.warnings = detail::get<std::vector<std::string>>(j, "warnings");
  const std::size_t nodes = idx.first_child.size();
  require(idx.leaf.size() == nodes && nodes > 0, ErrorCode::Input, "bad quadtree arrays");
  for (std::size_t i = 0; i < nodes; ++i) {
    if (idx.leaf[i] >= 0)
      require(static_cast<std::size_t>(idx.leaf[i]) < idx.cells.size(), ErrorCode::Input, "leaf index out of range");
    else
      require(idx.first_child[i] > 0 && idx.first_child[i] + (1 << d) <= static_cast<int>(nodes), ErrorCode::Input,
              "child index out of range");
  }
  for (const auto& c : idx.cells) {
    require(c.rep_begin >= 0 && c.rep_count >= 1 &&
                static_cast<std::size_t>(c.rep_begin + c.rep_count) <= idx.rep_pool.size(),
            ErrorCode::Input, "cell rep range out of bounds");
    require(c.structure < static_cast<int>(idx.structures.size()), ErrorCode::Input, "structure index out of range");
  }
  for (int r : idx.rep_pool)
    require(r >= 0 && static_cast<std::size_t>(r) < idx.points.size(), ErrorCode::Input, "rep index out of range");
  return idx;
}

}  // namespace apm::io
