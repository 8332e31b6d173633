// apm: build, query, ann, bench and plot front end.

#include "apm/apm.hpp"

#include "CLI11.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace apm;

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitConstruction = 3;
constexpr int kExitVerify = 4;

int exit_code(const Error& e) {
  switch (e.code()) {
    case ErrorCode::Input:
    case ErrorCode::Precondition:
    case ErrorCode::Unbounded:
    case ErrorCode::Infeasible:
      return kExitInput;
    default:
      return kExitConstruction;
  }
}

Vec parse_vec(const std::string& s, int dim) {
  std::vector<double> xs;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    char* end = nullptr;
    const double x = std::strtod(tok.c_str(), &end);
    require(end != tok.c_str() && *end == '\0', ErrorCode::Input, "malformed coordinate: '" + tok + "'");
    xs.push_back(x);
  }
  require(static_cast<int>(xs.size()) == dim, ErrorCode::Input,
          "expected " + std::to_string(dim) + " coordinates, got " + std::to_string(xs.size()));
  Vec v(dim);
  for (int i = 0; i < dim; ++i) v[i] = xs[i];
  require(all_finite(v), ErrorCode::Input, "coordinates must be finite");
  return v;
}

std::string show(const Vec& v) {
  std::string s = "(";
  char buf[32];
  for (int i = 0; i < v.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%s%.12g", i ? ", " : "", v[i]);
    s += buf;
  }
  return s + ")";
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    char* end = nullptr;
    const double x = std::strtod(tok.c_str(), &end);
    require(end != tok.c_str() && *end == '\0', ErrorCode::Input, "malformed number: '" + tok + "'");
    out.push_back(x);
  }
  require(!out.empty(), ErrorCode::Input, "empty list");
  return out;
}

struct BuildArgs {
  std::string input, out = "dag.json";
  double eps = 0.1;
  bool strict = false;
  std::uint64_t seed = 42;
};

int cmd_build(const BuildArgs& a) {
  const HPolytope p = io::load_polytope(a.input);
  const CanonicalBody k = canonicalize(p, a.seed);
  const DagParams params = DagParams::make(k.gamma, k.dim(), a.eps, a.strict);
  if (a.strict) {
    std::cerr << "warning: strict constants give Delta0 = " << params.delta0 << " and " << params.ell + 1
              << " levels\n";
    if (params.ell > 64) {
      std::cerr << "error: ell = " << params.ell << " exceeds 64 levels\n";
      return kExitConstruction;
    }
  }
  BuildConfig cfg;
  cfg.seed = a.seed;
  cfg.strict_constants = a.strict;
  const LayeredDag dag = build_dag(k, a.eps, cfg);
  io::save_dag(a.out, k, dag);
  std::printf("gamma %.6f  Delta0 %.6g  lambda0 %.6g  ell %d\n", k.gamma, params.delta0, params.lambda0, params.ell);
  for (std::size_t i = 0; i < dag.levels.size(); ++i)
    std::printf("level %zu: %zu nodes\n", i, dag.levels[i].size());
  std::printf("nodes %ld  max fanout %d  witness fallbacks %d\n", dag.node_count(), dag.stats.max_fanout,
              dag.stats.witness_fallbacks);
  std::printf("build time %.3f s\nwrote %s\n", dag.stats.seconds, a.out.c_str());
  return kExitOk;
}

struct QueryArgs {
  std::string input, point, ray;
  bool member = false;
};

// Points and directions are in the coordinates of the original polytope;
// rays start at the preimage of the canonical center.
int cmd_query(const QueryArgs& a) {
  const io::DagFile f = io::load_dag(a.input);
  const CanonicalBody& k = f.body;
  const int d = k.dim();
  require(!a.point.empty() || !a.ray.empty(), ErrorCode::Input, "give --point or --ray");
  auto report_ray = [&](const RayShootAnswer& r) {
    const double residual = std::abs(r.witness.normal.dot(r.point) - r.witness.offset);
    std::printf("point %s\n", show(k.map.unmap_point(r.point)).c_str());
    std::printf("canonical point %s\n", show(r.point).c_str());
    std::printf("witness facet %d  normal %s  offset %.12g\n", r.witness_facet, show(r.witness.normal).c_str(),
                r.witness.offset);
    std::printf("path length %d  ellipsoid tests %d\n", r.path_length, r.fanout_checked);
    std::printf("self-check: witness residual %.3g %s\n", residual, residual <= 1e-9 ? "ok" : "FAILED");
    return residual <= 1e-9;
  };
  bool ok = true;
  if (!a.ray.empty()) {
    const Vec dir = parse_vec(a.ray, d);
    require(dir.norm() > 0.0, ErrorCode::Input, "ray direction is zero");
    ok = report_ray(ray_shoot(f.dag, k, k.map.matrix * dir)) && ok;
  }
  if (!a.point.empty()) {
    const Vec q = k.map.map_point(parse_vec(a.point, d));
    if (a.member) {
      const MembershipAnswer m = membership(f.dag, k, q);
      std::printf("%s\n", to_string(m.status));
      if (q.norm() > 0.0) ok = report_ray(m.ray) && ok;
      if (m.status == Membership::Outside) {
        const bool sep = m.ray.witness.normal.dot(q) > m.ray.witness.offset;
        std::printf("separating witness: %s\n", sep ? "yes" : "NO");
        ok = ok && sep;
      }
    } else {
      ok = report_ray(ray_shoot(f.dag, k, q)) && ok;
    }
  }
  return ok ? kExitOk : kExitVerify;
}

struct AnnArgs {
  std::string input, queries;
  double eps = 0.1;
  int m = 0;
  bool verify = false;
  std::uint64_t seed = 42;
};

int cmd_ann(const AnnArgs& a) {
  const auto pts = io::load_points(a.input);
  const auto qs = io::load_points(a.queries);
  require(!pts.empty(), ErrorCode::Input, "point set is empty");
  AnnConfig cfg;
  cfg.dag.seed = a.seed;
  const int m = a.m > 0 ? a.m : ann_m_range(a.eps, static_cast<int>(pts[0].size())).first;
  const AnnIndex idx = build_ann(pts, a.eps, m, cfg);
  for (const auto& w : idx.warnings) std::cerr << "warning: " << w << "\n";
  long violations = 0;
  for (const auto& q : qs) {
    const NnAnswer ans = nn_query_detail(idx, q);
    std::printf("%d %.12g", ans.index, ans.distance);
    if (a.verify) {
      const auto e = oracle::exact_nn(pts, q);
      const bool good = ans.distance <= (1.0 + a.eps) * e.distance + 1e-12;
      if (!good) ++violations;
      std::printf(" exact %d %.12g %s", e.index, e.distance, good ? "ok" : "VIOLATION");
    }
    std::printf("\n");
  }
  std::printf("points %zu  distinct %zu  eps %g  m %d  t %.4g\n", pts.size(), idx.unique.size(), idx.eps, idx.m,
              idx.t);
  std::printf("leaves %ld  total reps %ld  max reps %d  dag cells %d  depth %d\n", idx.stats.leaves,
              idx.stats.total_reps, idx.stats.max_reps, idx.stats.dag_cells, idx.stats.depth);
  std::printf("reps / (n log 1/eps) %.4f\n",
              static_cast<double>(idx.stats.total_reps) /
                  (static_cast<double>(idx.unique.size()) * std::max(std::log(1.0 / idx.eps), 1e-12)));
  if (a.verify) std::printf("violations %ld\n", violations);
  return violations == 0 ? kExitOk : kExitVerify;
}

struct BenchArgs {
  std::string kind = "space", body = "ball64", eps = "0.2,0.1,0.05,0.025", out_dir = ".", format = "json";
  int dim = 2;
  long queries = 1000;
  bool timing = false;
  std::uint64_t seed = 42;
};

int cmd_bench(const BenchArgs& a) {
  const auto eps = parse_list(a.eps);
  bench::BenchReport r;
  if (a.kind == "space") {
    bench::RunOptions opt;
    opt.contract.rays = a.queries;
    opt.contract.members = a.queries;
    opt.check = a.queries > 0;
    r = bench::run_space_scaling(a.body, a.dim, eps, a.seed, opt);
  } else if (a.kind == "contract") {
    require(eps.size() == 1, ErrorCode::Input, "contract bench takes one eps");
    r = bench::run_query_contract(a.body, a.dim, eps[0], a.queries, a.seed);
  } else {
    throw Error(ErrorCode::Input, "unknown bench kind: " + a.kind);
  }
  std::filesystem::create_directories(a.out_dir);
  const std::string stem = (std::filesystem::path(a.out_dir) / bench::report_stem(r)).string();
  std::string path;
  if (a.format == "json") {
    path = stem + ".json";
    io::write_file(path, bench::to_json(r, a.timing).dump(2) + "\n");
  } else if (a.format == "csv") {
    path = stem + ".csv";
    io::write_file(path, bench::to_csv(r, a.timing));
  } else {
    throw Error(ErrorCode::Input, "unknown format: " + a.format);
  }
  for (const auto& row : r.rows)
    std::printf("eps %-8g ell %-3d nodes %-8ld leaves %-8ld fanout %-4d violations %-4ld %s build %.2fs\n", row.eps,
                row.ell, row.node_count, row.leaf_count, row.max_fanout, row.contract.violations(),
                row.status.c_str(), row.build_seconds);
  if (r.slope) std::printf("slope %.4f\n", *r.slope);
  std::printf("wrote %s\n", path.c_str());
  if (!r.all_ok()) return kExitConstruction;
  return r.violations() == 0 ? kExitOk : kExitVerify;
}

struct PlotArgs {
  std::string input, out = "fig.svg";
};

int cmd_plot(const PlotArgs& a) {
  const io::DagFile f = io::load_dag(a.input);
  if (f.body.dim() != 2) {
    std::cerr << "error: plot needs a planar body, got d = " << f.body.dim() << "\n";
    return kExitInput;
  }
  io::write_file(a.out, dag_svg(f.body, f.dag));
  std::printf("wrote %s (%ld ellipses)\n", a.out.c_str(), f.dag.node_count());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Approximate polytope membership and ray shooting"};
  app.require_subcommand(1);

  BuildArgs ba;
  auto* b = app.add_subcommand("build", "Build the layered DAG of a polytope");
  b->add_option("input", ba.input, "polytope JSON")->required();
  b->add_option("--eps", ba.eps, "approximation parameter in (0, 1]")->check(CLI::Range(1e-9, 1.0));
  b->add_flag("--strict", ba.strict, "use the strict Delta0");
  b->add_option("--out", ba.out, "output DAG JSON");
  b->add_option("--seed", ba.seed, "random seed");

  QueryArgs qa;
  auto* q = app.add_subcommand("query", "Ray-shooting or membership query");
  q->add_option("input", qa.input, "DAG JSON")->required();
  q->add_option("--point", qa.point, "query point, comma separated");
  q->add_option("--ray", qa.ray, "ray direction, comma separated");
  q->add_flag("--member", qa.member, "membership query for --point");

  AnnArgs aa;
  auto* an = app.add_subcommand("ann", "Approximate nearest neighbor queries");
  an->add_option("input", aa.input, "points JSON")->required();
  an->add_option("--queries", aa.queries, "query points JSON")->required();
  an->add_option("--eps", aa.eps, "approximation parameter in (0, 1]")->check(CLI::Range(1e-9, 1.0));
  an->add_option("--m", aa.m, "space-time trade-off parameter (default: lower range end)");
  an->add_flag("--verify", aa.verify, "check answers against exact nearest neighbors");
  an->add_option("--seed", aa.seed, "random seed");

  BenchArgs be;
  auto* bc = app.add_subcommand("bench", "Scaling and contract experiments");
  bc->add_option("--kind", be.kind, "space or contract");
  bc->add_option("--body", be.body, "ball64, ball256, cube, random or skewed");
  bc->add_option("--dim", be.dim, "dimension");
  bc->add_option("--eps", be.eps, "comma separated eps list");
  bc->add_option("--queries", be.queries, "queries per eps");
  bc->add_option("--out-dir", be.out_dir, "report directory");
  bc->add_option("--format", be.format, "json or csv");
  bc->add_flag("--timing", be.timing, "include wall-clock fields");
  bc->add_option("--seed", be.seed, "random seed");

  PlotArgs pa;
  auto* pl = app.add_subcommand("plot", "SVG figure of a planar DAG");
  pl->add_option("input", pa.input, "DAG JSON")->required();
  pl->add_option("--out", pa.out, "output SVG");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitInput;
  }

  try {
    if (*b) return cmd_build(ba);
    if (*q) return cmd_query(qa);
    if (*an) return cmd_ann(aa);
    if (*bc) return cmd_bench(be);
    if (*pl) return cmd_plot(pa);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConstruction;
  }
  return kExitOk;
}
