#pragma once

// Scaling and contract experiments with machine-readable reports. Timing
// fields are kept apart so the remaining content is reproducible byte for
// byte from (config, seed).

#include "apm/bodies.hpp"
#include "apm/canonical.hpp"
#include "apm/hierarchy.hpp"
#include "apm/oracle.hpp"
#include "apm/query.hpp"

#include "json.hpp"

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace apm::bench {

using json = nlohmann::json;

struct ContractCounts {
  long rays = 0;
  long ray_violations = 0;        // any of the four checks below
  long off_witness = 0;           // |witness residual| > 1e-9
  long interior = 0;              // answer strictly inside K
  long too_far = 0;               // dist(p, K) > eps + 1e-6
  long bad_path = 0;              // path length != ell + 1
  long members = 0;               // sampled points with a known status
  long member_violations = 0;
  long band = 0;                  // points within eps outside K, not counted
  long witness_unsound = 0;       // Outside without a separating witness
  double max_distance = 0.0;

  long violations() const { return ray_violations + member_violations + witness_unsound; }
};

struct EpsRow {
  double eps = 0.0;
  int ell = 0;
  long node_count = 0;
  long leaf_count = 0;
  int max_fanout = 0;
  double mean_path = 0.0;
  double mean_checks = 0.0;
  int witness_fallbacks = 0;
  ContractCounts contract;
  std::string status = "ok";
  double build_seconds = 0.0;
  double query_seconds = 0.0;    // mean per ray query
};

struct BenchReport {
  std::string kind;
  std::string body;
  int dim = 0;
  std::vector<double> eps_list;
  std::uint64_t seed = 42;
  long n_queries = 0;
  double gamma = 0.0;
  std::vector<EpsRow> rows;
  std::optional<double> slope;

  long violations() const {
    long v = 0;
    for (const auto& r : rows) v += r.contract.violations();
    return v;
  }
  bool all_ok() const {
    for (const auto& r : rows)
      if (r.status != "ok") return false;
    return true;
  }
};

inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::string fmt_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::string config_string(const BenchReport& r) {
  std::string s = r.kind + "|" + r.body + "|" + std::to_string(r.dim) + "|" + std::to_string(r.seed) + "|" +
                  std::to_string(r.n_queries);
  for (double e : r.eps_list) s += "|" + fmt_double(e);
  return s;
}

inline std::string config_hash(const BenchReport& r) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(config_string(r))));
  return buf;
}

inline std::string report_stem(const BenchReport& r) {
  return r.kind + "_" + r.body + "_d" + std::to_string(r.dim) + "_" + config_hash(r);
}

// Least-squares slope of log y against log x.
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  require(x.size() == y.size() && x.size() >= 2, ErrorCode::Input, "slope needs two or more points");
  double mx = 0.0, my = 0.0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    require(x[i] > 0.0 && y[i] > 0.0, ErrorCode::Input, "slope needs positive values");
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double a = std::log(x[i]) - mx;
    sxy += a * (std::log(y[i]) - my);
    sxx += a * a;
  }
  require(sxx > 0.0, ErrorCode::Input, "slope needs distinct x values");
  return sxy / sxx;
}

inline json contract_to_json(const ContractCounts& c) {
  return {{"rays", c.rays},
          {"ray_violations", c.ray_violations},
          {"off_witness", c.off_witness},
          {"interior", c.interior},
          {"too_far", c.too_far},
          {"bad_path", c.bad_path},
          {"members", c.members},
          {"member_violations", c.member_violations},
          {"band", c.band},
          {"witness_unsound", c.witness_unsound},
          {"max_distance", c.max_distance}};
}

inline json to_json(const BenchReport& r, bool timing = false) {
  json rows = json::array();
  for (const auto& e : r.rows) {
    json j = {{"eps", e.eps},
              {"ell", e.ell},
              {"node_count", e.node_count},
              {"leaf_count", e.leaf_count},
              {"max_fanout", e.max_fanout},
              {"mean_path", e.mean_path},
              {"mean_checks", e.mean_checks},
              {"witness_fallbacks", e.witness_fallbacks},
              {"contract", contract_to_json(e.contract)},
              {"violations", e.contract.violations()},
              {"status", e.status}};
    if (timing) {
      j["build_seconds"] = e.build_seconds;
      j["query_seconds"] = e.query_seconds;
    }
    rows.push_back(std::move(j));
  }
  json j = {{"kind", r.kind},
            {"config",
             {{"body", r.body}, {"dim", r.dim}, {"eps", r.eps_list}, {"seed", r.seed}, {"queries", r.n_queries}}},
            {"config_hash", config_hash(r)},
            {"gamma", r.gamma},
            {"rows", rows},
            {"violations", r.violations()}};
  j["slope"] = r.slope ? json(*r.slope) : json(nullptr);
  return j;
}

inline std::string to_csv(const BenchReport& r, bool timing = false) {
  std::ostringstream os;
  os << "kind,body,dim,seed,eps,ell,node_count,leaf_count,max_fanout,mean_path,mean_checks,"
        "witness_fallbacks,rays,members,band,violations,status";
  if (timing) os << ",build_seconds,query_seconds";
  os << "\n";
  for (const auto& e : r.rows) {
    os << r.kind << "," << r.body << "," << r.dim << "," << r.seed << "," << fmt_double(e.eps) << "," << e.ell << ","
       << e.node_count << "," << e.leaf_count << "," << e.max_fanout << "," << fmt_double(e.mean_path) << ","
       << fmt_double(e.mean_checks) << "," << e.witness_fallbacks << "," << e.contract.rays << ","
       << e.contract.members << "," << e.contract.band << "," << e.contract.violations() << ",\"" << e.status
       << "\"";
    if (timing) os << "," << fmt_double(e.build_seconds) << "," << fmt_double(e.query_seconds);
    os << "\n";
  }
  return os.str();
}

struct ContractOptions {
  long rays = 10000;
  long members = 10000;
  bool adversarial = true;   // facet normals and vertex directions first
  std::uint64_t seed = 42;
};

// The ray-shooting and membership contracts of one built structure,
// checked against the exact oracles on the canonical body.
inline ContractCounts check_contracts(const LayeredDag& dag, const CanonicalBody& k, const ContractOptions& opt,
                                      double* query_seconds = nullptr) {
  const int d = k.dim();
  const double eps = dag.params.eps;
  ContractCounts c;
  std::vector<Vec> dirs;
  if (opt.adversarial) {
    for (const auto& h : k.body.halfspaces()) dirs.push_back(h.normal);
    if (d <= 3)
      for (const auto& v : enumerate_vertices(k.body)) dirs.push_back(v);
  }
  Rng rng(mix_seed(opt.seed, 11));
  while (static_cast<long>(dirs.size()) < opt.rays) dirs.push_back(rng.unit(d));
  dirs.resize(static_cast<std::size_t>(opt.rays));
  double total = 0.0;
  const Vec origin = Vec::Zero(d);
  for (const auto& u : dirs) {
    ++c.rays;
    const auto t0 = std::chrono::steady_clock::now();
    RayShootAnswer a;
    bool failed = false;
    try {
      a = ray_shoot(dag, k, u);
    } catch (const Error&) {
      failed = true;
    }
    total += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (failed) {
      ++c.ray_violations;
      continue;
    }
    bool bad = false;
    if (std::abs(a.witness.normal.dot(a.point) - a.witness.offset) > 1e-9) {
      ++c.off_witness;
      bad = true;
    }
    if (k.body.min_slack(a.point) > 1e-9) {
      ++c.interior;
      bad = true;
    }
    const double dist = oracle::dist_to_polytope(k.body, a.point, &origin);
    c.max_distance = std::max(c.max_distance, dist);
    if (dist > eps + 1e-6) {
      ++c.too_far;
      bad = true;
    }
    if (a.path_length != dag.params.ell + 1) {
      ++c.bad_path;
      bad = true;
    }
    if (bad) ++c.ray_violations;
  }
  if (query_seconds) *query_seconds = c.rays ? total / static_cast<double>(c.rays) : 0.0;

  // Half the points uniform in K, half outside at oracle distance > eps.
  Rng prng(mix_seed(opt.seed, 12));
  long inside = 0, outside = 0;
  const long want_in = opt.members / 2, want_out = opt.members - want_in;
  while (inside < want_in || outside < want_out) {
    const Vec q = prng.in_ball(d, 0.75 + eps);
    const bool in = contains(k.body, q, 0.0);
    double dist = 0.0;
    if (!in) dist = oracle::dist_to_polytope(k.body, q, &origin);
    if (in && inside >= want_in) continue;
    if (!in && dist > eps && outside >= want_out) continue;
    if (!in && dist <= eps) {
      ++c.band;
      continue;
    }
    ++c.members;
    in ? ++inside : ++outside;
    MembershipAnswer m;
    try {
      m = membership(dag, k, q);
    } catch (const Error&) {
      ++c.member_violations;
      continue;
    }
    const Membership want = in ? Membership::Inside : Membership::Outside;
    if (m.status != want) ++c.member_violations;
    if (m.status == Membership::Outside && !(m.ray.witness.normal.dot(q) > m.ray.witness.offset))
      ++c.witness_unsound;
  }
  return c;
}

struct RunOptions {
  BuildConfig build;
  ContractOptions contract;
  bool check = true;
};

inline EpsRow run_one(const CanonicalBody& k, double eps, const RunOptions& opt, LevelCache* cache) {
  EpsRow row;
  row.eps = eps;
  row.ell = DagParams::make(k.gamma, k.dim(), eps, opt.build.strict_constants).ell;
  try {
    const LayeredDag dag = build_dag(k, eps, opt.build, cache);
    row.build_seconds = dag.stats.seconds;
    row.node_count = dag.node_count();
    row.leaf_count = static_cast<long>(dag.levels.back().size());
    row.max_fanout = dag.stats.max_fanout;
    row.witness_fallbacks = dag.stats.witness_fallbacks;
    row.mean_path = dag.params.ell + 1;
    row.mean_checks = 0.0;
    if (opt.check) {
      row.contract = check_contracts(dag, k, opt.contract, &row.query_seconds);
      long checks = 0, paths = 0;
      Rng rng(mix_seed(opt.contract.seed, 13));
      const int sample = 1000;
      for (int i = 0; i < sample; ++i) {
        const auto a = ray_shoot(dag, k, rng.unit(k.dim()));
        checks += a.fanout_checked;
        paths += a.path_length;
      }
      row.mean_path = static_cast<double>(paths) / sample;
      row.mean_checks = static_cast<double>(checks) / sample;
    }
  } catch (const Error& e) {
    row.status = e.what();
  }
  return row;
}

inline BenchReport run_space_scaling(const std::string& body, int d, const std::vector<double>& eps_list,
                                     std::uint64_t seed, RunOptions opt = {}) {
  BenchReport r;
  r.kind = "space";
  r.body = body;
  r.dim = d;
  r.eps_list = eps_list;
  r.seed = seed;
  r.n_queries = opt.check ? opt.contract.rays : 0;
  opt.build.seed = seed;
  opt.contract.seed = seed;
  const CanonicalBody k = canonicalize(bodies::by_name(body, d), seed);
  r.gamma = k.gamma;
  LevelCache cache;
  std::vector<double> x, y;
  for (double eps : eps_list) {
    r.rows.push_back(run_one(k, eps, opt, &cache));
    const auto& row = r.rows.back();
    if (row.status == "ok") {
      x.push_back(1.0 / eps);
      y.push_back(static_cast<double>(row.leaf_count));
    }
  }
  if (x.size() >= 2 && x.size() == eps_list.size()) r.slope = loglog_slope(x, y);
  return r;
}

inline BenchReport run_query_contract(const std::string& body, int d, double eps, long n_queries,
                                      std::uint64_t seed, RunOptions opt = {}) {
  BenchReport r;
  r.kind = "contract";
  r.body = body;
  r.dim = d;
  r.eps_list = {eps};
  r.seed = seed;
  r.n_queries = n_queries;
  opt.build.seed = seed;
  opt.contract.seed = seed;
  opt.contract.rays = n_queries;
  opt.contract.members = n_queries;
  opt.check = true;
  const CanonicalBody k = canonicalize(bodies::by_name(body, d), seed);
  r.gamma = k.gamma;
  r.rows.push_back(run_one(k, eps, opt, nullptr));
  return r;
}

}  // namespace apm::bench
