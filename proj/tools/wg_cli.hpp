#pragma once

// Command-line front end. Kept in a header so tests can call run() directly.

#include <CLI11.hpp>

#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "wg/experiments.hpp"
#include "wg/mesh_io.hpp"
#include "wg/verify.hpp"

namespace wgcli {

using namespace wg;

struct RunConfig {
  std::string command;
  std::string pattern = "criss-cross";
  int n = 2;
  std::optional<int> levels;
  std::string family = "type2";
  std::optional<int> degree;
  std::vector<int> m;
  std::string smoother = "sgs";
  std::string coarse = "exact";
  double tol = 1e-8;
  std::uint64_t seed = 1;
  std::string out;
  bool table = false;
};

// Resolved, validated settings.
struct Plan {
  MeshPattern pattern;
  SpaceConfig space;
  SmootherKind smoother;
  CoarseKind coarse;
  int levels;
  std::vector<int> m;
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t pos = 0;
    int v = 0;
    try {
      v = std::stoi(item, &pos);
    } catch (...) {
      throw UsageError("not an integer list: " + s);
    }
    if (pos != item.size()) throw UsageError("not an integer list: " + s);
    out.push_back(v);
  }
  return out;
}

inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  return s.substr(a, s.find_last_not_of(" \t\r") - a + 1);
}

/// Reads key=value lines; '#' starts a comment.
inline std::map<std::string, std::string> read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file: " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line.substr(0, line.find('#')));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw UsageError(path + ":" + std::to_string(lineno) + ": expected key=value");
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return kv;
}

template <class T>
T parse_value(const std::string& key, const std::string& v) {
  T out{};
  std::istringstream is(v);
  is >> out;
  if (is.fail() || !is.eof()) throw UsageError("bad value for " + key + ": " + v);
  return out;
}

// Applies config-file entries whose flag was not given on the command line.
inline void apply_config(RunConfig& rc, const std::map<std::string, std::string>& kv,
                         const std::function<bool(const std::string&)>& given) {
  for (const auto& [k, v] : kv) {
    if (given(k)) continue;
    if (k == "pattern") rc.pattern = v;
    else if (k == "n") rc.n = parse_value<int>(k, v);
    else if (k == "levels") rc.levels = parse_value<int>(k, v);
    else if (k == "family") rc.family = v;
    else if (k == "degree") rc.degree = parse_value<int>(k, v);
    else if (k == "m") rc.m = parse_int_list(v);
    else if (k == "smoother") rc.smoother = v;
    else if (k == "coarse") rc.coarse = v;
    else if (k == "tol") rc.tol = parse_value<double>(k, v);
    else if (k == "seed") rc.seed = parse_value<std::uint64_t>(k, v);
    else if (k == "out") rc.out = v;
    else if (k == "table") rc.table = v == "1" || v == "true";
    else throw UsageError("unknown config key: " + k);
  }
}

inline Plan validate(const RunConfig& rc) {
  Plan p;
  try {
    p.pattern = parse_mesh_pattern(rc.pattern);
    const Family fam = parse_family(rc.family);
    p.space = {fam, rc.degree.value_or(fam == Family::Type1 ? 0 : 1)};
    p.space.require_supported();
    p.smoother = parse_smoother(rc.smoother);
    p.coarse = parse_coarse(rc.coarse);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  if (rc.n < 1) throw UsageError("--n must be at least 1");
  const int def = rc.command == "verify" ? 3 : rc.command == "export-matrix" ? 0 : 5;
  p.levels = rc.levels.value_or(def);
  if (p.levels < 0 || p.levels > 8) throw UsageError("--levels must be in [0, 8]");
  if (rc.command == "verify" && p.levels < 2) throw UsageError("verify needs --levels >= 2");
  if (!(rc.tol > 0.0 && rc.tol < 1.0)) throw UsageError("--tol must be in (0, 1)");
  p.m = rc.m.empty() ? std::vector<int>{1, 2, 3, 4, 10} : rc.m;
  for (int m : p.m)
    if (m < 1) throw UsageError("--m entries must be positive");
  return p;
}

/// Re-prints CSV text as right-aligned columns.
inline void write_aligned(std::ostream& os, const std::string& csv) {
  std::vector<std::vector<std::string>> rows;
  std::stringstream ss(csv);
  std::string line;
  std::vector<std::size_t> width;
  while (std::getline(ss, line)) {
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string c;
    while (std::getline(ls, c, ',')) cells.push_back(c);
    if (width.size() < cells.size()) width.resize(cells.size(), 0);
    for (std::size_t i = 0; i < cells.size(); ++i) width[i] = std::max(width[i], cells[i].size());
    rows.push_back(std::move(cells));
  }
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i)
      os << (i ? "  " : "") << std::setw(static_cast<int>(width[i])) << r[i];
    os << '\n';
  }
}

inline void write_mesh_info(std::ostream& os, const std::vector<Mesh>& h, const SpaceConfig& cfg) {
  os << "level,vertices,edges,boundary_edges,cells,h,interior_unknowns,face_unknowns,unknowns\n";
  for (const Mesh& m : h) {
    const DofMap d(m, cfg);
    os << m.level() << ',' << m.num_vertices() << ',' << m.num_edges() << ',' << m.num_boundary_edges()
       << ',' << m.num_cells() << ',' << format_double(m.h_max()) << ',' << d.num_interior() << ','
       << d.num_face() << ',' << d.size() << '\n';
  }
}

// Returns the exit code; `body` is the primary output.
inline int execute(const RunConfig& rc, const Plan& p, std::ostringstream& body, std::ostream& err) {
  const auto h = build_hierarchy(build_initial_mesh(p.pattern, rc.n), p.levels);
  if (rc.command == "mesh-info") {
    write_mesh_info(body, h, p.space);
  } else if (rc.command == "condition") {
    write_condition_csv(body, condition_study(h, p.space));
  } else if (rc.command == "two-level" || rc.command == "multi-level") {
    SolveSettings s;
    s.tol = rc.tol;
    s.seed = rc.seed;
    s.coarse = rc.command == "multi-level" ? CoarseKind::VCycle : p.coarse;
    std::vector<SolveRow> rows;
    const int first = s.coarse == CoarseKind::VCycle && p.levels > 0 ? 1 : 0;
    for (int m : p.m) {
      s.smoother = {p.smoother, m};
      s.coarse_smoother = s.smoother;
      for (int l = first; l <= p.levels; ++l) rows.push_back(run_stationary_level(h, l, p.space, s));
    }
    write_solve_csv(body, rows);
    for (const auto& r : rows)
      if (!r.converged) {
        err << "level " << r.level << " m=" << r.m << " did not converge\n";
        return 1;
      }
  } else if (rc.command == "verify") {
    VerifyOptions vo;
    vo.seed = rc.seed;
    bool ok = true;
    for (const auto& r : run_verify_suite(h, vo)) {
      print_check(body, r);
      ok = ok && r.passed;
    }
    return ok ? 0 : 1;
  } else if (rc.command == "export-matrix") {
    const Mesh& m = h.back();
    const DofMap d(m, p.space);
    write_matrix_market(body, assemble_system(m, d, p.space, CoefficientField::constant(m)).A);
  }
  return 0;
}

inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  RunConfig rc;
  std::string config_path, m_list;
  CLI::App app{"Weak Galerkin two-level and multilevel experiments", "wgcli"};
  app.require_subcommand(1);
  app.fallthrough();
  std::map<std::string, CLI::Option*> opts;
  opts["pattern"] = app.add_option("--pattern", rc.pattern, "initial mesh: two-triangle | criss-cross");
  opts["n"] = app.add_option("--n", rc.n, "criss-cross subdivisions per side");
  opts["levels"] = app.add_option("--levels", rc.levels, "number of uniform refinements");
  opts["family"] = app.add_option("--family", rc.family, "type1 | type2");
  opts["degree"] = app.add_option("--degree", rc.degree, "polynomial degree k");
  opts["m"] = app.add_option("--m", m_list, "smoothing steps, comma separated");
  opts["smoother"] = app.add_option("--smoother", rc.smoother, "sgs | richardson");
  opts["coarse"] = app.add_option("--coarse", rc.coarse, "exact | vcycle");
  opts["tol"] = app.add_option("--tol", rc.tol, "energy-norm reduction target");
  opts["seed"] = app.add_option("--seed", rc.seed, "random seed");
  opts["out"] = app.add_option("--out", rc.out, "output file (default stdout)");
  opts["table"] = app.add_flag("--table", rc.table, "also print an aligned table to stdout");
  app.add_option("--config", config_path, "key=value file; flags win");
  for (const char* name : {"mesh-info", "condition", "two-level", "multi-level", "verify", "export-matrix"})
    app.add_subcommand(name)->callback([&rc, name] { rc.command = name; });
  app.get_subcommand("mesh-info")->description("mesh and unknown counts per level");
  app.get_subcommand("condition")->description("extreme eigenvalues and condition numbers per level");
  app.get_subcommand("two-level")->description("stationary iteration with the two-level preconditioner");
  app.get_subcommand("multi-level")->description("same with a V-cycle coarse solver");
  app.get_subcommand("verify")->description("identity and norm-equivalence property checks");
  app.get_subcommand("export-matrix")->description("MatrixMarket file of A_h on the finest level");

  const std::string usage = app.help();
  Plan plan;
  try {
    app.parse(argc, argv);
    if (!m_list.empty()) rc.m = parse_int_list(m_list);
    if (!config_path.empty())
      apply_config(rc, read_config_file(config_path),
                   [&](const std::string& k) { return opts.count(k) && opts[k]->count() > 0; });
    plan = validate(rc);
  } catch (const CLI::Success& e) {
    out << usage;
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << usage;
    return 2;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n" << usage;
    return 2;
  }

  std::ostringstream body;
  int code = 0;
  try {
    code = execute(rc, plan, body, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  if (rc.out.empty()) {
    if (rc.table && rc.command != "export-matrix" && rc.command != "verify")
      write_aligned(out, body.str());
    else
      out << body.str();
  } else {
    std::ofstream f(rc.out, std::ios::binary);
    if (!(f << body.str())) {
      err << "error: cannot write " << rc.out << '\n';
      return 1;
    }
    if (rc.table) write_aligned(out, body.str());
  }
  return code;
}

}  // namespace wgcli
