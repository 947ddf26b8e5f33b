#include "sdms/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <unistd.h>

#include "sdms/binio.hpp"

namespace sdms {

namespace fs = std::filesystem;

namespace {

struct KeyInfo {
  const char* name;
  const char* help;
};

constexpr KeyInfo kKeys[] = {
    {"example", "coefficient field: 1, 2 or constant (required)"},
    {"epsilon", "oscillation period of K (0.008)"},
    {"P", "amplitude of K; 1.8 for example 1, 1.5 for example 2, the value of K for constant"},
    {"mode", "fem-fem | fem-msfem (fem-msfem)"},
    {"N", "comma separated coarse mesh sizes, h = 1/N (4, 8, 16, 32, 64)"},
    {"M", "fine cells per coarse edge for the multiscale basis, or auto for h/M = 1/ref_n_d (32; fem-fem uses 1)"},
    {"gamma_f", "Robin coefficient on the Stokes side (0.1)"},
    {"gamma_p", "Robin coefficient on the Darcy side (1)"},
    {"eps_error", "Robin-Robin stopping tolerance on eps_iter (1e-10)"},
    {"max_iter", "Robin-Robin iteration limit (1000)"},
    {"nu", "viscosity (1)"},
    {"alpha", "slip coefficient (1)"},
    {"g", "gravity (1)"},
    {"ref_n_s", "reference Stokes mesh size (256)"},
    {"ref_n_d", "reference Darcy mesh size, a multiple of ref_n_s (512)"},
    {"workers", "worker threads (1)"},
    {"out", "output directory (out)"},
    {"bjs_simplified", "true: tangential coefficient alpha instead of alpha*nu*sqrt(2)/sqrt(trace K) (false)"},
    {"msfem_eval", "composite | coarse_p1 evaluation of the multiscale head (composite)"},
    {"rr_ordering", "jacobi | gauss-seidel (jacobi)"},
    {"solver", "robin | monolithic coupled solve (robin)"},
    {"fix_eps_over_h", "study with epsilon = ratio * h per row; the reference Darcy mesh follows epsilon (unset)"},
    {"compare_reference", "solve also writes errors.csv against the reference (false)"},
};

const std::map<std::string, std::string> kAliases = {
    {"eps", "epsilon"}, {"ε", "epsilon"}, {"γ_f", "gamma_f"}, {"γ_p", "gamma_p"}, {"ν", "nu"},
    {"α", "alpha"},     {"p", "P"},       {"n", "N"},         {"m", "M"},
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

std::size_t edit_distance(const std::string& a, const std::string& b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j)
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

class LineError {
 public:
  LineError(std::string origin, int line) : origin_(std::move(origin)), line_(line) {}
  [[noreturn]] void fail(const std::string& msg) const {
    throw ConfigError(origin_ + ":" + std::to_string(line_) + ": " + msg);
  }
  double number(const std::string& key, const std::string& v) const {
    try {
      std::size_t used = 0;
      const double x = std::stod(v, &used);
      if (used == v.size() && std::isfinite(x)) return x;
    } catch (const std::exception&) {
    }
    fail(key + " expects a number, got '" + v + "'");
  }
  double positive(const std::string& key, const std::string& v) const {
    const double x = number(key, v);
    if (!(x > 0)) fail(key + " must be positive");
    return x;
  }
  int integer(const std::string& key, const std::string& v, int min) const {
    try {
      std::size_t used = 0;
      const long x = std::stol(v, &used);
      if (used == v.size()) {
        if (x < min || x > 1 << 20) fail(key + " must be an integer >= " + std::to_string(min));
        return static_cast<int>(x);
      }
    } catch (const std::logic_error&) {
    }
    fail(key + " expects an integer, got '" + v + "'");
  }
  bool boolean(const std::string& key, const std::string& v) const {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    fail(key + " expects true or false, got '" + v + "'");
  }

 private:
  std::string origin_;
  int line_;
};

std::string hex16(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  f << text;
  if (!f) throw std::runtime_error("cannot write " + path.string());
}

std::string mode_name(Mode m) { return m == Mode::fem_fem ? "fem-fem" : "fem-msfem"; }

CoupledSolution solve_case(const RunConfig& cfg, const CoupledProblem& prob, std::ostream& log,
                           RobinState* state_out = nullptr) {
  if (cfg.solver == Solver::monolithic) return monolithic_solve(prob);
  RobinOptions opt;
  opt.eps_error = cfg.eps_error;
  opt.max_iter = cfg.max_iter;
  opt.ordering = cfg.rr_ordering;
  opt.workers = cfg.workers;
  auto [sol, state] = robin_robin_solve(prob, opt);
  log << "  robin-robin: " << state.k << " iterations, eps_iter " << format_e(state.history.back()) << "\n";
  if (state_out) *state_out = std::move(state);
  return sol;
}

}  // namespace

std::string config_help() {
  std::ostringstream os;
  os << "Config file: one `key = value` per line, `#` starts a comment.\n";
  for (const auto& k : kKeys) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "  %-18s %s\n", k.name, k.help);
    os << buf;
  }
  return os.str();
}

RunConfig parse_config_text(const std::string& text, const std::string& origin) {
  RunConfig c;
  std::set<std::string> known;
  for (const auto& k : kKeys) known.insert(k.name);
  std::map<std::string, int> seen;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  for (; std::getline(in, raw); ) {
    ++line;
    const LineError at(origin, line);
    const std::string s = trim(raw.substr(0, raw.find('#')));
    if (s.empty()) continue;
    const auto eq = s.find('=');
    if (eq == std::string::npos) at.fail("expected `key = value`");
    std::string key = trim(s.substr(0, eq));
    const std::string v = trim(s.substr(eq + 1));
    if (auto a = kAliases.find(key); a != kAliases.end()) key = a->second;
    if (!known.count(key)) {
      std::string best;
      std::size_t dist = 3;
      for (const auto& k : known)
        if (const auto d = edit_distance(key, k); d < dist) dist = d, best = k;
      std::string msg = "unknown key '" + key + "'";
      if (!best.empty()) msg += " (did you mean '" + best + "'?)";
      at.fail(msg);
    }
    if (seen.count(key)) at.fail("duplicate key '" + key + "' (first set on line " + std::to_string(seen[key]) + ")");
    seen[key] = line;
    if (v.empty()) at.fail(key + " has no value");

    if (key == "example") {
      if (v != "1" && v != "2" && v != "constant") at.fail("example must be 1, 2 or constant");
      c.example = v;
    } else if (key == "epsilon") {
      c.epsilon = at.positive(key, v);
    } else if (key == "P") {
      c.p = at.number(key, v);
    } else if (key == "mode") {
      if (v == "fem-fem") c.mode = Mode::fem_fem;
      else if (v == "fem-msfem") c.mode = Mode::fem_msfem;
      else at.fail("mode must be fem-fem or fem-msfem");
    } else if (key == "N") {
      c.n.clear();
      std::istringstream list(v);
      std::string item;
      while (std::getline(list, item, ',')) c.n.push_back(at.integer(key, trim(item), 1));
      for (std::size_t i = 1; i < c.n.size(); ++i)
        if (c.n[i] <= c.n[i - 1]) at.fail("N must be strictly increasing");
    } else if (key == "M") {
      c.m = v == "auto" ? 0 : at.integer(key, v, 1);
    } else if (key == "gamma_f") {
      c.gamma_f = at.positive(key, v);
    } else if (key == "gamma_p") {
      c.gamma_p = at.positive(key, v);
    } else if (key == "eps_error") {
      c.eps_error = at.positive(key, v);
    } else if (key == "max_iter") {
      c.max_iter = at.integer(key, v, 1);
    } else if (key == "nu") {
      c.nu = at.positive(key, v);
    } else if (key == "alpha") {
      c.alpha = at.number(key, v);
      if (c.alpha < 0) at.fail("alpha must be non-negative");
    } else if (key == "g") {
      c.g = at.positive(key, v);
    } else if (key == "ref_n_s") {
      c.ref_n_s = at.integer(key, v, 1);
    } else if (key == "ref_n_d") {
      c.ref_n_d = at.integer(key, v, 1);
    } else if (key == "workers") {
      c.workers = at.integer(key, v, 1);
    } else if (key == "out") {
      c.out = v;
    } else if (key == "bjs_simplified") {
      c.bjs_simplified = at.boolean(key, v);
    } else if (key == "msfem_eval") {
      if (v == "composite") c.msfem_eval = DarcyEvaluator::Mode::composite;
      else if (v == "coarse_p1") c.msfem_eval = DarcyEvaluator::Mode::coarse_p1;
      else at.fail("msfem_eval must be composite or coarse_p1");
    } else if (key == "rr_ordering") {
      if (v == "jacobi") c.rr_ordering = RobinOrdering::jacobi;
      else if (v == "gauss-seidel" || v == "gauss_seidel") c.rr_ordering = RobinOrdering::gauss_seidel;
      else at.fail("rr_ordering must be jacobi or gauss-seidel");
    } else if (key == "solver") {
      if (v == "robin") c.solver = Solver::robin;
      else if (v == "monolithic") c.solver = Solver::monolithic;
      else at.fail("solver must be robin or monolithic");
    } else if (key == "fix_eps_over_h") {
      c.fix_eps_over_h = at.positive(key, v);
    } else if (key == "compare_reference") {
      c.compare_reference = at.boolean(key, v);
    }
  }
  if (!seen.count("example")) throw ConfigError(origin + ": missing required key 'example'");
  if (!seen.count("P")) c.p = c.example == "1" ? 1.8 : c.example == "2" ? 1.5 : 1.0;
  if (c.example == "1" && !(std::abs(c.p) < 2))
    LineError(origin, seen["P"]).fail("example 1 needs |P| < 2");
  if (c.example == "2" && !(std::abs(c.p) < 2))
    LineError(origin, seen["P"]).fail("example 2 needs |P| < 2");
  if (c.example == "constant" && !(c.p > 0)) LineError(origin, seen["P"]).fail("constant K needs P > 0");
  if (c.mode == Mode::fem_fem) {
    c.m = 1;
  } else if (c.m == 1) {
    LineError(origin, seen.count("M") ? seen["M"] : 0).fail("fem-msfem needs M >= 2");
  }
  if (c.ref_n_d % c.ref_n_s != 0)
    LineError(origin, seen.count("ref_n_d") ? seen["ref_n_d"] : 0).fail("ref_n_d must be a multiple of ref_n_s");
  return c;
}

RunConfig parse_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError(path + ": cannot open config file");
  std::ostringstream s;
  s << f.rdbuf();
  return parse_config_text(s.str(), path);
}

CaseSetup case_setup(const RunConfig& cfg, int n) {
  CaseSetup c;
  c.n = n;
  c.epsilon = cfg.fix_eps_over_h ? *cfg.fix_eps_over_h / n : cfg.epsilon;
  c.ref_n_d = cfg.ref_n_d;
  if (cfg.fix_eps_over_h) {
    const int need = static_cast<int>(std::ceil(4.0 / c.epsilon - 1e-9));
    c.ref_n_d = (need + cfg.ref_n_s - 1) / cfg.ref_n_s * cfg.ref_n_s;
  }
  if (cfg.mode == Mode::fem_fem) {
    c.m = 1;
  } else if (cfg.m == 0) {
    c.m = std::max(2, (c.ref_n_d + n - 1) / n);
  } else {
    c.m = cfg.m;
  }
  return c;
}

CoefficientPtr coefficient_for(const RunConfig& cfg, double epsilon) {
  if (cfg.example == "constant") return make_coefficient("constant", epsilon, cfg.p);
  return make_coefficient("example" + cfg.example, epsilon, cfg.p);
}

static StokesParams stokes_params(const RunConfig& cfg) {
  StokesParams s;
  s.nu = cfg.nu;
  s.alpha = cfg.alpha;
  s.g = cfg.g;
  s.gamma_f = cfg.gamma_f;
  s.bjs_simplified = cfg.bjs_simplified;
  return s;
}

ReferenceConfig reference_config(const RunConfig& cfg, const CaseSetup& c) {
  ReferenceConfig r;
  r.k = coefficient_for(cfg, c.epsilon);
  r.stokes = stokes_params(cfg);
  r.n_s = cfg.ref_n_s;
  r.n_d = c.ref_n_d;
  return r;
}

std::string cache_dir(const RunConfig& cfg) {
  if (const char* e = std::getenv("SDMSFEM_CACHE_DIR"); e && *e) return e;
  return (fs::path(cfg.out) / "cache").string();
}

std::string format_e(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2E", v);
  return buf;
}

namespace {

std::vector<std::array<double, 4>> columns(const std::vector<StudyRow>& rows) {
  std::vector<std::array<double, 4>> c;
  for (const auto& r : rows) c.push_back({r.e.u_l2, r.e.u_h1, r.e.phi_l2, r.e.phi_h1});
  return c;
}

std::vector<std::array<std::optional<double>, 4>> orders(const std::vector<StudyRow>& rows) {
  std::vector<std::array<std::optional<double>, 4>> o(rows.size());
  if (rows.size() < 2) return o;
  std::vector<double> hs;
  for (const auto& r : rows) hs.push_back(r.h);
  const auto c = columns(rows);
  for (int j = 0; j < 4; ++j) {
    std::vector<double> e;
    for (const auto& r : c) e.push_back(r[j]);
    const auto col = convergence_orders(e, hs);
    for (std::size_t i = 0; i < col.size(); ++i) o[i + 1][j] = col[i];
  }
  return o;
}

std::string format_order(const std::optional<double>& o) {
  if (!o) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", *o);
  return buf;
}

std::string format_h(double h) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", h);
  return buf;
}

std::string h_label(double h) {
  const double n = 1.0 / h;
  if (std::abs(n - std::round(n)) < 1e-9) return "1/" + std::to_string(static_cast<long>(std::round(n)));
  return format_h(h);
}

}  // namespace

std::string study_csv(const std::vector<StudyRow>& rows) {
  const bool with_orders = rows.size() > 1;
  std::string s = with_orders ? "h,e_uf_L2,order,e_uf_H1,order,e_phip_L2,order,e_phip_H1,order\n"
                              : "h,e_uf_L2,e_uf_H1,e_phip_L2,e_phip_H1\n";
  const auto c = columns(rows);
  const auto o = orders(rows);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    s += format_h(rows[i].h);
    for (int j = 0; j < 4; ++j) {
      s += "," + format_e(c[i][j]);
      if (with_orders) s += "," + format_order(o[i][j]);
    }
    s += "\n";
  }
  return s;
}

std::string study_table(const std::vector<StudyRow>& rows, const std::string& title) {
  const bool with_orders = rows.size() > 1;
  std::ostringstream os;
  os << title << "\n";
  char buf[256];
  if (with_orders)
    std::snprintf(buf, sizeof buf, "%-8s %-10s %-6s %-10s %-6s %-10s %-6s %-10s %-6s\n", "h", "|e_uf|L2", "Order",
                  "|e_uf|H1", "Order", "|e_phip|L2", "Order", "|e_phip|H1", "Order");
  else
    std::snprintf(buf, sizeof buf, "%-8s %-10s %-10s %-10s %-10s\n", "h", "|e_uf|L2", "|e_uf|H1", "|e_phip|L2",
                  "|e_phip|H1");
  os << buf;
  const auto c = columns(rows);
  const auto o = orders(rows);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%-8s", h_label(rows[i].h).c_str());
    os << buf;
    for (int j = 0; j < 4; ++j) {
      std::snprintf(buf, sizeof buf, " %-10s", format_e(c[i][j]).c_str());
      os << buf;
      if (with_orders) {
        std::snprintf(buf, sizeof buf, " %-6s", i == 0 ? "-" : format_order(o[i][j]).c_str());
        os << buf;
      }
    }
    os << "\n";
  }
  return os.str();
}

MsBasisSet cached_basis(const RunConfig& cfg, const TriMesh& mesh, const CoefficientField& k, int m,
                        std::ostream& log, bool* hit) {
  const auto fp = fingerprint_for(mesh, k, m);
  const fs::path path = fs::path(cache_dir(cfg)) / ("basis_" + hex16(fnv1a(fp.describe())) + ".msfb");
  if (fs::exists(path)) {
    try {
      auto set = load_basis(path.string(), &fp);
      log << "basis cache hit: " << path.string() << "\n";
      if (hit) *hit = true;
      return set;
    } catch (const std::exception& e) {
      log << "basis cache unusable (" << e.what() << "), rebuilding\n";
    }
  }
  if (hit) *hit = false;
  const auto t0 = std::chrono::steady_clock::now();
  auto set = offline_build(mesh, k, m, cfg.workers);
  const double dt = seconds_since(t0);
  fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp" + std::to_string(::getpid());
  save_basis(set, tmp.string());
  fs::rename(tmp, path);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", dt);
  log << "basis cache miss: built " << fp.describe() << " in " << buf << " s, wrote " << path.string() << "\n";
  return set;
}

CoupledProblem build_problem(const RunConfig& cfg, const CaseSetup& c, std::ostream& log) {
  CoupledProblem p;
  p.stokes_mesh = std::make_shared<const TriMesh>(build_stokes_mesh(c.n));
  p.darcy_mesh = std::make_shared<const TriMesh>(build_darcy_mesh(c.n));
  p.k = coefficient_for(cfg, c.epsilon);
  p.basis = std::make_shared<const MsBasisSet>(cached_basis(cfg, *p.darcy_mesh, *p.k, c.m, log));
  p.stokes = stokes_params(cfg);
  p.gamma_p = cfg.gamma_p;
  p.eval_mode = cfg.msfem_eval;
  return p;
}

void cmd_offline(const RunConfig& cfg, std::ostream& log) {
  for (int n : cfg.n) {
    const auto c = case_setup(cfg, n);
    const auto mesh = build_darcy_mesh(n);
    const auto k = coefficient_for(cfg, c.epsilon);
    cached_basis(cfg, mesh, *k, c.m, log);
  }
}

void cmd_solve(const RunConfig& cfg, std::ostream& log) {
  if (cfg.n.size() != 1) throw ConfigError("solve runs a single case; set exactly one value of N");
  const auto c = case_setup(cfg, cfg.n.front());
  const auto prob = build_problem(cfg, c, log);
  const fs::path out(cfg.out);
  fs::create_directories(out);
  RobinState state;
  CoupledSolution sol;
  try {
    sol = solve_case(cfg, prob, log, &state);
  } catch (const RobinConvergenceError& e) {
    std::ostringstream s;
    write_iteration_log(s, e.state);
    write_text(out / "iterations.csv", s.str());
    throw;
  }
  if (cfg.solver == Solver::robin) {
    std::ostringstream s;
    write_iteration_log(s, state);
    write_text(out / "iterations.csv", s.str());
  }

  char buf[160];
  std::string stokes = "x,y,ux,uy,p\n";
  const auto& sm = *prob.stokes_mesh;
  for (std::size_t v = 0; v < sm.num_vertices(); ++v) {
    const auto s = sol.flow->eval(sm.vertices()[v]);
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g\n", sm.vertices()[v].x, sm.vertices()[v].y, s.u[0],
                  s.u[1], s.p);
    stokes += buf;
  }
  write_text(out / "solution_stokes.csv", stokes);
  std::string darcy = "x,y,phi\n";
  const auto& dm = *prob.darcy_mesh;
  for (std::size_t v = 0; v < dm.num_vertices(); ++v) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", dm.vertices()[v].x, dm.vertices()[v].y, sol.head_dofs[v]);
    darcy += buf;
  }
  write_text(out / "solution_darcy.csv", darcy);

  if (cfg.compare_reference) {
    bool hit = false;
    const auto ref = cached_reference(reference_config(cfg, c), cache_dir(cfg), &hit);
    log << "reference " << (hit ? "cache hit" : "computed") << "\n";
    const std::vector<StudyRow> rows{{1.0 / c.n, error_norms(sol, ref, cfg.workers)}};
    write_text(out / "errors.csv", study_csv(rows));
  }
  log << "wrote " << out.string() << "\n";
}

std::vector<StudyRow> cmd_study(const RunConfig& cfg, std::ostream& log) {
  const fs::path out(cfg.out);
  fs::create_directories(out);
  std::vector<StudyRow> rows;
  for (int n : cfg.n) {
    const auto c = case_setup(cfg, n);
    log << "N=" << n << " M=" << c.m << " eps=" << c.epsilon << " (" << mode_name(cfg.mode) << ")\n";
    const auto t0 = std::chrono::steady_clock::now();
    const auto prob = build_problem(cfg, c, log);
    const auto sol = solve_case(cfg, prob, log);
    bool hit = false;
    const auto ref = cached_reference(reference_config(cfg, c), cache_dir(cfg), &hit);
    log << "  reference " << cfg.ref_n_s << "/" << c.ref_n_d << (hit ? " (cache hit)" : " (computed)") << "\n";
    rows.push_back({1.0 / n, error_norms(sol, ref, cfg.workers)});
    write_text(out / "study.csv", study_csv(rows));
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.1f", seconds_since(t0));
    log << "  done in " << buf << " s\n";
  }
  return rows;
}

void cmd_reference(const RunConfig& cfg, std::ostream& log) {
  std::set<std::uint64_t> done;
  for (int n : cfg.n) {
    const auto r = reference_config(cfg, case_setup(cfg, n));
    if (!done.insert(reference_hash(r)).second) continue;
    const auto t0 = std::chrono::steady_clock::now();
    bool hit = false;
    cached_reference(r, cache_dir(cfg), &hit);
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.1f", seconds_since(t0));
    log << "reference " << r.n_s << "/" << r.n_d << " eps=" << r.k->epsilon() << ": "
        << (hit ? "cache hit " : "computed ") << reference_cache_path(r, cache_dir(cfg)) << " (" << buf << " s)\n";
  }
}

}  // namespace sdms
