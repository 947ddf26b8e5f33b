#pragma once

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "sdms/analysis.hpp"

namespace sdms {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Mode { fem_fem, fem_msfem };
enum class Solver { robin, monolithic };

struct RunConfig {
  std::string example;  // "1", "2" or "constant"
  double epsilon = 0.008;
  double p = 1.8;
  Mode mode = Mode::fem_msfem;
  std::vector<int> n{4, 8, 16, 32, 64};
  int m = 32;  // 0: auto, h/M matches the reference Darcy step
  double gamma_f = 0.1;
  double gamma_p = 1.0;
  double eps_error = 1e-10;
  int max_iter = 1000;
  double nu = 1.0, alpha = 1.0, g = 1.0;
  int ref_n_s = 256;
  int ref_n_d = 512;
  int workers = 1;
  std::string out = "out";
  bool bjs_simplified = false;
  DarcyEvaluator::Mode msfem_eval = DarcyEvaluator::Mode::composite;
  RobinOrdering rr_ordering = RobinOrdering::jacobi;
  Solver solver = Solver::robin;
  std::optional<double> fix_eps_over_h;
  bool compare_reference = false;
};

RunConfig parse_config_text(const std::string& text, const std::string& origin = "<config>");
RunConfig parse_config(const std::string& path);
/// Key reference printed by --help.
std::string config_help();

/// Values in effect for one mesh size N.
struct CaseSetup {
  int n = 0;
  double epsilon = 0;
  int m = 1;
  int ref_n_d = 0;
};
CaseSetup case_setup(const RunConfig& cfg, int n);

CoefficientPtr coefficient_for(const RunConfig& cfg, double epsilon);
ReferenceConfig reference_config(const RunConfig& cfg, const CaseSetup& c);

/// SDMSFEM_CACHE_DIR, else <out>/cache.
std::string cache_dir(const RunConfig& cfg);

struct StudyRow {
  double h = 0;
  ErrorReport e;
};

std::string format_e(double v);
/// Order columns are dropped when there is a single row.
std::string study_csv(const std::vector<StudyRow>& rows);
std::string study_table(const std::vector<StudyRow>& rows, const std::string& title);

/// Loads the basis cache when present, otherwise builds and stores it.
MsBasisSet cached_basis(const RunConfig& cfg, const TriMesh& mesh, const CoefficientField& k, int m,
                        std::ostream& log, bool* hit = nullptr);

CoupledProblem build_problem(const RunConfig& cfg, const CaseSetup& c, std::ostream& log);

void cmd_offline(const RunConfig& cfg, std::ostream& log);
void cmd_solve(const RunConfig& cfg, std::ostream& log);
std::vector<StudyRow> cmd_study(const RunConfig& cfg, std::ostream& log);
void cmd_reference(const RunConfig& cfg, std::ostream& log);

}  // namespace sdms
