#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cocyclab/cocyclab.h"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitError = 2;

struct Options {
  std::string config;
  unsigned threads = 1;
  std::string out;

  std::string base = "golden";
  double alpha = 0.0;
  double slope = 0.0;
  int depth = 12;
  int grid = 4096;
  std::vector<double> translation;

  std::string family = "schrodinger";
  double energy = 0.0;
  double lambda = 3.0;
  double phase = 0.0;
  int frequency = 1;
  std::vector<double> matrix{2.0, 0.0, 0.0, 0.5};
  std::string table;

  double eps = 0.1;
  std::int64_t n = 10;
  std::int64_t horizon = 0;
  double x = 0.0;
  int anchors = 0;
  std::uint64_t seed = 1;
  double from = 0.0;
  double to = 1.5707963267948966;
  int m_max = 200;
  std::vector<double> points{0.0};
  double hopf_alpha = 3.883222077450933;  // 2 pi times the golden mean
};

struct CliError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void check(cl_status s) {
  if (s != CL_OK) throw CliError(cl_last_error());
}

std::string scalar_text(const json& v, const std::string& key) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_integer() || v.is_number_unsigned()) return v.dump();
  if (v.is_number_float()) {
    std::ostringstream s;
    s.precision(17);
    s << v.get<double>();
    return s.str();
  }
  throw CliError("config field '" + key + "': expected a scalar or an array of scalars");
}

// Every config key becomes a leading --key=value argument, so the command
// line, which comes later, takes precedence.
std::vector<std::string> config_arguments(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CliError("config: cannot open " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw CliError("config " + path + ": " + e.what());
  }
  if (!j.is_object()) throw CliError("config " + path + ": top level must be an object");
  std::vector<std::string> args;
  for (const auto& [key, v] : j.items()) {
    if (key == "config") throw CliError("config field 'config': nesting is not supported");
    std::string value;
    if (v.is_array()) {
      for (std::size_t i = 0; i < v.size(); ++i) value += (i ? "," : "") + scalar_text(v[i], key);
    } else {
      value = scalar_text(v, key);
    }
    args.push_back("--" + key + "=" + value);
  }
  return args;
}

std::string find_config(int argc, char** argv) {
  std::string path;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a.rfind("--config=", 0) == 0) path = a.substr(9);
    if (a == "--config" && i + 1 < argc) path = argv[i + 1];
  }
  return path;
}

struct Handles {
  cl_base* base = nullptr;
  cl_cocycle* co = nullptr;
  cl_run* run = nullptr;
  ~Handles() {
    cl_run_free(run);
    cl_cocycle_free(co);
    cl_base_free(base);
  }
};

std::vector<double> read_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CliError("table: cannot open " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw CliError("table " + path + ": " + e.what());
  }
  if (j.is_object() && j.contains("matrices")) j = j["matrices"];
  if (!j.is_array() || j.empty()) throw CliError("table " + path + ": expected a nonempty array of matrices");
  std::vector<double> entries;
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_array() || j[i].size() != 4) {
      throw CliError("table " + path + ": entry " + std::to_string(i) + " is not [a, b, c, d]");
    }
    for (const auto& e : j[i]) entries.push_back(e.get<double>());
  }
  return entries;
}

cl_base* make_base(const Options& o) {
  cl_base* b = nullptr;
  if (o.base == "golden") {
    check(cl_base_golden(o.grid, &b));
  } else if (o.base == "silver") {
    check(cl_base_silver(o.grid, &b));
  } else if (o.base == "circle") {
    check(cl_base_circle(o.alpha, o.grid, &b));
  } else if (o.base == "torus") {
    check(cl_base_torus(o.translation.data(), static_cast<int>(o.translation.size()), o.grid, &b));
  } else if (o.base == "sturmian") {
    check(cl_base_sturmian(o.slope, o.depth, o.grid, &b));
  } else {
    throw CliError("field 'base': unknown base system '" + o.base + "'");
  }
  const std::string warning = cl_base_warning(b);
  if (!warning.empty()) std::cerr << "warning: " << warning << "\n";
  return b;
}

cl_cocycle* make_cocycle(const Options& o, const cl_base* b) {
  cl_cocycle* co = nullptr;
  if (o.family == "schrodinger") {
    check(cl_cocycle_schrodinger(b, o.energy, o.lambda, &co));
  } else if (o.family == "rotation") {
    check(cl_cocycle_rotation(b, o.phase, o.frequency, &co));
  } else if (o.family == "constant") {
    if (o.matrix.size() != 4) throw CliError("field 'matrix': expected 4 entries");
    check(cl_cocycle_constant(b, o.matrix[0], o.matrix[1], o.matrix[2], o.matrix[3], &co));
  } else if (o.family == "hopf") {
    check(cl_cocycle_hopf(b, o.hopf_alpha, &co));
  } else if (o.family == "table") {
    if (o.table.empty()) throw CliError("field 'table': a table file is required for family table");
    const std::vector<double> entries = read_table(o.table);
    check(cl_cocycle_table(b, entries.data(), entries.size() / 4, &co));
  } else {
    throw CliError("field 'family': unknown generator family '" + o.family + "'");
  }
  return co;
}

void write_artifacts(const cl_run* r, const fs::path& dir) {
  fs::create_directories(dir);
  for (std::size_t i = 0; i < cl_run_artifact_count(r); ++i) {
    std::size_t size = 0;
    const char* data = cl_run_artifact_data(r, i, &size);
    std::ofstream f(dir / cl_run_artifact_name(r, i), std::ios::binary);
    f.write(data, static_cast<std::streamsize>(size));
    if (!f) throw CliError("cannot write " + (dir / cl_run_artifact_name(r, i)).string());
  }
}

int execute(const std::string& cmd, const Options& o) {
  Handles h;
  auto need_cocycle = [&] {
    h.base = make_base(o);
    h.co = make_cocycle(o, h.base);
    std::cerr << "cocycle: " << cl_cocycle_describe(h.co) << "\n";
  };
  if (cmd == "exponent") {
    need_cocycle();
    check(cl_run_exponent(h.co, o.horizon > 0 ? o.horizon : 100000, o.threads, &h.run));
  } else if (cmd == "growth-test") {
    need_cocycle();
    check(cl_run_growth_test(h.co, o.eps, o.horizon > 0 ? o.horizon : 10000, o.threads, &h.run));
  } else if (cmd == "uh-check") {
    need_cocycle();
    check(cl_run_uh_check(h.co, o.threads, &h.run));
  } else if (cmd == "steer") {
    need_cocycle();
    check(cl_run_steer(h.co, o.x, o.from, o.to, o.eps, o.m_max, &h.run));
  } else if (cmd == "plan-segment") {
    need_cocycle();
    check(cl_run_plan_segment(h.co, o.eps, o.x, o.anchors, o.seed, o.threads, &h.run));
  } else if (cmd == "castle") {
    h.base = make_base(o);
    check(cl_run_castle(h.base, o.n, o.threads, &h.run));
  } else if (cmd == "freq-bound") {
    h.base = make_base(o);
    check(cl_run_freq_bound(h.base, o.points.data(), o.points.size(), o.eps, o.threads, &h.run));
  } else if (cmd == "surgery") {
    need_cocycle();
    check(cl_run_surgery(h.co, o.eps, o.horizon, o.threads, &h.run));
  } else if (cmd == "demo-hopf") {
    check(cl_run_demo_hopf(o.hopf_alpha, o.grid, o.threads, &h.run));
  } else if (cmd == "selftest") {
    check(cl_run_selftest(o.threads, &h.run));
  }
  write_artifacts(h.run, o.out);
  std::cout << cl_run_summary(h.run) << "\n";
  return cl_run_passed(h.run) ? kExitPass : kExitFail;
}

}  // namespace

int main(int argc, char** argv) {
  Options o;
  if (const char* env = std::getenv("COCYCLAB_OUT_DIR")) o.out = env;
  if (o.out.empty()) o.out = "out";

  CLI::App app{"Experiments with SL(2, R) cocycles over minimal base systems"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);
  app.add_option("--config", o.config, "JSON file whose keys are option names");
  app.add_option("--threads", o.threads, "worker threads for grid sweeps")->check(CLI::Range(1u, 1024u));
  app.add_option("--out", o.out, "artifact directory (default: $COCYCLAB_OUT_DIR or out)");
  app.add_option("--base", o.base, "golden, silver, circle, torus or sturmian");
  app.add_option("--alpha", o.alpha, "rotation number of the circle base");
  app.add_option("--slope", o.slope, "slope of the sturmian base");
  app.add_option("--depth", o.depth, "coding depth of the sturmian base")->check(CLI::Range(1, 62));
  app.add_option("--grid", o.grid, "grid resolution G")->check(CLI::Range(2, 1 << 24));
  app.add_option("--translation", o.translation, "torus translation vector")->delimiter(',');
  app.add_option("--family", o.family, "schrodinger, rotation, constant, hopf or table");
  app.add_option("--energy", o.energy, "Schrodinger energy E");
  app.add_option("--lambda", o.lambda, "Schrodinger coupling");
  app.add_option("--phase", o.phase, "phase of the rotation-valued family");
  app.add_option("--frequency", o.frequency, "winding of the rotation-valued family");
  app.add_option("--matrix", o.matrix, "constant matrix a,b,c,d")->delimiter(',');
  app.add_option("--table", o.table, "JSON file of [a, b, c, d] generator values on the grid");
  app.add_option("--eps", o.eps, "perturbation size or growth rate")->check(CLI::PositiveNumber);
  app.add_option("--n", o.n, "castle height N")->check(CLI::Range(std::int64_t{1}, std::int64_t{1} << 20));
  app.add_option("--horizon", o.horizon, "iteration horizon (0 selects a default)")
      ->check(CLI::Range(std::int64_t{0}, std::int64_t{1} << 40));
  app.add_option("--x", o.x, "base point in [0, 1)");
  app.add_option("--anchors", o.anchors, "number of random anchors (0 uses x)")->check(CLI::Range(0, 1 << 24));
  app.add_option("--seed", o.seed, "seed of the anchor sampler");
  app.add_option("--from", o.from, "initial direction angle");
  app.add_option("--to", o.to, "target direction angle");
  app.add_option("--m-max", o.m_max, "longest steering block")->check(CLI::Range(1, 1 << 20));
  app.add_option("--points", o.points, "base points of L in [0, 1)")->delimiter(',');
  app.add_option("--hopf-alpha", o.hopf_alpha, "rotation angle of the Hopf scenario");

  const std::vector<std::pair<std::string, std::string>> commands{
      {"exponent", "finite-n exponent over the grid"},
      {"growth-test", "uniform subexponential growth test"},
      {"uh-check", "cone field certification of uniform hyperbolicity"},
      {"steer", "steering block between two directions"},
      {"plan-segment", "segment perturbation plans"},
      {"castle", "Kakutani-Rokhlin castle with heights N and N + 1"},
      {"freq-bound", "visit frequency bound for a neighbourhood of points"},
      {"surgery", "perturbation to subexponential growth"},
      {"demo-hopf", "restricted uniform hyperbolicity of the Hopf scenario"},
      {"selftest", "property suite"}};
  for (const auto& [name, help] : commands) app.add_subcommand(name, help)->fallthrough();

  std::vector<std::string> args;
  try {
    const std::string path = find_config(argc, argv);
    if (!path.empty()) args = config_arguments(path);
  } catch (const CliError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }

  try {
    return execute(app.get_subcommands().front()->get_name(), o);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
}
