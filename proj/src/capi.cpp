#include "cocyclab/cocyclab.h"

#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "cocyclab/cocycle.hpp"
#include "cocyclab/error.hpp"
#include "cocyclab/parallel.hpp"
#include "cocyclab/perturb.hpp"
#include "cocyclab/scenarios.hpp"
#include "cocyclab/selftest.hpp"
#include "cocyclab/surgery.hpp"
#include "cocyclab/towers.hpp"
#include "json.hpp"

using namespace cocyclab;
using nlohmann::json;

struct cl_base {
  BaseSystem sys;
  std::string warning;
};

struct cl_cocycle {
  Cocycle co;
  std::string text;
};

struct cl_run {
  bool passed = true;
  std::string summary;
  std::vector<std::pair<std::string, std::string>> artifacts;

  void add(std::string name, std::string data) { artifacts.emplace_back(std::move(name), std::move(data)); }
};

namespace {

thread_local std::string last_error;

cl_status status_of(ErrorCode c) { return static_cast<cl_status>(static_cast<int>(c) + 1); }

template <class Fn>
cl_status guarded(Fn&& fn) {
  try {
    fn();
    last_error.clear();
    return CL_OK;
  } catch (const Error& e) {
    last_error = e.what();
    return status_of(e.code());
  } catch (const std::exception& e) {
    last_error = e.what();
    return CL_INTERNAL;
  }
}

template <class T>
void require_out(T** out) {
  if (out == nullptr) throw Error(ErrorCode::InvalidArgument, "null output pointer");
  *out = nullptr;
}

void require(const void* p) {
  if (p == nullptr) throw Error(ErrorCode::InvalidArgument, "null handle");
}

std::string full(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

cl_status make_base(BaseSystem sys, cl_base** out) {
  auto* b = new cl_base{std::move(sys), {}};
  if (auto w = b->sys.near_rational_warning()) b->warning = *w;
  *out = b;
  return CL_OK;
}

cl_status make_cocycle(const cl_base* b, GeneratorPtr g, cl_cocycle** out) {
  return guarded([&] {
    require_out(out);
    require(b);
    Cocycle co(b->sys, std::move(g));
    const std::string text = co.generator().describe();
    *out = new cl_cocycle{std::move(co), text};
  });
}

std::string growth_csv(const BaseSystem& sys, const std::vector<double>& values) {
  std::ostringstream os;
  os << "x,value\n";
  for (std::size_t k = 0; k < values.size(); ++k) os << full(sys.grid_point(k).coord()) << ',' << full(values[k]) << '\n';
  return os.str();
}

json report_json(const GrowthReport& r) {
  return {{"horizon", r.n}, {"grid", r.grid_size}, {"min", r.min}, {"max", r.max}, {"mean", r.mean},
          {"argmax", r.argmax.coord()}};
}

json window_json(const SteeringWindow& w, std::int64_t m1, int n) {
  return {{"m", w.m}, {"center", w.center}, {"width", w.width}, {"grid_points", w.grid_points}, {"m1", m1}, {"N", n}};
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

}  // namespace

extern "C" {

const char* cl_status_name(cl_status s) {
  if (s == CL_OK) return "Ok";
  if (s == CL_INTERNAL) return "Internal";
  if (s > CL_OK && s < CL_INTERNAL) return to_string(static_cast<ErrorCode>(static_cast<int>(s) - 1));
  return "Unknown";
}

const char* cl_last_error(void) { return last_error.c_str(); }

cl_status cl_base_circle(double alpha, int grid, cl_base** out) {
  return guarded([&] {
    require_out(out);
    make_base(BaseSystem::circle(alpha, grid), out);
  });
}

cl_status cl_base_golden(int grid, cl_base** out) {
  return guarded([&] {
    require_out(out);
    make_base(BaseSystem::golden(grid), out);
  });
}

cl_status cl_base_silver(int grid, cl_base** out) {
  return guarded([&] {
    require_out(out);
    make_base(BaseSystem::silver(grid), out);
  });
}

cl_status cl_base_torus(const double* translation, int dim, int grid, cl_base** out) {
  return guarded([&] {
    require_out(out);
    require(translation);
    if (dim < 1) throw Error(ErrorCode::InvalidArgument, "torus dimension must be positive");
    make_base(BaseSystem::torus(std::vector<double>(translation, translation + dim), grid), out);
  });
}

cl_status cl_base_sturmian(double slope, int depth, int grid, cl_base** out) {
  return guarded([&] {
    require_out(out);
    make_base(BaseSystem::sturmian(slope, depth, grid), out);
  });
}

const char* cl_base_warning(const cl_base* b) { return b ? b->warning.c_str() : ""; }

void cl_base_free(cl_base* b) { delete b; }

cl_status cl_cocycle_schrodinger(const cl_base* b, double energy, double coupling, cl_cocycle** out) {
  return make_cocycle(b, schrodinger(energy, coupling), out);
}

cl_status cl_cocycle_rotation(const cl_base* b, double phase, int frequency, cl_cocycle** out) {
  return make_cocycle(b, rotation_valued(phase, frequency), out);
}

cl_status cl_cocycle_constant(const cl_base* b, double a, double bb, double c, double d, cl_cocycle** out) {
  return make_cocycle(b, constant(Mat2{a, bb, c, d}), out);
}

cl_status cl_cocycle_hopf(const cl_base* b, double alpha, cl_cocycle** out) {
  return make_cocycle(b, hopf(alpha), out);
}

cl_status cl_cocycle_table(const cl_base* b, const double* entries, size_t count, cl_cocycle** out) {
  std::vector<Mat2> values;
  const cl_status s = guarded([&] {
    require(entries);
    for (size_t k = 0; k < count; ++k) {
      values.push_back({entries[4 * k], entries[4 * k + 1], entries[4 * k + 2], entries[4 * k + 3]});
    }
  });
  if (s != CL_OK) return s;
  GeneratorPtr g;
  const cl_status t = guarded([&] { g = table(std::move(values)); });
  return t != CL_OK ? t : make_cocycle(b, std::move(g), out);
}

const char* cl_cocycle_describe(const cl_cocycle* co) { return co ? co->text.c_str() : ""; }

void cl_cocycle_free(cl_cocycle* co) { delete co; }

cl_status cl_lyapunov(const cl_cocycle* co, double x, int64_t n, double* out) {
  return guarded([&] {
    require(co);
    require(out);
    *out = lyapunov_estimate(co->co, co->co.base().point(x), n);
  });
}

cl_status cl_run_exponent(const cl_cocycle* co, int64_t horizon, unsigned threads, cl_run** out) {
  return guarded([&] {
    require_out(out);
    require(co);
    const GrowthReport r = growth_report(co->co, horizon, threads);
    auto* run = new cl_run;
    run->add("exponent.csv", growth_csv(co->co.base(), r.values));
    run->add("exponent.json", dump(report_json(r)));
    run->summary = "max (1/n) log|A_n| = " + full(r.max) + ", mean " + full(r.mean);
    *out = run;
  });
}

cl_status cl_run_growth_test(const cl_cocycle* co, double eps, int64_t horizon, unsigned threads, cl_run** out) {
  return guarded([&] {
    require_out(out);
    require(co);
    const GrowthTest t = uniform_growth_test(co->co, eps, horizon, threads);
    auto* run = new cl_run;
    run->passed = t.pass;
    json j = report_json(t.report);
    j["eps"] = eps;
    j["margin"] = t.margin;
    j["pass"] = t.pass;
    run->add("growth_test.csv", growth_csv(co->co.base(), t.report.values));
    run->add("growth_test.json", dump(j));
    run->summary = std::string("growth test ") + (t.pass ? "passed" : "failed") + ": max " + full(t.report.max) +
                   " + margin " + full(t.margin) + " vs eps " + full(eps);
    *out = run;
  });
}

cl_status cl_run_uh_check(const cl_cocycle* co, unsigned threads, cl_run** out) {
  return guarded([&] {
    require_out(out);
    require(co);
    UhOptions opt;
    opt.threads = threads;
    const UhResult r = uh_certify(co->co, opt);
    auto* run = new cl_run;
    run->passed = r.verdict == UhVerdict::Certificate;
    json j = {{"verdict", to_string(r.verdict)}, {"horizon", r.n}};
    if (r.verdict == UhVerdict::Certificate) {
      j["half_width"] = r.half_width;
      j["expansion"] = r.expansion;
      j["rate"] = r.rate;
      j["slack"] = r.slack;
      j["margin"] = r.margin;
    } else if (r.verdict == UhVerdict::Witness) {
      j["witness"] = r.witness.coord();
      j["witness_value"] = r.witness_value;
    }
    run->add("uh.json", dump(j));
    run->summary = std::string("uniform hyperbolicity: ") + to_string(r.verdict);
    *out = run;
  });
}

cl_status cl_run_steer(const cl_cocycle* co, double x, double from_angle, double to_angle, double eps, int m_max,
                       cl_run** out) {
  return guarded([&] {
    require_out(out);
    require(co);
    const SteeringBlock b = steer_direction(co->co, co->co.base().point(x), unit(from_angle), unit(to_angle), eps, m_max);
    std::ostringstream os;
    os << "j,angle,a,b,c,d\n";
    for (int j = 0; j < b.m; ++j) {
      const Mat2& m = b.matrices[static_cast<std::size_t>(j)];
      os << j << ',' << full(b.angles[static_cast<std::size_t>(j)]) << ',' << full(m.a) << ',' << full(m.b) << ','
         << full(m.c) << ',' << full(m.d) << '\n';
    }
    auto* run = new cl_run;
    run->add("steer.csv", os.str());
    run->add("steer.json", dump({{"m", b.m}, {"eps", eps}, {"error", b.error}}));
    run->summary = "steering block of length " + std::to_string(b.m) + ", error " + full(b.error);
    *out = run;
  });
}

cl_status cl_run_plan_segment(const cl_cocycle* co, double eps, double x, int anchors, uint64_t seed,
                              unsigned threads, cl_run** out) {
  return guarded([&] {
    require_out(out);
    require(co);
    if (anchors < 0) throw Error(ErrorCode::InvalidArgument, "anchors must be nonnegative");
    const Cocycle& c = co->co;
    const SteeringWindow win = choose_steering_window(c, eps, threads);
    const std::int64_t m1 = covering_time(c.base(), win.w);
    const double bal = eps + c.sup_norm() + 1e-9;
    const int n = choose_n(c, eps, bal, static_cast<int>(m1));
    std::vector<BasePoint> xs;
    if (anchors == 0) {
      xs.push_back(c.base().point(x));
    } else {
      std::mt19937_64 rng(seed);
      for (int i = 0; i < anchors; ++i) {
        BasePoint p;
        p.u[0] = rng();
        xs.push_back(p);
      }
    }
    std::vector<SegmentPlan> plans(xs.size());
    std::vector<SegmentReport> reports(xs.size());
    SegmentOptions so;
    so.c = bal;
    parallel_for(xs.size(), threads, [&](std::size_t i) {
      plans[i] = plan_segment(c, xs[i], eps, n, win.w, static_cast<int>(m1), win.m, so);
      reports[i] = verify_segment(c, plans[i]);
    });
    auto* run = new cl_run;
    std::ostringstream csv;
    csv << "x,branch,j0,j1,max_distance,log_norm_over_n,pass\n";
    int passed = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const SegmentReport& r = reports[i];
      passed += r.pass ? 1 : 0;
      csv << full(xs[i].coord()) << ',' << to_string(plans[i].branch) << ',' << plans[i].j0 << ',' << plans[i].j1
          << ',' << full(r.max_distance) << ',' << full(r.log_norm / n) << ',' << (r.pass ? 1 : 0) << '\n';
    }
    run->passed = passed == static_cast<int>(xs.size());
    json j = window_json(win, m1, n);
    j["eps"] = eps;
    j["anchors"] = xs.size();
    j["passed"] = passed;
    run->add("plans.csv", csv.str());
    run->add("plan.json", dump(j));
    run->add("plan.txt", plan_to_text(plans.front()));
    run->summary = std::to_string(passed) + "/" + std::to_string(xs.size()) + " segment plans verified at N = " +
                   std::to_string(n);
    *out = run;
  });
}

cl_status cl_run_castle(const cl_base* b, int64_t n, unsigned threads, cl_run** out) {
  return guarded([&] {
    require_out(out);
    require(b);
    const Castle c = build_castle(b->sys, n, threads);
    const CastleCheck chk = check_castle(b->sys, c, threads);
    std::int64_t tall = 0;
    for (const Tower& t : c.towers) tall += t.height == n + 1 ? 1 : 0;
    auto* run = new cl_run;
    run->passed = chk.ok();
    run->add("castle.csv", castle_to_csv(c));
    run->add("castle.json", dump({{"N", c.n},
                                  {"n1", c.n1},
                                  {"towers", c.towers.size()},
                                  {"towers_N_plus_1", tall},
                                  {"max_return", c.max_return},
                                  {"u_length", c.u.measure()},
                                  {"b_measure", c.b.measure()},
                                  {"heights", chk.heights},
                                  {"disjoint", chk.disjoint},
                                  {"covers", chk.covers},
                                  {"returns", chk.returns},
                                  {"boundary", chk.boundary}}));
    run->summary = "castle with " + std::to_string(c.towers.size()) + " towers, invariants " +
                   (chk.ok() ? "hold" : "fail");
    *out = run;
  });
}

cl_status cl_run_freq_bound(const cl_base* b, const double* points, size_t count, double eps, unsigned threads,
                            cl_run** out) {
  return guarded([&] {
    require_out(out);
    require(b);
    if (count > 0) require(points);
    std::vector<Fixed> pts;
    for (size_t k = 0; k < count; ++k) pts.push_back(to_fixed(points[k]));
    FreqOptions opt;
    opt.threads = threads;
    const FreqBound f = visit_freq_bound(b->sys, pts, eps, opt);
    auto* run = new cl_run;
    run->add("freq.json", freq_to_json(f));
    run->summary = "visit frequency " + full(f.sup_frequency) + " < " + full(eps) + " from n0 = " + std::to_string(f.n0);
    *out = run;
  });
}

cl_status cl_run_surgery(const cl_cocycle* co, double eps, int64_t horizon, unsigned threads, cl_run** out) {
  return guarded([&] {
    require_out(out);
    require(co);
    const Cocycle& c = co->co;
    SurgeryOptions opt;
    opt.threads = threads;
    const SurgeryConfig cfg = build_config(c, eps, opt);
    const std::vector<std::string> bad = check_config(c, cfg, threads);
    if (!bad.empty()) throw Error(ErrorCode::CertificationFailed, "config invariant failed: " + bad.front());
    const PerturbedCocycle pc = assemble_perturbation(c, cfg, threads);
    std::int64_t n = horizon;
    if (n == 0) {
      n = static_cast<std::int64_t>(std::ceil(10.0 * static_cast<double>(cfg.n + 1) / eps));
      n = std::max(n, cfg.freq.n0 + 1);
    }
    const GrowthCertificate g = verify_growth(pc, n, threads);
    const GrowthReport before = growth_report(c, n, threads);
    auto* run = new cl_run;
    run->passed = g.pass && pc.sup_distance < pc.distance_bound;
    json j = {{"eps", cfg.eps},
              {"c", cfg.c},
              {"N", cfg.n},
              {"m", cfg.window.m},
              {"m1", cfg.m1},
              {"delta", cfg.delta},
              {"towers", cfg.castle.towers.size()},
              {"cells", cfg.cuts.size()},
              {"representatives", cfg.reps.size()},
              {"boundary_points", cfg.l_points.size()},
              {"rho", cfg.freq.rho},
              {"n0", cfg.freq.n0},
              {"sup_frequency", cfg.freq.sup_frequency},
              {"exponent_before", cfg.exponent},
              {"sup_distance", pc.sup_distance},
              {"distance_bound", pc.distance_bound},
              {"interior_exact", pc.interior_exact},
              {"lipschitz", pc.lipschitz},
              {"lipschitz_bound", pc.lipschitz_bound}};
    run->add("surgery_config.json", dump(j));
    run->add("perturbation.csv", perturbation_to_csv(pc));
    run->add("growth_before.csv", growth_csv(c.base(), before.values));
    run->add("growth_after.csv", growth_csv(c.base(), g.direct));
    run->add("certificate.json", certificate_to_json(g));
    run->summary = std::string("surgery certificate ") + (g.pass ? "passed" : "failed") + ": max " +
                   full(g.max_direct) + " vs bound " + full(g.bound) + ", sup distance " + full(pc.sup_distance);
    *out = run;
  });
}

cl_status cl_run_demo_hopf(double alpha, int grid, unsigned threads, cl_run** out) {
  return guarded([&] {
    require_out(out);
    const HopfCertificate h = certify_restricted_uh(alpha, grid, threads);
    auto* run = new cl_run;
    run->passed = h.winding != 0;
    run->add("eu_field.csv", field_to_csv(h.eu));
    run->add("hopf.json", hopf_to_json(h));
    run->summary = "restricted cocycle certified hyperbolic, E^u winding " + std::to_string(h.winding);
    *out = run;
  });
}

}  // extern "C"

extern "C" {

cl_status cl_run_selftest(unsigned threads, cl_run** out) {
  return guarded([&] {
    require_out(out);
    const std::vector<SelfCheck> checks = run_selftest(threads);
    auto* run = new cl_run;
    json rows = json::array();
    int failed = 0;
    for (const SelfCheck& c : checks) {
      rows.push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
      failed += c.pass ? 0 : 1;
    }
    run->passed = failed == 0;
    run->add("selftest.json", dump({{"checks", rows}, {"failed", failed}}));
    run->summary = std::to_string(checks.size() - static_cast<std::size_t>(failed)) + "/" +
                   std::to_string(checks.size()) + " self checks passed";
    *out = run;
  });
}

int cl_run_passed(const cl_run* r) { return r && r->passed ? 1 : 0; }

const char* cl_run_summary(const cl_run* r) { return r ? r->summary.c_str() : ""; }

size_t cl_run_artifact_count(const cl_run* r) { return r ? r->artifacts.size() : 0; }

const char* cl_run_artifact_name(const cl_run* r, size_t i) {
  return r && i < r->artifacts.size() ? r->artifacts[i].first.c_str() : nullptr;
}

const char* cl_run_artifact_data(const cl_run* r, size_t i, size_t* size) {
  if (!r || i >= r->artifacts.size()) return nullptr;
  if (size) *size = r->artifacts[i].second.size();
  return r->artifacts[i].second.data();
}

void cl_run_free(cl_run* r) { delete r; }

}  // extern "C"
