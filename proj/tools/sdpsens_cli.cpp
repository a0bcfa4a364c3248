// sdpsens: solve, reduce, classify, sweep, verify.
//
// Exit codes: 0 success, 1 domain failure (not optimal, infeasible, unknown,
// failed check), 2 usage or input error.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "json.hpp"
#include "sdpsens/error.hpp"
#include "sdpsens/facial/facial.hpp"
#include "sdpsens/hinf/hinf.hpp"
#include "sdpsens/ipm/solver.hpp"
#include "sdpsens/mpla/linalg.hpp"
#include "sdpsens/sdp/sdpa_io.hpp"
#include "sdpsens/sensitivity/sensitivity.hpp"

namespace {

using namespace sdpsens;
using nlohmann::json;

struct Common {
  std::string param_file;
  std::string epsilon;
  int precision = 0;
  bool json = false;
  std::string out;
  unsigned seed = 0;
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

ipm::SolverConfig solver_config(const Common& c) {
  ipm::SolverConfig cfg = c.param_file.empty() ? ipm::SolverConfig{} : ipm::read_param_file(c.param_file);
  if (c.precision) cfg.precision = c.precision;
  mpla::set_default_precision(cfg.precision);
  if (!c.epsilon.empty()) cfg.set_tolerance(mpla::MpScalar::parse(c.epsilon, cfg.precision));
  cfg.validate();
  return cfg;
}

// Text goes to stdout; with --json the JSON goes to --out or stdout.
void emit(const Common& c, const json& j, const std::string& text) {
  if (!c.json) {
    std::cout << text;
    return;
  }
  if (c.out.empty()) {
    std::cout << j.dump(2) << '\n';
    return;
  }
  std::ofstream f(c.out);
  if (!f) throw UsageError("cannot write " + c.out);
  f << j.dump(2) << '\n';
  std::cout << text;
}

sdp::SdpProblem load_problem(const std::string& path) {
  auto r = sdp::read_sdpa_file(path);
  for (const auto& w : r.warnings) std::cerr << "warning: " << w << '\n';
  return std::move(r.problem);
}

std::string dims_text(const std::vector<std::size_t>& r) {
  std::string s = "(";
  for (std::size_t i = 0; i < r.size(); ++i) s += (i ? "," : "") + std::to_string(r[i]);
  return s + ")";
}

int cmd_solve(const Common& c, const std::string& path) {
  const auto cfg = solver_config(c);
  const auto prob = load_problem(path);
  const auto rep = ipm::solve(prob, cfg);
  const int digits = 40;
  std::ostringstream text;
  text << "status      " << ipm::to_string(rep.status) << '\n'
       << "iterations  " << rep.iterations << '\n'
       << "sup (P)     " << rep.solution.primal_obj.to_string(digits) << '\n'
       << "inf (D)     " << rep.solution.dual_obj.to_string(digits) << '\n'
       << "gap         " << rep.solution.duality_gap.to_string(6) << '\n';
  json y = json::array();
  for (const auto& v : rep.solution.y) y.push_back(v.to_string());
  const json j{{"status", ipm::to_string(rep.status)},
               {"iterations", rep.iterations},
               {"primal", rep.solution.primal_obj.to_string()},
               {"dual", rep.solution.dual_obj.to_string()},
               {"gap", rep.solution.duality_gap.to_string()},
               {"y", y},
               {"message", rep.message}};
  emit(c, j, text.str());
  return rep.status == ipm::Status::Optimal ? 0 : 1;
}

facial::DiscriminantOptions facial_options(const Common& c) {
  const int bits = c.precision ? c.precision : 1024;
  mpla::set_default_precision(bits);
  auto opt = facial::DiscriminantOptions::defaults(bits);
  opt.seed = c.seed;
  return opt;
}

int cmd_reduce(const Common& c, const std::string& path) {
  const auto opt = facial_options(c);
  const auto prob = load_problem(path);
  const auto r = facial::facial_reduction(prob, opt);
  std::ostringstream text;
  text << "status      " << facial::to_string(r.status) << '\n'
       << "degree      " << r.degree << '\n'
       << "face r      " << dims_text(r.minimal_face().r) << '\n';
  for (std::size_t i = 0; i < r.certificates.size(); ++i) {
    text << "y^" << i + 1 << "        ";
    for (const auto& v : r.certificates[i].y) text << ' ' << v.to_string(6);
    text << "   -> r = " << dims_text(r.faces[i + 1].r) << '\n';
  }
  emit(c, facial::to_json(r), text.str());
  return r.status == facial::ReductionStatus::MinimalFaceFound ? 0 : 1;
}

int cmd_classify(const Common& c, const std::string& path, const std::vector<std::string>& only,
                 unsigned workers) {
  const int bits = c.precision ? c.precision : 1024;
  mpla::set_default_precision(bits);
  const auto sys = hinf::read_system_file(path);
  auto opt = hinf::ClassifyOptions::defaults(bits);
  opt.facial.seed = c.seed;
  opt.workers = workers;
  if (!c.epsilon.empty()) {
    const auto e = mpla::MpScalar::parse(c.epsilon);
    opt.probes = {e, -e};
  }
  const auto& names = only.empty() ? hinf::parameter_names() : only;
  const auto res = hinf::classify_all(sys, names, opt);

  // Two columns.
  std::ostringstream text;
  const std::size_t half = (res.size() + 1) / 2;
  text << "Perturbation  Face                Perturbation  Face\n";
  for (std::size_t i = 0; i < half; ++i) {
    char line[128];
    const auto& l = res[i];
    std::snprintf(line, sizeof line, "%-13s %-19s", l.param.c_str(), hinf::to_string(l.behavior).c_str());
    text << line;
    if (i + half < res.size()) {
      const auto& r = res[i + half];
      std::snprintf(line, sizeof line, " %-13s %s", r.param.c_str(), hinf::to_string(r.behavior).c_str());
      text << line;
    }
    text << '\n';
  }
  bool unknown = false;
  json arr = json::array();
  for (const auto& r : res) {
    unknown = unknown || r.behavior == hinf::FaceBehavior::Unknown;
    json probes = json::array();
    for (const auto& p : r.probes) {
      probes.push_back({{"t", p.t.to_string(6)}, {"degree", p.degree}, {"residual_dims", p.residual_dims},
                        {"behavior", hinf::to_string(p.behavior)}});
    }
    json item{{"param", r.param}, {"behavior", hinf::to_string(r.behavior)}, {"probes", probes}, {"log", r.log}};
    if (r.cross_check) item["eigenspan"] = facial::to_string(r.cross_check->verdict);
    arr.push_back(item);
    if (!r.log.empty()) std::cerr << r.param << ": " << r.log;
  }
  emit(c, json{{"classification", arr}}, text.str());
  return unknown ? 1 : 0;
}

int cmd_sweep(const Common& c, const std::string& path, const std::string& entry,
              const std::string& grid, const std::string& plot, unsigned workers, bool no_facial) {
  const auto cfg = solver_config(c);
  const auto sys = hinf::read_system_file(path);
  sensitivity::SweepSpec spec;
  spec.family = hinf::matrixwise_family(sys, entry);
  spec.t_grid = sensitivity::parse_grid(grid);
  spec.solver = cfg;
  spec.facial = facial::DiscriminantOptions::defaults(cfg.precision);
  spec.run_facial = !no_facial;
  spec.seed = c.seed;
  spec.workers = workers;
  const auto rows = sensitivity::run_sweep(spec);

  if (c.out.empty() || c.json) {
    if (!c.json) sensitivity::write_csv(std::cout, rows);
  } else {
    std::ofstream f(c.out);
    if (!f) throw UsageError("cannot write " + c.out);
    sensitivity::write_csv(f, rows);
  }
  if (!plot.empty()) {
    std::ofstream f(plot);
    if (!f) throw UsageError("cannot write " + plot);
    sensitivity::write_plot_data(f, rows);
  }
  const auto d = sensitivity::continuity_diagnostic(rows);
  std::ostringstream text;
  text << "continuity  " << sensitivity::to_string(d.verdict) << " (jump estimate "
       << d.max_jump.to_string(6) << ", modulus " << d.modulus_estimate.to_string(6) << ")\n";
  std::size_t failed = 0;
  for (const auto& r : rows) failed += !r.error.empty();
  if (failed) text << "failed rows " << failed << '\n';
  if (c.json) {
    json arr = json::array();
    for (const auto& r : rows) {
      arr.push_back({{"t", r.t.to_string(17)}, {"primal", r.primal.to_string()}, {"dual", r.dual.to_string()},
                     {"degree", r.degree}, {"r_blocks", r.r_blocks}, {"rank_ok", r.rank_ok},
                     {"status", r.status}, {"error", r.error}});
    }
    std::cout << json{{"rows", arr},
                      {"continuity", sensitivity::to_string(d.verdict)},
                      {"max_jump", d.max_jump.to_string(17)}}
                     .dump(2)
              << '\n';
  } else {
    std::cerr << text.str();
  }
  return failed ? 1 : 0;
}

int cmd_verify(const Common& c, const std::string& problem, const std::string& manifest,
               const std::string& tol_text) {
  const int bits = c.precision ? c.precision : 1024;
  mpla::set_default_precision(bits);
  std::ostringstream text;
  json checks = json::array();
  bool ok = true;
  if (problem.empty()) {
    const auto rep = sensitivity::verify_value_certificates();
    for (const auto& ch : rep.checks) {
      text << (ch.ok ? "ok    " : "FAIL  ") << ch.name << "  " << ch.detail << '\n';
      checks.push_back({{"name", ch.name}, {"ok", ch.ok}, {"detail", ch.detail}});
    }
    ok = rep.all_ok();
  } else {
    if (manifest.empty()) throw UsageError("verify: a reduction manifest is needed with a problem file");
    const auto prob = load_problem(problem);
    std::ifstream in(manifest);
    if (!in) throw UsageError("cannot open " + manifest);
    const auto r = facial::reduction_from_json(json::parse(in));
    const auto tol = tol_text.empty() ? facial::DiscriminantOptions::defaults(bits).tol_cert
                                      : mpla::MpScalar::parse(tol_text);
    for (std::size_t i = 0; i < r.certificates.size(); ++i) {
      std::string why;
      const bool good = facial::verify_certificate(prob, r.faces[i], r.certificates[i], tol, &why);
      ok = ok && good;
      const std::string name = "certificate " + std::to_string(i + 1);
      text << (good ? "ok    " : "FAIL  ") << name << (good ? "" : "  " + why) << '\n';
      checks.push_back({{"name", name}, {"ok", good}, {"detail", why}});
    }
  }
  emit(c, json{{"checks", checks}, {"ok", ok}}, text.str());
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sensitivity analysis for singular SDPs"};
  app.require_subcommand(1);
  Common c;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--param", c.param_file, "solver parameter file (key = value)");
    sub->add_option("--epsilon", c.epsilon, "stopping tolerance (epsilonStar and epsilonDash)");
    sub->add_option("--precision", c.precision, "mantissa bits")->check(CLI::Range(53, 1 << 16));
    sub->add_flag("--json", c.json, "write the report as JSON");
    sub->add_option("--out", c.out, "output path");
    sub->add_option("--seed", c.seed, "seed for the auxiliary SDP variable rotation");
  };

  std::string input, manifest, entry = "a11", grid = "+-k*1e-5:1..100", plot, tol;
  std::vector<std::string> only;
  unsigned workers = 0;
  bool no_facial = false;

  auto* solve = app.add_subcommand("solve", "solve an SDPA sparse problem");
  solve->add_option("problem", input, "problem file (.dat-s)")->required()->check(CLI::ExistingFile);
  add_common(solve);

  auto* reduce = app.add_subcommand("reduce", "facial reduction of the (D) side");
  reduce->add_option("problem", input, "problem file (.dat-s)")->required()->check(CLI::ExistingFile);
  add_common(reduce);

  auto* classify = app.add_subcommand("classify", "minimal face behavior per plant entry");
  classify->add_option("plant", input, "plant JSON")->required()->check(CLI::ExistingFile);
  classify->add_option("--only", only, "restrict to these entries");
  classify->add_option("--workers", workers, "worker threads (0: all cores)");
  add_common(classify);

  auto* sweep = app.add_subcommand("sweep", "optimal value along a plant-entry perturbation");
  sweep->add_option("plant", input, "plant JSON")->required()->check(CLI::ExistingFile);
  sweep->add_option("--entry", entry, "plant entry to perturb (a11 ... d2)");
  sweep->add_option("--grid", grid, "t grid, e.g. \"+-k*1e-5:1..100\" or \"0,1e-3\"");
  sweep->add_option("--plot", plot, "write t and value(t) - value(0) here");
  sweep->add_option("--workers", workers, "worker threads (0: all cores)");
  sweep->add_flag("--no-facial", no_facial, "skip facial reduction per point");
  add_common(sweep);

  auto* verify = app.add_subcommand("verify", "audit certificates");
  verify->add_option("problem", input, "problem file; omit to check the built-in value certificates")
      ->check(CLI::ExistingFile);
  verify->add_option("manifest", manifest, "reduction manifest written by reduce --json")
      ->check(CLI::ExistingFile);
  verify->add_option("--tol", tol, "certificate tolerance");
  add_common(verify);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*solve) return cmd_solve(c, input);
    if (*reduce) return cmd_reduce(c, input);
    if (*classify) return cmd_classify(c, input, only, workers);
    if (*sweep) return cmd_sweep(c, input, entry, grid, plot, workers, no_facial);
    if (*verify) return cmd_verify(c, input, manifest, tol);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const UnknownParam& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const DimensionMismatch& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "failed: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
