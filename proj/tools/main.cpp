// Command-line front end: scenario runs, the necessity counterexample,
// NSCTP probes, reachable-set exports, and minimum-jerk planning.
//
// Exit codes: 0 success, 2 validation/usage error, 3 integration
// divergence, 4 target unreachable within the horizon.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "delaylab/errors.hpp"
#include "delaylab/harness.hpp"
#include "delaylab/linopt.hpp"
#include "delaylab/minjerk.hpp"

namespace {

namespace fs = std::filesystem;
using namespace delaylab;

std::vector<double> parse_numbers(const std::string& text, char sep) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep)) {
    std::size_t used = 0;
    const double v = std::stod(item, &used);
    if (used != item.size()) {
      throw std::invalid_argument("cannot parse number \"" + item + "\"");
    }
    out.push_back(v);
  }
  if (out.empty()) {
    throw std::invalid_argument("empty number list \"" + text + "\"");
  }
  return out;
}

AxisState parse_axis(const std::string& text) {
  const auto v = parse_numbers(text, ',');
  if (v.size() != 3) {
    throw std::invalid_argument(
        "axis state needs three numbers: position,velocity,acceleration");
  }
  return {v[0], v[1], v[2]};
}

// --out wins; otherwise the environment supplies a default directory.
std::string resolve_out(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("DELAYLAB_OUT_DIR")) return env;
  return {};
}

void write_text(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path().empty() ? "." : path.parent_path());
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot open " + path.string());
  }
  out << text << '\n';
}

LinearSystem named_system(const std::string& name) {
  LinearSystem sys;
  if (name == "scalar_linear") {
    sys.M = Eigen::MatrixXd::Constant(1, 1, -1.0);
    sys.N = Eigen::MatrixXd::Constant(1, 1, 1.0);
    return sys;
  }
  if (name == "double_integrator") {
    sys.M = Eigen::MatrixXd::Zero(2, 2);
    sys.M(0, 1) = 1.0;
    sys.N = Eigen::MatrixXd::Zero(2, 1);
    sys.N(1, 0) = 1.0;
    return sys;
  }
  throw ValidationError("unknown system \"" + name +
                        "\" (use scalar_linear or double_integrator)");
}

int cmd_simulate(const std::string& scenario_path, const std::string& out,
                 std::optional<double> step, std::optional<double> duration) {
  Scenario sc = Scenario::from_file(scenario_path);
  if (step) sc.step = *step;
  if (duration) sc.duration = *duration;
  const std::string dir = !out.empty() ? out : resolve_out(sc.output_dir);
  sc.output_dir = dir;
  const SimResult result = run_simulation(sc);
  std::cout << result.summary_json() << '\n';
  return 0;
}

int cmd_counterexample(double s1, double s2, const std::string& out) {
  const CounterexampleReport report = necessity_counterexample(s1, s2);
  std::cout << report.to_json() << '\n';
  const std::string dir = resolve_out(out);
  if (!dir.empty()) {
    write_text(fs::path(dir) / "counterexample.json", report.to_json());
  }
  return 0;
}

int cmd_nsctp(const std::string& problem, const std::string& a,
              const std::string& b, std::optional<double> T,
              const std::string& out) {
  NsctpVerdict verdict;
  if (problem == "eq5") {
    verdict = nsctp_scan_eq5(std::stod(a), std::stod(b));
  } else if (problem == "minjerk") {
    verdict = nsctp_scan_minjerk(parse_axis(a), parse_axis(b), T);
  } else {
    throw ValidationError("unknown problem \"" + problem +
                          "\" (use eq5 or minjerk)");
  }
  std::cout << verdict.to_json() << '\n';
  const std::string dir = resolve_out(out);
  if (!dir.empty()) {
    write_text(fs::path(dir) / "nsctp.json", verdict.to_json());
  }
  return 0;
}

int cmd_reachset(const std::string& sys_name, const std::string& x0_text,
                 double t, const std::string& out, double step) {
  const LinearSystem sys = named_system(sys_name);
  const auto x0v = parse_numbers(x0_text, ',');
  State x0(x0v.size());
  for (std::size_t i = 0; i < x0v.size(); ++i) x0[i] = x0v[i];
  const ReachableSet K(sys, x0, t, step);
  const std::string dir = resolve_out(out);
  if (dir.empty()) {
    K.write_boundary_csv(std::cout);
  } else {
    fs::create_directories(dir);
    std::ofstream file(fs::path(dir) / "reachset.csv");
    K.write_boundary_csv(file);
  }
  return 0;
}

int cmd_minjerk(const std::string& init_text, const std::string& target_text,
                double T, const std::string& out, double step) {
  std::vector<AxisState> axes;
  {
    std::stringstream ss(init_text);
    std::string part;
    while (std::getline(ss, part, ';')) axes.push_back(parse_axis(part));
  }
  const auto targets = parse_numbers(target_text, ',');
  if (axes.empty() || axes.size() > 2 || targets.size() != axes.size()) {
    throw ValidationError(
        "give one or two axes as p,v,a[;p,v,a] and one target per axis");
  }

  std::vector<QuinticCoeffs> plans;
  std::ostringstream coeffs;
  coeffs << "{\n";
  for (std::size_t i = 0; i < axes.size(); ++i) {
    plans.push_back(solve_quintic(axes[i], targets[i], T));
    coeffs << "  \"axis" << i << "\": [";
    for (int k = 0; k < 6; ++k) {
      coeffs << (k ? ", " : "") << plans.back().a[k];
    }
    coeffs << "]" << (i + 1 < axes.size() ? ",\n" : "\n");
  }
  coeffs << "}";
  std::cout << coeffs.str() << '\n';

  const auto axis_or_zero = [&](std::size_t i) -> const QuinticCoeffs* {
    return i < plans.size() ? &plans[i] : nullptr;
  };
  std::ostringstream csv;
  csv << "t,x,y,xd,yd,xdd,ydd,jerk_x,jerk_y\n";
  const auto rows = std::llround(T / step);
  char buf[256];
  for (long long k = 0; k <= rows; ++k) {
    const double t = k == rows ? T : static_cast<double>(k) * step;
    const QuinticCoeffs* qx = axis_or_zero(0);
    const QuinticCoeffs* qy = axis_or_zero(1);
    std::snprintf(buf, sizeof(buf),
                  "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", t,
                  qx ? qx->position(t) : 0.0, qy ? qy->position(t) : 0.0,
                  qx ? qx->velocity(t) : 0.0, qy ? qy->velocity(t) : 0.0,
                  qx ? qx->acceleration(t) : 0.0,
                  qy ? qy->acceleration(t) : 0.0, qx ? qx->jerk(t) : 0.0,
                  qy ? qy->jerk(t) : 0.0);
    csv << buf;
  }
  const std::string dir = resolve_out(out);
  if (dir.empty()) {
    std::cout << csv.str();
  } else {
    write_text(fs::path(dir) / "minjerk.csv", csv.str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"delaylab: delayed-feedback control laboratory"};
  app.require_subcommand(1);
  // --h is the step override, so help is long-form only.
  app.set_help_flag("--help", "print help");

  std::string scenario_path, out_dir;
  std::optional<double> step_override, duration_override;
  auto* sim = app.add_subcommand("simulate", "run a scenario file");
  sim->set_help_flag("--help", "print help");
  sim->add_option("scenario", scenario_path, "scenario JSON file")->required();
  sim->add_option("--out", out_dir, "output directory");
  double step_tmp = 0.0, dur_tmp = 0.0;
  auto* h_opt = sim->add_option("--h", step_tmp, "integration step override");
  auto* d_opt = sim->add_option("--duration", dur_tmp, "duration override");

  double s1 = 0.0, s2 = 0.0;
  std::string ce_out;
  auto* ce = app.add_subcommand("counterexample",
                                "two starts one delay-width memory cannot separate");
  ce->add_option("--s1", s1, "first start in [-1, 1]")->required();
  ce->add_option("--s2", s2, "second start in [-1, 1]")->required();
  ce->add_option("--out", ce_out, "output directory");

  std::string problem, a_text, b_text, ns_out;
  double T_val = 0.0;
  auto* ns = app.add_subcommand("nsctp", "probe a pair of initial states");
  ns->add_option("--problem", problem, "eq5 or minjerk")->required();
  ns->add_option("--a", a_text, "first state (scalar, or p,v,a)")->required();
  ns->add_option("--b", b_text, "second state")->required();
  auto* T_opt = ns->add_option("--T", T_val, "fixed horizon (minjerk only)");
  ns->add_option("--out", ns_out, "output directory");

  std::string rs_sys, rs_x0, rs_out;
  double rs_t = 0.0, rs_step = 1e-3;
  auto* rs = app.add_subcommand("reachset", "export a reachable-set boundary");
  rs->add_option("--sys", rs_sys, "scalar_linear or double_integrator")
      ->required();
  rs->add_option("--x0", rs_x0, "start state, comma separated")->required();
  rs->add_option("--t", rs_t, "horizon in seconds")->required();
  rs->add_option("--step", rs_step, "quadrature step");
  rs->add_option("--out", rs_out, "output directory");

  std::string mj_init, mj_target, mj_out;
  double mj_T = 0.0, mj_step = 1e-3;
  auto* mj = app.add_subcommand("minjerk", "plan a minimum-jerk move");
  mj->set_help_flag("--help", "print help");
  mj->add_option("--init", mj_init, "initial p,v,a per axis, ; separated")
      ->required();
  mj->add_option("--target", mj_target, "target position per axis")->required();
  mj->add_option("--T", mj_T, "horizon in seconds")->required();
  mj->add_option("--h", mj_step, "sample step for the CSV");
  mj->add_option("--out", mj_out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (sim->parsed()) {
      if (h_opt->count()) step_override = step_tmp;
      if (d_opt->count()) duration_override = dur_tmp;
      return cmd_simulate(scenario_path, out_dir, step_override,
                          duration_override);
    }
    if (ce->parsed()) return cmd_counterexample(s1, s2, ce_out);
    if (ns->parsed()) {
      std::optional<double> T;
      if (T_opt->count()) T = T_val;
      return cmd_nsctp(problem, a_text, b_text, T, ns_out);
    }
    if (rs->parsed()) return cmd_reachset(rs_sys, rs_x0, rs_t, rs_out, rs_step);
    if (mj->parsed()) return cmd_minjerk(mj_init, mj_target, mj_T, mj_out, mj_step);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const DivergenceError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const HorizonError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
