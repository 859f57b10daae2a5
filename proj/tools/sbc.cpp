// sbc: find the critical launch ratio, generate the periodic orbit, and
// sweep net-velocity-at-collision curves.
//
//   sbc find-theta [--bracket LO HI] [--tol T]
//   sbc orbit [--theta X] [--period-multiples K] [--samples N]
//   sbc sweep --n N | --n-list A,B,... [--grid K] [--eps E] [--reduced]
//
// Common flags: --rel-tol --abs-tol --out DIR --threads N.
// Exit codes: 0 success, 2 usage, 3 bracket/search failure, 4 integration failure.

#include <chrono>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sbc/integrator.hpp"
#include "sbc/io.hpp"
#include "sbc/model.hpp"
#include "sbc/nbody.hpp"
#include "sbc/orbit.hpp"
#include "sbc/search.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

enum ExitCode { kOk = 0, kUsage = 2, kSearch = 3, kIntegration = 4 };

struct Common {
  double rel_tol = 1e-12;
  double abs_tol = 1e-12;
  std::string out = ".";
  unsigned threads = 0;

  sbc::IntegratorConfig config() const {
    sbc::IntegratorConfig c;
    c.rel_tol = rel_tol;
    c.abs_tol = abs_tol;
    return c;
  }
  json to_json() const { return {{"rel_tol", rel_tol}, {"abs_tol", abs_tol}}; }
};

class Timer {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

fs::path prepare_out(const std::string& dir) {
  fs::path p(dir);
  fs::create_directories(p);
  return p;
}

void finish(sbc::io::RunManifest& m, const fs::path& dir, const Timer& timer) {
  m.wall_seconds = timer.seconds();
  const auto path = dir / (m.command + ".manifest.json");
  sbc::io::write_json(path, m.to_json());
}

// ---------------------------------------------------------------------------

struct FindThetaArgs {
  std::vector<double> bracket{0.1, 0.9};
  double tol = 1e-14;
};

int run_find_theta(const FindThetaArgs& a, const Common& c) {
  Timer timer;
  const auto dir = prepare_out(c.out);
  const auto r = sbc::find_theta(a.bracket[0], a.bracket[1], a.tol, c.config());

  std::printf("theta* = %.17g\n", r.theta_star);
  std::printf("v*     = %.17g\n", r.v_star);
  std::printf("E      = %.17g\n", sbc::energy_from_v(r.v_star));
  std::printf("s0     = %.17g\n", r.s0);
  std::printf("t0     = %.17g\n", r.t0);
  std::printf("residual |p2(t0)| = %.3e after %d bisection steps\n", r.residual, r.iterations);

  sbc::io::RunManifest m;
  m.command = "find_theta";
  m.parameters = c.to_json();
  m.parameters["bracket"] = a.bracket;
  m.parameters["tol"] = a.tol;
  sbc::io::write_json(dir / "find_theta.json", sbc::io::to_json(r));
  std::ostringstream csv;
  sbc::io::write_bracket_csv(csv, r.bracket_history);
  sbc::io::write_text(dir / "bracket_history.csv", csv.str());
  m.outputs = {"find_theta.json", "bracket_history.csv"};
  finish(m, dir, timer);
  return kOk;
}

// ---------------------------------------------------------------------------

struct OrbitArgs {
  std::optional<double> theta;
  int period_multiples = 1;
  std::size_t samples = 400;
};

int run_orbit(const OrbitArgs& a, const Common& c) {
  Timer timer;
  const auto dir = prepare_out(c.out);
  const auto cfg = c.config();
  double theta = 0;
  if (a.theta) {
    theta = *a.theta;
  } else {
    theta = sbc::find_theta(0.1, 0.9, 1e-14, cfg).theta_star;
  }
  if (!(theta > 0 && theta < 1)) throw sbc::DomainError("--theta must lie in (0, 1)");

  const auto rep = sbc::analyze_orbit(theta, a.samples, cfg);
  const double s_end = rep.period_s * a.period_multiples;
  const auto traj =
      sbc::integrate_span(rep.v, s_end, a.samples * std::size_t(a.period_multiples) + 1, cfg);

  std::ostringstream csv;
  sbc::io::write_trajectory_csv(csv, traj);
  sbc::io::write_text(dir / "orbit.csv", csv.str());

  json report = {{"theta", rep.theta},
                 {"v", rep.v},
                 {"E", rep.E},
                 {"s0", rep.s0},
                 {"t0", rep.t0},
                 {"period_s", rep.period_s},
                 {"period_t", rep.period_t},
                 {"period_multiples", a.period_multiples},
                 {"s_end", s_end},
                 {"periodicity_defect", rep.periodicity_defect},
                 {"raw_periodicity_defect", rep.raw_periodicity_defect},
                 {"raw_antiperiodicity_defect", rep.raw_antiperiodicity_defect},
                 {"half_period_negation_defect", rep.half_period.negation_defect},
                 {"half_period_reversal_defect", rep.half_period.reversal_defect},
                 {"gamma_residual", rep.gamma_residual},
                 {"energy_residual", rep.energy_residual},
                 {"collisions_per_period", rep.collisions_per_period},
                 {"periodic", rep.periodic},
                 {"warning", rep.periodic ? json(nullptr)
                                          : json("periodicity defect exceeds 1e-6; theta is not "
                                                 "the critical value")}};
  sbc::io::write_json(dir / "orbit_report.json", report);

  std::vector<sbc::io::Series> paths(4);
  for (std::size_t b = 0; b < 4; ++b) paths[b].label = "body " + std::to_string(b + 1);
  for (const auto& z : traj) {
    const auto frame = sbc::reduced_to_physical(z);
    for (std::size_t b = 0; b < 4; ++b) {
      paths[b].x.push_back(frame.positions[b].x);
      paths[b].y.push_back(frame.positions[b].y);
    }
  }
  char title[96];
  std::snprintf(title, sizeof title, "Four-body SBC orbit, theta = %.12g", theta);
  sbc::io::PlotSpec spec{title, "x", "y", true, false};
  sbc::io::write_text(dir / "orbit.svg", sbc::io::render_svg(spec, paths));

  std::printf("theta = %.17g  s0 = %.17g  period_s = %.17g  period_t = %.17g\n", theta, rep.s0,
              rep.period_s, rep.period_t);
  std::printf("periodicity defect = %.3e  gamma residual = %.3e  energy residual = %.3e\n",
              rep.periodicity_defect, rep.gamma_residual, rep.energy_residual);
  if (!rep.periodic) std::printf("warning: orbit is not periodic at this theta\n");

  sbc::io::RunManifest m;
  m.command = "orbit";
  m.parameters = c.to_json();
  m.parameters["theta"] = theta;
  m.parameters["theta_from_search"] = !a.theta.has_value();
  m.parameters["period_multiples"] = a.period_multiples;
  m.parameters["samples"] = a.samples;
  m.outputs = {"orbit.csv", "orbit_report.json", "orbit.svg"};
  finish(m, dir, timer);
  return kOk;
}

// ---------------------------------------------------------------------------

struct SweepArgs {
  std::optional<int> n;
  std::vector<int> n_list;
  int grid = 99;
  double eps = 1e-8;
  bool reduced = false;
};

// Linear interpolation of the first sign change, NaN if none.
double zero_crossing(const std::vector<sbc::SweepRecord>& rows) {
  const sbc::SweepRecord* prev = nullptr;
  for (const auto& r : rows) {
    if (!r.ok()) continue;
    if (prev && (prev->signed_magnitude < 0) != (r.signed_magnitude < 0)) {
      const double w = prev->signed_magnitude / (prev->signed_magnitude - r.signed_magnitude);
      return prev->theta + w * (r.theta - prev->theta);
    }
    prev = &r;
  }
  return std::numeric_limits<double>::quiet_NaN();
}

int run_sweep(const SweepArgs& a, const Common& c) {
  Timer timer;
  if (a.grid <= 0) throw CLI::ValidationError("--grid", "must be a positive point count");
  std::vector<int> ns = a.n_list;
  if (a.n) ns.insert(ns.begin(), *a.n);
  if (ns.empty()) throw CLI::ValidationError("sweep", "one of --n or --n-list is required");
  for (int n : ns) {
    if (n < 4 || n % 2) throw CLI::ValidationError("--n", "n must be even and >= 4");
  }
  if (a.reduced && (ns.size() != 1 || ns[0] != 4)) {
    throw CLI::ValidationError("--reduced", "the regularized formulation exists only for n = 4");
  }
  const auto dir = prepare_out(c.out);
  const auto grid = sbc::uniform_open_grid(std::size_t(a.grid));
  const auto cfg = c.config();
  sbc::nbody::CollisionOptions opts;
  opts.eps_collision = a.eps;

  std::vector<sbc::SweepRecord> all;
  std::vector<sbc::io::Series> curves;
  json summary = json::array();
  for (int n : ns) {
    auto rows = a.reduced ? sbc::sweep_theta(grid, cfg, c.threads)
                          : sbc::nbody::sweep_n(n, grid, opts, cfg, c.threads);
    sbc::io::Series s;
    s.label = "n = " + std::to_string(n);
    std::size_t failures = 0;
    for (const auto& r : rows) {
      if (!r.ok()) {
        ++failures;
        continue;
      }
      s.x.push_back(r.theta);
      s.y.push_back(r.signed_magnitude);
    }
    const int changes = sbc::count_sign_changes(rows);
    const double zero = zero_crossing(rows);
    std::printf("n = %2d: %zu points, %zu failed, %d sign change(s), zero near theta = %.6f\n", n,
                rows.size(), failures, changes, zero);
    summary.push_back({{"n", n},
                       {"points", rows.size()},
                       {"failures", failures},
                       {"sign_changes", changes},
                       {"zero_crossing", sbc::io::number(zero)}});
    curves.push_back(std::move(s));
    all.insert(all.end(), rows.begin(), rows.end());
  }

  std::ostringstream csv;
  sbc::io::write_sweep_csv(csv, all);
  sbc::io::write_text(dir / "sweep.csv", csv.str());
  sbc::io::PlotSpec spec{"Net velocity of bodies 1 and 2 at first collision", "theta",
                         "signed |v1 + v2|", false, true};
  sbc::io::write_text(dir / "sweep.svg", sbc::io::render_svg(spec, curves));
  sbc::io::write_json(dir / "sweep_summary.json", summary);

  sbc::io::RunManifest m;
  m.command = "sweep";
  m.parameters = c.to_json();
  m.parameters["n"] = ns;
  m.parameters["grid"] = a.grid;
  m.parameters["eps"] = a.eps;
  m.parameters["formulation"] = a.reduced ? "regularized" : "cartesian";
  m.outputs = {"sweep.csv", "sweep.svg", "sweep_summary.json"};
  finish(m, dir, timer);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simultaneous binary collision orbits of the symmetric planar 2n-body problem"};
  app.require_subcommand(1);
  Common common;
  app.add_option("--rel-tol", common.rel_tol, "Relative integration tolerance")
      ->check(CLI::Range(1e-16, 1e-2));
  app.add_option("--abs-tol", common.abs_tol, "Absolute integration tolerance")
      ->check(CLI::Range(1e-16, 1e-2));
  app.add_option("--out", common.out, "Output directory");
  app.add_option("--threads", common.threads, "Worker threads for sweeps (0 = all cores)");

  FindThetaArgs ft;
  auto* ft_cmd = app.add_subcommand("find-theta", "Bisect for the critical velocity ratio");
  ft_cmd->add_option("--bracket", ft.bracket, "Search bracket LO HI")->expected(2);
  ft_cmd->add_option("--tol", ft.tol, "Bracket width tolerance")->check(CLI::PositiveNumber);

  OrbitArgs orb;
  auto* orb_cmd = app.add_subcommand("orbit", "Integrate the periodic orbit and check its symmetry");
  orb_cmd->add_option("--theta", orb.theta, "Velocity ratio (default: run find-theta)");
  orb_cmd->add_option("--period-multiples", orb.period_multiples, "Number of periods 4 s0")
      ->check(CLI::PositiveNumber);
  orb_cmd->add_option("--samples", orb.samples, "Trajectory samples per period")
      ->check(CLI::Range(2, 1000000));

  SweepArgs sw;
  auto* sw_cmd = app.add_subcommand("sweep", "Net collision velocity over a theta grid");
  auto* n_opt = sw_cmd->add_option("--n", sw.n, "Even body count");
  auto* nl_opt = sw_cmd->add_option("--n-list", sw.n_list, "Comma separated body counts")
                     ->delimiter(',');
  n_opt->excludes(nl_opt);
  sw_cmd->add_option("--grid", sw.grid, "Interior grid points theta = k / (K + 1)");
  sw_cmd->add_option("--eps", sw.eps, "Collision distance threshold")->check(CLI::PositiveNumber);
  sw_cmd->add_flag("--reduced", sw.reduced, "Use the regularized formulation (n = 4 only)");

  // Common flags may also follow the subcommand.
  for (auto* sub : {ft_cmd, orb_cmd, sw_cmd}) {
    sub->fallthrough();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*ft_cmd) return run_find_theta(ft, common);
    if (*orb_cmd) return run_orbit(orb, common);
    if (*sw_cmd) return run_sweep(sw, common);
  } catch (const CLI::Error& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const sbc::BracketError& e) {
    std::cerr << "search failed: " << e.what() << "\n";
    return kSearch;
  } catch (const sbc::IntegrationError& e) {
    std::cerr << "integration failed: " << e.what() << "\n";
    return kIntegration;
  } catch (const sbc::DomainError& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kUsage;
}
