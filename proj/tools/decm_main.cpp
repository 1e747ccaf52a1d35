// decm: command-line front end.
//   decm run <config>            simulate and write series.csv plus one snapshot per sample
//   decm verify [n]              operator/solver identity suite (default n = 32)
//   decm sweep <config>          run the experiment named by experiment.kind
//        --bisect LO HI          (decay_h3 only) largest amplitude that stays under the envelope
//   decm compare <a> <b>         L² and L^∞ of the difference of two snapshots
//   decm info <snapshot>         header and norms of one snapshot
// Exit codes: 0 success, 1 failed check or aborted run, 2 usage or config error.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <vector>

#include <CLI11.hpp>

#include "decm/diagnostics.hpp"
#include "decm/experiments.hpp"
#include "decm/io.hpp"
#include "decm/kernels.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kOk = 0;
constexpr int kFailed = 1;
constexpr int kUsage = 2;

std::string output_dir(const decm::RunConfig& rc, const std::string& override_dir) {
  return override_dir.empty() ? rc.output_dir : override_dir;
}

void print_report(const decm::ExperimentReport& r) {
  for (const auto& m : r.members)
    if (!m.ok) std::printf("member %s (%g) FAILED: %s\n", m.label.c_str(), m.param, m.error.c_str());
  for (const auto& [k, v] : r.fits) std::printf("fit %-28s %.6g\n", k.c_str(), v);
  for (const auto& c : r.checks)
    std::printf("%s %-28s value=%.6g range=[%g, %g%s\n", c.pass ? "PASS" : "FAIL", c.name.c_str(),
                c.value, c.lo, c.hi, c.strict ? ")" : "]");
  std::printf("%s %s (%.1f s)\n", r.pass ? "PASS" : "FAIL", std::string(decm::to_string(r.spec.kind)).c_str(),
              r.wall_seconds);
}

int cmd_run(const std::string& path, const std::string& dir_override) {
  const decm::RunConfig rc = decm::load_config(path);
  if (rc.experiment) {
    std::fprintf(stderr, "%s: sets experiment.kind; use 'decm sweep'\n", path.c_str());
    return kUsage;
  }
  const fs::path dir = output_dir(rc, dir_override);
  const decm::SimConfig& c = rc.sim;
  const decm::ScalarField q0 = decm::make_initial(c.grid, rc.init);

  std::vector<decm::NormRecord> records;
  int index = 0;
  decm::Observers obs;
  obs.on_sample = [&](const decm::State& s) {
    records.push_back(decm::norm_record(s));
    char name[32];
    std::snprintf(name, sizeof name, "snap_%05d.bin", index++);
    decm::save_snapshot(dir / name, {s.field, s.t, c.b, decm::scale_tag(c.time_scale, c.boosted)});
  };
  try {
    const decm::Trajectory traj = decm::run(c, q0, obs);
    const auto residual = decm::energy_balance_residual(records, c);
    decm::write_series(dir / "series.csv", records, residual);
    const auto& m = traj.monitor();
    std::printf("steps %ld  dt [%.3g, %.3g]  samples %zu  eos max iterations %d  fallbacks %ld\n", m.steps,
                m.min_dt, m.max_dt, records.size(), m.max_eos_iterations, m.eos_fallbacks);
    std::printf("max relative growth  linf %.3g  l2 %.3g  l4 %.3g  l8 %.3g\n", m.max_linf_growth,
                m.max_lp_growth[0], m.max_lp_growth[1], m.max_lp_growth[2]);
    std::printf("wrote %s\n", dir.string().c_str());
    return kOk;
  } catch (const decm::SimulationAbort& e) {
    std::fprintf(stderr, "run aborted at t = %g (step %ld): %s\n", e.time(), e.step(), e.what());
    if (!records.empty())
      decm::write_series(dir / "series.csv", records, decm::energy_balance_residual(records, c));
    return kFailed;
  }
}

int cmd_verify(int n, int workers, const std::string& report) {
  decm::ExperimentSpec s = decm::default_spec(decm::ExperimentKind::verify_suite);
  s.n = n;
  s.workers = workers;
  const decm::ExperimentReport r = decm::run_experiment(s);
  print_report(r);
  if (!report.empty()) decm::write_report(report, r);
  return r.pass ? kOk : kFailed;
}

int cmd_sweep(const std::string& path, const std::string& dir_override, const std::vector<double>& bisect) {
  const decm::RunConfig rc = decm::load_config(path);
  if (!rc.experiment) {
    std::fprintf(stderr, "%s: experiment.kind is not set\n", path.c_str());
    return kUsage;
  }
  if (!bisect.empty()) {
    const double a = decm::bisect_decay_amplitude(*rc.experiment, bisect[0], bisect[1]);
    std::printf("amplitude %.6g\n", a);
    return kOk;
  }
  const decm::ExperimentReport r = decm::run_experiment(*rc.experiment);
  print_report(r);
  const fs::path out = fs::path(output_dir(rc, dir_override)) /
                       (std::string(decm::to_string(r.spec.kind)) + "_report.json");
  decm::write_report(out, r);
  std::printf("wrote %s\n", out.string().c_str());
  return r.pass ? kOk : kFailed;
}

int cmd_compare(const std::string& a, const std::string& b, double tol) {
  const decm::Snapshot sa = decm::load_snapshot(a), sb = decm::load_snapshot(b);
  if (!(sa.field.grid() == sb.field.grid())) {
    std::fprintf(stderr, "grids differ: n = %d vs %d\n", sa.field.grid().n(), sb.field.grid().n());
    return kUsage;
  }
  const decm::ScalarField d = sa.field - sb.field;
  const double l2 = decm::l2_norm(d), linf = decm::max_abs(d);
  std::printf("l2 %.17g\nlinf %.17g\n", l2, linf);
  if (sa.t != sb.t || sa.b != sb.b || sa.tag != sb.tag)
    std::printf("note: headers differ (t %g/%g, b %g/%g, scale %s/%s)\n", sa.t, sb.t, sa.b, sb.b,
                std::string(decm::to_string(sa.tag)).c_str(), std::string(decm::to_string(sb.tag)).c_str());
  if (tol >= 0.0 && !(l2 <= tol)) return kFailed;
  return kOk;
}

int cmd_info(const std::string& path) {
  const decm::Snapshot s = decm::load_snapshot(path);
  const decm::NormRecord r = decm::norm_record(s.t, s.field);
  std::printf("n %d\nt %.17g\nb %.17g\nscale %s\n", s.field.grid().n(), s.t, s.b,
              std::string(decm::to_string(s.tag)).c_str());
  std::printf("l2 %.17g\nl4 %.17g\nlinf %.17g\nh_half %.17g\nh3 %.17g\nmean %.17g\n", r.l2, r.l4, r.linf,
              r.h_half, r.h3, r.mean);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"DECM pseudo-spectral toolkit"};
  app.require_subcommand(1);
  std::string out_dir;

  std::string run_cfg;
  auto* run = app.add_subcommand("run", "integrate the configured system");
  run->add_option("config", run_cfg, "config file")->required();
  run->add_option("-o,--output", out_dir, "output directory (overrides config and DECM_OUTPUT_DIR)");

  int verify_n = 32, workers = 1;
  std::string verify_report;
  auto* verify = app.add_subcommand("verify", "operator and solver identity suite");
  verify->add_option("n", verify_n, "resolution (default 32)");
  verify->add_option("-j,--workers", workers, "parallel members")->check(CLI::PositiveNumber);
  verify->add_option("--report", verify_report, "write a JSON report here");

  std::string sweep_cfg;
  auto* sweep = app.add_subcommand("sweep", "run the configured experiment");
  sweep->add_option("config", sweep_cfg, "config file")->required();
  sweep->add_option("-o,--output", out_dir, "output directory");
  std::vector<double> bisect;
  sweep->add_option("--bisect", bisect, "amplitude search interval LO HI (decay_h3)")->expected(2);

  std::string snap_a, snap_b;
  double tol = -1.0;
  auto* compare = app.add_subcommand("compare", "difference norms of two snapshots");
  compare->add_option("a", snap_a)->required();
  compare->add_option("b", snap_b)->required();
  compare->add_option("--tol", tol, "exit 1 when the L2 difference exceeds this");

  std::string info_path;
  auto* info = app.add_subcommand("info", "describe a snapshot");
  info->add_option("snapshot", info_path)->required();

  std::string simd;
  app.add_option("--simd", simd, "kernel set: auto, scalar or avx2");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (simd == "scalar" || simd == "avx2") {
      const auto isa = simd == "avx2" ? decm::kernels::Isa::avx2 : decm::kernels::Isa::scalar;
      if (!decm::kernels::force_isa(isa)) {
        std::fprintf(stderr, "kernel set '%s' is not available on this machine\n", simd.c_str());
        return kUsage;
      }
    } else if (!simd.empty() && simd != "auto") {
      std::fprintf(stderr, "--simd expects auto, scalar or avx2\n");
      return kUsage;
    }
    if (*run) return cmd_run(run_cfg, out_dir);
    if (*verify) return cmd_verify(verify_n, workers, verify_report);
    if (*sweep) return cmd_sweep(sweep_cfg, out_dir, bisect);
    if (*compare) return cmd_compare(snap_a, snap_b, tol);
    if (*info) return cmd_info(info_path);
  } catch (const decm::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kUsage;
  } catch (const decm::IoError& e) {
    std::fprintf(stderr, "io error: %s\n", e.what());
    return kUsage;
  } catch (const decm::DomainError& e) {
    std::fprintf(stderr, "invalid argument: %s\n", e.what());
    return kUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kFailed;
  }
  return kUsage;
}
