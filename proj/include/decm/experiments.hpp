#pragma once

// Declarative experiments. Each kind expands into independent members (simulations or
// check groups) that run on a worker pool; the report holds every recorded number and the
// pass/fail of each threshold, so it can be re-checked offline.

#include <limits>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "decm/dynamics.hpp"
#include "decm/eos.hpp"
#include "decm/initial_data.hpp"

namespace decm {

enum class ExperimentKind {
  verify_suite,          // operator identities, solver agreement, inverse bounds
  conservation,          // mean, maximum principle, L^p monotonicity, energy balance
  cross_scale,           // laboratory vs gyration vs boosted friction runs
  w_scaling,             // B-scaling of the auxiliary scalar
  limit_critical,        // boosted DECM vs critical SQG, rate in (1+B²)
  limit_inviscid,        // gyration-scale DECM vs inviscid SQG
  decay_h3,              // small-data H³ decay in the boosted friction scale
  eps_convergence,       // regularized runs approaching the unregularized one
  temporal_convergence,  // dt-halving self-convergence
};

std::string_view to_string(ExperimentKind k) noexcept;
ExperimentKind parse_experiment_kind(std::string_view name);

struct ExperimentSpec {
  ExperimentKind kind = ExperimentKind::verify_suite;
  int n = 128;
  InitialData init;
  std::vector<double> b_list;
  std::vector<double> eps_list;
  std::vector<double> dt_list;
  double t_end = 1.0;    // in the time scale the kind runs in
  double dt = 5e-3;      // same scale
  int sample_count = 101;
  int trials = 20;       // verify_suite only
  EosParams eos;
  std::map<std::string, double> thresholds;
  int workers = 1;

  /// Throws DomainError on an invalid spec (ordering of lists, missing thresholds, ...).
  void validate() const;
};

/// Threshold names a kind reads.
std::vector<std::string> required_thresholds(ExperimentKind kind);

/// Desk-scale defaults for a kind, thresholds included.
ExperimentSpec default_spec(ExperimentKind kind);

struct MemberResult {
  std::string label;
  double param = 0.0;
  bool ok = true;
  std::string error;
  std::map<std::string, double> values;
};

struct Check {
  std::string name;
  double value = 0.0;
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  bool strict = false;  // hi is exclusive
  bool pass = false;
};

struct ExperimentReport {
  ExperimentSpec spec;
  std::vector<MemberResult> members;
  std::map<std::string, double> fits;
  std::vector<Check> checks;
  bool pass = false;
  double wall_seconds = 0.0;
};

/// Runs every member (in parallel up to spec.workers) and evaluates the thresholds.
/// A failing member is recorded with its diagnostic; the remaining members still run.
ExperimentReport run_experiment(const ExperimentSpec& spec);

/// Largest amplitude in [lo, hi] (to within `rel_width`) for which a boosted run of `spec`
/// (a decay_h3 spec) stays under the e^{−t/4} H³ envelope at every sample. Returns lo when
/// even lo fails.
double bisect_decay_amplitude(const ExperimentSpec& spec, double lo, double hi,
                              double rel_width = 0.05);

}  // namespace decm
