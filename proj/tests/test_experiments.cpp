#include <gtest/gtest.h>

#include "decm/experiments.hpp"

using namespace decm;

namespace {

const Check* find(const ExperimentReport& r, const std::string& name) {
  for (const auto& c : r.checks)
    if (c.name == name) return &c;
  return nullptr;
}

ExperimentSpec small_cross_scale() {
  ExperimentSpec s = default_spec(ExperimentKind::cross_scale);
  s.n = 32;
  s.t_end = 0.1;
  s.dt = 0.01;
  s.sample_count = 6;
  return s;
}

}  // namespace

TEST(Experiments, KindNamesRoundtrip) {
  for (auto k : {ExperimentKind::verify_suite, ExperimentKind::conservation, ExperimentKind::cross_scale,
                 ExperimentKind::w_scaling, ExperimentKind::limit_critical, ExperimentKind::limit_inviscid,
                 ExperimentKind::decay_h3, ExperimentKind::eps_convergence,
                 ExperimentKind::temporal_convergence}) {
    EXPECT_EQ(parse_experiment_kind(to_string(k)), k);
    const ExperimentSpec s = default_spec(k);
    EXPECT_NO_THROW(s.validate()) << to_string(k);
    for (const auto& t : required_thresholds(k)) EXPECT_TRUE(s.thresholds.count(t)) << t;
  }
  EXPECT_THROW(parse_experiment_kind("everything"), DomainError);
}

TEST(Experiments, SpecValidation) {
  ExperimentSpec s = default_spec(ExperimentKind::limit_critical);
  s.b_list = {8, 4};
  EXPECT_THROW(s.validate(), DomainError);
  s = default_spec(ExperimentKind::limit_critical);
  s.thresholds.erase("slope_lo");
  EXPECT_THROW(s.validate(), DomainError);
  s = default_spec(ExperimentKind::eps_convergence);
  s.eps_list = {0.1};
  EXPECT_THROW(s.validate(), DomainError);
  s = default_spec(ExperimentKind::temporal_convergence);
  s.dt_list = {0.01, 0.02, 0.04};
  EXPECT_THROW(s.validate(), DomainError);
  s = default_spec(ExperimentKind::w_scaling);
  s.workers = 0;
  EXPECT_THROW(s.validate(), DomainError);
  s = default_spec(ExperimentKind::w_scaling);
  s.n = 30 + 1;
  EXPECT_THROW(s.validate(), DomainError);
}

TEST(Experiments, VerifySuitePassesAtN32) {
  const ExperimentReport r = run_experiment(default_spec(ExperimentKind::verify_suite));
  EXPECT_TRUE(r.pass);
  EXPECT_EQ(r.members.size(), 3u);
  for (const auto& c : r.checks) EXPECT_TRUE(c.pass) << c.name << " = " << c.value;
  ASSERT_NE(find(r, "lq_antisym"), nullptr);
  ASSERT_NE(find(r, "method_agreement"), nullptr);
}

TEST(Experiments, PassFollowsRecordedNumbers) {
  ExperimentSpec s = default_spec(ExperimentKind::w_scaling);
  s.n = 32;
  s.thresholds["slope_hi"] = -7.0;
  const ExperimentReport r = run_experiment(s);
  EXPECT_FALSE(r.pass);
  for (const auto& c : r.checks) {
    const bool expect = c.value >= c.lo && (c.strict ? c.value < c.hi : c.value <= c.hi);
    EXPECT_EQ(c.pass, expect) << c.name;
  }
}

TEST(Experiments, CrossScaleSmall) {
  const ExperimentReport r = run_experiment(small_cross_scale());
  EXPECT_TRUE(r.pass);
  EXPECT_LE(find(r, "lab_vs_friction_boosted")->value, 1e-6);
}

TEST(Experiments, ReproducibleAcrossWorkerCounts) {
  ExperimentSpec s = small_cross_scale();
  const ExperimentReport a = run_experiment(s);
  const ExperimentReport b = run_experiment(s);
  s.workers = 3;
  const ExperimentReport c = run_experiment(s);
  ASSERT_EQ(a.members.size(), c.members.size());
  for (std::size_t i = 0; i < a.members.size(); ++i) {
    EXPECT_EQ(a.members[i].values, b.members[i].values);
    EXPECT_EQ(a.members[i].values, c.members[i].values);
  }
  EXPECT_EQ(a.fits, c.fits);
}

TEST(Experiments, MemberFailureIsRecorded) {
  ExperimentSpec s = default_spec(ExperimentKind::limit_inviscid);
  s.n = 32;
  s.b_list = {0.5, 10.0};
  s.t_end = 0.2;
  s.dt = 0.02;
  s.sample_count = 3;
  s.eos.max_iter = 1;  // neither fixed point nor the Krylov fallback can converge
  s.init.amplitude = 3.0;
  const ExperimentReport r = run_experiment(s);
  EXPECT_FALSE(r.pass);
  ASSERT_EQ(r.members.size(), 3u);
  EXPECT_TRUE(r.members[0].ok);  // the SQG reference has no equation of state
  int failed = 0;
  for (const auto& m : r.members)
    if (!m.ok) {
      ++failed;
      EXPECT_FALSE(m.error.empty());
    }
  EXPECT_GT(failed, 0);
}

TEST(Experiments, BisectionFindsWorkingAmplitude) {
  ExperimentSpec s = default_spec(ExperimentKind::decay_h3);
  s.n = 32;
  s.t_end = 1.0;
  s.dt = 0.02;
  s.sample_count = 11;
  const double a = bisect_decay_amplitude(s, 0.01, 0.08, 0.2);
  EXPECT_GE(a, 0.01);
  EXPECT_LE(a, 0.08);
  s.init.amplitude = a;
  const ExperimentReport r = run_experiment(s);
  EXPECT_TRUE(find(r, "h3_envelope")->pass);
  EXPECT_THROW(bisect_decay_amplitude(default_spec(ExperimentKind::w_scaling), 0.1, 1.0), DomainError);
}
