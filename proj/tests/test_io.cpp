#include <gtest/gtest.h>

#include <locale>
#include <cstdlib>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "decm/io.hpp"
#include "test_util.hpp"

using namespace decm;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "decm_io_test";
  fs::create_directories(dir);
  return dir / name;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

template <class E>
E expect_error(std::string_view text) {
  try {
    parse_config(text, "t.cfg");
  } catch (const E& e) {
    return e;
  } catch (const std::exception& e) {
    ADD_FAILURE() << "wrong exception type: " << e.what();
    throw;
  }
  ADD_FAILURE() << "no exception";
  throw std::logic_error("no exception");
}

}  // namespace

TEST(Config, MinimalFileUsesDefaults) {
  const RunConfig rc = parse_config("grid.n = 32\nphysics.b = 2\ntime.t_end = 0.1\n");
  EXPECT_EQ(rc.sim.grid.n(), 32);
  EXPECT_EQ(rc.sim.b, 2.0);
  EXPECT_EQ(rc.sim.t_end, 0.1);
  EXPECT_EQ(rc.sim.eps, 0.0);
  EXPECT_EQ(rc.sim.time_scale, TimeScale::laboratory);
  EXPECT_FALSE(rc.sim.boosted);
  EXPECT_EQ(rc.sim.model, Model::decm);
  EXPECT_EQ(rc.sim.dt_policy.kind, DtPolicy::Kind::cfl);
  EXPECT_EQ(rc.sim.dt_policy.value, 0.5);
  EXPECT_EQ(rc.sim.sample_count, 11);
  EXPECT_EQ(rc.sim.eos.method, EosMethod::fixed_point);
  EXPECT_EQ(rc.sim.eos.tol, 1e-12);
  EXPECT_EQ(rc.sim.eos.max_iter, 500);
  EXPECT_EQ(rc.init.kind, InitKind::cmt);
  EXPECT_FALSE(rc.init.amplitude);
  EXPECT_EQ(rc.output_dir, "decm_out");
  EXPECT_FALSE(rc.experiment);
}

TEST(Config, FullFileAndComments) {
  const RunConfig rc = parse_config(R"(# a comment
grid.n = 64   # trailing comment
physics.b = 4.5
physics.eps = 0.0
time.scale = friction
time.boosted = true
time.dt = 1e-3
time.t_end = 2
init.kind = random_band
init.amplitude = 0.25
init.seed = 42
init.band = 6
eos.method = krylov
eos.tol = 1e-11
eos.max_iter = 99
output.dir = out/here
output.sample_count = 7
)");
  EXPECT_EQ(rc.sim.grid.n(), 64);
  EXPECT_EQ(rc.sim.b, 4.5);
  EXPECT_EQ(rc.sim.time_scale, TimeScale::friction);
  EXPECT_TRUE(rc.sim.boosted);
  EXPECT_EQ(rc.sim.dt_policy.kind, DtPolicy::Kind::fixed);
  EXPECT_EQ(rc.sim.dt_policy.value, 1e-3);
  EXPECT_EQ(rc.init.kind, InitKind::random_band);
  EXPECT_EQ(*rc.init.amplitude, 0.25);
  EXPECT_EQ(rc.init.seed, 42u);
  EXPECT_EQ(rc.init.band, 6);
  EXPECT_EQ(rc.sim.eos.method, EosMethod::krylov);
  EXPECT_EQ(rc.sim.eos.tol, 1e-11);
  EXPECT_EQ(rc.sim.eos.max_iter, 99);
  EXPECT_EQ(rc.output_dir, "out/here");
  EXPECT_EQ(rc.sim.sample_count, 7);
}

TEST(Config, UnknownKeyNamesLineAndKey) {
  const auto e = expect_error<UnknownKeyError>("grid.n = 32\n\nphysics.mu = 1\n");
  EXPECT_EQ(e.line(), 3);
  EXPECT_EQ(e.key(), "physics.mu");
  EXPECT_NE(std::string(e.what()).find("physics.mu"), std::string::npos);
  EXPECT_NE(std::string(e.what()).find(":3"), std::string::npos);
}

TEST(Config, DistinctErrorClasses) {
  EXPECT_EQ(expect_error<ConfigSyntaxError>("grid.n 32\n").line(), 1);
  EXPECT_EQ(expect_error<ConfigSyntaxError>("# c\n = 4\n").line(), 2);
  EXPECT_EQ(expect_error<ConfigSyntaxError>("grid.n =\n").key(), "grid.n");
  EXPECT_EQ(expect_error<ConfigValueError>("grid.n = 33\n").key(), "grid.n");
  EXPECT_EQ(expect_error<ConfigValueError>("physics.b = two\n").key(), "physics.b");
  EXPECT_EQ(expect_error<ConfigValueError>("physics.b = 2,5\n").key(), "physics.b");
  EXPECT_EQ(expect_error<ConfigValueError>("time.boosted = yes\n").key(), "time.boosted");
  EXPECT_EQ(expect_error<ConfigValueError>("time.scale = fast\n").key(), "time.scale");
  EXPECT_EQ(expect_error<ConfigValueError>("time.dt = 0.1\ntime.cfl = 0.5\n").key(), "time.cfl");
  EXPECT_EQ(expect_error<ConfigValueError>("grid.n = 16\ngrid.n = 32\n").line(), 2);
  EXPECT_EQ(expect_error<ConfigValueError>("eos.tol = -1\n").key(), "eos.tol");
  EXPECT_EQ(expect_error<ConfigValueError>("physics.b = inf\n").key(), "physics.b");
  expect_error<ConfigValueError>("time.boosted = true\n");  // boosted without friction
  expect_error<ConfigValueError>("experiment.workers = 2\n");  // experiment key without kind
}

struct CommaDecimal : std::numpunct<char> {
  char do_decimal_point() const override { return ','; }
  char do_thousands_sep() const override { return '.'; }
  std::string do_grouping() const override { return "\3"; }
};

TEST(Config, NumbersAreLocaleIndependent) {
  const std::locale saved = std::locale::global(std::locale(std::locale::classic(), new CommaDecimal));
  std::ostringstream probe;
  probe << 2.5;
  const RunConfig rc = parse_config("physics.b = 2.5\neos.tol = 1e-11\n");
  std::vector<NormRecord> recs(1);
  recs[0].l2 = 0.5;
  const std::string csv = format_series(recs, std::vector<double>{0.25});
  std::locale::global(saved);
  EXPECT_EQ(probe.str(), "2,5");  // the comma locale really was active
  EXPECT_EQ(rc.sim.b, 2.5);
  EXPECT_EQ(rc.sim.eos.tol, 1e-11);
  EXPECT_NE(csv.find("0,0.5,"), std::string::npos);
}

TEST(Config, ExperimentSection) {
  const RunConfig rc = parse_config(R"(experiment.kind = limit_critical
experiment.b_list = 4, 8,16 ,32
experiment.workers = 3
experiment.threshold.slope_lo = -1.5
grid.n = 64
init.amplitude = 0.2
time.t_end = 0.5
time.dt = 0.01
)");
  ASSERT_TRUE(rc.experiment);
  const ExperimentSpec& s = *rc.experiment;
  EXPECT_EQ(s.kind, ExperimentKind::limit_critical);
  EXPECT_EQ(s.b_list, (std::vector<double>{4, 8, 16, 32}));
  EXPECT_EQ(s.workers, 3);
  EXPECT_EQ(s.thresholds.at("slope_lo"), -1.5);
  EXPECT_EQ(s.thresholds.at("slope_hi"), -0.8);
  EXPECT_EQ(s.n, 64);
  EXPECT_EQ(*s.init.amplitude, 0.2);
  EXPECT_EQ(s.t_end, 0.5);
  EXPECT_EQ(s.dt, 0.01);
}

TEST(Config, ExperimentErrors) {
  expect_error<ConfigValueError>("experiment.kind = limit_critical\nexperiment.b_list = 8, 4\n");
  expect_error<ConfigValueError>("experiment.kind = nonsense\n");
  const auto e = expect_error<UnknownKeyError>("experiment.kind = w_scaling\nexperiment.threshold.speed = 1\n");
  EXPECT_EQ(e.line(), 2);
}

TEST(Config, LoadFileAndEnvOverride) {
  const fs::path p = scratch("a.cfg");
  write_text(p, "grid.n = 16\noutput.dir = from_file\n");
  ::unsetenv("DECM_OUTPUT_DIR");
  EXPECT_EQ(load_config(p).output_dir, "from_file");
  ::setenv("DECM_OUTPUT_DIR", "from_env", 1);
  EXPECT_EQ(load_config(p).output_dir, "from_env");
  ::unsetenv("DECM_OUTPUT_DIR");
  EXPECT_THROW(load_config(scratch("missing.cfg")), IoError);
  try {
    parse_config("bogus.key = 1\n", p.string());
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find(p.string() + ":1"), std::string::npos);
  }
}

TEST(Snapshot, RoundtripIsBitIdentical) {
  const ScalarField f = decm::test::noise(Grid(32), 77);
  const fs::path p = scratch("s.bin");
  save_snapshot(p, {f, 0.125, 3.5, ScaleTag::friction_boosted});
  EXPECT_EQ(fs::file_size(p), snapshot_size(32));
  EXPECT_EQ(fs::file_size(p), 6u + 4 + 8 + 8 + 1 + 8 * 32 * 32);
  const Snapshot s = load_snapshot(p);
  EXPECT_EQ(s.t, 0.125);
  EXPECT_EQ(s.b, 3.5);
  EXPECT_EQ(s.tag, ScaleTag::friction_boosted);
  ASSERT_EQ(s.field.grid().n(), 32);
  EXPECT_EQ(std::memcmp(s.field.data(), f.data(), 8 * 32 * 32), 0);
  const std::string raw = slurp(p);
  EXPECT_EQ(raw.substr(0, 6), "DECMF1");
  EXPECT_EQ(static_cast<unsigned char>(raw[6]), 32u);  // little-endian u32
  EXPECT_EQ(raw[7], 0);
}

TEST(Snapshot, CorruptFilesAreRejected) {
  const ScalarField f = decm::test::noise(Grid(16), 1);
  const fs::path p = scratch("c.bin");
  save_snapshot(p, {f, 0.0, 1.0, ScaleTag::laboratory});
  std::string raw = slurp(p);
  write_text(p, raw.substr(0, raw.size() - 1));
  EXPECT_THROW(load_snapshot(p), IoError);
  std::string bad = raw;
  bad[0] = 'X';
  write_text(p, bad);
  EXPECT_THROW(load_snapshot(p), IoError);
  bad = raw;
  bad[26] = 9;  // scale tag
  write_text(p, bad);
  EXPECT_THROW(load_snapshot(p), IoError);
  EXPECT_THROW(load_snapshot(scratch("nope.bin")), IoError);
  EXPECT_EQ(scale_tag(TimeScale::friction, true), ScaleTag::friction_boosted);
  EXPECT_EQ(scale_tag(TimeScale::gyration, false), ScaleTag::gyration);
}

TEST(Series, HeaderRowsAndLosslessFloats) {
  std::vector<NormRecord> recs(3);
  for (int i = 0; i < 3; ++i) {
    recs[i].t = 0.1 * i;
    recs[i].l2 = 1.0 / 3.0 + i;
    recs[i].l4 = std::sqrt(2.0);
    recs[i].linf = 1e-300;
    recs[i].h3 = 12345.678901234567;
  }
  const std::vector<double> res{0.0, -1.5e-17, 2.0 / 7.0};
  const std::string csv = format_series(recs, res);
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "t,l2,l4,linf,h_half,h3,mean,balance_residual");
  int rows = 0;
  while (std::getline(in, line)) {
    std::vector<double> v;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) v.push_back(std::strtod(cell.c_str(), nullptr));
    ASSERT_EQ(v.size(), 8u);
    EXPECT_EQ(v[0], recs[rows].t);
    EXPECT_EQ(v[1], recs[rows].l2);
    EXPECT_EQ(v[2], recs[rows].l4);
    EXPECT_EQ(v[3], recs[rows].linf);
    EXPECT_EQ(v[5], recs[rows].h3);
    EXPECT_EQ(v[7], res[rows]);
    ++rows;
  }
  EXPECT_EQ(rows, 3);
  std::swap(recs[0], recs[1]);
  EXPECT_THROW(format_series(recs, res), DomainError);
  EXPECT_THROW(format_series(recs, std::vector<double>{0.0}), DomainError);
}

TEST(Report, JsonIsRecheckable) {
  ExperimentReport r;
  r.spec = default_spec(ExperimentKind::temporal_convergence);
  r.members.push_back({"dt", 0.01, true, "", {{"steps", 100.0}}});
  r.members.push_back({"dt", 0.02, false, "EoS did not converge", {}});
  r.fits["ratio_1"] = 7.9;
  r.checks.push_back({"min_ratio", 7.9, 6.0, 10.0, false, true});
  r.checks.push_back({"inf", INFINITY, -INFINITY, 1.0, true, false});
  r.pass = false;
  const auto j = nlohmann::json::parse(report_json(r));
  EXPECT_EQ(j["spec"]["kind"], "temporal_convergence");
  EXPECT_EQ(j["spec"]["thresholds"]["ratio_lo"], 6.0);
  EXPECT_EQ(j["members"][1]["error"], "EoS did not converge");
  EXPECT_EQ(j["checks"][0]["value"], 7.9);
  EXPECT_EQ(j["checks"][1]["value"], "inf");
  EXPECT_EQ(j["checks"][1]["lo"], "-inf");
  EXPECT_FALSE(j["pass"].get<bool>());
  for (const auto& c : j["checks"]) {
    if (!c["value"].is_number()) continue;
    const double v = c["value"], lo = c["lo"], hi = c["hi"];
    EXPECT_EQ(c["pass"].get<bool>(), v >= lo && v <= hi);
  }
}
