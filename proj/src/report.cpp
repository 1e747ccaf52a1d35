#include <cmath>

#include <json.hpp>

#include "decm/io.hpp"

namespace decm {

namespace {

using nlohmann::ordered_json;

// JSON has no infinities or NaN; those become strings so a report stays loadable.
ordered_json num(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

ordered_json num_map(const std::map<std::string, double>& m) {
  ordered_json j = ordered_json::object();
  for (const auto& [k, v] : m) j[k] = num(v);
  return j;
}

ordered_json num_list(const std::vector<double>& v) {
  ordered_json j = ordered_json::array();
  for (double x : v) j.push_back(num(x));
  return j;
}

}  // namespace

std::string report_json(const ExperimentReport& r) {
  const ExperimentSpec& s = r.spec;
  ordered_json spec = {
      {"kind", to_string(s.kind)},
      {"n", s.n},
      {"init",
       {{"kind", to_string(s.init.kind)},
        {"amplitude", s.init.amplitude ? num(*s.init.amplitude) : ordered_json(nullptr)},
        {"seed", s.init.seed},
        {"band", s.init.band}}},
      {"b_list", num_list(s.b_list)},
      {"eps_list", num_list(s.eps_list)},
      {"dt_list", num_list(s.dt_list)},
      {"t_end", num(s.t_end)},
      {"dt", num(s.dt)},
      {"sample_count", s.sample_count},
      {"trials", s.trials},
      {"eos", {{"method", to_string(s.eos.method)}, {"tol", num(s.eos.tol)}, {"max_iter", s.eos.max_iter}}},
      {"thresholds", num_map(s.thresholds)},
      {"workers", s.workers},
  };
  ordered_json members = ordered_json::array();
  for (const auto& m : r.members) {
    ordered_json j = {{"label", m.label}, {"param", num(m.param)}, {"ok", m.ok}};
    if (!m.ok) j["error"] = m.error;
    j["values"] = num_map(m.values);
    members.push_back(std::move(j));
  }
  ordered_json checks = ordered_json::array();
  for (const auto& c : r.checks)
    checks.push_back({{"name", c.name},
                      {"value", num(c.value)},
                      {"lo", num(c.lo)},
                      {"hi", num(c.hi)},
                      {"strict", c.strict},
                      {"pass", c.pass}});
  ordered_json out = {{"spec", spec},     {"members", members},       {"fits", num_map(r.fits)},
                      {"checks", checks}, {"pass", r.pass},           {"wall_seconds", num(r.wall_seconds)}};
  return out.dump(2) + "\n";
}

void write_report(const std::filesystem::path& path, const ExperimentReport& report) {
  write_text(path, report_json(report));
}

}  // namespace decm
