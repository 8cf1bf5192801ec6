#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "varexp/jsonio.hpp"
#include "varexp/scenarios.hpp"

using namespace varexp;
using nlohmann::json;

TEST_CASE("field and exponent JSON round trips") {
  auto dom = make_rectangle(VecN(0.0, 0.0), VecN(1.0, 1.0), 17);
  auto f = sample_vector(dom, [](const VecN& x) { return VecN(x[0] * x[1], std::sin(x[0])); });
  auto j = field_to_json(f);
  CHECK(j["rank"] == 1);
  CHECK(j["shape"][0] == 17);
  auto back = field_from_json(dom, j);
  for (size_t i = 0; i < f.v.size(); ++i) CHECK(back.v[i] == f.v[i]);

  auto p = build_linear_ramp(dom, 1.4, 2.0, 0);
  auto jp = exponent_to_json(p);
  auto pb = exponent_from_json(dom, jp);
  CHECK(pb.p_minus == p.p_minus);
  CHECK(pb.p_plus == p.p_plus);
  for (size_t i = 0; i < p.values.size(); ++i) CHECK(pb.values[i] == p.values[i]);

  auto cubes = whitney_decomposition(*dom);
  auto jw = whitney_to_json(cubes);
  auto wb = whitney_from_json(jw, 2);
  REQUIRE(wb.size() == cubes.size());
  for (size_t i = 0; i < cubes.size(); ++i) {
    CHECK(wb[i].side == cubes[i].side);
    CHECK(wb[i].level == cubes[i].level);
  }

  NormResult nr;
  nr.value = 3.5;
  nr.modular_at_value = 1.0;
  nr.iterations = 41;
  nr.bracket_lo = 1.0;
  nr.bracket_hi = 8.0;
  auto jn = norm_result_to_json(nr);
  CHECK(jn["value"] == 3.5);
  CHECK(jn["iterations"] == 41);
  CHECK(jn["bracket"][1] == 8.0);

  auto u = sample_vector(dom, [](const VecN& x) { return VecN(x[0] + 0.01 * x[1] * x[1], x[1]); });
  auto rep = rigidity_report(u, p);
  auto jr = report_to_json(rep);
  CHECK(jr["ratio"] == rep.ratio);
  CHECK(jr["lhs_norm"] == rep.lhs_norm);
  CHECK(jr["grid_h"] == dom->h);
  CHECK(jr["exponent_summary"]["p_minus"] == p.p_minus);
  CHECK(jr["rotation_or_skew"].size() == 4);
}

TEST_CASE("rigidity scenario row counting contract") {
  json cfg = {{"scenario", "rigidity"},
              {"rng_seed", 11},
              {"sweep", {{"eps", {1e-3, 1e-2, 1e-1}}, {"seeds", 20}, {"resolutions", {65}}}}};
  auto res = run_scenario(cfg);
  int rows = int(std::count(res.csv.begin(), res.csv.end(), '\n')) - 1;
  CHECK(rows == 20 * 3);
  CHECK(!res.numeric_failure);
}

TEST_CASE("same config and seed reproduce byte-identical CSV") {
  json cfg = {{"scenario", "lusin"},
              {"rng_seed", 99},
              {"sweep", {{"lambda", {2.5}}, {"seeds", 2}, {"resolutions", {17}}}}};
  auto a = run_scenario(cfg);
  auto b = run_scenario(cfg);
  CHECK(a.csv == b.csv);
  CHECK(a.meta.at("rng") == "splitmix64");
}

TEST_CASE("config overrides follow dot paths") {
  json cfg = {{"scenario", "norm"}, {"sweep", {{"seeds", 100}}}};
  auto out = apply_overrides(cfg, {"sweep.seeds=5", "exponent.kind=constant",
                                   "exponent.value=1.7", "rng_seed=3"});
  CHECK(out["sweep"]["seeds"] == 5);
  CHECK(out["exponent"]["kind"] == "constant");
  CHECK(out["exponent"]["value"] == 1.7);
  CHECK(out["rng_seed"] == 3);
  CHECK_THROWS(apply_overrides(cfg, {"no_equals_sign"}));
}

TEST_CASE("exit codes: validation errors vs clean runs") {
  namespace fs = std::filesystem;
  auto tmp = fs::temp_directory_path() / "varexp_cli_test";
  fs::remove_all(tmp);

  json bad = {{"scenario", "definitely-not-a-scenario"}};
  CHECK(run_scenario_to_dir(bad, tmp.string()) == 2);

  json bad2 = {{"scenario", "norm"}, {"exponent", {{"kind", "linear-ramp"}, {"p0", 0.5}}}};
  CHECK(run_scenario_to_dir(bad2, tmp.string()) == 2);

  json ok = {{"scenario", "norm"},
             {"rng_seed", 1},
             {"domain", {{"resolution", 17}}},
             {"sweep", {{"seeds", 3}}}};
  CHECK(run_scenario_to_dir(ok, tmp.string()) == 0);
  CHECK(fs::exists(tmp / "data.csv"));
  CHECK(fs::exists(tmp / "meta.json"));
  std::ifstream meta(tmp / "meta.json");
  json m;
  meta >> m;
  CHECK(m["config"]["scenario"] == "norm");
  CHECK(m["version"] == kToolVersion);
  fs::remove_all(tmp);
}

TEST_CASE("every CSV cell is finite in a default gamma run") {
  json cfg = {{"scenario", "gamma"},
              {"rng_seed", 5},
              {"domain", {{"shape", "lshape"}, {"resolution", 17}}},
              {"sweep", {{"eps", {1e-1, 1e-2}}}}};
  auto res = run_scenario(cfg);
  std::istringstream in(res.csv);
  std::string line;
  std::getline(in, line);  // header
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    std::istringstream cells(line);
    std::string cell;
    while (std::getline(cells, cell, ',')) {
      double v = std::stod(cell);
      CHECK(std::isfinite(v));
    }
  }
  CHECK(rows == 2);
}
