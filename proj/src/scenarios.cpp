#include "varexp/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "varexp/jsonio.hpp"
#include "varexp/linearize.hpp"
#include "varexp/rigidity.hpp"
#include "varexp/rng.hpp"
#include "varexp/rotgeo.hpp"
#include "varexp/varnorm.hpp"

namespace varexp {

const char* kToolVersion = "0.1.0";

namespace {

using nlohmann::json;

double jget(const json& j, const char* key, double dflt) {
  return j.contains(key) ? j.at(key).get<double>() : dflt;
}
int jget(const json& j, const char* key, int dflt) {
  return j.contains(key) ? j.at(key).get<int>() : dflt;
}

std::vector<double> jlist(const json& j, const char* key, std::vector<double> dflt) {
  if (!j.contains(key)) return dflt;
  return j.at(key).get<std::vector<double>>();
}
std::vector<int> jlist_int(const json& j, const char* key, std::vector<int> dflt) {
  if (!j.contains(key)) return dflt;
  return j.at(key).get<std::vector<int>>();
}

MatN rot2(double theta) {
  MatN r(2);
  r(0, 0) = std::cos(theta);
  r(0, 1) = -std::sin(theta);
  r(1, 0) = std::sin(theta);
  r(1, 1) = std::cos(theta);
  return r;
}

struct CsvWriter {
  std::ostringstream out;
  explicit CsvWriter(const std::string& header) { out << header << "\n"; }
  void row(const std::vector<std::string>& cells) {
    for (size_t i = 0; i < cells.size(); ++i) {
      if (i) out << ",";
      out << cells[i];
    }
    out << "\n";
  }
};

std::string si(int64_t v) { return std::to_string(v); }

}  // namespace

DomainPtr domain_from_config(const json& cfg) {
  std::string shape = cfg.contains("shape") ? cfg.at("shape").get<std::string>() : "rectangle";
  int res = jget(cfg, "resolution", 33);
  if (shape == "rectangle") {
    auto lo = jlist(cfg, "lo", {0.0, 0.0});
    auto hi = jlist(cfg, "hi", {1.0, 1.0});
    if (lo.size() == 2) return make_rectangle(VecN(lo[0], lo[1]), VecN(hi[0], hi[1]), res);
    return make_rectangle(VecN(lo[0], lo[1], lo[2]), VecN(hi[0], hi[1], hi[2]), res);
  }
  if (shape == "lshape") return make_lshape(res, jget(cfg, "dim", 2));
  if (shape == "disk") {
    auto c = jlist(cfg, "center", {0.0, 0.0});
    double r = jget(cfg, "radius", 0.5);
    if (c.size() == 2) return make_disk(VecN(c[0], c[1]), r, res);
    return make_disk(VecN(c[0], c[1], c[2]), r, res);
  }
  if (shape == "graph-halfspace") {
    auto lo = jlist(cfg, "lo", {-1.0, -1.0});
    auto hi = jlist(cfg, "hi", {1.0, 1.0});
    return make_graph_halfspace(jget(cfg, "slope", 0.3), jget(cfg, "intercept", 0.0),
                                Box(VecN(lo[0], lo[1]), VecN(hi[0], hi[1])), res);
  }
  throw std::invalid_argument("unknown domain shape: " + shape);
}

ExponentField exponent_from_config(const json& cfg, const DomainPtr& dom) {
  std::string kind = cfg.contains("kind") ? cfg.at("kind").get<std::string>() : "linear-ramp";
  if (kind == "constant") return build_constant(dom, jget(cfg, "value", 2.0));
  if (kind == "linear-ramp")
    return build_linear_ramp(dom, jget(cfg, "p0", 1.4), jget(cfg, "p1", 2.0),
                             jget(cfg, "axis", 0));
  if (kind == "smooth-bump") {
    auto c = jlist(cfg, "center", {0.5, 0.5});
    VecN center = dom->n == 2 ? VecN(c[0], c[1]) : VecN(c[0], c[1], c[2]);
    return build_smooth_bump(dom, jget(cfg, "base", 1.5), jget(cfg, "amp", 0.3), center,
                             jget(cfg, "width", 0.25));
  }
  if (kind == "checkerboard")
    return build_checkerboard(dom, jget(cfg, "pa", 1.2), jget(cfg, "pb", 1.8),
                              jget(cfg, "tiles", 4));
  throw std::invalid_argument("unknown exponent kind: " + kind);
}

TensorField perturbation_field(const DomainPtr& dom, uint64_t seed) {
  SplitMix64 rng(seed);
  const int terms = 2;
  struct Mode {
    double ax, ay, wx, wy, phx, phy;
  };
  std::array<Mode, terms> modes{};
  for (auto& m : modes) {
    m.ax = rng.uniform(0.3, 1.0);
    m.ay = rng.uniform(0.3, 1.0);
    m.wx = rng.uniform(1.0, 4.0);
    m.wy = rng.uniform(1.0, 4.0);
    m.phx = rng.uniform(0.0, 6.283185307179586);
    m.phy = rng.uniform(0.0, 6.283185307179586);
  }
  return sample_vector(dom, [modes](const VecN& x) {
    VecN v(x.n);
    for (const auto& m : modes) {
      v[0] += m.ax * std::sin(m.wx * x[0] + m.wy * x[1] + m.phx);
      v[1] += m.ay * std::sin(m.wy * x[0] + m.wx * x[1] + m.phy);
    }
    return v;
  });
}

namespace {

TensorField random_scalar_field(const DomainPtr& dom, uint64_t seed, double lo, double hi) {
  SplitMix64 rng(seed);
  TensorField f(dom, 0);
  for (int64_t idx = 0; idx < dom->num_nodes(); ++idx) f.at(idx) = rng.uniform(lo, hi);
  return f;
}

ScenarioResult scenario_norm(const json& cfg) {
  auto dom = domain_from_config(cfg.value("domain", json::object()));
  auto p = exponent_from_config(cfg.value("exponent", json::object()), dom);
  int seeds = jget(cfg.value("sweep", json::object()), "seeds", 100);
  uint64_t base = uint64_t(jget(cfg, "rng_seed", 42));

  CsvWriter csv("seed,scale,norm,modular_at_norm,iterations,bracket_ok,homog_defect");
  ScenarioResult res;
  double worst_homog = 0;
  for (int s = 0; s < seeds; ++s) {
    SplitMix64 rng(base * 1000003ull + s);
    double scale = std::pow(10.0, rng.uniform(-1.5, 1.5));
    auto f = random_scalar_field(dom, base * 7919ull + s, 0.0, scale);
    auto nr = luxemburg_norm(f, p);
    double rho = modular(f, p);
    bool ok = true;
    if (nr.value > 0) {
      if (nr.value <= 1.0)
        ok = std::pow(nr.value, p.p_plus) <= rho + 1e-8 && rho <= std::pow(nr.value, p.p_minus) + 1e-8;
      else
        ok = std::pow(nr.value, p.p_minus) <= rho + 1e-8 && rho <= std::pow(nr.value, p.p_plus) + 1e-8;
    }
    TensorField f10(dom, 0);
    for (int64_t i = 0; i < dom->num_nodes(); ++i) f10.at(i) = 10.0 * f.at(i);
    double defect = nr.value > 0
                        ? std::abs(luxemburg_norm(f10, p).value - 10.0 * nr.value) / (10.0 * nr.value)
                        : 0.0;
    worst_homog = std::max(worst_homog, defect);
    if (!ok) res.numeric_failure = true;
    csv.row({si(s), csv_num(scale), csv_num(nr.value), csv_num(nr.modular_at_value),
             si(nr.iterations), si(ok ? 1 : 0), csv_num(defect)});
  }
  res.csv = csv.out.str();
  res.meta["fitted"]["max_homogeneity_defect"] = worst_homog;
  return res;
}

ScenarioResult scenario_rigidity_like(const json& cfg, bool korn) {
  json sweep = cfg.value("sweep", json::object());
  auto eps_list = jlist(sweep, "eps", {1e-3, 1e-2, 1e-1});
  std::sort(eps_list.begin(), eps_list.end());
  int seeds = jget(sweep, "seeds", 20);
  auto res_list = jlist_int(sweep, "resolutions", {33, 65});
  uint64_t base = uint64_t(jget(cfg, "rng_seed", 42));

  CsvWriter csv("resolution,eps,seed,lhs,rhs,ratio,exact_zero");
  ScenarioResult out;
  double rmin = 1e300, rmax = 0;
  for (int res : res_list) {
    json dj = cfg.value("domain", json::object());
    dj["resolution"] = res;
    auto dom = domain_from_config(dj);
    auto p = exponent_from_config(cfg.value("exponent", json::object()), dom);
    double clog = log_holder_constant(p);
    for (double eps : eps_list) {
      for (int s = 0; s < seeds; ++s) {
        SplitMix64 rng(base * 104729ull + s);
        MatN r0 = rot2(rng.uniform(0.0, 6.283185307179586));
        auto xi = perturbation_field(dom, base * 7919ull + s);
        auto u = sample_vector(dom, [&](const VecN& x) { return r0.mul(x); });
        for (int64_t idx = 0; idx < dom->num_nodes(); ++idx) {
          VecN v = u.vec_at(idx) + eps * r0.mul(xi.vec_at(idx));
          u.set_vec(idx, v);
        }
        RigidityReport rep = korn ? korn_report(u, p, clog) : rigidity_report(u, p, clog);
        if (!rep.exact_zero && std::isfinite(rep.ratio)) {
          rmin = std::min(rmin, rep.ratio);
          rmax = std::max(rmax, rep.ratio);
        }
        if (!std::isfinite(rep.ratio) && !rep.exact_zero) out.numeric_failure = true;
        csv.row({si(res), csv_num(eps), si(s), csv_num(rep.lhs_norm), csv_num(rep.rhs_norm),
                 csv_num(rep.ratio), si(rep.exact_zero ? 1 : 0)});
      }
    }
  }
  out.csv = csv.out.str();
  out.meta["fitted"]["ratio_min"] = rmin;
  out.meta["fitted"]["ratio_max"] = rmax;
  return out;
}

ScenarioResult scenario_poincare(const json& cfg) {
  json sweep = cfg.value("sweep", json::object());
  auto deltas = jlist(sweep, "delta", {0.2, 0.1, 0.05});
  auto res_list = jlist_int(sweep, "resolutions", {33});

  CsvWriter csv("resolution,kind,delta,lhs,rhs,ratio");
  ScenarioResult out;
  double rmax = 0;
  for (int res : res_list) {
    json dj = cfg.value("domain", json::object());
    dj["resolution"] = res;
    auto dom = domain_from_config(dj);
    auto p = exponent_from_config(cfg.value("exponent", json::object()), dom);
    auto lin = sample_scalar(dom, [](const VecN& x) { return x[0]; });
    auto rep = weighted_poincare_report(lin, p);
    csv.row({si(res), si(0), csv_num(0.0), csv_num(rep.lhs_norm), csv_num(rep.rhs_norm),
             csv_num(rep.ratio)});
    rmax = std::max(rmax, rep.ratio);
    for (double delta : deltas) {
      TensorField layer(dom, 0);
      for (int64_t idx = 0; idx < dom->num_nodes(); ++idx)
        layer.at(idx) = std::exp(-dom->bdist[idx] / delta);
      auto lr = weighted_poincare_report(layer, p);
      csv.row({si(res), si(1), csv_num(delta), csv_num(lr.lhs_norm), csv_num(lr.rhs_norm),
               csv_num(lr.ratio)});
      rmax = std::max(rmax, lr.ratio);
      if (!std::isfinite(lr.ratio)) out.numeric_failure = true;
    }
  }
  out.csv = csv.out.str();
  out.meta["fitted"]["ratio_max"] = rmax;
  return out;
}

ScenarioResult scenario_mixed(const json& cfg) {
  json sweep = cfg.value("sweep", json::object());
  auto mus = jlist(sweep, "mu", {1.0, 2.0, 4.0});
  std::sort(mus.begin(), mus.end());
  int seeds = jget(sweep, "seeds", 5);
  uint64_t base = uint64_t(jget(cfg, "rng_seed", 42));

  json dj = cfg.value("domain", json::object());
  auto dom = domain_from_config(dj);
  auto p = exponent_from_config(cfg.value("exponent", json::object()), dom);

  CsvWriter csv("mu,seed,residual,ratio_F,ratio_G,failure,recursion_levels");
  ScenarioResult out;
  for (double mu : mus) {
    for (int s = 0; s < seeds; ++s) {
      SplitMix64 rng(base * 50021ull + s);
      MatN r0 = rot2(rng.uniform(0.0, 6.283185307179586));
      auto xi = perturbation_field(dom, base * 7919ull + s);
      auto u = sample_vector(dom, [&](const VecN& x) { return r0.mul(x); });
      for (int64_t idx = 0; idx < dom->num_nodes(); ++idx)
        u.set_vec(idx, u.vec_at(idx) + 0.02 * r0.mul(xi.vec_at(idx)));
      auto grad = gradient(u);
      TensorField fb(dom, 0), gb(dom, 0);
      double cutoff = rng.uniform(0.3, 0.7);
      for (int64_t idx = 0; idx < dom->num_nodes(); ++idx) {
        if (!dom->active[idx]) continue;
        double dist = dist_SO(grad.mat_at(idx));
        if (dom->point(idx)[0] < dom->origin[0] + cutoff * (dom->shape.bbox.hi[0] - dom->origin[0]))
          fb.at(idx) = dist;
        else
          gb.at(idx) = dist;
      }
      ExponentField q;
      q.dom = dom;
      q.values.resize(p.values.size());
      for (size_t i = 0; i < p.values.size(); ++i) q.values[i] = mu * p.values[i];
      q.p_minus = mu * p.p_minus;
      q.p_plus = mu * p.p_plus;
      MixedSplit split{fb, gb, p, q};
      auto mr = mixed_rigidity_decompose(u, split, mu);
      if (mr.failure) out.numeric_failure = true;
      csv.row({csv_num(mu), si(s), csv_num(mr.residual_inf), csv_num(mr.ratio_F),
               csv_num(mr.ratio_G), si(mr.failure ? 1 : 0), si(mr.recursion_levels)});
    }
  }
  out.csv = csv.out.str();
  return out;
}

ScenarioResult scenario_extend(const json& cfg) {
  json sweep = cfg.value("sweep", json::object());
  auto res_list = jlist_int(sweep, "resolutions", {65, 129});
  double slope = jget(cfg.value("domain", json::object()), "slope", 0.3);

  CsvWriter csv("resolution,kind,r,residual,residual_interior,modular_outside,moment0,moment1");
  ScenarioResult out;
  for (int res : res_list) {
    Box clip(VecN(-1.0, -1.0), VecN(1.0, 1.0));
    auto dom = make_graph_halfspace(slope, 0.0, clip, res);
    auto p = build_linear_ramp(dom, 1.4, 1.9, 0);
    auto q = build_linear_ramp(dom, 1.6, 2.1, 0);

    MatN a(2);
    a(0, 0) = 0.8;
    a(0, 1) = 0.5;
    a(1, 0) = -0.1;
    a(1, 1) = 0.0;
    MatN asym = a.sym();
    auto u = sample_vector(dom, [&](const VecN& x) { return a.mul(x); });
    auto f = sample_matrix(dom, [&](const VecN&) { return asym; });
    auto g0 = sample_matrix(dom, [](const VecN&) { return MatN(2); });
    auto r_aff = nitsche_extend(u, f, g0, p, q, slope, 1.0);
    csv.row({si(res), si(0), csv_num(r_aff.r), csv_num(r_aff.residual_inf),
             csv_num(r_aff.residual_inf_interior), csv_num(r_aff.modular_f_outside),
             csv_num(r_aff.moment0), csv_num(r_aff.moment1)});

    auto us = sample_vector(dom, [&](const VecN& x) {
      return VecN(0.1 * std::sin(x[0] + x[1]), 0.1 * x[0] * x[1]);
    });
    auto eus = sym_gradient(us);
    TensorField fs(dom, 2);
    for (int64_t idx = 0; idx < dom->num_nodes(); ++idx) fs.set_mat(idx, eus.mat_at(idx));
    // normalize f to unit norm for the modular bound record
    double nf = luxemburg_norm(fs, p).value;
    TensorField fsn(dom, 2);
    TensorField usn(dom, 1);
    for (size_t i = 0; i < fs.v.size(); ++i) fsn.v[i] = fs.v[i] / nf;
    for (size_t i = 0; i < us.v.size(); ++i) usn.v[i] = us.v[i] / nf;
    auto r_smooth = nitsche_extend(usn, fsn, g0, p, q, slope, 1.0);
    csv.row({si(res), si(1), csv_num(r_smooth.r), csv_num(r_smooth.residual_inf),
             csv_num(r_smooth.residual_inf_interior), csv_num(r_smooth.modular_f_outside),
             csv_num(r_smooth.moment0), csv_num(r_smooth.moment1)});
    if (r_aff.residual_inf > 10 * r_aff.out_dom->h) out.numeric_failure = true;
  }
  out.csv = csv.out.str();
  return out;
}

ScenarioResult scenario_lusin(const json& cfg) {
  json sweep = cfg.value("sweep", json::object());
  auto lambdas = jlist(sweep, "lambda", {2.5, 4.0});
  std::sort(lambdas.begin(), lambdas.end());
  int seeds = jget(sweep, "seeds", 20);
  auto res_list = jlist_int(sweep, "resolutions", {33, 65});
  uint64_t base = uint64_t(jget(cfg, "rng_seed", 42));

  CsvWriter csv(
      "resolution,lambda,seed,changed_count,changed_measure,rhs_iii,const_i,const_iii,inclusion_ok");
  ScenarioResult out;
  for (int res : res_list) {
    json dj = cfg.value("domain", json::object());
    dj["resolution"] = res;
    auto dom = domain_from_config(dj);
    for (double lambda : lambdas) {
      for (int s = 0; s < seeds; ++s) {
        auto xi = perturbation_field(dom, base * 7919ull + s);
        SplitMix64 rng(base * 31337ull + s);
        // smooth base + localized steep bumps so the truncation bites
        VecN c1(rng.uniform(0.2, 0.8), rng.uniform(0.2, 0.8));
        auto u = sample_vector(dom, [&](const VecN& x) {
          double r2 = (x - c1).dot(x - c1);
          double spike = 0.6 * std::exp(-r2 / 0.01);
          return VecN(spike, -0.5 * spike);
        });
        for (int64_t idx = 0; idx < dom->num_nodes(); ++idx)
          u.set_vec(idx, u.vec_at(idx) + 0.25 * xi.vec_at(idx));

        auto lres = lusin_truncate(u, lambda);
        // inclusion (ii) as node sets
        auto grad = gradient(u);
        TensorField ag(dom, 0);
        for (int64_t idx = 0; idx < dom->num_nodes(); ++idx)
          if (dom->active[idx]) ag.at(idx) = grad.abs_at(idx);
        auto mg = maximal_function(ag, MaximalMode::Local);
        bool inclusion = true;
        for (int64_t idx = 0; idx < dom->num_nodes(); ++idx)
          if (lres.changed[idx] && !(mg.at(idx) > lambda)) inclusion = false;
        double const_iii =
            lres.rhs_iii > 0 ? lres.changed_measure / lres.rhs_iii : 0.0;
        if (!inclusion) out.numeric_failure = true;
        csv.row({si(res), csv_num(lambda), si(s), si(lres.changed_count),
                 csv_num(lres.changed_measure), csv_num(lres.rhs_iii),
                 csv_num(lres.grad_inf_ratio), csv_num(const_iii), si(inclusion ? 1 : 0)});
      }
    }
  }
  out.csv = csv.out.str();
  return out;
}

TensorField gamma_boundary_data(const DomainPtr& dom, double scale, double bump) {
  return sample_vector(dom, [=](const VecN& x) {
    return VecN(scale * x[1] + bump * std::sin(2 * 3.141592653589793 * x[1]),
                scale * x[0] + bump * std::sin(2 * 3.141592653589793 * x[0]));
  });
}

ScenarioResult scenario_gamma(const json& cfg) {
  json dj = cfg.value("domain", json::object());
  if (!dj.contains("shape")) dj["shape"] = "lshape";
  auto dom = domain_from_config(dj);
  json ej = cfg.value("exponent", json::object());
  if (!ej.contains("p0")) ej["p0"] = 1.3;
  if (!ej.contains("p1")) ej["p1"] = 2.0;
  auto p = exponent_from_config(ej, dom);
  auto eps_list = jlist(cfg.value("sweep", json::object()), "eps", {1e-1, 1e-2, 1e-3});
  std::sort(eps_list.begin(), eps_list.end(), std::greater<double>());
  double scale = jget(cfg, "data_scale", 0.1);
  double bump = jget(cfg, "data_bump", 0.02);

  auto spec = make_energy_spec(dom, p, gamma_boundary_data(dom, scale, bump), eps_list);
  auto table = gamma_convergence_experiment(spec);

  CsvWriter csv(
      "eps,F_eps,gap,wp_dist,modular,compactness_rhs,tail_1,tail_2,tail_5,tail_10,iters,flag");
  ScenarioResult out;
  for (const auto& r : table.rows) {
    if (r.flag & 4) out.numeric_failure = true;
    csv.row({csv_num(r.eps), csv_num(r.F_eps), csv_num(r.gap), csv_num(r.wp_dist),
             csv_num(r.modular), csv_num(r.compactness_rhs), csv_num(r.tail_1), csv_num(r.tail_2),
             csv_num(r.tail_5), csv_num(r.tail_10), si(r.iters), si(r.flag)});
  }
  out.csv = csv.out.str();
  out.meta["fitted"]["min_F"] = table.min_F;
  out.meta["fitted"]["norm_grad_star"] = table.norm_grad_star;
  json rec = json::array(), off = json::array(), poin = json::array();
  for (const auto& r : table.rows) {
    rec.push_back(r.recovery_strain_l2);
    off.push_back(r.offwell_energy);
    poin.push_back(r.poincare2_const);
  }
  out.meta["fitted"]["recovery_strain_l2"] = rec;
  out.meta["fitted"]["offwell_energy"] = off;
  out.meta["fitted"]["poincare2_const"] = poin;
  return out;
}

ScenarioResult scenario_whitney(const json& cfg) {
  auto dom = domain_from_config(cfg.value("domain", json::object()));
  auto cubes = whitney_decomposition(*dom);
  double sqn = std::sqrt(double(dom->n));

  CsvWriter csv("cx,cy,cz,halfwidth,level,dist,lower_ok,upper_ok");
  ScenarioResult out;
  bool all_ok = true;
  for (const auto& q : cubes) {
    double dist = dom->shape.boundary_distance(q.box());
    bool lower = dist >= sqn * q.side;
    bool upper = dist <= 4.0 * sqn * q.side;
    all_ok = all_ok && lower && upper;
    csv.row({csv_num(q.center[0]), csv_num(q.center[1]),
             csv_num(dom->n == 3 ? q.center[2] : 0.0), csv_num(q.side / 2), si(q.level),
             csv_num(dist), si(lower ? 1 : 0), si(upper ? 1 : 0)});
  }
  auto checks = whitney_node_checks(*dom, cubes);
  if (!all_ok || checks.uncovered_interior > 0) out.numeric_failure = true;
  out.csv = csv.out.str();
  out.meta["fitted"]["count"] = cubes.size();
  out.meta["fitted"]["overlap_N"] = checks.max_overlap;
  out.meta["fitted"]["uncovered_interior_nodes"] = checks.uncovered_interior;
  out.meta["cubes"] = whitney_to_json(cubes);
  return out;
}

ScenarioResult scenario_maximal(const json& cfg) {
  json sweep = cfg.value("sweep", json::object());
  auto res_list = jlist_int(sweep, "resolutions", {33, 65});

  CsvWriter csv("resolution,field,norm_ratio,sigma_max");
  ScenarioResult out;
  for (int res : res_list) {
    json dj = cfg.value("domain", json::object());
    dj["resolution"] = res;
    auto dom = domain_from_config(dj);
    auto p = exponent_from_config(cfg.value("exponent", json::object()), dom);
    std::vector<std::pair<std::string, TensorField>> fields;
    fields.push_back({"bump", sample_scalar(dom, [](const VecN& x) {
                        double r2 = (x[0] - 0.3) * (x[0] - 0.3) + (x[1] - 0.6) * (x[1] - 0.6);
                        return std::exp(-r2 / 0.02);
                      })});
    fields.push_back({"half", sample_scalar(dom, [](const VecN& x) {
                        return x[0] <= 0.5 ? 1.0 : 0.0;
                      })});
    int fk = 0;
    for (auto& [name, f] : fields) {
      auto ml = maximal_function(f, MaximalMode::Local);
      auto mgl = maximal_function(f, MaximalMode::Global);
      double norm_ratio = luxemburg_norm(ml, p).value / luxemburg_norm(f, p).value;
      double sigma = 0;
      for (int64_t idx = 0; idx < dom->num_nodes(); ++idx) {
        if (!dom->active[idx] || mgl.at(idx) <= 0) continue;
        sigma = std::max(sigma, ml.at(idx) / mgl.at(idx));
      }
      csv.row({si(res), si(fk++), csv_num(norm_ratio), csv_num(sigma)});
      if (!std::isfinite(norm_ratio)) out.numeric_failure = true;
    }
  }
  out.csv = csv.out.str();
  return out;
}

}  // namespace

ScenarioResult run_scenario(const json& config) {
  if (!config.contains("scenario"))
    throw std::invalid_argument("config missing 'scenario'");
  std::string name = config.at("scenario").get<std::string>();
  ScenarioResult res;
  if (name == "norm")
    res = scenario_norm(config);
  else if (name == "rigidity")
    res = scenario_rigidity_like(config, false);
  else if (name == "korn")
    res = scenario_rigidity_like(config, true);
  else if (name == "poincare")
    res = scenario_poincare(config);
  else if (name == "mixed")
    res = scenario_mixed(config);
  else if (name == "extend")
    res = scenario_extend(config);
  else if (name == "lusin")
    res = scenario_lusin(config);
  else if (name == "gamma")
    res = scenario_gamma(config);
  else if (name == "whitney")
    res = scenario_whitney(config);
  else if (name == "maximal")
    res = scenario_maximal(config);
  else
    throw std::invalid_argument("unknown scenario: " + name);
  res.meta["config"] = config;
  res.meta["version"] = kToolVersion;
  res.meta["rng"] = "splitmix64";
  return res;
}

json apply_overrides(json config, const std::vector<std::string>& sets) {
  for (const auto& kv : sets) {
    auto pos = kv.find('=');
    if (pos == std::string::npos)
      throw std::invalid_argument("--set requires key=value, got: " + kv);
    std::string key = kv.substr(0, pos);
    std::string val = kv.substr(pos + 1);
    json parsed;
    try {
      parsed = json::parse(val);
    } catch (...) {
      parsed = val;  // plain string
    }
    json* node = &config;
    size_t start = 0;
    while (true) {
      size_t dot = key.find('.', start);
      std::string part = key.substr(start, dot == std::string::npos ? dot : dot - start);
      if (dot == std::string::npos) {
        (*node)[part] = parsed;
        break;
      }
      node = &(*node)[part];
      start = dot + 1;
    }
  }
  return config;
}

int run_scenario_to_dir(const json& config, const std::string& out_dir) {
  ScenarioResult res;
  try {
    res = run_scenario(config);
  } catch (const std::invalid_argument& e) {
    fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    fprintf(stderr, "numerical failure: %s\n", e.what());
    return 3;
  }
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  {
    std::ofstream csv(fs::path(out_dir) / "data.csv", std::ios::binary);
    if (!csv) {
      fprintf(stderr, "cannot write to %s\n", out_dir.c_str());
      return 2;
    }
    csv << res.csv;
  }
  {
    std::ofstream meta(fs::path(out_dir) / "meta.json", std::ios::binary);
    meta << res.meta.dump(2) << "\n";
  }
  return res.numeric_failure ? 3 : 0;
}

}  // namespace varexp
