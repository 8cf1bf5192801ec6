#include "varexp/jsonio.hpp"

#include <cstdio>
#include <stdexcept>

namespace varexp {

json field_to_json(const TensorField& f) {
  json j;
  std::vector<int> shape;
  for (int a = 0; a < f.dom->n; ++a) shape.push_back(f.dom->dims[a]);
  j["shape"] = shape;
  j["spacing"] = f.dom->h;
  j["rank"] = f.rank;
  j["values"] = f.v;
  return j;
}

TensorField field_from_json(const DomainPtr& dom, const json& j) {
  std::vector<int> shape = j.at("shape").get<std::vector<int>>();
  if (int(shape.size()) != dom->n)
    throw std::invalid_argument("field_from_json: dimension mismatch");
  for (int a = 0; a < dom->n; ++a)
    if (shape[a] != dom->dims[a]) throw std::invalid_argument("field_from_json: shape mismatch");
  TensorField f(dom, j.at("rank").get<int>());
  auto vals = j.at("values").get<std::vector<double>>();
  if (vals.size() != f.v.size()) throw std::invalid_argument("field_from_json: value count");
  f.v = std::move(vals);
  return f;
}

json exponent_to_json(const ExponentField& p) {
  json j;
  std::vector<int> shape;
  for (int a = 0; a < p.dom->n; ++a) shape.push_back(p.dom->dims[a]);
  j["shape"] = shape;
  j["spacing"] = p.dom->h;
  j["values"] = p.values;
  return j;
}

ExponentField exponent_from_json(const DomainPtr& dom, const json& j) {
  auto vals = j.at("values").get<std::vector<double>>();
  if (int64_t(vals.size()) != dom->num_nodes())
    throw std::invalid_argument("exponent_from_json: value count");
  ExponentField p;
  p.dom = dom;
  p.values = std::move(vals);
  double lo = 1e300, hi = -1e300;
  for (int64_t idx = 0; idx < dom->num_nodes(); ++idx) {
    if (!dom->active[idx]) continue;
    lo = std::min(lo, p.values[idx]);
    hi = std::max(hi, p.values[idx]);
  }
  p.p_minus = lo;
  p.p_plus = hi;
  return p;
}

json whitney_to_json(const std::vector<WhitneyCube>& cubes) {
  json arr = json::array();
  for (const auto& q : cubes) {
    json item;
    std::vector<double> c;
    for (int a = 0; a < q.center.n; ++a) c.push_back(q.center[a]);
    item["center"] = c;
    item["halfwidth"] = q.side / 2;
    item["level"] = q.level;
    arr.push_back(item);
  }
  return arr;
}

std::vector<WhitneyCube> whitney_from_json(const json& j, int dim) {
  std::vector<WhitneyCube> out;
  for (const auto& item : j) {
    WhitneyCube q;
    auto c = item.at("center").get<std::vector<double>>();
    q.center = VecN(dim);
    for (int a = 0; a < dim; ++a) q.center[a] = c[a];
    q.side = 2.0 * item.at("halfwidth").get<double>();
    q.level = item.at("level").get<int>();
    out.push_back(q);
  }
  return out;
}

json norm_result_to_json(const NormResult& r) {
  return json{{"value", r.value},
              {"modular_at_value", r.modular_at_value},
              {"iterations", r.iterations},
              {"bracket", {r.bracket_lo, r.bracket_hi}}};
}

json report_to_json(const RigidityReport& r) {
  std::vector<double> rot;
  for (int i = 0; i < r.rotation_or_skew.n; ++i)
    for (int j = 0; j < r.rotation_or_skew.n; ++j) rot.push_back(r.rotation_or_skew(i, j));
  return json{{"rotation_or_skew", rot},
              {"lhs_norm", r.lhs_norm},
              {"rhs_norm", r.rhs_norm},
              {"ratio", r.ratio},
              {"exact_zero", r.exact_zero},
              {"grid_h", r.grid_h},
              {"exponent_summary", {{"p_minus", r.p_minus}, {"p_plus", r.p_plus}, {"c_log", r.c_log}}}};
}

std::string csv_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace varexp
