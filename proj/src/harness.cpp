#include "bitree/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <map>
#include <sstream>
#include <thread>

#include "bitree/constants.hpp"
#include "bitree/error.hpp"
#include "bitree/extremal.hpp"
#include "bitree/hardy.hpp"
#include "bitree/maximal.hpp"
#include "bitree/random.hpp"

namespace bitree::harness {

namespace {

[[noreturn]] void parse_fail(const std::string& path, const std::string& what) {
  throw ParseError((path.empty() ? std::string("/") : path) + ": " + what);
}

const Json& require(const Json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object()) parse_fail(path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) parse_fail(path + "/" + key, "missing");
  return *it;
}

long long get_int(const Json& obj, const std::string& key, const std::string& path,
                  std::optional<long long> def = std::nullopt) {
  if (!obj.contains(key)) {
    if (def) return *def;
    parse_fail(path + "/" + key, "missing");
  }
  const Json& v = obj.at(key);
  if (!v.is_number_integer()) parse_fail(path + "/" + key, "expected an integer");
  return v.get<long long>();
}

double get_double(const Json& obj, const std::string& key, const std::string& path,
                  std::optional<double> def = std::nullopt) {
  if (!obj.contains(key)) {
    if (def) return *def;
    parse_fail(path + "/" + key, "missing");
  }
  const Json& v = obj.at(key);
  if (!v.is_number()) parse_fail(path + "/" + key, "expected a number");
  return v.get<double>();
}

std::string get_string(const Json& obj, const std::string& key, const std::string& path,
                       std::optional<std::string> def = std::nullopt) {
  if (!obj.contains(key)) {
    if (def) return *def;
    parse_fail(path + "/" + key, "missing");
  }
  const Json& v = obj.at(key);
  if (!v.is_string()) parse_fail(path + "/" + key, "expected a string");
  return v.get<std::string>();
}

bool get_bool(const Json& obj, const std::string& key, const std::string& path, bool def) {
  if (!obj.contains(key)) return def;
  const Json& v = obj.at(key);
  if (!v.is_boolean()) parse_fail(path + "/" + key, "expected a boolean");
  return v.get<bool>();
}

std::pair<int, int> get_depth(const Json& obj, const std::string& path) {
  const Json& d = require(obj, "depth", path);
  if (!d.is_array() || d.size() != 2 || !d[0].is_number_integer() || !d[1].is_number_integer()) {
    parse_fail(path + "/depth", "expected [depth_x, depth_y]");
  }
  return {d[0].get<int>(), d[1].get<int>()};
}

template <class F>
void parallel_for(std::size_t count, int jobs, F&& f) {
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next++) < count;) {
      try {
        f(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t n = std::clamp<std::size_t>(jobs < 1 ? 1 : static_cast<std::size_t>(jobs), 1,
                                                std::max<std::size_t>(count, 1));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::string error_type(const std::exception& e) {
  if (dynamic_cast<const InvariantError*>(&e)) return "InvariantError";
  if (dynamic_cast<const SolverError*>(&e)) return "SolverError";
  if (dynamic_cast<const SizeError*>(&e)) return "SizeError";
  if (dynamic_cast<const PreconditionError*>(&e)) return "PreconditionError";
  if (dynamic_cast<const TagError*>(&e)) return "TagError";
  if (dynamic_cast<const ParseError*>(&e)) return "ParseError";
  return "Error";
}

Json nodes_json(const BiTreeTopology& topo, const std::vector<std::size_t>& nodes) {
  Json a = Json::array();
  for (auto i : nodes) a.push_back(node_json(topo, i));
  return a;
}

Json report_json(const BiTreeTopology& topo, const ConstantReport& r) {
  Json j;
  j["kind"] = to_string(r.kind);
  j["value"] = r.value;
  j["certified"] = r.certified;
  j["method"] = r.diagnostics.method;
  j["iterations"] = r.diagnostics.iterations;
  j["residual"] = r.diagnostics.residual;
  if (r.witness_node) j["witness_node"] = node_json(topo, *r.witness_node);
  if (r.witness_downset) j["witness_generators"] = nodes_json(topo, r.witness_downset->generators(topo));
  if (!r.witness_subset.empty()) j["witness_subset"] = nodes_json(topo, r.witness_subset);
  if (!r.support.empty()) j["support_size"] = r.support.size();
  return j;
}

Instance from_extremal(ExtremalInstance e, std::string description) {
  Instance in;
  in.description = std::move(description);
  in.topo = e.topo;
  in.mu = std::move(e.mu);
  in.w = std::move(e.w);
  in.omega0 = e.omega0;
  in.q_nodes = std::move(e.q_nodes);
  return in;
}

Instance build_builtin(const Json& b, const std::string& path) {
  const std::string name = get_string(b, "name", path);
  const int n = static_cast<int>(get_int(b, "n", path, 4));
  const std::string desc = "builtin:" + name;
  if (name == "simple_car_not_rec") {
    const std::string p = get_string(b, "placement", path, "atom");
    if (p != "atom" && p != "uniform") parse_fail(path + "/placement", "expected \"atom\" or \"uniform\"");
    return from_extremal(simple_car_not_rec(n, p == "atom" ? QuadrantMass::Atom : QuadrantMass::Uniform), desc);
  }
  if (name == "upset_car_not_rec") return from_extremal(materialize(upset_car_not_rec(n)), desc);
  if (name == "sum_of_products") return from_extremal(materialize(sum_of_products(n)), desc);
  if (name == "rec_not_embedding") return from_extremal(materialize(rec_not_embedding_small(n)), desc);
  if (name == "lifted_family") {
    const Json& rects = require(b, "rects", path);
    if (!rects.is_array()) parse_fail(path + "/rects", "expected an array of [x0, x1, y0, y1]");
    std::vector<DyadicRect> family;
    for (std::size_t k = 0; k < rects.size(); ++k) {
      const Json& r = rects[k];
      const std::string rp = path + "/rects/" + std::to_string(k);
      if (!r.is_array() || r.size() != 4) parse_fail(rp, "expected [x0, x1, y0, y1]");
      for (const auto& v : r) {
        if (!v.is_number()) parse_fail(rp, "expected numbers");
      }
      try {
        family.push_back(dyadic_rect(r[0].get<double>(), r[1].get<double>(), r[2].get<double>(),
                                     r[3].get<double>(), n));
      } catch (const ParseError& e) {
        parse_fail(rp, e.what());
      }
    }
    auto lf = lift_carleson_family(family, n);
    Instance in;
    in.description = desc;
    in.topo = lf.topo;
    in.mu = std::move(lf.mu);
    in.w = std::move(lf.w);
    return in;
  }
  parse_fail(path + "/name", "unknown construction \"" + name + "\"");
}

Instance build_explicit(const Json& e, const std::string& path) {
  const auto [dx, dy] = get_depth(e, path);
  Instance in;
  in.description = "explicit";
  in.topo = BiTreeTopology(dx, dy);
  auto read = [&](const char* key) {
    std::vector<double> v(in.topo.size(), 0.0);
    if (!e.contains(key)) return v;
    const Json& list = e.at(key);
    const std::string lp = path + "/" + key;
    if (!list.is_array()) parse_fail(lp, "expected an array of {node, value}");
    for (std::size_t k = 0; k < list.size(); ++k) {
      const std::string ip = lp + "/" + std::to_string(k);
      const std::size_t i = node_from_json(in.topo, require(list[k], "node", ip), ip + "/node");
      const double val = get_double(list[k], "value", ip);
      if (!(val >= 0.0) || !std::isfinite(val)) parse_fail(ip + "/value", "expected a finite nonnegative number");
      v[i] += val;
    }
    return v;
  };
  in.mu = MassFunction(in.topo, read("mass"));
  in.w = WeightFunction(in.topo, read("weight"));
  return in;
}

Instance build_random(const Json& r, const std::string& path) {
  const auto [dx, dy] = get_depth(r, path);
  const auto seed = static_cast<std::uint64_t>(get_int(r, "seed", path, 0));
  const std::string kind = get_string(r, "weight", path, "product");
  if (kind != "product" && kind != "general" && kind != "hooked") {
    parse_fail(path + "/weight", "expected \"product\", \"general\" or \"hooked\"");
  }
  RandomMassOptions opt;
  opt.density = get_double(r, "density", path, opt.density);
  opt.boundary_only = get_bool(r, "boundary_only", path, opt.boundary_only);
  Instance in;
  in.description = "random:" + kind;
  in.topo = BiTreeTopology(dx, dy);
  Rng rng(seed);
  in.mu = random_mass(in.topo, rng, opt);
  in.w = random_weight(in.topo, rng, kind);
  return in;
}

std::vector<std::size_t> subset_param(const Instance& inst, const Json& task, const std::string& path) {
  if (!task.contains("subset")) parse_fail(path + "/subset", "missing");
  const Json& s = task.at("subset");
  if (s.is_string()) {
    const auto name = s.get<std::string>();
    if (name == "omega0") {
      if (!inst.omega0) parse_fail(path + "/subset", "instance has no omega_0");
      return {*inst.omega0};
    }
    if (name == "support") return inst.mu.support();
    parse_fail(path + "/subset", "expected \"omega0\", \"support\" or a node list");
  }
  if (!s.is_array()) parse_fail(path + "/subset", "expected a node list");
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < s.size(); ++k) {
    out.push_back(node_from_json(inst.topo, s[k], path + "/subset/" + std::to_string(k)));
  }
  return out;
}

Json task_extremal_audit(const Instance& inst, const Json& task, const std::string& path) {
  const std::string kind = get_string(task, "psi", path, "random");
  std::vector<double> psi(inst.topo.size(), 1.0);
  if (kind == "random") {
    Rng rng(static_cast<std::uint64_t>(get_int(task, "seed", path, 0)));
    std::uniform_int_distribution<int> k(0, 16);
    for (auto& v : psi) v = k(rng) / 8.0;
    psi[inst.mu.support().front()] += 1.0;
  } else if (kind != "constant") {
    parse_fail(path + "/psi", "expected \"constant\" or \"random\"");
  }
  Json j;
  j["psi"] = kind;
  // rational audit up to bi-tree depth (3, 3)
  if (inst.topo.size() <= 225) {
    const auto muq = to_rational(inst.mu.span());
    const auto ew = extremal_weight(inst.topo, muq, to_rational(std::span<const double>(psi)));
    const auto car = carleson_constant_exact(inst.topo, muq, ew.w);
    j["mode"] = "rational";
    j["maximal_norm_sq"] = ew.maximal_norm_sq.str();
    j["embedding_sum"] = ew.embedding_sum.str();
    j["identity_holds"] = ew.maximal_norm_sq == ew.embedding_sum;
    j["carleson"] = car.value.str();
    j["carleson_at_most_one"] = car.value <= 1;
    std::vector<double> wd;
    for (const auto& v : ew.w) wd.push_back(to_double(v));
    j["embedding_constant"] = embedding_constant(inst.topo, inst.mu, WeightFunction(inst.topo, wd)).value;
    j["maximal_ratio"] = to_double(ew.maximal_norm_sq / l2_norm_sq(muq, to_rational(std::span<const double>(psi))));
  } else {
    const auto ew = extremal_weight(inst.topo, inst.mu.values(), psi);
    const WeightFunction w(inst.topo, ew.w);
    const double car = carleson_constant(inst.topo, inst.mu, w).value;
    j["mode"] = "double";
    j["maximal_norm_sq"] = ew.maximal_norm_sq;
    j["embedding_sum"] = ew.embedding_sum;
    j["identity_holds"] = true;  // extremal_weight throws otherwise
    j["carleson"] = car;
    j["carleson_at_most_one"] = car <= 1.0 + 1e-9;
    j["embedding_constant"] = embedding_constant(inst.topo, inst.mu, w).value;
    j["maximal_ratio"] = ew.maximal_norm_sq / l2_norm_sq(inst.mu.values(), psi);
  }
  return j;
}

Json task_sparse(const Instance& inst, const Json& task, const std::string& path) {
  const Rational scale(get_double(task, "scale", path, 1.0));
  if (scale < 0) parse_fail(path + "/scale", "expected a nonnegative number");
  std::vector<std::size_t> members;
  std::vector<Rational> w(inst.topo.size());
  for (std::size_t i = 0; i < inst.topo.size(); ++i) {
    w[i] = Rational(inst.w[i]) * scale;
    if (inst.w[i] > 0) members.push_back(i);
  }
  const auto s = sparse_selection(inst.topo, members, w, to_rational(inst.mu.span()));
  Json j;
  j["feasible"] = s.feasible;
  j["members"] = members.size();
  j["demand"] = to_double(s.demand);
  j["flow"] = to_double(s.flow);
  Json a = Json::array();
  for (const auto& e : s.assignment) {
    a.push_back({node_json(inst.topo, e.omega), node_json(inst.topo, e.member), to_double(e.mass)});
  }
  j["assignment"] = a;
  if (s.violating_union) {
    j["violating_members"] = nodes_json(inst.topo, s.violating_members);
    j["violating_demand"] = to_double(s.violating_demand);
    j["violating_mass"] = to_double(s.violating_mass);
  }
  return j;
}

}  // namespace

Json node_json(const BiTreeTopology& topo, std::size_t i) {
  const BiNode n = topo.node(i);
  return Json::array({TreeTopology::generation(n.x), TreeTopology::offset(n.x), TreeTopology::generation(n.y),
                      TreeTopology::offset(n.y)});
}

std::size_t node_from_json(const BiTreeTopology& topo, const Json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 4) parse_fail(path, "expected [gen_x, off_x, gen_y, off_y]");
  long long v[4];
  for (int k = 0; k < 4; ++k) {
    if (!j[k].is_number_integer()) parse_fail(path, "expected integers");
    v[k] = j[k].get<long long>();
    if (v[k] < 0) parse_fail(path, "negative coordinate");
  }
  if (v[0] > topo.depth_x() || v[2] > topo.depth_y()) parse_fail(path, "generation exceeds the depth");
  if (v[1] >= (1LL << v[0]) || v[3] >= (1LL << v[2])) parse_fail(path, "offset out of range");
  return topo.index(static_cast<int>(v[0]), static_cast<std::uint64_t>(v[1]), static_cast<int>(v[2]),
                    static_cast<std::uint64_t>(v[3]));
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

ScenarioSpec parse_scenario(const Json& j) {
  if (!j.is_object()) parse_fail("", "scenario must be a JSON object");
  const std::string schema = get_string(j, "schema", "");
  if (schema != kSchema) parse_fail("/schema", "expected \"" + std::string(kSchema) + "\"");
  ScenarioSpec s;
  s.instance = require(j, "instance", "");
  if (!s.instance.is_object() || s.instance.size() != 1) {
    parse_fail("/instance", "expected exactly one of builtin, explicit, random");
  }
  const std::string src = s.instance.begin().key();
  if (src != "builtin" && src != "explicit" && src != "random") {
    parse_fail("/instance/" + src, "unknown instance source");
  }
  if (j.contains("tasks")) {
    const Json& tasks = j.at("tasks");
    if (!tasks.is_array()) parse_fail("/tasks", "expected an array");
    const auto ops = task_ops();
    for (std::size_t k = 0; k < tasks.size(); ++k) {
      const std::string path = "/tasks/" + std::to_string(k);
      TaskSpec t;
      t.op = get_string(tasks[k], "op", path);
      if (std::find(ops.begin(), ops.end(), t.op) == ops.end()) parse_fail(path + "/op", "unknown op \"" + t.op + "\"");
      t.id = get_string(tasks[k], "id", path, std::to_string(k) + ":" + t.op);
      t.params = tasks[k];
      s.tasks.push_back(std::move(t));
    }
  }
  if (j.contains("output")) {
    const Json& o = j.at("output");
    if (o.contains("path")) s.output_path = get_string(o, "path", "/output");
    s.format = get_string(o, "format", "/output", "json");
    if (s.format != "json" && s.format != "csv") parse_fail("/output/format", "expected \"json\" or \"csv\"");
  }
  return s;
}

ScenarioSpec parse_scenario_text(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("/: invalid JSON: ") + e.what());
  }
  return parse_scenario(j);
}

Instance build_instance(const Json& spec) {
  if (spec.contains("builtin")) return build_builtin(spec.at("builtin"), "/instance/builtin");
  if (spec.contains("explicit")) return build_explicit(spec.at("explicit"), "/instance/explicit");
  if (spec.contains("random")) return build_random(spec.at("random"), "/instance/random");
  parse_fail("/instance", "expected one of builtin, explicit, random");
}

std::vector<std::string> task_ops() {
  return {"box_constant",      "carleson_constant",   "carleson_constant_exact", "hereditary_constant",
          "embedding_constant", "verify_chain",        "energy",                  "witness_ratio",
          "maximal_probe",      "sparse_selection",    "extremal_weight_audit",   "sawyer_conditions"};
}

Json run_task(const Instance& inst, const TaskSpec& task) {
  const Json& p = task.params;
  const std::string path = "/tasks/" + task.id;
  const auto& topo = inst.topo;
  if (task.op == "box_constant") return report_json(topo, box_constant(topo, inst.mu, inst.w));
  if (task.op == "carleson_constant") {
    const std::string m = get_string(p, "method", path, "exact_mincut");
    if (m != "exact_mincut" && m != "brute_force") parse_fail(path + "/method", "expected exact_mincut or brute_force");
    return report_json(topo, carleson_constant(topo, inst.mu, inst.w,
                                               m == "exact_mincut" ? CarlesonMethod::ExactMincut
                                                                   : CarlesonMethod::BruteForce,
                                               get_double(p, "tol", path, 1e-12)));
  }
  if (task.op == "carleson_constant_exact") {
    const auto r = carleson_constant_exact(topo, to_rational(inst.mu.span()), to_rational(inst.w.span()));
    Json j;
    j["value"] = to_double(r.value);
    j["value_exact"] = r.value.str();
    j["iterations"] = r.iterations;
    j["witness_generators"] = nodes_json(topo, r.witness.generators(topo));
    return j;
  }
  if (task.op == "hereditary_constant") {
    std::string m = get_string(p, "method", path, "auto");
    if (m != "auto" && m != "exact_enum" && m != "local_search") {
      parse_fail(path + "/method", "expected auto, exact_enum or local_search");
    }
    if (m == "auto") m = inst.mu.support().size() <= kMaxHereditaryEnumSupport ? "exact_enum" : "local_search";
    LocalSearchOptions opt;
    opt.seed = static_cast<std::uint64_t>(get_int(p, "seed", path, 0));
    return report_json(topo, hereditary_constant(topo, inst.mu, inst.w,
                                                 m == "exact_enum" ? HereditaryMethod::ExactEnum
                                                                   : HereditaryMethod::LocalSearch,
                                                 opt));
  }
  if (task.op == "embedding_constant") {
    return report_json(topo, embedding_constant(topo, inst.mu, inst.w, get_double(p, "tol", path, 1e-10),
                                                static_cast<int>(get_int(p, "max_iterations", path, 10000))));
  }
  if (task.op == "verify_chain") {
    const auto c = verify_chain(topo, inst.mu, inst.w, static_cast<std::uint64_t>(get_int(p, "seed", path, 0)));
    Json j;
    j["box"] = report_json(topo, c.box);
    j["carleson"] = report_json(topo, c.carleson);
    j["hereditary"] = report_json(topo, c.hereditary);
    j["embedding"] = report_json(topo, c.embedding);
    j["c_over_box"] = c.c_over_box;
    j["hc_over_c"] = c.hc_over_c;
    j["ce_over_hc"] = c.ce_over_hc;
    j["ce_over_box"] = c.ce_over_box;
    return j;
  }
  if (task.op == "energy") {
    Json j;
    j["value"] = energy(topo, inst.mu.values(), inst.w.values());
    return j;
  }
  if (task.op == "witness_ratio") {
    const auto subset = subset_param(inst, p, path);
    const auto r = restricted_energy_ratio_exact(topo, to_rational(inst.mu.span()), to_rational(inst.w.span()), subset);
    Json j;
    j["subset"] = nodes_json(topo, subset);
    j["value"] = to_double(r);
    j["value_exact"] = r.str();
    return j;
  }
  if (task.op == "maximal_probe") {
    const auto r = maximal_equivalence_probe(topo, inst.mu, static_cast<int>(get_int(p, "samples", path, 200)),
                                             static_cast<std::uint64_t>(get_int(p, "seed", path, 0)));
    Json j;
    j["embedding_estimate"] = r.embedding_estimate;
    j["maximal_estimate"] = r.maximal_estimate;
    j["upper_proxy"] = r.upper_proxy;
    j["gap"] = r.gap;
    j["certified"] = r.certified;
    j["samples"] = r.samples.size();
    return j;
  }
  if (task.op == "sparse_selection") return task_sparse(inst, p, path);
  if (task.op == "extremal_weight_audit") return task_extremal_audit(inst, p, path);
  if (task.op == "sawyer_conditions") {
    const auto s = sawyer_conditions(topo, inst.mu, inst.w);
    Json j;
    j["a1_sq"] = s.a1_sq;
    j["a2_sq"] = s.a2_sq;
    j["a3_sq"] = s.a3_sq;
    j["anchor"] = node_json(topo, s.anchor);
    return j;
  }
  parse_fail(path + "/op", "unknown op \"" + task.op + "\"");
}

Json run_scenario(const ScenarioSpec& spec, int jobs) {
  const Instance inst = build_instance(spec.instance);
  Json report;
  report["schema"] = kSchema;
  Json desc;
  desc["spec"] = spec.instance;
  desc["description"] = inst.description;
  desc["depth"] = Json::array({inst.topo.depth_x(), inst.topo.depth_y()});
  desc["nodes"] = inst.topo.size();
  desc["support_size"] = inst.mu.support().size();
  desc["total_mass"] = inst.mu.total_mass();
  desc["weight_tag"] = inst.w.tag_name();
  if (inst.omega0) desc["omega0"] = node_json(inst.topo, *inst.omega0);
  report["instance"] = desc;

  std::vector<Json> results(spec.tasks.size());
  parallel_for(spec.tasks.size(), jobs, [&](std::size_t k) {
    const TaskSpec& t = spec.tasks[k];
    Json r;
    r["id"] = t.id;
    r["op"] = t.op;
    try {
      r["result"] = run_task(inst, t);
      r["status"] = "ok";
    } catch (const std::exception& e) {
      r["status"] = "error";
      r["error"] = {{"type", error_type(e)}, {"message", e.what()}};
    }
    results[k] = std::move(r);
  });
  int failed = 0;
  report["tasks"] = Json::array();
  for (auto& r : results) {
    failed += r["status"] == "error";
    report["tasks"].push_back(std::move(r));
  }
  report["failed"] = failed;
  return report;
}

std::string worst_failure(const Json& report) {
  static const std::vector<std::string> severity = {"InvariantError", "SolverError"};
  std::string worst;
  for (const auto& t : report.at("tasks")) {
    if (t.at("status") != "error") continue;
    const std::string type = t.at("error").at("type");
    auto rank = [&](const std::string& s) {
      auto it = std::find(severity.begin(), severity.end(), s);
      return it == severity.end() ? severity.size() : static_cast<std::size_t>(it - severity.begin());
    };
    if (worst.empty() || rank(type) < rank(worst)) worst = type;
  }
  return worst;
}

// ---- sweeps ----

namespace {

struct Cell {
  std::vector<SweepRow> rows;
};

SweepRow row(const std::string& exp, int n, const std::string& construction, const std::string& quantity,
             double value, std::string witness, std::uint64_t seed, Json params) {
  SweepRow r;
  r.experiment = exp;
  r.n = n;
  r.construction = construction;
  r.quantity = quantity;
  r.value = value;
  r.witness = std::move(witness);
  r.seed = seed;
  r.params = std::move(params);
  return r;
}

bool power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

Cell chain_cell(int d, std::uint64_t seed, const SweepOptions& opt) {
  const std::string exp = "chain_ratios_product_w";
  BiTreeTopology topo(d, d);
  double best_ce_box = 0, best_c_box = 0, best_hc_c = 0, best_ce_hc = 0, sum_ce_box = 0;
  std::uint64_t arg_ce_box = 0;
  for (int k = 0; k < opt.instances; ++k) {
    const auto s = chain_instance_seed(seed, d, k);
    Rng rng(s);
    const auto mu = random_mass(topo, rng);
    const auto w = random_weight(topo, rng, "product");
    const auto c = verify_chain(topo, mu, w, s);
    if (c.ce_over_box > best_ce_box || k == 0) {
      best_ce_box = c.ce_over_box;
      arg_ce_box = s;
    }
    best_c_box = std::max(best_c_box, c.c_over_box);
    best_hc_c = std::max(best_hc_c, c.hc_over_c);
    best_ce_hc = std::max(best_ce_hc, c.ce_over_hc);
    sum_ce_box += c.ce_over_box;
  }
  const Json params = {{"depth", {d, d}}, {"instances", opt.instances}, {"weight", "product"}};
  const std::string ws = "seed=" + std::to_string(arg_ce_box);
  Cell cell;
  cell.rows.push_back(row(exp, d, "random_product", "max_ce_over_box", best_ce_box, ws, arg_ce_box, params));
  cell.rows.push_back(row(exp, d, "random_product", "max_c_over_box", best_c_box, "", seed, params));
  cell.rows.push_back(row(exp, d, "random_product", "max_hc_over_c", best_hc_c, "", seed, params));
  cell.rows.push_back(row(exp, d, "random_product", "max_ce_over_hc", best_ce_hc, "", seed, params));
  cell.rows.push_back(row(exp, d, "random_product", "mean_ce_over_box", sum_ce_box / opt.instances, "", seed, params));
  return cell;
}

Cell car_vs_rec_cell(int n, std::uint64_t seed) {
  const std::string exp = "car_vs_rec";
  Cell cell;
  if (n >= 1 && n <= kMaxDenseExtremalDepth) {
    const auto inst = simple_car_not_rec(n);
    const auto muq = to_rational(inst.mu.span());
    const auto wq = to_rational(inst.w.span());
    const auto car = carleson_constant_exact(inst.topo, muq, wq);
    const auto hc = restricted_energy_ratio_exact(inst.topo, muq, wq, {inst.omega0});
    const Json params = {{"n", n}, {"placement", "atom"}, {"mode", "rational"}};
    cell.rows.push_back(row(exp, n, "simple_car_not_rec", "carleson", to_double(car.value),
                            nodes_json(inst.topo, car.witness.generators(inst.topo)).dump(), seed, params));
    cell.rows.push_back(row(exp, n, "simple_car_not_rec", "hc_witness", to_double(hc), "omega0", seed, params));
    cell.rows.push_back(row(exp, n, "simple_car_not_rec", "hc_witness_over_carleson",
                            to_double(Rational(hc / car.value)), "omega0", seed, params));
  }
  if (power_of_two(n) && n >= 4) {
    const auto c = upset_car_not_rec(n);
    const Json params = {{"n", n}, {"m", c.m}, {"mode", "structured"}};
    const double hc = hc_witness_ratio(c);
    const double ub = carleson_upper_bound(c);
    cell.rows.push_back(row(exp, n, "upset_car_not_rec", "potential_omega0",
                            structured_potential(c, omega0_node(n)), "omega0", seed, params));
    cell.rows.push_back(row(exp, n, "upset_car_not_rec", "hc_witness", hc, "omega0", seed, params));
    cell.rows.push_back(row(exp, n, "upset_car_not_rec", "carleson_upper_bound", ub, "", seed, params));
    cell.rows.push_back(row(exp, n, "upset_car_not_rec", "hc_witness_over_carleson_upper", hc / ub, "omega0", seed, params));
  }
  if (cell.rows.empty()) throw PreconditionError("car_vs_rec: N must be in [1, 8] or a power of two >= 4");
  return cell;
}

Cell rec_vs_embedding_cell(int n, std::uint64_t seed) {
  const std::string exp = "rec_vs_embedding";
  if (!power_of_two(n) || n < 8) throw PreconditionError("rec_vs_embedding: N must be a power of two >= 8");
  const auto c = extremal_m(n) >= 4 ? rec_not_embedding(n) : rec_not_embedding_small(n);
  const auto t = embedding_lower_test(c);
  const double scale = static_cast<double>(c.m) / n;
  double surrogate = 0.0;
  std::string where;
  for (const auto& piece : c.pieces) {
    for (const auto& node : sample_support(c, piece, seed)) {
      const double v = rec_surrogate(c, piece.family, node);
      if (v > surrogate) {
        surrogate = v;
        where = "k=" + std::to_string(piece.family) + ",j=" + std::to_string(piece.index);
      }
    }
  }
  const Json params = {{"n", n}, {"m", c.m}, {"k", c.k}, {"mode", "structured"}, {"sample_seed", seed}};
  Cell cell;
  cell.rows.push_back(row(exp, n, "rec_not_embedding", "lhs", t.lhs, "f=I*mu_0", seed, params));
  cell.rows.push_back(row(exp, n, "rec_not_embedding", "rhs", t.rhs, "f=I*mu_0", seed, params));
  cell.rows.push_back(row(exp, n, "rec_not_embedding", "ratio", t.ratio, "f=I*mu_0", seed, params));
  cell.rows.push_back(row(exp, n, "rec_not_embedding", "lhs_over_m_over_n", t.lhs / scale, "f=I*mu_0", seed, params));
  cell.rows.push_back(row(exp, n, "rec_not_embedding", "rhs_over_m_over_n", t.rhs / scale, "f=I*mu_0", seed, params));
  cell.rows.push_back(row(exp, n, "rec_not_embedding", "max_rec_surrogate", surrogate, where, seed, params));
  return cell;
}

Cell sum_of_products_cell(int n, std::uint64_t seed) {
  const std::string exp = "sum_of_products";
  if (!power_of_two(n) || n < 4) throw PreconditionError("sum_of_products: N must be a power of two >= 4");
  const auto c = sum_of_products(n);
  const Json params = {{"n", n}, {"m", c.m}, {"mode", "structured"}};
  const double hc = hc_witness_ratio(c);
  const double ub = carleson_upper_bound(c);
  Cell cell;
  cell.rows.push_back(row(exp, n, "sum_of_products", "potential_omega0", structured_potential(c, omega0_node(n)),
                          "omega0", seed, params));
  cell.rows.push_back(row(exp, n, "sum_of_products", "energy", OriginGrid(c, PieceSelection::all()).energy(), "",
                          seed, params));
  cell.rows.push_back(row(exp, n, "sum_of_products", "hc_witness", hc, "omega0", seed, params));
  cell.rows.push_back(row(exp, n, "sum_of_products", "carleson_upper_bound", ub, "", seed, params));
  cell.rows.push_back(row(exp, n, "sum_of_products", "hc_witness_over_carleson_upper", hc / ub, "omega0", seed, params));
  return cell;
}

Cell maximal_probe_cell(int d, std::uint64_t seed, const SweepOptions& opt) {
  const std::string exp = "maximal_probe";
  BiTreeTopology topo(d, 0);
  std::vector<double> m(topo.size(), 0.0);
  for (auto b : topo.boundary()) m[b] = 1.0 / static_cast<double>(topo.boundary_size());
  const MassFunction mu(topo, m);
  const auto s = seed + static_cast<std::uint64_t>(d);
  const auto r = maximal_equivalence_probe(topo, mu, opt.probe_samples, s);
  const Json params = {{"depth", {d, 0}}, {"mu", "uniform"}, {"samples", opt.probe_samples}, {"probe_seed", s}};
  Cell cell;
  cell.rows.push_back(row(exp, d, "single_tree_uniform", "embedding_estimate", r.embedding_estimate, "", s, params));
  cell.rows.push_back(row(exp, d, "single_tree_uniform", "maximal_estimate", r.maximal_estimate, "", s, params));
  cell.rows.push_back(row(exp, d, "single_tree_uniform", "upper_proxy", r.upper_proxy, "", s, params));
  cell.rows.push_back(row(exp, d, "single_tree_uniform", "gap", r.gap, "", s, params));
  return cell;
}

double slope_x(const std::string& axis, const SweepRow& r) {
  if (axis == "depth") return r.n;
  if (axis == "log2_M") return std::log2(static_cast<double>(extremal_m(r.n)));
  return std::log2(static_cast<double>(r.n));
}

}  // namespace

std::uint64_t chain_instance_seed(std::uint64_t seed, int depth, int k) {
  return seed * 1000003ULL + static_cast<std::uint64_t>(depth) * 100000ULL + static_cast<std::uint64_t>(k);
}

std::vector<std::string> sweep_experiments() {
  return {"chain_ratios_product_w", "car_vs_rec", "rec_vs_embedding", "sum_of_products", "maximal_probe"};
}

SweepReport sweep(const std::string& experiment, const std::vector<int>& ns, std::uint64_t seed,
                  const SweepOptions& opt) {
  const auto names = sweep_experiments();
  if (std::find(names.begin(), names.end(), experiment) == names.end()) {
    throw PreconditionError("unknown experiment \"" + experiment + "\"");
  }
  if (ns.empty()) throw PreconditionError("sweep needs at least one N");
  std::string axis = "log2_N";
  if (experiment == "chain_ratios_product_w" || experiment == "maximal_probe") axis = "depth";
  if (experiment == "rec_vs_embedding") axis = "log2_M";

  std::vector<Cell> cells(ns.size());
  parallel_for(ns.size(), opt.jobs, [&](std::size_t i) {
    const int n = ns[i];
    if (experiment == "chain_ratios_product_w") cells[i] = chain_cell(n, seed, opt);
    else if (experiment == "car_vs_rec") cells[i] = car_vs_rec_cell(n, seed);
    else if (experiment == "rec_vs_embedding") cells[i] = rec_vs_embedding_cell(n, seed);
    else if (experiment == "sum_of_products") cells[i] = sum_of_products_cell(n, seed);
    else cells[i] = maximal_probe_cell(n, seed, opt);
  });

  SweepReport rep;
  rep.experiment = experiment;
  rep.seed = seed;
  for (auto& c : cells) {
    for (auto& r : c.rows) rep.rows.push_back(std::move(r));
  }
  std::map<std::pair<std::string, std::string>, std::vector<SweepRow*>> series;
  for (auto& r : rep.rows) {
    r.slope_axis = axis;
    series[{r.construction, r.quantity}].push_back(&r);
  }
  for (auto& [key, rows] : series) {
    const double first = rows.front()->value;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int count = 0;
    for (auto* r : rows) {
      r->ratio = safe_ratio(r->value, first);
      if (!std::isfinite(r->value)) continue;
      const double x = slope_x(axis, *r);
      sx += x;
      sy += r->value;
      sxx += x * x;
      sxy += x * r->value;
      ++count;
    }
    const double den = count * sxx - sx * sx;
    const double slope = count >= 2 && den > 0 ? (count * sxy - sx * sy) / den : 0.0;
    for (auto* r : rows) r->slope = slope;
  }
  return rep;
}

Json to_json(const SweepReport& r) {
  Json j;
  j["schema"] = kSchema;
  j["experiment"] = r.experiment;
  j["seed"] = r.seed;
  j["rows"] = Json::array();
  for (const auto& row : r.rows) {
    Json o;
    o["experiment"] = row.experiment;
    o["n"] = row.n;
    o["construction"] = row.construction;
    o["quantity"] = row.quantity;
    o["value"] = row.value;
    o["ratio"] = row.ratio;
    o["slope"] = row.slope;
    o["slope_axis"] = row.slope_axis;
    o["witness"] = row.witness;
    o["seed"] = row.seed;
    o["params"] = row.params;
    j["rows"].push_back(std::move(o));
  }
  return j;
}

std::string to_csv(const SweepReport& r) {
  auto quote = [](const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
      if (c == '"') out += '"';
      out += c;
    }
    return out + "\"";
  };
  std::ostringstream os;
  os << "experiment,n,construction,quantity,value,ratio,slope,slope_axis,witness,seed,params\n";
  for (const auto& row : r.rows) {
    os << row.experiment << ',' << row.n << ',' << row.construction << ',' << row.quantity << ','
       << format_double(row.value) << ',' << format_double(row.ratio) << ',' << format_double(row.slope) << ','
       << row.slope_axis << ',' << quote(row.witness) << ',' << row.seed << ',' << quote(row.params.dump()) << '\n';
  }
  return os.str();
}

}  // namespace bitree::harness
