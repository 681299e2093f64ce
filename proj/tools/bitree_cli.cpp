// bitree: command-line front end to the scenario runner and sweeps.
//
// Exit codes: 0 success, 1 usage or bad input, 2 a checked inequality or
// identity failed, 3 a solver did not converge.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bitree/error.hpp"
#include "bitree/extremal.hpp"
#include "bitree/harness.hpp"

namespace {

using bitree::harness::Json;
namespace h = bitree::harness;

enum Exit { kOk = 0, kUsage = 1, kAssertion = 2, kSolver = 3 };

struct Common {
  std::string depth = "2,2";
  std::uint64_t seed = 0;
  std::string method;
  double tol = 1e-12;
  std::string out;
  std::string format = "json";
  int jobs = 1;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--depth", c.depth, "bi-tree depth \"dx,dy\" (or one value for both)");
  app->add_option("--seed", c.seed, "random seed");
  app->add_option("--method", c.method, "solver method");
  app->add_option("--tol", c.tol, "solver tolerance");
  app->add_option("--out", c.out, "output file (default: stdout or $BITREE_OUT_DIR)");
  app->add_option("--format", c.format, "output format")->check(CLI::IsMember({"json", "csv"}));
  app->add_option("--jobs", c.jobs, "worker threads")->check(CLI::PositiveNumber);
}

Json depth_json(const std::string& s) {
  std::vector<int> v;
  std::stringstream ss(s);
  for (std::string part; std::getline(ss, part, ',');) {
    try {
      std::size_t used = 0;
      v.push_back(std::stoi(part, &used));
      if (used != part.size()) throw std::invalid_argument(part);
    } catch (const std::exception&) {
      throw bitree::ParseError("--depth: expected \"dx,dy\", got \"" + s + "\"");
    }
  }
  if (v.size() == 1) v.push_back(v[0]);
  if (v.size() != 2) throw bitree::ParseError("--depth: expected \"dx,dy\", got \"" + s + "\"");
  return Json::array({v[0], v[1]});
}

std::vector<int> int_list(const std::string& s, const std::string& flag) {
  std::vector<int> v;
  std::stringstream ss(s);
  for (std::string part; std::getline(ss, part, ',');) {
    try {
      v.push_back(std::stoi(part));
    } catch (const std::exception&) {
      throw bitree::ParseError(flag + ": expected a comma-separated list of integers");
    }
  }
  if (v.empty()) throw bitree::ParseError(flag + ": empty list");
  return v;
}

std::string scenario_csv(const Json& report) {
  std::ostringstream os;
  os << "id,op,status,field,value\n";
  for (const auto& t : report.at("tasks")) {
    const std::string head = t.at("id").get<std::string>() + "," + t.at("op").get<std::string>() + "," +
                             t.at("status").get<std::string>();
    if (t.at("status") == "error") {
      os << head << ",error," << t.at("error").at("type").get<std::string>() << '\n';
      continue;
    }
    for (const auto& [k, v] : t.at("result").items()) {
      if (v.is_number_float()) os << head << ',' << k << ',' << h::format_double(v.get<double>()) << '\n';
      else if (v.is_number() || v.is_boolean()) os << head << ',' << k << ',' << v.dump() << '\n';
      else if (v.is_string()) os << head << ',' << k << ',' << v.get<std::string>() << '\n';
      else if (v.is_object()) {
        for (const auto& [k2, v2] : v.items()) {
          if (v2.is_number_float()) os << head << ',' << k << '.' << k2 << ',' << h::format_double(v2.get<double>()) << '\n';
          else if (v2.is_number() || v2.is_boolean()) os << head << ',' << k << '.' << k2 << ',' << v2.dump() << '\n';
        }
      }
    }
  }
  return os.str();
}

void emit(const std::string& text, const std::string& out, const std::string& fallback_name) {
  std::string path = out;
  if (path.empty()) {
    if (const char* dir = std::getenv("BITREE_OUT_DIR"); dir && *dir) {
      std::filesystem::create_directories(dir);
      path = (std::filesystem::path(dir) / fallback_name).string();
    }
  }
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(path);
  if (!f) throw bitree::ParseError("cannot write " + path);
  f << text;
}

int exit_for(const std::string& error_type) {
  if (error_type.empty()) return kOk;
  if (error_type == "InvariantError") return kAssertion;
  if (error_type == "SolverError") return kSolver;
  return kUsage;
}

int run_and_emit(const h::ScenarioSpec& spec, const Common& c, const std::string& name) {
  const Json report = h::run_scenario(spec, c.jobs);
  const std::string fmt = c.format;
  const std::string text = fmt == "csv" ? scenario_csv(report) : report.dump(2) + "\n";
  emit(text, c.out.empty() && spec.output_path ? *spec.output_path : c.out, name + "." + fmt);
  const std::string worst = h::worst_failure(report);
  if (!worst.empty()) {
    for (const auto& t : report.at("tasks")) {
      if (t.at("status") == "error") {
        std::cerr << "task " << t.at("id").get<std::string>() << ": " << t.at("error").at("type").get<std::string>()
                  << ": " << t.at("error").at("message").get<std::string>() << '\n';
      }
    }
  }
  return exit_for(worst);
}

h::ScenarioSpec load_scenario(const std::string& file) {
  std::ifstream f(file);
  if (!f) throw bitree::ParseError("cannot read scenario " + file);
  std::stringstream ss;
  ss << f.rdbuf();
  return h::parse_scenario_text(ss.str());
}

Json random_instance(const Common& c, const std::string& weight) {
  return {{"random", {{"depth", depth_json(c.depth)}, {"seed", c.seed}, {"weight", weight}}}};
}

bool check(bool ok, const std::string& what, int& failures) {
  std::cout << (ok ? "PASS " : "FAIL ") << what << '\n';
  if (!ok) ++failures;
  return ok;
}

int selftest(const Common& c) {
  int failures = 0;
  for (int k = 0; k < 5; ++k) {
    h::ScenarioSpec spec;
    spec.instance = {{"random", {{"depth", {2, 1}}, {"seed", c.seed + k}, {"weight", "general"}}}};
    spec.tasks.push_back({"mincut", "carleson_constant", {{"method", "exact_mincut"}}});
    spec.tasks.push_back({"brute", "carleson_constant", {{"method", "brute_force"}}});
    spec.tasks.push_back({"chain", "verify_chain", Json::object()});
    const Json r = h::run_scenario(spec);
    const double a = r["tasks"][0]["result"]["value"].get<double>();
    const double b = r["tasks"][1]["result"]["value"].get<double>();
    check(r["failed"] == 0 && std::abs(a - b) <= 1e-9 * std::max(1.0, b),
          "carleson min-cut equals enumeration, seed " + std::to_string(c.seed + k), failures);
  }
  for (int n = 2; n <= 4; ++n) {
    h::ScenarioSpec spec;
    spec.instance = {{"builtin", {{"name", "simple_car_not_rec"}, {"n", n}}}};
    spec.tasks.push_back({"w", "witness_ratio", {{"subset", "omega0"}}});
    spec.tasks.push_back({"c", "carleson_constant_exact", Json::object()});
    const Json r = h::run_scenario(spec);
    check(r["tasks"][0]["result"]["value_exact"] == std::to_string(n + 1) &&
              r["tasks"][1]["result"]["value"].get<double>() <= 4.0,
          "simple family N=" + std::to_string(n) + ": witness N+1, Carleson <= 4", failures);
  }
  {
    h::ScenarioSpec spec;
    spec.instance = {{"random", {{"depth", {2, 2}}, {"seed", c.seed}, {"weight", "product"}}}};
    spec.tasks.push_back({"audit", "extremal_weight_audit", {{"psi", "random"}, {"seed", c.seed}}});
    const Json r = h::run_scenario(spec);
    const auto& a = r["tasks"][0]["result"];
    check(r["failed"] == 0 && a["identity_holds"] == true && a["carleson_at_most_one"] == true,
          "extremal weight audit", failures);
  }
  {
    const auto rep = h::sweep("rec_vs_embedding", {64, 256}, c.seed);
    double prev = 0.0;
    bool up = true;
    for (const auto& row : rep.rows) {
      if (row.quantity != "ratio") continue;
      up &= row.value > prev;
      prev = row.value;
    }
    check(up, "structured embedding ratio grows with N", failures);
  }
  std::cout << (failures == 0 ? "selftest passed" : "selftest failed") << '\n';
  return failures == 0 ? kOk : kAssertion;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Carleson-type constants and embeddings on dyadic bi-trees"};
  app.require_subcommand(1);

  Common c;
  std::string scenario, weight = "product", construction = "simple_car_not_rec", experiment, ns;
  int n = 4, instances = 64, samples = 200;

  auto* constants = app.add_subcommand("constants", "Box, Carleson, hereditary and embedding constants");
  add_common(constants, c);
  constants->add_option("--scenario", scenario, "scenario file supplying the instance");
  constants->add_option("--weight", weight, "random weight kind")->check(CLI::IsMember({"product", "general", "hooked"}));

  auto* verify = app.add_subcommand("verify", "run a scenario, or check Box <= C <= HC <= CE on a random instance");
  add_common(verify, c);
  verify->add_option("--scenario", scenario, "scenario file");
  verify->add_option("--weight", weight, "random weight kind")->check(CLI::IsMember({"product", "general", "hooked"}));

  auto* counter = app.add_subcommand("counterexample", "evaluate a counterexample family");
  add_common(counter, c);
  counter->add_option("--construction", construction, "family")
      ->check(CLI::IsMember({"simple_car_not_rec", "upset_car_not_rec", "sum_of_products", "rec_not_embedding"}));
  counter->add_option("--n", n, "N");

  auto* sweep = app.add_subcommand("sweep", "tabulate an experiment over N");
  add_common(sweep, c);
  sweep->add_option("--experiment", experiment, "experiment")->required()->check(CLI::IsMember(h::sweep_experiments()));
  sweep->add_option("--n", ns, "comma-separated N (depths for depth-based experiments)")->required();
  sweep->add_option("--instances", instances, "random instances per depth");
  sweep->add_option("--samples", samples, "probe samples");

  auto* self = app.add_subcommand("selftest", "quick internal consistency checks");
  add_common(self, c);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*constants) {
      h::ScenarioSpec spec;
      spec.instance = scenario.empty() ? random_instance(c, weight) : load_scenario(scenario).instance;
      const std::string m = c.method.empty() ? "exact_mincut" : c.method;
      spec.tasks.push_back({"box", "box_constant", Json::object()});
      spec.tasks.push_back({"carleson", "carleson_constant", {{"method", m}, {"tol", c.tol}}});
      spec.tasks.push_back({"hereditary", "hereditary_constant",
                            {{"method", "auto"}, {"seed", c.seed}}});
      spec.tasks.push_back({"embedding", "embedding_constant", Json::object()});
      return run_and_emit(spec, c, "constants");
    }
    if (*verify) {
      if (!scenario.empty()) return run_and_emit(load_scenario(scenario), c, "verify");
      h::ScenarioSpec spec;
      spec.instance = random_instance(c, weight);
      spec.tasks.push_back({"chain", "verify_chain", {{"seed", c.seed}}});
      return run_and_emit(spec, c, "verify");
    }
    if (*counter) {
      if (n <= bitree::kMaxDenseExtremalDepth) {
        h::ScenarioSpec spec;
        spec.instance = {{"builtin", {{"name", construction}, {"n", n}}}};
        spec.tasks.push_back({"box", "box_constant", Json::object()});
        spec.tasks.push_back({"carleson", "carleson_constant_exact", Json::object()});
        spec.tasks.push_back({"witness", "witness_ratio", {{"subset", construction == "rec_not_embedding" ? "support" : "omega0"}}});
        spec.tasks.push_back({"embedding", "embedding_constant", Json::object()});
        return run_and_emit(spec, c, "counterexample");
      }
      const std::string exp = construction == "rec_not_embedding" ? "rec_vs_embedding"
                              : construction == "sum_of_products" ? "sum_of_products"
                                                                  : "car_vs_rec";
      const auto rep = h::sweep(exp, {n}, c.seed);
      emit(c.format == "csv" ? h::to_csv(rep) : h::to_json(rep).dump(2) + "\n", c.out, "counterexample." + c.format);
      return kOk;
    }
    if (*sweep) {
      h::SweepOptions opt;
      opt.jobs = c.jobs;
      opt.instances = instances;
      opt.probe_samples = samples;
      const auto rep = h::sweep(experiment, int_list(ns, "--n"), c.seed, opt);
      emit(c.format == "csv" ? h::to_csv(rep) : h::to_json(rep).dump(2) + "\n", c.out,
           "sweep_" + experiment + "." + c.format);
      return kOk;
    }
    if (*self) return selftest(c);
  } catch (const bitree::InvariantError& e) {
    std::cerr << "assertion failed: " << e.what() << '\n';
    return kAssertion;
  } catch (const bitree::SolverError& e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    return kSolver;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kOk;
}
