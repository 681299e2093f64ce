#pragma once

// Scenario runner and sweep tables behind the command-line tool.
//
// Scenario (JSON, schema "bitree-embed/1"):
//   { "schema": "bitree-embed/1",
//     "instance": { "builtin":  { "name": ..., "n": ..., ... } }
//               | { "explicit": { "depth": [dx, dy],
//                                 "mass":   [ { "node": [gx, ox, gy, oy], "value": v }, ... ],
//                                 "weight": [ ... ] } }
//               | { "random":   { "depth": [dx, dy], "seed": s, "weight": "product",
//                                 "density": 0.6, "boundary_only": true } },
//     "tasks": [ { "id": "...", "op": "carleson_constant", ...params }, ... ],
//     "output": { "path": "...", "format": "json" } }
//
// Sweep CSV columns, in order:
//   experiment,n,construction,quantity,value,ratio,slope,slope_axis,witness,seed,params

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "bitree/fields.hpp"
#include "bitree/topology.hpp"

namespace bitree::harness {

using Json = nlohmann::ordered_json;

inline constexpr const char* kSchema = "bitree-embed/1";

struct Instance {
  std::string description;  // e.g. "builtin:simple_car_not_rec"
  BiTreeTopology topo{0, 0};
  MassFunction mu;
  WeightFunction w;
  std::optional<std::size_t> omega0;
  std::vector<std::size_t> q_nodes;
};

struct TaskSpec {
  std::string id;
  std::string op;
  Json params;  // the whole task object
};

struct ScenarioSpec {
  Json instance;
  std::vector<TaskSpec> tasks;
  std::optional<std::string> output_path;
  std::string format = "json";
};

/// Throws ParseError naming the offending JSON path.
ScenarioSpec parse_scenario(const Json& j);
ScenarioSpec parse_scenario_text(const std::string& text);

Instance build_instance(const Json& instance_spec);

std::vector<std::string> task_ops();

/// One task's result object. Library errors propagate.
Json run_task(const Instance& inst, const TaskSpec& task);

/// Tasks run in order (or on `jobs` threads; the report order is the task
/// order). A failing task is reported with its id, error type and message;
/// the remaining tasks still run.
Json run_scenario(const ScenarioSpec& spec, int jobs = 1);

/// Most severe error type among failed tasks, or empty.
std::string worst_failure(const Json& report);

/// [gx, ox, gy, oy].
Json node_json(const BiTreeTopology& topo, std::size_t i);
std::size_t node_from_json(const BiTreeTopology& topo, const Json& j, const std::string& path);

/// printf("%.17g"); "inf", "-inf", "nan" for non-finite values.
std::string format_double(double v);

struct SweepRow {
  std::string experiment;
  int n = 0;
  std::string construction;
  std::string quantity;
  double value = 0.0;
  double ratio = 0.0;  // value / value at the first n of the same series
  double slope = 0.0;  // least-squares slope of value against slope_axis over the series
  std::string slope_axis;
  std::string witness;
  std::uint64_t seed = 0;
  Json params;
};

struct SweepReport {
  std::string experiment;
  std::uint64_t seed = 0;
  std::vector<SweepRow> rows;
};

struct SweepOptions {
  int jobs = 1;
  int instances = 64;       // chain_ratios_product_w: random instances per depth
  int probe_samples = 200;  // maximal_probe
};

std::vector<std::string> sweep_experiments();

/// `ns` are depths for chain_ratios_product_w and maximal_probe, N otherwise.
/// Unknown experiment: PreconditionError.
SweepReport sweep(const std::string& experiment, const std::vector<int>& ns, std::uint64_t seed,
                  const SweepOptions& opt = {});

Json to_json(const SweepReport& r);
std::string to_csv(const SweepReport& r);

/// Seed of the k-th random instance at a depth in chain_ratios_product_w;
/// feeding it to a "random" scenario with weight "product" rebuilds the instance.
std::uint64_t chain_instance_seed(std::uint64_t seed, int depth, int k);

}  // namespace bitree::harness
