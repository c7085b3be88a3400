#pragma once

// Scenario files: JSON documents describing an evolution law plus default run
// parameters. Measure literals:
//
//   {"type":"dirac","x":"1/3"}
//   {"type":"atoms","points":[[0,"1/2"],["1/2","1/2"]]}     // [location, weight]
//   {"type":"wrapped_gaussian","mean":0.0,"variance":0.5}
//   {"type":"uniform"}
//   {"type":"piecewise","breaks":[0,0.5,1],"densities":[1.5,0.5]}
//
// Numbers given as strings are parsed as exact rationals ("1/3", "-2", "5/8").
// A location given as an exact rational keeps its rational tag.
//
// Sequence:
//   {"prefix": {"0": <measure>, "-1": <measure>, ...},
//    "tail": {"type":"iid","law":<measure>}
//          | {"type":"wg","means":{"kind":"zero"|"constant"|"alternating","m":..},
//             "variances":{"kind":"geometric","c":..,"r":..}
//                       | {"kind":"power","c":..,"s":..}
//                       | {"kind":"constant","c":..}}
//          | {"type":"scaled_density","density":<piecewise measure>}}
//
// A scenario file is either one scenario object
//   {"name":..., "description":..., "sequence":..., "defaults":{...}}
// or {"scenarios":[...]} with unique names.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "tsirelson/sequence.hpp"
#include "tsirelson/simulator.hpp"

namespace tsirelson {

struct ScenarioDefaults {
  std::int64_t depth = 30;
  std::int64_t samples = 100000;
  std::uint64_t seed = 42;
  std::int64_t pmax = 64;
  Anchor anchor = anchors::Deterministic{};
};

struct Scenario {
  std::string name;
  std::string description;
  MeasureSequence sequence;
  ScenarioDefaults defaults;
};

TorusMeasure parse_measure(const nlohmann::json& j, const std::string& where = "measure");
MeasureSequence parse_sequence(const nlohmann::json& j, const std::string& where = "sequence");
// "det:<x>" (x real or exact rational), "uniform", or "law:<measure JSON>".
Anchor parse_anchor(std::string_view text);

std::vector<Scenario> parse_scenarios(std::string_view text, const std::string& source = "<input>");
// Loads the scenario named `name`, or the only one in the file when name is empty.
Scenario load_scenario(const std::string& path, const std::string& name = {});

std::vector<std::string> builtin_names();
// Throws InvalidArgument for unknown names.
Scenario builtin_scenario(const std::string& name);
// The JSON text of a built-in, as shipped.
std::string builtin_source(const std::string& name);

}  // namespace tsirelson
