#include "tsirelson/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "tsirelson/errors.hpp"

namespace tsirelson {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& where, const std::string& what) { throw ParseError(where + ": " + what); }

const json& field(const json& j, const char* key, const std::string& where) {
  if (!j.is_object()) fail(where, "expected an object");
  const auto it = j.find(key);
  if (it == j.end()) fail(where, std::string("missing field '") + key + "'");
  return *it;
}

std::string text_field(const json& j, const char* key, const std::string& where) {
  const auto& v = field(j, key, where);
  if (!v.is_string()) fail(where + "." + key, "expected a string");
  return v.get<std::string>();
}

Rational rational_of(const json& j, const std::string& where) {
  try {
    return Rational::parse(j.get<std::string>());
  } catch (const ParseError& e) {
    fail(where, e.what());
  }
}

double number(const json& j, const std::string& where) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) return rational_of(j, where).to_double();
  fail(where, "expected a number or an exact rational string");
}

double number_field(const json& j, const char* key, const std::string& where) {
  return number(field(j, key, where), where + "." + key);
}

Location location(const json& j, const std::string& where) {
  if (j.is_string()) return Location::rational(rational_of(j, where));
  if (j.is_number_integer()) return Location::rational(Rational(j.get<std::int64_t>(), 1));
  if (j.is_number()) return Location::real(j.get<double>());
  fail(where, "expected a location (number or exact rational string)");
}

std::vector<double> number_list(const json& j, const std::string& where) {
  if (!j.is_array()) fail(where, "expected an array");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(number(j[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

template <class F>
auto validated(const std::string& where, F&& build) -> decltype(build()) {
  try {
    return build();
  } catch (const ValidationError& e) {
    throw ValidationError(where + ": " + e.what());
  }
}

MeanRule parse_means(const json& j, const std::string& where) {
  if (j.is_string() && j.get<std::string>() == "zero") return means::Zero{};
  const std::string kind = text_field(j, "kind", where);
  if (kind == "zero") return means::Zero{};
  if (kind == "constant") return means::Constant{number_field(j, "m", where)};
  if (kind == "alternating") return means::Alternating{number_field(j, "m", where)};
  fail(where + ".kind", "unknown mean rule '" + kind + "'");
}

VarianceRule parse_variances(const json& j, const std::string& where) {
  const std::string kind = text_field(j, "kind", where);
  if (kind == "geometric") return variances::Geometric{number_field(j, "c", where), number_field(j, "r", where)};
  if (kind == "power") return variances::PowerLaw{number_field(j, "c", where), number_field(j, "s", where)};
  if (kind == "constant") return variances::Constant{number_field(j, "c", where)};
  fail(where + ".kind", "unknown variance rule '" + kind + "'");
}

TailRule parse_tail(const json& j, const std::string& where) {
  const std::string type = text_field(j, "type", where);
  if (type == "iid") return TailRule::iid(parse_measure(field(j, "law", where), where + ".law"));
  if (type == "wg") {
    const json means_json = j.contains("means") ? j.at("means") : json("zero");
    auto means = parse_means(means_json, where + ".means");
    auto vars = parse_variances(field(j, "variances", where), where + ".variances");
    return validated(where, [&] { return TailRule::wrapped_gaussian(means, vars); });
  }
  if (type == "scaled_density") {
    auto density = parse_measure(field(j, "density", where), where + ".density");
    return validated(where, [&] { return TailRule::scaled_density(std::move(density)); });
  }
  fail(where + ".type", "unknown tail type '" + type + "'");
}

std::int64_t positive_int(const json& j, const char* key, const std::string& where) {
  const auto& v = field(j, key, where);
  if (!v.is_number_integer() || v.get<std::int64_t>() < 1) {
    throw ValidationError(where + "." + key + ": must be a positive integer");
  }
  return v.get<std::int64_t>();
}

Scenario parse_one(const json& j, const std::string& where) {
  Scenario s{text_field(j, "name", where), "", parse_sequence(field(j, "sequence", where), where + ".sequence"), {}};
  if (j.contains("description")) s.description = text_field(j, "description", where);
  if (j.contains("defaults")) {
    const auto& d = j.at("defaults");
    const std::string dw = where + ".defaults";
    if (!d.is_object()) fail(dw, "expected an object");
    if (d.contains("depth")) s.defaults.depth = positive_int(d, "depth", dw);
    if (d.contains("samples")) s.defaults.samples = positive_int(d, "samples", dw);
    if (d.contains("pmax")) s.defaults.pmax = positive_int(d, "pmax", dw);
    if (d.contains("seed")) {
      const auto& v = d.at("seed");
      if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
        throw ValidationError(dw + ".seed: must be a nonnegative integer");
      }
      s.defaults.seed = v.get<std::uint64_t>();
    }
    if (d.contains("anchor")) {
      const auto& a = d.at("anchor");
      if (!a.is_string()) fail(dw + ".anchor", "expected a string such as \"det:0\"");
      s.defaults.anchor = parse_anchor(a.get<std::string>());
    }
  }
  return s;
}

struct Builtin {
  const char* name;
  const char* source;
};

// Canonical scenarios. Kept as JSON so they go through the same parser as
// user files.
const Builtin kBuiltins[] = {
    {"c1_wrapped_gaussian", R"js({
  "name": "c1_wrapped_gaussian",
  "description": "iid wrapped Gaussian(0, 0.5): variances not summable, uniqueness in law",
  "sequence": {"tail": {"type": "iid", "law": {"type": "wrapped_gaussian", "mean": 0.0, "variance": 0.5}}}
})js"},
    {"c1_constant_variance_gaussian", R"js({
  "name": "c1_constant_variance_gaussian",
  "description": "wrapped-Gaussian tail, zero means, constant variance 0.5",
  "sequence": {"tail": {"type": "wg", "means": {"kind": "zero"}, "variances": {"kind": "constant", "c": 0.5}}}
})js"},
    {"c1_power_law_gaussian", R"js({
  "name": "c1_power_law_gaussian",
  "description": "wrapped-Gaussian tail with variances 0.5/|j|: harmonic, not summable",
  "sequence": {"tail": {"type": "wg", "means": {"kind": "zero"}, "variances": {"kind": "power", "c": 0.5, "s": 1.0}}}
})js"},
    {"c1_roulette", R"js({
  "name": "c1_roulette",
  "description": "mu_j = law of frac(j gamma), gamma with a piecewise density (roulette wheel)",
  "sequence": {"tail": {"type": "scaled_density",
                        "density": {"type": "piecewise", "breaks": [0, 0.5, 1], "densities": [1.5, 0.5]}}}
})js"},
    {"c1_irrational_atoms", R"js({
  "name": "c1_irrational_atoms",
  "description": "iid two-point law at 0 and sqrt(2)-1: not arithmetic",
  "sequence": {"tail": {"type": "iid", "law": {"type": "atoms",
                        "points": [[0, "1/2"], [0.41421356237309503, "1/2"]]}}},
  "defaults": {"depth": 500, "samples": 10000}
})js"},
    {"c1_uniform_prefix", R"js({
  "name": "c1_uniform_prefix",
  "description": "mu_0 = Dirac(0.1), Haar measure before",
  "sequence": {"prefix": {"0": {"type": "dirac", "x": 0.1}}, "tail": {"type": "iid", "law": {"type": "uniform"}}}
})js"},
    {"c2_dirac_third", R"js({
  "name": "c2_dirac_third",
  "description": "iid Dirac(1/3): deterministic rotation, strong solutions",
  "sequence": {"tail": {"type": "iid", "law": {"type": "dirac", "x": "1/3"}}}
})js"},
    {"c2_geometric_gaussian", R"js({
  "name": "c2_geometric_gaussian",
  "description": "wrapped-Gaussian tail, variances (1/4) 2^-|j|: summable",
  "sequence": {"tail": {"type": "wg", "means": {"kind": "zero"},
                        "variances": {"kind": "geometric", "c": 0.25, "r": 0.5}}}
})js"},
    {"c2_drifting_gaussian", R"js({
  "name": "c2_drifting_gaussian",
  "description": "wrapped-Gaussian tail with constant mean 0.1 and geometric variances; needs centering",
  "sequence": {"tail": {"type": "wg", "means": {"kind": "constant", "m": 0.1},
                        "variances": {"kind": "geometric", "c": 0.25, "r": 0.5}}}
})js"},
    {"c2_power_law_gaussian", R"js({
  "name": "c2_power_law_gaussian",
  "description": "wrapped-Gaussian tail with variances 0.5/j^2: summable",
  "sequence": {"tail": {"type": "wg", "means": {"kind": "zero"}, "variances": {"kind": "power", "c": 0.5, "s": 2.0}}}
})js"},
    {"c3_half_atoms", R"js({
  "name": "c3_half_atoms",
  "description": "iid fair coin on {0, 1/2}: charges exactly the subgroup of order 2",
  "sequence": {"tail": {"type": "iid", "law": {"type": "atoms", "points": [[0, "1/2"], ["1/2", "1/2"]]}}}
})js"},
    {"c3_thirds", R"js({
  "name": "c3_thirds",
  "description": "iid uniform law on {0, 1/3, 2/3}",
  "sequence": {"tail": {"type": "iid", "law": {"type": "atoms",
                        "points": [[0, "1/3"], ["1/3", "1/3"], ["2/3", "1/3"]]}}}
})js"},
    {"cyclic_eighths", R"js({
  "name": "cyclic_eighths",
  "description": "iid atoms on (1/8)Z: {0: 1/2, 1/8: 1/4, 3/8: 1/4}; exact cyclic oracle available",
  "sequence": {"tail": {"type": "iid", "law": {"type": "atoms",
                        "points": [[0, "1/2"], ["1/8", "1/4"], ["3/8", "1/4"]]}}},
  "defaults": {"depth": 12}
})js"},
};

}  // namespace

TorusMeasure parse_measure(const json& j, const std::string& where) {
  const std::string type = text_field(j, "type", where);
  if (type == "dirac") return TorusMeasure::dirac(location(field(j, "x", where), where + ".x"));
  if (type == "uniform") return TorusMeasure::uniform();
  if (type == "wrapped_gaussian") {
    const double mean = number_field(j, "mean", where);
    const double variance = number_field(j, "variance", where);
    return validated(where, [&] { return TorusMeasure::wrapped_gaussian(mean, variance); });
  }
  if (type == "atoms") {
    const auto& points = field(j, "points", where);
    if (!points.is_array() || points.empty()) fail(where + ".points", "expected a nonempty array");
    std::vector<Atom> atoms;
    for (std::size_t i = 0; i < points.size(); ++i) {
      const std::string pw = where + ".points[" + std::to_string(i) + "]";
      const auto& pair = points[i];
      if (!pair.is_array() || pair.size() != 2) fail(pw, "expected [location, weight]");
      atoms.push_back({location(pair[0], pw + "[0]"), number(pair[1], pw + "[1]")});
    }
    return validated(where, [&] { return TorusMeasure::atoms(std::move(atoms)); });
  }
  if (type == "piecewise") {
    auto breaks = number_list(field(j, "breaks", where), where + ".breaks");
    auto densities = number_list(field(j, "densities", where), where + ".densities");
    return validated(where, [&] { return TorusMeasure::piecewise(std::move(breaks), std::move(densities)); });
  }
  fail(where + ".type", "unknown measure type '" + type + "'");
}

MeasureSequence parse_sequence(const json& j, const std::string& where) {
  std::vector<TorusMeasure> prefix;
  if (j.contains("prefix")) {
    const auto& p = j.at("prefix");
    if (!p.is_object()) fail(where + ".prefix", "expected an object keyed by index");
    std::map<std::int64_t, TorusMeasure> by_index;
    for (const auto& [key, value] : p.items()) {
      std::int64_t k = 0;
      const auto [ptr, ec] = std::from_chars(key.data(), key.data() + key.size(), k);
      if (ec != std::errc() || ptr != key.data() + key.size() || k > 0) {
        fail(where + ".prefix", "key '" + key + "' is not an index <= 0");
      }
      by_index.emplace(k, parse_measure(value, where + ".prefix[" + key + "]"));
    }
    for (std::int64_t k = 0; k > -static_cast<std::int64_t>(by_index.size()); --k) {
      const auto it = by_index.find(k);
      if (it == by_index.end()) {
        throw ValidationError(where + ".prefix: keys must be exactly 0, -1, ..., -K (missing " + std::to_string(k) + ")");
      }
      prefix.push_back(it->second);
    }
  }
  return MeasureSequence(std::move(prefix), parse_tail(field(j, "tail", where), where + ".tail"));
}

Anchor parse_anchor(std::string_view text) {
  if (text == "uniform") return anchors::UniformLaw{};
  if (text.starts_with("det:")) {
    const std::string value(text.substr(4));
    if (value.find('/') != std::string::npos) return anchors::Deterministic{TorusPoint::from_rational(Rational::parse(value))};
    try {
      std::size_t used = 0;
      const double x = std::stod(value, &used);
      if (used != value.size()) throw ParseError("trailing characters");
      return anchors::Deterministic{TorusPoint::from_real(x)};
    } catch (const std::exception&) {
      throw ParseError("anchor: cannot parse '" + value + "' as a location");
    }
  }
  if (text.starts_with("law:")) {
    json j;
    try {
      j = json::parse(text.substr(4));
    } catch (const json::parse_error& e) {
      throw ParseError(std::string("anchor law: ") + e.what());
    }
    return anchors::Law{parse_measure(j, "anchor")};
  }
  throw ParseError("anchor: expected det:<x>, uniform or law:<measure>, got '" + std::string(text) + "'");
}

std::vector<Scenario> parse_scenarios(std::string_view text, const std::string& source) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(source + ": " + e.what());
  }
  std::vector<Scenario> out;
  if (j.is_object() && j.contains("scenarios")) {
    const auto& list = j.at("scenarios");
    if (!list.is_array()) fail(source + ".scenarios", "expected an array");
    std::set<std::string> names;
    for (std::size_t i = 0; i < list.size(); ++i) {
      out.push_back(parse_one(list[i], source + ".scenarios[" + std::to_string(i) + "]"));
      if (!names.insert(out.back().name).second) {
        throw ValidationError(source + ": duplicate scenario name '" + out.back().name + "'");
      }
    }
  } else {
    out.push_back(parse_one(j, source));
  }
  return out;
}

Scenario load_scenario(const std::string& path, const std::string& name) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open scenario file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  auto all = parse_scenarios(buffer.str(), path);
  if (name.empty()) {
    if (all.size() != 1) throw InvalidArgument(path + " holds " + std::to_string(all.size()) + " scenarios; pick one by name");
    return all.front();
  }
  for (auto& s : all) {
    if (s.name == name) return s;
  }
  throw InvalidArgument("no scenario named '" + name + "' in " + path);
}

std::vector<std::string> builtin_names() {
  std::vector<std::string> names;
  for (const auto& b : kBuiltins) names.emplace_back(b.name);
  return names;
}

std::string builtin_source(const std::string& name) {
  for (const auto& b : kBuiltins) {
    if (name == b.name) return b.source;
  }
  throw InvalidArgument("unknown built-in scenario '" + name + "'");
}

Scenario builtin_scenario(const std::string& name) {
  return parse_scenarios(builtin_source(name), "builtin:" + name).front();
}

}  // namespace tsirelson
