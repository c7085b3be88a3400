// tsirelson: scenario-driven front end for the torus recursion toolkit.
//
// Exit status: 0 when every test passes, 1 when any test fails, 2 on usage,
// I/O or parse errors.

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "tsirelson/classifier.hpp"
#include "tsirelson/errors.hpp"
#include "tsirelson/scenario.hpp"
#include "tsirelson/simulator.hpp"
#include "tsirelson/stats.hpp"
#include "tsirelson/suite.hpp"

namespace ts = tsirelson;

namespace {

struct Globals {
  std::string scenario_path;
  std::string scenario_name;
  std::string builtin;
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> samples;
  std::optional<std::int64_t> depth;
  std::optional<std::int64_t> pmax;
  std::string out;
  std::string format = "text";
  std::string anchor;
  std::optional<std::int64_t> truncation;
  std::string input;
};

struct Run {
  ts::Scenario scenario;
  std::int64_t depth, samples, pmax;
  std::uint64_t seed;
  ts::Anchor anchor;
  unsigned workers;
};

std::string num(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  std::ostringstream os;
  os << std::setprecision(17) << x;
  return os.str();
}

std::string short_num(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  std::ostringstream os;
  os << std::setprecision(9) << x;
  return os.str();
}

Run resolve(const Globals& g) {
  if (g.scenario_path.empty() == g.builtin.empty()) {
    throw ts::InvalidArgument("exactly one of --scenario PATH or --builtin NAME is required");
  }
  Run r{g.builtin.empty() ? ts::load_scenario(g.scenario_path, g.scenario_name) : ts::builtin_scenario(g.builtin),
        0, 0, 0, 0, {}, ts::default_workers()};
  const auto& d = r.scenario.defaults;
  r.depth = g.depth.value_or(d.depth);
  r.samples = g.samples.value_or(d.samples);
  r.pmax = g.pmax.value_or(d.pmax);
  r.seed = g.seed.value_or(d.seed);
  r.anchor = g.anchor.empty() ? d.anchor : ts::parse_anchor(g.anchor);
  if (r.depth < 0) throw ts::InvalidArgument("--depth must be >= 0");
  if (r.samples < 1) throw ts::InvalidArgument("--samples must be >= 1");
  if (r.pmax < 1) throw ts::InvalidArgument("--pmax must be >= 1");
  return r;
}

ts::ChainEnsemble simulate(const Run& r) {
  return ts::simulate({r.scenario.sequence, r.depth, r.anchor, r.samples, r.seed, r.workers});
}

ts::TorusPoint deterministic_anchor(const Run& r) {
  if (const auto* d = std::get_if<ts::anchors::Deterministic>(&r.anchor)) return d->v;
  throw ts::InvalidArgument("this command needs a deterministic anchor (det:<x>), got " + ts::describe(r.anchor));
}

std::ofstream open_out(const std::string& dir, const std::string& file) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ts::IoError("cannot create '" + dir + "': " + ec.message());
  const auto path = std::filesystem::path(dir) / file;
  std::ofstream out(path);
  if (!out) throw ts::IoError("cannot write '" + path.string() + "'");
  return out;
}

// Rows of named tests rendered as text or CSV; the status drives the exit code.
class Report {
 public:
  explicit Report(std::string title) : title_(std::move(title)) {}
  void info(const std::string& key, const std::string& value) { info_.emplace_back(key, value); }
  void test(const std::string& name, double statistic, const std::string& relation, double threshold,
            const std::string& note = {}) {
    const bool pass = relation == ">" ? statistic > threshold : statistic <= threshold;
    rows_.push_back({name, statistic, relation, threshold, pass, note});
  }
  bool pass() const {
    for (const auto& r : rows_) {
      if (!r.pass) return false;
    }
    return true;
  }
  void write(std::ostream& os, const std::string& format) const {
    if (format == "csv") {
      os << "# test,statistic,relation,threshold,pass,note\n";
      for (const auto& r : rows_) {
        std::string note = r.note;
        for (char& c : note) {
          if (c == ',') c = ';';
        }
        os << r.name << "," << short_num(r.statistic) << "," << r.relation << "," << short_num(r.threshold) << ","
           << (r.pass ? 1 : 0) << "," << note << "\n";
      }
      return;
    }
    os << title_ << "\n";
    for (const auto& [k, v] : info_) os << k << ": " << v << "\n";
    for (const auto& r : rows_) {
      os << (r.pass ? "PASS " : "FAIL ") << std::left << std::setw(30) << r.name << " " << short_num(r.statistic) << " "
         << r.relation << " " << short_num(r.threshold);
      if (!r.note.empty()) os << "  [" << r.note << "]";
      os << "\n";
    }
    if (!rows_.empty()) os << "overall: " << (pass() ? "PASS" : "FAIL") << "\n";
  }

 private:
  struct Row {
    std::string name;
    double statistic;
    std::string relation;
    double threshold;
    bool pass;
    std::string note;
  };
  std::string title_;
  std::vector<std::pair<std::string, std::string>> info_;
  std::vector<Row> rows_;
};

int finish(const Report& report, const Globals& g, const std::string& file) {
  if (!g.out.empty()) {
    auto out = open_out(g.out, file);
    report.write(out, "csv");
  }
  report.write(std::cout, g.format);
  return report.pass() ? 0 : 1;
}

// --- sample CSVs -------------------------------------------------------------

std::string eta_name(std::int64_t k) { return "eta[" + std::to_string(k) + "]"; }
std::string xi_name(std::int64_t k) { return "xi[" + std::to_string(k) + "]"; }

void write_ensemble(std::ostream& os, const ts::ChainEnsemble& e) {
  const std::int64_t n = e.depth();
  os << "# sample";
  for (std::int64_t k = -n - 1; k <= 0; ++k) os << "," << eta_name(k);
  for (std::int64_t k = -n; k <= 0; ++k) os << "," << xi_name(k);
  os << "\n";
  for (std::size_t i = 0; i < e.samples(); ++i) {
    os << i;
    for (std::int64_t k = -n - 1; k <= 0; ++k) os << "," << num(e.state(i, k).value());
    for (std::int64_t k = -n; k <= 0; ++k) os << "," << num(e.noise(i, k).value());
    os << "\n";
  }
}

void write_column(std::ostream& os, const std::string& name, const std::vector<ts::TorusPoint>& xs) {
  os << "# sample," << name << "\n";
  for (std::size_t i = 0; i < xs.size(); ++i) os << i << "," << num(xs[i].value()) << "\n";
}

class SampleTable {
 public:
  explicit SampleTable(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ts::IoError("cannot read '" + path + "'");
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      if (line[0] == '#') {
        if (names_.empty()) names_ = split(line.substr(line.find_first_not_of("# ")));
        continue;
      }
      if (names_.empty()) throw ts::ParseError(path + ":" + std::to_string(line_no) + ": missing '# columns' header");
      const auto cells = split(line);
      if (cells.size() != names_.size()) {
        throw ts::ParseError(path + ":" + std::to_string(line_no) + ": expected " + std::to_string(names_.size()) +
                             " cells, got " + std::to_string(cells.size()));
      }
      rows_.push_back(cells);
    }
  }
  std::vector<ts::TorusPoint> column(const std::string& name) const {
    std::size_t c = 0;
    while (c < names_.size() && names_[c] != name) ++c;
    if (c == names_.size()) throw ts::ParseError("no column '" + name + "' in sample file");
    std::vector<ts::TorusPoint> out;
    out.reserve(rows_.size());
    for (std::size_t r = 0; r < rows_.size(); ++r) {
      try {
        std::size_t used = 0;
        const double x = std::stod(rows_[r][c], &used);
        if (used != rows_[r][c].size()) throw std::invalid_argument("trailing text");
        out.push_back(ts::TorusPoint::from_real(x));
      } catch (const std::exception&) {
        throw ts::ParseError("row " + std::to_string(r + 1) + ", column '" + name + "': not a number: '" +
                             rows_[r][c] + "'");
      }
    }
    return out;
  }

 private:
  static std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    return cells;
  }
  std::vector<std::string> names_;
  std::vector<std::vector<std::string>> rows_;
};

std::vector<std::int64_t> parse_int_list(const std::string& text) {
  std::vector<std::int64_t> out;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stoll(cell, &used));
      if (used != cell.size()) throw std::invalid_argument("trailing text");
    } catch (const std::exception&) {
      throw ts::InvalidArgument("not an integer list: '" + text + "'");
    }
  }
  if (out.empty()) throw ts::InvalidArgument("empty integer list");
  return out;
}

// --- commands ----------------------------------------------------------------

int cmd_list(const Globals& g) {
  if (g.format == "csv") std::cout << "# name,verdict,description\n";
  for (const auto& name : ts::builtin_names()) {
    const auto s = ts::builtin_scenario(name);
    const auto verdict = ts::classify(s.sequence, s.defaults.pmax).label();
    if (g.format == "csv") {
      std::cout << name << "," << verdict << "," << s.description << "\n";
    } else {
      std::cout << std::left << std::setw(32) << name << std::setw(7) << verdict << s.description << "\n";
    }
  }
  return 0;
}

int cmd_classify(const Globals& g) {
  const Run r = resolve(g);
  const auto result = ts::classify(r.scenario.sequence, r.pmax);
  const auto& ev = result.evidence;
  std::ostringstream csv;
  csv << "# p,member,status,zero_factors,tail_log_sum,certified\n";
  for (const auto& [p, v] : ev.per_p) {
    csv << p << "," << (v.status == ts::LogProductVerdict::Status::Finite ? 1 : 0) << "," << ts::to_string(v.status)
        << "," << v.zero_factor_count << "," << short_num(v.tail_log_sum) << "," << (v.certified ? 1 : 0) << "\n";
  }
  if (!g.out.empty()) open_out(g.out, "classify.csv") << csv.str();
  if (g.format == "csv") {
    std::cout << csv.str();
    return 0;
  }
  std::cout << "scenario: " << r.scenario.name << "\n"
            << "case: " << result.label() << "\n"
            << "p_mu: " << ev.p_mu << "\n"
            << "scan bound: " << ev.scan_bound << "\n"
            << "certified: " << (ev.fully_certified ? "yes" : "no")
            << (ev.p_mu == 0 ? (ev.all_frequencies_certified ? " (every p >= 1)" : " (p <= scan bound only)") : "")
            << "\n";
  if (result.centering) std::cout << "centering alpha_0: " << num(result.centering->at(0).value()) << "\n";
  std::cout << "members within bound:";
  const std::size_t shown = std::min<std::size_t>(ev.members.size(), 8);
  for (std::size_t i = 0; i < shown; ++i) std::cout << " " << ev.members[i];
  if (ev.members.size() > shown) std::cout << " ...";
  if (ev.members.empty()) std::cout << " none";
  std::cout << "\n\n" << std::left << std::setw(6) << "p" << std::setw(26) << "status" << std::setw(14) << "zero_factors"
            << std::setw(16) << "tail_log_sum" << "certified\n";
  for (const auto& [p, v] : ev.per_p) {
    std::cout << std::setw(6) << p << std::setw(26) << ts::to_string(v.status) << std::setw(14) << v.zero_factor_count
              << std::setw(16) << short_num(v.tail_log_sum) << (v.certified ? "yes" : "no") << "\n";
  }
  return 0;
}

int cmd_simulate(const Globals& g) {
  const Run r = resolve(g);
  const auto e = simulate(r);
  const auto pathwise = ts::check_pathwise(e);
  Report report("simulate " + r.scenario.name);
  report.info("depth", std::to_string(r.depth));
  report.info("samples", std::to_string(r.samples));
  report.info("seed", std::to_string(r.seed));
  report.info("anchor", ts::describe(r.anchor));
  const auto theta = e.states_at(0);
  for (std::int64_t p = 1; p <= 3; ++p) report.info("|ECF(eta_0, " + std::to_string(p) + ")|", short_num(std::abs(ts::ecf(theta, p))));
  report.test("pathwise_recursion", pathwise.recursion ? 0 : 1, "<=", 0);
  report.test("pathwise_telescope", pathwise.max_telescope_error, "<=", 1e-9);
  report.test("noise_recovery", pathwise.noise_recovery ? 0 : 1, "<=", 0);
  if (!g.out.empty()) {
    auto out = open_out(g.out, "samples.csv");
    write_ensemble(out, e);
  }
  report.write(std::cout, g.format);
  return report.pass() ? 0 : 1;
}

int cmd_limit(const Globals& g) {
  const Run r = resolve(g);
  // Truncation L against the full depth, sharing noise.
  const std::int64_t l = g.truncation.value_or(std::max<std::int64_t>(1, r.depth - 10));
  if (l > r.depth) throw ts::InvalidArgument("--truncation must not exceed --depth");
  const auto g_shift = deterministic_anchor(r);
  const auto lim = ts::strong_limit(r.scenario.sequence, g_shift, l, r.samples, r.seed, r.workers, r.pmax);
  const auto full = ts::strong_limit(r.scenario.sequence, g_shift, r.depth, r.samples, r.seed, r.workers, r.pmax);
  Report report("limit " + r.scenario.name);
  report.info("truncation L", std::to_string(l) + " vs " + std::to_string(r.depth));
  report.info("g", num(g_shift.value()));
  report.info("discarded variance", lim.tail_variance ? short_num(*lim.tail_variance) : "unknown");
  for (std::int64_t p = 1; p <= 3; ++p) {
    report.info("|ECF(" + std::to_string(p) + ")|", short_num(std::abs(ts::ecf(full.samples, p))));
  }
  std::int64_t exceed = 0;
  for (std::size_t i = 0; i < lim.samples.size(); ++i) {
    exceed += ts::circular_distance(lim.samples[i], full.samples[i]) > 0.01;
  }
  const double freq = static_cast<double>(exceed) / static_cast<double>(lim.samples.size());
  if (const auto bound = lim.bound(0.01)) {
    const double slack = 4.0 * std::sqrt(*bound / static_cast<double>(lim.samples.size()));
    report.test("cauchy_exceedance", freq, "<=", *bound + slack, "P(|diff| > 0.01), Chebyshev bound " + short_num(*bound));
  } else {
    report.info("cauchy exceedance", short_num(freq) + " (no closed-form bound)");
  }
  if (!g.out.empty()) {
    auto out = open_out(g.out, "limit.csv");
    write_column(out, "limit_L" + std::to_string(l), lim.samples);
  }
  report.write(std::cout, g.format);
  return report.pass() ? 0 : 1;
}

int cmd_centered(const Globals& g) {
  const Run r = resolve(g);
  const std::int64_t l = -g.truncation.value_or(r.depth);
  const auto products = ts::centered_products(r.scenario.sequence, 0, l, r.samples, r.seed, r.workers);
  Report report("centered " + r.scenario.name);
  report.info("window", "[" + std::to_string(l) + ", 0]");
  report.info("centering", products.centered ? "constructive" : "none (zero used)");
  const double tau = ts::ecf_threshold(products.samples.size());
  for (std::int64_t p = 1; p <= 3; ++p) {
    const double predicted = ts::window_bias(r.scenario.sequence, l, 0, p);
    const double observed = std::abs(ts::ecf(products.samples, p));
    report.test("ecf_modulus_p" + std::to_string(p), std::abs(observed - predicted), "<=", tau,
                "observed " + short_num(observed) + ", predicted " + short_num(predicted));
  }
  if (!g.out.empty()) {
    auto out = open_out(g.out, "centered.csv");
    write_column(out, "product", products.samples);
  }
  report.write(std::cout, g.format);
  return report.pass() ? 0 : 1;
}

int cmd_convpower(const Globals& g, std::int64_t n_max, std::int64_t rows) {
  const Run r = resolve(g);
  const auto* iid = r.scenario.sequence.tail().as<ts::IidTail>();
  const ts::TorusMeasure nu = iid ? iid->law : r.scenario.sequence.measure_at(0);
  const auto table = ts::convolution_power(nu, n_max, rows);
  if (!g.out.empty()) {
    auto out = open_out(g.out, "convpower.csv");
    out << "# p,n,modulus_power\n";
    for (std::int64_t p = 1; p <= table.p_max; ++p) {
      for (std::int64_t k = 1; k <= table.n_max; ++k) out << p << "," << k << "," << short_num(table.entry(p, k)) << "\n";
    }
  }
  if (g.format == "csv") {
    std::cout << "# p,modulus,unit_modulus,strictly_less,first_n_below_1e-3\n";
  } else {
    std::cout << "law: " << nu.describe() << "\nverdict: " << ts::to_string(table.verdict) << "\n\n"
              << std::left << std::setw(6) << "p" << std::setw(22) << "|nu^(p)|" << std::setw(8) << "unit" << std::setw(8)
              << "<1" << "first n with |nu^(p)|^n < 1e-3\n";
  }
  for (std::int64_t p = 1; p <= table.p_max; ++p) {
    const auto idx = static_cast<std::size_t>(p - 1);
    const auto below = table.first_below(p, 1e-3);
    const std::string first = below ? std::to_string(*below) : "never";
    if (g.format == "csv") {
      std::cout << p << "," << num(table.modulus[idx]) << "," << table.unit_modulus[idx] << ","
                << table.strictly_less[idx] << "," << first << "\n";
    } else {
      std::cout << std::setw(6) << p << std::setw(22) << num(table.modulus[idx]) << std::setw(8)
                << (table.unit_modulus[idx] ? "yes" : "no") << std::setw(8) << (table.strictly_less[idx] ? "yes" : "no")
                << first << "\n";
    }
  }
  return 0;
}

int cmd_skeleton(const Globals& g) {
  ts::SkeletonConfig config;
  config.depth = g.depth.value_or(12);
  config.samples = g.samples.value_or(100000);
  config.seed = g.seed.value_or(42);
  config.workers = ts::default_workers();
  const auto sk = ts::skeleton(config);
  const auto theta = sk.frac_eta_at(0);
  Report report("skeleton");
  report.info("K", std::to_string(config.depth));
  report.info("samples", std::to_string(config.samples));
  report.info("seed", std::to_string(config.seed));
  const auto uni = ts::uniformity(theta, 5);
  report.test("uniformity_frac_eta0", uni.max_modulus(), "<=", uni.threshold, "p <= 5");
  ts::NoiseColumns noise;
  std::vector<std::int64_t> lags;
  for (std::int64_t j : {0, -3, -6}) {
    if (j > -config.depth) {
      lags.push_back(j);
      noise.emplace(j, sk.xi_at(j));
    }
  }
  const std::vector<std::int64_t> freqs{1, 2};
  const auto cross = ts::independence(theta, noise, freqs, freqs, lags);
  report.test("independence_xi", cross.max_modulus(), "<=", ts::ecf_threshold(theta.size()), "p, q in {1,2}");
  if (!g.out.empty()) {
    auto out = open_out(g.out, "skeleton.csv");
    out << "# sample,frac_eta[0]";
    for (std::int64_t k = -config.depth + 1; k <= 0; ++k) out << ",xi[" << k << "]";
    out << "\n";
    for (std::size_t i = 0; i < sk.samples(); ++i) {
      out << i << "," << num(theta[i].value());
      for (std::int64_t k = -config.depth + 1; k <= 0; ++k) out << "," << num(sk.xi(i, k));
      out << "\n";
    }
  }
  report.write(std::cout, g.format);
  return report.pass() ? 0 : 1;
}

int cmd_uniformity(const Globals& g, const std::string& column, std::int64_t frequencies) {
  Report report("uniformity");
  std::vector<ts::TorusPoint> theta;
  double bias = 0.0;
  if (!g.input.empty()) {
    theta = SampleTable(g.input).column(column);
    report.info("input", g.input + " [" + column + "]");
  } else {
    const Run r = resolve(g);
    theta = simulate(r).states_at(0);
    for (std::int64_t p = 1; p <= frequencies; ++p) {
      bias = std::max(bias, ts::window_bias(r.scenario.sequence, -r.depth, 0, p));
    }
    report.info("scenario", r.scenario.name);
  }
  const auto uni = ts::uniformity(theta, frequencies, bias);
  for (const auto& e : uni.entries) report.test("ecf_p" + std::to_string(e.p), e.modulus, "<=", uni.threshold);
  return finish(report, g, "uniformity.csv");
}

int cmd_independence(const Globals& g, const std::string& column, const std::string& lag_text) {
  Report report("independence");
  const auto lags = parse_int_list(lag_text);
  std::vector<ts::TorusPoint> theta;
  ts::NoiseColumns noise;
  if (!g.input.empty()) {
    const SampleTable table(g.input);
    theta = table.column(column);
    for (auto j : lags) noise.emplace(j, table.column(xi_name(j)));
  } else {
    const Run r = resolve(g);
    const auto e = simulate(r);
    theta = e.states_at(0);
    for (auto j : lags) {
      if (j < -r.depth || j > 0) throw ts::IndexOutOfDomain("lag " + std::to_string(j) + " outside [-depth, 0]");
      noise.emplace(j, e.noise_at(j));
    }
    report.info("scenario", r.scenario.name);
  }
  const std::vector<std::int64_t> freqs{1, 2};
  const auto cross = ts::independence(theta, noise, freqs, freqs, lags);
  for (const auto& e : cross.entries) {
    report.test("cross_p" + std::to_string(e.p) + "_q" + std::to_string(e.q) + "_j" + std::to_string(e.j), e.modulus,
                "<=", e.threshold);
  }
  const auto joint = ts::joint_independence(theta, noise, freqs, lags);
  for (const auto& e : joint.entries) {
    std::string name = "joint_p" + std::to_string(e.p);
    for (const auto& t : e.terms) name += "_j" + std::to_string(t.j);
    report.test(name, e.modulus, "<=", e.threshold);
  }
  return finish(report, g, "independence.csv");
}

int cmd_buckets(const Globals& g, const std::string& column, std::optional<std::int64_t> p_opt) {
  Report report("buckets");
  std::vector<ts::TorusPoint> theta;
  std::int64_t p = p_opt.value_or(2);
  if (!g.input.empty()) {
    theta = SampleTable(g.input).column(column);
  } else {
    const Run r = resolve(g);
    if (!p_opt) {
      const auto verdict = ts::classify(r.scenario.sequence, r.pmax);
      if (verdict.which == ts::TrichotomyResult::Case::C3) p = verdict.p;
    }
    theta = simulate(r).states_at(0);
    report.info("scenario", r.scenario.name);
  }
  const auto buckets = ts::bucket_uniformity(theta, p);
  std::string counts;
  for (auto c : buckets.counts) counts += (counts.empty() ? "" : " ") + std::to_string(c);
  report.info("p", std::to_string(p));
  report.info("counts", counts);
  report.test("chi_square", buckets.chi_square, "<=", buckets.critical_value, "alpha 1e-3");
  return finish(report, g, "buckets.csv");
}

int cmd_measurable(const Globals& g, std::optional<std::int64_t> p_opt, const std::string& shift_text) {
  const Run r = resolve(g);
  const auto verdict = ts::classify(r.scenario.sequence, r.pmax);
  const std::int64_t p = p_opt.value_or(verdict.which == ts::TrichotomyResult::Case::C3 ? verdict.p : 1);
  std::optional<ts::TorusPoint> shift;
  if (!shift_text.empty()) shift = ts::TorusPoint::from_rational(ts::Rational::parse(shift_text));
  const auto m = ts::measurability_check(r.scenario.sequence, p, r.depth, r.samples, r.seed, deterministic_anchor(r),
                                         shift, r.workers, r.pmax);
  Report report("measurable " + r.scenario.name);
  report.info("p", std::to_string(p));
  report.info("anchors", num(m.anchor.value()) + " vs " + num(m.shifted_anchor.value()));
  report.test("max_discrepancy", m.max_discrepancy, "<=", 1e-9, "frac(p eta_k), all k and samples");
  return finish(report, g, "measurable.csv");
}

int cmd_suite(const Globals& g) {
  const Run r = resolve(g);
  ts::SuiteOptions options;
  options.depth = r.depth;
  options.samples = r.samples;
  options.seed = r.seed;
  options.pmax = r.pmax;
  options.anchor = r.anchor;
  options.workers = r.workers;
  const auto report = ts::run_suite(r.scenario, options);
  if (!g.out.empty()) {
    open_out(g.out, "report.csv") << ts::render_csv(report);
    open_out(g.out, "report.txt") << ts::render_text(report);
    ts::emit_plot_data(r.scenario, options, g.out);
  }
  std::cout << (g.format == "csv" ? ts::render_csv(report) : ts::render_text(report));
  return report.pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Torus recursion toolkit: classify, simulate and test eta_k = xi_k + eta_{k-1} mod 1"};
  app.require_subcommand(0, 1);
  app.fallthrough();

  Globals g;
  bool list_flag = false;
  app.add_flag("--list", list_flag, "List built-in scenarios (same as `list`)");
  app.add_option("--scenario", g.scenario_path, "Scenario file (JSON)");
  app.add_option("--name", g.scenario_name, "Scenario name within a multi-scenario file");
  app.add_option("--builtin", g.builtin, "Built-in scenario name (see `list`)");
  app.add_option("--seed", g.seed, "Random seed (u64)");
  app.add_option("--samples,-n", g.samples, "Number of samples");
  app.add_option("--depth,-N", g.depth, "Window depth N");
  app.add_option("--pmax", g.pmax, "Frequency scan bound for classification");
  app.add_option("--out", g.out, "Output directory for CSV files");
  app.add_option("--format", g.format, "Output format")->check(CLI::IsMember({"text", "csv"}));
  app.add_option("--anchor", g.anchor, "Anchor: det:<x> | uniform | law:<measure JSON>");
  app.add_option("--truncation", g.truncation, "Truncation L for limit / centered");

  auto* list = app.add_subcommand("list", "List built-in scenarios");
  auto* classify = app.add_subcommand("classify", "Compute p_mu and the trichotomy case");
  auto* simulate = app.add_subcommand("simulate", "Simulate the chain; --out writes samples.csv");
  auto* limit = app.add_subcommand("limit", "Strong-solution truncations (C2)");
  auto* centered = app.add_subcommand("centered", "Centered noise products and their ECF");
  auto* convpower = app.add_subcommand("convpower", "Fourier table of convolution powers");
  auto* skeleton = app.add_subcommand("skeleton", "Dyadic SDE skeleton");
  auto* uniformity = app.add_subcommand("uniformity", "ECF uniformity test of eta_0");
  auto* independence = app.add_subcommand("independence", "Cross-character independence of eta_0 and noise");
  auto* buckets = app.add_subcommand("buckets", "Chi-square test of floor(p eta_0)");
  auto* measurable = app.add_subcommand("measurable", "Noise-measurability of frac(p eta_k) (C3)");
  auto* suite = app.add_subcommand("suite", "Run the regime-appropriate test battery");

  std::int64_t n_max = 10000, rows = 10, frequencies = 5;
  convpower->add_option("--nmax", n_max, "Largest power n")->check(CLI::PositiveNumber);
  convpower->add_option("--rows", rows, "Frequencies p = 1..rows")->check(CLI::PositiveNumber);

  std::string column = "eta[0]", lags = "0,-5,-10", shift;
  std::optional<std::int64_t> p_opt;
  for (auto* sub : {uniformity, independence, buckets}) {
    sub->add_option("--input", g.input, "Sample CSV written by `simulate --out`");
    sub->add_option("--column", column, "Column holding eta_0 samples");
  }
  uniformity->add_option("--frequencies", frequencies, "Test p = 1..F")->check(CLI::PositiveNumber);
  independence->add_option("--lags", lags, "Comma-separated noise indices j <= 0");
  buckets->add_option("--p", p_opt, "Number of buckets (default p_mu in C3, else 2)");
  measurable->add_option("--p", p_opt, "Frequency p (default p_mu)");
  measurable->add_option("--shift", shift, "Anchor shift as an exact rational (default 1/p)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (list_flag || list->parsed()) return cmd_list(g);
    if (classify->parsed()) return cmd_classify(g);
    if (simulate->parsed()) return cmd_simulate(g);
    if (limit->parsed()) return cmd_limit(g);
    if (centered->parsed()) return cmd_centered(g);
    if (convpower->parsed()) return cmd_convpower(g, n_max, rows);
    if (skeleton->parsed()) return cmd_skeleton(g);
    if (uniformity->parsed()) return cmd_uniformity(g, column, frequencies);
    if (independence->parsed()) return cmd_independence(g, column, lags);
    if (buckets->parsed()) return cmd_buckets(g, column, p_opt);
    if (measurable->parsed()) return cmd_measurable(g, p_opt, shift);
    if (suite->parsed()) return cmd_suite(g);
    std::cerr << "error: a subcommand is required\n" << app.help();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
