#pragma once
// Experiment configuration: a flat `key = value` text file with strict
// parsing (unknown or duplicate keys are errors), a canonical serialization,
// and a stable 64-bit hash identifying the scientific content of a run. The
// output directory and worker count never change results, so they are
// excluded from the hash.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <numbers>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ltspin/textio.hpp"

namespace ltspin {

/// Raised when parameters fall outside an operation's preconditions or a
/// structural check fails; the CLI maps it to exit code 1 (I/O and parse
/// problems map to exit code 2).
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
  std::string law = "geometric";
  std::vector<double> law_probs;  // offspring probabilities when law == "custom"
  std::uint32_t spin_dim = 1;
  std::uint32_t group_dim = 1;
  std::string potential = "xy";
  double beta = 1.0;
  std::uint32_t r = 1;
  std::vector<std::uint64_t> n_grid = {16, 128};
  double epsilon = 0.1;
  std::uint32_t replicas = 20;
  std::uint64_t sweeps = 10000;
  double delta = 1.0;
  std::uint64_t seed = 1;
  std::string out_dir = "out";
  std::uint64_t height = 200;
  std::uint32_t trees = 50;
  std::uint32_t workers = 1;
  double theta = std::numbers::pi;
  std::uint32_t probe_radius = 32;
  std::uint64_t depth = 512;
  std::vector<double> l_grid = {4, 16, 64, 256};
  std::uint64_t max_tree_vertices = 2000000;

  void validate() const {
    if (law.empty()) throw ValidationError("config: law must be non-empty");
    if (law == "custom") {
      if (law_probs.empty())
        throw ValidationError("config: law=custom requires law_probs");
      double sum = 0.0;
      for (const double p : law_probs) {
        if (!(p >= 0.0)) throw ValidationError("config: law_probs entries must be >= 0");
        sum += p;
      }
      if (!(sum > 0.0)) throw ValidationError("config: law_probs must have positive mass");
    } else if (!law_probs.empty()) {
      throw ValidationError("config: law_probs only valid with law=custom");
    }
    if (spin_dim < 1) throw ValidationError("config: spin_dim must be >= 1");
    if (group_dim < 1 || group_dim > spin_dim)
      throw ValidationError("config: group_dim must be in [1, spin_dim]");
    if (!(beta > 0.0)) throw ValidationError("config: beta must be > 0");
    if (r < 1) throw ValidationError("config: r must be >= 1");
    if (n_grid.empty()) throw ValidationError("config: n_grid must be non-empty");
    for (std::size_t i = 0; i < n_grid.size(); ++i) {
      if (n_grid[i] <= std::uint64_t{r} + 1)
        throw ValidationError("config: every n_grid entry must exceed r + 1");
      if (i > 0 && n_grid[i] <= n_grid[i - 1])
        throw ValidationError("config: n_grid must be strictly increasing");
    }
    if (!(epsilon > 0.0)) throw ValidationError("config: epsilon must be > 0");
    if (replicas < 1) throw ValidationError("config: replicas must be >= 1");
    if (sweeps < 2) throw ValidationError("config: sweeps must be >= 2");
    if (!(delta > 0.0)) throw ValidationError("config: delta must be > 0");
    if (height < 1) throw ValidationError("config: height must be >= 1");
    if (trees < 1) throw ValidationError("config: trees must be >= 1");
    if (workers < 1) throw ValidationError("config: workers must be >= 1");
    if (!std::isfinite(theta)) throw ValidationError("config: theta must be finite");
    if (probe_radius < 1) throw ValidationError("config: probe_radius must be >= 1");
    if (depth <= probe_radius)
      throw ValidationError("config: depth must exceed probe_radius");
    if (l_grid.empty()) throw ValidationError("config: l_grid must be non-empty");
    for (const double l : l_grid)
      if (!(l > 0.0)) throw ValidationError("config: l_grid entries must be > 0");
    if (max_tree_vertices < 1)
      throw ValidationError("config: max_tree_vertices must be >= 1");
  }

  /// Canonical text form: fixed key order, one `key = value` per line.
  /// Covers every result-affecting field; run plumbing (out_dir, workers)
  /// is left out so identical experiments serialize identically no matter
  /// where or how they are executed. Parsing this text reproduces all
  /// result-affecting fields exactly.
  std::string canonical_text() const {
    std::ostringstream out;
    out << "law = " << law << "\n";
    out << "law_probs = " << format_double_list(law_probs) << "\n";
    out << "spin_dim = " << spin_dim << "\n";
    out << "group_dim = " << group_dim << "\n";
    out << "potential = " << potential << "\n";
    out << "beta = " << format_double(beta) << "\n";
    out << "r = " << r << "\n";
    out << "n_grid = " << format_u64_list(n_grid) << "\n";
    out << "epsilon = " << format_double(epsilon) << "\n";
    out << "replicas = " << replicas << "\n";
    out << "sweeps = " << sweeps << "\n";
    out << "delta = " << format_double(delta) << "\n";
    out << "seed = " << seed << "\n";
    out << "height = " << height << "\n";
    out << "trees = " << trees << "\n";
    out << "theta = " << format_double(theta) << "\n";
    out << "probe_radius = " << probe_radius << "\n";
    out << "depth = " << depth << "\n";
    out << "l_grid = " << format_double_list(l_grid) << "\n";
    out << "max_tree_vertices = " << max_tree_vertices << "\n";
    return out.str();
  }

  /// Hash of the canonical text (which already omits the plumbing keys).
  std::uint64_t hash() const { return fnv1a64(canonical_text()); }

  std::string hash_hex() const { return hex_u64(hash()); }

  static ExperimentConfig parse(std::istream& in) {
    ExperimentConfig cfg;
    std::set<std::string> seen;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      const std::string stripped = trim(line);
      if (stripped.empty() || stripped[0] == '#') continue;
      const std::size_t eq = stripped.find('=');
      if (eq == std::string::npos)
        throw std::runtime_error("config line " + std::to_string(line_no) +
                                 ": expected 'key = value'");
      const std::string key = trim(stripped.substr(0, eq));
      const std::string value = trim(stripped.substr(eq + 1));
      if (key.empty() || value.empty())
        throw std::runtime_error("config line " + std::to_string(line_no) +
                                 ": empty key or value");
      if (!seen.insert(key).second)
        throw std::runtime_error("config: duplicate key '" + key + "'");
      cfg.assign(key, value, line_no);
    }
    return cfg;
  }

  static ExperimentConfig parse_string(const std::string& text) {
    std::istringstream in(text);
    return parse(in);
  }

  static ExperimentConfig parse_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open config: " + path);
    return parse(in);
  }

 private:
  static std::string format_double_list(const std::vector<double>& values) {
    if (values.empty()) return "-";
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (i > 0) out += ",";
      out += format_double(values[i]);
    }
    return out;
  }

  static std::string format_u64_list(const std::vector<std::uint64_t>& values) {
    if (values.empty()) return "-";
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (i > 0) out += ",";
      out += std::to_string(values[i]);
    }
    return out;
  }

  static std::vector<double> parse_double_list(const std::string& value) {
    std::vector<double> out;
    if (value == "-") return out;
    for (const std::string_view tok : split(value, ',')) out.push_back(parse_double(tok));
    return out;
  }

  static std::vector<std::uint64_t> parse_u64_list(const std::string& value) {
    std::vector<std::uint64_t> out;
    if (value == "-") return out;
    for (const std::string_view tok : split(value, ',')) out.push_back(parse_u64(tok));
    return out;
  }

  static std::uint32_t parse_u32(const std::string& value) {
    const std::uint64_t v = parse_u64(value);
    if (v > 0xffffffffull) throw std::runtime_error("value out of range: " + value);
    return static_cast<std::uint32_t>(v);
  }

  void assign(const std::string& key, const std::string& value, std::size_t line_no) {
    bool known = true;
    try {
      if (key == "law") law = value;
      else if (key == "law_probs") law_probs = parse_double_list(value);
      else if (key == "spin_dim") spin_dim = parse_u32(value);
      else if (key == "group_dim") group_dim = parse_u32(value);
      else if (key == "potential") potential = value;
      else if (key == "beta") beta = parse_double(value);
      else if (key == "r") r = parse_u32(value);
      else if (key == "n_grid") n_grid = parse_u64_list(value);
      else if (key == "epsilon") epsilon = parse_double(value);
      else if (key == "replicas") replicas = parse_u32(value);
      else if (key == "sweeps") sweeps = parse_u64(value);
      else if (key == "delta") delta = parse_double(value);
      else if (key == "seed") seed = parse_u64(value);
      else if (key == "out_dir") out_dir = value;
      else if (key == "height") height = parse_u64(value);
      else if (key == "trees") trees = parse_u32(value);
      else if (key == "workers") workers = parse_u32(value);
      else if (key == "theta") theta = parse_double(value);
      else if (key == "probe_radius") probe_radius = parse_u32(value);
      else if (key == "depth") depth = parse_u64(value);
      else if (key == "l_grid") l_grid = parse_double_list(value);
      else if (key == "max_tree_vertices") max_tree_vertices = parse_u64(value);
      else known = false;
    } catch (const std::runtime_error& e) {
      throw std::runtime_error("config line " + std::to_string(line_no) + ": " + e.what());
    }
    if (!known) throw std::runtime_error("config: unknown key '" + key + "'");
  }
};

inline bool operator==(const ExperimentConfig& a, const ExperimentConfig& b) {
  return a.canonical_text() == b.canonical_text();
}

}  // namespace ltspin
