#ifndef ABCSMC_IO_HPP
#define ABCSMC_IO_HPP

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "abcsmc/core.hpp"
#include "abcsmc/distance.hpp"
#include "abcsmc/samplers.hpp"

namespace abcsmc {

/// Malformed input file; the message carries the file and line.
class ParseError : public ConfigError {
public:
  using ConfigError::ConfigError;
};

namespace io {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos)
    return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos)
      break;
    start = pos + 1;
  }
  return out;
}

/// Shortest representation that reads back to the same double.
inline std::string format_double(double v) {
  if (std::isnan(v))
    return "NA";
  if (std::isinf(v))
    return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline bool parse_double(std::string_view s, double &out) {
  const std::string t = trim(s);
  if (t == "inf" || t == "+inf") { out = std::numeric_limits<double>::infinity(); return true; }
  if (t == "-inf") { out = -std::numeric_limits<double>::infinity(); return true; }
  const char *b = t.data();
  const char *e = t.data() + t.size();
  if (b != e && *b == '+')
    ++b;
  auto res = std::from_chars(b, e, out);
  return res.ec == std::errc() && res.ptr == e && b != e;
}

inline double to_double(std::string_view s, const std::string &where) {
  double v = 0;
  if (!parse_double(s, v))
    throw ParseError(where + ": '" + std::string(s) + "' is not a number");
  return v;
}

inline std::vector<double> to_doubles(std::string_view s, const std::string &where) {
  std::vector<double> out;
  for (const auto &item : split(s, ','))
    out.push_back(to_double(item, where));
  return out;
}

inline std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string read_file(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw ConfigError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::vector<std::string> lines_of(const std::string &text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r')
      line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

} // namespace io

// ---------------------------------------------------------------------------
// Dataset CSV: header "t,<species...>", NA marks an unobserved species.

inline Dataset parse_dataset(const std::string &text, const std::string &name = "dataset") {
  const auto lines = io::lines_of(text);
  std::size_t first = 0;
  while (first < lines.size() && io::trim(lines[first]).empty()) ++first;
  if (first == lines.size())
    throw ParseError(name + ": empty file");
  const auto header = io::split(lines[first], ',');
  if (header.size() < 2 || header[0] != "t")
    throw ParseError(name + " line " + std::to_string(first + 1) +
                     ": header must be 't,<species...>'");
  Dataset data;
  data.species.assign(header.begin() + 1, header.end());
  const std::size_t m = data.species.size();
  std::vector<std::size_t> na_count(m, 0);
  for (std::size_t ln = first + 1; ln < lines.size(); ++ln) {
    if (io::trim(lines[ln]).empty())
      continue;
    const std::string where = name + " line " + std::to_string(ln + 1);
    const auto cells = io::split(lines[ln], ',');
    if (cells.size() != m + 1)
      throw ParseError(where + ": expected " + std::to_string(m + 1) + " fields, found " +
                       std::to_string(cells.size()));
    const double t = io::to_double(cells[0], where);
    if (!data.times.empty() && !(t > data.times.back()))
      throw ParseError(where + ": times must be strictly increasing");
    data.times.push_back(t);
    for (std::size_t c = 0; c < m; ++c) {
      if (cells[c + 1] == "NA") {
        data.values.push_back(std::nan(""));
        ++na_count[c];
      } else {
        data.values.push_back(io::to_double(cells[c + 1], where));
      }
    }
  }
  if (data.times.empty())
    throw ParseError(name + ": no data rows");
  data.observed.resize(m);
  for (std::size_t c = 0; c < m; ++c) {
    if (na_count[c] != 0 && na_count[c] != data.times.size())
      throw ParseError(name + ": column '" + data.species[c] +
                       "' is partially NA; a species is either observed at every time or not at all");
    data.observed[c] = na_count[c] == 0;
  }
  return data;
}

inline Dataset load_dataset(const std::string &path) {
  return parse_dataset(io::read_file(path), path);
}

inline void write_dataset(std::ostream &out, const Dataset &data) {
  out << "t";
  for (const auto &s : data.species) out << ',' << s;
  out << '\n';
  for (std::size_t r = 0; r < data.rows(); ++r) {
    out << io::format_double(data.times[r]);
    for (std::size_t c = 0; c < data.cols(); ++c)
      out << ',' << (data.observed[c] ? io::format_double(data(r, c)) : "NA");
    out << '\n';
  }
}

inline Dataset trajectory_dataset(const Trajectory &traj, const std::vector<std::string> &species) {
  Dataset data(traj.times, species);
  data.values = traj.values;
  return data;
}

// ---------------------------------------------------------------------------
// Population CSV: parameter columns, weight, [model], distance.

/// Ordered union of parameter names across models.
inline std::vector<std::string> parameter_columns(const std::vector<ModelEntry> &models) {
  std::vector<std::string> cols;
  for (const auto &e : models)
    for (const auto &n : e.model.parameter_names)
      if (std::find(cols.begin(), cols.end(), n) == cols.end())
        cols.push_back(n);
  return cols;
}

inline void write_population(std::ostream &out, const Population &pop,
                             const std::vector<ModelEntry> &models, bool with_model) {
  const auto cols = parameter_columns(models);
  for (const auto &c : cols) out << c << ',';
  out << "weight," << (with_model ? "model," : "") << "distance\n";
  for (const auto &p : pop.particles) {
    const auto &names = models[p.model].model.parameter_names;
    for (const auto &c : cols) {
      auto it = std::find(names.begin(), names.end(), c);
      out << (it == names.end() ? std::string("NA")
                                : io::format_double(p.theta[static_cast<std::size_t>(it - names.begin())]))
          << ',';
    }
    out << io::format_double(p.weight) << ',';
    if (with_model)
      out << (p.model + 1) << ',';
    out << io::format_double(p.distance) << '\n';
  }
}

struct PopulationTable {
  std::vector<std::string> parameter_names;
  Population population;
  bool has_model = false;
};

/// Reads a population CSV. When a model column is present and `model` (1-based)
/// is non-zero, only that model's particles are kept, restricted to the
/// parameter columns it fills.
inline PopulationTable parse_population(const std::string &text, const std::string &name,
                                        std::size_t model = 0) {
  const auto lines = io::lines_of(text);
  if (lines.empty() || io::trim(lines[0]).empty())
    throw ParseError(name + ": empty file");
  const auto header = io::split(lines[0], ',');
  const auto wcol = std::find(header.begin(), header.end(), "weight");
  if (wcol == header.end())
    throw ParseError(name + ": no weight column");
  PopulationTable table;
  const auto np = static_cast<std::size_t>(wcol - header.begin());
  table.parameter_names.assign(header.begin(), wcol);
  table.has_model = std::find(header.begin(), header.end(), "model") != header.end();
  const std::size_t dcol = header.size() - 1;
  std::vector<bool> keep(np, true);
  bool keep_set = false;
  for (std::size_t ln = 1; ln < lines.size(); ++ln) {
    if (io::trim(lines[ln]).empty())
      continue;
    const std::string where = name + " line " + std::to_string(ln + 1);
    const auto cells = io::split(lines[ln], ',');
    if (cells.size() != header.size())
      throw ParseError(where + ": expected " + std::to_string(header.size()) + " fields");
    Particle p;
    p.weight = io::to_double(cells[np], where);
    p.distance = io::to_double(cells[dcol], where);
    if (table.has_model) {
      const double m = io::to_double(cells[np + 1], where);
      p.model = static_cast<std::size_t>(m) - 1;
      if (model != 0 && p.model + 1 != model)
        continue;
    }
    for (std::size_t j = 0; j < np; ++j) {
      if (cells[j] == "NA") {
        if (model == 0 && table.has_model)
          throw ParseError(where + ": NA parameter; select a single model");
        if (!keep_set)
          keep[j] = false;
        continue;
      }
      p.theta.push_back(io::to_double(cells[j], where));
    }
    keep_set = true;
    table.population.particles.push_back(std::move(p));
  }
  if (table.population.particles.empty())
    throw ParseError(name + ": no particles" + (model ? " for the selected model" : ""));
  std::vector<std::string> names;
  for (std::size_t j = 0; j < np; ++j)
    if (keep[j])
      names.push_back(table.parameter_names[j]);
  table.parameter_names = std::move(names);
  if (model != 0)
    for (auto &p : table.population.particles) p.model = 0;
  normalize_weights(table.population.particles);
  return table;
}

inline PopulationTable load_population(const std::string &path, std::size_t model = 0) {
  return parse_population(io::read_file(path), path, model);
}

inline void write_ledger(std::ostream &out, const SmcResult &result) {
  out << "population,epsilon,accepted,proposals,sim_count\n";
  for (const auto &pop : result.populations)
    out << pop.index + 1 << ',' << io::format_double(pop.epsilon) << ',' << pop.size() << ','
        << pop.proposals << ',' << pop.sim_count << '\n';
}

inline void write_model_counts(std::ostream &out, const ModelSelectionResult &result,
                               const std::vector<ModelEntry> &models) {
  out << "population";
  for (const auto &e : models) out << ',' << e.model.name;
  out << '\n';
  for (std::size_t t = 0; t < result.model_counts.size(); ++t) {
    out << t + 1;
    for (auto c : result.model_counts[t]) out << ',' << c;
    out << '\n';
  }
}

// ---------------------------------------------------------------------------
// Run configuration: flat "key = value" lines, '#' comments, lists are
// comma-separated.

class RunConfig {
public:
  struct Entry {
    std::string value;
    std::size_t line = 0; // 0: set by an override
  };

  static RunConfig parse(const std::string &text, const std::string &name = "config") {
    RunConfig cfg;
    cfg.name_ = name;
    const auto lines = io::lines_of(text);
    for (std::size_t i = 0; i < lines.size(); ++i) {
      std::string line = lines[i];
      if (const auto hash = line.find('#'); hash != std::string::npos)
        line.erase(hash);
      if (io::trim(line).empty())
        continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos)
        throw ParseError(name + " line " + std::to_string(i + 1) + ": expected 'key = value'");
      const std::string key = io::trim(std::string_view(line).substr(0, eq));
      if (key.empty())
        throw ParseError(name + " line " + std::to_string(i + 1) + ": empty key");
      if (cfg.entries_.count(key))
        throw ParseError(name + " line " + std::to_string(i + 1) + ": duplicate key '" + key + "'");
      cfg.entries_[key] = {io::trim(std::string_view(line).substr(eq + 1)), i + 1};
    }
    return cfg;
  }

  static RunConfig load(const std::string &path) {
    auto cfg = parse(io::read_file(path), path);
    const auto slash = path.find_last_of('/');
    cfg.base_dir_ = slash == std::string::npos ? "." : path.substr(0, slash);
    return cfg;
  }

  /// "key=value" override; replaces or adds the entry.
  void set(const std::string &assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos)
      throw ConfigError("override '" + assignment + "' is not key=value");
    entries_[io::trim(std::string_view(assignment).substr(0, eq))] = {
        io::trim(std::string_view(assignment).substr(eq + 1)), 0};
  }

  bool has(const std::string &key) const { return entries_.count(key) != 0; }

  const std::string &get(const std::string &key) const {
    auto it = entries_.find(key);
    if (it == entries_.end())
      throw ConfigError(name_ + ": missing required field '" + key + "'");
    used_[key] = true;
    return it->second.value;
  }

  std::string get_or(const std::string &key, const std::string &fallback) const {
    return has(key) ? get(key) : fallback;
  }

  double number(const std::string &key) const { return io::to_double(get(key), where(key)); }
  double number_or(const std::string &key, double fallback) const {
    return has(key) ? number(key) : fallback;
  }

  std::uint64_t count(const std::string &key) const {
    const double v = number(key);
    if (!(v >= 0.0) || v != std::floor(v) || v > 1.8e19)
      throw ConfigError(where(key) + ": '" + key + "' must be a nonnegative integer");
    return static_cast<std::uint64_t>(v);
  }
  std::uint64_t count_or(const std::string &key, std::uint64_t fallback) const {
    return has(key) ? count(key) : fallback;
  }

  std::vector<double> numbers(const std::string &key) const {
    return io::to_doubles(get(key), where(key));
  }
  std::vector<std::string> strings(const std::string &key) const { return io::split(get(key), ','); }

  bool flag_or(const std::string &key, bool fallback) const {
    if (!has(key))
      return fallback;
    const auto &v = get(key);
    if (v == "true" || v == "yes" || v == "1") return true;
    if (v == "false" || v == "no" || v == "0") return false;
    throw ConfigError(where(key) + ": '" + key + "' must be true or false");
  }

  std::string where(const std::string &key) const {
    auto it = entries_.find(key);
    if (it == entries_.end() || it->second.line == 0)
      return name_ + " (override " + key + ")";
    return name_ + " line " + std::to_string(it->second.line) + " (" + key + ")";
  }

  std::string resolve_path(const std::string &p) const {
    if (p.empty() || p.front() == '/' || p.starts_with("builtin:"))
      return p;
    return base_dir_ + "/" + p;
  }

  /// Keys never read by the run; reported as errors to catch typos.
  std::vector<std::string> unused_keys() const {
    std::vector<std::string> out;
    for (const auto &[k, e] : entries_)
      if (!used_.count(k))
        out.push_back(k);
    return out;
  }

  /// Canonical "key=value" text (sorted), used for the reproducibility hash.
  std::string canonical() const {
    std::string s;
    for (const auto &[k, e] : entries_) {
      if (k == "workers" || k == "output")
        continue; // neither changes the sampled particles
      s += k + "=" + e.value + "\n";
    }
    return s;
  }

  const std::map<std::string, Entry> &entries() const { return entries_; }

private:
  std::string name_ = "config";
  std::string base_dir_ = ".";
  std::map<std::string, Entry> entries_;
  mutable std::map<std::string, bool> used_;
};

/// Parses "uniform(lo, hi)" / "integer(lo, hi)".
inline PriorCoordinate parse_prior_coordinate(const std::string &text, const std::string &where) {
  const auto open = text.find('('), close = text.rfind(')');
  if (open == std::string::npos || close == std::string::npos || close < open)
    throw ConfigError(where + ": expected uniform(lo, hi) or integer(lo, hi)");
  const std::string kind = io::trim(std::string_view(text).substr(0, open));
  const auto args = io::to_doubles(std::string_view(text).substr(open + 1, close - open - 1), where);
  if (args.size() != 2)
    throw ConfigError(where + ": prior takes two bounds");
  if (!(args[0] < args[1]))
    throw ConfigError(where + ": prior needs lo < hi");
  if (kind == "uniform")
    return PriorCoordinate::uniform(args[0], args[1]);
  if (kind == "integer")
    return {args[0], args[1], true};
  throw ConfigError(where + ": unknown prior '" + kind + "'");
}

/// Parses "uniform(sigma)" / "gaussian(sigma)" / "integer(sigma)".
inline KernelCoordinate parse_kernel_coordinate(const std::string &text, const std::string &where) {
  const auto open = text.find('('), close = text.rfind(')');
  if (open == std::string::npos || close == std::string::npos || close < open)
    throw ConfigError(where + ": expected uniform(sigma), gaussian(sigma) or integer(sigma)");
  const std::string kind = io::trim(std::string_view(text).substr(0, open));
  const double sigma =
      io::to_double(std::string_view(text).substr(open + 1, close - open - 1), where);
  if (!(sigma > 0.0))
    throw ConfigError(where + ": kernel width must be > 0");
  if (kind == "uniform")
    return KernelCoordinate::uniform(sigma);
  if (kind == "gaussian")
    return KernelCoordinate::gaussian(sigma);
  if (kind == "integer")
    return {KernelShape::Uniform, sigma, true};
  throw ConfigError(where + ": unknown kernel '" + kind + "'");
}

} // namespace abcsmc

#endif // ABCSMC_IO_HPP
