#pragma once

// Dataset CSV (long and wide), per-unit outputs, and the JSON model file.
//
// Long CSV:  optional "# levels: v1=5,v2=7,..." line, header
//            unit,variable,time,level, then one row per cell. Variable and
//            time are 1-based indices, optionally prefixed with v / t.
// Wide CSV:  same levels line, header unit,v<j>_t<t>,... (any column order).
// Levels may instead come from a sidecar file holding the same
// "v1=5,v2=7" list (with or without the "# levels:" prefix).

#include "ordmix/matvar.hpp"
#include "ordmix/mom.hpp"
#include "ordmix/ordinal.hpp"

#include <json.hpp>

#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace ordmix {

/// Malformed or inconsistent input file. `what()` joins every problem found.
class DataError : public std::runtime_error {
 public:
  explicit DataError(std::vector<std::string> problems)
      : std::runtime_error(join(problems)), problems_(std::move(problems)) {}
  const std::vector<std::string>& problems() const { return problems_; }

 private:
  static std::string join(const std::vector<std::string>& p) {
    std::string out;
    for (std::size_t i = 0; i < p.size() && i < 20; ++i) out += (i ? "\n" : "") + p[i];
    if (p.size() > 20) out += "\n(" + std::to_string(p.size() - 20) + " more)";
    return out;
  }
  std::vector<std::string> problems_;
};

/// Filesystem failure (unreadable or unwritable path).
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string trim(std::string_view s) {
  std::size_t a = 0, b = s.size();
  while (a < b && (s[a] == ' ' || s[a] == '\t' || s[a] == '\r' || s[a] == '\n')) ++a;
  while (b > a && (s[b - 1] == ' ' || s[b - 1] == '\t' || s[b - 1] == '\r' || s[b - 1] == '\n')) --b;
  std::string out(s.substr(a, b - a));
  if (out.size() >= 2 && out.front() == '"' && out.back() == '"') out = out.substr(1, out.size() - 2);
  return out;
}

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    out.push_back(trim(std::string_view(line).substr(start, comma == std::string::npos ? std::string::npos : comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

inline std::optional<long> parse_int(const std::string& s) {
  long v = 0;
  const char* end = s.data() + s.size();
  const auto r = std::from_chars(s.data(), end, v);
  if (r.ec != std::errc() || r.ptr != end || s.empty()) return std::nullopt;
  return v;
}

/// "3", or the prefix followed by "3".
inline std::optional<long> parse_index(const std::string& s, char prefix) {
  if (!s.empty() && (s.front() == prefix || s.front() == static_cast<char>(prefix - 'a' + 'A'))) return parse_int(s.substr(1));
  return parse_int(s);
}

inline std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  return lines;
}

}  // namespace detail

/// Parses "v1=5,v2=7" (an optional "# levels:" prefix is ignored).
inline std::vector<int> parse_levels(const std::string& text) {
  std::string body = detail::trim(text);
  if (body.rfind('#', 0) == 0) body = detail::trim(body.substr(1));
  if (body.rfind("levels:", 0) == 0) body = detail::trim(body.substr(7));
  std::map<long, int> by_var;
  std::vector<std::string> problems;
  for (const std::string& item : detail::split_csv(body)) {
    const std::size_t eq = item.find('=');
    const auto var = eq == std::string::npos ? std::nullopt : detail::parse_index(detail::trim(item.substr(0, eq)), 'v');
    const auto lv = eq == std::string::npos ? std::nullopt : detail::parse_int(detail::trim(item.substr(eq + 1)));
    if (!var || !lv || *var < 1) {
      problems.push_back("levels: cannot parse entry '" + item + "'");
      continue;
    }
    if (*lv < 2) problems.push_back("levels: variable v" + std::to_string(*var) + " has fewer than 2 levels");
    if (!by_var.emplace(*var, static_cast<int>(*lv)).second) problems.push_back("levels: variable v" + std::to_string(*var) + " declared twice");
  }
  if (by_var.empty() && problems.empty()) problems.push_back("levels: empty declaration");
  std::vector<int> levels;
  for (long j = 1; j <= (by_var.empty() ? 0 : by_var.rbegin()->first); ++j) {
    const auto it = by_var.find(j);
    if (it == by_var.end()) {
      problems.push_back("levels: no level count declared for variable v" + std::to_string(j));
      levels.push_back(0);
    } else {
      levels.push_back(it->second);
    }
  }
  if (!problems.empty()) throw DataError(problems);
  return levels;
}

inline std::vector<int> read_levels_file(const std::string& path) {
  std::string all;
  for (const auto& l : detail::read_lines(path)) {
    const std::string t = detail::trim(l);
    if (t.empty()) continue;
    all += (all.empty() ? "" : ",") + t;
  }
  return parse_levels(all);
}

/// Reads a long or wide dataset (detected from the header). `levels`
/// overrides any "# levels:" line in the file.
inline OrdinalDataset read_dataset(const std::string& path, std::optional<std::vector<int>> levels = std::nullopt) {
  const auto lines = detail::read_lines(path);
  std::size_t row = 0;
  std::optional<std::vector<int>> declared;
  while (row < lines.size()) {
    const std::string t = detail::trim(lines[row]);
    if (t.empty()) {
      ++row;
      continue;
    }
    if (t.front() != '#') break;
    if (t.find("levels:") != std::string::npos) declared = parse_levels(t);
    ++row;
  }
  if (levels) declared = std::move(levels);
  if (row >= lines.size()) throw DataError({path + ": no header line"});
  const std::vector<std::string> header = detail::split_csv(lines[row]);
  const std::size_t header_row = row++;
  const bool is_long = header.size() == 4 && header[0] == "unit" && header[1] == "variable" && header[2] == "time" && header[3] == "level";
  if (header.empty() || header[0] != "unit")
    throw DataError({path + ": line " + std::to_string(header_row + 1) + ": header must start with 'unit'"});

  std::vector<std::string> problems;
  struct Cell {
    std::size_t unit;
    long var, time, level;
    std::size_t line;
  };
  std::vector<Cell> cells;
  std::vector<std::string> unit_ids;
  std::map<std::string, std::size_t> unit_index;
  auto unit_of = [&](const std::string& id) {
    const auto [it, fresh] = unit_index.emplace(id, unit_ids.size());
    if (fresh) unit_ids.push_back(id);
    return it->second;
  };

  std::vector<std::pair<long, long>> columns;  // wide layout: (var, time) per column after unit
  if (!is_long) {
    for (std::size_t c = 1; c < header.size(); ++c) {
      const std::string& h = header[c];
      const std::size_t us = h.find('_');
      const auto v = us == std::string::npos ? std::nullopt : detail::parse_index(h.substr(0, us), 'v');
      const auto t = us == std::string::npos ? std::nullopt : detail::parse_index(h.substr(us + 1), 't');
      if (!v || !t || *v < 1 || *t < 1 || h.front() != 'v') {
        problems.push_back(path + ": line " + std::to_string(header_row + 1) + ": column '" + h + "' is not of the form v<j>_t<t>");
        columns.emplace_back(0, 0);
      } else {
        columns.emplace_back(*v, *t);
      }
    }
    if (header.size() < 2) problems.push_back(path + ": wide header has no data columns");
  }

  for (; row < lines.size(); ++row) {
    const std::string t = detail::trim(lines[row]);
    if (t.empty() || t.front() == '#') continue;
    const auto f = detail::split_csv(lines[row]);
    const std::string where = path + ": line " + std::to_string(row + 1) + ": ";
    if (f.size() != header.size()) {
      problems.push_back(where + "expected " + std::to_string(header.size()) + " fields, found " + std::to_string(f.size()));
      continue;
    }
    if (f[0].empty()) {
      problems.push_back(where + "empty unit identifier");
      continue;
    }
    if (is_long) {
      const auto v = detail::parse_index(f[1], 'v');
      const auto tm = detail::parse_index(f[2], 't');
      const auto lv = detail::parse_int(f[3]);
      if (!v || *v < 1) problems.push_back(where + "bad variable '" + f[1] + "'");
      if (!tm || *tm < 1) problems.push_back(where + "bad time '" + f[2] + "'");
      if (!lv) problems.push_back(where + "level '" + f[3] + "' is not an integer");
      if (v && tm && lv && *v >= 1 && *tm >= 1) cells.push_back({unit_of(f[0]), *v, *tm, *lv, row + 1});
    } else {
      const std::size_t u = unit_of(f[0]);
      for (std::size_t c = 1; c < f.size(); ++c) {
        const auto lv = detail::parse_int(f[c]);
        if (!lv) {
          problems.push_back(where + "level '" + f[c] + "' in column " + header[c] + " is not an integer");
          continue;
        }
        if (columns[c - 1].first > 0) cells.push_back({u, columns[c - 1].first, columns[c - 1].second, *lv, row + 1});
      }
    }
  }
  if (!problems.empty()) throw DataError(problems);
  if (unit_ids.empty()) throw DataError({path + ": no data rows"});
  if (!declared) {
    problems.push_back(path + ": no level declaration; add a '# levels: v1=C1,...' line or pass a levels file");
    declared.emplace();
  }

  long j_n = 0, t_n = 0;
  for (const auto& c : cells) {
    j_n = std::max(j_n, c.var);
    t_n = std::max(t_n, c.time);
  }
  for (long j = static_cast<long>(declared->size()) + 1; j <= j_n; ++j)
    problems.push_back(path + ": no level count declared for variable v" + std::to_string(j));
  j_n = std::max(j_n, static_cast<long>(declared->size()));
  if (!problems.empty()) throw DataError(problems);

  OrdinalDataset ds;
  ds.levels = *declared;
  ds.unit_ids = unit_ids;
  ds.units.assign(unit_ids.size(), LevelMatrix::Zero(j_n, t_n));
  std::vector<std::size_t> seen(unit_ids.size() * static_cast<std::size_t>(j_n * t_n), 0);
  for (const auto& c : cells) {
    const std::size_t slot = c.unit * static_cast<std::size_t>(j_n * t_n) + static_cast<std::size_t>((c.time - 1) * j_n + (c.var - 1));
    const std::string where = path + ": line " + std::to_string(c.line) + ": ";
    if (seen[slot]) {
      problems.push_back(where + "duplicate cell (unit " + unit_ids[c.unit] + ", v" + std::to_string(c.var) + ", t" +
                         std::to_string(c.time) + "), first given on line " + std::to_string(seen[slot]));
      continue;
    }
    seen[slot] = c.line;
    const int cj = ds.levels[static_cast<std::size_t>(c.var - 1)];
    if (c.level < 1 || c.level > cj)
      problems.push_back(where + "level " + std::to_string(c.level) + " outside 1.." + std::to_string(cj) + " for variable v" +
                         std::to_string(c.var));
    ds.units[c.unit](c.var - 1, c.time - 1) = static_cast<int>(c.level);
  }
  for (std::size_t u = 0; u < unit_ids.size(); ++u)
    for (long t = 1; t <= t_n; ++t)
      for (long j = 1; j <= j_n; ++j)
        if (!seen[u * static_cast<std::size_t>(j_n * t_n) + static_cast<std::size_t>((t - 1) * j_n + (j - 1))])
          problems.push_back(path + ": missing cell (unit " + unit_ids[u] + ", v" + std::to_string(j) + ", t" + std::to_string(t) + ")");
  if (!problems.empty()) throw DataError(problems);
  return ds;
}

namespace detail {

inline std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  return out;
}

inline void finish(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) throw IoError("write to '" + path + "' failed");
}

inline std::string unit_name(const OrdinalDataset& ds, std::size_t i) {
  return i < ds.unit_ids.size() ? ds.unit_ids[i] : std::to_string(i + 1);
}

}  // namespace detail

/// Shortest decimal that reads back to the same double.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

inline std::string levels_line(const std::vector<int>& levels) {
  std::string out = "# levels: ";
  for (std::size_t j = 0; j < levels.size(); ++j) out += (j ? ",v" : "v") + std::to_string(j + 1) + "=" + std::to_string(levels[j]);
  return out;
}

inline void write_dataset_long(const OrdinalDataset& ds, const std::string& path) {
  auto out = detail::open_out(path);
  out << levels_line(ds.levels) << "\nunit,variable,time,level\n";
  for (std::size_t i = 0; i < ds.n_units(); ++i)
    for (Eigen::Index t = 0; t < ds.n_times(); ++t)
      for (Eigen::Index j = 0; j < ds.n_vars(); ++j)
        out << detail::unit_name(ds, i) << ',' << j + 1 << ',' << t + 1 << ',' << ds.units[i](j, t) << '\n';
  detail::finish(out, path);
}

inline void write_dataset_wide(const OrdinalDataset& ds, const std::string& path) {
  auto out = detail::open_out(path);
  out << levels_line(ds.levels) << "\nunit";
  for (Eigen::Index t = 0; t < ds.n_times(); ++t)
    for (Eigen::Index j = 0; j < ds.n_vars(); ++j) out << ",v" << j + 1 << "_t" << t + 1;
  out << '\n';
  for (std::size_t i = 0; i < ds.n_units(); ++i) {
    out << detail::unit_name(ds, i);
    for (Eigen::Index t = 0; t < ds.n_times(); ++t)
      for (Eigen::Index j = 0; j < ds.n_vars(); ++j) out << ',' << ds.units[i](j, t);
    out << '\n';
  }
  detail::finish(out, path);
}

inline void write_labels(const std::vector<std::string>& ids, const std::vector<int>& labels, const std::string& path) {
  if (ids.size() != labels.size()) throw std::invalid_argument("write_labels: length mismatch");
  auto out = detail::open_out(path);
  out << "unit,label\n";
  for (std::size_t i = 0; i < labels.size(); ++i) out << ids[i] << ',' << labels[i] << '\n';
  detail::finish(out, path);
}

inline void write_tau(const std::vector<std::string>& ids, const Matrix& tau, const std::string& path) {
  if (static_cast<Eigen::Index>(ids.size()) != tau.rows()) throw std::invalid_argument("write_tau: length mismatch");
  auto out = detail::open_out(path);
  out << "unit";
  for (Eigen::Index c = 0; c < tau.cols(); ++c) out << ",tau" << c + 1;
  out << '\n';
  for (Eigen::Index i = 0; i < tau.rows(); ++i) {
    out << ids[static_cast<std::size_t>(i)];
    for (Eigen::Index c = 0; c < tau.cols(); ++c) out << ',' << format_double(tau(i, c));
    out << '\n';
  }
  detail::finish(out, path);
}

/// True labels with a noise flag: header unit,label,noise.
inline void write_truth(const std::vector<std::string>& ids, const std::vector<int>& labels, const std::vector<char>& noise,
                        const std::string& path) {
  if (ids.size() != labels.size() || noise.size() != labels.size()) throw std::invalid_argument("write_truth: length mismatch");
  auto out = detail::open_out(path);
  out << "unit,label,noise\n";
  for (std::size_t i = 0; i < labels.size(); ++i) out << ids[i] << ',' << labels[i] << ',' << (noise[i] ? 1 : 0) << '\n';
  detail::finish(out, path);
}

struct LabelFile {
  std::vector<std::string> ids;
  std::vector<int> labels;
  std::vector<char> noise;  // empty when the file has no noise column
};

/// Reads unit,label[,noise] files (labels and truth outputs).
inline LabelFile read_labels(const std::string& path) {
  const auto lines = detail::read_lines(path);
  LabelFile lf;
  std::vector<std::string> problems;
  bool have_header = false, have_noise = false;
  for (std::size_t r = 0; r < lines.size(); ++r) {
    const std::string t = detail::trim(lines[r]);
    if (t.empty() || t.front() == '#') continue;
    const auto f = detail::split_csv(lines[r]);
    if (!have_header) {
      if (f.size() < 2 || f[0] != "unit" || f[1] != "label" || (f.size() == 3 && f[2] != "noise") || f.size() > 3)
        throw DataError({path + ": header must be unit,label or unit,label,noise"});
      have_header = true;
      have_noise = f.size() == 3;
      continue;
    }
    const std::string where = path + ": line " + std::to_string(r + 1) + ": ";
    if (f.size() != (have_noise ? 3u : 2u)) {
      problems.push_back(where + "wrong number of fields");
      continue;
    }
    const auto lab = detail::parse_int(f[1]);
    if (!lab || *lab < 1) {
      problems.push_back(where + "label must be a positive integer");
      continue;
    }
    lf.ids.push_back(f[0]);
    lf.labels.push_back(static_cast<int>(*lab));
    if (have_noise) {
      const auto nz = detail::parse_int(f[2]);
      if (!nz || (*nz != 0 && *nz != 1)) problems.push_back(where + "noise flag must be 0 or 1");
      lf.noise.push_back(nz && *nz == 1 ? 1 : 0);
    }
  }
  if (!have_header) problems.push_back(path + ": empty file");
  if (!problems.empty()) throw DataError(problems);
  return lf;
}

// ---------------------------------------------------------------------------
// Model file

struct FitMetadata {
  std::string method = "mom";
  std::uint64_t seed = 0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> loglik_trace;
  double bic = 0.0;
};

struct ModelFile {
  MixtureModel model;
  std::vector<int> levels;
  std::optional<FitMetadata> fit;
  nlohmann::json extra;  // free-form block (scenario settings); null when absent
};

namespace detail {

inline nlohmann::json matrix_json(const Matrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Matrix json_matrix(const nlohmann::json& j, const std::string& what) {
  if (!j.is_array() || j.empty() || !j.front().is_array()) throw DataError({"model file: " + what + " must be a non-empty array of rows"});
  const std::size_t cols = j.front().size();
  Matrix m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < j.size(); ++r) {
    if (!j[r].is_array() || j[r].size() != cols) throw DataError({"model file: " + what + " has ragged rows"});
    for (std::size_t c = 0; c < cols; ++c) {
      if (!j[r][c].is_number()) throw DataError({"model file: " + what + " has a non-numeric entry"});
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = j[r][c].get<double>();
    }
  }
  return m;
}

}  // namespace detail

inline constexpr int kModelSchemaVersion = 1;

/// Thresholds are stored as their finite interior cuts.
inline nlohmann::json model_to_json(const ModelFile& mf) {
  nlohmann::json j;
  j["schema_version"] = kModelSchemaVersion;
  j["k"] = mf.model.k();
  j["n_vars"] = mf.model.n_vars();
  j["n_times"] = mf.model.n_times();
  j["weights"] = mf.model.weights;
  j["levels"] = mf.levels;
  nlohmann::json cuts = nlohmann::json::array();
  for (const auto& c : mf.model.thresholds.cuts) cuts.push_back(std::vector<double>(c.begin() + 1, c.end() - 1));
  j["thresholds"] = cuts;
  nlohmann::json clusters = nlohmann::json::array();
  for (const auto& p : mf.model.components)
    clusters.push_back({{"mean", detail::matrix_json(p.mean)},
                        {"time_cov", detail::matrix_json(p.time_cov)},
                        {"var_cov", detail::matrix_json(p.var_cov)}});
  j["clusters"] = clusters;
  if (mf.fit) {
    j["fit"] = {{"method", mf.fit->method},         {"seed", mf.fit->seed},
                {"iterations", mf.fit->iterations}, {"converged", mf.fit->converged},
                {"loglik_trace", mf.fit->loglik_trace}, {"bic", mf.fit->bic}};
  }
  if (!mf.extra.is_null()) j["extra"] = mf.extra;
  return j;
}

inline ModelFile model_from_json(const nlohmann::json& j) {
  try {
    if (!j.is_object()) throw DataError({"model file: top level must be an object"});
    if (j.value("schema_version", -1) != kModelSchemaVersion)
      throw DataError({"model file: unsupported schema_version (expected " + std::to_string(kModelSchemaVersion) + ")"});
    ModelFile mf;
    mf.model.weights = j.at("weights").get<std::vector<double>>();
    mf.levels = j.at("levels").get<std::vector<int>>();
    for (const auto& c : j.at("thresholds")) {
      std::vector<double> cuts{-kInf};
      for (double v : c.get<std::vector<double>>()) cuts.push_back(v);
      cuts.push_back(kInf);
      mf.model.thresholds.cuts.push_back(std::move(cuts));
    }
    for (const auto& c : j.at("clusters"))
      mf.model.components.push_back({detail::json_matrix(c.at("mean"), "mean"), detail::json_matrix(c.at("time_cov"), "time_cov"),
                                     detail::json_matrix(c.at("var_cov"), "var_cov")});
    if (j.at("k").get<int>() != mf.model.k()) throw DataError({"model file: k disagrees with the number of clusters"});
    if (j.contains("fit")) {
      const auto& f = j.at("fit");
      FitMetadata m;
      m.method = f.at("method").get<std::string>();
      m.seed = f.at("seed").get<std::uint64_t>();
      m.iterations = f.at("iterations").get<int>();
      m.converged = f.at("converged").get<bool>();
      m.loglik_trace = f.at("loglik_trace").get<std::vector<double>>();
      m.bic = f.at("bic").get<double>();
      mf.fit = std::move(m);
    }
    if (j.contains("extra")) mf.extra = j.at("extra");
    try {
      mf.model.validate();
    } catch (const std::invalid_argument& e) {
      throw DataError({std::string("model file: ") + e.what()});
    }
    return mf;
  } catch (const nlohmann::json::exception& e) {
    throw DataError({std::string("model file: ") + e.what()});
  }
}

inline void save_model(const ModelFile& mf, const std::string& path) {
  auto out = detail::open_out(path);
  out << model_to_json(mf).dump(2) << '\n';
  detail::finish(out, path);
}

inline ModelFile load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError({path + ": " + e.what()});
  }
  return model_from_json(j);
}

}  // namespace ordmix
