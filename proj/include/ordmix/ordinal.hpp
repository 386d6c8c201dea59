#pragma once

// Ordinal three-way data (units x variables x times), fixed thresholds, and the
// map from an observed ordinal matrix to the latent box that generates it.

#include "ordmix/linalg.hpp"
#include "ordmix/matvar.hpp"
#include "ordmix/normal.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace ordmix {

using LevelMatrix = Eigen::MatrixXi;  // J x T, entries in 1..C_j

struct OrdinalDataset {
  std::vector<LevelMatrix> units;
  std::vector<int> levels;             // C_j per variable
  std::vector<std::string> unit_ids;   // optional, empty or one per unit

  std::size_t n_units() const { return units.size(); }
  Eigen::Index n_vars() const { return static_cast<Eigen::Index>(levels.size()); }
  Eigen::Index n_times() const { return units.empty() ? 0 : units.front().cols(); }
};

struct Violation {
  std::size_t unit;  // 0-based; npos-like values are not used
  Eigen::Index var;
  Eigen::Index time;
  std::string message;
};

/// Report-only check of a dataset: shape consistency, level counts >= 2 and
/// every entry within 1..C_j. Indices in messages are 1-based.
inline std::vector<Violation> validate(const OrdinalDataset& ds) {
  std::vector<Violation> out;
  if (ds.units.empty()) out.push_back({0, 0, 0, "dataset has no units"});
  for (std::size_t j = 0; j < ds.levels.size(); ++j)
    if (ds.levels[j] < 2)
      out.push_back({0, static_cast<Eigen::Index>(j), 0,
                     "variable " + std::to_string(j + 1) + " declares " + std::to_string(ds.levels[j]) +
                         " levels (need >= 2)"});
  if (!ds.unit_ids.empty() && ds.unit_ids.size() != ds.units.size())
    out.push_back({0, 0, 0, "unit identifier count does not match unit count"});
  const Eigen::Index t_ref = ds.n_times();
  for (std::size_t i = 0; i < ds.units.size(); ++i) {
    const LevelMatrix& y = ds.units[i];
    if (y.rows() != ds.n_vars() || y.cols() != t_ref || t_ref < 1) {
      out.push_back({i, 0, 0, "unit " + std::to_string(i + 1) + " has shape " + std::to_string(y.rows()) + "x" +
                                  std::to_string(y.cols())});
      continue;
    }
    for (Eigen::Index t = 0; t < y.cols(); ++t)
      for (Eigen::Index j = 0; j < y.rows(); ++j)
        if (y(j, t) < 1 || y(j, t) > ds.levels[static_cast<std::size_t>(j)])
          out.push_back({i, j, t,
                         "entry (i=" + std::to_string(i + 1) + ", j=" + std::to_string(j + 1) +
                             ", t=" + std::to_string(t + 1) + ") = " + std::to_string(y(j, t)) + " outside 1.." +
                             std::to_string(ds.levels[static_cast<std::size_t>(j)])});
  }
  return out;
}

/// Per-variable cut points gamma_{j,0} = -inf <= ... <= gamma_{j,C_j} = +inf,
/// shared by all time occasions.
struct Thresholds {
  std::vector<std::vector<double>> cuts;

  Eigen::Index n_vars() const { return static_cast<Eigen::Index>(cuts.size()); }
  int n_levels(Eigen::Index j) const { return static_cast<int>(cuts[static_cast<std::size_t>(j)].size()) - 1; }
};

/// Equidistant cuts (1.5, 2.5, ..., C_j - 0.5) bracketed by -inf and +inf.
inline Thresholds default_thresholds(const std::vector<int>& levels) {
  Thresholds g;
  g.cuts.reserve(levels.size());
  for (std::size_t j = 0; j < levels.size(); ++j) {
    if (levels[j] < 2) throw std::invalid_argument("default_thresholds: variable " + std::to_string(j + 1) + " has fewer than 2 levels");
    std::vector<double> c(static_cast<std::size_t>(levels[j]) + 1);
    c.front() = -kInf;
    c.back() = kInf;
    for (int l = 1; l < levels[j]; ++l) c[static_cast<std::size_t>(l)] = l + 0.5;
    g.cuts.push_back(std::move(c));
  }
  return g;
}

/// Level c such that z lies in (gamma_{c-1}, gamma_c].
inline int discretize_value(double z, const std::vector<double>& cuts) {
  const int c_max = static_cast<int>(cuts.size()) - 1;
  int c = 1;
  while (c < c_max && z > cuts[static_cast<std::size_t>(c)]) ++c;
  return c;
}

inline LevelMatrix discretize(const Matrix& z, const Thresholds& g) {
  if (z.rows() != g.n_vars()) throw std::invalid_argument("discretize: row count differs from threshold count");
  LevelMatrix y(z.rows(), z.cols());
  for (Eigen::Index t = 0; t < z.cols(); ++t)
    for (Eigen::Index j = 0; j < z.rows(); ++j) y(j, t) = discretize_value(z(j, t), g.cuts[static_cast<std::size_t>(j)]);
  return y;
}

/// Axis-aligned region of R^{JT} (vec order) generating one response pattern.
/// Coordinate d covers (lower[d], upper[d]].
struct Box {
  Vector lower;
  Vector upper;

  Eigen::Index dim() const { return lower.size(); }

  bool contains(const Vector& x) const {
    for (Eigen::Index d = 0; d < x.size(); ++d)
      if (!(x[d] > lower[d] && x[d] <= upper[d])) return false;
    return true;
  }

  void check() const {
    if (lower.size() != upper.size()) throw std::invalid_argument("Box: bound lengths differ");
    for (Eigen::Index d = 0; d < lower.size(); ++d)
      if (!(lower[d] < upper[d])) throw std::invalid_argument("Box: degenerate coordinate " + std::to_string(d));
  }

  static Box full_space(Eigen::Index n) { return {Vector::Constant(n, -kInf), Vector::Constant(n, kInf)}; }
};

inline Box pattern_box(const LevelMatrix& y, const Thresholds& g) {
  if (y.rows() != g.n_vars()) throw std::invalid_argument("pattern_box: row count differs from threshold count");
  const Eigen::Index j_n = y.rows();
  Box b{Vector(y.size()), Vector(y.size())};
  for (Eigen::Index t = 0; t < y.cols(); ++t)
    for (Eigen::Index j = 0; j < j_n; ++j) {
      const auto& c = g.cuts[static_cast<std::size_t>(j)];
      const int lvl = y(j, t);
      if (lvl < 1 || lvl > static_cast<int>(c.size()) - 1)
        throw std::out_of_range("pattern_box: level " + std::to_string(lvl) + " out of range for variable " +
                                std::to_string(j + 1));
      const Eigen::Index d = vec_index(j, t, j_n);
      b.lower[d] = c[static_cast<std::size_t>(lvl - 1)];
      b.upper[d] = c[static_cast<std::size_t>(lvl)];
    }
  return b;
}

/// Integer levels as reals, J x T.
inline Matrix as_real(const LevelMatrix& y) { return y.cast<double>(); }

}  // namespace ordmix
