#include "parcap/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <type_traits>
#include <variant>

#include "parcap/error.hpp"

namespace parcap {

UniformGrid UniformGrid::covering(const Point& lo, const Point& hi, double h) {
  require(h > 0.0, ErrorCode::InvalidArgument, "grid spacing must be positive");
  require(!lo.empty() && lo.size() == hi.size(), ErrorCode::InvalidArgument, "grid corners must share a dimension");
  UniformGrid g;
  g.lo = lo;
  double hmin = h;
  for (std::size_t i = 0; i < lo.size(); ++i) {
    require(hi[i] > lo[i], ErrorCode::InvalidArgument, "grid box must have positive extent");
    int cells = static_cast<int>(std::ceil((hi[i] - lo[i]) / h - 1e-9));
    hmin = std::min(hmin, (hi[i] - lo[i]) / cells);
  }
  g.h = hmin;
  for (std::size_t i = 0; i < lo.size(); ++i)
    g.n.push_back(static_cast<int>(std::llround((hi[i] - lo[i]) / hmin)) + 1);
  return g;
}

UniformGrid UniformGrid::centered(const Point& center, double h, std::vector<int> n) {
  require(h > 0.0, ErrorCode::InvalidArgument, "grid spacing must be positive");
  require(center.size() == n.size(), ErrorCode::InvalidArgument, "grid center has wrong dimension");
  UniformGrid g;
  g.h = h;
  g.lo = center;
  for (std::size_t i = 0; i < n.size(); ++i) {
    require(n[i] >= 1, ErrorCode::InvalidArgument, "grid needs at least one node per axis");
    g.lo[i] -= 0.5 * h * (n[i] - 1);
  }
  g.n = std::move(n);
  return g;
}

std::size_t UniformGrid::size() const {
  std::size_t s = 1;
  for (int k : n) s *= static_cast<std::size_t>(k);
  return s;
}

Point UniformGrid::hi() const {
  Point p = lo;
  for (std::size_t i = 0; i < p.size(); ++i) p[i] += h * (n[i] - 1);
  return p;
}

std::vector<int> UniformGrid::multi_index(std::size_t flat) const {
  std::vector<int> idx(n.size());
  for (int a = dim() - 1; a >= 0; --a) {
    idx[a] = static_cast<int>(flat % n[a]);
    flat /= n[a];
  }
  return idx;
}

std::size_t UniformGrid::flat_index(const std::vector<int>& idx) const {
  std::size_t f = 0;
  for (int a = 0; a < dim(); ++a) f = f * n[a] + idx[a];
  return f;
}

Point UniformGrid::node(std::size_t flat) const {
  auto idx = multi_index(flat);
  Point p(idx.size());
  for (std::size_t a = 0; a < idx.size(); ++a) p[a] = lo[a] + h * idx[a];
  return p;
}

std::size_t UniformGrid::nearest(const Point& x) const {
  require(x.size() == n.size(), ErrorCode::InvalidArgument, "point has wrong dimension");
  std::vector<int> idx(n.size());
  for (std::size_t a = 0; a < n.size(); ++a) {
    long long i = std::llround((x[a] - lo[a]) / h);
    idx[a] = static_cast<int>(std::clamp<long long>(i, 0, n[a] - 1));
  }
  return flat_index(idx);
}

double UniformGrid::cell_volume() const { return std::pow(h, dim()); }

GridFunction::GridFunction(UniformGrid g, double fill) : grid(std::move(g)), values(grid.size(), fill) {}

GridFunction::GridFunction(UniformGrid g, std::vector<double> v, std::optional<double> t)
    : grid(std::move(g)), values(std::move(v)), time(t) {
  require(values.size() == grid.size(), ErrorCode::InvalidArgument, "value array does not match grid shape");
}

void GridFunction::validate() const {
  require(values.size() == grid.size(), ErrorCode::InvalidArgument, "value array does not match grid shape");
  require(grid.h > 0.0, ErrorCode::InvalidArgument, "grid spacing must be positive");
  for (double v : values) {
    require(std::isfinite(v), ErrorCode::InvalidArgument, "grid function has non-finite values");
    if (nonnegative) require(v >= 0.0, ErrorCode::InvalidArgument, "grid function flagged nonnegative has v < 0");
  }
  if (time) require(*time >= 0.0, ErrorCode::InvalidArgument, "time stamp must be >= 0");
}

double GridFunction::integral() const {
  return grid.cell_volume() * std::accumulate(values.begin(), values.end(), 0.0);
}

double GridFunction::max() const { return values.empty() ? 0.0 : *std::max_element(values.begin(), values.end()); }
double GridFunction::min() const { return values.empty() ? 0.0 : *std::min_element(values.begin(), values.end()); }

RadonMeasure RadonMeasure::dirac(Point at, double mass) {
  RadonMeasure m;
  m.atoms.push_back({std::move(at), mass});
  m.validate();
  return m;
}

void RadonMeasure::validate() const {
  for (const auto& a : atoms)
    require(a.mass >= 0.0 && std::isfinite(a.mass), ErrorCode::InvalidArgument, "atom masses must be finite and >= 0");
  if (density) {
    density->validate();
    for (double v : density->values) require(v >= 0.0, ErrorCode::InvalidArgument, "measure density must be >= 0");
  }
}

double RadonMeasure::total_mass() const {
  double m = 0.0;
  for (const auto& a : atoms) m += a.mass;
  if (density) m += density->integral();
  return m;
}

RadonMeasure RadonMeasure::scaled(double lambda) const {
  require(lambda >= 0.0, ErrorCode::InvalidArgument, "measure scale must be >= 0");
  RadonMeasure m = *this;
  for (auto& a : m.atoms) a.mass *= lambda;
  if (m.density)
    for (auto& v : m.density->values) v *= lambda;
  return m;
}

namespace {

void collect_points(const ClosedSet& s, std::vector<Point>& out) {
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, ClosedSet::Singleton>) {
          out.push_back(v.center);
        } else if constexpr (std::is_same_v<T, ClosedSet::Ball>) {
          out.push_back(v.center);
        } else if constexpr (std::is_same_v<T, ClosedSet::Union>) {
          for (const auto& m : v.members) collect_points(m, out);
        }
      },
      s.variant());
}

}  // namespace

std::vector<std::size_t> mark_nodes(const UniformGrid& grid, const ClosedSet& K, double tol) {
  require(K.dim() == grid.dim(), ErrorCode::InvalidArgument, "set and grid dimensions differ");
  require(!K.is_full_space(), ErrorCode::UnboundedSet, "cannot mark the full space");
  std::vector<std::size_t> out;
  if (K.is_empty()) return out;
  if (grid.dim() == 1) {
    auto ivs = K.intervals();
    for (const auto& iv : *ivs) {
      long long a = static_cast<long long>(std::ceil((iv.lo - tol - grid.lo[0]) / grid.h));
      long long b = static_cast<long long>(std::floor((iv.hi + tol - grid.lo[0]) / grid.h));
      a = std::max<long long>(a, 0);
      b = std::min<long long>(b, grid.n[0] - 1);
      if (a > b) {
        out.push_back(grid.nearest({0.5 * (iv.lo + iv.hi)}));
        continue;
      }
      for (long long i = a; i <= b; ++i) out.push_back(static_cast<std::size_t>(i));
    }
  } else {
    for (std::size_t f = 0; f < grid.size(); ++f)
      if (K.contains(grid.node(f), tol)) out.push_back(f);
    std::vector<Point> pts;
    collect_points(K, pts);
    for (const auto& p : pts) out.push_back(grid.nearest(p));
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

double interpolate(const GridFunction& f, const Point& x) {
  const auto& g = f.grid;
  require(static_cast<int>(x.size()) == g.dim(), ErrorCode::InvalidArgument, "point has wrong dimension");
  std::vector<int> base(g.dim());
  std::vector<double> frac(g.dim());
  for (int a = 0; a < g.dim(); ++a) {
    double s = (x[a] - g.lo[a]) / g.h;
    if (s < -1e-12 || s > g.n[a] - 1 + 1e-12) return 0.0;
    int i = std::clamp(static_cast<int>(std::floor(s)), 0, std::max(0, g.n[a] - 2));
    base[a] = i;
    frac[a] = g.n[a] == 1 ? 0.0 : std::clamp(s - i, 0.0, 1.0);
  }
  double acc = 0.0;
  const int corners = 1 << g.dim();
  std::vector<int> idx(g.dim());
  for (int c = 0; c < corners; ++c) {
    double w = 1.0;
    for (int a = 0; a < g.dim(); ++a) {
      int bit = (c >> a) & 1;
      if (bit && g.n[a] == 1) {
        w = 0.0;
        break;
      }
      idx[a] = base[a] + bit;
      w *= bit ? frac[a] : 1.0 - frac[a];
    }
    if (w != 0.0) acc += w * f.values[g.flat_index(idx)];
  }
  return acc;
}

}  // namespace parcap
