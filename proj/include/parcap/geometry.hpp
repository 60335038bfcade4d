#pragma once

#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace parcap {

using Point = std::vector<double>;

double norm(const Point& x);
double distance(const Point& x, const Point& y);

/// Closed interval [lo, hi]; lo == hi encodes a single point.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double length() const { return hi - lo; }
  bool degenerate() const { return hi <= lo; }
};

struct BoundingBox {
  Point lo;
  Point hi;
  double diameter() const;
};

/// Closed subset of R^N described geometrically.
///
/// Instances are immutable. Cantor sets are kept symbolic and only expanded
/// into their 2^depth intervals when a query needs them. `Clipped` is the
/// intersection of a primitive with a closed annulus; it only arises from
/// slicing in N >= 2 (in one dimension slices are always exact unions of
/// intervals).
class ClosedSet {
 public:
  struct Empty { int dim = 1; };
  struct Singleton { Point center; };
  struct Ball { Point center; double radius = 0.0; };
  struct Annulus { Point center; double r_in = 0.0; double r_out = 0.0; };
  struct Box { Point lo; Point hi; };
  struct Cantor { double lo = 0.0; double hi = 1.0; double ratio = 1.0 / 3.0; int depth = 0; };
  struct Union { std::vector<ClosedSet> members; };
  struct FullSpace { int dim = 1; };
  struct Clipped {
    std::shared_ptr<const ClosedSet> base;
    Point center;
    double r_in = 0.0;
    double r_out = 0.0;
  };
  using Variant = std::variant<Empty, Singleton, Ball, Annulus, Box, Cantor, Union, FullSpace, Clipped>;

  ClosedSet() : v_(Empty{1}) {}

  static ClosedSet empty(int dim);
  static ClosedSet point(Point center);
  static ClosedSet ball(Point center, double radius);
  static ClosedSet annulus(Point center, double r_in, double r_out);
  static ClosedSet box(Point lo, Point hi);
  static ClosedSet cantor(double lo, double hi, double ratio, int depth);
  static ClosedSet unite(std::vector<ClosedSet> members);
  static ClosedSet full_space(int dim);
  /// Interval [lo, hi] in one dimension (a Box).
  static ClosedSet interval(double lo, double hi);

  const Variant& variant() const { return v_; }
  std::string kind() const;

  int dim() const;
  bool bounded() const;
  /// Exact emptiness test.
  bool is_empty() const;
  bool is_full_space() const { return std::holds_alternative<FullSpace>(v_); }

  /// Euclidean distance from x to the set; 0 on FullSpace, +inf on Empty.
  double dist(const Point& x) const;
  /// D_F(x) = max{|x-y| : y in F}; 0 on Empty; UnboundedSet on FullSpace.
  double diameter_from(const Point& x) const;
  bool contains(const Point& y, double tol) const;

  /// Bounding box; nullopt for the empty set; UnboundedSet on FullSpace.
  std::optional<BoundingBox> bbox() const;

  /// F ∩ {y : r_in <= |y - c| <= r_out}.
  ClosedSet clip_annulus(const Point& c, double r_in, double r_out) const;
  /// F ∩ closed ball B_r(c).
  ClosedSet clip_ball(const Point& c, double r) const { return clip_annulus(c, 0.0, r); }
  /// Image under y -> (y - origin) * scale, scale > 0.
  ClosedSet affine(const Point& origin, double scale) const;
  ClosedSet translated(const Point& v) const;

  /// Exact decomposition into sorted, merged closed intervals (N == 1 only).
  /// nullopt for FullSpace or N != 1.
  std::optional<std::vector<Interval>> intervals() const;

  /// Smallest positive feature length (interval length, ball diameter,
  /// shell thickness, ...). Isolated points are ignored; +inf if there are
  /// no extended pieces.
  double min_feature() const;

  /// True when the set is a finite union of points (or empty).
  bool finite_point_set() const;

  /// Key identifying the set up to translation (and reflection in 1-D),
  /// with coordinates rounded to 1e-6.
  std::string canonical_key() const;

  /// Human readable one-line description.
  std::string describe() const;

 private:
  explicit ClosedSet(Variant v) : v_(std::move(v)) {}
  Variant v_;
};

/// Expands a symbolic Cantor set into its 2^depth retained intervals.
std::vector<Interval> cantor_intervals(const ClosedSet::Cantor& c);

/// Sorts and merges overlapping or touching intervals.
std::vector<Interval> merge_intervals(std::vector<Interval> pieces);

}  // namespace parcap
