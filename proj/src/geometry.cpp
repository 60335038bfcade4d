#include "parcap/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "parcap/error.hpp"

namespace parcap {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void check_dim(const Point& a, const Point& b) {
  require(a.size() == b.size(), ErrorCode::InvalidArgument, "dimension mismatch between points");
}

Point map_point(const Point& y, const Point& origin, double scale) {
  check_dim(y, origin);
  Point r(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) r[i] = (y[i] - origin[i]) * scale;
  return r;
}

double box_dist(const Point& x, const Point& lo, const Point& hi) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double d = std::max({lo[i] - x[i], 0.0, x[i] - hi[i]});
    s += d * d;
  }
  return std::sqrt(s);
}

double box_far(const Point& x, const Point& lo, const Point& hi) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double d = std::max(std::abs(x[i] - lo[i]), std::abs(x[i] - hi[i]));
    s += d * d;
  }
  return std::sqrt(s);
}

// Pieces of the 1-D annulus {r_in <= |y - c| <= r_out}.
std::vector<Interval> annulus_1d(double c, double r_in, double r_out) {
  if (r_in <= 0.0) return {{c - r_out, c + r_out}};
  return {{c - r_out, c - r_in}, {c + r_in, c + r_out}};
}

std::vector<Interval> intersect(const std::vector<Interval>& a, const std::vector<Interval>& b) {
  std::vector<Interval> out;
  for (const auto& x : a)
    for (const auto& y : b) {
      double lo = std::max(x.lo, y.lo);
      double hi = std::min(x.hi, y.hi);
      if (lo <= hi) out.push_back({lo, hi});
    }
  return merge_intervals(std::move(out));
}

ClosedSet from_intervals(const std::vector<Interval>& pieces) {
  if (pieces.empty()) return ClosedSet::empty(1);
  std::vector<ClosedSet> members;
  members.reserve(pieces.size());
  for (const auto& iv : pieces) {
    if (iv.degenerate())
      members.push_back(ClosedSet::point({iv.lo}));
    else
      members.push_back(ClosedSet::interval(iv.lo, iv.hi));
  }
  if (members.size() == 1) return members.front();
  return ClosedSet::unite(std::move(members));
}

long long rounded(double v) { return std::llround(v * 1e6); }

}  // namespace

double norm(const Point& x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

double distance(const Point& x, const Point& y) {
  check_dim(x, y);
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += (x[i] - y[i]) * (x[i] - y[i]);
  return std::sqrt(s);
}

double BoundingBox::diameter() const {
  double s = 0.0;
  for (std::size_t i = 0; i < lo.size(); ++i) s += (hi[i] - lo[i]) * (hi[i] - lo[i]);
  return std::sqrt(s);
}

std::vector<Interval> merge_intervals(std::vector<Interval> pieces) {
  std::sort(pieces.begin(), pieces.end(),
            [](const Interval& a, const Interval& b) { return a.lo < b.lo || (a.lo == b.lo && a.hi < b.hi); });
  std::vector<Interval> out;
  for (const auto& p : pieces) {
    if (!out.empty() && p.lo <= out.back().hi)
      out.back().hi = std::max(out.back().hi, p.hi);
    else
      out.push_back(p);
  }
  return out;
}

std::vector<Interval> cantor_intervals(const ClosedSet::Cantor& c) {
  std::vector<Interval> cur{{c.lo, c.hi}};
  for (int level = 0; level < c.depth; ++level) {
    std::vector<Interval> next;
    next.reserve(cur.size() * 2);
    for (const auto& iv : cur) {
      double len = iv.length() * c.ratio;
      next.push_back({iv.lo, iv.lo + len});
      next.push_back({iv.hi - len, iv.hi});
    }
    cur = std::move(next);
  }
  return cur;
}

// ---------------------------------------------------------------------------
// Construction

ClosedSet ClosedSet::empty(int dim) {
  require(dim >= 1, ErrorCode::InvalidArgument, "dimension must be >= 1");
  return ClosedSet(Empty{dim});
}

ClosedSet ClosedSet::point(Point center) {
  require(!center.empty(), ErrorCode::InvalidArgument, "point needs at least one coordinate");
  return ClosedSet(Singleton{std::move(center)});
}

ClosedSet ClosedSet::ball(Point center, double radius) {
  require(!center.empty(), ErrorCode::InvalidArgument, "ball center needs coordinates");
  require(radius >= 0.0 && std::isfinite(radius), ErrorCode::InvalidArgument, "ball radius must be >= 0");
  return ClosedSet(Ball{std::move(center), radius});
}

ClosedSet ClosedSet::annulus(Point center, double r_in, double r_out) {
  require(!center.empty(), ErrorCode::InvalidArgument, "annulus center needs coordinates");
  require(r_in >= 0.0 && r_in <= r_out && std::isfinite(r_out), ErrorCode::InvalidArgument,
          "annulus needs 0 <= r_in <= r_out");
  return ClosedSet(Annulus{std::move(center), r_in, r_out});
}

ClosedSet ClosedSet::box(Point lo, Point hi) {
  require(!lo.empty() && lo.size() == hi.size(), ErrorCode::InvalidArgument, "box corners must share a dimension");
  for (std::size_t i = 0; i < lo.size(); ++i)
    require(lo[i] <= hi[i], ErrorCode::InvalidArgument, "box needs lo <= hi on every axis");
  return ClosedSet(Box{std::move(lo), std::move(hi)});
}

ClosedSet ClosedSet::cantor(double lo, double hi, double ratio, int depth) {
  require(lo < hi, ErrorCode::InvalidArgument, "Cantor interval needs lo < hi");
  require(ratio > 0.0 && ratio < 0.5, ErrorCode::InvalidArgument, "Cantor ratio must lie in (0, 1/2)");
  require(depth >= 0 && depth <= 24, ErrorCode::InvalidArgument, "Cantor depth must lie in [0, 24]");
  return ClosedSet(Cantor{lo, hi, ratio, depth});
}

ClosedSet ClosedSet::unite(std::vector<ClosedSet> members) {
  require(!members.empty(), ErrorCode::InvalidArgument, "union needs at least one member");
  int d = members.front().dim();
  for (const auto& m : members) require(m.dim() == d, ErrorCode::InvalidArgument, "union members must share a dimension");
  return ClosedSet(Union{std::move(members)});
}

ClosedSet ClosedSet::full_space(int dim) {
  require(dim >= 1, ErrorCode::InvalidArgument, "dimension must be >= 1");
  return ClosedSet(FullSpace{dim});
}

ClosedSet ClosedSet::interval(double lo, double hi) { return box({lo}, {hi}); }

// ---------------------------------------------------------------------------
// Queries

std::string ClosedSet::kind() const {
  return std::visit(Overloaded{
                        [](const Empty&) { return std::string("empty"); },
                        [](const Singleton&) { return std::string("point"); },
                        [](const Ball&) { return std::string("ball"); },
                        [](const Annulus&) { return std::string("annulus"); },
                        [](const Box&) { return std::string("box"); },
                        [](const Cantor&) { return std::string("cantor"); },
                        [](const Union&) { return std::string("union"); },
                        [](const FullSpace&) { return std::string("full"); },
                        [](const Clipped&) { return std::string("clipped"); },
                    },
                    v_);
}

int ClosedSet::dim() const {
  return std::visit(Overloaded{
                        [](const Empty& e) { return e.dim; },
                        [](const Singleton& s) { return static_cast<int>(s.center.size()); },
                        [](const Ball& b) { return static_cast<int>(b.center.size()); },
                        [](const Annulus& a) { return static_cast<int>(a.center.size()); },
                        [](const Box& b) { return static_cast<int>(b.lo.size()); },
                        [](const Cantor&) { return 1; },
                        [](const Union& u) { return u.members.front().dim(); },
                        [](const FullSpace& f) { return f.dim; },
                        [](const Clipped& c) { return static_cast<int>(c.center.size()); },
                    },
                    v_);
}

bool ClosedSet::bounded() const {
  if (const auto* u = std::get_if<Union>(&v_))
    return std::all_of(u->members.begin(), u->members.end(), [](const ClosedSet& m) { return m.bounded(); });
  return !is_full_space();
}

bool ClosedSet::is_empty() const {
  return std::visit(Overloaded{
                        [](const Empty&) { return true; },
                        [](const Union& u) {
                          return std::all_of(u.members.begin(), u.members.end(),
                                             [](const ClosedSet& m) { return m.is_empty(); });
                        },
                        [](const Clipped& c) {
                          double lo = c.base->dist(c.center);
                          double hi = c.base->diameter_from(c.center);
                          return std::max(lo, c.r_in) > std::min(hi, c.r_out);
                        },
                        [](const auto&) { return false; },
                    },
                    v_);
}

double ClosedSet::dist(const Point& x) const {
  require(static_cast<int>(x.size()) == dim(), ErrorCode::InvalidArgument, "query point has wrong dimension");
  return std::visit(
      Overloaded{
          [](const Empty&) { return kInf; },
          [&](const Singleton& s) { return distance(x, s.center); },
          [&](const Ball& b) { return std::max(0.0, distance(x, b.center) - b.radius); },
          [&](const Annulus& a) {
            double r = distance(x, a.center);
            if (r < a.r_in) return a.r_in - r;
            if (r > a.r_out) return r - a.r_out;
            return 0.0;
          },
          [&](const Box& b) { return box_dist(x, b.lo, b.hi); },
          [&](const Cantor& c) {
            double best = kInf;
            for (const auto& iv : cantor_intervals(c)) best = std::min(best, box_dist(x, {iv.lo}, {iv.hi}));
            return best;
          },
          [&](const Union& u) {
            double best = kInf;
            for (const auto& m : u.members) best = std::min(best, m.dist(x));
            return best;
          },
          [](const FullSpace&) { return 0.0; },
          [&](const Clipped&) {
            auto ivs = intervals();
            if (!ivs) throw Error(ErrorCode::NoClosedForm, "distance to a clipped set is only available in 1-D");
            double best = kInf;
            for (const auto& iv : *ivs) best = std::min(best, box_dist(x, {iv.lo}, {iv.hi}));
            return best;
          },
      },
      v_);
}

double ClosedSet::diameter_from(const Point& x) const {
  require(static_cast<int>(x.size()) == dim(), ErrorCode::InvalidArgument, "query point has wrong dimension");
  return std::visit(
      Overloaded{
          [](const Empty&) { return 0.0; },
          [&](const Singleton& s) { return distance(x, s.center); },
          [&](const Ball& b) { return distance(x, b.center) + b.radius; },
          [&](const Annulus& a) { return distance(x, a.center) + a.r_out; },
          [&](const Box& b) { return box_far(x, b.lo, b.hi); },
          [&](const Cantor& c) { return std::max(std::abs(x[0] - c.lo), std::abs(x[0] - c.hi)); },
          [&](const Union& u) {
            double best = 0.0;
            for (const auto& m : u.members) best = std::max(best, m.diameter_from(x));
            return best;
          },
          [](const FullSpace&) -> double { throw Error(ErrorCode::UnboundedSet, "D_F is undefined for the full space"); },
          [&](const Clipped&) {
            auto ivs = intervals();
            if (!ivs) throw Error(ErrorCode::NoClosedForm, "D_F of a clipped set is only available in 1-D");
            double best = 0.0;
            for (const auto& iv : *ivs) best = std::max({best, std::abs(x[0] - iv.lo), std::abs(x[0] - iv.hi)});
            return best;
          },
      },
      v_);
}

bool ClosedSet::contains(const Point& y, double tol) const {
  if (const auto* c = std::get_if<Clipped>(&v_)) {
    double r = distance(y, c->center);
    return r >= c->r_in - tol && r <= c->r_out + tol && c->base->contains(y, tol);
  }
  if (const auto* u = std::get_if<Union>(&v_))
    return std::any_of(u->members.begin(), u->members.end(), [&](const ClosedSet& m) { return m.contains(y, tol); });
  return dist(y) <= tol;
}

std::optional<BoundingBox> ClosedSet::bbox() const {
  using Opt = std::optional<BoundingBox>;
  return std::visit(
      Overloaded{
          [](const Empty&) -> Opt { return std::nullopt; },
          [](const Singleton& s) -> Opt { return BoundingBox{s.center, s.center}; },
          [](const Ball& b) -> Opt {
            BoundingBox bb{b.center, b.center};
            for (std::size_t i = 0; i < bb.lo.size(); ++i) {
              bb.lo[i] -= b.radius;
              bb.hi[i] += b.radius;
            }
            return bb;
          },
          [](const Annulus& a) -> Opt {
            BoundingBox bb{a.center, a.center};
            for (std::size_t i = 0; i < bb.lo.size(); ++i) {
              bb.lo[i] -= a.r_out;
              bb.hi[i] += a.r_out;
            }
            return bb;
          },
          [](const Box& b) -> Opt { return BoundingBox{b.lo, b.hi}; },
          [](const Cantor& c) -> Opt { return BoundingBox{{c.lo}, {c.hi}}; },
          [](const Union& u) -> Opt {
            Opt acc;
            for (const auto& m : u.members) {
              auto bb = m.bbox();
              if (!bb) continue;
              if (!acc) {
                acc = bb;
                continue;
              }
              for (std::size_t i = 0; i < acc->lo.size(); ++i) {
                acc->lo[i] = std::min(acc->lo[i], bb->lo[i]);
                acc->hi[i] = std::max(acc->hi[i], bb->hi[i]);
              }
            }
            return acc;
          },
          [](const FullSpace&) -> Opt { throw Error(ErrorCode::UnboundedSet, "the full space has no bounding box"); },
          [this](const Clipped& c) -> Opt {
            if (is_empty()) return std::nullopt;
            auto bb = c.base->bbox();
            if (!bb) return std::nullopt;
            for (std::size_t i = 0; i < bb->lo.size(); ++i) {
              bb->lo[i] = std::max(bb->lo[i], c.center[i] - c.r_out);
              bb->hi[i] = std::min(bb->hi[i], c.center[i] + c.r_out);
            }
            return bb;
          },
      },
      v_);
}

std::optional<std::vector<Interval>> ClosedSet::intervals() const {
  using Opt = std::optional<std::vector<Interval>>;
  if (dim() != 1) return std::nullopt;
  return std::visit(
      Overloaded{
          [](const Empty&) -> Opt { return std::vector<Interval>{}; },
          [](const Singleton& s) -> Opt { return std::vector<Interval>{{s.center[0], s.center[0]}}; },
          [](const Ball& b) -> Opt { return std::vector<Interval>{{b.center[0] - b.radius, b.center[0] + b.radius}}; },
          [](const Annulus& a) -> Opt { return merge_intervals(annulus_1d(a.center[0], a.r_in, a.r_out)); },
          [](const Box& b) -> Opt { return std::vector<Interval>{{b.lo[0], b.hi[0]}}; },
          [](const Cantor& c) -> Opt { return merge_intervals(cantor_intervals(c)); },
          [](const Union& u) -> Opt {
            std::vector<Interval> all;
            for (const auto& m : u.members) {
              auto ivs = m.intervals();
              if (!ivs) return std::nullopt;
              all.insert(all.end(), ivs->begin(), ivs->end());
            }
            return merge_intervals(std::move(all));
          },
          [](const FullSpace&) -> Opt { return std::nullopt; },
          [](const Clipped& c) -> Opt {
            auto base = c.base->intervals();
            if (!base) return std::nullopt;
            return intersect(*base, annulus_1d(c.center[0], c.r_in, c.r_out));
          },
      },
      v_);
}

ClosedSet ClosedSet::clip_annulus(const Point& c, double r_in, double r_out) const {
  require(static_cast<int>(c.size()) == dim(), ErrorCode::InvalidArgument, "annulus center has wrong dimension");
  require(r_in >= 0.0 && r_in <= r_out, ErrorCode::InvalidArgument, "clip annulus needs 0 <= r_in <= r_out");
  if (is_full_space()) return annulus(c, r_in, r_out);
  if (dim() == 1) {
    auto ivs = intervals();
    if (!ivs) throw Error(ErrorCode::UnboundedSet, "cannot clip an unbounded set");
    return from_intervals(intersect(*ivs, annulus_1d(c[0], r_in, r_out)));
  }
  return std::visit(
      Overloaded{
          [&](const Empty&) { return *this; },
          [&](const Union& u) {
            std::vector<ClosedSet> parts;
            for (const auto& m : u.members) {
              ClosedSet p = m.clip_annulus(c, r_in, r_out);
              if (!p.is_empty()) parts.push_back(std::move(p));
            }
            if (parts.empty()) return empty(dim());
            if (parts.size() == 1) return parts.front();
            return unite(std::move(parts));
          },
          [&](const Clipped& cl) {
            if (distance(cl.center, c) == 0.0) {
              double lo = std::max(r_in, cl.r_in);
              double hi = std::min(r_out, cl.r_out);
              if (lo > hi) return empty(dim());
              return ClosedSet(Clipped{cl.base, c, lo, hi});
            }
            throw Error(ErrorCode::NoClosedForm, "nested clipping with different centers is not supported for N >= 2");
          },
          [&](const auto&) {
            double near = dist(c);
            double far = diameter_from(c);
            if (std::max(near, r_in) > std::min(far, r_out)) return empty(dim());
            if (near >= r_in && far <= r_out) return *this;
            if (const auto* b = std::get_if<Ball>(&v_); b && distance(b->center, c) == 0.0)
              return annulus(c, r_in, std::min(r_out, b->radius));
            return ClosedSet(Clipped{std::make_shared<const ClosedSet>(*this), c, r_in, r_out});
          },
      },
      v_);
}

ClosedSet ClosedSet::affine(const Point& origin, double scale) const {
  require(scale > 0.0 && std::isfinite(scale), ErrorCode::InvalidArgument, "affine map needs a positive scale");
  require(static_cast<int>(origin.size()) == dim(), ErrorCode::InvalidArgument, "origin has wrong dimension");
  return std::visit(
      Overloaded{
          [&](const Empty&) { return *this; },
          [&](const Singleton& s) { return point(map_point(s.center, origin, scale)); },
          [&](const Ball& b) { return ball(map_point(b.center, origin, scale), b.radius * scale); },
          [&](const Annulus& a) { return annulus(map_point(a.center, origin, scale), a.r_in * scale, a.r_out * scale); },
          [&](const Box& b) { return box(map_point(b.lo, origin, scale), map_point(b.hi, origin, scale)); },
          [&](const Cantor& c) {
            return cantor((c.lo - origin[0]) * scale, (c.hi - origin[0]) * scale, c.ratio, c.depth);
          },
          [&](const Union& u) {
            std::vector<ClosedSet> parts;
            parts.reserve(u.members.size());
            for (const auto& m : u.members) parts.push_back(m.affine(origin, scale));
            return unite(std::move(parts));
          },
          [&](const FullSpace&) { return *this; },
          [&](const Clipped& c) {
            return ClosedSet(Clipped{std::make_shared<const ClosedSet>(c.base->affine(origin, scale)),
                                     map_point(c.center, origin, scale), c.r_in * scale, c.r_out * scale});
          },
      },
      v_);
}

ClosedSet ClosedSet::translated(const Point& v) const {
  Point neg(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) neg[i] = -v[i];
  return affine(neg, 1.0);
}

double ClosedSet::min_feature() const {
  if (auto ivs = intervals()) {
    double best = kInf;
    for (const auto& iv : *ivs)
      if (!iv.degenerate()) best = std::min(best, iv.length());
    return best;
  }
  return std::visit(
      Overloaded{
          [](const Empty&) { return kInf; },
          [](const Singleton&) { return kInf; },
          [](const Ball& b) { return b.radius > 0.0 ? 2.0 * b.radius : kInf; },
          [](const Annulus& a) {
            double w = a.r_in > 0.0 ? a.r_out - a.r_in : 2.0 * a.r_out;
            return w > 0.0 ? w : kInf;
          },
          [](const Box& b) {
            double best = kInf;
            for (std::size_t i = 0; i < b.lo.size(); ++i)
              if (b.hi[i] > b.lo[i]) best = std::min(best, b.hi[i] - b.lo[i]);
            return best;
          },
          [](const Cantor& c) { return (c.hi - c.lo) * std::pow(c.ratio, c.depth); },
          [](const Union& u) {
            double best = kInf;
            for (const auto& m : u.members) best = std::min(best, m.min_feature());
            return best;
          },
          [](const FullSpace&) { return kInf; },
          [](const Clipped& c) {
            double w = c.r_in > 0.0 ? c.r_out - c.r_in : 2.0 * c.r_out;
            return std::min(c.base->min_feature(), w > 0.0 ? w : kInf);
          },
      },
      v_);
}

bool ClosedSet::finite_point_set() const {
  if (auto ivs = intervals())
    return std::all_of(ivs->begin(), ivs->end(), [](const Interval& iv) { return iv.degenerate(); });
  return std::visit(Overloaded{
                        [](const Empty&) { return true; },
                        [](const Singleton&) { return true; },
                        [](const Ball& b) { return b.radius == 0.0; },
                        [](const Union& u) {
                          return std::all_of(u.members.begin(), u.members.end(),
                                             [](const ClosedSet& m) { return m.finite_point_set(); });
                        },
                        [](const Clipped& c) { return c.base->finite_point_set(); },
                        [](const auto&) { return false; },
                    },
                    v_);
}

namespace {

void describe_into(std::ostringstream& os, const ClosedSet& s, bool round) {
  auto num = [&](double v) {
    if (round)
      os << rounded(v);
    else
      os << v;
  };
  auto pt = [&](const Point& p) {
    os << '(';
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (i) os << ',';
      num(p[i]);
    }
    os << ')';
  };
  std::visit(Overloaded{
                 [&](const ClosedSet::Empty& e) { os << "empty[" << e.dim << "]"; },
                 [&](const ClosedSet::Singleton& p) {
                   os << "point";
                   pt(p.center);
                 },
                 [&](const ClosedSet::Ball& b) {
                   os << "ball";
                   pt(b.center);
                   os << 'r';
                   num(b.radius);
                 },
                 [&](const ClosedSet::Annulus& a) {
                   os << "annulus";
                   pt(a.center);
                   os << '[';
                   num(a.r_in);
                   os << ',';
                   num(a.r_out);
                   os << ']';
                 },
                 [&](const ClosedSet::Box& b) {
                   os << "box";
                   pt(b.lo);
                   pt(b.hi);
                 },
                 [&](const ClosedSet::Cantor& c) {
                   os << "cantor[";
                   num(c.lo);
                   os << ',';
                   num(c.hi);
                   os << ";" << c.ratio << ";" << c.depth << "]";
                 },
                 [&](const ClosedSet::Union& u) {
                   os << "union{";
                   for (std::size_t i = 0; i < u.members.size(); ++i) {
                     if (i) os << ';';
                     describe_into(os, u.members[i], round);
                   }
                   os << '}';
                 },
                 [&](const ClosedSet::FullSpace& f) { os << "full[" << f.dim << "]"; },
                 [&](const ClosedSet::Clipped& c) {
                   os << "clip{";
                   describe_into(os, *c.base, round);
                   os << '@';
                   pt(c.center);
                   os << '[';
                   num(c.r_in);
                   os << ',';
                   num(c.r_out);
                   os << "]}";
                 },
             },
             s.variant());
}

}  // namespace

std::string ClosedSet::describe() const {
  std::ostringstream os;
  os.precision(10);
  describe_into(os, *this, false);
  return os.str();
}

std::string ClosedSet::canonical_key() const {
  if (is_full_space()) return "full";
  if (auto ivs = intervals()) {
    if (ivs->empty()) return "1d:empty";
    double lo = ivs->front().lo;
    double hi = ivs->back().hi;
    auto encode = [](const std::vector<std::pair<long long, long long>>& v) {
      std::ostringstream os;
      os << "1d:";
      for (const auto& [a, b] : v) os << '[' << a << ',' << b << ']';
      return os.str();
    };
    std::vector<std::pair<long long, long long>> fwd, rev;
    for (const auto& iv : *ivs) fwd.emplace_back(rounded(iv.lo - lo), rounded(iv.hi - lo));
    for (auto it = ivs->rbegin(); it != ivs->rend(); ++it) rev.emplace_back(rounded(hi - it->hi), rounded(hi - it->lo));
    return std::min(encode(fwd), encode(rev));
  }
  auto bb = bbox();
  if (!bb) return "empty[" + std::to_string(dim()) + "]";
  std::ostringstream os;
  describe_into(os, affine(bb->lo, 1.0), true);
  return os.str();
}

}  // namespace parcap
