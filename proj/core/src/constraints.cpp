#include "skillspace/constraints.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <tuple>

#include "skillspace/overloaded.hpp"

namespace skillspace {

namespace {

constexpr double kPi = std::numbers::pi;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

bool parallel(const Vec3& a, const Vec3& b, double tol) { return angle_between(a, b) <= tol; }
// Parallel up to sign.
bool collinear(const Vec3& a, const Vec3& b, double tol) { return std::min(angle_between(a, b), angle_between(a, -b)) <= tol; }

double distance_to_line(const Vec3& u, const Vec3& p, const Vec3& a) {
  const Vec3 d = u - p;
  return (d - d.dot(a) * a).norm();
}

double interval_or_value_error(double actual, const GeometricConstraint& c) {
  if (c.interval) return c.interval->excess(actual);
  return std::abs(actual - c.value.value_or(0.0));
}

NullspaceModel make(TranslationManifold t, RotationManifold r) {
  NullspaceModel n;
  n.translation = std::move(t);
  n.rotation = std::move(r);
  return n;
}

TranslationManifold tm(auto form) {
  TranslationManifold m;
  m.form = form;
  return m;
}

RotationManifold rm(auto form, AxisSelector sel) {
  RotationManifold m;
  m.form = form;
  m.selector = sel;
  return m;
}

OneAngle one_angle(const UnitVec3& vf, const GeometricConstraint& c) {
  if (c.interval) return OneAngle{vf, 0.5 * (c.interval->lo + c.interval->hi), c.interval};
  return OneAngle{vf, *c.value, std::nullopt};
}

[[noreturn]] void no_row(const GeometricConstraint& c) {
  throw Error(ErrorKind::Unsupported, "unsupported shape/relation combination: " + to_string(c));
}

void check_value_form(const GeometricConstraint& c) {
  const bool valued = c.relation == Relation::Distance || c.relation == Relation::Angle;
  if (valued && c.value.has_value() == c.interval.has_value()) {
    throw Error(ErrorKind::InvalidArgument, to_string(c.relation) + " needs exactly one of value or interval");
  }
  if (!valued && c.interval) throw Error(ErrorKind::InvalidArgument, to_string(c.relation) + " carries no interval");
  // Only a cylinder concentricity takes a value (the radial standoff).
  if (!valued && c.value && !(c.relation == Relation::Concentric && c.fixed.kind == ShapeKind::Cylinder))
    throw Error(ErrorKind::InvalidArgument, to_string(c.relation) + " carries no value");
  if (c.relation == Relation::Angle) {
    const auto in_range = [](double x) { return x >= 0.0 && x <= kPi; };
    if ((c.value && !in_range(*c.value)) || (c.interval && !(in_range(c.interval->lo) && in_range(c.interval->hi))))
      throw Error(ErrorKind::InvalidArgument, "angle outside [0, pi]");
  }
  if (c.interval && c.interval->lo > c.interval->hi) throw Error(ErrorKind::InvalidArgument, "interval has lo > hi");
}

NullspaceModel nullspace_of(const GeometricConstraint& c, const Shape& f, AxisSelector sel) {
  check_value_form(c);
  const ShapeKind fk = f.kind();
  const ShapeKind ck = c.constrained.kind;
  const auto so3 = rm(FullSO3{}, sel);
  const TranslationManifold free = tm(Full3Space{});

  switch (c.relation) {
    case Relation::Distance: {
      if (fk == ShapeKind::Line && c.value && (ck == ShapeKind::Point || ck == ShapeKind::Line)) {
        const auto& l = std::get<LineShape>(f.geometry);
        const double d = *c.value;
        if (d < 0.0) throw Error(ErrorKind::InvalidArgument, "line distance must be non-negative");
        TranslationManifold t = d == 0.0 ? tm(LineManifold{l.p, l.a}) : tm(CylinderManifold{l.p, l.a, d});
        return make(t, ck == ShapeKind::Point ? so3 : rm(OneParallel{l.a}, sel));
      }
      if (fk == ShapeKind::Plane && (ck == ShapeKind::Point || ck == ShapeKind::Line || ck == ShapeKind::Plane)) {
        const auto& pl = std::get<PlaneShape>(f.geometry);
        TranslationManifold t = c.interval ? tm(Full3Space{Full3Space::Slab{pl.p, pl.n, *c.interval}})
                                           : tm(PlaneManifold{pl.p + *c.value * pl.n.vec(), pl.n});
        if (ck == ShapeKind::Point) return make(t, so3);
        if (ck == ShapeKind::Line) return make(t, rm(OneAngle{pl.n, kPi / 2.0, std::nullopt}, sel));
        return make(t, rm(OneParallel{pl.n}, sel));
      }
      break;
    }
    case Relation::Angle: {
      if (ck == ShapeKind::Line && fk == ShapeKind::Line)
        return make(free, rm(one_angle(std::get<LineShape>(f.geometry).a, c), sel));
      if (fk == ShapeKind::Plane && (ck == ShapeKind::Line || ck == ShapeKind::Plane))
        return make(free, rm(one_angle(std::get<PlaneShape>(f.geometry).n, c), sel));
      break;
    }
    case Relation::Coincident: {
      if (fk == ShapeKind::Point && ck == ShapeKind::Point)
        return make(tm(PointManifold{std::get<PointShape>(f.geometry).p}), so3);
      if (fk == ShapeKind::Circle && ck == ShapeKind::Point) {
        const auto& ci = std::get<CircleShape>(f.geometry);
        return make(tm(CircleManifold{ci.p, ci.n, ci.r}), so3);
      }
      if (fk == ShapeKind::Line && (ck == ShapeKind::Point || ck == ShapeKind::Line)) {
        GeometricConstraint d = c;
        d.relation = Relation::Distance;
        d.value = 0.0;
        return nullspace_of(d, f, sel);
      }
      if (fk == ShapeKind::Plane && (ck == ShapeKind::Point || ck == ShapeKind::Line || ck == ShapeKind::Plane)) {
        GeometricConstraint d = c;
        d.relation = Relation::Distance;
        d.value = 0.0;
        return nullspace_of(d, f, sel);
      }
      break;
    }
    case Relation::Concentric: {
      if (fk == ShapeKind::Line && ck == ShapeKind::Line && !c.value) {
        const auto& l = std::get<LineShape>(f.geometry);
        return make(tm(LineManifold{l.p, l.a}), rm(OneParallel{l.a}, sel));
      }
      if (fk == ShapeKind::Cylinder && ck == ShapeKind::Cylinder) {
        const auto& cy = std::get<CylinderShape>(f.geometry);
        const double r = cy.r + c.value.value_or(0.0);
        if (!(r > 0.0)) throw Error(ErrorKind::InvalidArgument, "concentric radius must stay positive");
        return make(tm(CylinderManifold{cy.p, cy.a, r}), rm(OneParallel{cy.a}, sel));
      }
      break;
    }
    case Relation::Parallel: {
      if (fk == ShapeKind::Line && ck == ShapeKind::Line)
        return make(free, rm(OneParallel{std::get<LineShape>(f.geometry).a}, sel));
      if (fk == ShapeKind::Plane && ck == ShapeKind::Plane)
        return make(free, rm(OneParallel{std::get<PlaneShape>(f.geometry).n}, sel));
      break;
    }
  }
  no_row(c);
}

// Representative shape geometry used only for row lookup in supported().
Shape placeholder(ShapeKind k) {
  Shape s;
  switch (k) {
    case ShapeKind::Point: s.geometry = PointShape{}; break;
    case ShapeKind::Line: s.geometry = LineShape{}; break;
    case ShapeKind::Plane: s.geometry = PlaneShape{}; break;
    case ShapeKind::Circle: s.geometry = CircleShape{}; break;
    case ShapeKind::Cylinder: s.geometry = CylinderShape{}; break;
  }
  return s;
}

// --- intersection ---------------------------------------------------------

bool same_translation(const TranslationManifold& a, const TranslationManifold& b, double tol) {
  if (a.type() != b.type()) return false;
  MatchOptions o{tol, tol, {}, {}};
  NullspaceModel na, nb;
  na.translation = a;
  nb.translation = b;
  const auto d = manifold_distance(na, nb, o);
  return d && *d <= 1.0;
}

// Cylinder or line restricted to the part of its axis inside a slab.
template <class Axial>
TranslationManifold clip_axis(Axial form, std::optional<ExtentBounds> bounds, const Full3Space::Slab& slab, double tol) {
  const double c = form.a.dot(slab.n.vec());
  if (std::abs(c) < 1.0 - tol) throw Error(ErrorKind::Unsupported, "slab is not perpendicular to the axis");
  const double sgn = c > 0.0 ? 1.0 : -1.0;
  const double h0 = (form.p - slab.p).dot(slab.n.vec());
  Interval s{sgn > 0 ? slab.offset.lo - h0 : h0 - slab.offset.hi, sgn > 0 ? slab.offset.hi - h0 : h0 - slab.offset.lo};
  if (bounds && !bounds->dims.empty()) {
    s.lo = std::max(s.lo, bounds->dims[0].lo);
    s.hi = std::min(s.hi, bounds->dims[0].hi);
    if (s.lo > s.hi) throw Error(ErrorKind::Unsupported, "empty intersection");
  }
  const double mid = 0.5 * (s.lo + s.hi);
  form.p = form.p + mid * form.a.vec();
  TranslationManifold out = tm(form);
  ExtentBounds eb;
  eb.dims.push_back({s.lo - mid, s.hi - mid});
  if (bounds && bounds->dims.size() > 1) eb.dims.push_back(bounds->dims[1]);
  out.bounds = eb;
  return out;
}

TranslationManifold intersect_translation(const TranslationManifold& a, const TranslationManifold& b, double tol) {
  const auto* fa = std::get_if<Full3Space>(&a.form);
  const auto* fb = std::get_if<Full3Space>(&b.form);
  if (fa && !fa->slab && !a.bounds) return b;
  if (fb && !fb->slab && !b.bounds) return a;
  if (fb && fb->slab && !fa) {
    const auto& slab = *fb->slab;
    return std::visit(
        Overloaded{
            [&](const CylinderManifold& c) { return clip_axis(c, a.bounds, slab, tol); },
            [&](const LineManifold& l) { return clip_axis(l, a.bounds, slab, tol); },
            [&](const PlaneManifold& p) {
              if (!collinear(p.n, slab.n, tol)) throw Error(ErrorKind::Unsupported, "slab not parallel to plane");
              if (!slab.offset.contains((p.p - slab.p).dot(slab.n.vec()), tol))
                throw Error(ErrorKind::Unsupported, "empty intersection");
              return a;
            },
            [&](const PointManifold& p) {
              if (!slab.offset.contains((p.p - slab.p).dot(slab.n.vec()), tol))
                throw Error(ErrorKind::Unsupported, "empty intersection");
              return a;
            },
            [&](const auto&) -> TranslationManifold { throw Error(ErrorKind::Unsupported, "cannot intersect slab"); },
        },
        a.form);
  }
  if (fa && fa->slab && !fb) return intersect_translation(b, a, tol);
  if (fa && fb && fa->slab && fb->slab && collinear(fa->slab->n, fb->slab->n, tol)) {
    const auto& sa = *fa->slab;
    const auto& sb = *fb->slab;
    const double shift = (sb.p - sa.p).dot(sa.n.vec());
    const double sgn = sa.n.dot(sb.n) > 0.0 ? 1.0 : -1.0;
    Interval other = sgn > 0 ? Interval{sb.offset.lo + shift, sb.offset.hi + shift}
                             : Interval{shift - sb.offset.hi, shift - sb.offset.lo};
    Interval iv{std::max(sa.offset.lo, other.lo), std::min(sa.offset.hi, other.hi)};
    if (iv.lo > iv.hi) throw Error(ErrorKind::Unsupported, "empty intersection");
    return tm(Full3Space{Full3Space::Slab{sa.p, sa.n, iv}});
  }
  if (same_translation(a, b, tol)) return a;
  if (const auto* p = std::get_if<PointManifold>(&a.form); p && dist_t(b, p->p) <= tol) return a;
  if (const auto* p = std::get_if<PointManifold>(&b.form); p && dist_t(a, p->p) <= tol) return b;
  const auto circle_in_cylinder = [&](const CircleManifold& ci, const CylinderManifold& cy) {
    return collinear(ci.n, cy.a, tol) && distance_to_line(ci.p, cy.p, cy.a) <= tol && std::abs(ci.r - cy.r) <= tol;
  };
  const auto circle_on_line = [&](const CircleManifold& ci, const LineManifold& l) {
    return collinear(ci.n, l.a, tol) && distance_to_line(ci.p, l.p, l.a) <= tol && ci.r <= tol;
  };
  if (const auto* ci = std::get_if<CircleManifold>(&a.form)) {
    if (const auto* cy = std::get_if<CylinderManifold>(&b.form); cy && circle_in_cylinder(*ci, *cy)) return a;
    if (const auto* l = std::get_if<LineManifold>(&b.form); l && circle_on_line(*ci, *l)) return a;
  }
  if (const auto* ci = std::get_if<CircleManifold>(&b.form)) {
    if (const auto* cy = std::get_if<CylinderManifold>(&a.form); cy && circle_in_cylinder(*ci, *cy)) return b;
  }
  // A cylinder/line lying in a plane parallel to its axis is not a closed form we need.
  throw Error(ErrorKind::Unsupported, "cannot intersect " + to_string(a.type()) + " with " + to_string(b.type()));
}

RotationManifold intersect_rotation(const RotationManifold& a, const RotationManifold& b, double tol) {
  if (std::holds_alternative<FullSO3>(a.form)) return b;
  if (std::holds_alternative<FullSO3>(b.form)) return a;
  if (a.selector != b.selector) throw Error(ErrorKind::Unsupported, "rotation models use different body axes");
  const auto* pa = std::get_if<OneParallel>(&a.form);
  const auto* pb = std::get_if<OneParallel>(&b.form);
  const auto* oa = std::get_if<OneAngle>(&a.form);
  const auto* ob = std::get_if<OneAngle>(&b.form);
  if (pa && pb && parallel(pa->vf, pb->vf, tol)) return a;
  const auto parallel_within_angle = [&](const OneParallel& p, const OneAngle& o) {
    if (!parallel(p.vf, o.vf, tol)) return false;
    return o.interval ? o.interval->contains(0.0, tol) : std::abs(o.theta) <= tol;
  };
  if (pa && ob && parallel_within_angle(*pa, *ob)) return a;
  if (pb && oa && parallel_within_angle(*pb, *oa)) return b;
  if (oa && ob && parallel(oa->vf, ob->vf, tol)) {
    if (!oa->interval && !ob->interval && std::abs(oa->theta - ob->theta) <= tol) return a;
    if (oa->interval && !ob->interval && oa->interval->contains(ob->theta, tol)) return b;
    if (!oa->interval && ob->interval && ob->interval->contains(oa->theta, tol)) return a;
    if (oa->interval && ob->interval) {
      Interval iv{std::max(oa->interval->lo, ob->interval->lo), std::min(oa->interval->hi, ob->interval->hi)};
      if (iv.lo <= iv.hi) return rm(OneAngle{oa->vf, 0.5 * (iv.lo + iv.hi), iv}, a.selector);
    }
  }
  throw Error(ErrorKind::Unsupported, "cannot intersect rotation models");
}

// --- matching -------------------------------------------------------------

struct Option {
  GeometricConstraint c;
  bool rotation_only = false;
};

struct Ranked {
  ConstraintHypothesis h;
  std::tuple<int, int, int, int, double, double, std::size_t> key;
};

GeometricConstraint relation(const Shape& f, ShapeKind ck, Relation r, const MatchOptions& opt) {
  GeometricConstraint c;
  c.fixed = {f.owner, f.name, f.kind()};
  c.constrained = {opt.constrained_object, to_string(ck), ck};
  c.relation = r;
  return c;
}

GeometricConstraint distance_or_coincident(const Shape& f, ShapeKind ck, double d, double tol, const MatchOptions& opt) {
  if (std::abs(d) <= tol) return relation(f, ck, Relation::Coincident, opt);
  GeometricConstraint c = relation(f, ck, Relation::Distance, opt);
  c.value = d;
  return c;
}

GeometricConstraint angle_relation(const Shape& f, ShapeKind ck, const OneAngle& o, const MatchOptions& opt) {
  if (!o.interval && o.theta <= opt.angle_tolerance && ck == ShapeKind::Line && f.kind() == ShapeKind::Line)
    return relation(f, ck, Relation::Parallel, opt);
  GeometricConstraint c = relation(f, ck, Relation::Angle, opt);
  if (o.interval) {
    c.interval = o.interval;
  } else {
    c.value = o.theta;
  }
  return c;
}

// Slab band expressed as an offset range along (p, n); n parallel to the slab normal.
Interval band_in(const Full3Space::Slab& slab, const Vec3& p, const UnitVec3& n) {
  const double h = (slab.p - p).dot(n.vec());
  return slab.n.dot(n.vec()) > 0.0 ? Interval{slab.offset.lo + h, slab.offset.hi + h}
                                   : Interval{h - slab.offset.hi, h - slab.offset.lo};
}

std::optional<Vec3> shape_direction(const Shape& s) {
  if (const auto* l = std::get_if<LineShape>(&s.geometry)) return l->a.vec();
  if (const auto* p = std::get_if<PlaneShape>(&s.geometry)) return p->n.vec();
  return std::nullopt;
}

// Constraints whose nullspace reproduces the translation model (possibly with
// a rotation model attached).
std::vector<Option> translation_options(const NullspaceModel& n, const std::vector<Shape>& shapes,
                                        const MatchOptions& opt) {
  std::vector<Option> out;
  const double tp = opt.position_tolerance, ta = opt.angle_tolerance;
  const auto* par = std::get_if<OneParallel>(&n.rotation.form);
  const auto* ang = std::get_if<OneAngle>(&n.rotation.form);
  for (const auto& f : shapes) {
    std::visit(
        Overloaded{
            [&](const PointManifold& p) {
              if (const auto* s = std::get_if<PointShape>(&f.geometry); s && (s->p - p.p).norm() <= tp)
                out.push_back({relation(f, ShapeKind::Point, Relation::Coincident, opt)});
            },
            [&](const LineManifold& l) {
              const auto* s = std::get_if<LineShape>(&f.geometry);
              if (!s || !collinear(s->a, l.a, ta) || distance_to_line(l.p, s->p, s->a) > tp) return;
              out.push_back({relation(f, ShapeKind::Point, Relation::Coincident, opt)});
              if (par && parallel(par->vf, s->a, ta)) out.push_back({relation(f, ShapeKind::Line, Relation::Concentric, opt)});
            },
            [&](const CircleManifold& ci) {
              const auto* s = std::get_if<CircleShape>(&f.geometry);
              if (s && (s->p - ci.p).norm() <= tp && collinear(s->n, ci.n, ta) && std::abs(s->r - ci.r) <= tp)
                out.push_back({relation(f, ShapeKind::Point, Relation::Coincident, opt)});
            },
            [&](const PlaneManifold& pl) {
              const auto* s = std::get_if<PlaneShape>(&f.geometry);
              if (!s || !collinear(s->n, pl.n, ta)) return;
              const double d = (pl.p - s->p).dot(s->n.vec());
              out.push_back({distance_or_coincident(f, ShapeKind::Point, d, tp, opt)});
              if (par && parallel(par->vf, s->n, ta)) out.push_back({distance_or_coincident(f, ShapeKind::Plane, d, tp, opt)});
              if (ang && !ang->interval && parallel(ang->vf, s->n, ta) && std::abs(ang->theta - kPi / 2.0) <= ta)
                out.push_back({distance_or_coincident(f, ShapeKind::Line, d, tp, opt)});
            },
            [&](const CylinderManifold& cy) {
              if (const auto* s = std::get_if<LineShape>(&f.geometry)) {
                if (!collinear(s->a, cy.a, ta) || distance_to_line(cy.p, s->p, s->a) > tp) return;
                GeometricConstraint c = relation(f, ShapeKind::Point, Relation::Distance, opt);
                c.value = cy.r;
                out.push_back({c});
                if (par && parallel(par->vf, s->a, ta)) {
                  c.constrained = relation(f, ShapeKind::Line, Relation::Distance, opt).constrained;
                  out.push_back({c});
                }
              } else if (const auto* s = std::get_if<CylinderShape>(&f.geometry)) {
                if (!collinear(s->a, cy.a, ta) || distance_to_line(cy.p, s->p, s->a) > tp) return;
                if (!par || !parallel(par->vf, s->a, ta)) return;
                GeometricConstraint c = relation(f, ShapeKind::Cylinder, Relation::Concentric, opt);
                if (std::abs(cy.r - s->r) > tp) c.value = cy.r - s->r;
                out.push_back({c});
              }
            },
            [&](const Full3Space& fs) {
              const auto* s = std::get_if<PlaneShape>(&f.geometry);
              if (!fs.slab || !s || !collinear(s->n, fs.slab->n, ta)) return;
              const auto interval = [&](ShapeKind ck) {
                GeometricConstraint c = relation(f, ck, Relation::Distance, opt);
                c.interval = band_in(*fs.slab, s->p, s->n);
                return Option{c};
              };
              out.push_back(interval(ShapeKind::Point));
              if (par && parallel(par->vf, s->n, ta)) out.push_back(interval(ShapeKind::Plane));
              if (ang && !ang->interval && parallel(ang->vf, s->n, ta) && std::abs(ang->theta - kPi / 2.0) <= ta)
                out.push_back(interval(ShapeKind::Line));
            },
        },
        n.translation.form);
  }
  return out;
}

// Constraints reproducing the rotation model; some also restrict translation
// consistently with the fitted translation model.
std::vector<Option> rotation_options(const NullspaceModel& n, const std::vector<Shape>& shapes, const MatchOptions& opt) {
  std::vector<Option> out;
  const double tp = opt.position_tolerance, ta = opt.angle_tolerance;
  const auto* par = std::get_if<OneParallel>(&n.rotation.form);
  const auto* ang = std::get_if<OneAngle>(&n.rotation.form);
  if (!par && !ang) return out;
  const Vec3 vf = par ? par->vf.vec() : ang->vf.vec();

  // Lines first, then planes.
  for (int pass = 0; pass < 2; ++pass) {
    for (const auto& f : shapes) {
      const bool is_line = f.kind() == ShapeKind::Line;
      if ((pass == 0) != is_line || (!is_line && f.kind() != ShapeKind::Plane)) continue;
      const auto dir = shape_direction(f);
      if (!dir || !parallel(*dir, vf, ta)) continue;
      if (par) {
        out.push_back({relation(f, is_line ? ShapeKind::Line : ShapeKind::Plane, Relation::Parallel, opt), true});
        if (is_line) {
          const auto& l = std::get<LineShape>(f.geometry);
          std::optional<double> radius;
          if (const auto* ci = std::get_if<CircleManifold>(&n.translation.form);
              ci && collinear(ci->n, l.a, ta) && distance_to_line(ci->p, l.p, l.a) <= tp)
            radius = ci->r;
          if (const auto* cy = std::get_if<CylinderManifold>(&n.translation.form);
              cy && collinear(cy->a, l.a, ta) && distance_to_line(cy->p, l.p, l.a) <= tp)
            radius = cy->r;
          if (radius) {
            GeometricConstraint c = relation(f, ShapeKind::Line, Relation::Distance, opt);
            c.value = *radius;
            out.push_back({c});
          }
        } else if (const auto* pl = std::get_if<PlaneManifold>(&n.translation.form); pl && collinear(pl->n, vf, ta)) {
          const auto& s = std::get<PlaneShape>(f.geometry);
          out.push_back({distance_or_coincident(f, ShapeKind::Plane, (pl->p - s.p).dot(s.n.vec()), tp, opt)});
        }
      } else {
        out.push_back({angle_relation(f, ShapeKind::Line, *ang, opt), true});
        if (!is_line) out.push_back({angle_relation(f, ShapeKind::Plane, *ang, opt), true});
      }
    }
  }
  return out;
}

// Interval distances explaining the axial bounds of a cylinder model.
std::vector<Option> bound_options(const NullspaceModel& n, const std::vector<Shape>& shapes, const MatchOptions& opt) {
  std::vector<Option> out;
  const auto* cy = std::get_if<CylinderManifold>(&n.translation.form);
  if (!cy || !n.translation.bounds || n.translation.bounds->dims.empty()) return out;
  const Interval s = n.translation.bounds->dims[0];
  for (const auto& f : shapes) {
    const auto* pl = std::get_if<PlaneShape>(&f.geometry);
    if (!pl || !collinear(pl->n, cy->a, opt.angle_tolerance)) continue;
    const double sgn = pl->n.dot(cy->a) > 0.0 ? 1.0 : -1.0;
    const double h0 = (cy->p - pl->p).dot(pl->n.vec());
    GeometricConstraint c = relation(f, ShapeKind::Plane, Relation::Distance, opt);
    c.interval = sgn > 0 ? Interval{h0 + s.lo, h0 + s.hi} : Interval{h0 - s.hi, h0 - s.lo};
    out.push_back({c});
  }
  return out;
}

bool same_constraint(const GeometricConstraint& a, const GeometricConstraint& b) {
  return a.fixed == b.fixed && a.constrained == b.constrained && a.relation == b.relation && a.value == b.value &&
         a.interval == b.interval;
}

}  // namespace

std::string to_string(Relation r) {
  switch (r) {
    case Relation::Distance: return "distance";
    case Relation::Angle: return "angle";
    case Relation::Coincident: return "coincident";
    case Relation::Concentric: return "concentric";
    case Relation::Parallel: return "parallel";
  }
  return "?";
}

Relation relation_from_string(const std::string& s) {
  for (auto r : {Relation::Distance, Relation::Angle, Relation::Coincident, Relation::Concentric, Relation::Parallel})
    if (to_string(r) == s) return r;
  throw Error(ErrorKind::Parse, "unknown relation '" + s + "'");
}

std::string to_string(const GeometricConstraint& c) {
  std::string out = to_string(c.relation) + "(" + c.fixed.qualified_name() + ":" + to_string(c.fixed.kind) + ", " +
                    c.constrained.qualified_name() + ":" + to_string(c.constrained.kind) + ")";
  if (c.value) out += " = " + fmt(*c.value);
  if (c.interval) out += " in [" + fmt(c.interval->lo) + ", " + fmt(c.interval->hi) + "]";
  return out;
}

bool supported(const GeometricConstraint& c) {
  try {
    nullspace_of(c, placeholder(c.fixed.kind), AxisSelector::PosZ);
    return true;
  } catch (const Error&) {
    return false;
  }
}

const SceneObject& Scene::object(const std::string& name) const {
  for (const auto& o : objects)
    if (o.name == name) return o;
  throw Error(ErrorKind::InvalidArgument, "unknown scene object '" + name + "'");
}

bool Scene::has_object(const std::string& name) const {
  return std::any_of(objects.begin(), objects.end(), [&](const SceneObject& o) { return o.name == name; });
}

Shape Scene::world_shape(const ShapeRef& ref) const {
  const SceneObject& o = object(ref.object);
  for (const auto& s : o.shapes) {
    if (s.name != ref.name) continue;
    if (s.kind() != ref.kind)
      throw Error(ErrorKind::InvalidArgument,
                  "shape '" + ref.qualified_name() + "' is a " + to_string(s.kind()) + ", not a " + to_string(ref.kind));
    Shape w = transformed(s, o.pose);
    w.owner = o.name;
    return w;
  }
  throw Error(ErrorKind::InvalidArgument, "unknown shape '" + ref.qualified_name() + "'");
}

std::vector<Shape> Scene::world_shapes() const {
  std::vector<Shape> out;
  for (const auto& o : objects) {
    for (const auto& s : o.shapes) {
      Shape w = transformed(s, o.pose);
      w.owner = o.name;
      out.push_back(std::move(w));
    }
  }
  return out;
}

void validate(const Scene& s) {
  std::set<std::string> names;
  for (const auto& o : s.objects) {
    if (o.name.empty() || !names.insert(o.name).second)
      throw Error(ErrorKind::InvalidArgument, "duplicate or empty object name '" + o.name + "'");
    std::set<std::string> shape_names;
    for (const auto& sh : o.shapes) {
      if (sh.name.empty() || !shape_names.insert(sh.name).second)
        throw Error(ErrorKind::InvalidArgument, "duplicate or empty shape name '" + o.name + "/" + sh.name + "'");
      validate(sh);
    }
  }
}

NullspaceModel constraint_nullspace(const GeometricConstraint& c, const Scene& scene, AxisSelector selector) {
  return nullspace_of(c, scene.world_shape(c.fixed), selector);
}

NullspaceModel intersect(const NullspaceModel& a, const NullspaceModel& b, double tolerance) {
  NullspaceModel out;
  out.translation = intersect_translation(a.translation, b.translation, tolerance);
  out.rotation = intersect_rotation(a.rotation, b.rotation, tolerance);
  return out;
}

NullspaceModel combined_nullspace(const std::vector<GeometricConstraint>& cs, const Scene& scene, AxisSelector selector,
                                  double tolerance) {
  NullspaceModel out = make(tm(Full3Space{}), rm(FullSO3{}, selector));
  for (const auto& c : cs) out = intersect(out, constraint_nullspace(c, scene, selector), tolerance);
  return out;
}

std::optional<double> manifold_distance(const NullspaceModel& a, const NullspaceModel& b, const MatchOptions& opt) {
  if (a.translation.type() != b.translation.type() || a.rotation.type() != b.rotation.type()) return std::nullopt;
  const double tp = opt.position_tolerance, ta = opt.angle_tolerance;
  const auto axis_angle = [](const Vec3& x, const Vec3& y) { return std::min(angle_between(x, y), angle_between(x, -y)); };
  double worst = 0.0;
  const auto pos = [&](double e) { worst = std::max(worst, e / tp); };
  const auto ang = [&](double e) { worst = std::max(worst, e / ta); };

  const auto& tb = b.translation.form;
  std::visit(Overloaded{
                 [&](const Full3Space& x) {
                   const auto& y = std::get<Full3Space>(tb);
                   if (x.slab.has_value() != y.slab.has_value()) worst = INFINITY;
                   if (!x.slab || !y.slab) return;
                   ang(axis_angle(x.slab->n, y.slab->n));
                   const Interval band = band_in(*y.slab, x.slab->p, x.slab->n);
                   pos(std::abs(band.lo - x.slab->offset.lo));
                   pos(std::abs(band.hi - x.slab->offset.hi));
                 },
                 [&](const PointManifold& x) { pos((x.p - std::get<PointManifold>(tb).p).norm()); },
                 [&](const LineManifold& x) {
                   const auto& y = std::get<LineManifold>(tb);
                   ang(axis_angle(x.a, y.a));
                   pos(distance_to_line(y.p, x.p, x.a));
                 },
                 [&](const CircleManifold& x) {
                   const auto& y = std::get<CircleManifold>(tb);
                   pos((x.p - y.p).norm());
                   ang(axis_angle(x.n, y.n));
                   pos(std::abs(x.r - y.r));
                 },
                 [&](const PlaneManifold& x) {
                   const auto& y = std::get<PlaneManifold>(tb);
                   ang(axis_angle(x.n, y.n));
                   pos(std::abs((y.p - x.p).dot(x.n.vec())));
                 },
                 [&](const CylinderManifold& x) {
                   const auto& y = std::get<CylinderManifold>(tb);
                   ang(axis_angle(x.a, y.a));
                   pos(distance_to_line(y.p, x.p, x.a));
                   pos(std::abs(x.r - y.r));
                 },
             },
             a.translation.form);

  const auto& rb = b.rotation.form;
  std::visit(Overloaded{
                 [](const FullSO3&) {},
                 [&](const OneParallel& x) { ang(angle_between(x.vf, std::get<OneParallel>(rb).vf)); },
                 [&](const OneAngle& x) {
                   const auto& y = std::get<OneAngle>(rb);
                   ang(angle_between(x.vf, y.vf));
                   if (x.interval.has_value() != y.interval.has_value()) {
                     worst = INFINITY;
                   } else if (x.interval) {
                     ang(std::abs(x.interval->lo - y.interval->lo));
                     ang(std::abs(x.interval->hi - y.interval->hi));
                   } else {
                     ang(std::abs(x.theta - y.theta));
                   }
                 },
             },
             a.rotation.form);
  if (a.rotation.selector != b.rotation.selector) worst = INFINITY;
  return worst;
}

std::vector<ConstraintHypothesis> map_to_constraints(const NullspaceModel& n, const Scene& scene, const MatchOptions& opt) {
  if (scene.objects.empty()) throw Error(ErrorKind::InvalidArgument, "scene is empty");
  const std::vector<Shape> shapes = scene.world_shapes();
  const AxisSelector sel = n.rotation.selector;
  const double tol = std::max(opt.position_tolerance, opt.angle_tolerance);

  std::vector<Option> primaries = translation_options(n, shapes, opt);
  const std::vector<Option> rotations = rotation_options(n, shapes, opt);
  const std::vector<Option> bounds = bound_options(n, shapes, opt);
  const auto* full = std::get_if<Full3Space>(&n.translation.form);
  const bool needs_translation = !full || full->slab.has_value();
  const bool needs_bounds = !bounds.empty();

  std::vector<std::vector<Option>> sets;
  const auto with_bounds = [&](std::vector<Option> base) {
    if (!needs_bounds) {
      sets.push_back(std::move(base));
      return;
    }
    for (const auto& b : bounds) {
      auto s = base;
      s.push_back(b);
      sets.push_back(std::move(s));
    }
  };
  if (needs_translation) {
    for (const auto& p : primaries) {
      with_bounds({p});
      for (const auto& r : rotations) {
        if (!same_constraint(p.c, r.c)) with_bounds({p, r});
      }
    }
  } else {
    for (const auto& r : rotations) with_bounds({r});
  }

  std::vector<Ranked> ranked;
  for (std::size_t i = 0; i < sets.size(); ++i) {
    std::vector<GeometricConstraint> cs;
    for (const auto& o : sets[i]) cs.push_back(o.c);
    NullspaceModel combined;
    try {
      combined = combined_nullspace(cs, scene, sel, tol);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::Unsupported || e.kind() == ErrorKind::InvalidArgument) continue;
      throw;
    }
    const auto d = manifold_distance(combined, n, opt);
    if (!d || *d > 1.0) continue;

    int foreign = 0, rotation_only = 0, valued = 0;
    double offset = 0.0;
    for (const auto& o : sets[i]) {
      if (!opt.fixed_object.empty() && o.c.fixed.object != opt.fixed_object) ++foreign;
      if (o.rotation_only) ++rotation_only;
      if (o.c.value && std::abs(*o.c.value) > 0.0) ++valued;
      if (o.c.interval && o.c.relation == Relation::Distance)
        offset += std::abs(0.5 * (o.c.interval->lo + o.c.interval->hi));
    }
    ranked.push_back({{cs, *d}, {foreign, rotation_only, static_cast<int>(cs.size()), valued, offset, *d, i}});
  }
  std::stable_sort(ranked.begin(), ranked.end(), [](const Ranked& a, const Ranked& b) { return a.key < b.key; });

  std::vector<ConstraintHypothesis> out;
  out.reserve(ranked.size());
  for (auto& r : ranked) out.push_back(std::move(r.h));
  return out;
}

double constraint_residual(const GeometricConstraint& c, const Pose& ee, const Scene& scene, AxisSelector selector) {
  const Shape f = scene.world_shape(c.fixed);
  (void)nullspace_of(c, f, selector);  // rejects unsupported rows
  const Vec3 u = ee.translation;
  const Vec3 v = constrained_axis(ee.rotation, selector).vec();
  const ShapeKind ck = c.constrained.kind;

  switch (f.kind()) {
    case ShapeKind::Point:
      return (u - std::get<PointShape>(f.geometry).p).norm();
    case ShapeKind::Circle: {
      const auto& ci = std::get<CircleShape>(f.geometry);
      TranslationManifold m = tm(CircleManifold{ci.p, ci.n, ci.r});
      return dist_t(m, u);
    }
    case ShapeKind::Line: {
      const auto& l = std::get<LineShape>(f.geometry);
      const double radial = distance_to_line(u, l.p, l.a);
      const double tilt = angle_between(v, l.a);
      switch (c.relation) {
        case Relation::Angle: return interval_or_value_error(tilt, c);
        case Relation::Parallel: return tilt;
        case Relation::Coincident:
        case Relation::Concentric:
          return ck == ShapeKind::Line ? radial + tilt : radial;
        case Relation::Distance:
          return interval_or_value_error(radial, c) + (ck == ShapeKind::Line ? tilt : 0.0);
      }
      break;
    }
    case ShapeKind::Plane: {
      const auto& p = std::get<PlaneShape>(f.geometry);
      const double offset = (u - p.p).dot(p.n.vec());
      const double tilt = angle_between(v, p.n);
      const double orientation = ck == ShapeKind::Line ? std::abs(tilt - kPi / 2.0) : (ck == ShapeKind::Plane ? tilt : 0.0);
      switch (c.relation) {
        case Relation::Angle: return interval_or_value_error(tilt, c);
        case Relation::Parallel: return tilt;
        case Relation::Coincident: return std::abs(offset) + orientation;
        case Relation::Distance: return interval_or_value_error(offset, c) + orientation;
        case Relation::Concentric: break;
      }
      break;
    }
    case ShapeKind::Cylinder: {
      const auto& cy = std::get<CylinderShape>(f.geometry);
      return std::abs(distance_to_line(u, cy.p, cy.a) - (cy.r + c.value.value_or(0.0))) + angle_between(v, cy.a);
    }
  }
  no_row(c);
}

}  // namespace skillspace
