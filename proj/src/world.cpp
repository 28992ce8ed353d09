#include "scenegen/world.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace scenegen {

namespace {

constexpr double kEdgeAxisBias = 1e-4;   // face axes win unless an edge axis is clearly better
constexpr double kRefFaceBias = 1e-5;
constexpr double kPairMargin = 0.01;     // broadphase slack

struct WorldShape {
  const RigidBody* body = nullptr;
  const ConvexHull* hull = nullptr;  // null for spheres
  Mat3 rot = Mat3::Identity();
  Vec3 center = Vec3::Zero();
  std::vector<Vec3> verts;  // world-space hull vertices

  bool is_sphere() const { return hull == nullptr; }
  double sphere_radius() const { return body->shape.dims.x(); }
};

WorldShape make_world_shape(const RigidBody& body, const ConvexHull* hull) {
  WorldShape w;
  w.body = &body;
  w.hull = hull;
  w.rot = body.state.orientation.toRotationMatrix();
  w.center = body.state.position;
  if (hull != nullptr) {
    w.verts.reserve(hull->vertices.size());
    for (const Vec3& v : hull->vertices) w.verts.push_back(w.center + w.rot * v);
  }
  return w;
}

double support_min(const WorldShape& s, const Vec3& axis) {
  double best = std::numeric_limits<double>::infinity();
  for (const Vec3& v : s.verts) best = std::min(best, v.dot(axis));
  return best;
}

double support_max(const WorldShape& s, const Vec3& axis) {
  double best = -std::numeric_limits<double>::infinity();
  for (const Vec3& v : s.verts) best = std::max(best, v.dot(axis));
  return best;
}

// Largest separation over A's face normals; negative means overlap along
// every tested face axis.
double face_separation(const WorldShape& a, const WorldShape& b, int& best_face) {
  double best = -std::numeric_limits<double>::infinity();
  best_face = -1;
  for (std::size_t f = 0; f < a.hull->faces.size(); ++f) {
    const Vec3 n = a.rot * a.hull->faces[f].normal;
    const double face_d = a.verts[a.hull->faces[f].verts[0]].dot(n);
    const double sep = support_min(b, n) - face_d;
    if (sep > best) {
      best = sep;
      best_face = static_cast<int>(f);
    }
  }
  return best;
}

double edge_separation(const WorldShape& a, const WorldShape& b, Vec3& axis_out) {
  double best = -std::numeric_limits<double>::infinity();
  for (const Vec3& da_local : a.hull->edge_dirs) {
    const Vec3 da = a.rot * da_local;
    for (const Vec3& db_local : b.hull->edge_dirs) {
      const Vec3 db = b.rot * db_local;
      Vec3 axis = da.cross(db);
      const double len = axis.norm();
      if (len < 1e-9) continue;
      axis /= len;
      if (axis.dot(b.center - a.center) < 0.0) axis = -axis;
      const double sep = support_min(b, axis) - support_max(a, axis);
      if (sep > best) {
        best = sep;
        axis_out = axis;
      }
    }
  }
  return best;
}

// Sutherland-Hodgman clip of a polygon against the half-space
// (p - plane_point) . plane_normal >= 0.
void clip_polygon(std::vector<Vec3>& poly, const Vec3& plane_point,
                  const Vec3& plane_normal) {
  std::vector<Vec3> out;
  out.reserve(poly.size() + 2);
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3& p0 = poly[i];
    const Vec3& p1 = poly[(i + 1) % n];
    const double d0 = (p0 - plane_point).dot(plane_normal);
    const double d1 = (p1 - plane_point).dot(plane_normal);
    if (d0 >= 0.0) out.push_back(p0);
    if ((d0 >= 0.0) != (d1 >= 0.0)) {
      const double t = d0 / (d0 - d1);
      out.push_back(p0 + t * (p1 - p0));
    }
  }
  poly = std::move(out);
}

// Closest points between segments (a0,a1) and (b0,b1).
void closest_on_segments(const Vec3& a0, const Vec3& a1, const Vec3& b0,
                         const Vec3& b1, Vec3& pa, Vec3& pb) {
  const Vec3 d1 = a1 - a0;
  const Vec3 d2 = b1 - b0;
  const Vec3 r = a0 - b0;
  const double la = d1.squaredNorm();
  const double lb = d2.squaredNorm();
  const double f = d2.dot(r);
  double s = 0.0, t = 0.0;
  if (la > 1e-12) {
    const double c = d1.dot(r);
    if (lb <= 1e-12) {
      s = std::clamp(-c / la, 0.0, 1.0);
    } else {
      const double b = d1.dot(d2);
      const double denom = la * lb - b * b;
      if (denom > 1e-12) s = std::clamp((b * f - c * lb) / denom, 0.0, 1.0);
      t = (b * s + f) / lb;
      if (t < 0.0) {
        t = 0.0;
        s = std::clamp(-c / la, 0.0, 1.0);
      } else if (t > 1.0) {
        t = 1.0;
        s = std::clamp((b - c) / la, 0.0, 1.0);
      }
    }
  } else if (lb > 1e-12) {
    t = std::clamp(f / lb, 0.0, 1.0);
  }
  pa = a0 + d1 * s;
  pb = b0 + d2 * t;
}

bool collide_convex_convex(const WorldShape& a, const WorldShape& b,
                           ContactManifold& m) {
  int face_a = -1, face_b = -1;
  const double sep_a = face_separation(a, b, face_a);
  if (sep_a > 0.0) return false;
  const double sep_b = face_separation(b, a, face_b);
  if (sep_b > 0.0) return false;
  Vec3 edge_axis;
  const double sep_e = edge_separation(a, b, edge_axis);
  if (sep_e > 0.0) return false;

  const double face_sep = std::max(sep_a, sep_b);
  if (sep_e > face_sep + kEdgeAxisBias) {
    // Edge-edge contact: find the supporting edges along the axis.
    auto best_edge = [](const WorldShape& s, const Vec3& axis, Vec3& e0, Vec3& e1) {
      double best = -std::numeric_limits<double>::infinity();
      for (const auto& face : s.hull->faces) {
        const std::size_t n = face.verts.size();
        for (std::size_t i = 0; i < n; ++i) {
          const Vec3& v0 = s.verts[face.verts[i]];
          const Vec3& v1 = s.verts[face.verts[(i + 1) % n]];
          const double score = 0.5 * (v0 + v1).dot(axis);
          if (score > best) {
            best = score;
            e0 = v0;
            e1 = v1;
          }
        }
      }
    };
    Vec3 a0, a1, b0, b1;
    best_edge(a, edge_axis, a0, a1);
    best_edge(b, -edge_axis, b0, b1);
    Vec3 pa, pb;
    closest_on_segments(a0, a1, b0, b1, pa, pb);
    m.normal = edge_axis;
    ContactPoint cp;
    cp.point = 0.5 * (pa + pb);
    cp.penetration = -sep_e;
    m.points = {cp};
    return true;
  }

  // Face contact. Reference face on the body with the larger separation.
  const bool ref_is_a = sep_a >= sep_b - kRefFaceBias;
  const WorldShape& ref = ref_is_a ? a : b;
  const WorldShape& inc = ref_is_a ? b : a;
  const int ref_face = ref_is_a ? face_a : face_b;

  const Vec3 ref_n = ref.rot * ref.hull->faces[ref_face].normal;
  // Incident face: most anti-parallel to the reference normal.
  int inc_face = 0;
  double best_dot = std::numeric_limits<double>::infinity();
  for (std::size_t f = 0; f < inc.hull->faces.size(); ++f) {
    const double d = (inc.rot * inc.hull->faces[f].normal).dot(ref_n);
    if (d < best_dot) {
      best_dot = d;
      inc_face = static_cast<int>(f);
    }
  }

  std::vector<Vec3> poly;
  for (int idx : inc.hull->faces[inc_face].verts) poly.push_back(inc.verts[idx]);

  const auto& ref_verts = ref.hull->faces[ref_face].verts;
  const std::size_t nr = ref_verts.size();
  for (std::size_t i = 0; i < nr && !poly.empty(); ++i) {
    const Vec3& v0 = ref.verts[ref_verts[i]];
    const Vec3& v1 = ref.verts[ref_verts[(i + 1) % nr]];
    const Vec3 side_n = ref_n.cross(v1 - v0).normalized();
    clip_polygon(poly, v0, side_n);
  }
  if (poly.empty()) return false;

  const double ref_d = ref.verts[ref_verts[0]].dot(ref_n);
  m.points.clear();
  for (const Vec3& p : poly) {
    const double sep = p.dot(ref_n) - ref_d;
    if (sep <= 0.0) {
      ContactPoint cp;
      cp.point = p;
      cp.penetration = -sep;
      m.points.push_back(cp);
    }
  }
  if (m.points.empty()) return false;
  m.normal = ref_is_a ? ref_n : Vec3(-ref_n);
  return true;
}

// Closest point on the true shape surface (cuboid or cylinder) to a local
// point; returns surface point and outward normal, plus whether the point
// is inside.
bool closest_on_shape(const Shape& shape, const Vec3& p, Vec3& surface, Vec3& normal) {
  if (shape.kind == Shape::Kind::Cuboid) {
    const Vec3 h = shape.dims;
    const bool inside = std::abs(p.x()) <= h.x() && std::abs(p.y()) <= h.y() &&
                        std::abs(p.z()) <= h.z();
    if (!inside) {
      surface = p.cwiseMax(-h).cwiseMin(h);
      normal = (p - surface).normalized();
      return false;
    }
    // Escape through the nearest face.
    int axis = 0;
    double best = std::numeric_limits<double>::infinity();
    double sign = 1.0;
    for (int i = 0; i < 3; ++i) {
      const double dpos = h[i] - p[i];
      const double dneg = p[i] + h[i];
      if (dpos < best) { best = dpos; axis = i; sign = 1.0; }
      if (dneg < best) { best = dneg; axis = i; sign = -1.0; }
    }
    surface = p;
    surface[axis] = sign * h[axis];
    normal = Vec3::Zero();
    normal[axis] = sign;
    return true;
  }
  // Cylinder, axis z.
  const double r = shape.dims.x();
  const double hh = shape.dims.y();
  const double rho = std::hypot(p.x(), p.y());
  const bool inside = rho <= r && std::abs(p.z()) <= hh;
  if (!inside) {
    Vec3 q = p;
    q.z() = std::clamp(p.z(), -hh, hh);
    if (rho > r) {
      const double scale = r / std::max(rho, 1e-12);
      q.x() = p.x() * scale;
      q.y() = p.y() * scale;
    }
    surface = q;
    normal = (p - surface).norm() > 1e-12 ? (p - surface).normalized() : Vec3::UnitZ();
    return false;
  }
  const double d_radial = r - rho;
  const double d_axial = hh - std::abs(p.z());
  if (d_radial < d_axial && rho > 1e-9) {
    const double scale = r / rho;
    surface = Vec3(p.x() * scale, p.y() * scale, p.z());
    normal = Vec3(p.x() / rho, p.y() / rho, 0.0);
  } else {
    const double sign = p.z() >= 0.0 ? 1.0 : -1.0;
    surface = Vec3(p.x(), p.y(), sign * hh);
    normal = Vec3(0.0, 0.0, sign);
  }
  return true;
}

bool collide_sphere_convex(const WorldShape& sph, const WorldShape& conv,
                           ContactManifold& m, bool sphere_is_a) {
  const double r = sph.sphere_radius();
  const Vec3 local = conv.rot.transpose() * (sph.center - conv.center);
  Vec3 surf_local, n_local;
  const bool inside = closest_on_shape(conv.body->shape, local, surf_local, n_local);
  const Vec3 surf = conv.center + conv.rot * surf_local;
  const Vec3 n_out = conv.rot * n_local;  // outward from the convex body
  double pen;
  if (inside) {
    pen = r + (surf_local - local).norm();
  } else {
    pen = r - (sph.center - surf).norm();
  }
  if (pen < 0.0) return false;
  ContactPoint cp;
  cp.point = surf;
  cp.penetration = pen;
  // Manifold normal must point from body a toward body b.
  m.normal = sphere_is_a ? Vec3(-n_out) : n_out;
  m.points = {cp};
  return true;
}

bool collide_sphere_sphere(const WorldShape& a, const WorldShape& b,
                           ContactManifold& m) {
  const double ra = a.sphere_radius();
  const double rb = b.sphere_radius();
  const Vec3 d = b.center - a.center;
  const double dist = d.norm();
  const double pen = ra + rb - dist;
  if (pen < 0.0) return false;
  m.normal = dist > 1e-12 ? Vec3(d / dist) : Vec3::UnitZ();
  ContactPoint cp;
  cp.point = a.center + m.normal * (ra - 0.5 * pen);
  cp.penetration = pen;
  m.points = {cp};
  return true;
}

bool collide_pair(const WorldShape& a, const WorldShape& b, ContactManifold& m) {
  if (a.is_sphere() && b.is_sphere()) return collide_sphere_sphere(a, b, m);
  if (a.is_sphere()) return collide_sphere_convex(a, b, m, /*sphere_is_a=*/true);
  if (b.is_sphere()) return collide_sphere_convex(b, a, m, /*sphere_is_a=*/false);
  return collide_convex_convex(a, b, m);
}

double pair_penetration(const WorldShape& a, const WorldShape& b) {
  ContactManifold m;
  if (!collide_pair(a, b, m)) return 0.0;
  double pen = 0.0;
  for (const auto& p : m.points) pen = std::max(pen, p.penetration);
  return pen;
}

void make_tangent_basis(const Vec3& n, Vec3& t1, Vec3& t2) {
  t1 = std::abs(n.x()) < 0.57 ? n.cross(Vec3::UnitX()) : n.cross(Vec3::UnitY());
  t1.normalize();
  t2 = n.cross(t1);
}

}  // namespace

int World::add_body(const RigidBody& body) {
  body.shape.validate();
  if (body.mass < 0.0) throw std::invalid_argument("mass must be >= 0");
  if (body.friction < 0.0) throw std::invalid_argument("friction must be >= 0");
  if (body.restitution < 0.0 || body.restitution >= 1.0) {
    throw std::invalid_argument("restitution must be in [0, 1)");
  }
  bodies_.push_back(body);
  if (body.shape.kind == Shape::Kind::Sphere) {
    hulls_.emplace_back();
  } else {
    hulls_.push_back(make_collision_hull(body.shape));
  }
  return static_cast<int>(bodies_.size()) - 1;
}

void World::find_contacts() {
  contacts_.clear();
  const int n = body_count();
  std::vector<WorldShape> shapes;
  shapes.reserve(n);
  for (int i = 0; i < n; ++i) {
    shapes.push_back(make_world_shape(
        bodies_[i], hulls_[i].vertices.empty() ? nullptr : &hulls_[i]));
  }
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (bodies_[i].is_static() && bodies_[j].is_static()) continue;
      const double rr = bodies_[i].shape.bounding_radius() +
                        bodies_[j].shape.bounding_radius() + kPairMargin;
      if ((shapes[i].center - shapes[j].center).squaredNorm() > rr * rr) continue;
      ContactManifold m;
      if (collide_pair(shapes[i], shapes[j], m)) {
        m.a = i;
        m.b = j;
        contacts_.push_back(std::move(m));
      }
    }
  }
}

void World::solve_contacts() {
  struct BodyData {
    double inv_mass = 0.0;
    Mat3 inv_inertia = Mat3::Zero();
  };
  std::vector<BodyData> data(body_count());
  for (int i = 0; i < body_count(); ++i) {
    const RigidBody& b = bodies_[i];
    if (b.is_static()) continue;
    data[i].inv_mass = 1.0 / b.mass;
    const Mat3 r = b.state.orientation.toRotationMatrix();
    data[i].inv_inertia = r * b.inertia.cwiseInverse().asDiagonal() * r.transpose();
  }

  struct SolvePoint {
    Vec3 ra, rb;
    Vec3 point = Vec3::Zero();
    double mass_n = 0.0, mass_t1 = 0.0, mass_t2 = 0.0;
    double target_v = 0.0;
    double acc_n = 0.0, acc_t1 = 0.0, acc_t2 = 0.0;
  };
  struct SolveManifold {
    int a, b;
    Vec3 n, t1, t2;
    double friction;
    std::vector<SolvePoint> pts;
  };
  std::vector<SolveManifold> work;
  work.reserve(contacts_.size());

  auto velocity_at = [&](int id, const Vec3& r) {
    const BodyState& s = bodies_[id].state;
    return Vec3(s.linear_velocity + s.angular_velocity.cross(r));
  };

  auto apply_impulse = [&](SolveManifold& sm, const SolvePoint& sp, const Vec3& imp) {
    BodyState& sa = bodies_[sm.a].state;
    BodyState& sb = bodies_[sm.b].state;
    sa.linear_velocity -= imp * data[sm.a].inv_mass;
    sa.angular_velocity -= data[sm.a].inv_inertia * sp.ra.cross(imp);
    sb.linear_velocity += imp * data[sm.b].inv_mass;
    sb.angular_velocity += data[sm.b].inv_inertia * sp.rb.cross(imp);
  };

  for (const ContactManifold& m : contacts_) {
    SolveManifold sm;
    sm.a = m.a;
    sm.b = m.b;
    sm.n = m.normal;
    make_tangent_basis(sm.n, sm.t1, sm.t2);
    sm.friction = std::sqrt(bodies_[m.a].friction * bodies_[m.b].friction);
    const double restitution =
        std::max(bodies_[m.a].restitution, bodies_[m.b].restitution);
    const PairCache* cache = nullptr;
    for (const PairCache& pc : impulse_cache_) {
      if (pc.a == m.a && pc.b == m.b) {
        cache = &pc;
        break;
      }
    }
    for (const ContactPoint& cp : m.points) {
      SolvePoint sp;
      sp.ra = cp.point - bodies_[m.a].state.position;
      sp.rb = cp.point - bodies_[m.b].state.position;
      auto effective_mass = [&](const Vec3& axis) {
        double k = data[m.a].inv_mass + data[m.b].inv_mass;
        const Vec3 ca = sp.ra.cross(axis);
        const Vec3 cb = sp.rb.cross(axis);
        k += axis.dot((data[m.a].inv_inertia * ca).cross(sp.ra));
        k += axis.dot((data[m.b].inv_inertia * cb).cross(sp.rb));
        return k > 1e-12 ? 1.0 / k : 0.0;
      };
      sp.mass_n = effective_mass(sm.n);
      sp.mass_t1 = effective_mass(sm.t1);
      sp.mass_t2 = effective_mass(sm.t2);
      const double v_n = (velocity_at(m.b, sp.rb) - velocity_at(m.a, sp.ra)).dot(sm.n);
      const double bias = std::min(
          max_bias_velocity,
          (baumgarte / dt) * std::max(0.0, cp.penetration - slop));
      const double bounce =
          v_n < -restitution_threshold ? -restitution * v_n : 0.0;
      sp.target_v = std::max(bias, bounce);
      // Warm start from last step's matched impulse.
      if (cache != nullptr) {
        double best = 2.25e-6;  // 1.5 mm squared
        const CachedImpulse* hit = nullptr;
        for (const CachedImpulse& ci : cache->points) {
          const double d = (ci.point - cp.point).squaredNorm();
          if (d < best) {
            best = d;
            hit = &ci;
          }
        }
        if (hit != nullptr) {
          sp.acc_n = hit->normal;
          sp.acc_t1 = hit->tangent1;
          sp.acc_t2 = hit->tangent2;
          apply_impulse(sm, sp,
                        sp.acc_n * sm.n + sp.acc_t1 * sm.t1 + sp.acc_t2 * sm.t2);
        }
      }
      sp.point = cp.point;
      sm.pts.push_back(sp);
    }
    work.push_back(std::move(sm));
  }

  for (int iter = 0; iter < solver_iterations; ++iter) {
    for (SolveManifold& sm : work) {
      for (SolvePoint& sp : sm.pts) {
        // Normal impulse.
        {
          const Vec3 v_rel = velocity_at(sm.b, sp.rb) - velocity_at(sm.a, sp.ra);
          const double v_n = v_rel.dot(sm.n);
          const double lambda = -sp.mass_n * (v_n - sp.target_v);
          const double new_acc = std::max(sp.acc_n + lambda, 0.0);
          const double d = new_acc - sp.acc_n;
          sp.acc_n = new_acc;
          apply_impulse(sm, sp, d * sm.n);
        }
        // Friction impulses, clamped to the Coulomb cone.
        const double max_t = sm.friction * sp.acc_n;
        for (int t = 0; t < 2; ++t) {
          const Vec3& tangent = t == 0 ? sm.t1 : sm.t2;
          double& acc = t == 0 ? sp.acc_t1 : sp.acc_t2;
          const double mass = t == 0 ? sp.mass_t1 : sp.mass_t2;
          const Vec3 v_rel = velocity_at(sm.b, sp.rb) - velocity_at(sm.a, sp.ra);
          const double v_t = v_rel.dot(tangent);
          const double lambda = -mass * v_t;
          const double new_acc = std::clamp(acc + lambda, -max_t, max_t);
          const double d = new_acc - acc;
          acc = new_acc;
          apply_impulse(sm, sp, d * tangent);
        }
      }
    }
  }

  impulse_cache_.clear();
  for (const SolveManifold& sm : work) {
    PairCache pc;
    pc.a = sm.a;
    pc.b = sm.b;
    pc.points.reserve(sm.pts.size());
    for (const SolvePoint& sp : sm.pts) {
      pc.points.push_back({sp.point, sp.acc_n, sp.acc_t1, sp.acc_t2});
    }
    impulse_cache_.push_back(std::move(pc));
  }
}

void World::integrate_positions() {
  for (RigidBody& b : bodies_) {
    if (b.is_static()) continue;
    BodyState& s = b.state;
    s.position += s.linear_velocity * dt;
    const Vec3 w = s.angular_velocity;
    const Quat omega(0.0, w.x(), w.y(), w.z());
    const Quat dq = omega * s.orientation;
    s.orientation.coeffs() += 0.5 * dt * dq.coeffs();
    s.orientation.normalize();
  }
}

void World::check_finite() const {
  for (const RigidBody& b : bodies_) {
    const BodyState& s = b.state;
    const bool ok = s.position.allFinite() && s.linear_velocity.allFinite() &&
                    s.angular_velocity.allFinite() &&
                    s.orientation.coeffs().allFinite() &&
                    s.position.norm() < 1e3 && s.linear_velocity.norm() < 1e4;
    if (!ok) throw SimulationDiverged("simulation diverged: non-finite body state");
  }
}

void World::step() {
  for (RigidBody& b : bodies_) {
    if (!b.is_static()) b.state.linear_velocity += gravity * dt;
  }
  find_contacts();
  solve_contacts();
  integrate_positions();
  check_finite();
  ++steps_;
}

Trajectory World::settle(int body_id, int max_steps,
                         const StabilityThresholds* early_stop) {
  if (body_id < 0 || body_id >= body_count()) {
    throw std::out_of_range("settle: unknown body id");
  }
  if (max_steps < 1) throw std::invalid_argument("settle: max_steps must be >= 1");
  Trajectory traj;
  traj.dt = dt;
  traj.samples.reserve(early_stop != nullptr ? 64 : max_steps);
  for (int i = 0; i < max_steps; ++i) {
    step();
    traj.samples.push_back(TrajectorySample::from_state(bodies_[body_id].state));
    if (early_stop != nullptr && check_stability(traj, *early_stop).stable) break;
  }
  return traj;
}

bool World::check_overlap(const RigidBody& candidate, double tolerance) const {
  return penetration_depth(candidate) > tolerance;
}

double World::penetration_depth(const RigidBody& candidate) const {
  ConvexHull hull;
  const bool is_sphere = candidate.shape.kind == Shape::Kind::Sphere;
  if (!is_sphere) hull = make_collision_hull(candidate.shape);
  const WorldShape cand = make_world_shape(candidate, is_sphere ? nullptr : &hull);
  double worst = 0.0;
  for (int i = 0; i < body_count(); ++i) {
    const double rr = candidate.shape.bounding_radius() +
                      bodies_[i].shape.bounding_radius() + kPairMargin;
    if ((bodies_[i].state.position - cand.center).squaredNorm() > rr * rr) continue;
    const WorldShape other = make_world_shape(
        bodies_[i], hulls_[i].vertices.empty() ? nullptr : &hulls_[i]);
    worst = std::max(worst, pair_penetration(cand, other));
  }
  return worst;
}

}  // namespace scenegen
