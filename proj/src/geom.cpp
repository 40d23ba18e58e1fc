#include "labo/geom/shapes.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <utility>

namespace labo {

Vec3 ConvexCore::support(const Vec3& dir) const {
  switch (kind) {
    case Kind::kPoint:
      return pts[0];
    case Kind::kSegment:
      return dot(pts[0], dir) >= dot(pts[1], dir) ? pts[0] : pts[1];
    case Kind::kPolytope: {
      std::size_t best = 0;
      double best_d = dot(pts[0], dir);
      for (std::size_t i = 1; i < pts.size(); ++i) {
        const double d = dot(pts[i], dir);
        if (d > best_d) {
          best_d = d;
          best = i;
        }
      }
      return pts[best];
    }
    case Kind::kDisk: {
      const Vec3 ax = axis;
      const double da = dot(dir, ax);
      Vec3 tangential = dir - da * ax;
      const double tn = norm(tangential);
      Vec3 s = pts[0] + (da >= 0.0 ? half_height : -half_height) * ax;
      if (tn > 1e-15) s += (radius / tn) * tangential;
      return s;
    }
  }
  return pts[0];
}

namespace {

struct SupportPoint {
  Vec3 w;  // a - b
  Vec3 a;
  Vec3 b;
};

// Closest point to the origin on the current simplex; reduces the simplex to
// the supporting subset and returns barycentric weights for it. Case
// analysis follows the usual Voronoi-region treatment.
struct SimplexResult {
  Vec3 closest;
  int n = 0;                       // size of supporting subset
  std::array<int, 3> idx{};        // indices into the input simplex
  std::array<double, 3> lambda{};  // barycentric weights, sum to 1
};

SimplexResult closest_on_segment_origin(const Vec3& a, const Vec3& b, int ia, int ib) {
  const Vec3 ab = b - a;
  const double denom = dot(ab, ab);
  double t = denom > 0.0 ? -dot(a, ab) / denom : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  SimplexResult r;
  if (t <= 0.0) {
    r.closest = a; r.n = 1; r.idx = {ia, 0, 0}; r.lambda = {1.0, 0.0, 0.0};
  } else if (t >= 1.0) {
    r.closest = b; r.n = 1; r.idx = {ib, 0, 0}; r.lambda = {1.0, 0.0, 0.0};
  } else {
    r.closest = a + t * ab;
    r.n = 2; r.idx = {ia, ib, 0}; r.lambda = {1.0 - t, t, 0.0};
  }
  return r;
}

SimplexResult closest_on_triangle_origin(const Vec3& a, const Vec3& b, const Vec3& c, int ia,
                                         int ib, int ic) {
  const Vec3 p{0, 0, 0};
  const Vec3 ab = b - a, ac = c - a, ap = p - a;
  const double d1 = dot(ab, ap), d2 = dot(ac, ap);
  SimplexResult r;
  if (d1 <= 0.0 && d2 <= 0.0) {
    r.closest = a; r.n = 1; r.idx = {ia, 0, 0}; r.lambda = {1.0, 0.0, 0.0};
    return r;
  }
  const Vec3 bp = p - b;
  const double d3 = dot(ab, bp), d4 = dot(ac, bp);
  if (d3 >= 0.0 && d4 <= d3) {
    r.closest = b; r.n = 1; r.idx = {ib, 0, 0}; r.lambda = {1.0, 0.0, 0.0};
    return r;
  }
  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) {
    const double v = d1 / (d1 - d3);
    r.closest = a + v * ab;
    r.n = 2; r.idx = {ia, ib, 0}; r.lambda = {1.0 - v, v, 0.0};
    return r;
  }
  const Vec3 cp = p - c;
  const double d5 = dot(ab, cp), d6 = dot(ac, cp);
  if (d6 >= 0.0 && d5 <= d6) {
    r.closest = c; r.n = 1; r.idx = {ic, 0, 0}; r.lambda = {1.0, 0.0, 0.0};
    return r;
  }
  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) {
    const double w = d2 / (d2 - d6);
    r.closest = a + w * ac;
    r.n = 2; r.idx = {ia, ic, 0}; r.lambda = {1.0 - w, w, 0.0};
    return r;
  }
  const double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
    const double w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
    r.closest = b + w * (c - b);
    r.n = 2; r.idx = {ib, ic, 0}; r.lambda = {1.0 - w, w, 0.0};
    return r;
  }
  const double denom = 1.0 / (va + vb + vc);
  const double v = vb * denom, w = vc * denom;
  r.closest = a + v * ab + w * ac;
  r.n = 3; r.idx = {ia, ib, ic}; r.lambda = {1.0 - v - w, v, w};
  return r;
}

}  // namespace

ClosestPair gjk_closest(const ConvexCore& a, const ConvexCore& b) {
  constexpr int kMaxIter = 96;
  constexpr double kEps = 1e-12;

  std::array<SupportPoint, 4> simplex;
  int n = 0;

  auto support = [&](const Vec3& d) {
    SupportPoint s;
    s.a = a.support(d);
    s.b = b.support(-d);
    s.w = s.a - s.b;
    return s;
  };

  SupportPoint s0 = support(Vec3{1, 0, 0});
  simplex[n++] = s0;
  Vec3 v = s0.w;
  std::array<double, 3> lambda = {1.0, 0.0, 0.0};
  int support_n = 1;
  std::array<int, 3> support_idx = {0, 0, 0};

  for (int iter = 0; iter < kMaxIter; ++iter) {
    const double vn2 = norm2(v);
    if (vn2 < kEps) break;  // origin inside the Minkowski difference

    const SupportPoint w = support(-v);
    // No further progress toward the origin: converged.
    if (norm2(v) - dot(v, w.w) <= 1e-10 * std::max(1.0, norm2(v))) break;
    bool duplicate = false;
    for (int i = 0; i < n; ++i) {
      if (norm2(simplex[i].w - w.w) < kEps) duplicate = true;
    }
    if (duplicate) break;
    if (n < 4) simplex[n++] = w;

    // Reduce: closest point on the simplex hull to the origin.
    SimplexResult best;
    bool have = false;
    if (n == 1) {
      best.closest = simplex[0].w;
      best.n = 1; best.idx = {0, 0, 0}; best.lambda = {1.0, 0.0, 0.0};
      have = true;
    } else if (n == 2) {
      best = closest_on_segment_origin(simplex[0].w, simplex[1].w, 0, 1);
      have = true;
    } else if (n == 3) {
      best = closest_on_triangle_origin(simplex[0].w, simplex[1].w, simplex[2].w, 0, 1, 2);
      have = true;
    } else {
      // Tetrahedron: take the best of the four faces; if the origin is
      // inside, the cores intersect.
      static constexpr int faces[4][3] = {{0, 1, 2}, {0, 1, 3}, {0, 2, 3}, {1, 2, 3}};
      double best_d = 0.0;
      for (const auto& f : faces) {
        const SimplexResult r = closest_on_triangle_origin(simplex[f[0]].w, simplex[f[1]].w,
                                                           simplex[f[2]].w, f[0], f[1], f[2]);
        const double d = norm2(r.closest);
        if (!have || d < best_d) {
          best = r;
          best_d = d;
          have = true;
        }
      }
      // Barycentric solve: if the origin lies inside the tetrahedron the
      // cores intersect.
      const Vec3& p0 = simplex[0].w;
      const Vec3 e1 = simplex[1].w - p0, e2 = simplex[2].w - p0, e3 = simplex[3].w - p0;
      const Vec3 rhs = Vec3{0, 0, 0} - p0;
      const double D = dot(e1, cross(e2, e3));
      if (std::fabs(D) > kEps) {
        const double b1 = dot(rhs, cross(e2, e3)) / D;
        const double b2 = dot(e1, cross(rhs, e3)) / D;
        const double b3 = dot(e1, cross(e2, rhs)) / D;
        const double b0 = 1.0 - b1 - b2 - b3;
        if (b0 >= -1e-12 && b1 >= -1e-12 && b2 >= -1e-12 && b3 >= -1e-12) {
          v = Vec3{0, 0, 0};
          support_n = 0;
          break;
        }
      }
    }
    if (have) {
      // Compact the simplex to the supporting subset.
      std::array<SupportPoint, 4> reduced;
      for (int i = 0; i < best.n; ++i) reduced[i] = simplex[best.idx[i]];
      for (int i = 0; i < best.n; ++i) simplex[i] = reduced[i];
      n = best.n;
      v = best.closest;
      lambda = best.lambda;
      support_n = best.n;
      support_idx = {0, 1, 2};
    }
  }

  ClosestPair out;
  out.distance = norm(v);
  if (support_n == 0 || out.distance < 1e-9) {
    // Intersecting cores: report coincident points at the first simplex
    // vertex midpoint; callers treat distance 0 as deep contact.
    out.distance = 0.0;
    out.on_a = simplex[0].a;
    out.on_b = simplex[0].b;
    return out;
  }
  Vec3 pa{0, 0, 0}, pb{0, 0, 0};
  for (int i = 0; i < support_n; ++i) {
    pa += lambda[i] * simplex[support_idx[i]].a;
    pb += lambda[i] * simplex[support_idx[i]].b;
  }
  out.on_a = pa;
  out.on_b = pb;
  return out;
}

ClosestPair closest_segment_segment(const Vec3& p1, const Vec3& q1, const Vec3& p2,
                                    const Vec3& q2) {
  const Vec3 d1 = q1 - p1, d2 = q2 - p2, r = p1 - p2;
  const double a = dot(d1, d1), e = dot(d2, d2), f = dot(d2, r);
  double s = 0.0, t = 0.0;
  constexpr double kEps = 1e-14;
  if (a <= kEps && e <= kEps) {
    // both degenerate
  } else if (a <= kEps) {
    t = std::clamp(f / e, 0.0, 1.0);
  } else {
    const double c = dot(d1, r);
    if (e <= kEps) {
      s = std::clamp(-c / a, 0.0, 1.0);
    } else {
      const double b = dot(d1, d2);
      const double denom = a * e - b * b;
      if (denom > kEps) s = std::clamp((b * f - c * e) / denom, 0.0, 1.0);
      t = (b * s + f) / e;
      if (t < 0.0) {
        t = 0.0;
        s = std::clamp(-c / a, 0.0, 1.0);
      } else if (t > 1.0) {
        t = 1.0;
        s = std::clamp((b - c) / a, 0.0, 1.0);
      }
    }
  }
  ClosestPair out;
  out.on_a = p1 + s * d1;
  out.on_b = p2 + t * d2;
  out.distance = norm(out.on_b - out.on_a);
  return out;
}

Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 ab = b - a, ac = c - a, ap = p - a;
  const double d1 = dot(ab, ap), d2 = dot(ac, ap);
  if (d1 <= 0.0 && d2 <= 0.0) return a;
  const Vec3 bp = p - b;
  const double d3 = dot(ab, bp), d4 = dot(ac, bp);
  if (d3 >= 0.0 && d4 <= d3) return b;
  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) return a + (d1 / (d1 - d3)) * ab;
  const Vec3 cp = p - c;
  const double d5 = dot(ab, cp), d6 = dot(ac, cp);
  if (d6 >= 0.0 && d5 <= d6) return c;
  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) return a + (d2 / (d2 - d6)) * ac;
  const double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
    return b + ((d4 - d3) / ((d4 - d3) + (d5 - d6))) * (c - b);
  }
  const double denom = 1.0 / (va + vb + vc);
  return a + (vb * denom) * ab + (vc * denom) * ac;
}

ClosestPair closest_segment_triangle(const Vec3& p, const Vec3& q, const Vec3& a, const Vec3& b,
                                     const Vec3& c) {
  ClosestPair best;
  best.distance = std::numeric_limits<double>::infinity();
  auto consider = [&best](const Vec3& on_seg, const Vec3& on_tri) {
    const double d = norm(on_tri - on_seg);
    if (d < best.distance) best = {d, on_seg, on_tri};
  };

  // Segment endpoints against the face.
  consider(p, closest_point_on_triangle(p, a, b, c));
  consider(q, closest_point_on_triangle(q, a, b, c));
  // Segment against each edge.
  for (const auto& [e0, e1] : {std::pair{a, b}, std::pair{b, c}, std::pair{c, a}}) {
    const ClosestPair r = closest_segment_segment(p, q, e0, e1);
    consider(r.on_a, r.on_b);
  }
  // Segment piercing the face interior.
  const Vec3 n = cross(b - a, c - a);
  const double dp = dot(p - a, n), dq = dot(q - a, n);
  if (dp * dq < 0.0) {
    const double t = dp / (dp - dq);
    const Vec3 x = p + t * (q - p);
    const Vec3 cp = closest_point_on_triangle(x, a, b, c);
    if (norm(cp - x) < 1e-9) best = {0.0, x, x};
  }
  return best;
}

}  // namespace labo
