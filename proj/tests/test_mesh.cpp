#include <cmath>
#include <random>

#include "doctest.h"
#include "insfem/element.hpp"
#include "insfem/mesh.hpp"

using namespace insfem;

namespace {

// Exact integral of x^a y^b over the reference domains.
double exact_monomial(ElemFamily fam, int a, int b) {
  auto seg = [](int p) { return p % 2 ? 0.0 : 2.0 / (p + 1); };  // [-1,1]
  switch (fam) {
    case ElemFamily::EDGE:
      return seg(a);
    case ElemFamily::QUAD:
      return seg(a) * seg(b);
    case ElemFamily::TRI: {
      // a! b! / (a+b+2)!
      double v = 1.0;
      for (int i = 1; i <= a; ++i) v *= i;
      for (int i = 1; i <= b; ++i) v *= i;
      for (int i = 1; i <= a + b + 2; ++i) v /= i;
      return v;
    }
  }
  return 0;
}

double shoelace(const std::vector<Vec2>& poly) {
  double s = 0;
  for (size_t i = 0; i < poly.size(); ++i) {
    const Vec2& p = poly[i];
    const Vec2& q = poly[(i + 1) % poly.size()];
    s += p.x * q.y - q.x * p.y;
  }
  return 0.5 * s;
}

}  // namespace

TEST_CASE("interval mesh basics") {
  const Mesh m1 = build_interval_mesh(1, 0, 1, 1);
  CHECK(m1.n_nodes() == 2);
  CHECK(m1.n_elements() == 1);
  CHECK(m1.elem_type == ElemType::EDGE2);
  CHECK(m1.nodes[0].x == 0.0);
  CHECK(m1.nodes[1].x == 1.0);

  const Mesh m2 = build_interval_mesh(2, 0, 1, 2);
  CHECK(m2.n_nodes() == 5);
  std::vector<double> xs;
  for (const auto& p : m2.nodes) xs.push_back(p.x);
  std::sort(xs.begin(), xs.end());
  for (int i = 0; i < 5; ++i) CHECK(xs[i] == doctest::Approx(0.25 * i));

  const Mesh m4 = build_interval_mesh(4, 0, 1, 1);
  REQUIRE(m4.side_set("right").size() == 1);
  CHECK(m4.side_set("right")[0].elem == 3);
  CHECK(m4.side_set("right")[0].side == 1);

  CHECK_THROWS_AS(build_interval_mesh(0, 0, 1, 1), InvalidArgument);
  CHECK_THROWS_AS(build_interval_mesh(1, 1, 0, 1), InvalidArgument);
}

TEST_CASE("structured quad mesh counts and side sets") {
  const Mesh m = build_structured_quad_mesh(1, 1, Rect{0, 1, 0, 1}, 1);
  CHECK(m.n_nodes() == 4);
  CHECK(m.n_elements() == 1);

  const Mesh m2 = build_structured_quad_mesh(2, 2, Rect{0, 1, 0, 1}, 2);
  CHECK(m2.n_nodes() == 25);
  CHECK(m2.n_elements() == 4);

  const Mesh big = build_structured_quad_mesh(128, 128, Rect{0, 1, 0, 1}, 1);
  CHECK(big.n_elements() == 128 * 128);
  CHECK(big.element_diameter(0) == doctest::Approx(std::sqrt(2.0) / 128));

  for (const char* name : {"left", "right", "bottom", "top"})
    CHECK(m2.side_set(name).size() == 2);

  CHECK_THROWS_AS(build_structured_quad_mesh(2, 2, Rect{0, 0, 0, 1}, 1), InvalidArgument);
}

TEST_CASE("structured tri mesh") {
  const Mesh m = build_structured_tri_mesh(1, 1, Rect{0, 1, 0, 1}, 1);
  CHECK(m.n_elements() == 2);
  CHECK(m.n_nodes() == 4);

  const Mesh m6 = build_structured_tri_mesh(1, 1, Rect{0, 1, 0, 1}, 2);
  CHECK(m6.n_elements() == 2);
  CHECK(m6.n_nodes() == 9);

  // Elements partition the domain.
  const Mesh m3 = build_structured_tri_mesh(3, 2, Rect{0, 1, 0, 1}, 1);
  const QuadratureRule rule = quadrature_for(ElemFamily::TRI, 2);
  double area = 0;
  for (int e = 0; e < m3.n_elements(); ++e) {
    const MappedElement me = map_element(m3, e, rule);
    for (double w : me.jxw) area += w;
  }
  CHECK(area == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("shape functions: partition of unity and nodal property") {
  std::mt19937 rng(42);
  for (ElemFamily fam : {ElemFamily::EDGE, ElemFamily::TRI, ElemFamily::QUAD}) {
    for (int order : {1, 2}) {
      const RefElement ref = ref_element(fam, order);
      // nodal delta property
      for (int i = 0; i < ref.n_nodes; ++i) {
        const ShapeEval se = shape_eval(ref, ref.ref_nodes[i]);
        for (int j = 0; j < ref.n_nodes; ++j)
          CHECK(se.values[j] == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-14));
      }
      // partition of unity at random interior points
      std::uniform_real_distribution<double> u(0.0, 1.0);
      for (int k = 0; k < 20; ++k) {
        Vec2 pt;
        if (fam == ElemFamily::TRI) {
          pt = {u(rng), u(rng)};
          if (pt.x + pt.y > 1) pt = {1 - pt.x, 1 - pt.y};
        } else {
          pt = {2 * u(rng) - 1, fam == ElemFamily::EDGE ? 0.0 : 2 * u(rng) - 1};
        }
        const ShapeEval se = shape_eval(ref, pt);
        double sv = 0;
        Vec2 sg{0, 0};
        for (int j = 0; j < ref.n_nodes; ++j) {
          sv += se.values[j];
          sg += se.grads[j];
        }
        CHECK(sv == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(std::abs(sg.x) < 1e-13);
        CHECK(std::abs(sg.y) < 1e-13);
      }
    }
  }
}

TEST_CASE("quad4 center values") {
  const RefElement ref = ref_element(ElemFamily::QUAD, 1);
  const ShapeEval se = shape_eval(ref, {0, 0});
  for (double v : se.values) CHECK(v == doctest::Approx(0.25));
}

TEST_CASE("tri6 vertex nodal vector") {
  const RefElement ref = ref_element(ElemFamily::TRI, 2);
  const ShapeEval se = shape_eval(ref, ref.ref_nodes[0]);
  CHECK(se.values[0] == doctest::Approx(1.0));
  for (int j = 1; j < 6; ++j) CHECK(se.values[j] == doctest::Approx(0.0));
}

TEST_CASE("quadrature exactness through degree 7") {
  for (ElemFamily fam : {ElemFamily::EDGE, ElemFamily::TRI, ElemFamily::QUAD}) {
    for (int deg = 0; deg <= 7; ++deg) {
      const QuadratureRule rule = quadrature_for(fam, deg);
      for (int a = 0; a <= deg; ++a) {
        for (int b = 0; a + b <= deg; ++b) {
          if (fam == ElemFamily::EDGE && b > 0) continue;
          double s = 0;
          for (int q = 0; q < rule.n(); ++q)
            s += rule.weights[q] * std::pow(rule.points[q].x, a) * std::pow(rule.points[q].y, b);
          CHECK(s == doctest::Approx(exact_monomial(fam, a, b)).epsilon(1e-13));
        }
      }
    }
  }
  CHECK_THROWS_AS(quadrature_for(ElemFamily::TRI, 8), InvalidArgument);
}

TEST_CASE("gauss rule values") {
  const QuadratureRule g2 = quadrature_for(ElemFamily::EDGE, 3);
  REQUIRE(g2.n() == 2);
  CHECK(g2.points[0].x == doctest::Approx(-1.0 / std::sqrt(3.0)));
  CHECK(g2.points[1].x == doctest::Approx(1.0 / std::sqrt(3.0)));
  CHECK(g2.weights[0] == doctest::Approx(1.0));

  const QuadratureRule q3 = quadrature_for(ElemFamily::QUAD, 3);
  CHECK(q3.n() == 4);
  double ws = 0;
  for (double w : q3.weights) ws += w;
  CHECK(ws == doctest::Approx(4.0));

  const QuadratureRule t1 = quadrature_for(ElemFamily::TRI, 1);
  REQUIRE(t1.n() == 1);
  CHECK(t1.points[0].x == doctest::Approx(1.0 / 3.0));
  CHECK(t1.weights[0] == doctest::Approx(0.5));
}

TEST_CASE("map_element: affine jacobians and areas") {
  // axis-aligned hx x hy quad: |J| = hx*hy/4
  Mesh m = build_structured_quad_mesh(1, 1, Rect{0, 0.5, 0, 0.25}, 1);
  const QuadratureRule rule = quadrature_for(ElemFamily::QUAD, 3);
  const MappedElement me = map_element(m, 0, rule);
  for (int q = 0; q < rule.n(); ++q)
    CHECK(me.jxw[q] / rule.weights[q] == doctest::Approx(0.5 * 0.25 / 4.0));

  // unit right triangle: constant |J| = 1
  Mesh tm = build_structured_tri_mesh(1, 1, Rect{0, 1, 0, 1}, 1);
  const QuadratureRule tr = quadrature_for(ElemFamily::TRI, 2);
  const MappedElement tme = map_element(tm, 0, tr);
  for (int q = 0; q < tr.n(); ++q) CHECK(tme.jxw[q] / tr.weights[q] == doctest::Approx(1.0));
}

TEST_CASE("map_element area matches shoelace on randomly perturbed quads") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(-0.15, 0.15);
  for (int trial = 0; trial < 20; ++trial) {
    Mesh m = build_structured_quad_mesh(1, 1, Rect{0, 1, 0, 1}, 1);
    for (auto& p : m.nodes) p = {p.x + u(rng), p.y + u(rng)};
    const QuadratureRule rule = quadrature_for(ElemFamily::QUAD, 5);
    const MappedElement me = map_element(m, 0, rule);
    double area = 0;
    for (double w : me.jxw) area += w;
    std::vector<Vec2> poly;
    for (int n : m.elements[0]) poly.push_back(m.nodes[n]);
    CHECK(area == doctest::Approx(shoelace(poly)).epsilon(1e-13));
  }
}

TEST_CASE("refinement quarters element areas") {
  const QuadratureRule rule = quadrature_for(ElemFamily::QUAD, 3);
  const Mesh coarse = build_structured_quad_mesh(2, 2, Rect{0, 1, 0, 2}, 1);
  const Mesh fine = build_structured_quad_mesh(4, 4, Rect{0, 1, 0, 2}, 1);
  auto area0 = [&](const Mesh& m) {
    const MappedElement me = map_element(m, 0, rule);
    double a = 0;
    for (double w : me.jxw) a += w;
    return a;
  };
  CHECK(area0(coarse) == doctest::Approx(4.0 * area0(fine)).epsilon(1e-14));
}

TEST_CASE("inverted element detected") {
  Mesh m = build_structured_quad_mesh(1, 1, Rect{0, 1, 0, 1}, 1);
  std::swap(m.nodes[1], m.nodes[3]);  // flips orientation
  const QuadratureRule rule = quadrature_for(ElemFamily::QUAD, 3);
  CHECK_THROWS_AS(map_element(m, 0, rule), InvertedElement);
}

TEST_CASE("second derivatives of mapped Q2 basis reproduce x^2") {
  Mesh m = build_structured_quad_mesh(2, 2, Rect{0, 1, 0, 1}, 2);
  const QuadratureRule rule = quadrature_for(ElemFamily::QUAD, 5);
  for (int e = 0; e < m.n_elements(); ++e) {
    const MappedElement me = map_element(m, e, rule);
    const auto& conn = m.elements[e];
    for (int q = 0; q < rule.n(); ++q) {
      double sxx = 0, val = 0;
      Vec2 grad{0, 0};
      for (size_t i = 0; i < conn.size(); ++i) {
        const double c = m.nodes[conn[i]].x * m.nodes[conn[i]].x;  // nodal x^2
        val += c * me.basis.phi(q, static_cast<int>(i));
        grad += c * me.basis.dphi(q, static_cast<int>(i));
        sxx += c * me.basis.d2phi(q, static_cast<int>(i)).xx;
      }
      CHECK(val == doctest::Approx(me.points[q].x * me.points[q].x).epsilon(1e-12));
      CHECK(grad.x == doctest::Approx(2 * me.points[q].x).epsilon(1e-12));
      CHECK(sxx == doctest::Approx(2.0).epsilon(1e-11));
    }
  }
}

TEST_CASE("map_side: unit square normals and measures") {
  Mesh m = build_structured_quad_mesh(1, 1, Rect{0, 1, 0, 1}, 1);
  const QuadratureRule r1 = quadrature_for(ElemFamily::EDGE, 3);
  const MappedSide bottom = map_side(m, 0, 0, r1);
  for (const Vec2& n : bottom.normals) {
    CHECK(n.x == doctest::Approx(0.0));
    CHECK(n.y == doctest::Approx(-1.0));
  }
  double len = 0;
  for (double w : bottom.jxw) len += w;
  CHECK(len == doctest::Approx(1.0));

  const MappedSide right = map_side(m, 0, 1, r1);
  for (const Vec2& n : right.normals) {
    CHECK(n.x == doctest::Approx(1.0));
    CHECK(n.y == doctest::Approx(0.0));
  }
}

TEST_CASE("unsupported element order") {
  CHECK_THROWS_AS(ref_element(ElemFamily::QUAD, 3), UnsupportedElement);
}
