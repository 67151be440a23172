#include "doctest.h"
#include "wce/harness.hpp"
#include "wce/wceop.hpp"

#include <cmath>

using namespace wce;
using harness::Rng;

namespace {

// mu uniform 1/4, blocks {0,1},{2,3}, u = (1,2,1,1), w = (2,0,1,1)
WCEOp instance_i1() {
  MeasureSpace s({0.25, 0.25, 0.25, 0.25});
  return wce_build(Partition(s, {{0, 1}, {2, 3}}), MFunction(s, {1.0, 2.0, 1.0, 1.0}),
                   MFunction(s, {2.0, 0.0, 1.0, 1.0}));
}

// nilpotent: u = (1,-1,1,1), w = (1,1,0,0) gives E(uw) = 0
WCEOp instance_i2() {
  MeasureSpace s({0.25, 0.25, 0.25, 0.25});
  return wce_build(Partition(s, {{0, 1}, {2, 3}}), MFunction(s, {1.0, -1.0, 1.0, 1.0}),
                   MFunction(s, {1.0, 1.0, 0.0, 0.0}));
}

}  // namespace

TEST_CASE("wce_build special cases") {
  MeasureSpace s({0.2, 0.5, 0.8, 1.1});
  const Partition p(s, {{0, 2}, {1, 3}});
  // u = w = 1 gives E itself
  CHECK(max_abs_diff(
            wce_build(p, MFunction::one(s), MFunction::one(s)).matrix().matrix(),
            cond_expect(p).matrix()) < 1e-15);
  // discrete partition gives M_{uw}
  Rng rng(19);
  std::vector<cplx> uv(4), wv(4);
  for (auto& v : uv) v = rng.unit_box();
  for (auto& v : wv) v = rng.unit_box();
  const MFunction u(s, uv), w(s, wv);
  CHECK(max_abs_diff(
            wce_build(Partition::discrete(s), u, w).matrix().matrix(),
            multiplication(pointwise(u, w)).matrix()) < 1e-15);
}

TEST_CASE("instance i1 matrix against the blockwise formula") {
  const WCEOp t = instance_i1();
  CMatrix expected(4, 4);
  expected(0, 0) = 1.0;
  expected(0, 1) = 2.0;
  expected(2, 2) = 0.5;
  expected(2, 3) = 0.5;
  expected(3, 2) = 0.5;
  expected(3, 3) = 0.5;
  CHECK(max_abs_diff(t.matrix().matrix(), expected) < 1e-15);
  // derived block scalars
  CHECK(t.block_e_u2()[0] == doctest::Approx(2.5).epsilon(1e-15));
  CHECK(t.block_e_u2()[1] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(t.block_e_w2()[0] == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(t.block_e_w2()[1] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(std::abs(t.block_e_uw()[0] - cplx(1.0)) < 1e-15);
  CHECK(std::abs(t.block_e_uw()[1] - cplx(1.0)) < 1e-15);
}

TEST_CASE("matrix agrees with w E(u f) on coordinate functions") {
  const WCEOp t = instance_i1();
  const MeasureSpace& s = t.space();
  for (std::size_t j = 0; j < 4; ++j) {
    const MFunction ej = MFunction::coordinate(s, j);
    const MFunction via_matrix = t.matrix().apply(ej);
    const MFunction euf = cond_expect(t.partition()).apply(pointwise(t.u(), ej));
    const MFunction direct = pointwise(t.w(), euf);
    CHECK(norm(via_matrix - direct) < 1e-15);
  }
  // and the cached matrix is entrywise the triple product
  const LinOperator triple = multiplication(t.w()) *
                             cond_expect(t.partition()) * multiplication(t.u());
  CHECK(max_abs_diff(t.matrix().matrix(), triple.matrix()) < 1e-14);
}

TEST_CASE("wce_norm") {
  MeasureSpace s({0.25, 0.25, 0.25, 0.25});
  const Partition p(s, {{0, 1}, {2, 3}});
  CHECK(wce_norm(wce_build(p, MFunction::one(s), MFunction::one(s))) ==
        doctest::Approx(1.0).epsilon(1e-15));
  CHECK(wce_norm(instance_i1()) == doctest::Approx(std::sqrt(5.0)).epsilon(1e-15));
  CHECK(wce_norm(wce_build(p, MFunction(s, {1.0, 2.0, 1.0, 1.0}),
                           MFunction::zero(s))) == 0.0);
  // against power iteration
  CHECK(wce_norm(instance_i1()) ==
        doctest::Approx(op_norm(instance_i1().matrix())).epsilon(1e-8));
}

TEST_CASE("wce_power") {
  const WCEOp t1 = instance_i1();
  CHECK(max_abs_diff(wce_power(t1, 1).matrix(), t1.matrix().matrix()) == 0.0);
  CHECK(max_abs_diff(wce_power(t1, 0).matrix(), CMatrix::identity(4)) == 0.0);
  // quasinilpotent: T^2 = 0 when E(uw) = 0
  const WCEOp t2 = instance_i2();
  CHECK(wce_power(t2, 2).matrix().max_abs() < 1e-14);
  CHECK((t2.matrix() * t2.matrix()).matrix().max_abs() < 1e-14);
  // n = 3 against the repeated product
  const LinOperator cubed = t1.matrix() * t1.matrix() * t1.matrix();
  const double bound = 1e-10 * std::pow(wce_norm(t1), 3);
  CHECK(max_abs_diff(wce_power(t1, 3).matrix(), cubed.matrix()) <= bound);
}

TEST_CASE("power formula on random instances") {
  for (int trial = 0; trial < 40; ++trial) {
    const WCEOp t =
        harness::make_wce(harness::gen_instance(3300 + trial, harness::Profile::generic));
    const double nt = wce_norm(t);
    LinOperator prod = t.matrix();
    LinOperator aprod = adjoint(t.matrix());
    for (int n = 2; n <= 8; ++n) {
      prod = prod * t.matrix();
      aprod = aprod * adjoint(t.matrix());
      const double bound = 1e-10 * std::pow(nt, n);
      CHECK(max_abs_diff(wce_power(t, n).matrix(), prod.matrix()) <= bound);
      CHECK(max_abs_diff(wce_adjoint_power(t, n).matrix(), aprod.matrix()) <=
            bound);
    }
    // adjoint formula: (M_w E M_u)* = M_ubar E M_wbar
    CHECK(max_abs_diff(
              adjoint(t.matrix()).matrix(),
              wce_matrix(t.partition(), conjugate(t.w()), conjugate(t.u())).matrix()) <
          1e-12);
  }
}

TEST_CASE("spectral radius and the Gelfand estimate") {
  MeasureSpace s({0.25, 0.25, 0.25, 0.25});
  const Partition p(s, {{0, 1}, {2, 3}});
  CHECK(spectral_radius(wce_build(p, MFunction::one(s), MFunction::one(s))) ==
        doctest::Approx(1.0));
  CHECK(spectral_radius(instance_i2()) == 0.0);
  CHECK(spectral_radius(instance_i1()) == doctest::Approx(1.0));
  for (int trial = 0; trial < 40; ++trial) {
    const WCEOp t =
        harness::make_wce(harness::gen_instance(4400 + trial, harness::Profile::generic));
    const double r = spectral_radius(t);
    if (r <= 1e-6) continue;
    CHECK(std::abs(gelfand_estimate(t, 50) - r) <=
          0.05 * std::max(r, wce_norm(t)));
  }
}

TEST_CASE("polar decomposition") {
  MeasureSpace s({0.5, 1.0, 1.5});
  // positive diagonal: U is the projection onto the support, |T| = T
  CMatrix d(3, 3);
  d(0, 0) = 2.0;
  d(2, 2) = 1.0;
  const LinOperator t(s, d);
  const PolarParts parts = polar(t);
  CHECK(max_abs_diff(parts.abs.matrix(), d) < 1e-10);
  CMatrix proj(3, 3);
  proj(0, 0) = 1.0;
  proj(2, 2) = 1.0;
  CHECK(max_abs_diff(parts.partial_isometry.matrix(), proj) < 1e-10);

  const PolarParts ident = polar(LinOperator::identity(s));
  CHECK(max_abs_diff(ident.abs.matrix(), CMatrix::identity(3)) < 1e-10);
  CHECK(max_abs_diff(ident.partial_isometry.matrix(), CMatrix::identity(3)) < 1e-10);

  // random reconstruction and the kernel condition
  Rng rng(55);
  for (int trial = 0; trial < 10; ++trial) {
    const harness::Instance inst =
        harness::gen_instance(5500 + trial, harness::Profile::generic);
    CMatrix m(inst.space.size(), inst.space.size());
    for (std::size_t i = 0; i < m.rows(); ++i)
      for (std::size_t j = 0; j < m.cols(); ++j) m(i, j) = rng.unit_box();
    const LinOperator a(inst.space, m);
    const PolarParts pp = polar(a);
    CHECK(max_abs_diff((pp.partial_isometry * pp.abs).matrix(), a.matrix()) <
          1e-9 * std::max(1.0, a.matrix().max_abs()));
  }
  // kernel(U) = kernel(|T|) with principal angles below 1e-7
  const WCEOp t1 = instance_i1();
  const PolarParts pw = polar(t1.matrix());
  const Subspace ku = kernel(pw.partial_isometry);
  const Subspace ka = kernel(pw.abs);
  CHECK(ku.dim() == ka.dim());
  CHECK(containment_sine(ku, ka) < 1e-7);
  CHECK(containment_sine(ka, ku) < 1e-7);
}

TEST_CASE("aluthge transform") {
  MeasureSpace s({0.25, 0.25, 0.25, 0.25});
  const Partition p(s, {{0, 1}, {2, 3}});
  // u = w = 1: T = E is positive, the transform is E again
  const WCEOp e = wce_build(p, MFunction::one(s), MFunction::one(s));
  CHECK(max_abs_diff(aluthge(e).matrix(), cond_expect(p).matrix()) < 1e-12);
  // quasinilpotent instance keeps radius zero
  const WCEOp t2 = instance_i2();
  const WCEOp t2t = aluthge_wce(t2);
  CHECK(spectral_radius(t2t) == 0.0);
  for (std::size_t i = 0; i < 4; ++i)
    CHECK(std::abs(t2t.e_uw()[i] - t2.e_uw()[i]) < 1e-15);
  // closed form against the polar oracle
  const WCEOp t1 = instance_i1();
  CHECK(max_abs_diff(aluthge(t1).matrix(),
                     aluthge_from_polar(t1.matrix()).matrix()) < 1e-8);
  // radius preserved in closed form on random instances
  for (int trial = 0; trial < 20; ++trial) {
    const WCEOp t =
        harness::make_wce(harness::gen_instance(6600 + trial, harness::Profile::generic));
    const WCEOp tt = aluthge_wce(t);
    CHECK(std::abs(spectral_radius(t) - spectral_radius(tt)) <=
          1e-12 * (1.0 + spectral_radius(t)));
  }
}

TEST_CASE("nilpotent profile forces T^2 = 0") {
  for (int trial = 0; trial < 20; ++trial) {
    const WCEOp t = harness::make_wce(
        harness::gen_instance(7700 + trial, harness::Profile::nilpotent));
    CHECK((t.matrix() * t.matrix()).matrix().max_abs() < 1e-14);
  }
}
