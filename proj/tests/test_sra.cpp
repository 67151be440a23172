#include "doctest.h"
#include "wce/harness.hpp"
#include "wce/sra.hpp"

#include <cmath>

using namespace wce;
using harness::Rng;

namespace {

WCEOp instance_i1() {
  MeasureSpace s({0.25, 0.25, 0.25, 0.25});
  return wce_build(Partition(s, {{0, 1}, {2, 3}}), MFunction(s, {1.0, 2.0, 1.0, 1.0}),
                   MFunction(s, {2.0, 0.0, 1.0, 1.0}));
}

WCEOp instance_i2() {
  MeasureSpace s({0.25, 0.25, 0.25, 0.25});
  return wce_build(Partition(s, {{0, 1}, {2, 3}}), MFunction(s, {1.0, -1.0, 1.0, 1.0}),
                   MFunction(s, {1.0, 1.0, 0.0, 0.0}));
}

LinOperator rand_op(const MeasureSpace& s, Rng& rng) {
  CMatrix m(s.size(), s.size());
  for (std::size_t i = 0; i < s.size(); ++i)
    for (std::size_t j = 0; j < s.size(); ++j) m(i, j) = rng.unit_box();
  return {s, std::move(m)};
}

MFunction rand_fun(const MeasureSpace& s, Rng& rng) {
  std::vector<cplx> v(s.size());
  for (auto& e : v) e = rng.unit_box();
  return {s, std::move(v)};
}

}  // namespace

TEST_CASE("rm family scalars on the one-block example") {
  // u = w = 1, trivial partition, uniform measure, m = 1:
  // r = 1, d_1 = 1/2, v_1 = 1/3, q_1 = 4/3
  MeasureSpace s({0.5, 0.5});
  const WCEOp t =
      wce_build(Partition::trivial(s), MFunction::one(s), MFunction::one(s));
  const RmFamily fam = RmFamily::from_wce(t);
  CHECK(fam.r() == doctest::Approx(1.0));
  CHECK(fam.d(1) == doctest::Approx(0.5));
  CHECK(fam.v(1)[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  CHECK(fam.q(1)[0] == doctest::Approx(4.0 / 3.0).epsilon(1e-14));
  CHECK(op_norm(fam.rm(1)) == doctest::Approx(std::sqrt(4.0 / 3.0)).epsilon(1e-9));
  // R_1^{-2} acts as 1/q = 3/4 on constants
  const LinOperator rinv = fam.rm_inverse(1);
  const MFunction img = (rinv * rinv).apply(MFunction::one(s));
  CHECK(std::abs(img[0] - cplx(0.75)) < 1e-12);
  CHECK(std::abs(img[1] - cplx(0.75)) < 1e-12);
}

TEST_CASE("rm norm follows the positive-operator norm identity") {
  const WCEOp t = instance_i1();
  const RmFamily fam = RmFamily::from_wce(t);
  for (long m : {1L, 4L, 64L}) {
    const std::vector<double> v = fam.v(m);
    double sup = 0.0;
    for (std::size_t i = 0; i < 4; ++i) sup = std::max(sup, t.e_u2()[i] * v[i]);
    const double nr = op_norm(fam.rm(m));
    CHECK(nr * nr == doctest::Approx(1.0 + sup).epsilon(1e-8));
  }
}

TEST_CASE("rm_series oracle") {
  MeasureSpace s({0.25, 0.25, 0.25, 0.25});
  const Partition p(s, {{0, 1}, {2, 3}});
  // zero operator: R_m = I for every m
  const WCEOp zt = wce_build(p, MFunction::zero(s), MFunction::zero(s));
  for (long m : {1L, 8L})
    CHECK(max_abs_diff(rm_series(zt, m).matrix(), CMatrix::identity(4)) < 1e-12);
  // nilpotent: the series terminates and R_m^2 = I + d^2 T*T exactly
  const WCEOp t2 = instance_i2();
  for (long m : {1L, 3L, 16L}) {
    const LinOperator r = rm_series(t2, m);
    const double d = RmFamily::from_wce(t2).d(m);
    const LinOperator expected = LinOperator::identity(s) +
                                 cplx(d * d) * (adjoint(t2.matrix()) * t2.matrix());
    CHECK(max_abs_diff((r * r).matrix(), expected.matrix()) < 1e-11);
  }
  // i1 closed vs series
  const WCEOp t1 = instance_i1();
  for (long m : {3L, 5L})
    CHECK(max_abs_diff(rm_closed(t1, m).matrix(), rm_series(t1, m).matrix()) <
          1e-9);
}

TEST_CASE("rm_closed square and nilpotent structure") {
  const WCEOp t2 = instance_i2();
  const RmFamily fam = RmFamily::from_wce(t2);
  for (long m : {1L, 7L}) {
    // |E(uw)| = 0, so v_m = d_m^2 E(|w|^2) and
    // R_m^2 = I + d^2 M_{E(|w|^2) ubar} E M_u
    const double d = fam.d(m);
    std::vector<cplx> coeff(4);
    for (std::size_t i = 0; i < 4; ++i)
      coeff[i] = d * d * t2.e_w2()[i] * std::conj(t2.u()[i]);
    const LinOperator expected =
        LinOperator::identity(t2.space()) +
        wce_matrix(t2.partition(), t2.u(), MFunction(t2.space(), coeff));
    const LinOperator r = fam.rm(m);
    CHECK(max_abs_diff((r * r).matrix(), expected.matrix()) < 1e-12);
  }
}

TEST_CASE("rm_inverse") {
  MeasureSpace s({0.25, 0.25, 0.25, 0.25});
  const Partition p(s, {{0, 1}, {2, 3}});
  const WCEOp zt = wce_build(p, MFunction::zero(s), MFunction::zero(s));
  CHECK(max_abs_diff(rm_inverse(zt, 5).matrix(), CMatrix::identity(4)) < 1e-12);

  const WCEOp t1 = instance_i1();
  const RmFamily fam = RmFamily::from_wce(t1);
  for (long m : {1L, 4L, 256L, 16384L}) {
    const LinOperator r = fam.rm(m);
    const LinOperator ri = fam.rm_inverse(m);
    CHECK(wfrobenius(r * ri - LinOperator::identity(s)) < 1e-9);
    CHECK(op_norm(ri) <= 1.0 + 1e-9);
    CHECK(max_abs_diff(gauss_inverse(r.matrix()), ri.matrix()) < 1e-9);
  }
}

TEST_CASE("block decomposition") {
  MeasureSpace s({0.25, 0.25, 0.25, 0.25});
  const Partition p(s, {{0, 1}, {2, 3}});
  // u = 0: H2 is everything
  {
    const BlockDecomp d =
        block_decompose(wce_build(p, MFunction::zero(s), MFunction::one(s)));
    CHECK(d.h2.dim() == 4);
    CHECK(d.h1.dim() == 0);
  }
  // singleton partition with nowhere-zero u: H2 = {0}
  {
    const BlockDecomp d = block_decompose(
        wce_build(Partition::discrete(s), MFunction(s, {1.0, 2.0, -1.0, cplx(0, 1)}),
                  MFunction::one(s)));
    CHECK(d.h2.dim() == 0);
    CHECK(d.h1.dim() == 4);
  }
  // instance i1: dims 2/2 and the hand-solved kernel basis
  {
    const WCEOp t = instance_i1();
    const BlockDecomp d = block_decompose(t);
    CHECK(d.h1.dim() == 2);
    CHECK(d.h2.dim() == 2);
    const Subspace expected = orthonormalize(
        s, {{2.0, -1.0, 0.0, 0.0}, {0.0, 0.0, 1.0, -1.0}}, 1e-10);
    CHECK(containment_sine(expected, d.h2) < 1e-8);
    CHECK(containment_sine(d.h2, expected) < 1e-8);
    // P1 + P2 = I
    CHECK(max_abs_diff((d.p1 + d.p2).matrix(), CMatrix::identity(4)) < 1e-12);
    // E M_u annihilates every H2 basis vector
    const LinOperator emu = wce_matrix(p, t.u(), MFunction::one(s));
    for (const auto& h : d.h2.basis()) CHECK(norm(emu.apply(h)) < 1e-10);
    // R_m is the identity on H2
    const RmFamily fam = RmFamily::from_wce(t);
    for (long m : {1L, 128L, 16384L})
      for (const auto& h : d.h2.basis())
        CHECK(norm(fam.rm(m).apply(h) - h) < 1e-9);
  }
}

TEST_CASE("q_m monotonicity") {
  for (int trial = 0; trial < 15; ++trial) {
    const WCEOp t = harness::make_wce(
        harness::gen_instance(1200 + trial, harness::Profile::generic));
    const RmFamily fam = RmFamily::from_wce(t);
    std::vector<double> prev;
    for (long m : default_m_grid()) {
      const std::vector<double> q = fam.q(m);
      for (double qi : q) CHECK(qi >= 1.0 - 1e-12);
      if (!prev.empty())
        for (std::size_t i = 0; i < q.size(); ++i)
          CHECK(q[i] >= prev[i] - 1e-12);
      prev = q;
    }
  }
}

TEST_CASE("definitional membership classifier on instance i1") {
  const WCEOp t = instance_i1();
  const RmFamily fam = RmFamily::from_wce(t);
  // S = T: member, stabilizing evidence
  CHECK(bt_member_definitional(fam, t.matrix()).verdict == Verdict::Member);
  // S = I: member with g identically 1
  {
    const MembershipVerdict v =
        bt_member_definitional(fam, LinOperator::identity(t.space()));
    CHECK(v.verdict == Verdict::Member);
    for (const auto& [m, g] : v.evidence)
      CHECK(g == doctest::Approx(1.0).epsilon(1e-9));
  }
  // rank-one from H1 into... H2->H1 violates invariance and grows like sqrt(q)
  {
    const BlockDecomp d = block_decompose(t);
    const LinOperator s = rank_one(d.h1.basis().front(), d.h2.basis().front());
    const MembershipVerdict v = bt_member_definitional(fam, s);
    CHECK(v.verdict == Verdict::NonMember);
    CHECK_FALSE(bt_member_kernel_criterion(t, s));
  }
}

TEST_CASE("kernel criterion members") {
  Rng rng(31);
  for (int trial = 0; trial < 10; ++trial) {
    const WCEOp t = harness::make_wce(
        harness::gen_instance(2200 + trial, harness::Profile::generic));
    const BlockDecomp d = block_decompose(t);
    // measurable multiplications always pass
    const MFunction a = harness::random_measurable(t.partition(), rng, false);
    CHECK(bt_member_kernel_criterion(d, multiplication(a)));
    // M_{a ubar} E M_u commutes with R_m exactly; g(m) = ||S||
    const MFunction anneg = harness::random_measurable(t.partition(), rng, true);
    const LinOperator s =
        wce_matrix(t.partition(), t.u(), pointwise(anneg, conjugate(t.u())));
    CHECK(bt_member_kernel_criterion(d, s));
    const RmFamily fam = RmFamily::from_wce(t);
    const double s_norm = op_norm(s);
    for (long m : {1L, 64L, 16384L}) {
      const LinOperator r = fam.rm(m);
      CHECK(wfrobenius(r * s - s * r) < 1e-9 * std::max(1.0, s_norm));
      CHECK(op_norm(r * s * fam.rm_inverse(m)) ==
            doctest::Approx(s_norm).epsilon(1e-8));
    }
  }
}

TEST_CASE("qt membership") {
  const WCEOp t2 = instance_i2();
  // S = 0 belongs to Q_T
  {
    const QtResult q = qt_member(t2, LinOperator::zero(t2.space()));
    CHECK(q.criterion);
    CHECK(q.decay_observed);
  }
  // identity is excluded whenever H2 is nontrivial
  {
    const QtResult q = qt_member(t2, LinOperator::identity(t2.space()));
    CHECK_FALSE(q.criterion);
    CHECK_FALSE(q.decay_observed);
  }
  // the quasinilpotent operator lies in its own Q_T
  {
    const QtResult q = qt_member(t2, t2.matrix());
    CHECK(q.criterion);
    CHECK(q.x_block_norm < 1e-10);
    CHECK(q.decay_observed);
  }
}

TEST_CASE("rank-one rm closed forms") {
  MeasureSpace s({0.5, 0.25, 0.75});
  Rng rng(47);
  // orthogonal pair with unit y: R_m^2 = I + m^2 y (x) y
  {
    MFunction x = rand_fun(s, rng);
    x = cplx(1.0 / norm(x)) * x;
    MFunction y = rand_fun(s, rng);
    y = y - inner(y, x) * x;
    y = cplx(1.0 / norm(y)) * y;
    for (long m : {1L, 2L, 5L}) {
      const LinOperator r = rank_one_rm(x, y, m);
      const LinOperator expected =
          LinOperator::identity(s) +
          cplx(static_cast<double>(m * m)) * rank_one(y, y);
      CHECK(max_abs_diff((r * r).matrix(), expected.matrix()) < 1e-10 * m * m);
    }
  }
  // x = y unit: lambda_m^2 = 1 + d^2/(1 - d^2)
  {
    MFunction x = rand_fun(s, rng);
    x = cplx(1.0 / norm(x)) * x;
    const RmFamily fam = RmFamily::from_rank_one(x, x);
    for (long m : {1L, 4L}) {
      const double d = fam.d(m);
      CHECK(fam.lambda(m) * fam.lambda(m) ==
            doctest::Approx(1.0 + d * d / (1.0 - d * d)).epsilon(1e-12));
    }
    CHECK(fam.d(1) == doctest::Approx(0.5));
  }
  // series agreement on random pairs
  for (int trial = 0; trial < 10; ++trial) {
    MFunction x = rand_fun(s, rng);
    x = cplx(1.0 / norm(x)) * x;
    const MFunction y = rand_fun(s, rng);
    for (long m : {1L, 4L, 16L})
      CHECK(max_abs_diff(rank_one_rm(x, y, m).matrix(),
                         rm_series(x, y, m).matrix()) < 1e-9);
  }
  // lambda_m grows without bound whenever y is nonzero
  {
    MFunction x = rand_fun(s, rng);
    x = cplx(1.0 / norm(x)) * x;
    const MFunction y = rand_fun(s, rng);
    const RmFamily fam = RmFamily::from_rank_one(x, y);
    double prev = 0.0;
    for (long m : default_m_grid()) {
      const double l = fam.lambda(m);
      CHECK(l > prev);
      prev = l;
    }
    CHECK(prev > 1e2);
  }
}

TEST_CASE("rank-one qt criterion") {
  MeasureSpace s({1.0, 1.0, 1.0});
  const MFunction e1 = MFunction::coordinate(s, 0);
  const MFunction e2 = MFunction::coordinate(s, 1);
  const MFunction e3 = MFunction::coordinate(s, 2);
  // S = e3 (x) e2 = (I-P) S P with P onto span{e2}
  CHECK(rank_one_qt(e1, e2, rank_one(e3, e2)));
  // S = P fails (P S P = P != 0)
  CHECK_FALSE(rank_one_qt(e1, e2, rank_one(e2, e2)));
  CHECK_FALSE(rank_one_qt(e1, e2, rank_one(e2, e2)));
  CHECK_THROWS_AS(rank_one_qt(e1, MFunction::zero(s), rank_one(e3, e2)),
                  UsageError);
}

TEST_CASE("rank-one algebra invariance in the left factor") {
  MeasureSpace s({0.5, 1.5, 1.0, 0.25});
  Rng rng(61);
  auto unit = [&] {
    MFunction f = rand_fun(s, rng);
    return cplx(1.0 / norm(f)) * f;
  };
  const MFunction w = unit();
  const MFunction x = unit();
  MFunction y = rand_fun(s, rng);
  y = y - inner(y, x) * x;
  y = cplx(1.0 / norm(y)) * y;
  // x = y trivially
  CHECK(rank_one_bt_invariance(w, x, x, {rand_op(s, rng)}));
  // orthogonal x, y over a random batch
  std::vector<LinOperator> batch;
  for (int k = 0; k < 20; ++k) batch.push_back(rand_op(s, rng));
  CHECK(rank_one_bt_invariance(w, x, y, batch));
  // a batch containing a criterion violator: both sides reject it
  const LinOperator p = rank_one(w, w);
  const LinOperator viol = p * rand_op(s, rng) * (LinOperator::identity(s) - p);
  batch.push_back(viol);
  CHECK(rank_one_bt_invariance(w, x, y, batch));
  CHECK_FALSE(rank_one_bt_criterion(w, viol));
}

TEST_CASE("rank-one membership in B_T via inner products") {
  const WCEOp t = instance_i1();
  const BlockDecomp d = block_decompose(t);
  const MFunction h2a = d.h2.basis()[0], h2b = d.h2.basis()[1];
  // f, g both in H2: member (both criterion terms collapse)
  {
    const RankOneBtWce r = rank_one_in_bt_wce(t, h2a, h2b);
    CHECK(r.verdict == Verdict::Member);
  }
  // f in H1 with peak-block energy, g in H2: the v-term diverges
  {
    const RankOneBtWce r = rank_one_in_bt_wce(t, d.h1.basis().front(), h2a);
    CHECK(r.verdict == Verdict::NonMember);
  }
  // f = g = 0: member
  {
    const RankOneBtWce r =
        rank_one_in_bt_wce(t, MFunction::zero(t.space()), MFunction::zero(t.space()));
    CHECK(r.verdict == Verdict::Member);
  }
  // the scalar route reproduces the definitional evidence exactly
  {
    Rng rng(71);
    const MFunction f = rand_fun(t.space(), rng), g = rand_fun(t.space(), rng);
    const RankOneBtWce scalar = rank_one_in_bt_wce(t, f, g);
    const MembershipVerdict def =
        bt_member_definitional(RmFamily::from_wce(t), rank_one(f, g));
    REQUIRE(scalar.values.size() == def.evidence.size());
    for (std::size_t k = 0; k < scalar.values.size(); ++k)
      CHECK(scalar.values[k].second ==
            doctest::Approx(def.evidence[k].second).epsilon(1e-6));
  }
}

TEST_CASE("bt_equals_full") {
  MeasureSpace s({0.25, 0.25, 0.25, 0.25});
  // singleton partition, u nowhere zero: the kernel is trivial
  {
    const WCEOp t = wce_build(Partition::discrete(s),
                              MFunction(s, {1.0, -2.0, 3.0, 1.0}), MFunction::one(s));
    CHECK(bt_equals_full(t).structural);
  }
  // u = 0: the kernel is everything and every operator leaves it invariant
  {
    const WCEOp t = wce_build(Partition(s, {{0, 1}, {2, 3}}), MFunction::zero(s),
                              MFunction::one(s));
    CHECK(bt_equals_full(t).structural);
  }
  // instance i1: proper kernel, with a concrete violating operator
  {
    const BtFullResult res = bt_equals_full(instance_i1());
    CHECK_FALSE(res.structural);
    CHECK(res.dim_h2 == 2);
    REQUIRE(res.counterexample.has_value());
    const MembershipVerdict v = bt_member_definitional(
        RmFamily::from_wce(instance_i1()), *res.counterexample);
    CHECK(v.verdict == Verdict::NonMember);
  }
}

TEST_CASE("isometry multiple check") {
  MeasureSpace s({0.5, 1.0, 1.5});
  // discrete partition, u = w with constant |uw|: T = M_{uw} is a multiple of
  // an isometry
  {
    const MFunction u(s, {1.0, cplx(0, 1), -1.0});
    const WCEOp t = wce_build(Partition::discrete(s), u, u);
    const IsometryResult res = isometry_multiple_check(t);
    CHECK(res.is_constant_multiple);
    CHECK(res.c == doctest::Approx(1.0).epsilon(1e-10));
  }
  // T = E on a nontrivial block is not
  {
    const WCEOp t = wce_build(Partition::trivial(s), MFunction::one(s),
                              MFunction::one(s));
    CHECK_FALSE(isometry_multiple_check(t).is_constant_multiple);
  }
  CHECK_FALSE(isometry_multiple_check(instance_i2()).is_constant_multiple);
}

TEST_CASE("homogeneous hard suite, small sample") {
  for (int trial = 0; trial < 8; ++trial) {
    const harness::Instance inst =
        harness::gen_instance(8800 + trial, harness::Profile::homogeneous);
    const WCEOp t = harness::make_wce(inst);
    const BlockDecomp d = block_decompose(t);
    const RmFamily fam = RmFamily::from_wce(t);
    Rng rng(990 + trial);
    for (const auto& s : harness::make_bt_members(t, d, rng)) {
      CHECK(bt_member_kernel_criterion(d, s));
      CHECK(bt_member_definitional(fam, s).verdict == Verdict::Member);
    }
    for (const auto& s : harness::make_bt_nonmembers(t, d, rng)) {
      CHECK_FALSE(bt_member_kernel_criterion(d, s));
      CHECK(bt_member_definitional(fam, s).verdict == Verdict::NonMember);
    }
    for (const auto& s : harness::make_qt_members(d, rng)) {
      const QtResult q = qt_member(t, s);
      CHECK(q.criterion);
      CHECK(q.decay_observed);
    }
    for (const auto& s : harness::make_qt_nonmembers(d, rng)) {
      const QtResult q = qt_member(t, s);
      CHECK_FALSE(q.criterion);
      CHECK_FALSE(q.decay_observed);
    }
  }
}

TEST_CASE("classifier behavior on synthetic evidence") {
  std::vector<std::pair<long, double>> flat, growing, mixed;
  for (long m = 1; m <= 16384; m *= 2) {
    flat.emplace_back(m, 2.0 + 1e-6 * m / 16384.0);
    growing.emplace_back(m, std::sqrt(static_cast<double>(m)));
    mixed.emplace_back(m, 2.0 + 100.0 / m);
  }
  CHECK(classify_evidence(flat, 2.0) == Verdict::Member);
  CHECK(classify_evidence(growing, 1.0) == Verdict::NonMember);
  CHECK(classify_evidence(mixed, 2.0) == Verdict::Member);
  std::vector<std::pair<long, double>> zeros = {{1, 0.0}, {2, 0.0}, {4, 0.0}};
  CHECK(classify_evidence(zeros, 0.0) == Verdict::Member);
}

TEST_CASE("single-atom space end to end") {
  MeasureSpace s({0.7});
  const WCEOp t = wce_build(Partition::trivial(s), MFunction(s, {cplx(1.0, 2.0)}),
                            MFunction(s, {cplx(-0.5, 0.25)}));
  CHECK(wce_norm(t) == doctest::Approx(1.25).epsilon(1e-12));
  CHECK(spectral_radius(t) == doctest::Approx(1.25).epsilon(1e-12));
  CHECK(op_norm(t.matrix()) == doctest::Approx(1.25).epsilon(1e-9));
  const BlockDecomp d = block_decompose(t);
  CHECK(d.h1.dim() == 1);
  CHECK(d.h2.dim() == 0);
  const RmFamily fam = RmFamily::from_wce(t);
  CHECK(wfrobenius(fam.rm(4) * fam.rm_inverse(4) - LinOperator::identity(s)) <
        1e-12);
  CHECK(max_abs_diff(aluthge(t).matrix(),
                     aluthge_from_polar(t.matrix()).matrix()) < 1e-12);
  CHECK(bt_equals_full(t).structural);
}

TEST_CASE("block with u identically zero") {
  MeasureSpace s({0.5, 0.5, 0.5, 0.5});
  const Partition p(s, {{0, 1}, {2, 3}});
  const WCEOp t = wce_build(p, MFunction(s, {0.0, 0.0, 1.0, 2.0}),
                            MFunction::one(s));
  const BlockDecomp d = block_decompose(t);
  CHECK(d.h1.dim() == 1);
  CHECK(d.h2.dim() == 3);
  CHECK(max_abs_diff(rm_closed(t, 8).matrix(), rm_series(t, 8).matrix()) < 1e-9);
}

TEST_CASE("w = 0 gives the identity R_m family") {
  // with w = 0 the operator is zero and every R_m is the identity, so the
  // algebra is everything even though the kernel of EM_u is proper; the
  // structural answer stays negative and the sup evidence records the corner
  MeasureSpace s({0.5, 0.5, 0.5, 0.5});
  const Partition p(s, {{0, 1}, {2, 3}});
  const WCEOp t = wce_build(p, MFunction(s, {1.0, 2.0, 1.0, 1.0}),
                            MFunction::zero(s));
  CHECK(max_abs_diff(rm_closed(t, 16384).matrix(), CMatrix::identity(4)) == 0.0);
  const BtFullResult res = bt_equals_full(t);
  CHECK_FALSE(res.structural);
  CHECK(res.sup_verdict == Verdict::Member);  // the sampled sup stays at zero
}
