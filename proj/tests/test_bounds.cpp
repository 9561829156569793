#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "sfobench/bounds.hpp"
#include "sfobench/golden_section.hpp"
#include "sfobench/rng.hpp"

using namespace sfo;
using namespace sfo::bounds;

namespace {

BoundConstants lower_only(double a, double b, double c_plus_d, double eps) {
  BoundConstants k;
  k.a = a;
  k.b = b;
  k.c = c_plus_d;
  k.d = 0.0;
  k.eps = eps;
  k.delta = 1.0;
  return k;
}

BoundConstants upper_only(double e, double f, double g, double eps,
                          double delta) {
  BoundConstants k;
  k.e = e;
  k.f = f;
  k.g = g;
  k.eps = eps;
  k.delta = delta;
  return k;
}

}  // namespace

TEST_CASE("lower constants match an independent long-double re-derivation") {
  LowerBoundInputs in;
  in.alpha = 0.001;
  in.beta = 0.9;
  in.gamma = 0.9;
  in.dimension = 10;
  in.dist = 4.0;
  in.h_cap = 1.0;
  in.sigma2 = 4.0;
  in.p2 = 1.0;
  in.h0_star = 1e-8;
  const LowerConstants k = lower_constants(in);

  // independent evaluation, different factoring and wider arithmetic
  const long double bt = 1.0L - 0.9L;
  const long double gt = 1.0L - 0.9L;
  const long double a_ref = 0.5L * 10.0L * 4.0L * 1.0L / (0.001L * bt);
  const long double b_ref = 0.5L * 4.0L * 0.001L / (bt * gt * gt * 1e-8L);
  const long double c_ref = 0.5L * 1.0L * 0.001L / (bt * gt * gt * 1e-8L);
  const long double d_ref = sqrtl(10.0L * 4.0L * 5.0L) * 0.9L / bt;
  CHECK(k.a == doctest::Approx(double(a_ref)).epsilon(1e-14));
  CHECK(k.b == doctest::Approx(double(b_ref)).epsilon(1e-14));
  CHECK(k.c == doctest::Approx(double(c_ref)).epsilon(1e-14));
  CHECK(k.d == doctest::Approx(double(d_ref)).epsilon(1e-14));
}

TEST_CASE("beta = 0 annihilates D; a noiseless bounded-free problem zeroes BCD") {
  LowerBoundInputs in;
  in.alpha = 0.01;
  in.beta = 0.0;
  in.gamma = 0.5;
  in.dimension = 3;
  in.dist = 2.0;
  in.h_cap = 1.5;
  in.sigma2 = 1.0;
  in.p2 = 2.0;
  in.h0_star = 0.1;
  CHECK(lower_constants(in).d == 0.0);

  in.sigma2 = 0.0;
  in.p2 = 0.0;
  in.beta = 0.7;
  const LowerConstants k = lower_constants(in);
  CHECK(k.b == 0.0);
  CHECK(k.c == 0.0);
  CHECK(k.d == 0.0);
}

TEST_CASE("h0_star = 0 is a division fault") {
  LowerBoundInputs in;
  in.alpha = 0.01;
  in.h0_star = 0.0;
  CHECK_THROWS_AS((void)lower_constants(in), InvalidConstantsError);
}

TEST_CASE("upper constants special cases") {
  UpperBoundInputs in;
  in.alpha = 0.01;
  in.beta = 0.0;
  in.gamma = 0.5;
  in.x_star = 3.0;
  in.sigma2 = 2.0;
  in.p2 = 1.0;
  in.c1 = 0.5;
  in.c2 = 0.7;
  SUBCASE("beta = 0") {
    const UpperConstants k = upper_constants(in);
    CHECK(k.f == doctest::Approx(2.0 * 0.5 * 0.01 * 0.5 / 2.0).epsilon(1e-14));
    CHECK(k.g == 0.0);
    CHECK_FALSE(k.vacuous);
  }
  SUBCASE("c2 = 0") {
    in.beta = 0.4;
    in.c2 = 0.0;
    const UpperConstants k = upper_constants(in);
    CHECK(k.g == 0.0);
    CHECK(k.f ==
          doctest::Approx(2.0 * 0.5 * 0.01 * 0.5 / (2.0 * 0.6)).epsilon(1e-14));
  }
  SUBCASE("boundary c1 alpha (1-gamma) = 2 c2 beta is vacuous") {
    in.beta = 0.5;
    in.c2 = in.c1 * in.alpha * (1.0 - in.gamma) / (2.0 * in.beta);
    const UpperConstants k = upper_constants(in);
    CHECK(k.f == doctest::Approx(0.0));
    CHECK(k.vacuous);
  }
}

TEST_CASE("lower curve evaluation") {
  const BoundConstants k = lower_only(1.0, 1.0, 0.0, 1.0);
  CHECK(lower_steps(2.0, k) == doctest::Approx(2.0).epsilon(1e-15));
  // asymptote approached from above
  CHECK(lower_steps(1e9, k) == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(lower_steps(1e9, k) > k.lower_asymptote());
  CHECK_THROWS_AS((void)lower_steps(1.0, k), DomainError);
  CHECK_THROWS_AS((void)lower_steps(0.5, k), DomainError);
  try {
    (void)lower_steps(0.5, k);
  } catch (const DomainError& e) {
    CHECK(e.threshold == doctest::Approx(1.0));
  }
}

TEST_CASE("lower curve agrees with a long-double oracle to 1e-12 relative") {
  const BoundConstants k = lower_only(3.5, 0.8, 0.25, 1.0);
  const double value = lower_steps(4.0, k);
  const long double oracle =
      3.5L * 4.0L / ((1.0L - 0.25L) * 4.0L - 0.8L);
  CHECK(std::abs(value - double(oracle)) <= 1e-12 * double(oracle));
}

TEST_CASE("upper curve evaluation") {
  const BoundConstants k = upper_only(1.0, 1.0, 0.0, 1.0, 1.0);
  REQUIRE(upper_steps(2.0, k).has_value());
  CHECK(*upper_steps(2.0, k) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK_THROWS_AS((void)upper_steps(0.5, k), DomainError);

  const BoundConstants huge_g = upper_only(1.0, 1.0, 1e9, 1.0, 1.0);
  CHECK(*upper_steps(3.0, huge_g) < 1e-6);

  const BoundConstants precise = upper_only(2.0, 0.5, 0.1, 1.0, 0.5);
  const long double oracle = 2.0L * 3.0L / ((0.5L + 0.1L) * 3.0L - 0.5L);
  CHECK(std::abs(*upper_steps(3.0, precise) - double(oracle)) <=
        1e-12 * double(oracle));
}

TEST_CASE("vacuous upper curve is a structured result, not an exception") {
  BoundConstants k = upper_only(1.0, -0.5, 0.0, 1.0, 1.0);
  CHECK(k.upper_vacuous());
  CHECK_FALSE(upper_steps(10.0, k).has_value());
  const CriticalBatch cb = critical_batch_upper(k);
  CHECK_FALSE(cb.informative);
}

TEST_CASE("critical batch of the lower curve, closed form") {
  SUBCASE("direct substitution") {
    const CriticalBatch cb = critical_batch_lower(lower_only(1, 1, 0, 1));
    CHECK(cb.batch == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(cb.min_sfo == doctest::Approx(4.0).epsilon(1e-15));
  }
  SUBCASE("frozen derived values and golden-section confirmation") {
    const BoundConstants k = lower_only(3.5, 0.8, 0.25, 1.0);
    const CriticalBatch cb = critical_batch_lower(k);
    CHECK(cb.batch == doctest::Approx(2.0 * 0.8 / 0.75).epsilon(1e-14));
    CHECK(cb.min_sfo ==
          doctest::Approx(4.0 * 3.5 * 0.8 / (0.75 * 0.75)).epsilon(1e-14));
    CHECK(cb.batch == doctest::Approx(2.1333333333333333).epsilon(1e-14));
    CHECK(cb.min_sfo == doctest::Approx(19.911111111111111).epsilon(1e-14));
    const GoldenResult gr = golden_section_minimize(
        [&](double b) { return lower_steps(b, k) * b; }, 1.07, 1e3);
    CHECK(std::abs(gr.x - cb.batch) <= 1e-6 * cb.batch);
    CHECK(std::abs(gr.fx - cb.min_sfo) <= 1e-6 * cb.min_sfo);
  }
  SUBCASE("doubling A doubles the minimum and keeps the argmin") {
    const CriticalBatch one = critical_batch_lower(lower_only(3.5, 0.8, 0.25, 1));
    const CriticalBatch two = critical_batch_lower(lower_only(7.0, 0.8, 0.25, 1));
    CHECK(two.batch == one.batch);
    CHECK(two.min_sfo == doctest::Approx(2.0 * one.min_sfo).epsilon(1e-15));
  }
  SUBCASE("B = 0 is degenerate, no interior minimizer") {
    const CriticalBatch cb = critical_batch_lower(lower_only(1.0, 0.0, 0.0, 1));
    CHECK(cb.degenerate);
  }
}

TEST_CASE("critical batch of the upper curve, closed form") {
  SUBCASE("direct substitution") {
    const CriticalBatch cb = critical_batch_upper(upper_only(1, 1, 0, 1, 1));
    CHECK(cb.batch == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(cb.min_sfo == doctest::Approx(4.0).epsilon(1e-15));
  }
  SUBCASE("frozen derived values and golden-section confirmation") {
    const BoundConstants k = upper_only(2.0, 0.5, 0.1, 1.0, 0.5);
    const CriticalBatch cb = critical_batch_upper(k);
    CHECK(cb.batch == doctest::Approx(1.0 / 0.6).epsilon(1e-14));
    CHECK(cb.min_sfo == doctest::Approx(4.0 / 0.36).epsilon(1e-14));
    const GoldenResult gr = golden_section_minimize(
        [&](double b) { return *upper_steps(b, k) * b; },
        k.upper_domain_threshold() * 1.001, 1e3);
    CHECK(std::abs(gr.x - cb.batch) <= 1e-6 * cb.batch);
    CHECK(std::abs(gr.fx - cb.min_sfo) <= 1e-6 * cb.min_sfo);
  }
  SUBCASE("F -> 0+ sends both the argmin and the minimum to zero") {
    const CriticalBatch cb =
        critical_batch_upper(upper_only(1.0, 1e-12, 0.1, 1.0, 0.5));
    CHECK(cb.batch == doctest::Approx(2e-12 / 0.6).epsilon(1e-12));
    CHECK(cb.min_sfo == doctest::Approx(4e-12 / 0.36).epsilon(1e-12));
  }
}

TEST_CASE("fit-condition residuals vanish when the curves coincide") {
  SUBCASE("constructed to share the argmin and the minimum") {
    BoundConstants k;
    k.a = 2.0;
    k.b = 3.0;
    k.c = 0.1;
    k.d = 0.05;
    k.eps = 1.0;
    k.delta = 0.2;
    k.g = 0.3;
    const double x = k.lower_margin();   // 0.85
    const double y = k.upper_gain();     // 0.5
    k.f = k.b * y / x;                   // equal argmins
    k.e = k.a * k.b * y * y / (x * x * k.f);  // equal minima
    const FitResiduals r = fit_condition_residuals(k);
    CHECK(std::abs(r.r1) <= 1e-12 * (k.f + k.b));
    CHECK(std::abs(r.r2) <= 1e-12 * (k.e + k.a));
    const CriticalBatch lo = critical_batch_lower(k);
    const CriticalBatch up = critical_batch_upper(k);
    CHECK(lo.batch == doctest::Approx(up.batch).epsilon(1e-12));
    CHECK(lo.min_sfo == doctest::Approx(up.min_sfo).epsilon(1e-12));
  }
  SUBCASE("degenerate symmetric case") {
    BoundConstants k;
    k.a = k.e = 1.7;
    k.b = k.f = 0.4;
    k.c = k.d = k.g = 0.0;
    k.eps = 0.8;
    k.delta = 1.0;
    const FitResiduals r = fit_condition_residuals(k);
    CHECK(r.r1 == 0.0);
    CHECK(r.r2 == 0.0);
  }
}

TEST_CASE("fit residuals shrink with the learning rate") {
  auto residuals_at = [](double alpha) {
    LowerBoundInputs lin;
    lin.alpha = alpha;
    lin.beta = 0.9;
    lin.gamma = 0.9;
    lin.dimension = 10;
    lin.dist = 4.0;
    lin.h_cap = 1.0;
    lin.sigma2 = 4.0;
    lin.p2 = 1.0;
    lin.h0_star = 0.01;
    UpperBoundInputs uin;
    uin.alpha = alpha;
    uin.beta = 0.9;
    uin.gamma = 0.9;
    uin.x_star = 2.0;
    uin.sigma2 = 4.0;
    uin.p2 = 1.0;
    uin.c1 = 0.8;
    uin.c2 = 0.0;
    return fit_condition_residuals(make_constants(
        lower_constants(lin), upper_constants(uin), 0.1, 0.01));
  };
  const FitResiduals coarse = residuals_at(1e-3);
  const FitResiduals fine = residuals_at(1e-4);
  CHECK(std::abs(fine.r1) < std::abs(coarse.r1));
  CHECK(std::abs(fine.r2) < std::abs(coarse.r2));
}

TEST_CASE("curve table composes the closed forms; empty grid, empty table") {
  BoundConstants k = lower_only(1.0, 1.0, 0.0, 1.0);
  k.e = 1.0;
  k.f = 1.0;
  k.g = 0.0;
  CHECK(curve_table(k, {}).empty());
  const auto table = curve_table(k, {0.5, 2.0, 1e9});
  REQUIRE(table.size() == 3);
  CHECK_FALSE(table[0].k_lower.has_value());  // out of domain: absent cell
  CHECK(*table[1].k_lower == doctest::Approx(2.0));
  CHECK(*table[1].k_upper == doctest::Approx(2.0));
  CHECK(*table[1].sfo_lower == doctest::Approx(4.0));
  CHECK(*table[2].k_lower == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("asymptote: gap positive everywhere, vanishing as b grows") {
  const BoundConstants k = lower_only(2.5, 1.3, 0.2, 1.1);
  const double thr = k.lower_domain_threshold();
  const double star = k.lower_asymptote();
  for (double f : {1.01, 2.0, 10.0, 1e4}) {
    CHECK(lower_steps(thr * f, k) > star);
  }
  const double far = lower_steps(1e8 * thr, k);
  CHECK(far - star > 0.0);
  CHECK(far - star <= 2e-8 * star);
}

TEST_CASE("randomized constants: monotone, convex, golden-section agreement") {
  RandomStream rs(20260808);
  int lower_checked = 0, upper_checked = 0;
  for (int trial = 0; trial < 100; ++trial) {
    BoundConstants k;
    k.a = 0.1 + 9.9 * rs.next_unit();
    k.b = 0.01 + 4.99 * rs.next_unit();
    k.eps = 0.3 + 1.2 * rs.next_unit();
    const double u = 0.9 * rs.next_unit();
    k.c = 0.5 * u * k.eps * k.eps;
    k.d = k.c;
    k.e = 0.1 + 9.9 * rs.next_unit();
    k.f = 0.01 + 4.99 * rs.next_unit();
    k.g = rs.next_unit();
    k.delta = 0.05 + 0.95 * rs.next_unit();

    // ---- lower side ----
    {
      const double thr = k.lower_domain_threshold();
      const CriticalBatch cb = critical_batch_lower(k);
      const GoldenResult gr = golden_section_minimize(
          [&](double b) { return lower_steps(b, k) * b; }, thr * 1.0001,
          thr * 1e4);
      CHECK(std::abs(gr.x - cb.batch) <= 1e-6 * cb.batch);
      CHECK(std::abs(gr.fx - cb.min_sfo) <= 1e-6 * cb.min_sfo);

      // 64-point uniform grid: monotone decrease and convexity
      std::vector<double> grid, kv, sfo;
      const double lo = thr * 1.05, hi = thr * 50.0;
      for (int i = 0; i < 64; ++i) {
        const double b = lo + (hi - lo) * i / 63.0;
        grid.push_back(b);
        kv.push_back(lower_steps(b, k));
        sfo.push_back(kv.back() * b);
      }
      for (int i = 0; i + 1 < 64; ++i) CHECK(kv[i + 1] < kv[i]);
      CHECK(worst_scaled_second_difference(grid, kv) >= -1e-9);
      CHECK(worst_scaled_second_difference(grid, sfo) >= -1e-9);

      // derivative signs of K(b) b around the critical batch
      const double h = 1e-4 * cb.batch;
      auto f = [&](double b) { return lower_steps(b, k) * b; };
      const double scale = cb.min_sfo / cb.batch;
      CHECK(std::abs(f(cb.batch + h) - f(cb.batch - h)) / (2 * h) <=
            1e-6 * scale);
      CHECK(f(0.75 * cb.batch + h) - f(0.75 * cb.batch - h) < 0.0);
      CHECK(f(2.0 * cb.batch + h) - f(2.0 * cb.batch - h) > 0.0);
      ++lower_checked;
    }

    // ---- upper side ----
    {
      const double thr = k.upper_domain_threshold();
      const CriticalBatch cb = critical_batch_upper(k);
      REQUIRE(cb.informative);
      const GoldenResult gr = golden_section_minimize(
          [&](double b) { return *upper_steps(b, k) * b; }, thr * 1.0001,
          thr * 1e4);
      CHECK(std::abs(gr.x - cb.batch) <= 1e-6 * cb.batch);
      CHECK(std::abs(gr.fx - cb.min_sfo) <= 1e-6 * cb.min_sfo);

      std::vector<double> grid, kv, sfo;
      const double lo = thr * 1.05, hi = thr * 50.0;
      for (int i = 0; i < 64; ++i) {
        const double b = lo + (hi - lo) * i / 63.0;
        grid.push_back(b);
        kv.push_back(*upper_steps(b, k));
        sfo.push_back(kv.back() * b);
      }
      for (int i = 0; i + 1 < 64; ++i) CHECK(kv[i + 1] < kv[i]);
      CHECK(worst_scaled_second_difference(grid, kv) >= -1e-9);
      CHECK(worst_scaled_second_difference(grid, sfo) >= -1e-9);
      ++upper_checked;
    }
  }
  CHECK(lower_checked == 100);
  CHECK(upper_checked == 100);
}
