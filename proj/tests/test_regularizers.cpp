#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "specfuse/regularizers.hpp"
#include "oracles.hpp"
#include "prox_reference.hpp"

#include <random>

using namespace specfuse;

namespace {

VectorField zeroField(Shape2 shape) {
  return {Image::Zero(shape.rows, shape.cols), Image::Zero(shape.rows, shape.cols), 0};
}

}  // namespace

TEST_CASE("vector field of a constant guide vanishes") {
  const Image v = Image::Constant(7, 7, 0.3);
  const VectorField xi = buildVectorField(v, {0.9995, 0.003});
  CHECK(xi.x1.abs().maxCoeff() == 0);
  CHECK(xi.x2.abs().maxCoeff() == 0);
}

TEST_CASE("gamma = 0 gives a zero field") {
  std::mt19937_64 rng(1);
  const Image v = oracle::randomImage(rng, {6, 8});
  const VectorField xi = buildVectorField(v, {0.0, 0.003});
  CHECK(xi.x1.abs().maxCoeff() == 0);
  CHECK(xi.x2.abs().maxCoeff() == 0);
}

TEST_CASE("vector field matches the pointwise formula") {
  Image v = Image::Zero(3, 3);
  v(1, 0) = 3;
  v(0, 1) = 4;
  const Scalar gamma = 0.9995, eps = 0.003;
  const VectorField xi = buildVectorField(v, {gamma, eps});
  const Scalar norm = std::sqrt(25.0 + eps * eps);
  CHECK(xi.x1(0, 0) == doctest::Approx(gamma * 3 / norm).epsilon(1e-14));
  CHECK(xi.x2(0, 0) == doctest::Approx(gamma * 4 / norm).epsilon(1e-14));
}

TEST_CASE("vector field norms stay strictly below gamma") {
  std::mt19937_64 rng(2);
  const Image v = oracle::randomImage(rng, {9, 9});
  for (const Scalar gamma : {0.5, 0.9995, 1.0}) {
    const VectorField xi = buildVectorField(v, {gamma, 0.003});
    const Image norm = (xi.x1 * xi.x1 + xi.x2 * xi.x2).sqrt();
    CHECK(norm.maxCoeff() < gamma + 1e-15);
    if (gamma > 0) CHECK(norm.maxCoeff() < gamma);
  }
}

TEST_CASE("grayscale uses the luminance weights") {
  const Image one = Image::Constant(2, 2, 1.0);
  const Image zero = Image::Zero(2, 2);
  // the standard luminance weights sum to 0.9999, not exactly 1
  CHECK(grayscale({one, one, one})(0, 0) == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(grayscale({zero, zero, zero})(0, 0) == 0.0);
  CHECK(grayscale({one, zero, zero})(0, 0) == doctest::Approx(0.2989).epsilon(1e-14));
  CHECK_THROWS_AS(grayscale({one, zero, Image::Zero(3, 3)}), ShapeMismatch);
}

TEST_CASE("tv basics") {
  CHECK(tv(Image::Constant(5, 8, 2.5)) == 0);
  Image u(1, 2);
  u << 0, 1;
  CHECK(tv(u) == doctest::Approx(2.0).epsilon(1e-14));

  std::mt19937_64 rng(3);
  const Image r = oracle::randomImage(rng, {6, 6});
  CHECK(tv(r) == doctest::Approx(dtv(r, zeroField({6, 6}))).epsilon(1e-14));
}

TEST_CASE("dtv with collinear and orthogonal directions") {
  std::mt19937_64 rng(4);
  const Image u = oracle::randomImage(rng, {5, 7});
  const GradientField g = gradient(u);
  const Scalar gamma = 0.9995;

  VectorField collinear = zeroField({5, 7});
  VectorField orthogonal = zeroField({5, 7});
  collinear.gamma = orthogonal.gamma = gamma;
  for (Index i = 0; i < 5; ++i)
    for (Index j = 0; j < 7; ++j) {
      const Scalar n = std::hypot(g.d1(i, j), g.d2(i, j));
      if (n == 0) continue;
      collinear.x1(i, j) = gamma * g.d1(i, j) / n;
      collinear.x2(i, j) = gamma * g.d2(i, j) / n;
      orthogonal.x1(i, j) = -gamma * g.d2(i, j) / n;
      orthogonal.x2(i, j) = gamma * g.d1(i, j) / n;
    }
  CHECK(dtv(u, collinear) == doctest::Approx((1 - gamma * gamma) * tv(u)).epsilon(1e-10));
  CHECK(dtv(u, orthogonal) == doctest::Approx(tv(u)).epsilon(1e-12));
}

TEST_CASE("dtv sandwich inequality") {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 25; ++t) {
    const Image u = oracle::randomImage(rng, {8, 8});
    const Image v = oracle::randomImage(rng, {8, 8});
    for (const Scalar gamma : {0.0, 0.5, 0.9995, 1.0}) {
      const VectorField xi = buildVectorField(v, {gamma, 0.003});
      const Scalar d = dtv(u, xi), s = tv(u);
      CHECK(d <= s + 1e-10);
      CHECK(d >= (1 - gamma * gamma) * s - 1e-10);
    }
  }
}

TEST_CASE("dtv is convex along random segments") {
  std::mt19937_64 rng(6);
  const Image v = oracle::randomImage(rng, {7, 7});
  const VectorField xi = buildVectorField(v, {0.9995, 0.003});
  std::uniform_real_distribution<Scalar> td(0, 1);
  for (int trial = 0; trial < 25; ++trial) {
    const Image a = oracle::randomImage(rng, {7, 7});
    const Image b = oracle::randomImage(rng, {7, 7});
    const Scalar t = td(rng);
    const Image mix = t * a + (1 - t) * b;
    CHECK(dtv(mix, xi) <= t * dtv(a, xi) + (1 - t) * dtv(b, xi) + 1e-10);
  }
}

TEST_CASE("a vanished gradient is never more expensive") {
  // per-pixel penalty |P g| is nonnegative and zero at g = 0
  std::mt19937_64 rng(7);
  const Image v = oracle::randomImage(rng, {6, 6});
  const VectorField xi = buildVectorField(v, {0.9995, 0.003});
  const Image u = oracle::randomImage(rng, {6, 6});
  CHECK(dtv(Image::Zero(6, 6), xi) == 0);
  CHECK(dtv(u, xi) >= 0);
}

TEST_CASE("projectNonnegative clamps and is idempotent") {
  Image u(1, 2);
  u << -1, 0.5;
  const Image p = projectNonnegative(u);
  CHECK(p(0, 0) == 0);
  CHECK(p(0, 1) == 0.5);

  std::mt19937_64 rng(8);
  const Image r = oracle::randomImage(rng, {5, 5});
  const Image q = projectNonnegative(r);
  CHECK(projectNonnegative(q).isApprox(q, 0));
  const Image pos = Image::Constant(3, 3, 0.2);
  CHECK(projectNonnegative(pos).isApprox(pos, 0));
}

TEST_CASE("projectSimplex agrees with the exhaustive KKT oracle") {
  std::mt19937_64 rng(9);
  std::uniform_int_distribution<int> len(1, 8);
  for (int t = 0; t < 300; ++t) {
    const int q = len(rng);
    const Image v = oracle::randomImage(rng, {1, q}, -2, 2);
    const Kernel got = projectSimplex(v);
    const auto ref = oracle::simplexProjectReference({v.data(), v.data() + q});
    for (int i = 0; i < q; ++i) CHECK(std::abs(got(0, i) - ref[size_t(i)]) <= 1e-10);
  }
}

TEST_CASE("projectSimplex output is feasible at any input scale") {
  std::mt19937_64 rng(10);
  for (const Scalar scale : {1e-3, 1.0, 1e6}) {
    for (int t = 0; t < 30; ++t) {
      const Kernel k = oracle::randomImage(rng, {3, 3}, -scale, scale);
      const Kernel p = projectSimplex(k);
      CHECK((p >= 0).all());
      CHECK(std::abs(p.sum() - 1) <= 1e-12);
    }
  }
}

TEST_CASE("projectSimplex keeps feasible kernels and uniformizes constants") {
  std::mt19937_64 rng(11);
  Kernel k = oracle::randomImage(rng, {3, 3}, 0, 1);
  k /= k.sum();
  CHECK((projectSimplex(k) - k).abs().maxCoeff() <= 1e-12);

  const Kernel c = Kernel::Constant(2, 3, 5.0);
  CHECK((projectSimplex(c) - 1.0 / 6).abs().maxCoeff() <= 1e-15);
}

TEST_CASE("proxDtvNonneg degenerates to the projection at lambda 0") {
  std::mt19937_64 rng(12);
  const Image y = oracle::randomImage(rng, {6, 6});
  ProxConfig cfg;
  const Image p = proxDtvNonneg(y, 0.7, 0.0, zeroField({6, 6}), cfg);
  CHECK(p.isApprox(projectNonnegative(y), 0));
}

TEST_CASE("constant nonnegative input is a prox fixed point") {
  const Image y = Image::Constant(5, 5, 0.6);
  ProxConfig cfg;
  const Image p = proxDtvNonneg(y, 1.0, 2.0, zeroField({5, 5}), cfg);
  CHECK((p - y).abs().maxCoeff() <= 1e-14);
}

TEST_CASE("proxDtvNonneg matches a long-run primal-dual reference") {
  std::mt19937_64 rng(13);
  Image y(1, 8);
  y << 0.9, 0.1, 0.8, 0.2, -0.3, 0.7, 0.05, 0.6;
  const VectorField xi = zeroField({1, 8});
  ProxConfig cfg;
  cfg.maxInnerIterations = 3000;
  const Image got = proxDtvNonneg(y, 1.0, 0.5, xi, cfg);
  CHECK((got >= 0).all());

  const auto ref = oracle::proxReference(
      y, 0.5, nullptr, [](const Image& z) -> Image { return z.max(0.0); }, 60000);
  const Scalar objGot = oracle::denoiseObjectiveReference(got, y, 0.5, nullptr);
  CHECK(objGot <= ref.objective + 1e-6);
  CHECK(std::abs(objGot - ref.objective) <= 1e-6);
}

TEST_CASE("proxDtvNonneg with a directional field matches the reference") {
  std::mt19937_64 rng(14);
  const Image guide = oracle::randomImage(rng, {6, 6});
  const VectorField xi = buildVectorField(guide, {0.9995, 0.003});
  const Image y = oracle::randomImage(rng, {6, 6});
  ProxConfig cfg;
  cfg.maxInnerIterations = 3000;
  const Image got = proxDtvNonneg(y, 0.5, 0.4, xi, cfg);
  const auto ref = oracle::proxReference(
      y, 0.2, &xi, [](const Image& z) -> Image { return z.max(0.0); }, 60000);
  const Scalar objGot = oracle::denoiseObjectiveReference(got, y, 0.2, &xi);
  CHECK(std::abs(objGot - ref.objective) <= 1e-6);
}

TEST_CASE("proxTvSimplex degenerates to the simplex projection at lambda 0") {
  std::mt19937_64 rng(15);
  const Kernel y = oracle::randomImage(rng, {5, 5});
  ProxConfig cfg;
  const Kernel p = proxTvSimplex(y, 0.7, 0.0, cfg);
  CHECK(p.isApprox(projectSimplex(y), 0));
}

TEST_CASE("uniform kernels are prox fixed points") {
  const Kernel y = Kernel::Constant(5, 5, 1.0 / 25);
  ProxConfig cfg;
  const Kernel p = proxTvSimplex(y, 1.0, 3.0, cfg);
  CHECK((p - y).abs().maxCoeff() <= 1e-13);
}

TEST_CASE("proxTvSimplex matches a long-run primal-dual reference") {
  std::mt19937_64 rng(16);
  const Kernel y = oracle::randomImage(rng, {5, 5}, -0.5, 1.0);
  ProxConfig cfg;
  cfg.maxInnerIterations = 3000;
  const Kernel got = proxTvSimplex(y, 1.0, 1.0, cfg);
  CHECK((got >= 0).all());
  CHECK(std::abs(got.sum() - 1) <= 1e-12);

  const auto ref = oracle::proxReference(
      y, 1.0, nullptr, [](const Image& z) -> Image { return projectSimplex(z); }, 60000);
  const Scalar objGot = oracle::denoiseObjectiveReference(got, y, 1.0, nullptr);
  CHECK(std::abs(objGot - ref.objective) <= 1e-6);
}

TEST_CASE("prox rejects bad steps") {
  ProxConfig cfg;
  const Image y = Image::Zero(4, 4);
  CHECK_THROWS_AS(proxDtvNonneg(y, 0.0, 1.0, zeroField({4, 4}), cfg), BadStep);
  CHECK_THROWS_AS(proxTvSimplex(y, -1.0, 1.0, cfg), BadStep);
}

TEST_CASE("warm-start duals stay feasible") {
  std::mt19937_64 rng(17);
  const Image guide = oracle::randomImage(rng, {6, 6});
  const VectorField xi = buildVectorField(guide, {0.9995, 0.003});
  ProxConfig cfg;
  for (int t = 0; t < 5; ++t) {
    const Image y = oracle::randomImage(rng, {6, 6});
    (void)proxDtvNonneg(y, 0.5, 0.8, xi, cfg);
    const Image norm = (cfg.dual1 * cfg.dual1 + cfg.dual2 * cfg.dual2).sqrt();
    CHECK(norm.maxCoeff() <= 1 + 1e-12);
  }
}
