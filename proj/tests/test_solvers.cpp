#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "specfuse/solvers.hpp"
#include "specfuse/synth.hpp"
#include "oracles.hpp"

#include <cstdio>
#include <random>

using namespace specfuse;

namespace {

Kernel diracKernel(Shape2 shape) {
  Kernel k = Kernel::Zero(shape.rows, shape.cols);
  k((shape.rows - 1) / 2, (shape.cols - 1) / 2) = 1;
  return k;
}

Kernel randomSimplexKernel(std::mt19937_64& rng, Shape2 shape) {
  Kernel k = oracle::randomImage(rng, shape, 0, 1);
  return k / k.sum();
}

// small synthetic fusion instance shared by the solver tests
struct SmallInstance {
  SolveInputs in;
  InitialIterates init;
};

SmallInstance smallInstance() {
  const Rgb rgb = makeTestImage({40, 40}, 42);
  SynthSpec spec;
  spec.kernelKind = SynthSpec::KernelKind::Disk;
  spec.kernelShape = {5, 5};
  spec.samplingFactor = 2;
  spec.noiseVariance = 0.0005;
  spec.randomSeed = 99;
  const Problem p = makeProblem(rgb, spec);
  SmallInstance s;
  s.in = {p.f, p.sideInfo, p.geometry, {0.9995, 0.003}};
  s.init = defaultInit(p.f, p.geometry);
  return s;
}

}  // namespace

TEST_CASE("dataFidelity basics") {
  std::mt19937_64 rng(1);
  const ProblemGeometry g = geometryFrom({6, 6}, {3, 3}, 2);
  const ForwardPlan plan(g);
  const Image u = oracle::randomImage(rng, g.imageShape, 0, 1);
  const Kernel k = randomSimplexKernel(rng, g.kernelShape);

  const Image f = applyA(u, k, plan);
  CHECK(dataFidelity(u, k, f, plan) <= 1e-20);

  const Image zero = Image::Zero(g.imageShape.rows, g.imageShape.cols);
  CHECK(dataFidelity(zero, k, f, plan) ==
        doctest::Approx(0.5 * squaredNorm(f)).epsilon(1e-12));

  // spatial-domain oracle recomputation
  const Image f2 = oracle::randomImage(rng, g.dataShape);
  const Image r = oracle::directApplyA(u, k, 2) - f2;
  CHECK(dataFidelity(u, k, f2, plan) ==
        doctest::Approx(0.5 * squaredNorm(r)).epsilon(1e-10));
}

TEST_CASE("gradU and gradK match central finite differences") {
  std::mt19937_64 rng(2);
  for (int instance = 0; instance < 3; ++instance) {
    const ProblemGeometry g = geometryFrom({5, 4}, {3, 5}, 2);
    const ForwardPlan plan(g);
    const Image u = oracle::randomImage(rng, g.imageShape, 0, 1);
    const Kernel k = randomSimplexKernel(rng, g.kernelShape);
    const Image f = oracle::randomImage(rng, g.dataShape, 0, 1);
    const Scalar h = 1e-6;

    const Image gu = gradU(u, k, f, plan);
    const Kernel gk = gradK(u, k, f, plan);
    for (int trial = 0; trial < 5; ++trial) {
      Image du = oracle::randomImage(rng, g.imageShape);
      du /= std::sqrt(squaredNorm(du));
      const Scalar fd = (dataFidelity(u + h * du, k, f, plan) -
                         dataFidelity(u - h * du, k, f, plan)) /
                        (2 * h);
      const Scalar an = dot(gu, du);
      CHECK(std::abs(fd - an) <= 1e-5 * std::max<Scalar>(std::abs(an), 1e-3));

      Kernel dk = oracle::randomImage(rng, g.kernelShape);
      dk /= std::sqrt(squaredNorm(dk));
      const Scalar fdk = (dataFidelity(u, k + h * dk, f, plan) -
                          dataFidelity(u, k - h * dk, f, plan)) /
                         (2 * h);
      const Scalar ank = dot(gk, dk);
      CHECK(std::abs(fdk - ank) <= 1e-5 * std::max<Scalar>(std::abs(ank), 1e-3));
    }
  }
}

TEST_CASE("gradients vanish at zero residual") {
  std::mt19937_64 rng(3);
  const ProblemGeometry g = geometryFrom({4, 4}, {3, 3}, 1);
  const ForwardPlan plan(g);
  const Image u = oracle::randomImage(rng, g.imageShape, 0, 1);
  const Kernel k = randomSimplexKernel(rng, g.kernelShape);
  const Image f = applyA(u, k, plan);
  CHECK(gradU(u, k, f, plan).abs().maxCoeff() <= 1e-12);
  CHECK(gradK(u, k, f, plan).abs().maxCoeff() <= 1e-12);
}

TEST_CASE("gradU is affine: gradU(2u) - 2 gradU(u) = A* f") {
  std::mt19937_64 rng(4);
  const ProblemGeometry g = geometryFrom({5, 5}, {3, 3}, 2);
  const ForwardPlan plan(g);
  const Image u = oracle::randomImage(rng, g.imageShape);
  const Kernel k = randomSimplexKernel(rng, g.kernelShape);
  const Image f = oracle::randomImage(rng, g.dataShape);
  const Image lhs = gradU(2 * u, k, f, plan) - 2 * gradU(u, k, f, plan);
  const Image rhs = adjointAImage(f, k, plan);
  CHECK(std::sqrt(squaredNorm(lhs - rhs)) <= 1e-10 * std::max<Scalar>(std::sqrt(squaredNorm(rhs)), 1));
}

TEST_CASE("gradK directional derivative equals residual pairing") {
  std::mt19937_64 rng(5);
  const ProblemGeometry g = geometryFrom({6, 4}, {5, 3}, 2);
  const ForwardPlan plan(g);
  const Image u = oracle::randomImage(rng, g.imageShape, 0, 1);
  const Kernel k = randomSimplexKernel(rng, g.kernelShape);
  const Image f = oracle::randomImage(rng, g.dataShape, 0, 1);
  const Image resid = applyA(u, k, plan) - f;
  const Kernel gk = gradK(u, k, f, plan);
  for (int trial = 0; trial < 5; ++trial) {
    const Kernel dk = oracle::randomImage(rng, g.kernelShape);
    const Scalar lhs = dot(gk, dk);
    const Scalar rhs = dot(resid, applyA(u, dk, plan));
    CHECK(std::abs(lhs - rhs) <= 1e-10 * std::max<Scalar>(std::abs(rhs), 1));
  }
}

TEST_CASE("objective composes its terms and flags infeasibility") {
  std::mt19937_64 rng(6);
  const ProblemGeometry g = geometryFrom({5, 5}, {3, 3}, 1);
  const ForwardPlan plan(g);
  SolverParams params;
  params.lambdaU = 0.3;
  params.lambdaK = 2.0;
  const Image guide = oracle::randomImage(rng, g.imageShape);
  const VectorField xi = buildVectorField(guide, {0.9995, 0.003});

  const Kernel k = randomSimplexKernel(rng, g.kernelShape);
  const Image constant = Image::Constant(g.imageShape.rows, g.imageShape.cols, 0.5);
  const Image f = applyA(constant, k, plan);
  CHECK(objective(constant, k, f, params, xi, plan) ==
        doctest::Approx(params.lambdaK * tv(k)).epsilon(1e-12));

  Image negative = constant;
  negative(2, 2) = -1e-9;
  CHECK(std::isinf(objective(negative, k, f, params, xi, plan)));

  Kernel badKernel = k * 2;
  CHECK(std::isinf(objective(constant, badKernel, f, params, xi, plan)));

  const Image u = oracle::randomImage(rng, g.imageShape, 0, 1);
  const Image f2 = oracle::randomImage(rng, g.dataShape, 0, 1);
  const Scalar expect =
      dataFidelity(u, k, f2, plan) + params.lambdaU * dtv(u, xi) + params.lambdaK * tv(k);
  CHECK(objective(u, k, f2, params, xi, plan) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("stepSize formula") {
  CHECK(stepSize(0, 1.1, 2.0) == doctest::Approx(2.0 / (1.1 * 2.0)).epsilon(1e-15));
  CHECK(stepSize(0.5, 1.1, 10.0) == doctest::Approx(1.0 / 22).epsilon(1e-14));
  Scalar prev = stepSize(0, 2.0, 1.0);
  for (Scalar a = 0.1; a < 1; a += 0.1) {
    const Scalar cur = stepSize(a, 2.0, 1.0);
    CHECK(cur < prev);
    prev = cur;
  }
  CHECK_THROWS_AS(stepSize(-0.1, 1.1, 1.0), BadParams);
  CHECK_THROWS_AS(stepSize(1.0, 1.1, 1.0), BadParams);
  CHECK_THROWS_AS(stepSize(0.0, 1.0, 1.0), BadParams);
  CHECK_THROWS_AS(stepSize(0.0, 1.1, 0.0), BadParams);
}

TEST_CASE("backtracking raises a low Lipschitz estimate on a 1-d quadratic") {
  // D(x) = x^2/2 has Lipschitz constant exactly 1
  BacktrackProblem problem;
  problem.smooth = [](const Image& x) { return 0.5 * x(0, 0) * x(0, 0); };
  problem.prox = [](const Image& y, Scalar, int) { return y; };
  problem.reg = [](const Image&) { return 0.0; };

  BacktrackParams bp;
  bp.eta = 2.0;
  Image x0(1, 1);
  x0 << 1.0;
  Image g(1, 1);
  g << 1.0;  // D'(1)

  const BacktrackOutcome out =
      backtrackStep(x0, x0, g, 0.5, /*L=*/0.01, bp, problem);
  CHECK(out.L >= 1.0);
  CHECK(out.L <= 2.0);  // at most one doubling past the true constant
  CHECK(out.retries > 0);
  CHECK(out.proxDescentHeld);
}

TEST_CASE("zero gradient accepts the prox point immediately") {
  BacktrackProblem problem;
  problem.smooth = [](const Image&) { return 1.0; };
  problem.prox = [](const Image& y, Scalar, int) -> Image { return y.max(0.0); };
  problem.reg = [](const Image&) { return 0.0; };
  BacktrackParams bp;
  Image x0(1, 2);
  x0 << -0.5, 2.0;
  const Image g = Image::Zero(1, 2);
  const BacktrackOutcome out = backtrackStep(x0, x0, g, 1.0, 1.0, bp, problem);
  CHECK(out.retries == 0);
  CHECK(out.x(0, 0) == 0.0);
  CHECK(out.x(0, 1) == 2.0);
}

TEST_CASE("backtracking stalls when the Lipschitz cap is too low") {
  BacktrackProblem problem;
  problem.smooth = [](const Image& x) { return 0.5 * x(0, 0) * x(0, 0); };
  problem.prox = [](const Image& y, Scalar, int) { return y; };
  problem.reg = [](const Image&) { return 0.0; };
  BacktrackParams bp;
  bp.lMax = 0.5;  // below the true constant 1
  Image x0(1, 1);
  x0 << 1.0;
  Image g(1, 1);
  g << 1.0;
  CHECK_THROWS_AS(backtrackStep(x0, x0, g, 0.5, 0.25, bp, problem), BacktrackStall);
}

TEST_CASE("gaussianInitKernel") {
  const Kernel one = gaussianInitKernel({1, 1}, 0.5);
  CHECK(one(0, 0) == 1.0);

  const Kernel k = gaussianInitKernel({41, 41}, 41.0 / 8);
  CHECK((k >= 0).all());
  CHECK(std::abs(k.sum() - 1) <= 1e-12);

  // matches the direct formula after normalization
  Kernel direct(41, 41);
  const Scalar sigma = 41.0 / 8;
  for (Index a = 0; a < 41; ++a)
    for (Index b = 0; b < 41; ++b)
      direct(a, b) = std::exp(-Scalar((a - 20) * (a - 20) + (b - 20) * (b - 20)) /
                              (2 * sigma * sigma));
  direct /= direct.sum();
  CHECK((k - direct).abs().maxCoeff() <= 1e-12);

  CHECK_THROWS_AS(gaussianInitKernel({4, 5}, 1.0), EvenKernel);
}

TEST_CASE("PALM drives a noiseless identity problem to tiny residual") {
  std::mt19937_64 rng(7);
  const ProblemGeometry g = geometryFrom({16, 16}, {1, 1}, 1);
  const Image truth = oracle::randomImage(rng, g.imageShape, 0.1, 0.9);
  const ForwardPlan plan(g);
  const Image f = applyA(truth, diracKernel({1, 1}), plan);

  SolveInputs in{f, truth, g, {0.9995, 0.003}};
  SolverParams params;
  params.lambdaU = 0;
  params.lambdaK = 0;
  params.maxIterations = 200;
  const SolveResult res = runPalm(in, params, defaultInit(f, g));
  CHECK(res.trace.rows.back().dataFidelity <= 1e-6);
  for (size_t t = 1; t < res.trace.rows.size(); ++t)
    CHECK(res.trace.rows[t].objective <= res.trace.rows[t - 1].objective + 1e-9);
}

TEST_CASE("PALM objective decreases monotonically on a synthetic instance") {
  const SmallInstance s = smallInstance();
  SolverParams params;
  params.lambdaU = 0.1;
  params.lambdaK = 10;
  params.maxIterations = 60;
  const SolveResult res = runPalm(s.in, params, s.init);

  REQUIRE(res.trace.rows.size() == 61);
  for (size_t t = 1; t < res.trace.rows.size(); ++t)
    CHECK(res.trace.rows[t].objective <= res.trace.rows[t - 1].objective + 1e-9);
  CHECK(res.trace.rows.back().objective < res.trace.rows.front().objective);
  // iterates stay feasible
  CHECK((res.u >= 0).all());
  CHECK((res.k >= 0).all());
  CHECK(std::abs(res.k.sum() - 1) <= 1e-12);
  // Lipschitz estimates stay within bounds
  for (const TraceRow& r : res.trace.rows) {
    CHECK(r.Lu >= params.lMin);
    CHECK(r.Lu <= params.lMax);
    CHECK(r.Lk >= params.lMin);
    CHECK(r.Lk <= params.lMax);
  }
}

TEST_CASE("iPALM with alpha=0 reproduces PALM bitwise") {
  const SmallInstance s = smallInstance();
  SolverParams params;
  params.lambdaU = 0.1;
  params.lambdaK = 10;
  params.maxIterations = 25;

  const SolveResult palm = runPalm(s.in, params, s.init);
  SolverParams ip = params;
  ip.alpha = 0;
  const SolveResult ipalm = runIpalm(s.in, ip, s.init);

  CHECK((palm.u == ipalm.u).all());
  CHECK((palm.k == ipalm.k).all());
  REQUIRE(palm.trace.rows.size() == ipalm.trace.rows.size());
  for (size_t t = 0; t < palm.trace.rows.size(); ++t)
    CHECK(palm.trace.rows[t].objective == ipalm.trace.rows[t].objective);
}

TEST_CASE("iPALM extrapolation vanishes on the first iteration") {
  const SmallInstance s = smallInstance();
  SolverParams params;
  params.lambdaU = 0.1;
  params.lambdaK = 10;
  params.alpha = 0.5;
  params.maxIterations = 3;

  bool sawFirst = false;
  const IterationObserver obs = [&](const IterationRecord& rec) {
    if (rec.iter == 1) {
      sawFirst = true;
      CHECK((rec.uAlpha == rec.uPrev).all());
      CHECK((rec.kAlpha == rec.kPrev).all());
    }
  };
  (void)runIpalm(s.in, params, s.init, obs);
  CHECK(sawFirst);
}

TEST_CASE("accepted iterations satisfy both Algorithm-1 inequalities") {
  const SmallInstance s = smallInstance();
  const ForwardPlan plan(s.in.geometry);
  const VectorField xi = buildVectorField(s.in.sideInfo, s.in.dtv);

  for (const Scalar alpha : {0.0, 0.3}) {
    SolverParams params;
    params.lambdaU = 0.1;
    params.lambdaK = 10;
    params.alpha = alpha;
    params.maxIterations = 20;

    const IterationObserver obs = [&](const IterationRecord& rec) {
      // descent inequalities, re-evaluated from scratch
      const Scalar dNewU = dataFidelity(rec.uNew, rec.kPrev, s.in.f, plan);
      const Scalar dAlphaU = dataFidelity(rec.uAlpha, rec.kPrev, s.in.f, plan);
      const Image du = rec.uNew - rec.uAlpha;
      CHECK(dNewU <=
            dAlphaU + dot(rec.gradU, du) + rec.Lu / 2 * squaredNorm(du) + 1e-12);

      const Scalar dNewK = dataFidelity(rec.uNew, rec.kNew, s.in.f, plan);
      const Scalar dAlphaK = dataFidelity(rec.uNew, rec.kAlpha, s.in.f, plan);
      const Image dk = rec.kNew - rec.kAlpha;
      CHECK(dNewK <=
            dAlphaK + dot(rec.gradK, dk) + rec.Lk / 2 * squaredNorm(dk) + 1e-12);

      // proximal descent inequalities
      const Scalar ruNew = params.lambdaU * dtv(rec.uNew, xi);
      const Scalar ruPrev = params.lambdaU * dtv(rec.uPrev, xi);
      CHECK(ruNew <= ruPrev + dot(rec.gradU, rec.uPrev - rec.uNew) +
                         (squaredNorm(rec.uPrev - rec.uAlpha) - squaredNorm(du)) /
                             (2 * rec.tauU) +
                         1e-12);

      const Scalar rkNew = params.lambdaK * tv(rec.kNew);
      const Scalar rkPrev = params.lambdaK * tv(rec.kPrev);
      CHECK(rkNew <= rkPrev + dot(rec.gradK, rec.kPrev - rec.kNew) +
                         (squaredNorm(rec.kPrev - rec.kAlpha) - squaredNorm(dk)) /
                             (2 * rec.tauK) +
                         1e-12);
    };
    (void)runIpalm(s.in, params, s.init, obs);
  }
}

TEST_CASE("one PALM iteration keeps an exact stationary point") {
  std::mt19937_64 rng(8);
  const ProblemGeometry g = geometryFrom({6, 6}, {3, 3}, 2);
  const ForwardPlan plan(g);
  const Image u = oracle::randomImage(rng, g.imageShape, 0.2, 0.8);
  const Kernel k = gaussianInitKernel(g.kernelShape, 1.0);
  const Image f = applyA(u, k, plan);

  SolveInputs in{f, u, g, {0.9995, 0.003}};
  SolverParams params;
  params.lambdaU = 0;
  params.lambdaK = 0;
  params.maxIterations = 1;
  const SolveResult res = runPalm(in, params, {u, k});
  CHECK((res.u == u).all());
  CHECK((res.k - k).abs().maxCoeff() <= 1e-12);
}

TEST_CASE("solver rejects invalid initial iterates") {
  const SmallInstance s = smallInstance();
  SolverParams params;
  params.maxIterations = 1;

  InitialIterates bad = s.init;
  bad.u(0, 0) = -0.1;
  CHECK_THROWS_AS(runPalm(s.in, params, bad), BadParams);

  InitialIterates badK = s.init;
  badK.k *= 2;
  CHECK_THROWS_AS(runPalm(s.in, params, badK), NotNormalized);
}

TEST_CASE("PAM image half-step matches the closed-form quadratic solution") {
  std::mt19937_64 rng(9);
  const ProblemGeometry g = geometryFrom({8, 8}, {1, 1}, 1);
  const ForwardPlan plan(g);
  const Kernel dirac = diracKernel({1, 1});
  const ComplexImage khat = plan.kernelSpectrum(dirac);

  const Image u = oracle::randomImage(rng, g.imageShape, 0.2, 0.8);
  const Image f = oracle::randomImage(rng, g.dataShape, 0.2, 0.8);
  const Scalar tau = 0.7;

  PamImageState state;
  const VectorField xi{Image::Zero(8, 8), Image::Zero(8, 8), 0};
  const Image got = pamImageStep(u, khat, f, tau, /*lambdaU=*/0, xi, /*rho=*/1.0,
                                 /*admmIterations=*/300, /*proxIterations=*/20, plan, state);
  const Image expect = (u + tau * f) / (1 + tau);
  CHECK((got - expect).abs().maxCoeff() <= 1e-8);
}

TEST_CASE("PAM decreases the objective within inner-solve slack") {
  const SmallInstance s = smallInstance();
  SolverParams params;
  params.lambdaU = 0.1;
  params.lambdaK = 10;
  params.maxIterations = 30;
  const SolveResult res = runPam(s.in, params, s.init);
  REQUIRE(res.trace.rows.size() == 31);
  for (size_t t = 1; t < res.trace.rows.size(); ++t) {
    const Scalar prev = res.trace.rows[t - 1].objective;
    CHECK(res.trace.rows[t].objective <= prev + 1e-6 * std::abs(prev));
  }
  CHECK(res.trace.rows.back().objective < res.trace.rows.front().objective);
  CHECK((res.u >= 0).all());
  CHECK(std::abs(res.k.sum() - 1) <= 1e-12);
}

TEST_CASE("trace CSV round-trips") {
  SolverTrace t;
  t.rows.push_back({0, 10.5, 9.25, 1.0, 0.25, 1.0, 2.0, 0, 0.0});
  t.rows.push_back({1, 8.125, 7.0, 0.875, 0.25, 0.5, 4.0, 3, 0.0625});
  const std::string path = "trace_roundtrip_test.csv";
  t.writeCsv(path);
  const SolverTrace r = SolverTrace::readCsv(path);
  REQUIRE(r.rows.size() == 2);
  CHECK(r.rows[1].objective == 8.125);
  CHECK(r.rows[1].Lk == 4.0);
  CHECK(r.rows[1].retries == 3);

  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  CHECK(header == "iter,objective,data_fidelity,reg_u,reg_k,L_u,L_k,retries,seconds");
  std::remove(path.c_str());
}
