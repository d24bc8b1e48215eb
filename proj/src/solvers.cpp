#include "specfuse/solvers.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace specfuse {

void SolverParams::validate() const {
  if (lambdaU < 0 || lambdaK < 0) throw BadParams("SolverParams: lambdas must be >= 0");
  if (!(alpha >= 0 && alpha < 1)) throw BadParams("SolverParams: alpha must be in [0,1)");
  if (!(theta > 1)) throw BadParams("SolverParams: theta must be > 1");
  if (!(eta > 1)) throw BadParams("SolverParams: eta must be > 1");
  if (!(lMin > 0 && lMin <= lMax)) throw BadParams("SolverParams: need 0 < lMin <= lMax");
  if (maxIterations < 1) throw BadParams("SolverParams: maxIterations must be >= 1");
  if (!(initialLu > 0 && initialLk > 0)) throw BadParams("SolverParams: initial L must be > 0");
  if (proxIterations < 1) throw BadParams("SolverParams: proxIterations must be >= 1");
  if (!(pamTauU > 0 && pamTauK > 0)) throw BadParams("SolverParams: PAM taus must be > 0");
  if (pamAdmmIterations < 1) throw BadParams("SolverParams: pamAdmmIterations must be >= 1");
  if (!(pamPenalty > 0)) throw BadParams("SolverParams: pamPenalty must be > 0");
}

void SolverTrace::writeCsv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw Error("cannot open trace file for writing: " + path);
  out << csvHeader << "\n";
  char buf[512];
  for (const TraceRow& r : rows) {
    std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d,%.6g\n", r.iter,
                  r.objective, r.dataFidelity, r.regU, r.regK, r.Lu, r.Lk, r.retries, r.seconds);
    out << buf;
  }
}

SolverTrace SolverTrace::readCsv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open trace file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw CorruptFile("empty trace file: " + path);
  SolverTrace t;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    TraceRow r;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    if (!(ss >> r.iter >> r.objective >> r.dataFidelity >> r.regU >> r.regK >> r.Lu >> r.Lk >>
          r.retries >> r.seconds))
      throw CorruptFile("bad trace row in " + path);
    t.rows.push_back(r);
  }
  return t;
}

Scalar dataFidelity(const Image& u, const Kernel& k, const Image& f, const ForwardPlan& plan) {
  requireShape(f, plan.geometry.dataShape, "dataFidelity");
  const Image r = applyA(u, k, plan) - f;
  return Scalar(0.5) * squaredNorm(r);
}

Image gradU(const Image& u, const Kernel& k, const Image& f, const ForwardPlan& plan) {
  requireShape(f, plan.geometry.dataShape, "gradU");
  const ComplexImage khat = plan.kernelSpectrum(k);
  const Image r = applyA(u, khat, plan) - f;
  return adjointAImage(r, khat, plan);
}

Kernel gradK(const Image& u, const Kernel& k, const Image& f, const ForwardPlan& plan) {
  requireShape(f, plan.geometry.dataShape, "gradK");
  const ComplexImage uhat = plan.imageSpectrum(u);
  const Image r = applyAOnKernel(k, uhat, plan) - f;
  return adjointAKernel(r, uhat, plan);
}

namespace {

constexpr Scalar kSimplexTolerance = 1e-9;

bool inSimplex(const Kernel& k) {
  return (k >= 0).all() && std::abs(k.sum() - 1) <= kSimplexTolerance;
}

}  // namespace

Scalar objective(const Image& u, const Kernel& k, const Image& f, const SolverParams& params,
                 const VectorField& xi, const ForwardPlan& plan) {
  if ((u < 0).any() || !inSimplex(k)) return std::numeric_limits<Scalar>::infinity();
  return dataFidelity(u, k, f, plan) + params.lambdaU * dtv(u, xi) + params.lambdaK * tv(k);
}

Scalar stepSize(Scalar alpha, Scalar theta, Scalar L) {
  if (!(alpha >= 0 && alpha < 1)) throw BadParams("stepSize: alpha must be in [0,1)");
  if (!(theta > 1)) throw BadParams("stepSize: theta must be > 1");
  if (!(L > 0)) throw BadParams("stepSize: L must be > 0");
  return (1 - alpha) / (1 + 2 * alpha) * 2 / (theta * L);
}

Kernel gaussianInitKernel(Shape2 shape, Scalar sigma) {
  if (shape.rows % 2 == 0 || shape.cols % 2 == 0)
    throw EvenKernel("gaussianInitKernel: kernel sides must be odd");
  if (!(sigma > 0)) throw BadParams("gaussianInitKernel: sigma must be > 0");
  const Index c1 = (shape.rows - 1) / 2, c2 = (shape.cols - 1) / 2;
  Kernel k(shape.rows, shape.cols);
  for (Index a = 0; a < shape.rows; ++a)
    for (Index b = 0; b < shape.cols; ++b) {
      const Scalar d2 = Scalar((a - c1) * (a - c1) + (b - c2) * (b - c2));
      k(a, b) = std::exp(-d2 / (2 * sigma * sigma));
    }
  return k / k.sum();
}

InitialIterates defaultInit(const Image& f, const ProblemGeometry& geometry, Scalar sigma) {
  if (sigma < 0)
    sigma = std::max<Scalar>(0.125, Scalar(std::min(geometry.kernelShape.rows,
                                                    geometry.kernelShape.cols)) / 8);
  InitialIterates init;
  init.u = projectNonnegative(upsampleInit(f, geometry));
  init.k = gaussianInitKernel(geometry.kernelShape, sigma);
  return init;
}

BacktrackOutcome backtrackStep(const Image& xPrev, const Image& xAlpha, const Image& gradAtAlpha,
                               Scalar smoothAtAlpha, Scalar L, const BacktrackParams& bp,
                               const BacktrackProblem& problem, int initialBudgetMult) {
  L = std::clamp(L, bp.lMin, bp.lMax);
  int mult = std::max(1, initialBudgetMult);
  int retries = 0;
  Scalar regAtPrev = std::numeric_limits<Scalar>::quiet_NaN();

  while (true) {
    const Scalar tau = stepSize(bp.alpha, bp.theta, L);
    Image x = problem.prox(xAlpha - tau * gradAtAlpha, tau, mult);
    const Scalar smoothAtX = problem.smooth(x);

    const Image diff = x - xAlpha;
    const Scalar descentRhs =
        smoothAtAlpha + dot(gradAtAlpha, diff) + Scalar(0.5) * L * squaredNorm(diff);
    if (smoothAtX > descentRhs) {
      if (L >= bp.lMax)
        throw BacktrackStall("descent inequality fails at the Lipschitz cap");
      if (retries >= bp.retryLimit)
        throw BacktrackStall("descent inequality still failing after " +
                             std::to_string(retries) + " retries");
      L = std::min(bp.eta * L, bp.lMax);
      ++retries;
      continue;
    }

    if (std::isnan(regAtPrev)) regAtPrev = problem.reg(xPrev);
    const Scalar regAtX = problem.reg(x);
    const Scalar proxRhs =
        regAtPrev + dot(gradAtAlpha, xPrev - x) +
        (squaredNorm(xPrev - xAlpha) - squaredNorm(diff)) / (2 * tau);
    if (regAtX > proxRhs && mult < bp.budgetCap) {
      mult *= 2;  // sharpen the prox (warm started) and retry at the same L
      continue;
    }

    BacktrackOutcome out;
    out.x = std::move(x);
    out.L = L;
    out.LNext = std::max(L / bp.eta, bp.lMin);
    out.tau = tau;
    out.retries = retries;
    out.budgetMult = mult;
    out.smoothAtX = smoothAtX;
    out.regAtX = regAtX;
    out.proxDescentHeld = !(regAtX > proxRhs);
    return out;
  }
}

namespace {

void validateIterates(const SolveInputs& in, const InitialIterates& init) {
  requireFinite(in.f, "solver data");
  requireFinite(in.sideInfo, "solver side info");
  requireShape(in.f, in.geometry.dataShape, "solver data");
  requireShape(in.sideInfo, in.geometry.imageShape, "solver side info");
  requireFinite(init.u, "initial image");
  requireFinite(init.k, "initial kernel");
  requireShape(init.u, in.geometry.imageShape, "initial image");
  requireShape(init.k, in.geometry.kernelShape, "initial kernel");
  if ((init.u < 0).any()) throw BadParams("initial image must be nonnegative");
  if (!inSimplex(init.k)) throw NotNormalized("initial kernel must lie in the unit simplex");
}

struct Stopwatch {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  Scalar seconds() const {
    return std::chrono::duration<Scalar>(std::chrono::steady_clock::now() - t0).count();
  }
};

SolveResult runPalmLike(const SolveInputs& in, const SolverParams& params,
                        const InitialIterates& init, const IterationObserver& observer) {
  params.validate();
  validateIterates(in, init);
  const VectorField xi = buildVectorField(in.sideInfo, in.dtv);
  const ForwardPlan plan(in.geometry);
  const Scalar alpha = params.alpha;

  Image u = init.u, uPrev = init.u;
  Kernel k = init.k, kPrev = init.k;
  Scalar Lu = std::clamp(params.initialLu, params.lMin, params.lMax);
  Scalar Lk = std::clamp(params.initialLk, params.lMin, params.lMax);

  ProxConfig proxU, proxK;
  proxU.maxInnerIterations = params.proxIterations;
  proxK.maxInnerIterations = params.proxIterations;

  BacktrackParams bp;
  bp.alpha = alpha;
  bp.theta = params.theta;
  bp.eta = params.eta;
  bp.lMin = params.lMin;
  bp.lMax = params.lMax;
  bp.retryLimit = params.backtrackRetryLimit;
  bp.budgetCap = params.proxBudgetCap;

  ComplexImage khat = plan.kernelSpectrum(k);
  Scalar dCur = Scalar(0.5) * squaredNorm(applyA(u, khat, plan) - in.f);
  Scalar regU = params.lambdaU * dtv(u, xi);
  Scalar regK = params.lambdaK * tv(k);

  SolveResult res;
  res.trace.rows.push_back({0, dCur + regU + regK, dCur, regU, regK, Lu, Lk, 0, 0});

  for (int t = 1; t <= params.maxIterations; ++t) {
    Stopwatch clock;
    int retries = 0;

    // image block
    const Image uAlpha = u + alpha * (u - uPrev);
    const Image residAlpha = applyA(uAlpha, khat, plan) - in.f;
    const Scalar smoothAtAlphaU = Scalar(0.5) * squaredNorm(residAlpha);
    const Image gU = adjointAImage(residAlpha, khat, plan);

    BacktrackProblem pu;
    pu.smooth = [&](const Image& x) {
      return Scalar(0.5) * squaredNorm(applyA(x, khat, plan) - in.f);
    };
    pu.prox = [&](const Image& y, Scalar tau, int mult) {
      proxU.maxInnerIterations = params.proxIterations * mult;
      return proxDtvNonneg(y, tau, params.lambdaU, xi, proxU);
    };
    pu.reg = [&](const Image& x) { return params.lambdaU * dtv(x, xi); };

    BacktrackOutcome su = backtrackStep(u, uAlpha, gU, smoothAtAlphaU, Lu, bp, pu);
    retries += su.retries;
    if (alpha == 0) {
      // monotone safeguard: a half step may not raise its part of the
      // objective; sharpen the prox if it does, else keep the block fixed
      int mult = su.budgetMult;
      while (su.smoothAtX + su.regAtX > dCur + regU && mult < bp.budgetCap) {
        mult *= 2;
        su = backtrackStep(u, uAlpha, gU, smoothAtAlphaU, su.L, bp, pu, mult);
        retries += su.retries;
      }
      if (su.smoothAtX + su.regAtX > dCur + regU) {
        su.x = u;
        su.smoothAtX = dCur;
        su.regAtX = regU;
      }
    }
    uPrev = u;
    u = su.x;
    Lu = su.LNext;
    const Scalar dAfterU = su.smoothAtX;
    const Scalar regUNew = su.regAtX;

    // kernel block
    const Kernel kAlpha = k + alpha * (k - kPrev);
    const ComplexImage uhat = plan.imageSpectrum(u);
    const Image residAlphaK = applyAOnKernel(kAlpha, uhat, plan) - in.f;
    const Scalar smoothAtAlphaK = Scalar(0.5) * squaredNorm(residAlphaK);
    const Kernel gK = adjointAKernel(residAlphaK, uhat, plan);

    BacktrackProblem pk;
    pk.smooth = [&](const Kernel& x) {
      return Scalar(0.5) * squaredNorm(applyAOnKernel(x, uhat, plan) - in.f);
    };
    pk.prox = [&](const Kernel& y, Scalar tau, int mult) {
      proxK.maxInnerIterations = params.proxIterations * mult;
      return proxTvSimplex(y, tau, params.lambdaK, proxK);
    };
    pk.reg = [&](const Kernel& x) { return params.lambdaK * tv(x); };

    BacktrackOutcome sk = backtrackStep(k, kAlpha, gK, smoothAtAlphaK, Lk, bp, pk);
    retries += sk.retries;
    if (alpha == 0) {
      int mult = sk.budgetMult;
      while (sk.smoothAtX + sk.regAtX > dAfterU + regK && mult < bp.budgetCap) {
        mult *= 2;
        sk = backtrackStep(k, kAlpha, gK, smoothAtAlphaK, sk.L, bp, pk, mult);
        retries += sk.retries;
      }
      if (sk.smoothAtX + sk.regAtX > dAfterU + regK) {
        sk.x = k;
        sk.smoothAtX = dAfterU;
        sk.regAtX = regK;
      }
    }
    kPrev = k;
    k = sk.x;
    Lk = sk.LNext;

    dCur = sk.smoothAtX;
    regU = regUNew;
    regK = sk.regAtX;
    khat = plan.kernelSpectrum(k);

    res.trace.rows.push_back(
        {t, dCur + regU + regK, dCur, regU, regK, su.L, sk.L, retries, clock.seconds()});

    if (observer) {
      IterationRecord rec{t,     uPrev, uAlpha, u,  gU,   su.L, su.tau,
                          kPrev, kAlpha, k,     gK, sk.L, sk.tau};
      observer(rec);
    }
  }

  res.u = std::move(u);
  res.k = std::move(k);
  return res;
}

}  // namespace

SolveResult runPalm(const SolveInputs& in, const SolverParams& params,
                    const InitialIterates& init, const IterationObserver& observer) {
  SolverParams p = params;
  p.alpha = 0;
  return runPalmLike(in, p, init, observer);
}

SolveResult runIpalm(const SolveInputs& in, const SolverParams& params,
                     const InitialIterates& init, const IterationObserver& observer) {
  return runPalmLike(in, params, init, observer);
}

namespace {

// z block of the ADMM: margins copy the input, each sampling cell is shifted
// so that tau/2 (mean(z) - f_i)^2 + rho/2 |z - c|^2 is minimized.
void solveDataBlock(Image& z, const Image& c, const Image& f, const ProblemGeometry& g,
                    Scalar tau, Scalar rho) {
  const int s = g.samplingFactor;
  const Scalar s2 = Scalar(s) * Scalar(s);
  z = c;
  for (Index i = 0; i < f.rows(); ++i)
    for (Index j = 0; j < f.cols(); ++j) {
      auto cell = z.block(g.margin.rows + i * s, g.margin.cols + j * s, s, s);
      const Scalar mean = cell.sum() / s2;
      cell -= tau * (mean - f(i, j)) / (rho * s2 + tau);
    }
}

void checkResidual(Scalar r, Scalar r0, const char* what) {
  if (r > 1e3 * r0 + 1e-9)
    throw InnerSolveDiverged(std::string(what) + ": ADMM residual grew by more than 1e3x");
}

}  // namespace

Image pamImageStep(const Image& u, const ComplexImage& kernelSpec, const Image& f, Scalar tau,
                   Scalar lambdaU, const VectorField& xi, Scalar rho, int admmIterations,
                   int proxIterations, const ForwardPlan& plan, PamImageState& state) {
  const ProblemGeometry& g = plan.geometry;
  if (!state.initialized) {
    state.z = plan.fft.inv(kernelSpec * plan.fft.fwd(u));
    state.v = u;
    state.wz = Image::Zero(g.imageShape.rows, g.imageShape.cols);
    state.wv = Image::Zero(g.imageShape.rows, g.imageShape.cols);
    state.prox.maxInnerIterations = proxIterations;
    state.initialized = true;
  }
  const ComplexImage fu = plan.fft.fwd(u);
  const Image denom = 1 + rho * kernelSpec.abs2() + rho;

  Scalar firstResidual = -1;
  Image x, ckx;
  for (int it = 0; it < admmIterations; ++it) {
    const ComplexImage xhat =
        (fu + rho * (kernelSpec.conjugate() * plan.fft.fwd(state.z - state.wz)) +
         rho * plan.fft.fwd(state.v - state.wv)) /
        denom.cast<std::complex<Scalar>>();
    x = plan.fft.inv(xhat);
    ckx = plan.fft.inv(kernelSpec * xhat);

    solveDataBlock(state.z, ckx + state.wz, f, g, tau, rho);
    state.v = proxDtvNonneg(x + state.wv, tau / rho, lambdaU, xi, state.prox);

    state.wz += ckx - state.z;
    state.wv += x - state.v;

    const Scalar r = std::sqrt(squaredNorm(ckx - state.z)) + std::sqrt(squaredNorm(x - state.v));
    if (firstResidual < 0) firstResidual = r;
    checkResidual(r, firstResidual, "pamImageStep");
  }
  return state.v;
}

Kernel pamKernelStep(const Kernel& k, const ComplexImage& imageSpec, const Image& f, Scalar tau,
                     Scalar lambdaK, Scalar rho, int admmIterations, int proxIterations,
                     const ForwardPlan& plan, PamKernelState& state) {
  const ProblemGeometry& g = plan.geometry;
  if (!state.initialized) {
    state.kappa = embedKernel(k, g);
    state.z = plan.fft.inv(imageSpec * plan.fft.fwd(state.kappa));
    state.v = k;
    state.wz = Image::Zero(g.imageShape.rows, g.imageShape.cols);
    state.wk = Image::Zero(g.imageShape.rows, g.imageShape.cols);
    state.prox.maxInnerIterations = proxIterations;
    state.initialized = true;
  }

  const Image denom = imageSpec.abs2() + 1;

  Scalar firstResidual = -1;
  for (int it = 0; it < admmIterations; ++it) {
    const ComplexImage khat =
        (imageSpec.conjugate() * plan.fft.fwd(state.z - state.wz) +
         plan.fft.fwd(embedKernel(state.v, g) - state.wk)) /
        denom.cast<std::complex<Scalar>>();
    state.kappa = plan.fft.inv(khat);
    const Image cuk = plan.fft.inv(imageSpec * khat);

    solveDataBlock(state.z, cuk + state.wz, f, g, tau, rho);

    const Kernel point = (k + rho * restrictKernel(state.kappa + state.wk, g)) / (1 + rho);
    state.v = proxTvSimplex(point, tau / (1 + rho), lambdaK, state.prox);

    const Image jv = embedKernel(state.v, g);
    state.wz += cuk - state.z;
    state.wk += state.kappa - jv;

    const Scalar r =
        std::sqrt(squaredNorm(cuk - state.z)) + std::sqrt(squaredNorm(state.kappa - jv));
    if (firstResidual < 0) firstResidual = r;
    checkResidual(r, firstResidual, "pamKernelStep");
  }
  return state.v;
}

SolveResult runPam(const SolveInputs& in, const SolverParams& params,
                   const InitialIterates& init) {
  params.validate();
  validateIterates(in, init);
  const VectorField xi = buildVectorField(in.sideInfo, in.dtv);
  const ForwardPlan plan(in.geometry);
  const Scalar rho = params.pamPenalty;

  Image u = init.u;
  Kernel k = init.k;
  PamImageState stateU;
  PamKernelState stateK;

  ComplexImage khat = plan.kernelSpectrum(k);
  Scalar dCur = Scalar(0.5) * squaredNorm(applyA(u, khat, plan) - in.f);
  Scalar regU = params.lambdaU * dtv(u, xi);
  Scalar regK = params.lambdaK * tv(k);

  SolveResult res;
  res.trace.rows.push_back({0, dCur + regU + regK, dCur, regU, regK, 0, 0, 0, 0});

  for (int t = 1; t <= params.maxIterations; ++t) {
    Stopwatch clock;

    Image uNew = pamImageStep(u, khat, in.f, params.pamTauU, params.lambdaU, xi, rho,
                              params.pamAdmmIterations, params.proxIterations, plan, stateU);
    Scalar dNew = Scalar(0.5) * squaredNorm(applyA(uNew, khat, plan) - in.f);
    Scalar regUNew = params.lambdaU * dtv(uNew, xi);
    // keep the block if the inexact inner solve failed to improve its subproblem
    const Scalar subNew = Scalar(0.5) * squaredNorm(uNew - u) + params.pamTauU * (dNew + regUNew);
    if (subNew > params.pamTauU * (dCur + regU)) {
      uNew = u;
      dNew = dCur;
      regUNew = regU;
    }
    u = std::move(uNew);

    const ComplexImage uhat = plan.imageSpectrum(u);
    Kernel kNew = pamKernelStep(k, uhat, in.f, params.pamTauK, params.lambdaK, rho,
                                params.pamAdmmIterations, params.proxIterations, plan, stateK);
    Scalar dNewK = Scalar(0.5) * squaredNorm(applyAOnKernel(kNew, uhat, plan) - in.f);
    Scalar regKNew = params.lambdaK * tv(kNew);
    const Scalar subNewK =
        Scalar(0.5) * squaredNorm(kNew - k) + params.pamTauK * (dNewK + regKNew);
    if (subNewK > params.pamTauK * (dNew + regK)) {
      kNew = k;
      dNewK = dNew;
      regKNew = regK;
    }
    k = std::move(kNew);

    dCur = dNewK;
    regU = regUNew;
    regK = regKNew;
    khat = plan.kernelSpectrum(k);

    res.trace.rows.push_back({t, dCur + regU + regK, dCur, regU, regK, 0, 0, 0, clock.seconds()});
  }

  res.u = std::move(u);
  res.k = std::move(k);
  return res;
}

}  // namespace specfuse
