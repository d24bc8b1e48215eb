#ifndef SPECFUSE_SOLVERS_HPP
#define SPECFUSE_SOLVERS_HPP

#include "specfuse/core.hpp"
#include "specfuse/forward.hpp"
#include "specfuse/regularizers.hpp"

#include <functional>
#include <string>
#include <vector>

namespace specfuse {

struct SolverParams {
  Scalar lambdaU = 0.1;
  Scalar lambdaK = 10.0;
  Scalar alpha = 0.0;  // inertia, in [0, 1)
  Scalar theta = 1.1;  // step size constant, > 1
  Scalar eta = 2.0;    // backtracking factor, > 1
  Scalar lMin = 1.0;
  Scalar lMax = 1e30;
  int maxIterations = 2000;
  Scalar initialLu = 1.0;
  Scalar initialLk = 1.0;
  int proxIterations = 20;        // inner budget per prox call
  int backtrackRetryLimit = 60;   // bound on Lipschitz doublings per step
  int proxBudgetCap = 16;         // max escalation multiple of the prox budget

  // PAM settings: inner ADMM on each half step.
  Scalar pamTauU = 1.0;
  Scalar pamTauK = 1.0;
  int pamAdmmIterations = 50;
  Scalar pamPenalty = 1.0;

  void validate() const;
};

struct TraceRow {
  int iter = 0;
  Scalar objective = 0;
  Scalar dataFidelity = 0;
  Scalar regU = 0;
  Scalar regK = 0;
  Scalar Lu = 0;
  Scalar Lk = 0;
  int retries = 0;
  Scalar seconds = 0;
};

struct SolverTrace {
  static constexpr const char* csvHeader =
      "iter,objective,data_fidelity,reg_u,reg_k,L_u,L_k,retries,seconds";

  std::vector<TraceRow> rows;

  void writeCsv(const std::string& path) const;
  static SolverTrace readCsv(const std::string& path);
};

struct SolveInputs {
  Image f;         // data, shape n
  Image sideInfo;  // high-resolution guide, shape m
  ProblemGeometry geometry;
  DtvParams dtv;
};

struct InitialIterates {
  Image u;
  Kernel k;
};

struct SolveResult {
  Image u;
  Kernel k;
  SolverTrace trace;
};

// Snapshot of one accepted iteration, enough to re-evaluate the descent and
// proximal-descent inequalities from the outside. References are only valid
// during the callback.
struct IterationRecord {
  int iter;
  const Image& uPrev;
  const Image& uAlpha;
  const Image& uNew;
  const Image& gradU;
  Scalar Lu;
  Scalar tauU;
  const Kernel& kPrev;
  const Kernel& kAlpha;
  const Kernel& kNew;
  const Kernel& gradK;
  Scalar Lk;
  Scalar tauK;
};
using IterationObserver = std::function<void(const IterationRecord&)>;

Scalar dataFidelity(const Image& u, const Kernel& k, const Image& f, const ForwardPlan& plan);
Image gradU(const Image& u, const Kernel& k, const Image& f, const ForwardPlan& plan);
Kernel gradK(const Image& u, const Kernel& k, const Image& f, const ForwardPlan& plan);

// Full objective; +infinity for infeasible iterates.
Scalar objective(const Image& u, const Kernel& k, const Image& f, const SolverParams& params,
                 const VectorField& xi, const ForwardPlan& plan);

Scalar stepSize(Scalar alpha, Scalar theta, Scalar L);

Kernel gaussianInitKernel(Shape2 shape, Scalar sigma);

// Upsampled data image (clamped nonnegative) and a centered Gaussian kernel;
// sigma < 0 picks min(r)/8.
InitialIterates defaultInit(const Image& f, const ProblemGeometry& geometry, Scalar sigma = -1);

// One forward-backward block update with the Lipschitz backtracking loop.
// Generic over the smooth term, prox and regularizer so it can be exercised
// on scalar toy problems.
struct BacktrackProblem {
  std::function<Scalar(const Image&)> smooth;
  std::function<Image(const Image&, Scalar tau, int budgetMult)> prox;
  std::function<Scalar(const Image&)> reg;
};

struct BacktrackParams {
  Scalar alpha = 0;
  Scalar theta = 1.1;
  Scalar eta = 2.0;
  Scalar lMin = 1.0;
  Scalar lMax = 1e30;
  int retryLimit = 60;
  int budgetCap = 16;
};

struct BacktrackOutcome {
  Image x;
  Scalar L = 0;      // estimate the inequalities were accepted with
  Scalar LNext = 0;  // relaxed estimate to carry into the next iteration
  Scalar tau = 0;
  int retries = 0;
  int budgetMult = 1;
  Scalar smoothAtX = 0;
  Scalar regAtX = 0;
  bool proxDescentHeld = true;
};

BacktrackOutcome backtrackStep(const Image& xPrev, const Image& xAlpha, const Image& gradAtAlpha,
                               Scalar smoothAtAlpha, Scalar L, const BacktrackParams& bp,
                               const BacktrackProblem& problem, int initialBudgetMult = 1);

SolveResult runPalm(const SolveInputs& in, const SolverParams& params,
                    const InitialIterates& init, const IterationObserver& observer = {});
SolveResult runIpalm(const SolveInputs& in, const SolverParams& params,
                     const InitialIterates& init, const IterationObserver& observer = {});
SolveResult runPam(const SolveInputs& in, const SolverParams& params,
                   const InitialIterates& init);

// Warm-started ADMM states for the two PAM half steps.
struct PamImageState {
  bool initialized = false;
  Image z, v, wz, wv;
  ProxConfig prox;
};
struct PamKernelState {
  bool initialized = false;
  Image kappa, z, wz, wk;
  Kernel v;
  ProxConfig prox;
};

// argmin_x 1/2|x-u|^2 + tau*(1/2|A_k x - f|^2 + lambdaU*dTV(x) + i_{>=0}(x)),
// solved by splitting z = C_k x, v = x; the coupled quadratic is solved in
// the frequency domain.
Image pamImageStep(const Image& u, const ComplexImage& kernelSpec, const Image& f, Scalar tau,
                   Scalar lambdaU, const VectorField& xi, Scalar rho, int admmIterations,
                   int proxIterations, const ForwardPlan& plan, PamImageState& state);

Kernel pamKernelStep(const Kernel& k, const ComplexImage& imageSpec, const Image& f, Scalar tau,
                     Scalar lambdaK, Scalar rho, int admmIterations, int proxIterations,
                     const ForwardPlan& plan, PamKernelState& state);

}  // namespace specfuse

#endif
