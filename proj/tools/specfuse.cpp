// specfuse: simulate | fuse | evaluate | sweep
//
// Command-line front end for blind image fusion with directional total
// variation. Outputs land in a run directory together with a manifest
// listing every artifact and its content hash.

#include "specfuse/imageio.hpp"
#include "specfuse/metrics.hpp"
#include "specfuse/solvers.hpp"
#include "specfuse/synth.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace fs = std::filesystem;
using namespace specfuse;

namespace {

std::uint64_t fnv1a64File(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot hash missing file: " + path);
  std::uint64_t h = 1469598103934665603ULL;
  char buf[4096];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= std::uint64_t(std::uint8_t(buf[i]));
      h *= 1099511628211ULL;
    }
    if (!in) break;
  }
  return h;
}

class Manifest {
 public:
  Manifest(std::string dir, std::string command) : dir_(std::move(dir)) {
    json_["command"] = std::move(command);
    json_["artifacts"] = nlohmann::json::array();
  }

  void addArtifact(const std::string& path) {
    std::scoped_lock lock(mutex_);
    char hex[32];
    std::snprintf(hex, sizeof(hex), "%016llx",
                  static_cast<unsigned long long>(fnv1a64File(path)));
    json_["artifacts"].push_back({{"path", fs::relative(path, dir_).string()},
                                  {"fnv1a64", std::string(hex)}});
  }

  void setConfig(nlohmann::json cfg) { json_["config"] = std::move(cfg); }

  void write() {
    std::ofstream out(dir_ + "/manifest.json");
    if (!out) throw Error("cannot write manifest in " + dir_);
    out << json_.dump(2) << "\n";
  }

 private:
  std::string dir_;
  nlohmann::json json_;
  std::mutex mutex_;
};

int threadBudget(int jobs) {
  int n = int(std::thread::hardware_concurrency());
  if (n < 1) n = 1;
  if (const char* env = std::getenv("SPECFUSE_THREADS")) {
    const int cap = std::atoi(env);
    if (cap >= 1) n = std::min(n, cap);
  }
  return std::max(1, std::min(n, jobs));
}

// Runs jobs 0..count-1 across the thread budget; exceptions are captured
// per job and reported by index.
std::vector<std::string> parallelFor(int count, const std::function<void(int)>& job) {
  std::vector<std::string> errors(static_cast<size_t>(count));
  std::atomic<int> next{0};
  const int workers = threadBudget(count);
  auto worker = [&] {
    while (true) {
      const int i = next.fetch_add(1);
      if (i >= count) return;
      try {
        job(i);
      } catch (const std::exception& e) {
        errors[size_t(i)] = e.what();
      }
    }
  };
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  return errors;
}

struct SolverOptions {
  std::string algorithm = "palm";
  Scalar lambdaU = 0.1;
  Scalar lambdaK = 10.0;
  Scalar gamma = 0.9995;
  Scalar epsilon = 0.003;
  Scalar alpha = 0.0;
  Scalar theta = 1.1;
  Scalar eta = 2.0;
  Scalar lMin = 1.0;
  Scalar lMax = 1e30;
  int iterations = 2000;
  int proxIterations = 20;
  Scalar pamTau = 1.0;
  int pamAdmmIterations = 50;
  Scalar initSigma = -1;

  SolverParams params() const {
    SolverParams p;
    p.lambdaU = lambdaU;
    p.lambdaK = lambdaK;
    p.alpha = alpha;
    p.theta = theta;
    p.eta = eta;
    p.lMin = lMin;
    p.lMax = lMax;
    p.maxIterations = iterations;
    p.initialLu = lMin;
    p.initialLk = lMin;
    p.proxIterations = proxIterations;
    p.pamTauU = pamTau;
    p.pamTauK = pamTau;
    p.pamAdmmIterations = pamAdmmIterations;
    return p;
  }

  DtvParams dtv() const { return {gamma, epsilon}; }
};

void addSolverOptions(CLI::App* cmd, SolverOptions& o) {
  cmd->add_option("--algorithm", o.algorithm, "palm | ipalm | pam")
      ->check(CLI::IsMember({"palm", "ipalm", "pam"}))
      ->capture_default_str();
  cmd->add_option("--lambda-u", o.lambdaU, "image regularization weight")->capture_default_str();
  cmd->add_option("--lambda-k", o.lambdaK, "kernel regularization weight")->capture_default_str();
  cmd->add_option("--gamma", o.gamma, "vector field strength in [0,1]")->capture_default_str();
  cmd->add_option("--epsilon", o.epsilon, "vector field smoothing")->capture_default_str();
  cmd->add_option("--alpha", o.alpha, "inertia in [0,1) (ipalm)")->capture_default_str();
  cmd->add_option("--theta", o.theta, "step size constant > 1")->capture_default_str();
  cmd->add_option("--eta", o.eta, "backtracking factor > 1")->capture_default_str();
  cmd->add_option("--l-min", o.lMin, "lower Lipschitz bound")->capture_default_str();
  cmd->add_option("--l-max", o.lMax, "upper Lipschitz bound")->capture_default_str();
  cmd->add_option("--iterations", o.iterations, "outer iterations")->capture_default_str();
  cmd->add_option("--prox-iterations", o.proxIterations, "inner prox budget")
      ->capture_default_str();
  cmd->add_option("--pam-tau", o.pamTau, "PAM proximal step size")->capture_default_str();
  cmd->add_option("--pam-admm-iterations", o.pamAdmmIterations, "PAM inner ADMM budget")
      ->capture_default_str();
  cmd->add_option("--init-sigma", o.initSigma, "sigma of the Gaussian init kernel (<0: r/8)")
      ->capture_default_str();
}

SolveResult runSolver(const SolverOptions& o, const SolveInputs& in,
                      const InitialIterates& init) {
  if (o.algorithm == "palm") return runPalm(in, o.params(), init);
  if (o.algorithm == "ipalm") return runIpalm(in, o.params(), init);
  return runPam(in, o.params(), init);
}

nlohmann::json solverConfigJson(const SolverOptions& o) {
  return {{"algorithm", o.algorithm}, {"lambda_u", o.lambdaU}, {"lambda_k", o.lambdaK},
          {"gamma", o.gamma},         {"epsilon", o.epsilon}, {"alpha", o.alpha},
          {"theta", o.theta},         {"eta", o.eta},         {"iterations", o.iterations},
          {"l_min", o.lMin},          {"l_max", o.lMax},
          {"prox_iterations", o.proxIterations}};
}

// ---------------------------------------------------------------- simulate

struct SimulateOptions {
  std::string source;
  std::vector<Index> testImageSize{128, 128};
  std::uint64_t testImageSeed = 7;
  std::string kernel = "disk";
  int kernelSize = 41;
  int sampling = 4;
  Scalar noiseVariance = 0.001;
  std::vector<Index> shift{0, 0};
  Scalar radius = -1;
  Scalar sigma = -1;
  std::vector<Scalar> offset{5, 5};
  std::uint64_t seed = 0;
  std::string out;
};

int cmdSimulate(const SimulateOptions& o) {
  Rgb rgb = o.source.empty()
                ? makeTestImage({o.testImageSize[0], o.testImageSize[1]}, o.testImageSeed)
                : readRgb(o.source);

  SynthSpec spec;
  if (o.kernel == "disk") spec.kernelKind = SynthSpec::KernelKind::Disk;
  if (o.kernel == "gaussian") spec.kernelKind = SynthSpec::KernelKind::OffCenterGaussian;
  if (o.kernel == "dirac") spec.kernelKind = SynthSpec::KernelKind::Dirac;
  spec.kernelShape = {o.kernelSize, o.kernelSize};
  spec.samplingFactor = o.sampling;
  spec.noiseVariance = o.noiseVariance;
  spec.sideInfoShift = {o.shift[0], o.shift[1]};
  spec.randomSeed = o.seed;
  spec.diskRadius = o.radius;
  spec.gaussianSigma = o.sigma;
  spec.gaussianOffset = {o.offset[0], o.offset[1]};

  const Problem p = makeProblem(rgb, spec);
  fs::create_directories(o.out);
  writeProblemBundle(o.out, p);

  writePngRgb8(o.out + "/f.png", renderImage(p.f, Colormap::Parula));
  writePngRgb8(o.out + "/v.png", renderImage(p.sideInfo, Colormap::Gray));
  writePngRgb8(o.out + "/truth_kernel.png", renderKernel(p.truthKernel));

  Manifest manifest(o.out, "simulate");
  for (const char* name : {"f.txt", "v.txt", "truth_image.txt", "truth_kernel.txt",
                           "bundle.meta", "f.png", "v.png", "truth_kernel.png"})
    manifest.addArtifact(o.out + "/" + name);
  manifest.setConfig({{"kernel", o.kernel},
                      {"kernel_size", o.kernelSize},
                      {"sampling", o.sampling},
                      {"noise_variance", o.noiseVariance},
                      {"shift", {o.shift[0], o.shift[1]}},
                      {"seed", o.seed}});
  manifest.write();

  std::cout << "bundle written to " << o.out << " (data " << p.geometry.dataShape.rows << "x"
            << p.geometry.dataShape.cols << ", image " << p.geometry.imageShape.rows << "x"
            << p.geometry.imageShape.cols << ")\n";
  return 0;
}

// -------------------------------------------------------------------- fuse

struct FuseOptions {
  std::string bundle;
  std::vector<std::string> dataFiles;
  std::string sideInfoFile;
  int kernelSize = 41;
  int sampling = 4;
  std::vector<int> channels;
  SolverOptions solver;
  std::string out;
};

struct FuseChannelResult {
  SolveResult solve;
  ProblemGeometry geometry;
};

FuseChannelResult fuseChannel(const FuseOptions& o, const Image& f, const Image& sideInfo,
                              const ProblemGeometry& geometry) {
  SolveInputs in{f, sideInfo, geometry, o.solver.dtv()};
  const InitialIterates init = defaultInit(f, geometry, o.solver.initSigma);
  return {runSolver(o.solver, in, init), geometry};
}

void writeFuseOutputs(const std::string& dir, int channel, const FuseChannelResult& r,
                      Manifest& manifest) {
  const std::string tag = "_ch" + std::to_string(channel);
  const Image meaningful = clipBoundary(r.solve.u, r.geometry);

  const std::string reconFull = dir + "/recon_full" + tag + ".txt";
  const std::string recon = dir + "/recon" + tag + ".txt";
  const std::string kernel = dir + "/kernel" + tag + ".txt";
  const std::string reconPng = dir + "/recon" + tag + ".png";
  const std::string kernelPng = dir + "/kernel" + tag + ".png";
  const std::string trace = dir + "/trace" + tag + ".csv";

  writeImage(reconFull, r.solve.u, RasterFormat::MatrixText);
  writeImage(recon, meaningful, RasterFormat::MatrixText);
  writeImage(kernel, r.solve.k, RasterFormat::MatrixText);
  writePngRgb8(reconPng, renderImage(meaningful, Colormap::Parula));
  writePngRgb8(kernelPng, renderKernel(r.solve.k));
  r.solve.trace.writeCsv(trace);

  for (const std::string& path : {reconFull, recon, kernel, reconPng, kernelPng, trace})
    manifest.addArtifact(path);
}

int cmdFuse(const FuseOptions& o) {
  fs::create_directories(o.out);
  Manifest manifest(o.out, "fuse");
  manifest.setConfig(solverConfigJson(o.solver));

  std::vector<Image> channelData;
  Image sideInfo;
  ProblemGeometry geometry;

  if (!o.bundle.empty()) {
    const Problem p = readProblemBundle(o.bundle);
    channelData.push_back(p.f);
    sideInfo = p.sideInfo;
    geometry = p.geometry;
  } else {
    if (o.dataFiles.empty() || o.sideInfoFile.empty())
      throw BadParams("fuse: need --bundle or --data plus --side-info");
    sideInfo = readImage(o.sideInfoFile);
    for (const std::string& path : o.dataFiles) channelData.push_back(readImage(path));
    geometry = geometryFrom(shapeOf(channelData.front()), {o.kernelSize, o.kernelSize},
                            o.sampling);
    if (sideInfo.rows() != geometry.imageShape.rows ||
        sideInfo.cols() != geometry.imageShape.cols)
      throw GeometryMismatch("fuse: side info must have shape s*n + 2l = " +
                             std::to_string(geometry.imageShape.rows) + "x" +
                             std::to_string(geometry.imageShape.cols));
  }

  std::vector<int> channels = o.channels;
  if (channels.empty())
    for (int c = 0; c < int(channelData.size()); ++c) channels.push_back(c);
  for (const int c : channels)
    if (c < 0 || c >= int(channelData.size()))
      throw BadParams("fuse: channel index out of range: " + std::to_string(c));

  std::vector<FuseChannelResult> results(channels.size());
  const auto errors = parallelFor(int(channels.size()), [&](int i) {
    const Image& f = channelData[size_t(channels[size_t(i)])];
    requireShape(f, geometry.dataShape, "fuse data channel");
    results[size_t(i)] = fuseChannel(o, f, sideInfo, geometry);
  });

  bool anyFailed = false;
  for (size_t i = 0; i < channels.size(); ++i) {
    if (!errors[i].empty()) {
      anyFailed = true;
      std::cerr << "channel " << channels[i] << " failed: " << errors[i] << "\n";
      continue;
    }
    writeFuseOutputs(o.out, channels[i], results[i], manifest);
    std::cout << "channel " << channels[i]
              << ": final objective = " << results[i].solve.trace.rows.back().objective << "\n";
  }
  manifest.write();
  return anyFailed ? 1 : 0;
}

// ---------------------------------------------------------------- evaluate

struct EvaluateOptions {
  std::vector<std::string> recons;
  std::vector<std::string> truths;
  std::vector<std::string> traces;
  std::string bundle;
  Scalar scaleMin = 0;
  Scalar scaleMax = 1;
  bool rescale = false;
  std::string csv = "evaluate.csv";
  std::string out;
};

Image clipToMeaningful(const Image& truth, Shape2 targetShape) {
  if (truth.rows() == targetShape.rows && truth.cols() == targetShape.cols) return truth;
  const Index dr = truth.rows() - targetShape.rows, dc = truth.cols() - targetShape.cols;
  if (dr < 0 || dc < 0 || dr % 2 != 0 || dc % 2 != 0)
    throw ShapeMismatch("evaluate: truth cannot be clipped to the reconstruction shape");
  return truth.block(dr / 2, dc / 2, targetShape.rows, targetShape.cols);
}

int cmdEvaluate(const EvaluateOptions& o) {
  EvaluateOptions opt = o;
  Image bundleTruth;
  if (!opt.bundle.empty()) {
    const Problem p = readProblemBundle(opt.bundle);
    bundleTruth = p.truthImage;
    opt.scaleMin = p.scaleMin;
    opt.scaleMax = p.scaleMax;
    opt.rescale = true;
  }
  if (opt.recons.empty()) throw BadParams("evaluate: need at least one --recon");
  if (opt.truths.empty() && opt.bundle.empty())
    throw BadParams("evaluate: need --truth or --bundle");
  if (!opt.truths.empty() && opt.truths.size() != 1 && opt.truths.size() != opt.recons.size())
    throw BadParams("evaluate: --truth count must be 1 or match --recon count");
  if (!opt.traces.empty() && opt.traces.size() != opt.recons.size())
    throw BadParams("evaluate: --trace count must match --recon count");

  struct RowData {
    int channel;
    SimilarityReport report;
    Scalar finalObjective;
  };
  std::vector<RowData> rows;
  for (size_t i = 0; i < opt.recons.size(); ++i) {
    Image recon = readImage(opt.recons[i]);
    if (opt.rescale) recon = opt.scaleMin + recon * (opt.scaleMax - opt.scaleMin);

    Image truth = !opt.truths.empty()
                      ? readImage(opt.truths.size() == 1 ? opt.truths[0] : opt.truths[i])
                      : bundleTruth;
    truth = clipToMeaningful(truth, shapeOf(recon));

    RowData row;
    row.channel = int(i);
    row.report = similarity(recon, truth, 1.0);
    row.finalObjective = std::numeric_limits<Scalar>::quiet_NaN();
    if (!opt.traces.empty())
      row.finalObjective = SolverTrace::readCsv(opt.traces[i]).rows.back().objective;
    rows.push_back(row);
  }

  std::string csvPath = opt.csv;
  if (!opt.out.empty()) {
    fs::create_directories(opt.out);
    csvPath = opt.out + "/" + opt.csv;
  }
  std::ofstream outFile(csvPath);
  if (!outFile) throw Error("cannot write " + csvPath);
  outFile << "channel,ssim,mse,psnr,final_objective\n";
  char buf[256];
  for (const RowData& r : rows) {
    std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g,%.17g\n", r.channel, r.report.ssim,
                  r.report.meanSquaredError, r.report.psnr, r.finalObjective);
    outFile << buf;
    std::cout << "channel " << r.channel << ": ssim=" << r.report.ssim
              << " mse=" << r.report.meanSquaredError << " psnr=" << r.report.psnr << "\n";
  }
  return 0;
}

// ------------------------------------------------------------------- sweep

struct SweepOptions {
  std::string bundle;
  std::vector<Scalar> lambdaUGrid{0.1};
  std::vector<Scalar> lambdaKGrid{10.0};
  std::vector<Scalar> gammaGrid{0.9995};
  SolverOptions solver;
  std::string out;
};

int cmdSweep(const SweepOptions& o) {
  if (o.lambdaUGrid.empty() || o.lambdaKGrid.empty() || o.gammaGrid.empty())
    throw BadParams("sweep: grids must be non-empty");
  const Problem p = readProblemBundle(o.bundle);
  const Image truthMeaningful = clipBoundary(p.truthImage, p.geometry);

  struct Cell {
    Scalar lambdaU, lambdaK, gamma;
  };
  std::vector<Cell> cells;
  for (const Scalar lu : o.lambdaUGrid)
    for (const Scalar lk : o.lambdaKGrid)
      for (const Scalar g : o.gammaGrid) cells.push_back({lu, lk, g});

  std::vector<SweepRow> rows(cells.size());
  const auto errors = parallelFor(int(cells.size()), [&](int i) {
    const Cell& cell = cells[size_t(i)];
    SolverOptions s = o.solver;
    s.lambdaU = cell.lambdaU;
    s.lambdaK = cell.lambdaK;
    s.gamma = cell.gamma;

    SolveInputs in{p.f, p.sideInfo, p.geometry, s.dtv()};
    const SolveResult res = runSolver(s, in, defaultInit(p.f, p.geometry, s.initSigma));

    Image recon = clipBoundary(res.u, p.geometry);
    recon = p.scaleMin + recon * (p.scaleMax - p.scaleMin);
    const SimilarityReport rep = similarity(recon, truthMeaningful, 1.0);

    SweepRow row;
    row.lambdaU = cell.lambdaU;
    row.lambdaK = cell.lambdaK;
    row.gamma = cell.gamma;
    row.ssim = rep.ssim;
    row.mse = rep.meanSquaredError;
    row.psnr = rep.psnr;
    row.finalObjective = res.trace.rows.back().objective;
    rows[size_t(i)] = row;
  });

  bool anyFailed = false;
  for (size_t i = 0; i < cells.size(); ++i) {
    if (!errors[i].empty()) {
      anyFailed = true;
      rows[i].lambdaU = cells[i].lambdaU;
      rows[i].lambdaK = cells[i].lambdaK;
      rows[i].gamma = cells[i].gamma;
      rows[i].failed = true;
      std::cerr << "cell (" << cells[i].lambdaU << ", " << cells[i].lambdaK << ", "
                << cells[i].gamma << ") failed: " << errors[i] << "\n";
    }
  }

  fs::create_directories(o.out);
  const std::string csvPath = o.out + "/sweep.csv";
  writeSweepCsv(csvPath, rows);

  Manifest manifest(o.out, "sweep");
  manifest.addArtifact(csvPath);
  manifest.setConfig(solverConfigJson(o.solver));
  manifest.write();

  std::cout << "sweep finished: " << cells.size() << " cells into " << csvPath << "\n";
  return anyFailed ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"blind image fusion for hyperspectral super-resolution"};
  app.require_subcommand(1);
  app.set_config("--config", "", "key=value config file; command-line flags win");

  SimulateOptions sim;
  CLI::App* simulate = app.add_subcommand("simulate", "generate a synthetic problem bundle");
  simulate->add_option("--source", sim.source, "RGB source image (png)");
  simulate->add_option("--test-image-size", sim.testImageSize, "procedural source size")
      ->expected(2);
  simulate->add_option("--test-image-seed", sim.testImageSeed, "procedural source seed")
      ->capture_default_str();
  simulate->add_option("--kernel", sim.kernel, "disk | gaussian | dirac")
      ->check(CLI::IsMember({"disk", "gaussian", "dirac"}))
      ->capture_default_str();
  simulate->add_option("--kernel-size", sim.kernelSize, "odd kernel side")->capture_default_str();
  simulate->add_option("--sampling", sim.sampling, "sampling factor s")->capture_default_str();
  simulate->add_option("--noise-variance", sim.noiseVariance, "Gaussian noise variance")
      ->capture_default_str();
  simulate->add_option("--shift", sim.shift, "side information shift (rows cols)")->expected(2);
  simulate->add_option("--radius", sim.radius, "disk radius (<0: r/6)")->capture_default_str();
  simulate->add_option("--sigma", sim.sigma, "gaussian sigma (<0: r/8)")->capture_default_str();
  simulate->add_option("--offset", sim.offset, "gaussian center offset (rows cols)")->expected(2);
  simulate->add_option("--seed", sim.seed, "noise seed")->capture_default_str();
  simulate->add_option("--out", sim.out, "output bundle directory")->required();

  FuseOptions fuse;
  CLI::App* fuseCmd = app.add_subcommand("fuse", "reconstruct image and kernel from data");
  fuseCmd->add_option("--bundle", fuse.bundle, "problem bundle directory");
  fuseCmd->add_option("--data", fuse.dataFiles, "data image per channel (repeatable)");
  fuseCmd->add_option("--side-info", fuse.sideInfoFile, "high-resolution guide image");
  fuseCmd->add_option("--kernel-size", fuse.kernelSize, "odd kernel side")
      ->capture_default_str();
  fuseCmd->add_option("--sampling", fuse.sampling, "sampling factor s")->capture_default_str();
  fuseCmd->add_option("--channels", fuse.channels, "channel indices to process");
  addSolverOptions(fuseCmd, fuse.solver);
  fuseCmd->add_option("--out", fuse.out, "output run directory")->required();

  EvaluateOptions eval;
  CLI::App* evalCmd = app.add_subcommand("evaluate", "score reconstructions against truth");
  evalCmd->add_option("--recon", eval.recons, "reconstruction (meaningful part, repeatable)");
  evalCmd->add_option("--truth", eval.truths, "ground truth image(s)");
  evalCmd->add_option("--trace", eval.traces, "trace csv per reconstruction");
  evalCmd->add_option("--bundle", eval.bundle, "bundle supplying truth and value scale");
  evalCmd->add_option("--scale-min", eval.scaleMin, "reconstruction scale minimum");
  evalCmd->add_option("--scale-max", eval.scaleMax, "reconstruction scale maximum");
  evalCmd->add_flag("--rescale", eval.rescale, "map reconstructions through the scale");
  evalCmd->add_option("--csv", eval.csv, "output csv name")->capture_default_str();
  evalCmd->add_option("--out", eval.out, "output directory");

  SweepOptions sweep;
  CLI::App* sweepCmd = app.add_subcommand("sweep", "grid over lambda_u, lambda_k, gamma");
  sweepCmd->add_option("--bundle", sweep.bundle, "problem bundle directory")->required();
  sweepCmd->add_option("--lambda-u-grid", sweep.lambdaUGrid, "lambda_u values");
  sweepCmd->add_option("--lambda-k-grid", sweep.lambdaKGrid, "lambda_k values");
  sweepCmd->add_option("--gamma-grid", sweep.gammaGrid, "gamma values");
  addSolverOptions(sweepCmd, sweep.solver);
  sweepCmd->add_option("--out", sweep.out, "output run directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate->parsed()) return cmdSimulate(sim);
    if (fuseCmd->parsed()) return cmdFuse(fuse);
    if (evalCmd->parsed()) return cmdEvaluate(eval);
    if (sweepCmd->parsed()) return cmdSweep(sweep);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
