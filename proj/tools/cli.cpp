#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <optional>
#include <ostream>

#include "ptycho/error.hpp"
#include "ptycho/fft.hpp"
#include "ptycho/forward.hpp"
#include "ptycho/moments.hpp"
#include "ptycho/recon.hpp"
#include "ptycho/scan_io.hpp"
#include "ptycho/wavefront.hpp"

#ifndef PTYCHO_VERSION
#define PTYCHO_VERSION "0.0.0"
#endif

namespace ptycho::cli
{

namespace
{

namespace fs = std::filesystem;
using nlohmann::json;

constexpr const char* kRunSummary = "run.json";

json versions()
{
  return {{"ptycho", PTYCHO_VERSION}, {"fft", fftBackendVersion()}, {"scan_format", io::kScanFormatVersion}};
}

void writeRunSummary(const fs::path& path, const std::string& command, const json& params,
                     const json& results)
{
  json j;
  j["command"] = command;
  j["parameters"] = params;
  j["results"] = results;
  j["versions"] = versions();
  if (path.has_parent_path())
    fs::create_directories(path.parent_path());
  std::ofstream os(path);
  if (!os)
    throw IoError("cannot write " + path.string());
  os << j.dump(2) << '\n';
}

struct SimulateOpts
{
  std::string phantom = "siemens";
  std::size_t grid = 0;
  std::size_t probeSize = 0;
  double probeFwhm = 0.0;
  std::size_t step = 2;
  double defocusLinear = 0.0;
  double defocusQuadratic = 0.0;
  double photons = 1e6;
  bool poisson = false;
  std::string out;
};

struct MomentsOpts
{
  std::string scan;
  bool corrected = false;
  std::string probe;
  std::string out;
};

struct IntegrateOpts
{
  std::string moments;
  std::string out;
};

struct ReconOpts
{
  std::string scan;
  std::string init = "flat";
  std::string wavefront;
  std::string probe;
  std::size_t iters = 100;
  double alpha = 1.0;
  double beta = 1.0;
  std::optional<double> momentum;
  std::size_t period = 2;
  bool probeRefine = false;
  std::string out;
};

struct RenderOpts
{
  std::string field;
  std::string view = "phase";
  std::string out;
};

int simulate(const SimulateOpts& o, std::uint64_t seed, std::ostream& out)
{
  const bool siemens = o.phantom == "siemens";
  const std::size_t grid = o.grid ? o.grid : (siemens ? 213 : 200);
  const std::size_t q = o.probeSize ? o.probeSize : (siemens ? 32 : 16);
  const double fwhm = o.probeFwhm > 0.0 ? o.probeFwhm : (siemens ? 7.0 : 4.0);

  RefractiveObject object;
  json phantom;
  if (siemens)
  {
    SiemensStarParams p;
    p.grid = grid;
    object = makeSiemensStar(p);
    phantom = {{"kind", "siemens"}, {"grid", grid}, {"spokes", p.spokes},
               {"min_transmission", p.minTransmission}, {"phase_shift", p.phaseShift}};
  }
  else
  {
    BulkyPhantomParams p;
    p.grid = grid;
    p.diameter = 0.8 * static_cast<double>(grid);
    p.edgeWidth = 0.08 * static_cast<double>(grid);
    object = makeBulkyPhantom(p);
    phantom = {{"kind", "bulky"}, {"grid", grid}, {"diameter", p.diameter},
               {"edge_width", p.edgeWidth}, {"peak_phase", p.peakPhase}};
  }

  const Probe probe = makeDefocusedProbe(q, 1.0, fwhm, o.photons, {o.defocusLinear, 0.0},
                                         o.defocusQuadratic);
  const ScanPlan plan = makeRasterPlan(object.shape(), 1.0, probe.shape(), o.step);
  std::optional<PoissonNoise> noise;
  if (o.poisson)
    noise = PoissonNoise{o.photons, seed};
  const DiffractionStack stack = simulateScan(object, probe, plan, noise);

  json params = {{"phantom", phantom},   {"probe_size", q},
                 {"probe_fwhm", fwhm},   {"step", o.step},
                 {"defocus_linear", o.defocusLinear}, {"defocus_quadratic", o.defocusQuadratic},
                 {"photons", o.photons}, {"poisson", o.poisson},
                 {"seed", seed}};
  const fs::path dir = o.out;
  io::writeScan(stack, dir, params);
  io::writeField(probe.field(), dir / "probe.f32");
  io::writeField(object.field(), dir / "object.f32");
  writeRunSummary(dir / kRunSummary, "simulate", params,
                  {{"positions", stack.size()}, {"total_counts", stack.totalCounts()}});
  out << "simulated " << stack.size() << " patterns into " << dir.string() << '\n';
  return 0;
}

Probe loadProbe(const std::string& file, const fs::path& scanDir)
{
  fs::path path = file;
  if (path.empty())
  {
    path = scanDir / "probe.f32";
    if (!fs::exists(path))
      throw InvalidArgument("no probe: pass --probe or place probe.f32 in the scan directory");
  }
  return Probe(io::readComplexField(path));
}

MomentMaps computeMoments(const DiffractionStack& stack, const Probe* probe)
{
  return probe ? diffPhaseCorrected(stack, *probe) : diffPhaseNaive(stack);
}

int moments(const MomentsOpts& o, std::ostream& out)
{
  if (o.corrected && o.probe.empty())
    throw InvalidArgument("--corrected requires --probe");
  const DiffractionStack stack = io::readScan(o.scan);
  std::optional<Probe> probe;
  if (o.corrected)
    probe = Probe(io::readComplexField(o.probe));
  const MomentMaps maps = computeMoments(stack, probe ? &*probe : nullptr);
  io::writeMomentMaps(maps, o.out);
  writeRunSummary(fs::path(o.out) / kRunSummary, "moments",
                  {{"scan", o.scan}, {"corrected", o.corrected}, {"probe", o.probe}},
                  {{"raster", {maps.raster.shape.width, maps.raster.shape.height}}});
  out << "moments written to " << o.out << '\n';
  return 0;
}

io::Wavefront integrate(const MomentMaps& maps)
{
  return {maps.raster, maps.transmissionSq,
          fourierIntegrate(maps.phiX, maps.phiY, maps.raster.pixel_size)};
}

int integrateCmd(const IntegrateOpts& o, std::ostream& out)
{
  const io::Wavefront wf = integrate(io::readMomentMaps(o.moments));
  io::writeWavefront(wf, o.out);
  writeRunSummary(fs::path(o.out) / kRunSummary, "integrate", {{"moments", o.moments}}, json::object());
  out << "wavefront written to " << o.out << '\n';
  return 0;
}

RefractiveObject initialObject(const ReconOpts& o, const DiffractionStack& stack,
                               const Probe& probe)
{
  if (o.init == "flat")
    return initFlat(stack.plan.objectShape, stack.plan.pixelSize);
  if (!o.wavefront.empty())
  {
    const io::Wavefront wf = io::readWavefront(o.wavefront);
    return buildInitObject(wf.transmissionSq, wf.phase, stack.plan);
  }
  const io::Wavefront wf = integrate(computeMoments(stack, o.probe.empty() ? nullptr : &probe));
  return buildInitObject(wf.transmissionSq, wf.phase, stack.plan);
}

ReconConfig reconConfig(const ReconOpts& o, std::uint64_t seed)
{
  ReconConfig cfg;
  cfg.alpha = o.alpha;
  cfg.beta = o.beta;
  cfg.iterations = o.iters;
  cfg.shuffleSeed = seed;
  cfg.probeRefine = o.probeRefine;
  if (o.momentum)
    cfg.momentum = Momentum{*o.momentum, o.period};
  cfg.validate();
  return cfg;
}

json reconParams(const ReconOpts& o, std::uint64_t seed)
{
  json j = {{"scan", o.scan},   {"init", o.init},         {"wavefront", o.wavefront},
            {"probe", o.probe}, {"iters", o.iters},       {"alpha", o.alpha},
            {"beta", o.beta},   {"probe_refine", o.probeRefine}, {"seed", seed}};
  j["momentum"] = o.momentum ? json{{"friction", *o.momentum}, {"period", o.period}} : json(nullptr);
  return j;
}

PixelRegion scannedRegion(const ScanPlan& plan)
{
  if (!plan.raster)
    return {0, 0, plan.objectShape.width, plan.objectShape.height};
  const GridGeometry g = plan.rasterGeometry();
  const double ps = plan.pixelSize;
  const auto step = static_cast<std::size_t>(std::lround(plan.raster->step / ps));
  return {static_cast<std::size_t>(std::lround(g.origin.x / ps)),
          static_cast<std::size_t>(std::lround(g.origin.y / ps)),
          (plan.raster->cols - 1) * step + 1, (plan.raster->rows - 1) * step + 1};
}

json reconResults(const ReconState& s, const DiffractionStack& stack)
{
  const double last = s.costHistory.empty() ? cost(s, stack) : s.costHistory.back().cost;
  return {{"sweeps", s.iteration},
          {"final_cost", last},
          {"skipped_updates", s.skippedUpdates},
          {"phase_residues", countPhaseResidues(s.object, scannedRegion(stack.plan))}};
}

int reconstruct(const ReconOpts& o, std::uint64_t seed, std::ostream& out)
{
  if (o.init != "flat" && o.init != "wavefront")
    throw InvalidArgument("--init must be flat or wavefront");
  const DiffractionStack stack = io::readScan(o.scan);
  const Probe probe = loadProbe(o.probe, o.scan);
  const ReconConfig cfg = reconConfig(o, seed);
  RefractiveObject init = initialObject(o, stack, probe);

  const ReconState s = run(stack, std::move(init), probe, cfg);
  const fs::path dir = o.out;
  fs::create_directories(dir);
  io::writeField(s.object.field(), dir / "object.f32");
  io::writeField(s.probe.field(), dir / "probe.f32");
  io::writeConvergenceCsv(s.costHistory, dir / "convergence.csv");
  const json results = reconResults(s, stack);
  writeRunSummary(dir / kRunSummary, "reconstruct", reconParams(o, seed), results);
  out << "reconstructed " << s.iteration << " sweeps, final cost " << results["final_cost"].get<double>()
      << '\n';
  return 0;
}

std::optional<std::size_t> sweepsToThreshold(const std::vector<CostSample>& h, double threshold)
{
  for (const CostSample& c : h)
    if (c.cost <= threshold)
      return c.sweep;
  return std::nullopt;
}

int compare(const ReconOpts& o, std::uint64_t seed, std::ostream& out)
{
  const DiffractionStack stack = io::readScan(o.scan);
  const Probe probe = loadProbe(o.probe, o.scan);
  const fs::path dir = o.out;
  fs::create_directories(dir);

  ReconOpts flatOpts = o;
  flatOpts.init = "flat";
  ReconOpts waveOpts = o;
  waveOpts.init = "wavefront";
  const ReconConfig cfg = reconConfig(o, seed);
  const ReconState flat = run(stack, initialObject(flatOpts, stack, probe), probe, cfg);
  const ReconState wave = run(stack, initialObject(waveOpts, stack, probe), probe, cfg);

  io::writeConvergenceCsv(flat.costHistory, dir / "convergence_flat.csv");
  io::writeConvergenceCsv(wave.costHistory, dir / "convergence_wavefront.csv");
  io::writeField(flat.object.field(), dir / "object_flat.f32");
  io::writeField(wave.object.field(), dir / "object_wavefront.f32");

  const double threshold = flat.costHistory.empty() ? cost(flat, stack) : flat.costHistory.back().cost;
  const auto toJson = [](std::optional<std::size_t> v) { return v ? json(*v) : json(nullptr); };
  const auto nFlat = sweepsToThreshold(flat.costHistory, threshold);
  const auto nWave = sweepsToThreshold(wave.costHistory, threshold);
  json summary = {{"threshold", threshold},
                  {"sweeps_to_threshold", {{"flat", toJson(nFlat)}, {"wavefront", toJson(nWave)}}},
                  {"flat", reconResults(flat, stack)},
                  {"wavefront", reconResults(wave, stack)}};
  {
    std::ofstream os(dir / "compare.json");
    os << summary.dump(2) << '\n';
  }
  json params = reconParams(o, seed);
  params.erase("init");
  writeRunSummary(dir / kRunSummary, "compare", params, summary);
  out << "sweeps to threshold: flat " << toJson(nFlat).dump() << ", wavefront "
      << toJson(nWave).dump() << '\n';
  return 0;
}

int render(const RenderOpts& o, std::ostream& out)
{
  const io::View view = io::parseView(o.view);
  const auto field = io::readField(o.field);
  if (const auto* r = std::get_if<RealField>(&field))
  {
    ComplexField c(r->shape(), r->pixelSize());
    for (std::size_t i = 0; i < c.size(); ++i)
      c[i] = (*r)[i];
    io::renderPgm(c, view, o.out);
  }
  else
  {
    io::renderPgm(std::get<ComplexField>(field), view, o.out);
  }
  writeRunSummary(o.out + ".run.json", "render",
                  {{"field", o.field}, {"view", io::viewName(view)}}, json::object());
  out << "rendered " << o.out << '\n';
  return 0;
}

void addReconOptions(CLI::App* sub, ReconOpts& o)
{
  sub->add_option("--scan", o.scan, "Scan directory")->required();
  sub->add_option("--probe", o.probe, "Probe field (defaults to <scan>/probe.f32)");
  sub->add_option("--iters", o.iters, "Sweeps")->capture_default_str();
  sub->add_option("--alpha", o.alpha, "Object step size")->capture_default_str();
  sub->add_option("--beta", o.beta, "Probe step size")->capture_default_str();
  sub->add_option("--momentum", o.momentum, "Momentum friction");
  sub->add_option("--period", o.period, "Sweeps between momentum steps")->capture_default_str();
  sub->add_flag("--probe-refine", o.probeRefine, "Update the probe as well");
  sub->add_option("--out", o.out, "Output directory")->required();
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
  CLI::App app{"Ptychography simulation and reconstruction", "ptycho"};
  app.require_subcommand(1);
  app.fallthrough();
  std::uint64_t seed = 0;
  app.add_option("--seed", seed, "Random seed")->capture_default_str();

  SimulateOpts sim;
  auto* simCmd = app.add_subcommand("simulate", "Simulate a noiseless or Poisson scan");
  simCmd->add_option("--phantom", sim.phantom)->check(CLI::IsMember({"siemens", "bulky"}))->capture_default_str();
  simCmd->add_option("--grid", sim.grid, "Object grid size (default per phantom)");
  simCmd->add_option("--probe-size", sim.probeSize, "Pattern size Q (default per phantom)");
  simCmd->add_option("--probe-fwhm", sim.probeFwhm, "Probe FWHM in pixels (default per phantom)");
  simCmd->add_option("--step", sim.step, "Scan step in pixels")->capture_default_str();
  simCmd->add_option("--defocus-linear", sim.defocusLinear, "Linear probe phase along x, rad/px")->capture_default_str();
  simCmd->add_option("--defocus-quadratic", sim.defocusQuadratic, "Quadratic probe phase, rad/px^2")->capture_default_str();
  simCmd->add_option("--photons", sim.photons, "Probe power in photons")->capture_default_str();
  simCmd->add_flag("--poisson", sim.poisson, "Draw Poisson counts");
  simCmd->add_option("--out", sim.out, "Output directory")->required();

  MomentsOpts mom;
  auto* momCmd = app.add_subcommand("moments", "Transmission and differential phase maps");
  momCmd->add_option("--scan", mom.scan)->required();
  momCmd->add_flag("--corrected", mom.corrected, "Reference virtual patterns instead of the flat");
  momCmd->add_option("--probe", mom.probe, "Probe field for --corrected");
  momCmd->add_option("--out", mom.out)->required();

  IntegrateOpts integ;
  auto* intCmd = app.add_subcommand("integrate", "Integrate moment maps into a wavefront");
  intCmd->add_option("--moments", integ.moments)->required();
  intCmd->add_option("--out", integ.out)->required();

  ReconOpts rec;
  auto* recCmd = app.add_subcommand("reconstruct", "Run the reconstruction");
  addReconOptions(recCmd, rec);
  recCmd->add_option("--init", rec.init)->check(CLI::IsMember({"flat", "wavefront"}))->capture_default_str();
  recCmd->add_option("--wavefront", rec.wavefront, "Precomputed wavefront directory");

  ReconOpts cmp;
  cmp.iters = 400;
  auto* cmpCmd = app.add_subcommand("compare", "Flat and wavefront initialization side by side");
  addReconOptions(cmpCmd, cmp);

  RenderOpts ren;
  auto* renCmd = app.add_subcommand("render", "Render a field to PGM");
  renCmd->add_option("--field", ren.field)->required();
  renCmd->add_option("--view", ren.view)->check(CLI::IsMember({"modulus", "phase", "real", "imag"}))->capture_default_str();
  renCmd->add_option("--out", ren.out)->required();

  std::vector<const char*> argv{"ptycho"};
  for (const auto& a : args)
    argv.push_back(a.c_str());
  try
  {
    app.parse(static_cast<int>(argv.size()), argv.data());
  }
  catch (const CLI::ParseError& e)
  {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try
  {
    if (*simCmd)
      return simulate(sim, seed, out);
    if (*momCmd)
      return moments(mom, out);
    if (*intCmd)
      return integrateCmd(integ, out);
    if (*recCmd)
      return reconstruct(rec, seed, out);
    if (*cmpCmd)
      return compare(cmp, seed, out);
    return render(ren, out);
  }
  catch (const std::exception& e)
  {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

} // namespace ptycho::cli
