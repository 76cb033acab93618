#include "ptycho/recon.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "ptycho/fft.hpp"
#include "ptycho/sampling.hpp"

namespace ptycho
{

void ReconConfig::validate() const
{
  if (!(alpha > 0.0 && alpha <= 2.0))
    throw InvalidArgument("alpha must lie in (0, 2]");
  if (!(beta > 0.0 && beta <= 2.0))
    throw InvalidArgument("beta must lie in (0, 2]");
  if (iterations < 1)
    throw InvalidArgument("at least one iteration is required");
  if (momentum)
  {
    if (!(momentum->friction >= 0.0 && momentum->friction < 1.0))
      throw InvalidArgument("momentum friction must lie in [0, 1)");
    if (momentum->period < 1)
      throw InvalidArgument("momentum period must be at least one sweep");
  }
}

ComplexField amplitudeProject(const ComplexField& psiHat, const RealField& measured)
{
  if (psiHat.shape() != measured.shape())
    throw InvalidArgument("amplitude projection shapes differ");
  ComplexField out(psiHat.shape(), psiHat.pixelSize());
  for (std::size_t i = 0; i < out.size(); ++i)
  {
    if (measured[i] < 0.0)
      throw InvalidArgument("measured intensity is negative");
    const double amp = std::sqrt(measured[i]);
    const double mod = std::abs(psiHat[i]);
    out[i] = mod > 0.0 ? psiHat[i] * (amp / mod) : Complex(amp, 0.0);
  }
  return out;
}

namespace
{

// exp(i z) for complex z.
inline Complex unitWave(const Complex& z)
{
  const double a = std::exp(-z.imag());
  return {a * std::cos(z.real()), a * std::sin(z.real())};
}

} // namespace

struct ReconEngine::Workspace
{
  Fft2 fft;
  std::vector<PatchWindow> windows;
  std::vector<double> amplitudes;   // sqrt(D_j), pattern-major
  std::vector<Complex> wave, psi, spectrum, revised;
  std::vector<std::size_t> order;
  std::mt19937_64 rng;
  ComplexField snapshot;            // momentum reference
  ComplexField velocity;

  Workspace(const DiffractionStack& stack, std::uint64_t seed)
    : fft(stack.plan.patternShape.width, stack.plan.patternShape.height), rng(seed)
  {
    const std::size_t n = stack.plan.patternShape.size();
    windows.reserve(stack.size());
    for (const Vec2& p : stack.plan.positions)
      windows.push_back(patchWindow(p, stack.plan.pixelSize, stack.plan.patternShape));
    amplitudes.resize(stack.size() * n);
    for (std::size_t j = 0; j < stack.size(); ++j)
      for (std::size_t k = 0; k < n; ++k)
      {
        const double d = stack.patterns[j][k];
        if (d < 0.0 || !std::isfinite(d))
          throw InvalidArgument("pattern " + std::to_string(j) +
                                " has a negative or non-finite intensity");
        amplitudes[j * n + k] = std::sqrt(d);
      }
    wave.resize(n);
    psi.resize(n);
    spectrum.resize(n);
    revised.resize(n);
    order.resize(stack.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
  }

  std::span<const double> amplitude(std::size_t j)
  {
    const std::size_t n = psi.size();
    return {amplitudes.data() + j * n, n};
  }
};

ReconEngine::ReconEngine(const DiffractionStack& stack, ReconState state, ReconConfig config)
  : mStack(&stack), mState(std::move(state)), mConfig(config)
{
  mConfig.validate();
  stack.plan.validate();
  if (stack.patterns.size() != stack.plan.size())
    throw InvalidArgument("stack and plan sizes differ");
  if (mState.object.shape() != stack.plan.objectShape)
    throw InvalidArgument("initial object does not match the scan object grid");
  if (mState.probe.shape() != stack.plan.patternShape)
    throw InvalidArgument("initial probe does not match the pattern shape");
  mWork = std::make_unique<Workspace>(stack, mConfig.shuffleSeed);
  if (mConfig.momentum)
  {
    mWork->snapshot = mState.object.field();
    mWork->velocity = ComplexField(mState.object.shape(), mState.object.pixelSize());
  }
}

ReconEngine::~ReconEngine() = default;
ReconEngine::ReconEngine(ReconEngine&&) noexcept = default;
ReconEngine& ReconEngine::operator=(ReconEngine&&) noexcept = default;

UpdateStatus ReconEngine::updatePosition(std::size_t j)
{
  if (j >= mStack->size())
    throw InvalidArgument("scan index " + std::to_string(j) + " out of range");

  Workspace& ws = *mWork;
  const PatchWindow& win = ws.windows[j];
  const std::size_t pw = win.shape.width;
  const std::size_t ph = win.shape.height;
  ComplexField& obj = mState.object.field();
  ComplexField& probe = mState.probe.field();
  const Complex I(0.0, 1.0);

  double maxPsi = 0.0;
  double maxWave = 0.0;
  for (std::size_t y = 0; y < ph; ++y)
  {
    const Complex* row = &obj(static_cast<std::size_t>(win.x0), static_cast<std::size_t>(win.y0) + y);
    for (std::size_t x = 0; x < pw; ++x)
    {
      const std::size_t k = y * pw + x;
      ws.wave[k] = unitWave(row[x]);
      ws.psi[k] = ws.wave[k] * probe[k];
      maxPsi = std::max(maxPsi, std::norm(ws.psi[k]));
      maxWave = std::max(maxWave, std::norm(ws.wave[k]));
    }
  }
  if (!(maxPsi > 0.0))
  {
    ++mState.skippedUpdates;
    return UpdateStatus::Skipped;
  }

  ws.fft.forward(ws.psi, ws.spectrum);
  const auto amp = ws.amplitude(j);
  for (std::size_t k = 0; k < ws.spectrum.size(); ++k)
  {
    const double mod = std::sqrt(std::norm(ws.spectrum[k]));
    ws.spectrum[k] = mod > 0.0 ? ws.spectrum[k] * (amp[k] / mod) : Complex(amp[k], 0.0);
  }
  ws.fft.inverse(ws.spectrum, ws.revised);

  const double objStep = mConfig.alpha / maxPsi;
  const double probeStep = mConfig.probeRefine && maxWave > 0.0 ? mConfig.beta / maxWave : 0.0;
  for (std::size_t y = 0; y < ph; ++y)
  {
    Complex* row = &obj(static_cast<std::size_t>(win.x0), static_cast<std::size_t>(win.y0) + y);
    for (std::size_t x = 0; x < pw; ++x)
    {
      const std::size_t k = y * pw + x;
      const Complex delta = ws.revised[k] - ws.psi[k];
      row[x] += objStep * std::conj(I * ws.psi[k]) * delta;
      if (probeStep > 0.0)
        probe[k] += probeStep * std::conj(ws.wave[k]) * delta;
    }
  }
  return UpdateStatus::Updated;
}

double ReconEngine::cost() const
{
  Workspace& ws = *mWork;
  const ComplexField& obj = mState.object.field();
  const ComplexField& probe = mState.probe.field();
  double total = 0.0;
  for (std::size_t j = 0; j < mStack->size(); ++j)
  {
    const PatchWindow& win = ws.windows[j];
    const std::size_t pw = win.shape.width;
    for (std::size_t y = 0; y < win.shape.height; ++y)
    {
      const Complex* row = &obj(static_cast<std::size_t>(win.x0), static_cast<std::size_t>(win.y0) + y);
      for (std::size_t x = 0; x < pw; ++x)
        ws.psi[y * pw + x] = unitWave(row[x]) * probe[y * pw + x];
    }
    ws.fft.forward(ws.psi, ws.spectrum);
    const auto amp = ws.amplitude(j);
    for (std::size_t k = 0; k < ws.spectrum.size(); ++k)
    {
      const double r = std::sqrt(std::norm(ws.spectrum[k])) - amp[k];
      total += r * r;
    }
  }
  return total;
}

void ReconEngine::sweep()
{
  Workspace& ws = *mWork;
  std::shuffle(ws.order.begin(), ws.order.end(), ws.rng);
  for (std::size_t j : ws.order)
    updatePosition(j);
  ++mState.iteration;

  if (mConfig.momentum && mState.iteration % mConfig.momentum->period == 0)
  {
    const double eta = mConfig.momentum->friction;
    ComplexField& obj = mState.object.field();
    for (std::size_t i = 0; i < obj.size(); ++i)
    {
      ws.velocity[i] = eta * ws.velocity[i] + (obj[i] - ws.snapshot[i]);
      obj[i] += eta * ws.velocity[i];
    }
    ws.snapshot = obj;
  }

  mState.costHistory.push_back({mState.iteration, cost()});
}

UpdateStatus updatePosition(ReconState& state, const DiffractionStack& stack, std::size_t j,
                            const ReconConfig& config)
{
  ReconConfig single = config;
  single.momentum.reset();
  ReconEngine engine(stack, std::move(state), single);
  UpdateStatus status = UpdateStatus::Skipped;
  try
  {
    status = engine.updatePosition(j);
  }
  catch (...)
  {
    state = engine.takeState();
    throw;
  }
  state = engine.takeState();
  return status;
}

double cost(const ReconState& state, const DiffractionStack& stack)
{
  ReconConfig config;
  ReconEngine engine(stack, state, config);
  return engine.cost();
}

ReconState run(const DiffractionStack& stack, RefractiveObject initObject, Probe initProbe,
               const ReconConfig& config, const SweepCallback& onSweep)
{
  ReconState state;
  state.object = std::move(initObject);
  state.probe = std::move(initProbe);
  ReconEngine engine(stack, std::move(state), config);
  for (std::size_t s = 0; s < config.iterations; ++s)
  {
    engine.sweep();
    if (onSweep)
      onSweep(engine.state());
  }
  return engine.takeState();
}

RefractiveObject initFlat(Shape shape, double pixelSize)
{
  return RefractiveObject(ComplexField(shape, pixelSize));
}

std::size_t countPhaseResidues(const RefractiveObject& obj, const PixelRegion& region)
{
  const ComplexField& f = obj.field();
  if (region.x0 + region.width > f.width() || region.y0 + region.height > f.height())
    throw InvalidArgument("residue region exceeds the object grid");
  if (region.width < 2 || region.height < 2)
    return 0;

  constexpr double twoPi = 2.0 * std::numbers::pi;
  // arg(exp(i O~)) depends only on Re O~.
  auto wrapped = [&](std::size_t x, std::size_t y) { return std::remainder(f(x, y).real(), twoPi); };
  auto wrapDiff = [&](double a, double b) { return std::remainder(b - a, twoPi); };

  std::size_t count = 0;
  for (std::size_t y = region.y0; y + 1 < region.y0 + region.height; ++y)
    for (std::size_t x = region.x0; x + 1 < region.x0 + region.width; ++x)
    {
      const double p00 = wrapped(x, y);
      const double p10 = wrapped(x + 1, y);
      const double p11 = wrapped(x + 1, y + 1);
      const double p01 = wrapped(x, y + 1);
      const double circulation =
          wrapDiff(p00, p10) + wrapDiff(p10, p11) + wrapDiff(p11, p01) + wrapDiff(p01, p00);
      if (std::abs(circulation) > std::numbers::pi)
        ++count;
    }
  return count;
}

} // namespace ptycho
