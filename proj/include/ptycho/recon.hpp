#ifndef PTYCHO_RECON_HPP
#define PTYCHO_RECON_HPP

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "ptycho/field.hpp"
#include "ptycho/forward.hpp"

namespace ptycho
{

struct Momentum
{
  double friction = 0.5;
  std::size_t period = 2;   // sweeps between velocity updates
};

struct ReconConfig
{
  double alpha = 1.0;       // object step
  double beta = 1.0;        // probe step
  std::size_t iterations = 100;
  std::uint64_t shuffleSeed = 0;
  bool probeRefine = false;
  std::optional<Momentum> momentum;

  void validate() const;
};

struct CostSample
{
  std::size_t sweep = 0;
  double cost = 0.0;
};

struct ReconState
{
  RefractiveObject object;
  Probe probe;
  std::size_t iteration = 0;
  std::vector<CostSample> costHistory;
  std::size_t skippedUpdates = 0;   // positions skipped for a zero exit wave
};

/// L = sum_{j,q} (sqrt(I_j(q)) - sqrt(D_j(q)))^2 for the current estimates.
double cost(const ReconState& state, const DiffractionStack& stack);

/// Replaces the modulus of `psiHat` by sqrt(measured), keeping its phase.
/// Where psiHat is exactly zero the phase is taken as zero.
ComplexField amplitudeProject(const ComplexField& psiHat, const RealField& measured);

enum class UpdateStatus
{
  Updated,
  Skipped
};

/// Stateful reconstruction driver holding FFT plans, scratch buffers and the
/// measured amplitudes of one stack. The stack must outlive the engine.
class ReconEngine
{
public:
  ReconEngine(const DiffractionStack& stack, ReconState state, ReconConfig config);
  ~ReconEngine();
  ReconEngine(ReconEngine&&) noexcept;
  ReconEngine& operator=(ReconEngine&&) noexcept;

  /// One stochastic update for scan position j.
  UpdateStatus updatePosition(std::size_t j);

  /// Visits every position once in a fresh seeded random order, applies the
  /// momentum step when due and appends the post-sweep cost to the history.
  void sweep();

  double cost() const;

  const ReconState& state() const { return mState; }
  ReconState takeState() { return std::move(mState); }
  const ReconConfig& config() const { return mConfig; }

private:
  struct Workspace;

  const DiffractionStack* mStack;
  ReconState mState;
  ReconConfig mConfig;
  std::unique_ptr<Workspace> mWork;
};

/// Single update of `state` at position j (allocates a temporary engine).
UpdateStatus updatePosition(ReconState& state, const DiffractionStack& stack, std::size_t j,
                            const ReconConfig& config);

using SweepCallback = std::function<void(const ReconState&)>;

/// Runs config.iterations sweeps from the given initial estimates.
ReconState run(const DiffractionStack& stack, RefractiveObject initObject, Probe initProbe,
               const ReconConfig& config, const SweepCallback& onSweep = {});

/// O~_0 = 0 everywhere, i.e. an object wave of 1.
RefractiveObject initFlat(Shape shape, double pixelSize);

struct PixelRegion
{
  std::size_t x0 = 0;
  std::size_t y0 = 0;
  std::size_t width = 0;
  std::size_t height = 0;
};

/// Number of 2x2 plaquettes inside `region` whose wrapped-phase circulation of
/// arg(exp(i O~)) is +-2 pi.
std::size_t countPhaseResidues(const RefractiveObject& obj, const PixelRegion& region);

} // namespace ptycho

#endif
