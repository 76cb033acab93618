#ifndef PTYCHO_WAVEFRONT_HPP
#define PTYCHO_WAVEFRONT_HPP

#include <utility>

#include "ptycho/field.hpp"
#include "ptycho/forward.hpp"

namespace ptycho
{

/// Integrated phase on the scan raster, in radians, with zero spatial mean.
struct PhaseMap
{
  RealField phase;
  bool meanFree = true;
};

/// Doubles both gradient maps by mirroring into a 2H x 2W array.
///
/// The input occupies the lower-right block (columns W..2W-1, rows H..2H-1,
/// i.e. +x, +y). phi_x is odd under the x-mirror and even under the y-mirror;
/// phi_y the other way round. The mirror is half-sample symmetric, so the
/// integrated phase is the even extension of the original.
std::pair<RealField, RealField> antisymmetricExtend(const RealField& phiX,
                                                    const RealField& phiY);

/// Integrates two gradient maps (rad/m on a raster of pitch `step` m) into a
/// mean-free phase in radians.
///
/// The mean gradient is integrated analytically as a plane; the remaining
/// gradient is integrated in Fourier space on the antisymmetric extension,
/// dividing (F{phi_x} + i F{phi_y}) by i (q_x + i q_y) with the DC term set to zero.
PhaseMap fourierIntegrate(const RealField& phiX, const RealField& phiY, double step);

/// Transmission floor applied before taking the logarithm of o^2.
inline constexpr double kTransmissionFloor = 1e-6;

/// Builds O~_0(r) = Phi(r) - i ln o(r) on the object grid of `plan`, where o^2
/// and Phi are bilinearly upsampled from the scan raster (edge-clamped) and
/// o = sqrt(max(o^2, 1e-6)). exp(i O~_0) = o e^{i Phi}.
RefractiveObject buildInitObject(const RealField& transmissionSq, const PhaseMap& phase,
                                 const ScanPlan& plan);

} // namespace ptycho

#endif
