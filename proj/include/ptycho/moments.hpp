#ifndef PTYCHO_MOMENTS_HPP
#define PTYCHO_MOMENTS_HPP

#include "ptycho/field.hpp"
#include "ptycho/forward.hpp"

namespace ptycho
{

/// STXM-like maps on the scan raster. Pitch of every map is the raster step;
/// `raster.origin` is the physical position of the first scan point.
struct MomentMaps
{
  GridGeometry raster;
  RealField transmissionSq;   // o^2, dimensionless
  RealField phiX;             // rad/m
  RealField phiY;             // rad/m
  bool corrected = false;     // true when virtual patterns replaced the flat reference
};

/// Sum over the pattern of q_x^u q_y^v D(q), u, v in {0, 1}.
double momentUV(const RealField& pattern, int u, int v, const FreqGrid& qgrid);

/// First-moment centroid (M10/M00, M01/M00) of a pattern in rad/m.
Vec2 centroid(const RealField& pattern, const FreqGrid& qgrid);

/// o^2(R_j) = M00(D_j) / M00(D_flat) assembled on the raster.
RealField transmissionMap(const DiffractionStack& stack);

/// Differential phase referenced to the flat-field centroid.
MomentMaps diffPhaseNaive(const DiffractionStack& stack);

/// Virtual patterns |dft2(o(r) P(r - R_j))|^2 of the absorption-only object,
/// with o(r) bilinearly upsampled from the raster to the object grid.
DiffractionStack virtualStack(const RealField& transmissionSq, const Probe& probe,
                              const ScanPlan& plan);

/// Differential phase referenced to each position's virtual pattern centroid,
/// cancelling the probe phase-gradient term for absorbing objects.
MomentMaps diffPhaseCorrected(const DiffractionStack& stack, const Probe& probe);

} // namespace ptycho

#endif
