#ifndef PTYCHO_SAMPLING_HPP
#define PTYCHO_SAMPLING_HPP

#include <cstddef>
#include <utility>

#include "ptycho/field.hpp"

namespace ptycho
{

/// Bilinear resampling in physical coordinates.
///
/// Source pixel (i, j) sits at srcOrigin + (i, j) * src.pixelSize(); destination
/// pixel (i, j) at dstOrigin + (i, j) * dstPixelSize. Points outside the source
/// footprint take the value at the nearest edge.
RealField bilinearResample(const RealField& src, Shape dstShape, Vec2 srcOrigin,
                           Vec2 dstOrigin, double dstPixelSize);

/// Pixel footprint of a patch centered at a physical position.
///
/// The center snaps to the nearest pixel c = round(center / pixel_size); the
/// patch then covers [c - w/2, c - w/2 + w) along each axis, so pixel (w/2, h/2)
/// of the patch is aligned with the center. Field pixel (0, 0) is at the origin.
struct PatchWindow
{
  std::ptrdiff_t x0 = 0;
  std::ptrdiff_t y0 = 0;
  Shape shape;

  bool fits(Shape field) const;
};

PatchWindow patchWindow(Vec2 center, double pixelSize, Shape patchShape);

/// Copies the snapped patch out of `field`. `scanIndex` is only used to name the
/// offending position in OutOfBounds errors.
ComplexField extractPatch(const ComplexField& field, Vec2 center, Shape patchShape,
                          std::ptrdiff_t scanIndex = -1);

/// Adds `patch` into the snapped footprint of `field`.
void embedAddPatch(ComplexField& field, Vec2 center, const ComplexField& patch,
                   std::ptrdiff_t scanIndex = -1);

} // namespace ptycho

#endif
