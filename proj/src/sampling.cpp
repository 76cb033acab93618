#include "ptycho/sampling.hpp"

#include <algorithm>
#include <cmath>

namespace ptycho
{

namespace
{

struct AxisSample
{
  std::size_t i0 = 0;
  std::size_t i1 = 0;
  double t = 0.0;
};

AxisSample axisSample(double u, std::size_t n)
{
  if (n == 1)
    return {0, 0, 0.0};
  const double maxU = static_cast<double>(n - 1);
  u = std::clamp(u, 0.0, maxU);
  auto i0 = static_cast<std::size_t>(std::floor(u));
  if (i0 >= n - 1)
    i0 = n - 2;
  return {i0, i0 + 1, u - static_cast<double>(i0)};
}

} // namespace

RealField bilinearResample(const RealField& src, Shape dstShape, Vec2 srcOrigin,
                           Vec2 dstOrigin, double dstPixelSize)
{
  if (src.empty())
    throw InvalidArgument("bilinear resample of an empty field");
  if (dstShape.size() == 0)
    throw InvalidArgument("bilinear resample to an empty shape");

  RealField dst(dstShape, dstPixelSize);
  const double srcPitch = src.pixelSize();

  std::vector<AxisSample> xs(dstShape.width);
  for (std::size_t i = 0; i < dstShape.width; ++i)
  {
    const double x = dstOrigin.x + static_cast<double>(i) * dstPixelSize;
    xs[i] = axisSample((x - srcOrigin.x) / srcPitch, src.width());
  }

  for (std::size_t j = 0; j < dstShape.height; ++j)
  {
    const double y = dstOrigin.y + static_cast<double>(j) * dstPixelSize;
    const AxisSample sy = axisSample((y - srcOrigin.y) / srcPitch, src.height());
    for (std::size_t i = 0; i < dstShape.width; ++i)
    {
      const AxisSample& sx = xs[i];
      const double top = (1.0 - sx.t) * src(sx.i0, sy.i0) + sx.t * src(sx.i1, sy.i0);
      const double bottom = (1.0 - sx.t) * src(sx.i0, sy.i1) + sx.t * src(sx.i1, sy.i1);
      dst(i, j) = (1.0 - sy.t) * top + sy.t * bottom;
    }
  }
  return dst;
}

bool PatchWindow::fits(Shape field) const
{
  return x0 >= 0 && y0 >= 0 &&
         static_cast<std::size_t>(x0) + shape.width <= field.width &&
         static_cast<std::size_t>(y0) + shape.height <= field.height;
}

PatchWindow patchWindow(Vec2 center, double pixelSize, Shape patchShape)
{
  const auto cx = static_cast<std::ptrdiff_t>(std::lround(center.x / pixelSize));
  const auto cy = static_cast<std::ptrdiff_t>(std::lround(center.y / pixelSize));
  return {cx - static_cast<std::ptrdiff_t>(patchShape.width / 2),
          cy - static_cast<std::ptrdiff_t>(patchShape.height / 2), patchShape};
}

namespace
{

PatchWindow checkedWindow(const ComplexField& field, Vec2 center, Shape patchShape,
                          std::ptrdiff_t scanIndex)
{
  if (patchShape.size() == 0)
    throw InvalidArgument("patch shape must be non-empty");
  const PatchWindow w = patchWindow(center, field.pixelSize(), patchShape);
  if (!w.fits(field.shape()))
  {
    std::string msg = "patch " + std::to_string(patchShape.width) + "x" +
                      std::to_string(patchShape.height) + " at pixel (" +
                      std::to_string(w.x0) + ", " + std::to_string(w.y0) +
                      ") exceeds field " + std::to_string(field.width()) + "x" +
                      std::to_string(field.height());
    if (scanIndex >= 0)
      msg = "scan position " + std::to_string(scanIndex) + ": " + msg;
    throw OutOfBounds(msg, scanIndex);
  }
  return w;
}

} // namespace

ComplexField extractPatch(const ComplexField& field, Vec2 center, Shape patchShape,
                          std::ptrdiff_t scanIndex)
{
  const PatchWindow w = checkedWindow(field, center, patchShape, scanIndex);
  ComplexField patch(patchShape, field.pixelSize());
  for (std::size_t j = 0; j < patchShape.height; ++j)
  {
    const Complex* row = &field(static_cast<std::size_t>(w.x0), static_cast<std::size_t>(w.y0) + j);
    std::copy(row, row + patchShape.width, &patch(0, j));
  }
  return patch;
}

void embedAddPatch(ComplexField& field, Vec2 center, const ComplexField& patch,
                   std::ptrdiff_t scanIndex)
{
  const PatchWindow w = checkedWindow(field, center, patch.shape(), scanIndex);
  for (std::size_t j = 0; j < patch.height(); ++j)
  {
    Complex* row = &field(static_cast<std::size_t>(w.x0), static_cast<std::size_t>(w.y0) + j);
    for (std::size_t i = 0; i < patch.width(); ++i)
      row[i] += patch(i, j);
  }
}

} // namespace ptycho
