#include "ptycho/wavefront.hpp"

#include <algorithm>
#include <cmath>

#include "ptycho/fft.hpp"
#include "ptycho/sampling.hpp"

namespace ptycho
{

std::pair<RealField, RealField> antisymmetricExtend(const RealField& phiX,
                                                    const RealField& phiY)
{
  if (phiX.shape() != phiY.shape())
    throw InvalidArgument("gradient maps must share one shape");
  if (phiX.empty())
    throw InvalidArgument("gradient maps are empty");

  const std::size_t w = phiX.width();
  const std::size_t h = phiX.height();
  RealField ex(2 * w, 2 * h, phiX.pixelSize());
  RealField ey(2 * w, 2 * h, phiY.pixelSize());

  for (std::size_t j = 0; j < 2 * h; ++j)
  {
    const bool mirrorY = j < h;
    const std::size_t sj = mirrorY ? h - 1 - j : j - h;
    for (std::size_t i = 0; i < 2 * w; ++i)
    {
      const bool mirrorX = i < w;
      const std::size_t si = mirrorX ? w - 1 - i : i - w;
      ex(i, j) = mirrorX ? -phiX(si, sj) : phiX(si, sj);
      ey(i, j) = mirrorY ? -phiY(si, sj) : phiY(si, sj);
    }
  }
  return {std::move(ex), std::move(ey)};
}

namespace
{

double mean(const RealField& f)
{
  return sum(f) / static_cast<double>(f.size());
}

void removeMean(RealField& f)
{
  const double m = mean(f);
  for (double& v : f)
    v -= m;
}

} // namespace

PhaseMap fourierIntegrate(const RealField& phiX, const RealField& phiY, double step)
{
  if (!(step > 0.0) || !std::isfinite(step))
    throw InvalidArgument("integration step must be positive");
  if (phiX.shape() != phiY.shape())
    throw InvalidArgument("gradient maps must share one shape");
  phiX.requireFinite("phi_x");
  phiY.requireFinite("phi_y");

  const std::size_t w = phiX.width();
  const std::size_t h = phiX.height();
  RealField out(w, h, step);
  if (w < 1 || h < 1)
    throw InvalidArgument("gradient maps are empty");

  // Tilt: its even extension has a kink at every mirror line, which rings
  // through the whole spectral solution, so it is integrated directly.
  const double tiltX = mean(phiX);
  const double tiltY = mean(phiY);
  RealField gx = phiX;
  RealField gy = phiY;
  for (double& v : gx)
    v -= tiltX;
  for (double& v : gy)
    v -= tiltY;

  const auto [ex, ey] = antisymmetricExtend(gx, gy);
  const std::size_t W = ex.width();
  const std::size_t H = ex.height();
  ComplexField cx(W, H, step), cy(W, H, step);
  for (std::size_t i = 0; i < ex.size(); ++i)
  {
    cx[i] = ex[i];
    cy[i] = ey[i];
  }
  const ComplexField fx = dft2(cx);
  const ComplexField fy = dft2(cy);
  const FreqGrid q = freqGrid(W, H, step);

  ComplexField spectrum(W, H, fx.pixelSize());
  const Complex I(0.0, 1.0);
  for (std::size_t j = 0; j < H; ++j)
    for (std::size_t i = 0; i < W; ++i)
    {
      if (i == 0 && j == 0)
        continue;
      const Complex denom = I * Complex(q.qx(i), q.qy(j));
      spectrum(i, j) = (fx(i, j) + I * fy(i, j)) / denom;
    }
  const ComplexField extended = idft2(spectrum);

  for (std::size_t j = 0; j < h; ++j)
    for (std::size_t i = 0; i < w; ++i)
      out(i, j) = extended(w + i, h + j).real() +
                  (tiltX * static_cast<double>(i) + tiltY * static_cast<double>(j)) * step;
  removeMean(out);
  return {std::move(out), true};
}

RefractiveObject buildInitObject(const RealField& transmissionSq, const PhaseMap& phase,
                                 const ScanPlan& plan)
{
  if (transmissionSq.empty() || phase.phase.empty())
    throw InvalidArgument("initialization maps are empty");
  const GridGeometry g = plan.rasterGeometry();
  if (transmissionSq.shape() != g.shape || phase.phase.shape() != g.shape)
    throw InvalidArgument("initialization maps do not match the scan raster");

  RealField oSq = transmissionSq;
  RealField phi = phase.phase;
  oSq.setPixelSize(g.pixel_size);
  phi.setPixelSize(g.pixel_size);
  const RealField oSqUp = bilinearResample(oSq, plan.objectShape, g.origin, Vec2{}, plan.pixelSize);
  const RealField phiUp = bilinearResample(phi, plan.objectShape, g.origin, Vec2{}, plan.pixelSize);

  ComplexField f(plan.objectShape, plan.pixelSize);
  for (std::size_t i = 0; i < f.size(); ++i)
  {
    const double o = std::sqrt(std::max(oSqUp[i], kTransmissionFloor));
    f[i] = Complex(phiUp[i], -std::log(o));
  }
  return RefractiveObject(std::move(f));
}

} // namespace ptycho
