#include "ptycho/moments.hpp"

#include <algorithm>
#include <cmath>

#include "ptycho/fft.hpp"
#include "ptycho/sampling.hpp"

namespace ptycho
{

namespace
{

struct FirstMoments
{
  double m00 = 0.0;
  double m10 = 0.0;
  double m01 = 0.0;
};

void requireNonNegative(const RealField& pattern)
{
  double peak = 0.0;
  double lowest = 0.0;
  for (double v : pattern)
  {
    if (!std::isfinite(v))
      throw NonFiniteError("diffraction pattern contains non-finite values");
    peak = std::max(peak, v);
    lowest = std::min(lowest, v);
  }
  if (lowest < -1e-9 * peak || (peak == 0.0 && lowest < 0.0))
    throw InvalidArgument("diffraction pattern has negative intensities");
}

FirstMoments firstMoments(const RealField& pattern, const FreqGrid& q)
{
  if (pattern.width() != q.width() || pattern.height() != q.height())
    throw InvalidArgument("pattern and frequency grid shapes differ");
  requireNonNegative(pattern);
  FirstMoments m;
  for (std::size_t iy = 0; iy < pattern.height(); ++iy)
  {
    double rowSum = 0.0;
    double rowQx = 0.0;
    for (std::size_t ix = 0; ix < pattern.width(); ++ix)
    {
      const double d = pattern(ix, iy);
      rowSum += d;
      rowQx += q.qx(ix) * d;
    }
    m.m00 += rowSum;
    m.m10 += rowQx;
    m.m01 += q.qy(iy) * rowSum;
  }
  return m;
}

FreqGrid patternGrid(const ScanPlan& plan)
{
  return freqGrid(plan.patternShape.width, plan.patternShape.height, plan.pixelSize);
}

RealField rasterField(const GridGeometry& g)
{
  return RealField(g.shape, g.pixel_size);
}

Vec2 centroidOf(const FirstMoments& m, const std::string& what)
{
  if (!(m.m00 > 0.0))
    throw DegenerateData(what + " has zero total intensity");
  return {m.m10 / m.m00, m.m01 / m.m00};
}

} // namespace

double momentUV(const RealField& pattern, int u, int v, const FreqGrid& qgrid)
{
  if ((u != 0 && u != 1) || (v != 0 && v != 1))
    throw InvalidArgument("only moments with u, v in {0, 1} are supported");
  if (pattern.width() != qgrid.width() || pattern.height() != qgrid.height())
    throw InvalidArgument("pattern and frequency grid shapes differ");
  requireNonNegative(pattern);
  double s = 0.0;
  for (std::size_t iy = 0; iy < pattern.height(); ++iy)
    for (std::size_t ix = 0; ix < pattern.width(); ++ix)
    {
      double w = pattern(ix, iy);
      if (u == 1)
        w *= qgrid.qx(ix);
      if (v == 1)
        w *= qgrid.qy(iy);
      s += w;
    }
  return s;
}

Vec2 centroid(const RealField& pattern, const FreqGrid& qgrid)
{
  return centroidOf(firstMoments(pattern, qgrid), "pattern");
}

RealField transmissionMap(const DiffractionStack& stack)
{
  const GridGeometry g = stack.plan.rasterGeometry();
  if (stack.patterns.size() != stack.plan.size())
    throw InvalidArgument("stack and plan sizes differ");
  const double flatTotal = sum(stack.flat);
  if (!(flatTotal > 0.0))
    throw DegenerateData("flat pattern has zero total intensity");

  RealField t = rasterField(g);
  for (std::size_t j = 0; j < stack.patterns.size(); ++j)
  {
    requireNonNegative(stack.patterns[j]);
    t[j] = sum(stack.patterns[j]) / flatTotal;
  }
  return t;
}

MomentMaps diffPhaseNaive(const DiffractionStack& stack)
{
  const GridGeometry g = stack.plan.rasterGeometry();
  const FreqGrid q = patternGrid(stack.plan);
  const FirstMoments flat = firstMoments(stack.flat, q);
  const Vec2 flatCentroid = centroidOf(flat, "flat pattern");

  MomentMaps maps{g, rasterField(g), rasterField(g), rasterField(g), false};
  for (std::size_t j = 0; j < stack.patterns.size(); ++j)
  {
    const FirstMoments m = firstMoments(stack.patterns[j], q);
    const Vec2 c = centroidOf(m, "pattern " + std::to_string(j));
    maps.transmissionSq[j] = m.m00 / flat.m00;
    maps.phiX[j] = c.x - flatCentroid.x;
    maps.phiY[j] = c.y - flatCentroid.y;
  }
  return maps;
}

DiffractionStack virtualStack(const RealField& transmissionSq, const Probe& probe,
                              const ScanPlan& plan)
{
  const GridGeometry g = plan.rasterGeometry();
  if (transmissionSq.shape() != g.shape)
    throw InvalidArgument("transmission map does not match the scan raster");
  if (probe.shape() != plan.patternShape)
    throw InvalidArgument("probe shape does not match the plan pattern shape");
  plan.validate();

  RealField oSq = transmissionSq;
  oSq.setPixelSize(g.pixel_size);
  const RealField upsampled =
      bilinearResample(oSq, plan.objectShape, g.origin, Vec2{}, plan.pixelSize);

  ComplexField amplitude(plan.objectShape, plan.pixelSize);
  for (std::size_t i = 0; i < upsampled.size(); ++i)
    amplitude[i] = std::sqrt(std::max(upsampled[i], 0.0));

  const Fft2 fft(plan.patternShape.width, plan.patternShape.height);
  ComplexField spectrum(plan.patternShape, plan.pixelSize);

  DiffractionStack out;
  out.plan = plan;
  out.flat = diffract(probe.field());
  out.patterns.reserve(plan.size());
  for (std::size_t j = 0; j < plan.size(); ++j)
  {
    ComplexField psi = extractPatch(amplitude, plan.positions[j], plan.patternShape,
                                    static_cast<std::ptrdiff_t>(j));
    for (std::size_t i = 0; i < psi.size(); ++i)
      psi[i] *= probe.field()[i];
    fft.forward(psi.values(), spectrum.values());
    RealField v(plan.patternShape, spectrum.pixelSize());
    for (std::size_t i = 0; i < v.size(); ++i)
      v[i] = std::norm(spectrum[i]);
    out.patterns.push_back(std::move(v));
  }
  return out;
}

MomentMaps diffPhaseCorrected(const DiffractionStack& stack, const Probe& probe)
{
  const GridGeometry g = stack.plan.rasterGeometry();
  const RealField oSq = transmissionMap(stack);
  const DiffractionStack virt = virtualStack(oSq, probe, stack.plan);
  const FreqGrid q = patternGrid(stack.plan);

  MomentMaps maps{g, oSq, rasterField(g), rasterField(g), true};
  for (std::size_t j = 0; j < stack.patterns.size(); ++j)
  {
    const Vec2 c = centroidOf(firstMoments(stack.patterns[j], q), "pattern " + std::to_string(j));
    const Vec2 cv = centroidOf(firstMoments(virt.patterns[j], q),
                               "virtual pattern " + std::to_string(j));
    maps.phiX[j] = c.x - cv.x;
    maps.phiY[j] = c.y - cv.y;
  }
  return maps;
}

} // namespace ptycho
