#include "ptycho/forward.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "ptycho/fft.hpp"
#include "ptycho/sampling.hpp"

namespace ptycho
{

RefractiveObject::RefractiveObject(ComplexField field) : mField(std::move(field))
{
  mField.requireFinite("refractive object");
}

ComplexField RefractiveObject::wave() const
{
  ComplexField w(mField.shape(), mField.pixelSize());
  for (std::size_t i = 0; i < mField.size(); ++i)
    w[i] = std::exp(Complex(0.0, 1.0) * mField[i]);
  return w;
}

RealField RefractiveObject::transmission() const
{
  RealField t(mField.shape(), mField.pixelSize());
  for (std::size_t i = 0; i < mField.size(); ++i)
    t[i] = std::exp(-mField[i].imag());
  return t;
}

void RefractiveObject::requirePassive(double tolerance) const
{
  for (const auto& v : mField)
    if (v.imag() < -tolerance)
      throw InvalidArgument("refractive object has negative attenuation (amplifying)");
}

Probe::Probe(ComplexField field) : mField(std::move(field))
{
  mField.requireFinite("probe");
}

GridGeometry ScanPlan::rasterGeometry() const
{
  if (!raster)
    throw InvalidArgument("scan plan has no raster shape");
  if (positions.empty())
    throw InvalidArgument("scan plan has no positions");
  return {{raster->cols, raster->rows}, raster->step, positions.front()};
}

void ScanPlan::validate() const
{
  if (patternShape.size() == 0)
    throw InvalidArgument("scan plan pattern shape is empty");
  if (objectShape.size() == 0)
    throw InvalidArgument("scan plan object shape is empty");
  if (!(pixelSize > 0.0))
    throw InvalidArgument("scan plan pixel size must be positive");
  for (std::size_t j = 0; j < positions.size(); ++j)
  {
    if (!patchWindow(positions[j], pixelSize, patternShape).fits(objectShape))
      throw OutOfBounds("scan position " + std::to_string(j) +
                            ": probe footprint leaves the object grid",
                        static_cast<std::ptrdiff_t>(j));
  }
  if (raster)
  {
    if (raster->rows * raster->cols != positions.size())
      throw InvalidArgument("raster " + std::to_string(raster->rows) + "x" +
                            std::to_string(raster->cols) + " does not match " +
                            std::to_string(positions.size()) + " positions");
    if (!(raster->step > 0.0))
      throw InvalidArgument("raster step must be positive");
    const Vec2 o = positions.front();
    const double tol = 1e-9 * raster->step;
    for (std::size_t r = 0; r < raster->rows; ++r)
      for (std::size_t c = 0; c < raster->cols; ++c)
      {
        const Vec2 p = positions[r * raster->cols + c];
        if (std::abs(p.x - (o.x + static_cast<double>(c) * raster->step)) > tol ||
            std::abs(p.y - (o.y + static_cast<double>(r) * raster->step)) > tol)
          throw InvalidArgument("position " + std::to_string(r * raster->cols + c) +
                                " is off the uniform raster");
      }
  }
}

ScanPlan makeRasterPlan(Shape objectShape, double pixelSize, Shape patternShape,
                        std::size_t stepPixels, std::size_t marginPixels)
{
  if (stepPixels == 0)
    throw InvalidArgument("raster step must be at least one pixel");

  auto axis = [&](std::size_t n, std::size_t q) {
    if (n < q + 2 * marginPixels)
      throw InvalidArgument("patch and margin do not fit in the object grid");
    const std::size_t span = n - q - 2 * marginPixels;
    const std::size_t count = span / stepPixels + 1;
    const std::size_t slack = span - (count - 1) * stepPixels;
    const std::size_t first = q / 2 + marginPixels + slack / 2;
    return std::make_pair(first, count);
  };
  const auto [x0, cols] = axis(objectShape.width, patternShape.width);
  const auto [y0, rows] = axis(objectShape.height, patternShape.height);

  ScanPlan plan;
  plan.patternShape = patternShape;
  plan.objectShape = objectShape;
  plan.pixelSize = pixelSize;
  plan.raster = RasterShape{rows, cols, static_cast<double>(stepPixels) * pixelSize};
  plan.positions.reserve(rows * cols);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c)
      plan.positions.push_back(
          {static_cast<double>(x0 + c * stepPixels) * pixelSize,
           static_cast<double>(y0 + r * stepPixels) * pixelSize});
  return plan;
}

double DiffractionStack::totalCounts() const
{
  double s = 0.0;
  for (const auto& p : patterns)
    s += sum(p);
  return s;
}

void DiffractionStack::validate() const
{
  plan.validate();
  if (patterns.size() != plan.size())
    throw InvalidArgument("stack holds " + std::to_string(patterns.size()) +
                          " patterns for " + std::to_string(plan.size()) + " positions");
  auto check = [&](const RealField& p, const std::string& name) {
    if (p.shape() != plan.patternShape)
      throw InvalidArgument(name + " shape does not match the plan pattern shape");
    for (double v : p)
      if (!std::isfinite(v) || v < 0.0)
        throw InvalidArgument(name + " has negative or non-finite intensities");
  };
  for (std::size_t j = 0; j < patterns.size(); ++j)
    check(patterns[j], "pattern " + std::to_string(j));
  check(flat, "flat pattern");
}

ComplexField exitWave(const RefractiveObject& obj, const Probe& probe, Vec2 position,
                      std::ptrdiff_t scanIndex)
{
  ComplexField psi = extractPatch(obj.field(), position, probe.shape(), scanIndex);
  for (std::size_t i = 0; i < psi.size(); ++i)
    psi[i] = std::exp(Complex(0.0, 1.0) * psi[i]) * probe.field()[i];
  return psi;
}

RealField diffract(const ComplexField& psi)
{
  const ComplexField spectrum = dft2(psi);
  RealField out(spectrum.shape(), spectrum.pixelSize());
  for (std::size_t i = 0; i < spectrum.size(); ++i)
    out[i] = std::norm(spectrum[i]);
  return out;
}

DiffractionStack simulateScan(const RefractiveObject& obj, const Probe& probe,
                              const ScanPlan& plan, std::optional<PoissonNoise> noise)
{
  if (probe.shape() != plan.patternShape)
    throw InvalidArgument("probe shape does not match the plan pattern shape");
  if (obj.shape() != plan.objectShape)
    throw InvalidArgument("object shape does not match the plan object shape");
  plan.validate();

  DiffractionStack stack;
  stack.plan = plan;
  stack.flat = diffract(probe.field());
  stack.patterns.reserve(plan.size());
  for (std::size_t j = 0; j < plan.size(); ++j)
    stack.patterns.push_back(
        diffract(exitWave(obj, probe, plan.positions[j], static_cast<std::ptrdiff_t>(j))));

  if (noise)
  {
    const double flatTotal = sum(stack.flat);
    if (!(noise->photons > 0.0) || !(flatTotal > 0.0))
      throw InvalidArgument("Poisson noise needs a positive photon budget and probe power");
    const double scale = noise->photons / flatTotal;
    for (std::size_t j = 0; j < stack.patterns.size(); ++j)
    {
      std::mt19937_64 rng(noise->seed ^ static_cast<std::uint64_t>(j));
      for (double& v : stack.patterns[j])
      {
        const double mean = v * scale;
        if (mean <= 0.0)
        {
          v = 0.0;
          continue;
        }
        std::poisson_distribution<long long> draw(mean);
        v = static_cast<double>(draw(rng)) / scale;
      }
    }
  }
  return stack;
}

RefractiveObject makeSiemensStar(const SiemensStarParams& p)
{
  if (p.spokes < 4 || p.spokes % 2 != 0)
    throw InvalidArgument("Siemens star needs an even number of spokes, at least 4");
  if (p.grid < 3)
    throw InvalidArgument("Siemens star grid too small");
  if (!(p.minTransmission > 0.0 && p.minTransmission <= 1.0))
    throw InvalidArgument("Siemens star transmission must lie in (0, 1]");
  const double outer = p.outerRadius > 0.0 ? p.outerRadius : 0.45 * static_cast<double>(p.grid);
  if (p.innerRadius < 0.0 || outer <= p.innerRadius)
    throw InvalidArgument("Siemens star radii are inconsistent");

  const Complex spokeValue(p.phaseShift, -std::log(p.minTransmission));
  const double center = static_cast<double>(p.grid - 1) / 2.0;
  const double sector = std::numbers::pi / static_cast<double>(p.spokes);

  ComplexField f(p.grid, p.grid, p.pixelSize);
  for (std::size_t j = 0; j < p.grid; ++j)
    for (std::size_t i = 0; i < p.grid; ++i)
    {
      const double dx = static_cast<double>(i) - center;
      const double dy = static_cast<double>(j) - center;
      const double r = std::hypot(dx, dy);
      if (r < p.innerRadius || r > outer)
        continue;
      double theta = std::atan2(dy, dx);
      if (theta < 0.0)
        theta += 2.0 * std::numbers::pi;
      const auto k = static_cast<std::size_t>(std::floor(theta / sector)) % (2 * p.spokes);
      if (k % 2 == 0)
        f(i, j) = spokeValue;
    }
  return RefractiveObject(std::move(f));
}

double bulkyPhantomOrder(double diameter, double edgeWidth)
{
  if (edgeWidth <= 0.0)
    return 8.0;
  const double radius = diameter / 2.0;
  // 90% and 10% levels of exp(-u): u = ln(1/0.9), ln(10).
  const double uHigh = std::log(1.0 / 0.9);
  const double uLow = std::log(10.0);
  auto width = [&](double n) {
    return radius * (std::pow(uLow, 1.0 / n) - std::pow(uHigh, 1.0 / n));
  };
  double lo = 0.5, hi = 4096.0;
  if (edgeWidth >= width(lo) || edgeWidth <= width(hi))
    throw InvalidArgument("bulky phantom edge width is incompatible with its diameter");
  for (int it = 0; it < 200; ++it)
  {
    const double mid = 0.5 * (lo + hi);
    if (width(mid) > edgeWidth)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

RefractiveObject makeBulkyPhantom(const BulkyPhantomParams& p)
{
  if (!(p.diameter > 0.0) || p.diameter >= static_cast<double>(p.grid))
    throw InvalidArgument("bulky phantom diameter must be positive and below the grid extent");
  if (p.peakAttenuation < 0.0)
    throw InvalidArgument("bulky phantom attenuation must be non-negative");

  const double order = bulkyPhantomOrder(p.diameter, p.edgeWidth);
  const double radius = p.diameter / 2.0;
  const double center = static_cast<double>(p.grid - 1) / 2.0;
  const Complex peak(p.peakPhase, p.peakAttenuation);

  ComplexField f(p.grid, p.grid, p.pixelSize);
  for (std::size_t j = 0; j < p.grid; ++j)
    for (std::size_t i = 0; i < p.grid; ++i)
    {
      const double r = std::hypot(static_cast<double>(i) - center, static_cast<double>(j) - center);
      f(i, j) = peak * std::exp(-std::pow(r / radius, order));
    }
  return RefractiveObject(std::move(f));
}

namespace
{

ComplexField gaussianAmplitude(std::size_t size, double pixelSize, double fwhm, double power)
{
  if (size < 2)
    throw InvalidArgument("probe grid must be at least 2x2");
  if (!(fwhm > 0.0) || !(power > 0.0))
    throw InvalidArgument("probe FWHM and power must be positive");
  // |P|^2 = exp(-4 ln2 r^2 / fwhm^2), so |P| carries half the exponent.
  const double k = 2.0 * std::numbers::ln2 / (fwhm * fwhm);
  const double c = static_cast<double>(size / 2);
  ComplexField f(size, size, pixelSize);
  for (std::size_t j = 0; j < size; ++j)
    for (std::size_t i = 0; i < size; ++i)
    {
      const double dx = static_cast<double>(i) - c;
      const double dy = static_cast<double>(j) - c;
      f(i, j) = std::exp(-k * (dx * dx + dy * dy));
    }
  const double norm = std::sqrt(power / sumSquaredModulus(f));
  for (auto& v : f)
    v *= norm;
  return f;
}

} // namespace

Probe makeGaussianProbe(std::size_t size, double pixelSize, double fwhm, double power)
{
  return Probe(gaussianAmplitude(size, pixelSize, fwhm, power));
}

Probe makeDefocusedProbe(std::size_t size, double pixelSize, double fwhm, double power,
                         Vec2 linearPhase, double quadraticPhase)
{
  ComplexField f = gaussianAmplitude(size, pixelSize, fwhm, power);
  const double c = static_cast<double>(size / 2);
  for (std::size_t j = 0; j < size; ++j)
    for (std::size_t i = 0; i < size; ++i)
    {
      const double x = (static_cast<double>(i) - c) * pixelSize;
      const double y = (static_cast<double>(j) - c) * pixelSize;
      const double xi = linearPhase.x * x + linearPhase.y * y + quadraticPhase * (x * x + y * y);
      f(i, j) *= std::polar(1.0, xi);
    }
  return Probe(std::move(f));
}

} // namespace ptycho
