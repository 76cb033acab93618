#ifndef PTYCHO_FORWARD_HPP
#define PTYCHO_FORWARD_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include "ptycho/field.hpp"

namespace ptycho
{

/// Refractive object function O~(r): real part is the phase shift in radians,
/// imaginary part the attenuation exponent. The transmitted wave is exp(i O~).
class RefractiveObject
{
public:
  RefractiveObject() = default;
  explicit RefractiveObject(ComplexField field);

  const ComplexField& field() const { return mField; }
  ComplexField& field() { return mField; }
  Shape shape() const { return mField.shape(); }
  double pixelSize() const { return mField.pixelSize(); }

  /// exp(i O~) over the whole grid.
  ComplexField wave() const;
  /// Amplitude transmission exp(-Im O~).
  RealField transmission() const;

  /// Throws if any Im O~ < -tolerance (an amplifying object).
  void requirePassive(double tolerance = 1e-12) const;

private:
  ComplexField mField;
};

/// Complex illumination P(r) on a patch grid whose center pixel (w/2, h/2)
/// sits at r = 0.
class Probe
{
public:
  Probe() = default;
  explicit Probe(ComplexField field);

  const ComplexField& field() const { return mField; }
  ComplexField& field() { return mField; }
  Shape shape() const { return mField.shape(); }
  double pixelSize() const { return mField.pixelSize(); }

  RealField amplitude() const { return modulus(mField); }
  RealField phase() const { return ptycho::phase(mField); }
  double power() const { return sumSquaredModulus(mField); }

private:
  ComplexField mField;
};

/// Raster layout: positions are row-major, rows along y, uniform step.
struct RasterShape
{
  std::size_t rows = 0;
  std::size_t cols = 0;
  double step = 0.0;
};

struct ScanPlan
{
  std::vector<Vec2> positions;
  Shape patternShape;
  Shape objectShape;
  double pixelSize = 1.0;
  std::optional<RasterShape> raster;

  std::size_t size() const { return positions.size(); }

  /// Geometry of the scan raster (pitch = step, origin = first position).
  /// Throws InvalidArgument when the plan is not a raster.
  GridGeometry rasterGeometry() const;

  /// Checks every invariant: in-bounds footprints and raster consistency.
  void validate() const;
};

/// Builds a row-major raster plan with `stepPixels` spacing that covers as
/// much of the object as the patch footprint allows, centered on the grid.
ScanPlan makeRasterPlan(Shape objectShape, double pixelSize, Shape patternShape,
                        std::size_t stepPixels, std::size_t marginPixels = 0);

struct DiffractionStack
{
  ScanPlan plan;
  std::vector<RealField> patterns;
  RealField flat;

  std::size_t size() const { return patterns.size(); }
  double totalCounts() const;
  void validate() const;
};

struct PoissonNoise
{
  /// Expected photons in the flat pattern; the stack is kept in the
  /// noiseless intensity units by dividing counts by the same scale.
  double photons = 1e6;
  std::uint64_t seed = 0;
};

ComplexField exitWave(const RefractiveObject& obj, const Probe& probe, Vec2 position,
                      std::ptrdiff_t scanIndex = -1);

/// Far-field intensity |dft2(psi)|^2.
RealField diffract(const ComplexField& psi);

DiffractionStack simulateScan(const RefractiveObject& obj, const Probe& probe,
                              const ScanPlan& plan,
                              std::optional<PoissonNoise> noise = std::nullopt);

struct SiemensStarParams
{
  std::size_t grid = 213;
  double pixelSize = 1.0;
  double minTransmission = 0.8;
  double phaseShift = -1.2;
  std::size_t spokes = 36;
  double innerRadius = 4.0;   // pixels
  double outerRadius = 0.0;   // pixels; 0 selects 0.45 * grid
};

RefractiveObject makeSiemensStar(const SiemensStarParams& params);

/// Radially symmetric super-Gaussian disk
///   O~(r) = (peakPhase + i peakAttenuation) * exp(-(|r - c| / R)^n)
/// with R = diameter / 2. The order n is chosen so that the 90%-to-10% fall-off
/// spans `edgeWidth` pixels; edgeWidth = 0 keeps n = 8.
struct BulkyPhantomParams
{
  std::size_t grid = 256;
  double pixelSize = 1.0;
  double diameter = 160.0;      // pixels
  double peakPhase = -30.0;
  double peakAttenuation = 0.0;
  double edgeWidth = 0.0;       // pixels
};

RefractiveObject makeBulkyPhantom(const BulkyPhantomParams& params);

/// Super-Gaussian order used by makeBulkyPhantom for a given geometry.
double bulkyPhantomOrder(double diameter, double edgeWidth);

/// Real Gaussian probe with intensity FWHM `fwhm` pixels, normalized to
/// sum |P|^2 = power.
Probe makeGaussianProbe(std::size_t size, double pixelSize, double fwhm, double power);

/// Gaussian amplitude with phase a*x + b*y + c*|r|^2 (x, y in meters from the
/// probe center).
Probe makeDefocusedProbe(std::size_t size, double pixelSize, double fwhm, double power,
                         Vec2 linearPhase, double quadraticPhase);

} // namespace ptycho

#endif
