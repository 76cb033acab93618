#include <doctest.h>

#include <numbers>

#include "oracles.hpp"
#include "ptycho/fft.hpp"
#include "ptycho/forward.hpp"
#include "ptycho/moments.hpp"

using namespace ptycho;

namespace
{

RefractiveObject constantObject(Shape s, Complex v, double pixel = 1.0)
{
  return RefractiveObject(ComplexField(s, pixel, v));
}

} // namespace

TEST_CASE("exit wave")
{
  const Probe probe = makeGaussianProbe(8, 1.0, 3.0, 10.0);

  SUBCASE("empty object returns the probe")
  {
    const auto psi = exitWave(constantObject({16, 16}, 0.0), probe, {8.0, 8.0});
    CHECK(oracle::relDiff(psi, probe.field()) == 0.0);
  }

  SUBCASE("real constant multiplies by a global phase")
  {
    const double c = 0.7;
    const auto psi = exitWave(constantObject({16, 16}, c), probe, {8.0, 8.0});
    for (std::size_t i = 0; i < psi.size(); ++i)
    {
      CHECK(std::abs(psi[i] - std::polar(1.0, c) * probe.field()[i]) < 1e-15);
      CHECK(std::abs(psi[i]) == doctest::Approx(std::abs(probe.field()[i])));
    }
  }

  SUBCASE("attenuation ln 2 halves the amplitude")
  {
    // transmission exp(-Im O~) = 1/2 with Im O~ = ln 2 >= 0.
    const auto obj = constantObject({16, 16}, Complex(0.0, std::numbers::ln2));
    const auto psi = exitWave(obj, probe, {8.0, 8.0});
    for (std::size_t i = 0; i < psi.size(); ++i)
      CHECK(std::abs(psi[i]) == doctest::Approx(std::abs(probe.field()[i]) / 2.0).epsilon(1e-14));
  }

  CHECK_THROWS_AS(exitWave(constantObject({16, 16}, 0.0), probe, {1.0, 8.0}, 3), OutOfBounds);
}

TEST_CASE("diffract")
{
  SUBCASE("delta gives a uniform pattern")
  {
    ComplexField psi(8, 8, 1.0);
    psi(0, 0) = 2.0;
    const RealField I = diffract(psi);
    for (double v : I)
      CHECK(v == doctest::Approx(4.0 / 64.0));
  }

  SUBCASE("intensity conservation and global phase invariance")
  {
    const ComplexField psi = oracle::randomComplex(12, 10, 9);
    const RealField I = diffract(psi);
    double direct = 0.0;
    for (const auto& v : psi)
      direct += std::norm(v);
    CHECK(std::abs(sum(I) - direct) < 1e-10 * direct);

    ComplexField rotated = psi;
    for (auto& v : rotated)
      v *= std::polar(1.0, 1.234);
    CHECK(oracle::maxAbsDiff(diffract(rotated), I) < 1e-12 * direct);
  }
}

TEST_CASE("simulate scan")
{
  const Probe probe = makeGaussianProbe(16, 1.0, 4.0, 1e4);
  const ScanPlan plan = makeRasterPlan({40, 40}, 1.0, {16, 16}, 3);
  CHECK(plan.raster->rows * plan.raster->cols == plan.size());
  CHECK_NOTHROW(plan.validate());

  SUBCASE("unit object: every pattern equals the flat")
  {
    const auto stack = simulateScan(constantObject({40, 40}, 0.0), probe, plan);
    for (const auto& p : stack.patterns)
      CHECK(oracle::maxAbsDiff(p, stack.flat) < 1e-12 * sum(stack.flat));
  }

  SUBCASE("phase-only object conserves every pattern total")
  {
    ComplexField f(40, 40, 1.0);
    for (std::size_t j = 0; j < 40; ++j)
      for (std::size_t i = 0; i < 40; ++i)
        f(i, j) = 3.0 * std::sin(0.2 * static_cast<double>(i)) * std::cos(0.13 * static_cast<double>(j));
    const auto stack = simulateScan(RefractiveObject(f), probe, plan);
    const double flatTotal = sum(stack.flat);
    for (const auto& p : stack.patterns)
      CHECK(std::abs(sum(p) - flatTotal) < 1e-10 * flatTotal);
  }

  SUBCASE("Poisson noise with a huge budget approaches the noiseless data")
  {
    const auto obj = constantObject({40, 40}, Complex(0.4, 0.1));
    const auto clean = simulateScan(obj, probe, plan);
    const auto noisy = simulateScan(obj, probe, plan, PoissonNoise{1e12, 77});
    double num = 0.0, den = 0.0;
    for (std::size_t j = 0; j < clean.size(); ++j)
      for (std::size_t k = 0; k < clean.patterns[j].size(); ++k)
      {
        const double d = noisy.patterns[j][k] - clean.patterns[j][k];
        num += d * d;
        den += clean.patterns[j][k] * clean.patterns[j][k];
      }
    CHECK(std::sqrt(num / den) < 0.01);

    const auto again = simulateScan(obj, probe, plan, PoissonNoise{1e12, 77});
    for (std::size_t j = 0; j < clean.size(); ++j)
      CHECK(oracle::maxAbsDiff(again.patterns[j], noisy.patterns[j]) == 0.0);
  }

  SUBCASE("out-of-bounds plan names the position")
  {
    ScanPlan bad = plan;
    bad.positions[5] = {2.0, 2.0};
    try
    {
      simulateScan(constantObject({40, 40}, 0.0), probe, bad);
      FAIL("expected OutOfBounds");
    }
    catch (const OutOfBounds& e)
    {
      CHECK(e.scanIndex() == 5);
    }
  }
}

TEST_CASE("Siemens star")
{
  SiemensStarParams p;
  const RefractiveObject star = makeSiemensStar(p);
  CHECK(star.shape() == Shape{213, 213});
  const RealField t = star.transmission();

  // Corner is outside the outer radius; pixel (106 + 50, 106) lies on theta = 0,
  // the leading edge of spoke sector 0.
  CHECK(star.field()(2, 2) == Complex(0.0, 0.0));
  CHECK(t(2, 2) == 1.0);
  const Complex spoke = star.field()(156, 106);
  CHECK(std::exp(-spoke.imag()) == doctest::Approx(0.8).epsilon(1e-14));
  CHECK(spoke.real() == doctest::Approx(-1.2));
  // Center lies within the inner cutoff.
  CHECK(star.field()(106, 106) == Complex(0.0, 0.0));

  // Rotational symmetry on an angular histogram. A quarter turn is a whole
  // number of spoke periods and maps the pixel grid onto itself.
  const std::size_t bins = 4 * p.spokes;
  std::vector<int> hist(bins, 0);
  for (std::size_t j = 0; j < 213; ++j)
    for (std::size_t i = 0; i < 213; ++i)
    {
      const double dx = static_cast<double>(i) - 106.0, dy = static_cast<double>(j) - 106.0;
      const double r = std::hypot(dx, dy);
      if (r < 20.0 || r > 80.0)
        continue;
      double th = std::atan2(dy, dx);
      if (th < 0)
        th += 2 * std::numbers::pi;
      const auto b = static_cast<std::size_t>(th / (2 * std::numbers::pi) * bins) % bins;
      if (star.field()(i, j).imag() > 0.0)
        ++hist[b];
    }
  const std::size_t shift = bins / 4;
  int spokeBins = 0, gapBins = 0;
  for (std::size_t b = 0; b < bins; ++b)
  {
    const int a = hist[b], c = hist[(b + shift) % bins];
    CHECK(std::abs(a - c) <= 2);
    (b % 4 < 2 ? spokeBins : gapBins) += a;
  }
  CHECK(spokeBins > 20 * std::max(gapBins, 1) / 2);

  p.spokes = 7;
  CHECK_THROWS_AS(makeSiemensStar(p), InvalidArgument);
}

TEST_CASE("bulky phantom")
{
  BulkyPhantomParams p;
  p.grid = 128;
  p.diameter = 80.0;
  p.peakPhase = -30.0;
  p.peakAttenuation = 0.2;
  p.edgeWidth = 0.0;
  const RefractiveObject obj = makeBulkyPhantom(p);
  const double c = 63.5;

  // Closest pixel to the center sits 0.707 px away: relative deficit (0.707/40)^8.
  CHECK(std::abs(obj.field()(63, 63) - Complex(-30.0, 0.2)) < 1e-6 * 30.0);
  CHECK(std::abs(obj.field()(63, 63) - Complex(-30.0, 0.2)) < 1e-6);

  // Two radii from the center along x: pixel 63 + 80 is outside; use a bigger grid.
  BulkyPhantomParams big = p;
  big.grid = 256;
  const RefractiveObject wide = makeBulkyPhantom(big);
  const double cw = 127.5;
  const auto ix = static_cast<std::size_t>(cw + 80.5);
  CHECK(std::abs(wide.field()(ix, 127)) < 1e-10);

  // Steepest finite-difference gradient lies inside the edge band.
  const double order = bulkyPhantomOrder(p.diameter, p.edgeWidth);
  CHECK(order == 8.0);
  const double radius = p.diameter / 2.0;
  const double inner = radius * std::pow(std::log(1.0 / 0.9), 1.0 / order);
  const double outer = radius * std::pow(std::log(10.0), 1.0 / order);
  double best = 0.0, bestR = 0.0;
  for (std::size_t i = 0; i + 1 < 128; ++i)
  {
    const double g = std::abs(obj.field()(i + 1, 64).real() - obj.field()(i, 64).real());
    if (g > best)
    {
      best = g;
      bestR = std::hypot(static_cast<double>(i) + 0.5 - c, 64.0 - c);
    }
  }
  CHECK(bestR > inner);
  CHECK(bestR < outer);

  SUBCASE("edge width selects the profile order")
  {
    const double n = bulkyPhantomOrder(160.0, 16.0);
    const double w = 80.0 * (std::pow(std::log(10.0), 1.0 / n) - std::pow(std::log(1.0 / 0.9), 1.0 / n));
    CHECK(w == doctest::Approx(16.0).epsilon(1e-9));
    CHECK(n > 8.0);
  }

  p.diameter = 200.0;
  CHECK_THROWS_AS(makeBulkyPhantom(p), InvalidArgument);
}

TEST_CASE("Gaussian probe")
{
  const double fwhm = 7.0;
  const Probe probe = makeGaussianProbe(32, 1.0, fwhm, 123.0);
  CHECK(probe.power() == doctest::Approx(123.0).epsilon(1e-12));
  for (const auto& v : probe.field())
    CHECK(std::arg(v) == 0.0);

  // Evaluate the profile at r = fwhm/2 by sampling a probe with an even FWHM.
  const Probe even = makeGaussianProbe(32, 1.0, 8.0, 1.0);
  const double peak = std::norm(even.field()(16, 16));
  CHECK(std::norm(even.field()(20, 16)) == doctest::Approx(peak / 2.0).epsilon(1e-12));
  CHECK(std::norm(even.field()(16, 12)) == doctest::Approx(peak / 2.0).epsilon(1e-12));
}

TEST_CASE("defocused probe")
{
  const std::size_t q = 32;
  const double pitch = 1e-7;
  const Probe focused = makeGaussianProbe(q, pitch, 5.0, 1e3);

  SUBCASE("zero coefficients reproduce the Gaussian probe")
  {
    const Probe p = makeDefocusedProbe(q, pitch, 5.0, 1e3, {0.0, 0.0}, 0.0);
    CHECK(oracle::relDiff(p.field(), focused.field()) < 1e-15);
  }

  SUBCASE("linear phase shifts the far field by a / dq bins")
  {
    const FreqGrid grid = freqGrid(q, q, pitch);
    const int m = 3;
    const double a = m * grid.stepX();
    const Probe p = makeDefocusedProbe(q, pitch, 5.0, 1e3, {a, 0.0}, 0.0);
    const RealField shifted = diffract(p.field());
    const RealField base = diffract(focused.field());
    for (std::size_t j = 0; j < q; ++j)
      for (std::size_t i = 0; i < q; ++i)
        CHECK(shifted((i + m) % q, j) == doctest::Approx(base(i, j)).epsilon(1e-9).scale(1e-12));
    const Vec2 c = centroid(shifted, grid);
    CHECK(c.x - centroid(base, grid).x == doctest::Approx(a).epsilon(1e-6));
  }

  SUBCASE("amplitude independent of phase coefficients")
  {
    const Probe p = makeDefocusedProbe(q, pitch, 5.0, 1e3, {1e6, -2e6}, 3e13);
    for (std::size_t i = 0; i < p.field().size(); ++i)
      CHECK(std::abs(p.field()[i]) == doctest::Approx(std::abs(focused.field()[i])).epsilon(1e-14));
    CHECK(std::arg(p.field()(17, 16)) != 0.0);
  }
}
