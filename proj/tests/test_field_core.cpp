#include <doctest.h>

#include <numbers>

#include "oracles.hpp"
#include "ptycho/fft.hpp"
#include "ptycho/sampling.hpp"

using namespace ptycho;

TEST_CASE("dft2 of a constant field is a scaled delta")
{
  ComplexField f(4, 4, 1.0, Complex(1.0, 0.0));
  const ComplexField F = dft2(f);
  CHECK(std::abs(F(0, 0) - Complex(4.0, 0.0)) < 1e-14);
  for (std::size_t i = 1; i < F.size(); ++i)
    CHECK(std::abs(F[i]) < 1e-14);
}

TEST_CASE("idft2 of a delta is a constant field")
{
  ComplexField F(4, 4, 1.0);
  F(0, 0) = 4.0;
  const ComplexField f = idft2(F);
  for (const auto& v : f)
    CHECK(std::abs(v - Complex(1.0, 0.0)) < 1e-14);
}

TEST_CASE("dft2 matches direct summation and conserves power")
{
  const ComplexField f = oracle::randomComplex(8, 8, 11);
  const ComplexField F = dft2(f);
  const ComplexField ref = oracle::naiveDft(f);
  CHECK(oracle::relDiff(F, ref) < 1e-12);

  double direct = 0.0;
  for (const auto& v : ref)
    direct += std::norm(v);
  CHECK(std::abs(sumSquaredModulus(F) - direct) < 1e-12 * direct);
  CHECK(std::abs(sumSquaredModulus(F) - sumSquaredModulus(f)) < 1e-12 * direct);

  // Non-square shapes use the same convention along each axis.
  const ComplexField g = oracle::randomComplex(6, 5, 12);
  CHECK(oracle::relDiff(dft2(g), oracle::naiveDft(g)) < 1e-12);
}

TEST_CASE("round trips and unitarity on random fields")
{
  const std::size_t sizes[][2] = {{16, 16}, {7, 9}, {64, 32}, {256, 256}};
  std::uint64_t seed = 100;
  for (const auto& s : sizes)
  {
    const ComplexField f = oracle::randomComplex(s[0], s[1], seed++, 0.5e-7);
    const ComplexField F = dft2(f);
    const double p = sumSquaredModulus(f);
    CHECK(std::abs(sumSquaredModulus(F) - p) <= 1e-10 * p);
    CHECK(oracle::relDiff(idft2(F), f) < 1e-12);
    CHECK(oracle::relDiff(dft2(idft2(f)), f) < 1e-12);
    CHECK(idft2(F).pixelSize() == doctest::Approx(f.pixelSize()).epsilon(1e-12));
  }
}

TEST_CASE("dft2 rejects non-finite input")
{
  ComplexField f(4, 4, 1.0);
  f(1, 2) = Complex(std::nan(""), 0.0);
  CHECK_THROWS_AS(dft2(f), NonFiniteError);
  f(1, 2) = Complex(0.0, INFINITY);
  CHECK_THROWS_AS(idft2(f), NonFiniteError);
}

TEST_CASE("frequency grid follows DFT ordering")
{
  const double pi = std::numbers::pi;
  const FreqGrid q = freqGrid(4, 4, 1.0);
  CHECK(q.qx(0) == 0.0);
  CHECK(q.qx(1) == doctest::Approx(pi / 2));
  CHECK(q.qx(2) == doctest::Approx(-pi));
  CHECK(q.qx(3) == doctest::Approx(-pi / 2));
  CHECK(q.stepX() == doctest::Approx(pi / 2));

  const FreqGrid r = freqGrid(10, 7, 2e-7);
  CHECK(r.qx(0) == 0.0);
  CHECK(r.qy(0) == 0.0);
  double largest = 0.0;
  for (double v : r.qxAxis())
    largest = std::max(largest, std::abs(v));
  CHECK(largest == doctest::Approx(pi / 2e-7));
  // Odd axis: symmetric, no Nyquist bin.
  CHECK(r.qy(3) == doctest::Approx(-r.qy(4)));

  CHECK_THROWS_AS(freqGrid(1, 4, 1.0), InvalidArgument);
  CHECK_THROWS_AS(freqGrid(4, 4, 0.0), InvalidArgument);
}

TEST_CASE("bilinear resampling")
{
  SUBCASE("constant stays constant")
  {
    RealField src(5, 3, 2.0, 1.75);
    const RealField dst = bilinearResample(src, {11, 8}, {0.0, 0.0}, {-3.0, -1.0}, 0.7);
    for (double v : dst)
      CHECK(v == doctest::Approx(1.75).epsilon(1e-15));
  }

  SUBCASE("affine field is reproduced exactly")
  {
    RealField src(9, 9, 1.0);
    for (std::size_t j = 0; j < 9; ++j)
      for (std::size_t i = 0; i < 9; ++i)
        src(i, j) = 0.3 * static_cast<double>(i) - 1.1 * static_cast<double>(j) + 2.0;
    const RealField dst = bilinearResample(src, {17, 17}, {0.0, 0.0}, {0.0, 0.0}, 0.5);
    double worst = 0.0;
    for (std::size_t j = 0; j < 17; ++j)
      for (std::size_t i = 0; i < 17; ++i)
      {
        const double expected = 0.3 * 0.5 * static_cast<double>(i) - 1.1 * 0.5 * static_cast<double>(j) + 2.0;
        worst = std::max(worst, std::abs(dst(i, j) - expected));
      }
    CHECK(worst < 1e-12);
  }

  SUBCASE("checkerboard midpoints")
  {
    // Source samples at x = 0, 1; destination at 0, 1/3, 2/3, 1.
    RealField src(2, 2, 1.0, std::vector<double>{1.0, 0.0, 0.0, 1.0});
    const RealField dst = bilinearResample(src, {4, 4}, {0.0, 0.0}, {0.0, 0.0}, 1.0 / 3.0);
    CHECK(dst(0, 0) == doctest::Approx(1.0));
    CHECK(dst(3, 0) == doctest::Approx(0.0));
    // Hand evaluation: f(x, y) = 1 - x - y + 2xy.
    CHECK(dst(1, 0) == doctest::Approx(2.0 / 3.0));
    CHECK(dst(1, 1) == doctest::Approx(1.0 - 2.0 / 3.0 + 2.0 / 9.0));
    // Half-pitch destination hits the exact center.
    const RealField mid = bilinearResample(src, {3, 3}, {0.0, 0.0}, {0.0, 0.0}, 0.5);
    CHECK(mid(1, 1) == doctest::Approx(0.5));
    CHECK(mid(1, 0) == doctest::Approx(0.5));
  }

  SUBCASE("clamp at edges")
  {
    RealField src(3, 1, 1.0, std::vector<double>{1.0, 2.0, 3.0});
    const RealField dst = bilinearResample(src, {2, 1}, {0.0, 0.0}, {-5.0, 0.0}, 10.0);
    CHECK(dst(0, 0) == 1.0);
    CHECK(dst(1, 0) == 3.0);
  }

  CHECK_THROWS_AS(bilinearResample(RealField{}, {2, 2}, {}, {}, 1.0), InvalidArgument);
}

TEST_CASE("extract and embed patches")
{
  const ComplexField f = oracle::randomComplex(8, 8, 5);

  SUBCASE("full field patch at the center is a copy")
  {
    const ComplexField p = extractPatch(f, {4.0, 4.0}, {8, 8});
    CHECK(oracle::relDiff(p, f) == 0.0);
  }

  SUBCASE("single pixel patch")
  {
    const ComplexField p = extractPatch(f, {3.0, 6.0}, {1, 1});
    CHECK(p[0] == f(3, 6));
  }

  SUBCASE("one pitch shift moves content by one index")
  {
    const double pitch = 0.25;
    ComplexField g = f;
    g.setPixelSize(pitch);
    const ComplexField a = extractPatch(g, {3.0 * pitch, 4.0 * pitch}, {3, 3});
    const ComplexField b = extractPatch(g, {4.0 * pitch, 4.0 * pitch}, {3, 3});
    // Index-arithmetic oracle: start = round(c) - 1.
    for (std::size_t j = 0; j < 3; ++j)
      for (std::size_t i = 0; i < 3; ++i)
      {
        CHECK(a(i, j) == f(2 + i, 3 + j));
        CHECK(b(i, j) == f(3 + i, 3 + j));
      }
  }

  SUBCASE("snapping rounds to the nearest pixel")
  {
    CHECK(extractPatch(f, {2.4, 2.6}, {1, 1})[0] == f(2, 3));
  }

  SUBCASE("embedding")
  {
    ComplexField g = f;
    embedAddPatch(g, {4.0, 4.0}, ComplexField(3, 3, 1.0));
    CHECK(oracle::relDiff(g, f) == 0.0);

    const ComplexField p = extractPatch(g, {4.0, 4.0}, {3, 3});
    ComplexField neg = p;
    for (auto& v : neg)
      v = -v;
    embedAddPatch(g, {4.0, 4.0}, neg);
    for (std::size_t j = 3; j < 6; ++j)
      for (std::size_t i = 3; i < 6; ++i)
        CHECK(g(i, j) == Complex(0.0, 0.0));
    CHECK(g(2, 2) == f(2, 2));
    CHECK(g(6, 6) == f(6, 6));
  }

  SUBCASE("overlapping embeds sum")
  {
    ComplexField z(8, 8, 1.0);
    ComplexField ones(4, 4, 1.0, Complex(1.0, 0.5));
    embedAddPatch(z, {3.0, 3.0}, ones);
    embedAddPatch(z, {5.0, 4.0}, ones);
    // Direct summation oracle over both footprints [1,5)x[1,5) and [3,7)x[2,6).
    for (std::size_t j = 0; j < 8; ++j)
      for (std::size_t i = 0; i < 8; ++i)
      {
        int hits = 0;
        hits += (i >= 1 && i < 5 && j >= 1 && j < 5);
        hits += (i >= 3 && i < 7 && j >= 2 && j < 6);
        CHECK(z(i, j) == Complex(1.0, 0.5) * static_cast<double>(hits));
      }
  }

  SUBCASE("out of bounds names the scan index")
  {
    try
    {
      extractPatch(f, {0.0, 0.0}, {4, 4}, 17);
      FAIL("expected OutOfBounds");
    }
    catch (const OutOfBounds& e)
    {
      CHECK(e.scanIndex() == 17);
      CHECK(std::string(e.what()).find("17") != std::string::npos);
    }
    ComplexField g = f;
    CHECK_THROWS_AS(embedAddPatch(g, {7.0, 7.0}, ComplexField(3, 3, 1.0)), OutOfBounds);
  }
}

TEST_CASE("extract and embed are adjoint")
{
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> pos(3.0, 9.0);
  for (int trial = 0; trial < 20; ++trial)
  {
    const ComplexField f = oracle::randomComplex(13, 12, 200 + trial);
    const ComplexField g = oracle::randomComplex(5, 6, 400 + trial);
    const Vec2 c{pos(rng), pos(rng)};

    const ComplexField ef = extractPatch(f, c, g.shape());
    double lhs = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i)
      lhs += (std::conj(ef[i]) * g[i]).real();

    ComplexField eg(f.shape(), f.pixelSize());
    embedAddPatch(eg, c, g);
    double rhs = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i)
      rhs += (std::conj(f[i]) * eg[i]).real();

    CHECK(std::abs(lhs - rhs) <= 1e-12 * std::max(1.0, std::abs(lhs)));
  }
}

TEST_CASE("field construction checks")
{
  CHECK_THROWS_AS(RealField(2, 2, 0.0), InvalidArgument);
  CHECK_THROWS_AS(RealField(2, 2, 1.0, std::vector<double>(3)), InvalidArgument);
  RealField r(2, 2, 1.0);
  CHECK(r.allFinite());
  r(1, 1) = NAN;
  CHECK_FALSE(r.allFinite());
}
