#include "ptycho/scan_io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

namespace ptycho::io
{

namespace
{

void writeF32le(std::ostream& os, double v)
{
  const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(v));
  const char bytes[4] = {static_cast<char>(bits & 0xffu), static_cast<char>((bits >> 8) & 0xffu),
                         static_cast<char>((bits >> 16) & 0xffu),
                         static_cast<char>((bits >> 24) & 0xffu)};
  os.write(bytes, 4);
}

double decodeF32le(const unsigned char* p)
{
  const std::uint32_t bits = static_cast<std::uint32_t>(p[0]) |
                             (static_cast<std::uint32_t>(p[1]) << 8) |
                             (static_cast<std::uint32_t>(p[2]) << 16) |
                             (static_cast<std::uint32_t>(p[3]) << 24);
  return static_cast<double>(std::bit_cast<float>(bits));
}

std::ofstream openOut(const fs::path& path, bool binary)
{
  if (path.has_parent_path())
    fs::create_directories(path.parent_path());
  std::ofstream os(path, binary ? std::ios::binary : std::ios::out);
  if (!os)
    throw IoError("cannot open " + path.string() + " for writing");
  return os;
}

std::ifstream openIn(const fs::path& path, bool binary)
{
  if (!fs::exists(path))
    throw MissingFile("missing file " + path.string());
  std::ifstream is(path, binary ? std::ios::binary : std::ios::in);
  if (!is)
    throw IoError("cannot open " + path.string());
  return is;
}

void requireSize(const fs::path& path, std::size_t expected)
{
  if (!fs::exists(path))
    throw MissingFile("missing file " + path.string());
  const auto actual = static_cast<std::size_t>(fs::file_size(path));
  if (actual != expected)
    throw SizeMismatch(path.filename().string() + " has the wrong size", expected, actual);
}

std::vector<unsigned char> readBytes(const fs::path& path, std::size_t expected)
{
  requireSize(path, expected);
  std::ifstream is = openIn(path, true);
  std::vector<unsigned char> buf(expected);
  is.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(expected));
  if (static_cast<std::size_t>(is.gcount()) != expected)
    throw SizeMismatch("short read from " + path.string(), expected,
                       static_cast<std::size_t>(is.gcount()));
  return buf;
}

std::string formatDouble(double v)
{
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

nlohmann::json shapeJson(Shape s)
{
  return nlohmann::json::array({s.width, s.height});
}

Shape shapeFromJson(const nlohmann::json& j, const char* what)
{
  if (!j.is_array() || j.size() != 2)
    throw FormatError(std::string(what) + " must be a two-element array");
  return {j[0].get<std::size_t>(), j[1].get<std::size_t>()};
}

nlohmann::json readJson(const fs::path& path)
{
  std::ifstream is = openIn(path, false);
  try
  {
    return nlohmann::json::parse(is);
  }
  catch (const nlohmann::json::exception& e)
  {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void writeJson(const nlohmann::json& j, const fs::path& path)
{
  std::ofstream os = openOut(path, false);
  os << j.dump(2) << '\n';
}

nlohmann::json geometryJson(const GridGeometry& g)
{
  return {{"shape", shapeJson(g.shape)},
          {"step_m", g.pixel_size},
          {"origin_m", nlohmann::json::array({g.origin.x, g.origin.y})}};
}

GridGeometry geometryFromJson(const nlohmann::json& j)
{
  GridGeometry g;
  g.shape = shapeFromJson(j.at("shape"), "raster shape");
  g.pixel_size = j.at("step_m").get<double>();
  const auto& o = j.at("origin_m");
  g.origin = {o.at(0).get<double>(), o.at(1).get<double>()};
  return g;
}

RealField onRaster(RealField f, const GridGeometry& g, const char* what)
{
  if (f.shape() != g.shape)
    throw FormatError(std::string(what) + " does not match the raster shape");
  f.setPixelSize(g.pixel_size);
  return f;
}

} // namespace

nlohmann::json ScanManifest::toJson() const
{
  nlohmann::json j;
  j["version"] = version;
  j["pattern_shape"] = shapeJson(patternShape);
  j["object_shape"] = shapeJson(objectShape);
  j["num_positions"] = numPositions;
  j["object_pixel_m"] = objectPixelM;
  j["scan_step_m"] = scanStepM;
  if (rasterShape)
    j["raster_shape"] = nlohmann::json::array({rasterShape->first, rasterShape->second});
  else
    j["raster_shape"] = nullptr;
  j["files"] = {{"stack", stackFile}, {"positions", positionsFile}, {"flat", flatFile}};
  j["dtype"] = dtype;
  j["metadata"] = metadata;
  return j;
}

ScanManifest ScanManifest::fromJson(const nlohmann::json& j)
{
  ScanManifest m;
  try
  {
    m.version = j.at("version").get<std::string>();
    if (m.version != kScanFormatVersion)
      throw VersionMismatch("unsupported scan format version '" + m.version + "' (expected " +
                            kScanFormatVersion + ")");
    m.patternShape = shapeFromJson(j.at("pattern_shape"), "pattern_shape");
    m.objectShape = shapeFromJson(j.at("object_shape"), "object_shape");
    m.numPositions = j.at("num_positions").get<std::size_t>();
    m.objectPixelM = j.at("object_pixel_m").get<double>();
    m.scanStepM = j.at("scan_step_m").get<double>();
    const auto& r = j.at("raster_shape");
    if (!r.is_null())
    {
      if (!r.is_array() || r.size() != 2)
        throw FormatError("raster_shape must be null or [rows, cols]");
      m.rasterShape = std::make_pair(r[0].get<std::size_t>(), r[1].get<std::size_t>());
    }
    const auto& files = j.at("files");
    m.stackFile = files.at("stack").get<std::string>();
    m.positionsFile = files.at("positions").get<std::string>();
    m.flatFile = files.at("flat").get<std::string>();
    m.dtype = j.at("dtype").get<std::string>();
    if (j.contains("metadata"))
      m.metadata = j.at("metadata");
  }
  catch (const nlohmann::json::exception& e)
  {
    throw FormatError(std::string("malformed scan manifest: ") + e.what());
  }
  if (m.dtype != "f32le")
    throw FormatError("unsupported dtype '" + m.dtype + "'");
  return m;
}

fs::path writeScan(const DiffractionStack& stack, const fs::path& dir,
                   const nlohmann::json& metadata)
{
  stack.validate();
  fs::create_directories(dir);

  ScanManifest m;
  m.patternShape = stack.plan.patternShape;
  m.objectShape = stack.plan.objectShape;
  m.numPositions = stack.size();
  m.objectPixelM = stack.plan.pixelSize;
  if (stack.plan.raster)
  {
    m.scanStepM = stack.plan.raster->step;
    m.rasterShape = std::make_pair(stack.plan.raster->rows, stack.plan.raster->cols);
  }
  m.metadata = metadata;

  {
    std::ofstream os = openOut(dir / m.stackFile, true);
    for (const auto& p : stack.patterns)
      for (double v : p)
        writeF32le(os, v);
  }
  {
    std::ofstream os = openOut(dir / m.flatFile, true);
    for (double v : stack.flat)
      writeF32le(os, v);
  }
  {
    std::ofstream os = openOut(dir / m.positionsFile, false);
    os << "index,x_m,y_m\n";
    for (std::size_t j = 0; j < stack.plan.size(); ++j)
      os << j << ',' << formatDouble(stack.plan.positions[j].x) << ','
         << formatDouble(stack.plan.positions[j].y) << '\n';
  }
  const fs::path manifest = dir / kManifestName;
  writeJson(m.toJson(), manifest);
  return manifest;
}

ScanManifest readManifest(const fs::path& dir)
{
  return ScanManifest::fromJson(readJson(dir / kManifestName));
}

DiffractionStack readScan(const fs::path& dir)
{
  const ScanManifest m = readManifest(dir);
  const std::size_t patternBytes = m.patternShape.size() * 4;

  // Validate sizes before allocating anything large.
  requireSize(dir / m.stackFile, m.numPositions * patternBytes);
  requireSize(dir / m.flatFile, patternBytes);

  DiffractionStack stack;
  stack.plan.patternShape = m.patternShape;
  stack.plan.objectShape = m.objectShape;
  stack.plan.pixelSize = m.objectPixelM;
  if (m.rasterShape)
    stack.plan.raster = RasterShape{m.rasterShape->first, m.rasterShape->second, m.scanStepM};

  {
    std::ifstream is = openIn(dir / m.positionsFile, false);
    std::string line;
    std::getline(is, line);
    if (line != "index,x_m,y_m")
      throw FormatError("positions table has an unexpected header: '" + line + "'");
    while (std::getline(is, line))
    {
      if (line.empty())
        continue;
      std::istringstream row(line);
      std::string idx, xs, ys;
      if (!std::getline(row, idx, ',') || !std::getline(row, xs, ',') || !std::getline(row, ys))
        throw FormatError("malformed positions row: '" + line + "'");
      if (std::stoul(idx) != stack.plan.positions.size())
        throw FormatError("positions table is not in index order");
      stack.plan.positions.push_back({std::stod(xs), std::stod(ys)});
    }
    if (stack.plan.positions.size() != m.numPositions)
      throw FormatError("positions table has " + std::to_string(stack.plan.positions.size()) +
                        " rows, manifest says " + std::to_string(m.numPositions));
  }

  const double dq = 2.0 * std::numbers::pi /
                    (static_cast<double>(m.patternShape.width) * m.objectPixelM);
  const auto raw = readBytes(dir / m.stackFile, m.numPositions * patternBytes);
  stack.patterns.reserve(m.numPositions);
  for (std::size_t j = 0; j < m.numPositions; ++j)
  {
    RealField p(m.patternShape, dq);
    const unsigned char* base = raw.data() + j * patternBytes;
    for (std::size_t k = 0; k < p.size(); ++k)
      p[k] = decodeF32le(base + 4 * k);
    stack.patterns.push_back(std::move(p));
  }
  const auto flatRaw = readBytes(dir / m.flatFile, patternBytes);
  stack.flat = RealField(m.patternShape, dq);
  for (std::size_t k = 0; k < stack.flat.size(); ++k)
    stack.flat[k] = decodeF32le(flatRaw.data() + 4 * k);

  stack.validate();
  return stack;
}

fs::path headerPath(const fs::path& path)
{
  return fs::path(path.string() + ".hdr");
}

namespace
{

struct FieldHeader
{
  FieldKind kind = FieldKind::Real;
  Shape shape;
  double pixelSize = 1.0;
};

void writeHeader(const FieldHeader& h, const fs::path& path)
{
  std::ofstream os = openOut(headerPath(path), false);
  os << "kind " << (h.kind == FieldKind::Complex ? "complex" : "real") << '\n'
     << "width " << h.shape.width << '\n'
     << "height " << h.shape.height << '\n'
     << "pixel_size " << formatDouble(h.pixelSize) << '\n'
     << "dtype f32le\n";
}

FieldHeader readHeader(const fs::path& path)
{
  std::ifstream is = openIn(headerPath(path), false);
  FieldHeader h;
  bool haveKind = false, haveW = false, haveH = false, havePs = false;
  std::string key;
  while (is >> key)
  {
    std::string value;
    if (!(is >> value))
      throw FormatError("field header entry '" + key + "' has no value");
    if (key == "kind")
    {
      if (value == "complex")
        h.kind = FieldKind::Complex;
      else if (value == "real")
        h.kind = FieldKind::Real;
      else
        throw FormatError("unknown field kind '" + value + "'");
      haveKind = true;
    }
    else if (key == "width")
    {
      h.shape.width = std::stoul(value);
      haveW = true;
    }
    else if (key == "height")
    {
      h.shape.height = std::stoul(value);
      haveH = true;
    }
    else if (key == "pixel_size")
    {
      h.pixelSize = std::stod(value);
      havePs = true;
    }
    else if (key == "dtype")
    {
      if (value != "f32le")
        throw FormatError("unsupported field dtype '" + value + "'");
    }
    else
      throw FormatError("unknown field header key '" + key + "'");
  }
  if (!haveKind || !haveW || !haveH || !havePs)
    throw FormatError("incomplete field header " + headerPath(path).string());
  return h;
}

} // namespace

void writeField(const RealField& field, const fs::path& path)
{
  field.requireFinite("writeField");
  {
    std::ofstream os = openOut(path, true);
    for (double v : field)
      writeF32le(os, v);
  }
  writeHeader({FieldKind::Real, field.shape(), field.pixelSize()}, path);
}

void writeField(const ComplexField& field, const fs::path& path)
{
  field.requireFinite("writeField");
  {
    std::ofstream os = openOut(path, true);
    for (const Complex& v : field)
    {
      writeF32le(os, v.real());
      writeF32le(os, v.imag());
    }
  }
  writeHeader({FieldKind::Complex, field.shape(), field.pixelSize()}, path);
}

std::variant<RealField, ComplexField> readField(const fs::path& path)
{
  const FieldHeader h = readHeader(path);
  const std::size_t n = h.shape.size();
  if (h.kind == FieldKind::Real)
  {
    const auto raw = readBytes(path, n * 4);
    RealField f(h.shape, h.pixelSize);
    for (std::size_t k = 0; k < n; ++k)
      f[k] = decodeF32le(raw.data() + 4 * k);
    return f;
  }
  const auto raw = readBytes(path, n * 8);
  ComplexField f(h.shape, h.pixelSize);
  for (std::size_t k = 0; k < n; ++k)
    f[k] = Complex(decodeF32le(raw.data() + 8 * k), decodeF32le(raw.data() + 8 * k + 4));
  return f;
}

RealField readRealField(const fs::path& path)
{
  auto v = readField(path);
  if (auto* f = std::get_if<RealField>(&v))
    return std::move(*f);
  throw KindMismatch(path.string() + " holds a complex field, expected real");
}

ComplexField readComplexField(const fs::path& path)
{
  auto v = readField(path);
  if (auto* f = std::get_if<ComplexField>(&v))
    return std::move(*f);
  throw KindMismatch(path.string() + " holds a real field, expected complex");
}

View parseView(const std::string& name)
{
  if (name == "modulus")
    return View::Modulus;
  if (name == "phase")
    return View::Phase;
  if (name == "real")
    return View::Real;
  if (name == "imag")
    return View::Imag;
  throw InvalidArgument("unknown view '" + name + "' (modulus, phase, real, imag)");
}

std::string viewName(View v)
{
  switch (v)
  {
  case View::Modulus: return "modulus";
  case View::Phase: return "phase";
  case View::Real: return "real";
  case View::Imag: return "imag";
  }
  return "real";
}

namespace
{

void writePgm(const std::vector<double>& values, Shape shape, const fs::path& path,
              std::optional<DisplayRange> range)
{
  DisplayRange r;
  if (range)
    r = *range;
  else if (!values.empty())
  {
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    r = {*lo, *hi};
  }

  std::ofstream os = openOut(path, true);
  os << "P5\n" << shape.width << ' ' << shape.height << "\n255\n";
  std::vector<unsigned char> pixels(values.size());
  for (std::size_t i = 0; i < values.size(); ++i)
  {
    double g = 128.0;
    if (r.max > r.min)
      g = std::round((values[i] - r.min) / (r.max - r.min) * 255.0);
    pixels[i] = static_cast<unsigned char>(std::clamp(g, 0.0, 255.0));
  }
  os.write(reinterpret_cast<const char*>(pixels.data()), static_cast<std::streamsize>(pixels.size()));
}

} // namespace

void renderPgm(const ComplexField& field, View view, const fs::path& path,
               std::optional<DisplayRange> range)
{
  std::vector<double> values(field.size());
  for (std::size_t i = 0; i < field.size(); ++i)
  {
    switch (view)
    {
    case View::Modulus: values[i] = std::abs(field[i]); break;
    case View::Phase: values[i] = std::arg(field[i]); break;
    case View::Real: values[i] = field[i].real(); break;
    case View::Imag: values[i] = field[i].imag(); break;
    }
  }
  if (view == View::Phase && !range)
    range = DisplayRange{-std::numbers::pi, std::numbers::pi};
  writePgm(values, field.shape(), path, range);
}

void renderPgm(const RealField& field, const fs::path& path, std::optional<DisplayRange> range)
{
  writePgm(std::vector<double>(field.begin(), field.end()), field.shape(), path, range);
}

void writeConvergenceCsv(const std::vector<CostSample>& history, const fs::path& path)
{
  std::ofstream os = openOut(path, false);
  os << "sweep,cost,log10_cost\n";
  for (const auto& s : history)
    os << s.sweep << ',' << formatDouble(s.cost) << ',' << formatDouble(std::log10(s.cost)) << '\n';
}

std::vector<CostSample> readConvergenceCsv(const fs::path& path)
{
  std::ifstream is = openIn(path, false);
  std::string line;
  std::getline(is, line);
  if (line != "sweep,cost,log10_cost")
    throw FormatError("unexpected convergence header '" + line + "'");
  std::vector<CostSample> out;
  while (std::getline(is, line))
  {
    if (line.empty())
      continue;
    std::istringstream row(line);
    std::string sweep, cost;
    std::getline(row, sweep, ',');
    std::getline(row, cost, ',');
    out.push_back({std::stoul(sweep), std::stod(cost)});
  }
  return out;
}

void writeMomentMaps(const MomentMaps& maps, const fs::path& dir)
{
  fs::create_directories(dir);
  writeField(maps.transmissionSq, dir / "transmission_sq.f32");
  writeField(maps.phiX, dir / "phi_x.f32");
  writeField(maps.phiY, dir / "phi_y.f32");
  writeJson({{"raster", geometryJson(maps.raster)},
             {"corrected", maps.corrected},
             {"units", {{"transmission_sq", "1"}, {"phi_x", "rad/m"}, {"phi_y", "rad/m"}}}},
            dir / "moments.json");
}

MomentMaps readMomentMaps(const fs::path& dir)
{
  const nlohmann::json j = readJson(dir / "moments.json");
  MomentMaps maps;
  try
  {
    maps.raster = geometryFromJson(j.at("raster"));
    maps.corrected = j.at("corrected").get<bool>();
  }
  catch (const nlohmann::json::exception& e)
  {
    throw FormatError(std::string("malformed moments.json: ") + e.what());
  }
  maps.transmissionSq = onRaster(readRealField(dir / "transmission_sq.f32"), maps.raster, "transmission_sq");
  maps.phiX = onRaster(readRealField(dir / "phi_x.f32"), maps.raster, "phi_x");
  maps.phiY = onRaster(readRealField(dir / "phi_y.f32"), maps.raster, "phi_y");
  return maps;
}

void writeWavefront(const Wavefront& wf, const fs::path& dir)
{
  fs::create_directories(dir);
  writeField(wf.transmissionSq, dir / "transmission_sq.f32");
  writeField(wf.phase.phase, dir / "phase.f32");
  writeJson({{"raster", geometryJson(wf.raster)}, {"mean_free", wf.phase.meanFree}},
            dir / "wavefront.json");
}

Wavefront readWavefront(const fs::path& dir)
{
  const nlohmann::json j = readJson(dir / "wavefront.json");
  Wavefront wf;
  try
  {
    wf.raster = geometryFromJson(j.at("raster"));
    wf.phase.meanFree = j.at("mean_free").get<bool>();
  }
  catch (const nlohmann::json::exception& e)
  {
    throw FormatError(std::string("malformed wavefront.json: ") + e.what());
  }
  wf.transmissionSq = onRaster(readRealField(dir / "transmission_sq.f32"), wf.raster, "transmission_sq");
  wf.phase.phase = onRaster(readRealField(dir / "phase.f32"), wf.raster, "phase");
  return wf;
}

} // namespace ptycho::io
