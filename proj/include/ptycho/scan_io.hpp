#ifndef PTYCHO_SCAN_IO_HPP
#define PTYCHO_SCAN_IO_HPP

#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "ptycho/field.hpp"
#include "ptycho/forward.hpp"
#include "ptycho/moments.hpp"
#include "ptycho/recon.hpp"
#include "ptycho/wavefront.hpp"

namespace ptycho::io
{

namespace fs = std::filesystem;

inline constexpr const char* kScanFormatVersion = "1.0";
inline constexpr const char* kManifestName = "scan.json";
inline constexpr const char* kStackName = "stack.f32";
inline constexpr const char* kPositionsName = "positions.csv";
inline constexpr const char* kFlatName = "flat.f32";

/// Contents of scan.json.
///
/// The stack is J*Q*Q little-endian float32 values, pattern-major and row-major
/// within a pattern; the flat is one Q*Q pattern in the same encoding; positions
/// are a CSV table "index,x_m,y_m".
struct ScanManifest
{
  std::string version = kScanFormatVersion;
  Shape patternShape;
  Shape objectShape;
  std::size_t numPositions = 0;
  double objectPixelM = 0.0;
  double scanStepM = 0.0;                       // 0 when not a raster
  std::optional<std::pair<std::size_t, std::size_t>> rasterShape;   // rows, cols
  std::string stackFile = kStackName;
  std::string positionsFile = kPositionsName;
  std::string flatFile = kFlatName;
  std::string dtype = "f32le";
  nlohmann::json metadata = nlohmann::json::object();

  nlohmann::json toJson() const;
  static ScanManifest fromJson(const nlohmann::json& j);
};

/// Writes scan.json, stack.f32, positions.csv and flat.f32 into `dir`
/// (created if missing). Returns the manifest path.
fs::path writeScan(const DiffractionStack& stack, const fs::path& dir,
                   const nlohmann::json& metadata = nlohmann::json::object());

/// Reads a scan directory. File sizes are checked against the manifest before
/// the stack is loaded.
DiffractionStack readScan(const fs::path& dir);
ScanManifest readManifest(const fs::path& dir);

enum class FieldKind
{
  Real,
  Complex
};

/// Raw float32 samples at `path` ((re, im) pairs for complex) plus a text
/// header at `path` + ".hdr".
void writeField(const RealField& field, const fs::path& path);
void writeField(const ComplexField& field, const fs::path& path);

std::variant<RealField, ComplexField> readField(const fs::path& path);
RealField readRealField(const fs::path& path);
ComplexField readComplexField(const fs::path& path);
fs::path headerPath(const fs::path& path);

enum class View
{
  Modulus,
  Phase,
  Real,
  Imag
};

View parseView(const std::string& name);
std::string viewName(View v);

struct DisplayRange
{
  double min = 0.0;
  double max = 1.0;
};

/// Binary 8-bit PGM (P5). Values map linearly onto 0..255 over `range`, or over
/// the data min/max when absent (phase defaults to [-pi, pi]). Constant
/// images render as mid-gray 128.
void renderPgm(const ComplexField& field, View view, const fs::path& path,
               std::optional<DisplayRange> range = std::nullopt);
void renderPgm(const RealField& field, const fs::path& path,
               std::optional<DisplayRange> range = std::nullopt);

/// "sweep,cost,log10_cost" table, one row per recorded sweep.
void writeConvergenceCsv(const std::vector<CostSample>& history, const fs::path& path);
std::vector<CostSample> readConvergenceCsv(const fs::path& path);

/// Moment maps: transmission_sq.f32, phi_x.f32, phi_y.f32 plus moments.json.
void writeMomentMaps(const MomentMaps& maps, const fs::path& dir);
MomentMaps readMomentMaps(const fs::path& dir);

/// Wavefront estimate on the scan raster: phase.f32, transmission_sq.f32 plus
/// wavefront.json.
struct Wavefront
{
  GridGeometry raster;
  RealField transmissionSq;
  PhaseMap phase;
};

void writeWavefront(const Wavefront& wf, const fs::path& dir);
Wavefront readWavefront(const fs::path& dir);

} // namespace ptycho::io

#endif
