#pragma once

// File formats.
//
// SEMB binary matrix, little-endian:
//   offset  size  field
//        0     4  magic "SEMB"
//        4     4  version (uint32, = 1)
//        8     1  dtype (uint8: 1 = float32, 2 = float64)
//        9     8  rows (uint64)
//       17     8  cols (uint64)
//       25     -  rows * cols values, row-major
//
// Projections are stored as SEMB plus a JSON sidecar at "<path>.json" that
// carries the fit method, diagnostics and preprocessing flags.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "sentalign/embedding.hpp"
#include "sentalign/matrix.hpp"
#include "sentalign/metrics.hpp"
#include "sentalign/solvers.hpp"

namespace sentalign::io {

enum class Dtype : std::uint8_t { f32 = 1, f64 = 2 };

inline constexpr std::uint32_t kSembVersion = 1;
inline constexpr std::size_t kSembHeaderBytes = 25;

struct SembHeader {
  Dtype dtype = Dtype::f64;
  std::uint64_t rows = 0;
  std::uint64_t cols = 0;
};

Dtype parse_dtype(std::string_view name);

std::vector<std::byte> encode_semb(const Matrix& m, Dtype dtype);
/// Validates header, payload length and finiteness.
Matrix decode_semb(std::span<const std::byte> bytes);
SembHeader decode_semb_header(std::span<const std::byte> bytes);

void write_semb(const Matrix& m, const std::filesystem::path& path, Dtype dtype = Dtype::f32);
void write_semb(const EmbeddingMatrix& m, const std::filesystem::path& path,
                Dtype dtype = Dtype::f32);
Matrix read_semb_matrix(const std::filesystem::path& path);
EmbeddingMatrix read_semb(const std::filesystem::path& path);

/// Tab-separated decimal matrix, one row per line.
Matrix parse_tsv_matrix(std::string_view text);
EmbeddingMatrix read_tsv_matrix(const std::filesystem::path& path);
void write_tsv_matrix(const Matrix& m, const std::filesystem::path& path);

/// SEMB unless the extension is .tsv/.txt.
EmbeddingMatrix read_matrix_any(const std::filesystem::path& path);

/// One score per line, each within [0, 5].
StsGold parse_gold_tsv(std::string_view text);
StsGold read_gold_tsv(const std::filesystem::path& path);

/// Projection as SEMB (always float64) plus metadata sidecar.
void write_projection(const ProjectionMatrix& proj, const std::filesystem::path& path);
/// Reads the sidecar when present; otherwise the matrix is treated as a
/// generic least-squares map with no preprocessing.
ProjectionMatrix read_projection(const std::filesystem::path& path);
std::filesystem::path sidecar_path(const std::filesystem::path& projection_path);
nlohmann::ordered_json projection_metadata(const ProjectionMatrix& proj);

/// Rounds to 6 significant digits.
double round_significant(double v, int digits = 6);

nlohmann::ordered_json report_to_json(const AlignmentReport& report);
void write_report_json(const AlignmentReport& report, const std::filesystem::path& path);

/// ISO-8601 UTC; honours SOURCE_DATE_EPOCH for reproducible output.
std::string utc_timestamp();

/// Projection of the centered rows onto the top two principal directions.
/// Each direction is sign-fixed so its first non-negligible component is
/// positive. Returns n x 2.
Matrix pca_2d(const EmbeddingMatrix& m);
void export_2d(const EmbeddingMatrix& m, const std::filesystem::path& path);

/// Pair manifest. Relative paths are resolved against the manifest's folder.
struct PairManifest {
  std::filesystem::path source_path;
  std::filesystem::path target_path;
  std::string source_lang = "src";
  std::string target_lang = "tgt";
  std::optional<std::filesystem::path> gold_path;
  std::string notes;
};

PairManifest read_manifest(const std::filesystem::path& path);
void write_manifest(const PairManifest& manifest, const std::filesystem::path& path);

struct LoadedPairs {
  ParallelCorpus corpus;
  std::optional<StsGold> gold;
};

/// Loads both matrices (and gold when referenced), checking row counts.
LoadedPairs load_manifest(const PairManifest& manifest);

}  // namespace sentalign::io
