#include "sentalign/io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <sstream>

#include <fmt/chrono.h>
#include <fmt/format.h>

#include "sentalign/errors.hpp"
#include "sentalign/linalg.hpp"
#include "sentalign/simd.hpp"
#include "sentalign/version.hpp"

namespace sentalign::io {
namespace fs = std::filesystem;
namespace {

constexpr char kMagic[4] = {'S', 'E', 'M', 'B'};

template <typename T>
void put_le(std::vector<std::byte>& out, T value) {
  using U = std::conditional_t<sizeof(T) == 8, std::uint64_t,
                               std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint8_t>>;
  const U bits = std::bit_cast<U>(value);
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    out.push_back(static_cast<std::byte>((bits >> (8 * i)) & 0xFFu));
  }
}

template <typename T>
T get_le(std::span<const std::byte> bytes, std::size_t offset) {
  using U = std::conditional_t<sizeof(T) == 8, std::uint64_t,
                               std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint8_t>>;
  U bits = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    bits |= static_cast<U>(std::to_integer<std::uint8_t>(bytes[offset + i])) << (8 * i);
  }
  return std::bit_cast<T>(bits);
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(fmt::format("cannot open '{}'", path.string()));
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::vector<std::byte> read_bytes(const fs::path& path) {
  const std::string text = read_text(path);
  std::vector<std::byte> out(text.size());
  std::memcpy(out.data(), text.data(), text.size());
  return out;
}

void write_text(const fs::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError(fmt::format("cannot open '{}' for writing", path.string()));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw DataError(fmt::format("write to '{}' failed", path.string()));
}

// Splits into lines, dropping a single trailing newline and any '\r'.
std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    start = end + 1;
  }
  return lines;
}

double parse_number(std::string_view token, std::size_t line, std::size_t column) {
  double value = 0.0;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  if (!token.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (token.empty() || ec != std::errc{} || ptr != last) {
    throw DataError(
        fmt::format("line {}, column {}: cannot parse '{}' as a number", line, column, token));
  }
  if (!std::isfinite(value)) {
    throw DataError(fmt::format("line {}, column {}: non-finite value '{}'", line, column, token));
  }
  return value;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

std::string extension_lower(const fs::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext;
}

fs::path resolve(const fs::path& base_dir, const fs::path& p) {
  return p.is_absolute() ? p : base_dir / p;
}

}  // namespace

Dtype parse_dtype(std::string_view name) {
  if (name == "f32" || name == "float32" || name == "1") return Dtype::f32;
  if (name == "f64" || name == "float64" || name == "2") return Dtype::f64;
  throw ParameterError(fmt::format("unknown dtype '{}' (expected f32 or f64)", name));
}

std::vector<std::byte> encode_semb(const Matrix& m, Dtype dtype) {
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) {
      if (!std::isfinite(m(r, c))) {
        throw DataError(fmt::format("refusing to write non-finite value at row {} col {}", r, c));
      }
    }
  }
  const std::size_t width = dtype == Dtype::f32 ? 4 : 8;
  std::vector<std::byte> out;
  out.reserve(kSembHeaderBytes + m.size() * width);
  for (char ch : kMagic) out.push_back(static_cast<std::byte>(ch));
  put_le<std::uint32_t>(out, kSembVersion);
  put_le<std::uint8_t>(out, static_cast<std::uint8_t>(dtype));
  put_le<std::uint64_t>(out, m.rows());
  put_le<std::uint64_t>(out, m.cols());
  for (double v : m.values()) {
    if (dtype == Dtype::f32) {
      put_le<float>(out, static_cast<float>(v));
    } else {
      put_le<double>(out, v);
    }
  }
  return out;
}

SembHeader decode_semb_header(std::span<const std::byte> bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw DataError("not a SEMB file");
  }
  if (bytes.size() < kSembHeaderBytes) {
    throw DataError(fmt::format("truncated SEMB header: {} of {} bytes", bytes.size(),
                                kSembHeaderBytes));
  }
  const auto version = get_le<std::uint32_t>(bytes, 4);
  if (version != kSembVersion) {
    throw DataError(fmt::format("unsupported SEMB version {}", version));
  }
  const auto dtype = get_le<std::uint8_t>(bytes, 8);
  if (dtype != 1 && dtype != 2) throw DataError(fmt::format("unknown SEMB dtype {}", dtype));
  return {static_cast<Dtype>(dtype), get_le<std::uint64_t>(bytes, 9),
          get_le<std::uint64_t>(bytes, 17)};
}

Matrix decode_semb(std::span<const std::byte> bytes) {
  const SembHeader h = decode_semb_header(bytes);
  const std::uint64_t width = h.dtype == Dtype::f32 ? 4 : 8;
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() / width;
  if (h.cols != 0 && h.rows > limit / h.cols) {
    throw DataError(fmt::format("payload length mismatch: {}x{} overflows", h.rows, h.cols));
  }
  const std::uint64_t expected = h.rows * h.cols * width;
  const std::uint64_t actual = bytes.size() - kSembHeaderBytes;
  if (expected != actual) {
    throw DataError(fmt::format("payload length mismatch: header says {}x{} ({} bytes), found {}",
                                h.rows, h.cols, expected, actual));
  }
  std::vector<double> values(h.rows * h.cols);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const std::size_t offset = kSembHeaderBytes + i * width;
    const double v = h.dtype == Dtype::f32 ? static_cast<double>(get_le<float>(bytes, offset))
                                           : get_le<double>(bytes, offset);
    if (!std::isfinite(v)) {
      throw DataError(
          fmt::format("non-finite value at row {} col {}", i / h.cols, i % h.cols));
    }
    values[i] = v;
  }
  return Matrix(h.rows, h.cols, std::move(values));
}

void write_semb(const Matrix& m, const fs::path& path, Dtype dtype) {
  const auto bytes = encode_semb(m, dtype);
  write_text(path, std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

void write_semb(const EmbeddingMatrix& m, const fs::path& path, Dtype dtype) {
  write_semb(m.matrix(), path, dtype);
}

Matrix read_semb_matrix(const fs::path& path) {
  try {
    return decode_semb(read_bytes(path));
  } catch (const DataError& e) {
    throw DataError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

EmbeddingMatrix read_semb(const fs::path& path) {
  Matrix m = read_semb_matrix(path);
  if (m.rows() == 0 || m.cols() == 0) {
    throw DataError(fmt::format("{}: empty matrix ({}x{})", path.string(), m.rows(), m.cols()));
  }
  return EmbeddingMatrix(std::move(m));
}

Matrix parse_tsv_matrix(std::string_view text) {
  const auto lines = split_lines(text);
  std::vector<double> values;
  std::size_t cols = 0;
  std::size_t rows = 0;
  for (std::size_t li = 0; li < lines.size(); ++li) {
    const std::size_t line_no = li + 1;
    if (lines[li].empty()) {
      // Blank lines are only tolerated at the end of the file.
      const bool rest_blank = std::all_of(lines.begin() + static_cast<std::ptrdiff_t>(li),
                                          lines.end(), [](auto l) { return l.empty(); });
      if (rest_blank) break;
      throw DataError(fmt::format("line {}: empty row", line_no));
    }
    std::size_t col = 0;
    std::size_t start = 0;
    while (true) {
      const std::size_t tab = lines[li].find('\t', start);
      const auto token = trim(lines[li].substr(start, tab == std::string_view::npos
                                                          ? std::string_view::npos
                                                          : tab - start));
      values.push_back(parse_number(token, line_no, col + 1));
      ++col;
      if (tab == std::string_view::npos) break;
      start = tab + 1;
    }
    if (rows == 0) {
      cols = col;
    } else if (col != cols) {
      throw DataError(
          fmt::format("line {}: ragged row with {} columns, expected {}", line_no, col, cols));
    }
    ++rows;
  }
  if (rows == 0) throw DataError("empty matrix text");
  return Matrix(rows, cols, std::move(values));
}

EmbeddingMatrix read_tsv_matrix(const fs::path& path) {
  try {
    return EmbeddingMatrix(parse_tsv_matrix(read_text(path)));
  } catch (const DataError& e) {
    throw DataError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

void write_tsv_matrix(const Matrix& m, const fs::path& path) {
  std::string text;
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) {
      if (c > 0) text.push_back('\t');
      text += fmt::format("{}", m(r, c));
    }
    text.push_back('\n');
  }
  write_text(path, text);
}

EmbeddingMatrix read_matrix_any(const fs::path& path) {
  const std::string ext = extension_lower(path);
  if (ext == ".tsv" || ext == ".txt") return read_tsv_matrix(path);
  return read_semb(path);
}

StsGold parse_gold_tsv(std::string_view text) {
  const auto lines = split_lines(text);
  std::vector<double> scores;
  for (std::size_t li = 0; li < lines.size(); ++li) {
    const auto line = trim(lines[li]);
    if (line.empty()) {
      const bool rest_blank = std::all_of(lines.begin() + static_cast<std::ptrdiff_t>(li),
                                          lines.end(), [](auto l) { return trim(l).empty(); });
      if (rest_blank) break;
      throw DataError(fmt::format("line {}: empty gold line", li + 1));
    }
    const double s = parse_number(line, li + 1, 1);
    if (s < StsGold::kMinScore || s > StsGold::kMaxScore) {
      throw DataError(fmt::format("line {}: gold score {} outside [0,5]", li + 1, s));
    }
    scores.push_back(s);
  }
  if (scores.empty()) throw DataError("gold file has no scores");
  return StsGold(std::move(scores));
}

StsGold read_gold_tsv(const fs::path& path) {
  try {
    return parse_gold_tsv(read_text(path));
  } catch (const DataError& e) {
    throw DataError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

fs::path sidecar_path(const fs::path& projection_path) {
  fs::path p = projection_path;
  p += ".json";
  return p;
}

nlohmann::ordered_json projection_metadata(const ProjectionMatrix& proj) {
  const FitDiagnostics& d = proj.diagnostics();
  nlohmann::ordered_json j;
  j["tool"] = kToolName;
  j["version"] = kVersion;
  j["method"] = to_string(proj.method());
  j["dim"] = proj.dim();
  j["solver"] = d.solver;
  j["objective"] = d.objective;
  j["residual_frobenius"] = d.residual_frobenius;
  j["iterations"] = d.iterations;
  j["ridge"] = d.ridge;
  j["seed"] = d.seed ? nlohmann::ordered_json(*d.seed) : nlohmann::ordered_json(nullptr);
  j["preprocessing"] = {{"center", d.preprocessing.center},
                        {"unit_norm", d.preprocessing.unit_norm}};
  return j;
}

void write_projection(const ProjectionMatrix& proj, const fs::path& path) {
  write_semb(proj.matrix(), path, Dtype::f64);
  write_text(sidecar_path(path), projection_metadata(proj).dump(2) + "\n");
}

ProjectionMatrix read_projection(const fs::path& path) {
  Matrix m = read_semb_matrix(path);
  const fs::path meta_path = sidecar_path(path);
  if (!fs::exists(meta_path)) {
    return ProjectionMatrix(std::move(m), FitMethod::least_squares);
  }
  try {
    const auto j = nlohmann::json::parse(read_text(meta_path));
    FitDiagnostics d;
    d.solver = j.value("solver", "");
    d.objective = j.value("objective", 0.0);
    d.residual_frobenius = j.value("residual_frobenius", 0.0);
    d.iterations = j.value("iterations", std::size_t{0});
    d.ridge = j.value("ridge", 0.0);
    if (j.contains("seed") && !j["seed"].is_null()) d.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("preprocessing")) {
      d.preprocessing.center = j["preprocessing"].value("center", false);
      d.preprocessing.unit_norm = j["preprocessing"].value("unit_norm", false);
    }
    const FitMethod method = parse_fit_method(j.value("method", "least_squares"));
    return ProjectionMatrix(std::move(m), method, std::move(d));
  } catch (const nlohmann::json::exception& e) {
    throw DataError(fmt::format("{}: bad projection metadata: {}", meta_path.string(), e.what()));
  }
}

double round_significant(double v, int digits) {
  if (v == 0.0 || !std::isfinite(v)) return v;
  return std::strtod(fmt::format("{:.{}g}", v, digits).c_str(), nullptr);
}

nlohmann::ordered_json report_to_json(const AlignmentReport& report) {
  nlohmann::ordered_json j;
  j["tool"] = kToolName;
  j["version"] = kVersion;
  j["method"] = report.method;
  j["timestamp"] = report.timestamp.empty() ? utc_timestamp() : report.timestamp;
  j["n_pairs"] = report.n_pairs;
  j["avg_cosine"] = round_significant(report.avg_cosine);
  j["residual_frobenius"] = round_significant(report.residual_frobenius);
  if (report.spearman) {
    j["spearman"] = round_significant(*report.spearman);
    j["spearman_percentile"] = round_significant(to_percentile(*report.spearman));
  }
  if (report.pearson) {
    j["pearson"] = round_significant(*report.pearson);
    j["pearson_percentile"] = round_significant(to_percentile(*report.pearson));
  }
  if (!report.note.empty()) j["note"] = report.note;
  if (report.per_pair_cosine) {
    auto& arr = j["per_pair_cosine"] = nlohmann::ordered_json::array();
    for (double c : *report.per_pair_cosine) arr.push_back(round_significant(c));
  }
  return j;
}

void write_report_json(const AlignmentReport& report, const fs::path& path) {
  write_text(path, report_to_json(report).dump(2) + "\n");
}

std::string utc_timestamp() {
  using namespace std::chrono;
  std::time_t t = system_clock::to_time_t(system_clock::now());
  if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH")) {
    long long parsed = 0;
    const std::string_view s{epoch};
    if (std::from_chars(s.data(), s.data() + s.size(), parsed).ec == std::errc{}) {
      t = static_cast<std::time_t>(parsed);
    }
  }
  return fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", fmt::gmtime(t));
}

Matrix pca_2d(const EmbeddingMatrix& m) {
  if (m.rows() < 2) throw DataError(fmt::format("export_2d needs n >= 2 rows, got {}", m.rows()));
  if (m.cols() < 2) throw DataError(fmt::format("export_2d needs d >= 2, got {}", m.cols()));
  const EmbeddingMatrix centered = center_columns(m);
  const SvdResult s = svd(centered.matrix());
  Matrix directions(m.cols(), 2);  // columns are the principal directions
  for (std::size_t k = 0; k < 2; ++k) {
    const auto dir = s.vt.row(k);
    double sign = 1.0;
    for (double v : dir) {
      if (std::abs(v) > 1e-12) {
        sign = v > 0.0 ? 1.0 : -1.0;
        break;
      }
    }
    for (std::size_t j = 0; j < m.cols(); ++j) directions(j, k) = sign * dir[j];
  }
  return multiply(centered.matrix(), directions);
}

void export_2d(const EmbeddingMatrix& m, const fs::path& path) {
  write_tsv_matrix(pca_2d(m), path);
}

PairManifest read_manifest(const fs::path& path) {
  const fs::path base = path.parent_path();
  try {
    const auto j = nlohmann::json::parse(read_text(path));
    PairManifest out;
    out.source_path = resolve(base, j.at("source").get<std::string>());
    out.target_path = resolve(base, j.at("target").get<std::string>());
    out.source_lang = j.value("source_lang", "src");
    out.target_lang = j.value("target_lang", "tgt");
    if (j.contains("gold") && !j["gold"].is_null()) {
      out.gold_path = resolve(base, j["gold"].get<std::string>());
    }
    out.notes = j.value("notes", "");
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(fmt::format("{}: bad manifest: {}", path.string(), e.what()));
  }
}

void write_manifest(const PairManifest& manifest, const fs::path& path) {
  nlohmann::ordered_json j;
  j["source"] = manifest.source_path.string();
  j["target"] = manifest.target_path.string();
  j["source_lang"] = manifest.source_lang;
  j["target_lang"] = manifest.target_lang;
  j["gold"] = manifest.gold_path ? nlohmann::ordered_json(manifest.gold_path->string())
                                 : nlohmann::ordered_json(nullptr);
  j["notes"] = manifest.notes;
  write_text(path, j.dump(2) + "\n");
}

LoadedPairs load_manifest(const PairManifest& manifest) {
  for (const fs::path& p : {manifest.source_path, manifest.target_path}) {
    if (!fs::exists(p)) throw DataError(fmt::format("manifest references missing file '{}'", p.string()));
  }
  ParallelCorpus corpus(read_matrix_any(manifest.source_path),
                        read_matrix_any(manifest.target_path), manifest.source_lang,
                        manifest.target_lang);
  std::optional<StsGold> gold;
  if (manifest.gold_path) {
    gold = read_gold_tsv(*manifest.gold_path);
    if (gold->size() != corpus.pairs()) {
      throw DataError(fmt::format("gold has {} scores but corpus has {} pairs", gold->size(),
                                  corpus.pairs()));
    }
  }
  return {std::move(corpus), std::move(gold)};
}

}  // namespace sentalign::io
