#include "sentalign/synth.hpp"

#include <cmath>
#include <random>

#include <fmt/format.h>

#include "sentalign/errors.hpp"
#include "sentalign/linalg.hpp"

namespace sentalign {
namespace {

// Independent streams for source, map and noise so that changing one knob
// (e.g. noise_sigma) leaves the other draws untouched.
std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream)};
  std::uint32_t words[2];
  seq.generate(words, words + 2);
  return (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
}

}  // namespace

std::string_view to_string(MapKind k) noexcept {
  switch (k) {
    case MapKind::orthogonal:
      return "orthogonal";
    case MapKind::general:
      return "general";
    case MapKind::identity:
      return "identity";
  }
  return "unknown";
}

MapKind parse_map_kind(std::string_view name) {
  if (name == "orthogonal") return MapKind::orthogonal;
  if (name == "general") return MapKind::general;
  if (name == "identity") return MapKind::identity;
  throw ParameterError(fmt::format("unknown map kind '{}'", name));
}

void SynthSpec::validate() const {
  if (n < 1) throw ParameterError("synth: n must be >= 1");
  if (d < 1) throw ParameterError("synth: d must be >= 1");
  if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) {
    throw ParameterError(fmt::format("synth: noise sigma must be >= 0, got {}", noise_sigma));
  }
  if (!std::isfinite(source_scale)) throw ParameterError("synth: source_scale must be finite");
}

SynthCorpus generate(const SynthSpec& spec) {
  spec.validate();
  Matrix source = random_gaussian(spec.n, spec.d, stream_seed(spec.seed, 1));
  if (spec.source_scale != 1.0) {
    for (double& v : source.values()) v *= spec.source_scale;
  }

  Matrix true_map;
  switch (spec.map_kind) {
    case MapKind::orthogonal:
      true_map = random_orthogonal(spec.d, stream_seed(spec.seed, 2));
      break;
    case MapKind::general:
      true_map = random_gaussian(spec.d, spec.d, stream_seed(spec.seed, 2));
      break;
    case MapKind::identity:
      true_map = Matrix::identity(spec.d);
      break;
  }

  Matrix target = spec.map_kind == MapKind::identity ? source : multiply(source, true_map);
  if (spec.noise_sigma > 0.0) {
    std::mt19937_64 rng(stream_seed(spec.seed, 3));
    std::normal_distribution<double> noise(0.0, spec.noise_sigma);
    for (double& v : target.values()) v += noise(rng);
  }

  return {ParallelCorpus(EmbeddingMatrix(std::move(source)), EmbeddingMatrix(std::move(target)),
                         "synth-src", "synth-tgt"),
          std::move(true_map)};
}

}  // namespace sentalign
