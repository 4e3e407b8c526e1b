#pragma once

#include <cstdint>
#include <string_view>

#include "sentalign/embedding.hpp"
#include "sentalign/matrix.hpp"

namespace sentalign {

enum class MapKind { orthogonal, general, identity };

std::string_view to_string(MapKind k) noexcept;
MapKind parse_map_kind(std::string_view name);

/// Recipe for a synthetic bilingual corpus with a planted map.
struct SynthSpec {
  std::size_t n = 200;
  std::size_t d = 16;
  MapKind map_kind = MapKind::orthogonal;
  double noise_sigma = 0.0;  // Gaussian noise added to the target only
  std::uint64_t seed = 0;
  double source_scale = 1.0;

  void validate() const;
};

struct SynthCorpus {
  ParallelCorpus corpus;
  Matrix true_map;
};

/// source = source_scale * N(0,1)^{n x d}; target = source * true_map + noise.
/// Deterministic per spec.
SynthCorpus generate(const SynthSpec& spec);

}  // namespace sentalign
