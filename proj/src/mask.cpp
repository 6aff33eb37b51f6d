#include "evidx/mask.hpp"

#include <algorithm>

namespace evidx {

VolumeGrid mask_to_k_regions(const Case& c, const AtlasConfig& atlas) {
  if (c.volume.shape != c.parcellation.shape)
    throw ShapeError("volume and parcellation shapes differ for case " + c.id);
  const std::vector<int> codes = atlas.k_codes();
  for (int code : codes) {
    if (!c.measures.volume_mm3.count(code)) throw MissingRegionError(code);
  }
  int max_code = 0;
  for (std::int32_t l : c.parcellation.labels) max_code = std::max(max_code, int(l));
  for (int code : codes) max_code = std::max(max_code, code);
  std::vector<char> keep(static_cast<std::size_t>(max_code) + 1, 0);
  for (int code : codes)
    if (code >= 0) keep[static_cast<std::size_t>(code)] = 1;

  VolumeGrid out;
  out.shape = c.volume.shape;
  out.data.resize(c.volume.data.size());
  const std::size_t n = out.data.size();
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < static_cast<long long>(n); ++i) {
    auto idx = static_cast<std::size_t>(i);
    std::int32_t code = c.parcellation.labels[idx];
    out.data[idx] = (code > 0 && keep[static_cast<std::size_t>(code)]) ? c.volume.data[idx] : 0.0f;
  }
  return out;
}

}  // namespace evidx
