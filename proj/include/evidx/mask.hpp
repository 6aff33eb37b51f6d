#pragma once

#include "evidx/types.hpp"

namespace evidx {

// Zeroes every voxel whose parcellation code is outside the atlas's
// disease-relevant region subset; voxels inside are copied unchanged.
// Throws MissingRegionError when a requested region code has no record in
// the case (atlas/dataset mismatch). Idempotent.
VolumeGrid mask_to_k_regions(const Case& c, const AtlasConfig& atlas);

}  // namespace evidx
