#pragma once

#include "slt/manifest.hpp"
#include "slt/types.hpp"

namespace slt {

// Scanline polygon fill, even-odd rule evaluated at pixel centers. Writes
// class and (when nonzero) instance IDs; callers control overlap policy by
// paint order. Throws DegeneratePolygon for polygons with < 3 distinct vertices.
void fill_polygon(LabelMask& mask, const std::vector<Vec2>& polygon, uint8_t class_id,
                  uint32_t instance_id);

// Materializes polygon annotations as a mask of `size`, scaling vertices from
// `source_size`. Later annotations win on overlap.
LabelMask rasterize_annotations(const AnnotationSet& ann, int width, int height,
                                int source_width, int source_height,
                                const std::vector<ClassInfo>& taxonomy = default_taxonomy());

}  // namespace slt
