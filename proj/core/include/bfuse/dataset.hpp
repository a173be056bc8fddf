#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bfuse/raster.hpp"
#include "bfuse/tensor.hpp"

namespace bfuse {

// In-memory image dataset. Pixels are stored as 32-bit floats (the archive's
// on-disk precision) and promoted to doubles when batches are assembled.
struct ImageDataset {
    RasterSpec spec;
    std::vector<std::string> ids;
    std::vector<int> labels;  // 1 = RB, 0 = NRB, -1 = unlabeled
    std::vector<std::string> source_tags;
    std::vector<std::uint32_t> collision_counts;
    std::vector<std::vector<float>> pixels;  // per sample, height*width*channels

    std::size_t size() const { return ids.size(); }
    std::size_t pixels_per_sample() const {
        return spec.height_px * spec.width_px * RasterSpec::kChannels;
    }

    void add(const ChemImage& img, int label, std::string source_tag);
    void validate() const;
};

// Archive container. Layout, all integers little-endian:
//
//   magic   "BIMG" (4 bytes)
//   u32     format version (currently 1)
//   u32     sample count
//   u32     height, u32 width, u32 channels
//   f64     resolution (angstrom per pixel)
//   u32+b   channel scheme identifier
//   then per sample:
//     u32+b   sample id
//     i8      label (1 RB, 0 NRB, -1 unlabeled)
//     u32+b   source tag
//     u32     collision count
//     f32[n]  pixels, row-major (height, width, channels)
void save_image_dataset(const std::string& path, const ImageDataset& ds);
ImageDataset load_image_dataset(const std::string& path);

// Batch tensor (N, H, W, C) for the given sample indices.
Tensor image_batch(const ImageDataset& ds, const std::vector<std::size_t>& indices);

}  // namespace bfuse
