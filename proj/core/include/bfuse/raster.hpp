#pragma once

#include <array>
#include <string>
#include <vector>

#include "bfuse/mol.hpp"
#include "bfuse/tensor.hpp"

namespace bfuse {

// Raster geometry: a fixed pixel grid at a fixed angstrom-per-pixel scale.
// The physical field of view is width_px * resolution (40 A by default).
struct RasterSpec {
    std::size_t width_px = 80;
    std::size_t height_px = 80;
    double resolution = 0.5;  // angstrom per pixel
    std::string channel_scheme = "zdco-v1";

    static constexpr std::size_t kChannels = 4;

    double field_of_view_x() const { return static_cast<double>(width_px) * resolution; }
    double field_of_view_y() const { return static_cast<double>(height_px) * resolution; }
    void validate() const;
};

// Fixed-shape multi-channel image of one molecule. Channel values are in
// [0,1]; background pixels are exactly zero in all channels.
struct ChemImage {
    Tensor pixels;  // (height, width, channels)
    std::string sample_id;
    std::vector<std::string> collision_warnings;  // atoms that shared a pixel
};

// "zdco-v1" channel scheme, all values computable from the structure file:
//   channel 0: atomic number / 100 on atom pixels, bond order / 4 on bond pixels
//   channel 1: atom degree / 8 on atom pixels, 0 on bond pixels
//   channel 2: (formal charge + 4) / 8 on atom pixels, 0 on bond pixels
//   channel 3: 1.0 on any lit pixel (occupancy mask)
std::array<double, RasterSpec::kChannels> encode_atom_channels(int atomic_number, int degree,
                                                               int formal_charge);
std::array<double, RasterSpec::kChannels> encode_bond_channels(double order);

// Maps the molecule onto the pixel grid: the centroid goes to the image
// center pixel, each atom to its nearest pixel (round half up on both axes),
// and each bond to the discrete line between its endpoint pixels, endpoints
// excluded. Atom channels are written after bond channels so atom pixels win
// conflicts. An atom outside the field of view raises OutOfBoundsError; two
// atoms on one pixel record a collision warning (last writer wins).
ChemImage rasterize(const MolecularGraph& mol, const RasterSpec& spec,
                    std::string sample_id = "");

// Discrete line between two pixels (Bresenham), endpoints excluded. The
// segment is traversed from the lexicographically smaller endpoint so the
// pixel set does not depend on bond direction.
std::vector<std::pair<long, long>> bresenham_between(long r0, long c0, long r1, long c1);

}  // namespace bfuse
