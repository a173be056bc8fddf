#include "bfuse/raster.hpp"

#include <algorithm>
#include <cmath>

#include "bfuse/errors.hpp"

namespace bfuse {

void RasterSpec::validate() const {
    if (width_px == 0 || height_px == 0) throw ValidationError("raster grid must be non-empty");
    if (!(resolution > 0.0)) throw ValidationError("raster resolution must be positive");
}

std::array<double, RasterSpec::kChannels> encode_atom_channels(int atomic_number, int degree,
                                                               int formal_charge) {
    if (atomic_number < 1 || atomic_number > 100) {
        throw ValidationError("atomic number outside encodable range [1,100]: " +
                              std::to_string(atomic_number));
    }
    if (degree < 0 || degree > 8) {
        throw ValidationError("atom degree outside encodable range [0,8]: " +
                              std::to_string(degree));
    }
    if (formal_charge < -4 || formal_charge > 4) {
        throw ValidationError("formal charge outside encodable range [-4,4]: " +
                              std::to_string(formal_charge));
    }
    return {static_cast<double>(atomic_number) / 100.0, static_cast<double>(degree) / 8.0,
            (static_cast<double>(formal_charge) + 4.0) / 8.0, 1.0};
}

std::array<double, RasterSpec::kChannels> encode_bond_channels(double order) {
    if (!(order > 0.0 && order <= 4.0)) {
        throw ValidationError("bond order outside encodable range (0,4]: " +
                              std::to_string(order));
    }
    return {order / 4.0, 0.0, 0.0, 1.0};
}

std::vector<std::pair<long, long>> bresenham_between(long r0, long c0, long r1, long c1) {
    // Canonical direction so the pixel set is independent of endpoint order.
    if (std::pair(r0, c0) > std::pair(r1, c1)) {
        std::swap(r0, r1);
        std::swap(c0, c1);
    }
    std::vector<std::pair<long, long>> pts;
    const long dr = std::abs(r1 - r0);
    const long dc = std::abs(c1 - c0);
    const long sr = r0 < r1 ? 1 : -1;
    const long sc = c0 < c1 ? 1 : -1;
    long err = dc - dr;
    long r = r0, c = c0;
    for (;;) {
        pts.emplace_back(r, c);
        if (r == r1 && c == c1) break;
        const long e2 = 2 * err;
        if (e2 >= -dr) {
            err -= dr;
            c += sc;
        }
        if (e2 <= dc) {
            err += dc;
            r += sr;
        }
    }
    // Endpoints excluded: they belong to the atoms.
    if (pts.size() <= 2) return {};
    return {pts.begin() + 1, pts.end() - 1};
}

namespace {

long round_half_up(double t) {
    return static_cast<long>(std::floor(t + 0.5));
}

}  // namespace

ChemImage rasterize(const MolecularGraph& mol, const RasterSpec& spec, std::string sample_id) {
    spec.validate();
    mol.validate();

    const auto [cx, cy] = mol.centroid();
    const double half_w = static_cast<double>(spec.width_px) / 2.0;
    const double half_h = static_cast<double>(spec.height_px) / 2.0;

    // Pixel of each atom. x grows with column, y grows upward (row shrinks).
    std::vector<std::pair<long, long>> atom_px(mol.atoms.size());
    double min_x = 0.0, max_x = 0.0, min_y = 0.0, max_y = 0.0;
    bool oob = false;
    for (std::size_t i = 0; i < mol.atoms.size(); ++i) {
        const double dx = mol.atoms[i].x - cx;
        const double dy = mol.atoms[i].y - cy;
        min_x = std::min(min_x, dx);
        max_x = std::max(max_x, dx);
        min_y = std::min(min_y, dy);
        max_y = std::max(max_y, dy);
        const long col = round_half_up(half_w + dx / spec.resolution);
        const long row = round_half_up(half_h - dy / spec.resolution);
        if (col < 0 || col >= static_cast<long>(spec.width_px) || row < 0 ||
            row >= static_cast<long>(spec.height_px)) {
            oob = true;
        }
        atom_px[i] = {row, col};
    }
    if (oob) {
        const double ext_x = max_x - min_x;
        const double ext_y = max_y - min_y;
        throw OutOfBoundsError(
            "molecule extent " + std::to_string(ext_x) + " x " + std::to_string(ext_y) +
                " A does not fit the " + std::to_string(spec.field_of_view_x()) + " x " +
                std::to_string(spec.field_of_view_y()) + " A field of view",
            ext_x, ext_y);
    }

    ChemImage img;
    img.sample_id = std::move(sample_id);
    img.pixels = Tensor({spec.height_px, spec.width_px, RasterSpec::kChannels});
    auto write_px = [&](long r, long c, const std::array<double, RasterSpec::kChannels>& v) {
        double* p = img.pixels.data() +
                    (static_cast<std::size_t>(r) * spec.width_px + static_cast<std::size_t>(c)) *
                        RasterSpec::kChannels;
        for (std::size_t ch = 0; ch < RasterSpec::kChannels; ++ch) p[ch] = v[ch];
    };

    // Bond pixels first; atom pixels after, so atoms win conflicts.
    for (const Bond& b : mol.bonds) {
        const auto [r0, c0] = atom_px[static_cast<std::size_t>(b.a)];
        const auto [r1, c1] = atom_px[static_cast<std::size_t>(b.b)];
        const auto channels = encode_bond_channels(b.order);
        for (const auto& [r, c] : bresenham_between(r0, c0, r1, c1)) {
            write_px(r, c, channels);
        }
    }

    const std::vector<int> degrees = atom_degrees(mol);
    std::vector<long> owner(spec.height_px * spec.width_px, -1);
    for (std::size_t i = 0; i < mol.atoms.size(); ++i) {
        const Atom& a = mol.atoms[i];
        const auto [r, c] = atom_px[i];
        const std::size_t flat =
            static_cast<std::size_t>(r) * spec.width_px + static_cast<std::size_t>(c);
        if (owner[flat] >= 0) {
            img.collision_warnings.push_back(
                "atoms " + std::to_string(owner[flat]) + " and " + std::to_string(i) +
                " share pixel (" + std::to_string(r) + "," + std::to_string(c) + ")");
        }
        owner[flat] = static_cast<long>(i);
        write_px(r, c, encode_atom_channels(atomic_number(a.element), degrees[i],
                                            a.formal_charge));
    }
    return img;
}

}  // namespace bfuse
