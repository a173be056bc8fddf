#include "bfuse/dataset.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "bfuse/errors.hpp"

namespace bfuse {

namespace {

constexpr char kMagic[4] = {'B', 'I', 'M', 'G'};

static_assert(std::endian::native == std::endian::little,
              "dataset writer assumes a little-endian host");

void write_u32(std::ostream& out, std::uint32_t v) {
    out.write(reinterpret_cast<const char*>(&v), 4);
}

void write_f64(std::ostream& out, double v) {
    out.write(reinterpret_cast<const char*>(&v), 8);
}

void write_str(std::ostream& out, const std::string& s) {
    write_u32(out, static_cast<std::uint32_t>(s.size()));
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::uint32_t read_u32(std::istream& in) {
    std::uint32_t v = 0;
    in.read(reinterpret_cast<char*>(&v), 4);
    if (!in) throw IoError("image archive truncated");
    return v;
}

double read_f64(std::istream& in) {
    double v = 0;
    in.read(reinterpret_cast<char*>(&v), 8);
    if (!in) throw IoError("image archive truncated");
    return v;
}

std::string read_str(std::istream& in) {
    const std::uint32_t n = read_u32(in);
    std::string s(n, '\0');
    in.read(s.data(), n);
    if (!in) throw IoError("image archive truncated");
    return s;
}

}  // namespace

void ImageDataset::add(const ChemImage& img, int label, std::string source_tag) {
    if (img.pixels.shape() !=
        std::vector<std::size_t>{spec.height_px, spec.width_px, RasterSpec::kChannels}) {
        throw ValidationError("image shape does not match the dataset raster spec");
    }
    ids.push_back(img.sample_id);
    labels.push_back(label);
    source_tags.push_back(std::move(source_tag));
    collision_counts.push_back(static_cast<std::uint32_t>(img.collision_warnings.size()));
    std::vector<float> px(img.pixels.size());
    for (std::size_t i = 0; i < px.size(); ++i) px[i] = static_cast<float>(img.pixels[i]);
    pixels.push_back(std::move(px));
}

void ImageDataset::validate() const {
    const std::size_t n = ids.size();
    if (labels.size() != n || source_tags.size() != n || collision_counts.size() != n ||
        pixels.size() != n) {
        throw ValidationError("image dataset columns have inconsistent lengths");
    }
    for (const auto& px : pixels) {
        if (px.size() != pixels_per_sample()) {
            throw ValidationError("image dataset pixel block has wrong length");
        }
    }
}

void save_image_dataset(const std::string& path, const ImageDataset& ds) {
    ds.validate();
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write image archive: " + path);
    out.write(kMagic, 4);
    write_u32(out, 1);
    write_u32(out, static_cast<std::uint32_t>(ds.size()));
    write_u32(out, static_cast<std::uint32_t>(ds.spec.height_px));
    write_u32(out, static_cast<std::uint32_t>(ds.spec.width_px));
    write_u32(out, static_cast<std::uint32_t>(RasterSpec::kChannels));
    write_f64(out, ds.spec.resolution);
    write_str(out, ds.spec.channel_scheme);
    for (std::size_t i = 0; i < ds.size(); ++i) {
        write_str(out, ds.ids[i]);
        const char label = static_cast<char>(ds.labels[i]);
        out.write(&label, 1);
        write_str(out, ds.source_tags[i]);
        write_u32(out, ds.collision_counts[i]);
        out.write(reinterpret_cast<const char*>(ds.pixels[i].data()),
                  static_cast<std::streamsize>(ds.pixels[i].size() * sizeof(float)));
    }
    if (!out) throw IoError("short write on image archive: " + path);
}

ImageDataset load_image_dataset(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open image archive: " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0) {
        throw IoError("not an image archive (bad magic): " + path);
    }
    const std::uint32_t version = read_u32(in);
    if (version != 1) {
        throw IoError("unsupported image archive version " + std::to_string(version));
    }
    ImageDataset ds;
    const std::uint32_t n = read_u32(in);
    ds.spec.height_px = read_u32(in);
    ds.spec.width_px = read_u32(in);
    const std::uint32_t channels = read_u32(in);
    if (channels != RasterSpec::kChannels) {
        throw IoError("image archive channel count " + std::to_string(channels) +
                      " not supported");
    }
    ds.spec.resolution = read_f64(in);
    ds.spec.channel_scheme = read_str(in);
    ds.ids.reserve(n);
    for (std::uint32_t i = 0; i < n; ++i) {
        ds.ids.push_back(read_str(in));
        char label = 0;
        in.read(&label, 1);
        if (!in) throw IoError("image archive truncated");
        ds.labels.push_back(static_cast<int>(label));
        ds.source_tags.push_back(read_str(in));
        ds.collision_counts.push_back(read_u32(in));
        std::vector<float> px(ds.pixels_per_sample());
        in.read(reinterpret_cast<char*>(px.data()),
                static_cast<std::streamsize>(px.size() * sizeof(float)));
        if (!in) throw IoError("image archive truncated");
        ds.pixels.push_back(std::move(px));
    }
    ds.validate();
    return ds;
}

Tensor image_batch(const ImageDataset& ds, const std::vector<std::size_t>& indices) {
    if (indices.empty()) throw ValidationError("image batch needs at least one sample");
    const std::size_t per = ds.pixels_per_sample();
    Tensor batch({indices.size(), ds.spec.height_px, ds.spec.width_px, RasterSpec::kChannels});
    for (std::size_t i = 0; i < indices.size(); ++i) {
        const auto& px = ds.pixels.at(indices[i]);
        double* dst = batch.data() + i * per;
        for (std::size_t j = 0; j < per; ++j) dst[j] = static_cast<double>(px[j]);
    }
    return batch;
}

}  // namespace bfuse
