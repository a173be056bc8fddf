#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bfuse/graph.hpp"
#include "bfuse/tensor.hpp"

namespace bfuse {

// Flat binary checkpoint container. Layout, all integers little-endian:
//
//   magic   "BFUS" (4 bytes)
//   u32     format version (currently 1)
//   u64     architecture descriptor byte length
//   bytes   architecture descriptor (UTF-8 JSON text)
//   u32     parameter count
//   then per parameter, in declaration order:
//     u32     name byte length
//     bytes   name (UTF-8)
//     u32     rank
//     u64[r]  dimensions
//     f64[n]  values (IEEE-754 binary64, little-endian)
//
// Round-trips are bit-exact.
struct ParamRecord {
    std::string name;
    Tensor value;
};

struct Checkpoint {
    std::uint32_t version = 1;
    std::string arch_json;
    std::vector<ParamRecord> params;

    const Tensor* find(const std::string& name) const;
};

std::vector<std::uint8_t> serialize_checkpoint(const Checkpoint& ckpt);
Checkpoint deserialize_checkpoint(const std::vector<std::uint8_t>& bytes);

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

// Snapshot of a graph's parameters in declaration order.
Checkpoint checkpoint_from_graph(const ModelGraph& g, std::string arch_json);

// Loads parameter values into an existing graph by name. Checkpoint entries
// without a matching graph parameter are an error; graph parameters absent
// from the checkpoint are an error unless allow_missing (fresh heads).
void load_params_into(ModelGraph& g, const Checkpoint& ckpt, bool allow_missing = false);

}  // namespace bfuse
