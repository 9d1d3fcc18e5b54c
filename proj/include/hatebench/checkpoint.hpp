#pragma once

#include <map>
#include <string>
#include <vector>

#include "hatebench/numerics.hpp"

namespace hatebench::numerics {

/// Parameter container on disk, all integers and doubles little-endian:
///
///   "HBCKPT01"
///   u32 header byte count, header as "key=value\n" lines
///   u32 array count
///   per array: u32 name length, name, u32 rank, u64 dims[rank], f64 data
struct Checkpoint {
  std::map<std::string, std::string> header;
  std::vector<std::pair<std::string, Tensor>> arrays;

  const Tensor* find(const std::string& name) const;
};

void write_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint read_checkpoint(const std::string& path);

Checkpoint make_checkpoint(const LayerParams& params, std::map<std::string, std::string> header);

/// Copies every array into `params`, which must already have the expected
/// shapes. A missing array or a shape difference is a DataError naming it.
void load_parameters(const Checkpoint& ckpt, LayerParams& params);

}  // namespace hatebench::numerics
