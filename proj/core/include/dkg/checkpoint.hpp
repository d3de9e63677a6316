#pragma once

// Binary parameter container.
//
//   magic       8 bytes  "DKGPARAM"
//   version     u32
//   count       u32      number of tensor records
//   per record: u32 name length, name bytes (UTF-8),
//               u32 rank, rank x u32 extents,
//               row-major values as IEEE-754 binary32
//
// All integers and floats are little-endian. Values are rounded to single
// precision on write, so save(load(bytes)) reproduces `bytes` exactly.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "dkg/params.hpp"

namespace dkg {

inline constexpr char kCheckpointMagic[8] = {'D', 'K', 'G', 'P', 'A', 'R', 'A', 'M'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

std::vector<std::uint8_t> encode_params(const ParamSet& params);
ParamSet decode_params(const std::vector<std::uint8_t>& bytes);

void save_params(const std::filesystem::path& path, const ParamSet& params);
ParamSet load_params(const std::filesystem::path& path);

// Rounds every value to the nearest binary32, matching what a save/load
// cycle produces.
void round_to_storage_precision(ParamSet& params);

}  // namespace dkg
