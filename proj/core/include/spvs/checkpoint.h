#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "spvs/parameter_store.h"

namespace spvs {

// Binary checkpoint layout (all integers little-endian):
//   "SPVS" | u32 version = 1 | u32 tensor count |
//   per tensor: u16 name length, UTF-8 name, u8 rank, u32 extent * rank,
//               f32 payload (row-major)
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct NamedArray {
  std::string name;
  Shape shape;
  std::vector<float> values;
};

std::vector<std::uint8_t> EncodeCheckpoint(std::span<const NamedArray> arrays);
std::vector<NamedArray> DecodeCheckpoint(std::span<const std::uint8_t> bytes);

std::vector<NamedArray> ToNamedArrays(const ParameterStore& store);

void SaveCheckpoint(const std::filesystem::path& path, const ParameterStore& store);
std::vector<NamedArray> ReadCheckpoint(const std::filesystem::path& path);

// Copies every array whose name satisfies keep into the store. Returns the
// names copied. Shape mismatches raise DimensionError.
std::vector<std::string> LoadIntoStore(ParameterStore& store, std::span<const NamedArray> arrays,
                                       const std::function<bool(const std::string&)>& keep);

}  // namespace spvs
