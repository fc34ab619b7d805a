#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include "psa/models.hpp"

namespace psa {

// PSAM/1 layout, all integers little-endian:
//   "PSAM0001"
//   u64 header length, header bytes (JSON text describing the architecture)
//   per parameter tensor: u64 rank, rank x u64 dims, raw f64 values
//   u32 CRC-32C of every preceding byte
inline constexpr std::string_view kModelMagic = "PSAM0001";
inline constexpr std::string_view kModelFormat = "PSAM/1";

std::uint32_t crc32c(std::span<const std::uint8_t> bytes) noexcept;

std::vector<std::uint8_t> serialize_model(const TrainedModel& model);
TrainedModel deserialize_model(std::span<const std::uint8_t> bytes);

void save_model(const TrainedModel& model, const std::filesystem::path& path);
TrainedModel load_model(const std::filesystem::path& path);

}  // namespace psa
