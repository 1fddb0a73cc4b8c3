#pragma once

#include <filesystem>
#include <string>

#include "fsr/core.hpp"

namespace fsr {

enum class StoreFormat { csv, binary };

// Binary files start with these bytes; anything else is read as CSV.
inline constexpr char kBinaryMagic[4] = {'F', 'S', 'E', '1'};
inline constexpr std::uint32_t kBinaryVersion = 1;

// Format detection looks at the magic bytes only, never the extension.
EmbeddingStore load_store(const std::filesystem::path& path);
EmbeddingStore parse_store(const std::string& bytes, const std::string& source = "<memory>");

// CSV values use 17 significant digits; binary stores 32-bit floats.
void save_store(const EmbeddingStore& store, const std::filesystem::path& path,
                StoreFormat format);
std::string serialize_store(const EmbeddingStore& store, StoreFormat format);

// ".csv" -> csv, everything else -> binary.
StoreFormat format_for_path(const std::filesystem::path& path);
StoreFormat parse_store_format(const std::string& name);  // throws ConfigError

}  // namespace fsr
