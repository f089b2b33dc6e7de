#pragma once

#include <filesystem>
#include <functional>
#include <string_view>

namespace lrf {

/// Runs `write` against a temporary sibling of `path`, then renames it over
/// `path`. The temporary is removed if `write` throws.
void write_atomically(const std::filesystem::path& path,
                      const std::function<void(const std::filesystem::path&)>& write);

void write_file_atomically(const std::filesystem::path& path, std::string_view bytes);

}  // namespace lrf
