#pragma once

#include <string>

namespace fwrisk {

/// Writes to "<path>.tmp" then renames, so a crash never leaves a partial
/// file at the destination.
void atomic_write_file(const std::string& path, const std::string& content);

std::string read_file(const std::string& path);

}  // namespace fwrisk
