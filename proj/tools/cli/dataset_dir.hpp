#pragma once

// Pairing of image directories by filename stem.

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace illumkit::cli {

/// stem -> path for every *.png in dir, ordered by stem.
std::map<std::string, std::filesystem::path> list_pngs(const std::filesystem::path& dir);

struct PairingResult {
  std::vector<std::string> ids;      // present in every directory
  std::vector<std::string> missing;  // "dir: id" for ids absent somewhere
};

/// Ids are the union over all directories; an id missing from any of them
/// is reported.
PairingResult pair_directories(const std::vector<std::filesystem::path>& dirs);

}  // namespace illumkit::cli
