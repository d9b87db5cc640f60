#include "cli/dataset_dir.hpp"

#include <set>

#include "illumkit/error.hpp"

namespace illumkit::cli {

std::map<std::string, std::filesystem::path> list_pngs(const std::filesystem::path& dir) {
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) throw IoError("not a directory: " + dir.string());
  std::map<std::string, std::filesystem::path> out;
  for (const auto& entry : std::filesystem::directory_iterator(dir, ec)) {
    if (entry.is_regular_file() && entry.path().extension() == ".png") {
      out.emplace(entry.path().stem().string(), entry.path());
    }
  }
  if (ec) throw IoError("cannot list " + dir.string() + ": " + ec.message());
  return out;
}

PairingResult pair_directories(const std::vector<std::filesystem::path>& dirs) {
  std::vector<std::map<std::string, std::filesystem::path>> listings;
  std::set<std::string> all;
  for (const auto& d : dirs) {
    listings.push_back(list_pngs(d));
    for (const auto& [id, _] : listings.back()) all.insert(id);
  }
  PairingResult result;
  for (const auto& id : all) {
    bool everywhere = true;
    for (std::size_t i = 0; i < dirs.size(); ++i) {
      if (!listings[i].contains(id)) {
        result.missing.push_back(dirs[i].string() + ": " + id);
        everywhere = false;
      }
    }
    if (everywhere) result.ids.push_back(id);
  }
  return result;
}

}  // namespace illumkit::cli
