#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace binclust {

// Per-sample cluster membership. Ids are non-negative; kNoise marks
// density-clustering outliers and appears only in DBSCAN output.
struct Assignment {
  static constexpr std::int64_t kNoise = -1;

  std::vector<std::int64_t> ids;

  std::size_t size() const { return ids.size(); }
  std::int64_t operator[](std::size_t i) const { return ids[i]; }

  std::size_t noise_count() const;
  // Number of distinct non-noise cluster ids.
  std::size_t n_found() const;

  // Remaps non-noise ids to 0..n_found-1 in order of first appearance;
  // noise entries stay kNoise.
  Assignment canonicalized() const;

  bool operator==(const Assignment&) const = default;
};

// Text format: header `id,cluster`, noise written as -1.
void save_assignment(const Assignment& a, const std::vector<std::string>& sample_ids,
                     const std::filesystem::path& path);
std::pair<Assignment, std::vector<std::string>> load_assignment(
    const std::filesystem::path& path);

}  // namespace binclust
