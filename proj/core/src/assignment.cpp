#include "binclust/assignment.hpp"

#include <charconv>
#include <fstream>
#include <unordered_map>
#include <unordered_set>

#include "binclust/errors.hpp"

namespace binclust {

std::size_t Assignment::noise_count() const {
  std::size_t c = 0;
  for (auto id : ids)
    if (id == kNoise) ++c;
  return c;
}

std::size_t Assignment::n_found() const {
  std::unordered_set<std::int64_t> distinct;
  for (auto id : ids)
    if (id != kNoise) distinct.insert(id);
  return distinct.size();
}

Assignment Assignment::canonicalized() const {
  Assignment out;
  out.ids.reserve(ids.size());
  std::unordered_map<std::int64_t, std::int64_t> remap;
  for (auto id : ids) {
    if (id == kNoise) {
      out.ids.push_back(kNoise);
      continue;
    }
    auto [it, inserted] = remap.try_emplace(id, static_cast<std::int64_t>(remap.size()));
    out.ids.push_back(it->second);
  }
  return out;
}

void save_assignment(const Assignment& a, const std::vector<std::string>& sample_ids,
                     const std::filesystem::path& path) {
  if (a.ids.size() != sample_ids.size())
    throw LengthMismatch("assignment and id list differ in length");
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << "id,cluster\n";
  for (std::size_t i = 0; i < a.ids.size(); ++i)
    out << sample_ids[i] << ',' << a.ids[i] << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

std::pair<Assignment, std::vector<std::string>> load_assignment(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty assignment file: " + path.string());
  Assignment a;
  std::vector<std::string> sample_ids;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto comma = line.rfind(',');
    if (comma == std::string::npos) throw MalformedRow(line_no, "expected id,cluster");
    std::int64_t v = 0;
    const char* first = line.data() + comma + 1;
    const char* last = line.data() + line.size();
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last)
      throw MalformedRow(line_no, "bad cluster id: '" + line.substr(comma + 1) + "'");
    sample_ids.push_back(line.substr(0, comma));
    a.ids.push_back(v);
  }
  return {std::move(a), std::move(sample_ids)};
}

}  // namespace binclust
