#include "featsel/ranking.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "featsel/common.hpp"

namespace featsel {

std::vector<std::string> FeatureRanking::selected_names() const {
  std::vector<std::string> out;
  for (const auto& e : entries)
    if (e.selected) out.push_back(e.name);
  return out;
}

std::vector<std::size_t> FeatureRanking::selected_columns() const {
  std::vector<std::size_t> out;
  for (const auto& e : entries)
    if (e.selected) out.push_back(e.column);
  std::sort(out.begin(), out.end());
  return out;
}

const RankedFeature* FeatureRanking::find(const std::string& name) const {
  for (const auto& e : entries)
    if (e.name == name) return &e;
  return nullptr;
}

void assign_ranks(std::vector<RankedFeature>& entries) {
  std::stable_sort(entries.begin(), entries.end(), [](const RankedFeature& a, const RankedFeature& b) {
    const bool ax = !a.excluded_reason.empty(), bx = !b.excluded_reason.empty();
    if (ax != bx) return bx;
    if (a.score != b.score) return a.score > b.score;
    return a.column < b.column;
  });
  for (std::size_t k = 0; k < entries.size(); ++k) entries[k].rank = k + 1;
}

std::string ranking_csv(const FeatureRanking& r) {
  std::ostringstream out;
  out << "feature,score,rank,excluded_reason,selected\n";
  for (const auto& e : r.entries) {
    out << e.name << ',' << format_double(e.score) << ',' << e.rank << ',' << e.excluded_reason << ','
        << (e.selected ? 1 : 0) << '\n';
  }
  return out.str();
}

void write_ranking_csv(const FeatureRanking& r, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << ranking_csv(r);
}

}  // namespace featsel
