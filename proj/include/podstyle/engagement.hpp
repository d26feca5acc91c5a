#pragma once

// Stream rate, popularity quartiles, and high/low engagement groups.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "podstyle/common.hpp"
#include "podstyle/corpus.hpp"
#include "podstyle/table.hpp"

namespace podstyle {

enum class EngagementGroup : unsigned char { high, low };

inline std::string_view to_string(EngagementGroup g) { return g == EngagementGroup::high ? "high" : "low"; }

struct EngagementRecord {
  std::string episode_id;
  double stream_rate = 0.0;
  std::uint64_t popularity = 0;
  int quartile = 0;  // 1 = most popular; 0 = unassigned
  std::optional<EngagementGroup> group;
};

struct GroupSpec {
  double k_percent = 25.0;
  bool per_quartile = true;
};

inline double stream_rate(std::uint64_t first_streams, std::uint64_t qualified_streams) {
  if (first_streams == 0) throw DataError("stream_rate: first_streams is 0");
  if (qualified_streams > first_streams) throw DataError("stream_rate: qualified exceeds first streams");
  return static_cast<double>(qualified_streams) / static_cast<double>(first_streams);
}

inline std::vector<EngagementRecord> engagement_records(const Corpus& corpus) {
  std::vector<EngagementRecord> out;
  out.reserve(corpus.episodes.size());
  for (const auto& e : corpus.episodes) {
    try {
      out.push_back({e.episode_id, stream_rate(e.first_streams, e.qualified_streams), e.first_streams, 0,
                     std::nullopt});
    } catch (const DataError& err) {
      throw DataError("episode '" + e.episode_id + "': " + err.what());
    }
  }
  return out;
}

// Ranks by popularity (descending, ties by episode_id) and cuts at ranks
// ceil(n/4), ceil(n/2), ceil(3n/4). Input order is preserved.
inline std::vector<EngagementRecord> assign_quartiles(std::vector<EngagementRecord> records) {
  const std::size_t n = records.size();
  if (n < 4) throw DataError("assign_quartiles: need at least 4 records, got " + std::to_string(n));
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (records[a].popularity != records[b].popularity) return records[a].popularity > records[b].popularity;
    return records[a].episode_id < records[b].episode_id;
  });
  const std::size_t c1 = (n + 3) / 4, c2 = (n + 1) / 2, c3 = (3 * n + 3) / 4;
  for (std::size_t r = 0; r < n; ++r) {
    records[order[r]].quartile = r < c1 ? 1 : r < c2 ? 2 : r < c3 ? 3 : 4;
  }
  return records;
}

// Within each quartile, the top floor(K% n_q) by stream rate become "high"
// and the bottom floor(K% n_q) become "low" (ties by episode_id); everything
// else is left unlabeled.
inline std::vector<EngagementRecord> build_groups(std::vector<EngagementRecord> records, const GroupSpec& spec) {
  if (!(spec.k_percent > 0.0 && spec.k_percent <= 50.0)) {
    throw ConfigError("build_groups: K percent must be in (0, 50]");
  }
  if (!spec.per_quartile) throw ConfigError("build_groups: only per-quartile grouping is supported");
  for (auto& r : records) {
    if (r.quartile < 1 || r.quartile > 4) throw DataError("build_groups: quartiles not assigned");
    r.group.reset();
  }
  for (int q = 1; q <= 4; ++q) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < records.size(); ++i) {
      if (records[i].quartile == q) members.push_back(i);
    }
    if (members.size() < 2) {
      throw DataError("build_groups: quartile " + std::to_string(q) + " has fewer than 2 records");
    }
    const auto size = static_cast<std::size_t>(std::floor(spec.k_percent / 100.0 * static_cast<double>(members.size()) + 1e-9));
    if (size == 0) {
      throw DataError("build_groups: quartile " + std::to_string(q) + " too small for K=" +
                      format_double(spec.k_percent) + "%");
    }
    std::sort(members.begin(), members.end(), [&](std::size_t a, std::size_t b) {
      if (records[a].stream_rate != records[b].stream_rate) return records[a].stream_rate > records[b].stream_rate;
      return records[a].episode_id < records[b].episode_id;
    });
    for (std::size_t i = 0; i < size; ++i) {
      records[members[i]].group = EngagementGroup::high;
      records[members[members.size() - 1 - i]].group = EngagementGroup::low;
    }
  }
  return records;
}

// CSV: episode_id, stream_rate, popularity, quartile, group.
inline void write_engagement_csv(const std::vector<EngagementRecord>& records, std::ostream& out) {
  out << "episode_id,stream_rate,popularity,quartile,group\n";
  for (const auto& r : records) {
    out << csv_field(r.episode_id) << ',' << format_double(r.stream_rate) << ',' << r.popularity << ',' << r.quartile << ','
        << (r.group ? to_string(*r.group) : "") << '\n';
  }
}

}  // namespace podstyle
