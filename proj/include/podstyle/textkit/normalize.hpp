#pragma once

#include <algorithm>
#include <array>
#include <string>
#include <string_view>

#include "podstyle/common.hpp"
#include "podstyle/textkit/utf8.hpp"

namespace podstyle {

inline constexpr std::string_view kUrlToken = "<URL>";
inline constexpr std::string_view kHandleToken = "<HANDLE>";

namespace detail {

inline bool is_url_trailer(char c) {
  return c == '.' || c == ',' || c == ';' || c == ':' || c == '!' || c == '?' ||
         c == ')' || c == ']' || c == '}' || c == '"' || c == '\'';
}

inline bool is_url_leader(char c) {
  return c == '(' || c == '[' || c == '{' || c == '"' || c == '\'' || c == '<';
}

inline bool is_domain_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-';
}

// Bare "host.tld[/path]" with a known top-level domain.
inline bool looks_like_bare_domain(std::string_view s) {
  static constexpr std::array<std::string_view, 16> tlds = {
      "com", "org", "net", "io", "co", "fm", "ly", "me",
      "tv", "edu", "gov", "info", "us", "uk", "app", "link"};
  const auto slash = s.find('/');
  const std::string_view host = s.substr(0, slash);
  const auto dot = host.rfind('.');
  if (dot == std::string_view::npos || dot == 0 || dot + 1 >= host.size()) return false;
  for (char c : host) {
    if (c != '.' && !is_domain_char(c)) return false;
  }
  if (host.find("..") != std::string_view::npos) return false;
  std::string tld(host.substr(dot + 1));
  for (auto& c : tld) c = static_cast<char>(c >= 'A' && c <= 'Z' ? c - 'A' + 'a' : c);
  if (std::find(tlds.begin(), tlds.end(), tld) == tlds.end()) return false;
  return std::any_of(host.begin(), host.begin() + static_cast<long>(dot),
                     [](char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); });
}

}  // namespace detail

// A whitespace-delimited chunk split around an embedded URL or @-handle:
// chunk == lead + body + tail. kind == none means no URL/handle was found.
struct ChunkParts {
  enum class Kind { none, url, handle };
  Kind kind = Kind::none;
  std::string_view lead, body, tail;
};

inline ChunkParts split_chunk(std::string_view chunk) {
  ChunkParts parts;
  std::size_t start = std::string_view::npos;
  for (std::string_view scheme : {"http://", "https://"}) {
    for (std::size_t i = 0; i + scheme.size() <= chunk.size(); ++i) {
      if (starts_with_ci(chunk.substr(i), scheme)) {
        start = std::min(start, i);
        break;
      }
    }
  }
  std::size_t lead_len = 0;
  while (lead_len < chunk.size() && detail::is_url_leader(chunk[lead_len])) ++lead_len;
  if (start == std::string_view::npos && starts_with_ci(chunk.substr(lead_len), "www.")) {
    start = lead_len;
  }
  std::size_t end = chunk.size();
  const auto trim_tail = [&](std::size_t from) {
    while (end > from + 1 && detail::is_url_trailer(chunk[end - 1])) --end;
  };
  if (start != std::string_view::npos) {
    trim_tail(start);
    parts.kind = ChunkParts::Kind::url;
  } else if (lead_len < chunk.size() && chunk[lead_len] == '@') {
    std::size_t j = lead_len + 1;
    while (j < chunk.size() && (detail::is_domain_char(chunk[j]) || chunk[j] == '_') &&
           chunk[j] != '-') {
      ++j;
    }
    if (j > lead_len + 1) {
      start = lead_len;
      end = j;
      parts.kind = ChunkParts::Kind::handle;
    }
  } else {
    end = chunk.size();
    trim_tail(lead_len);
    if (end > lead_len && detail::looks_like_bare_domain(chunk.substr(lead_len, end - lead_len))) {
      start = lead_len;
      parts.kind = ChunkParts::Kind::url;
    }
  }
  if (parts.kind == ChunkParts::Kind::none) {
    parts.body = chunk;
    return parts;
  }
  parts.lead = chunk.substr(0, start);
  parts.body = chunk.substr(start, end - start);
  parts.tail = chunk.substr(end);
  return parts;
}

namespace detail {

// Case-folds while copying the two placeholder tokens verbatim.
inline void fold_keep_placeholders(std::string_view s, std::string& out) {
  std::size_t i = 0;
  while (i < s.size()) {
    if (s.substr(i).starts_with(kUrlToken)) {
      out.append(kUrlToken);
      i += kUrlToken.size();
    } else if (s.substr(i).starts_with(kHandleToken)) {
      out.append(kHandleToken);
      i += kHandleToken.size();
    } else {
      utf8::append(out, utf8::fold(utf8::next(s, i)));
    }
  }
}

}  // namespace detail

// Case-folds, replaces URLs and @-handles with placeholder tokens, and
// collapses whitespace runs to a single space.
inline std::string normalize_text(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    std::size_t j = i;
    while (j < text.size()) {
      std::size_t k = j;
      if (utf8::is_space(utf8::next(text, k))) break;
      j = k;
    }
    if (j > i) {
      if (!out.empty()) out.push_back(' ');
      const ChunkParts parts = split_chunk(text.substr(i, j - i));
      if (parts.kind == ChunkParts::Kind::none) {
        detail::fold_keep_placeholders(parts.body, out);
      } else {
        detail::fold_keep_placeholders(parts.lead, out);
        out.append(parts.kind == ChunkParts::Kind::url ? kUrlToken : kHandleToken);
        detail::fold_keep_placeholders(parts.tail, out);
      }
      i = j;
    }
    while (i < text.size()) {
      std::size_t k = i;
      if (!utf8::is_space(utf8::next(text, k))) break;
      i = k;
    }
  }
  return out;
}

}  // namespace podstyle
