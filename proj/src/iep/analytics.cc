// Copyright 2026 The DMP Platform Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "dmp/iep/analytics.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <unordered_map>

#include "dmp/common/error.h"

namespace dmp::iep {

namespace {

constexpr std::pair<PosTag, std::string_view> kTagNames[] = {
    {PosTag::kNoun, "NOUN"}, {PosTag::kVerb, "VERB"}, {PosTag::kAdj, "ADJ"},   {PosTag::kAdv, "ADV"},
    {PosTag::kFunc, "FUNC"}, {PosTag::kNum, "NUM"},   {PosTag::kOther, "OTHER"},
};

bool is_word_byte(unsigned char c) { return std::isalnum(c) || c >= 0x80; }

bool all_digits(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); });
}

std::string join(std::span<const Tagged> window) {
  std::string out;
  for (const auto& [token, tag] : window) {
    if (!out.empty()) out += ' ';
    out += token;
  }
  return out;
}

// Iterates non-comment lines as (line number, first field, second field).
template <typename Fn>
void for_each_tsv(std::string_view text, std::string_view what, Fn&& fn) {
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(start, end - start);
    ++line_no;
    start = end + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line.front() == '#') {
      if (end == text.size()) break;
      continue;
    }
    auto tab = line.find('\t');
    if (tab == std::string_view::npos || tab == 0 || tab + 1 >= line.size()) {
      throw Error(ErrorCode::kInvalidArgument,
                  std::string(what) + " line " + std::to_string(line_no) + ": expected two tab-separated fields");
    }
    auto tag = parse_pos_tag(line.substr(tab + 1));
    if (!tag) {
      throw Error(ErrorCode::kInvalidArgument,
                  std::string(what) + " line " + std::to_string(line_no) + ": unknown tag");
    }
    fn(std::string(line.substr(0, tab)), *tag);
    if (end == text.size()) break;
  }
}

}  // namespace

std::string_view to_string(PosTag tag) {
  for (const auto& [t, name] : kTagNames) {
    if (t == tag) return name;
  }
  return "OTHER";
}

std::optional<PosTag> parse_pos_tag(std::string_view text) {
  for (const auto& [t, name] : kTagNames) {
    if (name == text) return t;
  }
  return std::nullopt;
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) tokens.push_back(std::move(current));
    current.clear();
  };
  for (unsigned char c : text) {
    if (!is_word_byte(c)) {
      flush();
      continue;
    }
    // A digit run never merges with letters on either side.
    bool digit = std::isdigit(c) != 0;
    if (!current.empty() && (std::isdigit(static_cast<unsigned char>(current.back())) != 0) != digit) flush();
    current.push_back(static_cast<char>(std::tolower(c)));
  }
  flush();
  return tokens;
}

void PosLexicon::add_word(std::string word, PosTag tag) { words_[std::move(word)] = tag; }

void PosLexicon::add_suffix(std::string suffix, PosTag tag) {
  auto pos = std::find_if(suffixes_.begin(), suffixes_.end(),
                          [&](const auto& entry) { return entry.first.size() < suffix.size(); });
  suffixes_.insert(pos, {std::move(suffix), tag});
}

PosTag PosLexicon::tag(std::string_view token) const {
  if (auto it = words_.find(token); it != words_.end()) return it->second;
  if (all_digits(token)) return PosTag::kNum;
  for (const auto& [suffix, tag] : suffixes_) {
    if (token.size() > suffix.size() && token.ends_with(suffix)) return tag;
  }
  return PosTag::kOther;
}

PosLexicon PosLexicon::from_tsv(std::string_view lexicon_tsv, std::string_view suffix_tsv) {
  PosLexicon lexicon;
  for_each_tsv(lexicon_tsv, "lexicon", [&](std::string word, PosTag tag) { lexicon.add_word(std::move(word), tag); });
  for_each_tsv(suffix_tsv, "suffix rules",
               [&](std::string suffix, PosTag tag) { lexicon.add_suffix(std::move(suffix), tag); });
  return lexicon;
}

std::vector<Tagged> pos_tag(std::span<const std::string> tokens, const PosLexicon& lexicon) {
  std::vector<Tagged> out;
  out.reserve(tokens.size());
  for (const auto& token : tokens) out.emplace_back(token, lexicon.tag(token));
  return out;
}

const std::vector<TagPattern>& accept_patterns() {
  using enum PosTag;
  static const std::vector<TagPattern> kPatterns{
      {kAdj, kNoun}, {kNoun, kNoun}, {kVerb, kNoun}, {kAdj, kAdj, kNoun}, {kNoun, kNoun, kNoun}};
  return kPatterns;
}

PhraseRules PhraseRules::defaults() { return {accept_patterns(), {}}; }

PhraseRules PhraseRules::from_json(const nlohmann::json& doc) {
  PhraseRules rules;
  try {
    for (const auto& pattern : doc.at("patterns")) {
      TagPattern tags;
      for (const auto& name : pattern) {
        auto tag = parse_pos_tag(name.get<std::string>());
        if (!tag) throw Error(ErrorCode::kInvalidArgument, "unknown tag in phrase pattern");
        tags.push_back(*tag);
      }
      const auto& accepted = accept_patterns();
      if (std::find(accepted.begin(), accepted.end(), tags) == accepted.end()) {
        throw Error(ErrorCode::kInvalidArgument, "phrase pattern outside the accepted set");
      }
      rules.patterns.push_back(std::move(tags));
    }
    for (const auto& word : doc.value("stoplist", nlohmann::json::array())) {
      auto w = word.get<std::string>();
      std::transform(w.begin(), w.end(), w.begin(), [](unsigned char c) { return std::tolower(c); });
      rules.stoplist.insert(std::move(w));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("malformed phrase rules: ") + e.what());
  }
  return rules;
}

std::vector<std::string> extract_phrases(std::span<const Tagged> tagged, const PhraseRules& rules) {
  std::vector<std::string> phrases;
  auto matches = [&](std::span<const Tagged> window) {
    for (const auto& [token, tag] : window) {
      if (rules.stoplist.count(token)) return false;
    }
    return std::any_of(rules.patterns.begin(), rules.patterns.end(), [&](const TagPattern& pattern) {
      if (pattern.size() != window.size()) return false;
      for (std::size_t i = 0; i < window.size(); ++i) {
        if (window[i].second != pattern[i]) return false;
      }
      return true;
    });
  };
  for (std::size_t end = 1; end < tagged.size(); ++end) {
    for (std::size_t len = 2; len <= 3 && len <= end + 1; ++len) {
      auto window = tagged.subspan(end + 1 - len, len);
      if (matches(window)) phrases.push_back(join(window));
    }
  }
  return phrases;
}

std::vector<WordCloudEntry> wordcloud_counts(std::span<const std::string> docs, const PosLexicon& lexicon,
                                             const PhraseRules& rules,
                                             const std::set<std::string, std::less<>>& stopwords,
                                             std::size_t top_n) {
  if (top_n < 1) throw Error(ErrorCode::kInvalidArgument, "top_n must be >= 1");
  std::unordered_map<std::string, int> counts;
  for (const auto& doc : docs) {
    auto tokens = tokenize(doc);
    auto tagged = pos_tag(tokens, lexicon);
    for (const auto& [token, tag] : tagged) {
      bool content = tag == PosTag::kNoun || tag == PosTag::kVerb || tag == PosTag::kAdj;
      if (content && !stopwords.count(token)) ++counts[token];
    }
    for (auto& phrase : extract_phrases(tagged, rules)) ++counts[std::move(phrase)];
  }
  std::vector<WordCloudEntry> entries;
  entries.reserve(counts.size());
  for (auto& [term, count] : counts) entries.push_back({term, count});
  std::sort(entries.begin(), entries.end(), [](const auto& x, const auto& y) {
    return x.count != y.count ? x.count > y.count : x.term < y.term;
  });
  if (entries.size() > top_n) entries.resize(top_n);
  return entries;
}

std::vector<ContingencyTable> cooccurrence(std::span<const records::StudentRecord> students) {
  std::set<std::string> sen_types;
  for (const auto& s : students) {
    for (const auto& entry : s.iep) sen_types.insert(entry.sen_type);
  }
  std::vector<ContingencyTable> tables;
  for (const auto& sen : sen_types) {
    for (auto category : records::all_activity_categories()) {
      ContingencyTable t{sen, category};
      for (const auto& s : students) {
        bool has_sen = std::any_of(s.iep.begin(), s.iep.end(), [&](const auto& e) { return e.sen_type == sen; });
        bool joins = std::any_of(s.activities.begin(), s.activities.end(),
                                 [&](const auto& a) { return a.category == category; });
        if (has_sen && joins) ++t.a;
        else if (has_sen) ++t.b;
        else if (joins) ++t.c;
        else ++t.d;
      }
      tables.push_back(std::move(t));
    }
  }
  return tables;
}

double phi_coefficient(long a, long b, long c, long d) {
  double denom = static_cast<double>(a + b) * static_cast<double>(c + d) * static_cast<double>(a + c) *
                 static_cast<double>(b + d);
  double num = static_cast<double>(a) * static_cast<double>(d) - static_cast<double>(b) * static_cast<double>(c);
  return std::clamp(num / std::sqrt(denom), -1.0, 1.0);
}

std::vector<CorrelationCell> correlate(std::span<const ContingencyTable> tables) {
  std::vector<CorrelationCell> cells;
  cells.reserve(tables.size());
  for (const auto& t : tables) {
    CorrelationCell cell{t.sen_type, t.category, std::nullopt, std::nullopt, t.a};
    bool defined = t.a + t.b > 0 && t.c + t.d > 0 && t.a + t.c > 0 && t.b + t.d > 0;
    if (defined) {
      double n = static_cast<double>(t.a + t.b + t.c + t.d);
      cell.phi = phi_coefficient(t.a, t.b, t.c, t.d);
      cell.lift = static_cast<double>(t.a) * n / (static_cast<double>(t.a + t.b) * static_cast<double>(t.a + t.c));
    }
    cells.push_back(std::move(cell));
  }
  return cells;
}

nlohmann::json wordcloud_payload(std::span<const WordCloudEntry> entries) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& e : entries) out.push_back({{"term", e.term}, {"count", e.count}});
  return out;
}

nlohmann::json heatmap_payload(std::span<const CorrelationCell> cells) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& cell : cells) {
    out.push_back({{"sen_type", cell.sen_type},
                   {"activity_category", records::to_string(cell.category)},
                   {"phi", cell.phi ? nlohmann::json(*cell.phi) : nlohmann::json(nullptr)},
                   {"lift", cell.lift ? nlohmann::json(*cell.lift) : nlohmann::json(nullptr)},
                   {"support", cell.support}});
  }
  return out;
}

}  // namespace dmp::iep
