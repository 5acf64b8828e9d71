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

#pragma once

#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dmp/records/records.h"
#include "json.hpp"

namespace dmp::iep {

enum class PosTag { kNoun, kVerb, kAdj, kAdv, kFunc, kNum, kOther };

std::string_view to_string(PosTag tag);  // "NOUN", "VERB", ...
std::optional<PosTag> parse_pos_tag(std::string_view text);

// Lowercased tokens split on whitespace and ASCII punctuation. Digit runs
// stay whole tokens; bytes >= 0x80 count as word characters.
std::vector<std::string> tokenize(std::string_view text);

// Context-free tagger: exact word entry, then a numeral check, then the
// longest matching suffix rule, then OTHER.
class PosLexicon {
 public:
  PosLexicon() = default;

  void add_word(std::string word, PosTag tag);
  void add_suffix(std::string suffix, PosTag tag);

  PosTag tag(std::string_view token) const;

  // `word<TAB>tag` and `suffix<TAB>tag` lines; '#' starts a comment line.
  // Throws Error(kInvalidArgument) with the offending line number.
  static PosLexicon from_tsv(std::string_view lexicon_tsv, std::string_view suffix_tsv);

 private:
  std::map<std::string, PosTag, std::less<>> words_;
  std::vector<std::pair<std::string, PosTag>> suffixes_;  // longest first, stable
};

using Tagged = std::pair<std::string, PosTag>;

std::vector<Tagged> pos_tag(std::span<const std::string> tokens, const PosLexicon& lexicon);

using TagPattern = std::vector<PosTag>;

// The closed set of accepted phrase shapes.
const std::vector<TagPattern>& accept_patterns();

struct PhraseRules {
  std::vector<TagPattern> patterns;  // subset of accept_patterns()
  std::set<std::string, std::less<>> stoplist;

  // All five accepted patterns and an empty stoplist.
  static PhraseRules defaults();

  // {"patterns": [["ADJ","NOUN"], ...], "stoplist": ["..."]}. Throws
  // Error(kInvalidArgument) for patterns outside the accepted set.
  static PhraseRules from_json(const nlohmann::json& doc);
};

// Windows of length 2 and 3 whose tags match an enabled pattern and whose
// tokens avoid the stoplist. Ordered by window end, shorter window first;
// overlapping matches are all kept.
std::vector<std::string> extract_phrases(std::span<const Tagged> tagged, const PhraseRules& rules);

struct WordCloudEntry {
  std::string term;
  int count = 0;

  bool operator==(const WordCloudEntry&) const = default;
};

// Counts NOUN/VERB/ADJ unigrams outside `stopwords` plus extracted phrases,
// sorted count-desc then term-asc, truncated to top_n. Throws
// Error(kInvalidArgument) when top_n < 1.
std::vector<WordCloudEntry> wordcloud_counts(std::span<const std::string> docs, const PosLexicon& lexicon,
                                             const PhraseRules& rules,
                                             const std::set<std::string, std::less<>>& stopwords,
                                             std::size_t top_n);

// 2x2 table over students: a = has SEN type and participates in category,
// b = has SEN type only, c = participates only, d = neither.
struct ContingencyTable {
  std::string sen_type;
  records::ActivityCategory category = records::ActivityCategory::kOther;
  long a = 0, b = 0, c = 0, d = 0;

  bool operator==(const ContingencyTable&) const = default;
};

// One table per (observed SEN type, category), SEN types ascending and
// categories in canonical order.
std::vector<ContingencyTable> cooccurrence(std::span<const records::StudentRecord> students);

struct CorrelationCell {
  std::string sen_type;
  records::ActivityCategory category = records::ActivityCategory::kOther;
  std::optional<double> phi;   // absent when any margin is zero
  std::optional<double> lift;  // absent when any margin is zero
  long support = 0;
};

double phi_coefficient(long a, long b, long c, long d);
std::vector<CorrelationCell> correlate(std::span<const ContingencyTable> tables);

// Wire payloads: [{term, count}] and [{sen_type, activity_category, phi,
// lift, support}] with nulls for undefined cells.
nlohmann::json wordcloud_payload(std::span<const WordCloudEntry> entries);
nlohmann::json heatmap_payload(std::span<const CorrelationCell> cells);

}  // namespace dmp::iep
