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

#include "dmp/platform/synthetic.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <set>

#include "dmp/common/error.h"
#include "dmp/common/rng.h"
#include "dmp/privacy/ingest.h"

namespace dmp::platform {

namespace {

using records::ActivityCategory;
using records::BehaviorKind;

constexpr std::array<std::string_view, 8> kSubjects{"chinese", "english", "math",    "physics",
                                                    "chemistry", "biology", "history", "geography"};

constexpr int kGroups = 4;

// Interest groups of six electives each.
constexpr std::array<std::array<std::string_view, 6>, kGroups> kElectiveGroups{{
    {"robotics", "data-science", "astronomy", "engineering-design", "marine-biology", "game-dev"},
    {"ceramics", "film-making", "choir", "digital-art", "jazz-band", "fashion-design"},
    {"psychology", "philosophy", "journalism", "model-un", "archaeology", "creative-writing"},
    {"fitness", "dance", "martial-arts", "outdoor-ed", "sailing", "climbing"},
}};

struct ActivityTemplate {
  std::string_view name;
  ActivityCategory category;
};

constexpr ActivityTemplate kActivities[] = {
    {"Math Club", ActivityCategory::kAcademic},
    {"Debate Team", ActivityCategory::kAcademic},
    {"Basketball Team", ActivityCategory::kSports},
    {"Swimming Squad", ActivityCategory::kSports},
    {"School Orchestra", ActivityCategory::kArts},
    {"Drama Society", ActivityCategory::kArts},
    {"Student Council President", ActivityCategory::kLeadership},
    {"Class Prefect", ActivityCategory::kLeadership},
    {"Model Assembly Delegate", ActivityCategory::kLeadership},
    {"Community Service Group", ActivityCategory::kService},
    {"Elderly Visit Volunteers", ActivityCategory::kService},
    {"Robotics Club", ActivityCategory::kTechnology},
    {"Coding Club", ActivityCategory::kTechnology},
    {"Chess Club", ActivityCategory::kOther},
    {"Photography Circle", ActivityCategory::kOther},
};

constexpr std::string_view kAwards[] = {
    "Math Olympiad Silver",      "Science Fair Finalist",     "Inter-school Basketball Champion",
    "Swimming Gala Medal",       "Music Festival Piano Prize", "Drama Festival Best Actor",
    "Student Leadership Award",  "Community Volunteer Award", "Robotics Challenge Finalist",
    "Coding Marathon Winner",    "Good Conduct Certificate",
};

constexpr std::string_view kPunishments[] = {"late to class", "uniform violation", "disruptive behaviour",
                                             "missing detention"};

struct SenProfile {
  std::string_view type;
  std::array<std::string_view, 5> nouns;
  std::array<std::string_view, 3> adjectives;
  ActivityCategory favored;
};

constexpr SenProfile kSen[] = {
    {"dyslexia", {"reading", "spelling", "decoding", "phonics", "fluency"}, {"visual", "structured", "multisensory"},
     ActivityCategory::kArts},
    {"ADHD", {"attention", "focus", "movement", "breaks", "routine"}, {"short", "frequent", "active"},
     ActivityCategory::kSports},
    {"ASD", {"communication", "transitions", "routine", "interaction", "sensory"}, {"predictable", "quiet", "visual"},
     ActivityCategory::kTechnology},
    {"speech-language", {"vocabulary", "expression", "articulation", "comprehension", "listening"},
     {"verbal", "oral", "clear"}, ActivityCategory::kService},
};

std::string fixed(double v, int digits) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

std::string date_in_term(Rng& rng, const records::TermRef& ref) {
  auto start = std::chrono::sys_days(records::term_start(ref));
  auto end = std::chrono::sys_days(records::term_start(ref.next()));
  auto span = (end - start).count();
  auto day = start + std::chrono::days(static_cast<long>(rng.below(static_cast<std::uint64_t>(span))));
  return records::format_date(records::Date(day));
}

template <typename T, std::size_t N>
const T& pick(Rng& rng, const std::array<T, N>& items) {
  return items[rng.below(N)];
}

std::string narrative(Rng& rng, const SenProfile& sen) {
  auto noun = [&] { return std::string(pick(rng, sen.nouns)); };
  auto adj = [&] { return std::string(pick(rng, sen.adjectives)); };
  std::string out;
  int sentences = 2 + static_cast<int>(rng.below(2));
  for (int s = 0; s < sentences; ++s) {
    if (!out.empty()) out += ' ';
    switch (rng.below(5)) {
      case 0: out += "Student shows " + adj() + " " + noun() + " during class lessons."; break;
      case 1: out += "Needs " + adj() + " support with " + noun() + " tasks."; break;
      case 2: out += "Benefits from " + adj() + " " + noun() + " and " + adj() + " feedback."; break;
      case 3: out += "Struggles to maintain " + noun() + " in busy settings."; break;
      default:
        out += "Teacher will provide " + adj() + " " + noun() + " practice every " +
               std::to_string(1 + rng.below(3)) + " weeks.";
        break;
    }
  }
  return out;
}

}  // namespace

void validate_spec(const SyntheticDatasetSpec& spec) {
  if (spec.schools < 1 || spec.schools > 26 || spec.students_per_school < 0 || spec.subjects < 1 ||
      spec.subjects > static_cast<int>(kSubjects.size()) || spec.terms < 1 || spec.terms > 12 ||
      spec.electives < kGroups || spec.electives > 24 || spec.electives % kGroups != 0) {
    throw Error(ErrorCode::kInvalidArgument, "synthetic dataset spec out of range");
  }
}

std::vector<records::SchoolId> synthetic_school_ids(const SyntheticDatasetSpec& spec) {
  std::vector<records::SchoolId> ids;
  for (int s = 0; s < spec.schools; ++s) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "sch%02d", s + 1);
    ids.emplace_back(buf);
  }
  return ids;
}

std::vector<std::string> synthetic_subjects(const SyntheticDatasetSpec& spec) {
  return {kSubjects.begin(), kSubjects.begin() + spec.subjects};
}

ElectiveCatalog synthetic_catalog(const SyntheticDatasetSpec& spec) {
  validate_spec(spec);
  ElectiveCatalog catalog;
  int per_group = spec.electives / kGroups;
  int exclusive_per_group = per_group / 3;  // last third of each group
  int shared_per_group = per_group - exclusive_per_group;
  auto schools = synthetic_school_ids(spec);
  std::vector<std::pair<std::string, int>> exclusive;
  for (int g = 0; g < kGroups; ++g) {
    for (int j = 0; j < per_group; ++j) {
      std::string id(kElectiveGroups[g][j]);
      catalog.group[id] = g;
      if (j < shared_per_group) {
        for (const auto& s : schools) catalog.offered[s].push_back(id);
      } else {
        exclusive.emplace_back(id, g);
      }
    }
  }
  // Exclusive electives go round-robin over schools.
  for (std::size_t e = 0; e < exclusive.size(); ++e) {
    catalog.offered[schools[e % schools.size()]].push_back(exclusive[e].first);
  }
  for (auto& [school, ids] : catalog.offered) std::sort(ids.begin(), ids.end());
  return catalog;
}

std::map<records::SchoolId, std::string> generate_synthetic(const SyntheticDatasetSpec& spec) {
  validate_spec(spec);
  auto schools = synthetic_school_ids(spec);
  auto subjects = synthetic_subjects(spec);
  auto catalog = synthetic_catalog(spec);
  std::vector<records::TermRef> terms;
  records::TermRef t{spec.cohort_year, 1};
  for (int i = 0; i < spec.terms; ++i, t = t.next()) terms.push_back(t);

  std::map<records::SchoolId, std::string> files;
  for (const auto& school : schools) {
    auto rng = Rng::derive(spec.seed, "school\x1f" + school);
    std::string out = privacy::csv_header() + "\n";
    auto emit = [&](const privacy::CsvRow& row) { out += privacy::format_csv_row(row) + "\n"; };
    // Each school leans toward one interest group.
    int school_group = static_cast<int>(&school - schools.data()) % kGroups;
    const auto& offered = catalog.offered[school];
    std::set<std::string> used_ids;

    for (int n = 0; n < spec.students_per_school; ++n) {
      std::string raw_id;
      do {
        raw_id = school + "-" + std::to_string(100000 + rng.below(900000));
      } while (!used_ids.insert(raw_id).second);
      auto row = [&](std::string_view type) {
        privacy::CsvRow r;
        r[0] = raw_id;
        r[1] = std::string(type);
        return r;
      };

      double ability = rng.normal();
      double propensity = rng.normal();
      double trend = rng.normal(0.0, 0.6);
      {
        auto r = row("student");
        r[3] = std::to_string(spec.cohort_year);
        emit(r);
      }
      for (const auto& subject : subjects) {
        double affinity = rng.normal(0.0, 0.5);
        for (std::size_t k = 0; k < terms.size(); ++k) {
          double score = 64.0 + 12.0 * ability + 6.0 * affinity + 1.5 * trend * static_cast<double>(k) +
                         2.0 * propensity + rng.normal(0.0, 4.0);
          score = std::clamp(score, 0.0, 100.0);
          auto r = row("score");
          r[2] = subject;
          r[3] = std::to_string(terms[k].year);
          r[4] = std::to_string(terms[k].term);
          r[5] = fixed(score, 1);
          emit(r);
        }
      }
      for (const auto& term : terms) {
        auto event = [&](BehaviorKind kind, std::string detail = {}) {
          auto r = row("behavior");
          r[6] = std::string(records::to_string(kind));
          r[7] = date_in_term(rng, term);
          r[12] = std::move(detail);
          emit(r);
        };
        int attended = 6;
        int absences = rng.poisson(std::max(0.3, 2.2 - 1.6 * propensity));
        int punishments = rng.poisson(std::max(0.05, 0.5 - 0.6 * propensity));
        int missed = rng.poisson(std::max(0.2, 2.0 - 1.5 * propensity));
        int submitted = 6;
        for (int i = 0; i < attended; ++i) event(BehaviorKind::kAttendance);
        for (int i = 0; i < absences; ++i) event(BehaviorKind::kAbsence);
        for (int i = 0; i < punishments; ++i) event(BehaviorKind::kPunishment, std::string(kPunishments[rng.below(4)]));
        for (int i = 0; i < submitted; ++i) event(BehaviorKind::kHomeworkSubmitted);
        for (int i = 0; i < missed; ++i) event(BehaviorKind::kHomeworkMissed);
        if (rng.bernoulli(std::clamp(0.08 + 0.08 * ability + 0.04 * propensity, 0.01, 0.5))) {
          event(BehaviorKind::kAward, std::string(kAwards[rng.below(std::size(kAwards))]));
        }
      }

      const SenProfile* sen = rng.bernoulli(0.14) ? &kSen[rng.below(std::size(kSen))] : nullptr;
      int activity_count = static_cast<int>(rng.below(4));
      std::set<std::string_view> joined;
      for (int a = 0; a < activity_count; ++a) {
        const ActivityTemplate* tmpl = nullptr;
        if (sen && rng.bernoulli(0.6)) {
          std::vector<const ActivityTemplate*> favored;
          for (const auto& at : kActivities) {
            if (at.category == sen->favored) favored.push_back(&at);
          }
          tmpl = favored[rng.below(favored.size())];
        } else {
          tmpl = &kActivities[rng.below(std::size(kActivities))];
        }
        if (!joined.insert(tmpl->name).second) continue;
        auto r = row("activity");
        r[8] = std::string(tmpl->name);
        r[9] = std::string(records::to_string(tmpl->category));
        r[10] = fixed(std::round(rng.uniform(4.0, 80.0)), 0);
        emit(r);
      }
      if (sen) {
        int entries = 1 + static_cast<int>(rng.below(2));
        for (int e = 0; e < entries; ++e) {
          auto r = row("iep");
          r[11] = std::string(sen->type);
          r[12] = narrative(rng, *sen);
          r[7] = date_in_term(rng, terms[rng.below(terms.size())]);
          emit(r);
        }
      }

      // Block-structured elective interest.
      int primary = rng.bernoulli(0.4) ? school_group : static_cast<int>(rng.below(kGroups));
      int secondary = static_cast<int>(rng.below(kGroups));
      int wanted = 3 + static_cast<int>(rng.below(3));
      std::set<std::string> chosen;
      for (int attempt = 0; attempt < 64 && static_cast<int>(chosen.size()) < wanted; ++attempt) {
        double u = rng.uniform();
        int group = u < 0.75 ? primary : u < 0.9 ? secondary : -1;
        std::vector<std::pair<std::string, double>> pool;
        for (const auto& id : offered) {
          if (chosen.count(id)) continue;
          if (group >= 0 && catalog.group.at(id) != group) continue;
          // Earlier electives in a group are more popular.
          const auto& names = kElectiveGroups[catalog.group.at(id)];
          auto pos = std::find(names.begin(), names.end(), id) - names.begin();
          pool.emplace_back(id, 1.0 / (1.0 + 0.35 * static_cast<double>(pos)));
        }
        if (pool.empty()) continue;
        double total = 0.0;
        for (const auto& [id, w] : pool) total += w;
        double x = rng.uniform() * total;
        std::size_t idx = 0;
        while (idx + 1 < pool.size() && x >= pool[idx].second) x -= pool[idx++].second;
        chosen.insert(pool[idx].first);
      }
      for (const auto& id : chosen) {
        auto r = row("elective");
        r[13] = id;
        r[14] = fixed(rng.uniform(0.5, 1.0), 2);
        emit(r);
      }
      for (const auto& subject : subjects) {
        if (!rng.bernoulli(0.25)) continue;
        auto r = row("target");
        r[15] = subject;
        r[16] = std::to_string(3 + rng.below(4));
        emit(r);
      }
    }
    files[school] = std::move(out);
  }
  return files;
}

}  // namespace dmp::platform
