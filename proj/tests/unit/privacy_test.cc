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

#include <gtest/gtest.h>
#include <openssl/evp.h>
#include <openssl/hmac.h>

#include <set>

#include "dmp/common/crypto.h"
#include "dmp/common/error.h"
#include "dmp/common/rng.h"
#include "dmp/privacy/ingest.h"
#include "dmp/privacy/pseudonym.h"
#include "dmp/records/serialize.h"
#include "test_util.h"

namespace dmp::privacy {
namespace {

using dmp::testing::fixed_key;

// Direct OpenSSL one-shot HMAC over the length-prefixed (school, raw_id).
std::string oracle_token(const records::StudentId& id, const PseudonymKey& key) {
  std::string msg;
  auto prefix = [&](const std::string& s) {
    std::uint32_t n = static_cast<std::uint32_t>(s.size());
    msg.push_back(static_cast<char>(n >> 24));
    msg.push_back(static_cast<char>(n >> 16));
    msg.push_back(static_cast<char>(n >> 8));
    msg.push_back(static_cast<char>(n));
    msg += s;
  };
  prefix(id.school);
  prefix(id.raw_id);
  unsigned char out[32];
  unsigned int len = 0;
  HMAC(EVP_sha256(), key.bytes().data(), static_cast<int>(key.bytes().size()),
       reinterpret_cast<const unsigned char*>(msg.data()), msg.size(), out, &len);
  static const char* hex = "0123456789abcdef";
  std::string s;
  for (unsigned i = 0; i < len; ++i) {
    s += hex[out[i] >> 4];
    s += hex[out[i] & 15];
  }
  return s;
}

std::string random_id(Rng& rng) {
  static const char alphabet[] = "0123456789abcdefghijklmnopqrstuvwxyz-";
  std::string s;
  for (int i = 0, n = 1 + static_cast<int>(rng.below(12)); i < n; ++i) s += alphabet[rng.below(sizeof(alphabet) - 1)];
  return s;
}

TEST(Crypto, HmacKnownVector) {
  std::string key = "Jefe";
  auto mac = crypto::hmac_sha256(crypto::as_bytes(key), crypto::as_bytes("what do ya want for nothing?"));
  EXPECT_EQ(crypto::to_hex(mac), "5bdcc146bf60754e6a042426089575c75a003f089d2739839dec58b964ec3843");
}

TEST(Crypto, Sha256KnownVector) {
  EXPECT_EQ(crypto::to_hex(crypto::sha256(std::string_view("abc"))),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Crypto, HexRejectsBadInput) {
  EXPECT_THROW(crypto::from_hex("abc"), Error);
  EXPECT_THROW(crypto::from_hex("zz"), Error);
  EXPECT_EQ(crypto::from_hex("00ff"), (crypto::Bytes{0, 255}));
}

TEST(Pseudonym, MatchesIndependentHmac) {
  Rng rng(3);
  auto key = fixed_key();
  for (int i = 0; i < 200; ++i) {
    records::StudentId id{"sch" + std::to_string(rng.below(5)), random_id(rng)};
    EXPECT_EQ(pseudonymize(id, key).str(), oracle_token(id, key));
  }
}

TEST(Pseudonym, DeterministicAndFixedLength) {
  auto key = fixed_key();
  records::StudentId id{"s1", "12345"};
  EXPECT_EQ(pseudonymize(id, key), pseudonymize(id, key));
  EXPECT_EQ(pseudonymize(id, key).str().size(), 64u);
}

TEST(Pseudonym, LengthPrefixSeparatesBoundaries) {
  auto key = fixed_key();
  EXPECT_NE(pseudonymize({"ab", "c"}, key), pseudonymize({"a", "bc"}, key));
}

TEST(Pseudonym, KeysSeparateTokensOnLargeCorpus) {
  Rng rng(11);
  auto k1 = fixed_key(1);
  auto k2 = fixed_key(2);
  std::set<std::string> ids;
  while (ids.size() < 10000) ids.insert(random_id(rng));
  std::set<std::string> t1;
  std::set<std::string> t2;
  for (const auto& raw : ids) {
    auto a = pseudonymize({"s", raw}, k1).str();
    auto b = pseudonymize({"s", raw}, k2).str();
    EXPECT_NE(a, b);
    t1.insert(a);
    t2.insert(b);
  }
  EXPECT_EQ(t1.size(), ids.size());
  EXPECT_EQ(t2.size(), ids.size());
}

TEST(Pseudonym, KeyMustBe32Bytes) {
  std::vector<std::uint8_t> short_key(31, 1);
  EXPECT_THROW(PseudonymKey::from_bytes(short_key), Error);
  auto k = PseudonymKey::generate();
  EXPECT_EQ(PseudonymKey::from_hex(k.hex()), k);
}

ReidentificationTable sample_table(int n) {
  ReidentificationTable t;
  auto key = fixed_key();
  for (int i = 0; i < n; ++i) {
    records::StudentId id{"s1", "raw-" + std::to_string(i)};
    t.insert(pseudonymize(id, key), id);
  }
  return t;
}

TEST(LocalTable, EncryptDecryptRoundTrip) {
  auto key = fixed_key();
  auto table = sample_table(25);
  auto sealed = encrypt_table(table, key);
  ASSERT_GE(sealed.size(), 4u + 1 + 12 + 16);
  EXPECT_EQ(std::string(sealed.begin(), sealed.begin() + 4), "DMPL");
  EXPECT_EQ(sealed[4], 1);
  EXPECT_EQ(decrypt_table(sealed, key), table);
}

TEST(LocalTable, CiphertextHidesRawIds) {
  auto sealed = encrypt_table(sample_table(25), fixed_key());
  std::string bytes(sealed.begin(), sealed.end());
  EXPECT_EQ(bytes.find("raw-"), std::string::npos);
}

TEST(LocalTable, FreshNonceEachWrite) {
  auto key = fixed_key();
  auto table = sample_table(3);
  EXPECT_NE(encrypt_table(table, key), encrypt_table(table, key));
  std::array<std::uint8_t, 12> nonce{};
  EXPECT_EQ(encrypt_table(table, key, nonce), encrypt_table(table, key, nonce));
}

TEST(LocalTable, WrongKeyFailsAuthentication) {
  auto sealed = encrypt_table(sample_table(5), fixed_key(1));
  try {
    decrypt_table(sealed, fixed_key(2));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kAuthenticationFailed);
  }
}

TEST(LocalTable, TamperingDetected) {
  auto key = fixed_key();
  auto sealed = encrypt_table(sample_table(5), key);
  for (std::size_t pos : {std::size_t{5}, std::size_t{20}, sealed.size() - 1}) {
    auto bad = sealed;
    bad[pos] ^= 1;
    try {
      decrypt_table(bad, key);
      FAIL() << pos;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kAuthenticationFailed);
    }
  }
  auto bad_magic = sealed;
  bad_magic[0] = 'X';
  EXPECT_THROW(decrypt_table(bad_magic, key), Error);
  crypto::Bytes truncated(sealed.begin(), sealed.begin() + 10);
  try {
    decrypt_table(truncated, key);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kCorruptSnapshot);
  }
}

TEST(LocalTable, CollisionDetected) {
  ReidentificationTable t;
  auto tok = dmp::testing::token_of('a');
  t.insert(tok, {"s", "1"});
  t.insert(tok, {"s", "1"});
  try {
    t.insert(tok, {"s", "2"});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kCollisionDetected);
  }
}

CsvRow row(std::initializer_list<std::pair<std::string_view, std::string>> fields) {
  CsvRow r;
  for (const auto& [name, value] : fields) {
    for (std::size_t i = 0; i < kCsvColumns.size(); ++i) {
      if (kCsvColumns[i] == name) r[i] = value;
    }
  }
  return r;
}

std::string score_row(const std::string& id, const std::string& subject, const std::string& score) {
  return format_csv_row(row({{"student_id", id}, {"record_type", "score"}, {"subject", subject}, {"year", "2021"},
                             {"term", "1"}, {"score", score}}));
}

TEST(ParseBatch, ThreeValidRows) {
  std::string csv = csv_header() + "\n" + score_row("1", "math", "70") + "\n" + score_row("2", "math", "60") + "\n" +
                    score_row("3", "math", "50") + "\n";
  auto batch = parse_batch(csv, IngestFormat::kCsv, "s1");
  EXPECT_EQ(batch.records.size(), 3u);
  EXPECT_TRUE(batch.rejects.empty());
  EXPECT_EQ(batch.source_format_version, 1);
}

TEST(ParseBatch, MissingScoreRejectedWithLineNumber) {
  std::string csv = csv_header() + "\n" + score_row("1", "math", "70") + "\n" + score_row("2", "math", "") + "\n" +
                    score_row("3", "math", "50") + "\n";
  auto batch = parse_batch(csv, IngestFormat::kCsv, "s1");
  EXPECT_EQ(batch.records.size(), 2u);
  ASSERT_EQ(batch.rejects.size(), 1u);
  EXPECT_EQ(batch.rejects[0].line, 3u);
}

TEST(ParseBatch, EmptyFile) {
  try {
    parse_batch("", IngestFormat::kCsv, "s1");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyFile);
  }
}

TEST(ParseBatch, WrongHeaderUnsupported) {
  try {
    parse_batch("id,score\n1,2\n", IngestFormat::kCsv, "s1");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnsupportedFormat);
  }
  EXPECT_THROW(parse_ingest_format("xml"), Error);
}

TEST(ParseBatch, TotalOverGarbageRows) {
  std::string csv = csv_header() + "\n" + "a,b\n" + "\"unterminated\n" + score_row("1", "math", "101") + "\n" +
                    score_row("1", "math", "x") + "\n" + std::string("\xff\xfe,") + "\n" +
                    format_csv_row(row({{"student_id", "2"}, {"record_type", "wat"}})) + "\n" +
                    score_row("5", "math", "40") + "\n";
  auto batch = parse_batch(csv, IngestFormat::kCsv, "s1");
  EXPECT_EQ(batch.records.size(), 1u);
  EXPECT_EQ(batch.rejects.size(), 6u);
  std::set<std::size_t> lines;
  for (const auto& r : batch.rejects) lines.insert(r.line);
  EXPECT_EQ(lines, (std::set<std::size_t>{2, 3, 4, 5, 6, 7}));
}

TEST(ParseBatch, QuotedFieldsRoundTrip) {
  auto r = row({{"student_id", "9"}, {"record_type", "iep"}, {"sen_type", "ADHD"}, {"event_date", "2021-10-01"},
                {"narrative", "Needs \"quiet\" breaks, often."}});
  std::string csv = csv_header() + "\n" + format_csv_row(r) + "\n";
  auto batch = parse_batch(csv, IngestFormat::kCsv, "s1");
  ASSERT_EQ(batch.records.size(), 1u);
  ASSERT_EQ(batch.records[0].body.iep.size(), 1u);
  EXPECT_EQ(batch.records[0].body.iep[0].narrative, "Needs \"quiet\" breaks, often.");
  EXPECT_THROW(format_csv_row(row({{"narrative", "two\nlines"}})), Error);
}

TEST(ParseBatch, JsonlRows) {
  std::string jsonl =
      R"({"student_id":"7","cohort_year":2021,"scores":[{"subject":"math","year":2021,"term":1,"score":55}]})"
      "\n"
      R"({"cohort_year":2021})"
      "\n"
      "not json\n"
      R"({"student_id":"8","token":"x"})"
      "\n";
  auto batch = parse_batch(jsonl, IngestFormat::kJsonl, "s1");
  ASSERT_EQ(batch.records.size(), 1u);
  EXPECT_EQ(batch.records[0].student_id, "7");
  EXPECT_EQ(batch.rejects.size(), 3u);
}

TEST(SplitStores, FiveStudentsBijection) {
  std::string csv = csv_header() + "\n";
  for (int i = 0; i < 5; ++i) csv += score_row("id" + std::to_string(i), "math", "60") + "\n";
  auto split = split_stores(parse_batch(csv, IngestFormat::kCsv, "s1"), fixed_key());
  EXPECT_EQ(split.central.size(), 5u);
  EXPECT_EQ(split.local.size(), 5u);
  for (const auto& r : split.central) {
    auto id = split.local.lookup(r.token);
    ASSERT_TRUE(id);
    EXPECT_EQ(pseudonymize(*id, fixed_key()), r.token);
  }
}

TEST(SplitStores, SameStudentTwoRowsMerged) {
  std::string csv = csv_header() + "\n" + score_row("42", "math", "60") + "\n" + score_row("42", "art", "70") + "\n";
  auto split = split_stores(parse_batch(csv, IngestFormat::kCsv, "s1"), fixed_key());
  ASSERT_EQ(split.central.size(), 1u);
  EXPECT_EQ(split.local.size(), 1u);
  EXPECT_EQ(split.central[0].scores.size(), 2u);
}

// Raw ids drawn to look like values that appear elsewhere in a record.
TEST(SplitStores, CentralSerializationNeverContainsRawIds) {
  Rng rng(5);
  std::vector<std::string> ids;
  const std::string plausible[] = {"math", "2021", "60", "s1", "robotics", "dyslexia", "Needs", "1"};
  for (const auto& p : plausible) ids.push_back(p);
  std::set<std::string> seen(ids.begin(), ids.end());
  while (ids.size() < 1200) {
    auto id = "R" + random_id(rng) + std::to_string(rng.below(100000));
    if (seen.insert(id).second) ids.push_back(id);
  }
  std::string csv = csv_header() + "\n";
  for (const auto& id : ids) {
    csv += score_row(id, "math", "60") + "\n";
    csv += format_csv_row(row({{"student_id", id}, {"record_type", "elective"}, {"elective_id", "robotics"},
                               {"rating", "0.5"}})) +
           "\n";
  }
  auto split = split_stores(parse_batch(csv, IngestFormat::kCsv, "s1"), fixed_key());
  ASSERT_EQ(split.central.size(), ids.size());
  std::vector<std::string> serialized;
  for (const auto& r : split.central) serialized.push_back(records::to_json(r).dump());
  std::size_t leaks = 0;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    // "R..." ids must not appear anywhere; the plausible ids are checked
    // against their own record's id field only.
    if (i >= std::size(plausible)) {
      for (const auto& s : serialized) leaks += s.find(ids[i]) != std::string::npos;
    }
  }
  EXPECT_EQ(leaks, 0u);
  for (const auto& s : serialized) {
    EXPECT_EQ(s.find("student_id"), std::string::npos);
    EXPECT_EQ(s.find("raw_id"), std::string::npos);
  }
}

}  // namespace
}  // namespace dmp::privacy
