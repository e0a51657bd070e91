// Copyright 2026 The persianlm Authors.
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

#include "persianlm/corpus.h"

#include <algorithm>
#include <random>

#include <gtest/gtest.h>

#include "persianlm/errors.h"
#include "test_util.h"

namespace persianlm {
namespace {

using test::TempDir;
using test::WriteFile;

TEST(LoadDocumentsTest, EmptyFileYieldsNothing) {
  TempDir dir;
  WriteFile(dir.Path("empty.jsonl"), "");
  WriteFile(dir.Path("empty.txt"), "");
  EXPECT_TRUE(LoadDocuments(dir.Path("empty.jsonl"),
                            DocumentFormat::kLineRecords).empty());
  EXPECT_TRUE(LoadDocuments(dir.Path("empty.txt"), DocumentFormat::kPlain)
                  .empty());
}

TEST(LoadDocumentsTest, RecordsInFileOrder) {
  TempDir dir;
  WriteFile(dir.Path("news.jsonl"),
            "{\"id\":\"a\",\"source\":\"s1\",\"text\":\"یک\"}\n"
            "{\"text\":\"دو\",\"lang\":\"fa\"}\n"
            "\n"
            "{\"id\":\"c\",\"text\":\"سه\",\"n\":3}\n");
  const auto docs =
      LoadDocuments(dir.Path("news.jsonl"), DocumentFormat::kLineRecords);
  ASSERT_EQ(docs.size(), 3u);
  EXPECT_EQ(docs[0].id, "a");
  EXPECT_EQ(docs[0].source, "s1");
  EXPECT_EQ(docs[0].text, "یک");
  // Missing id and source are synthesized from the file name.
  EXPECT_EQ(docs[1].id, "news.jsonl#2");
  EXPECT_EQ(docs[1].source, "news");
  ASSERT_EQ(docs[1].meta.size(), 1u);
  EXPECT_EQ(docs[1].meta[0], std::make_pair(std::string("lang"),
                                            std::string("fa")));
  EXPECT_EQ(docs[2].id, "c");
  ASSERT_EQ(docs[2].meta.size(), 1u);
  EXPECT_EQ(docs[2].meta[0].second, "3");
}

TEST(LoadDocumentsTest, PlainFileIsOneDocument) {
  TempDir dir;
  WriteFile(dir.Path("wiki.txt"), "سطر اول\nسطر دوم\n");
  const auto docs = LoadDocuments(dir.Path("wiki.txt"), DocumentFormat::kPlain);
  ASSERT_EQ(docs.size(), 1u);
  EXPECT_EQ(docs[0].id, "wiki.txt#1");
  EXPECT_EQ(docs[0].source, "wiki");
  EXPECT_EQ(docs[0].text, "سطر اول\nسطر دوم\n");
}

TEST(LoadDocumentsTest, MissingTextNamesTheLine) {
  TempDir dir;
  WriteFile(dir.Path("bad.jsonl"),
            "{\"text\":\"ok\"}\n{\"id\":\"x\"}\n{\"text\":\"ok\"}\n");
  try {
    LoadDocuments(dir.Path("bad.jsonl"), DocumentFormat::kLineRecords);
    FAIL() << "expected DataError";
  } catch (const DataError &e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos)
        << e.what();
  }
}

TEST(LoadDocumentsTest, MalformedRecordNamesTheLine) {
  TempDir dir;
  WriteFile(dir.Path("bad.jsonl"), "{\"text\":\"ok\"}\n{\"text\": \n");
  try {
    LoadDocuments(dir.Path("bad.jsonl"), DocumentFormat::kLineRecords);
    FAIL() << "expected DataError";
  } catch (const DataError &e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos)
        << e.what();
  }
}

TEST(LoadDocumentsTest, InvalidUtf8NamesTheByteOffset) {
  TempDir dir;
  WriteFile(dir.Path("bad.txt"), std::string("abc\xff") + "def");
  try {
    LoadDocuments(dir.Path("bad.txt"), DocumentFormat::kPlain);
    FAIL() << "expected DataError";
  } catch (const DataError &e) {
    EXPECT_NE(std::string(e.what()).find("byte offset 3"), std::string::npos)
        << e.what();
  }
}

TEST(LoadDocumentsTest, NulIsRejected) {
  TempDir dir;
  WriteFile(dir.Path("nul.txt"), std::string("a\0b", 3));
  EXPECT_THROW(LoadDocuments(dir.Path("nul.txt"), DocumentFormat::kPlain),
               DataError);
}

TEST(LoadDocumentsTest, DuplicateIdsAreRejected) {
  TempDir dir;
  WriteFile(dir.Path("dup.jsonl"),
            "{\"id\":\"a\",\"text\":\"x\"}\n{\"id\":\"a\",\"text\":\"y\"}\n");
  EXPECT_THROW(
      LoadDocuments(dir.Path("dup.jsonl"), DocumentFormat::kLineRecords),
      DataError);
}

TEST(LoadDocumentsTest, MissingFileIsAnIoError) {
  TempDir dir;
  EXPECT_THROW(LoadDocuments(dir.Path("nope.jsonl"),
                             DocumentFormat::kLineRecords),
               IoError);
}

TEST(ParseDocumentFormatTest, KnownAndUnknownNames) {
  EXPECT_EQ(ParseDocumentFormat("plain"), DocumentFormat::kPlain);
  EXPECT_EQ(ParseDocumentFormat("line-records"), DocumentFormat::kLineRecords);
  EXPECT_THROW(ParseDocumentFormat("xml"), ConfigError);
}

Document Doc(const std::string &source) {
  Document d;
  d.source = source;
  return d;
}

TEST(CorpusStatsTest, EmptyInput) {
  const CorpusStats stats = ComputeCorpusStats({});
  EXPECT_TRUE(stats.per_source.empty());
  EXPECT_EQ(stats.totals, (SourceCounts{0, 0}));
}

TEST(CorpusStatsTest, PerSourceAndTotals) {
  const CorpusStats stats =
      ComputeCorpusStats({{Doc("A"), 5}, {Doc("A"), 3}, {Doc("B"), 2}});
  EXPECT_EQ(stats.per_source.at("A"), (SourceCounts{2, 8}));
  EXPECT_EQ(stats.per_source.at("B"), (SourceCounts{1, 2}));
  EXPECT_EQ(stats.totals, (SourceCounts{3, 10}));
}

TEST(CorpusStatsTest, PermutationInvariant) {
  std::vector<std::pair<Document, uint64_t>> input;
  std::mt19937 gen(3);
  for (int i = 0; i < 200; ++i) {
    input.push_back({Doc("src" + std::to_string(gen() % 7)), gen() % 50});
  }
  const CorpusStats reference = ComputeCorpusStats(input);
  uint64_t sum = 0;
  for (const auto &p : input) sum += p.second;
  EXPECT_EQ(reference.totals.documents, input.size());
  EXPECT_EQ(reference.totals.sentences, sum);
  SourceCounts per_source_sum;
  for (const auto &[name, c] : reference.per_source) {
    per_source_sum.documents += c.documents;
    per_source_sum.sentences += c.sentences;
  }
  EXPECT_EQ(per_source_sum, reference.totals);
  for (int trial = 0; trial < 20; ++trial) {
    std::shuffle(input.begin(), input.end(), gen);
    EXPECT_EQ(ComputeCorpusStats(input), reference);
  }
}

TEST(CorpusStatsTest, TableAndRecords) {
  const CorpusStats stats =
      ComputeCorpusStats({{Doc("A"), 1200}, {Doc("B"), 2}});
  const std::string table = FormatStatsTable(stats);
  EXPECT_NE(table.find("1,200"), std::string::npos) << table;
  EXPECT_NE(table.find("Total"), std::string::npos) << table;
  TempDir dir;
  WriteStatsRecords(stats, dir.Path("stats.jsonl"));
  const std::string records = test::ReadFile(dir.Path("stats.jsonl"));
  EXPECT_EQ(std::count(records.begin(), records.end(), '\n'), 3);
  EXPECT_NE(records.find("\"total\":true"), std::string::npos) << records;
}

}  // namespace
}  // namespace persianlm
