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

#ifndef PERSIANLM_CORPUS_H_
#define PERSIANLM_CORPUS_H_

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace persianlm {

struct Document {
  std::string id;
  std::string source;
  std::string text;
  // Unknown line-record fields, in file order.
  std::vector<std::pair<std::string, std::string>> meta;
};

enum class DocumentFormat { kPlain, kLineRecords };

DocumentFormat ParseDocumentFormat(const std::string &name);

// Streaming document source. Corpora are never materialized as a whole;
// LoadDocuments is a convenience for small inputs.
class DocumentReader {
 public:
  DocumentReader(const std::string &path, DocumentFormat format);
  ~DocumentReader();
  DocumentReader(const DocumentReader &) = delete;
  DocumentReader &operator=(const DocumentReader &) = delete;

  // Returns false once the file is exhausted.
  bool Next(Document *doc);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

std::vector<Document> LoadDocuments(const std::string &path,
                                    DocumentFormat format);

struct SourceCounts {
  uint64_t documents = 0;
  uint64_t sentences = 0;

  bool operator==(const SourceCounts &) const = default;
};

struct CorpusStats {
  std::map<std::string, SourceCounts> per_source;
  SourceCounts totals;

  bool operator==(const CorpusStats &) const = default;
};

class CorpusStatsBuilder {
 public:
  void Add(const std::string &source, uint64_t sentence_count);
  const CorpusStats &stats() const { return stats_; }

 private:
  CorpusStats stats_;
};

CorpusStats ComputeCorpusStats(
    const std::vector<std::pair<Document, uint64_t>> &documents);

// Fixed-width UTF-8 table with one row per source plus a total row.
std::string FormatStatsTable(const CorpusStats &stats);

// One {"source", "documents", "sentences"} record per source, then a record
// with "total": true.
void WriteStatsRecords(const CorpusStats &stats, const std::string &path);

}  // namespace persianlm

#endif  // PERSIANLM_CORPUS_H_
