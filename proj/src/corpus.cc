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

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "persianlm/errors.h"
#include "persianlm/jsonl.h"
#include "persianlm/utf8.h"

namespace persianlm {

DocumentFormat ParseDocumentFormat(const std::string &name) {
  if (name == "plain") return DocumentFormat::kPlain;
  if (name == "line-records" || name == "jsonl") {
    return DocumentFormat::kLineRecords;
  }
  throw ConfigError("unknown document format: " + name);
}

namespace {

void CheckText(const std::string &text, const std::string &where) {
  const size_t bad = utf8::FindInvalid(text);
  if (bad != std::string::npos) {
    throw DataError(where + ": invalid UTF-8 at byte offset " +
                    std::to_string(bad));
  }
  if (text.find('\0') != std::string::npos) {
    throw DataError(where + ": text contains NUL");
  }
}

}  // namespace

struct DocumentReader::Impl {
  std::string path;
  std::string filename;
  std::string stem;
  DocumentFormat format;
  std::unique_ptr<LineRecordReader> records;
  bool plain_done = false;
  std::set<std::string> seen_ids;

  bool NextPlain(Document *doc) {
    if (plain_done) return false;
    plain_done = true;
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) throw IoError("read failure on " + path);
    std::string text = buf.str();
    if (text.empty()) return false;
    CheckText(text, path);
    doc->id = filename + "#1";
    doc->source = stem;
    doc->text = std::move(text);
    doc->meta.clear();
    return true;
  }

  bool NextRecord(Document *doc) {
    Json rec;
    if (!records->Next(&rec)) return false;
    const std::string where =
        path + ": line " + std::to_string(records->line_number());
    doc->text = RequireString(rec, "text", where);
    CheckText(doc->text, where);
    doc->id = filename + "#" + std::to_string(records->line_number());
    doc->source = stem;
    doc->meta.clear();
    for (auto it = rec.begin(); it != rec.end(); ++it) {
      const std::string &key = it.key();
      if (key == "text") continue;
      if (key == "id" || key == "source") {
        if (!it->is_string()) {
          throw DataError(where + ": field \"" + key + "\" is not a string");
        }
        (key == "id" ? doc->id : doc->source) = it->get<std::string>();
        continue;
      }
      doc->meta.emplace_back(
          key, it->is_string() ? it->get<std::string>() : ToLine(*it));
    }
    if (!seen_ids.insert(doc->id).second) {
      throw DataError(where + ": duplicate document id \"" + doc->id + "\"");
    }
    return true;
  }
};

DocumentReader::DocumentReader(const std::string &path, DocumentFormat format)
    : impl_(std::make_unique<Impl>()) {
  impl_->path = path;
  const std::filesystem::path p(path);
  impl_->filename = p.filename().string();
  impl_->stem = p.stem().string();
  impl_->format = format;
  if (!std::filesystem::exists(p)) throw IoError("no such file: " + path);
  if (format == DocumentFormat::kLineRecords) {
    impl_->records = std::make_unique<LineRecordReader>(path);
  }
}

DocumentReader::~DocumentReader() = default;

bool DocumentReader::Next(Document *doc) {
  return impl_->format == DocumentFormat::kPlain ? impl_->NextPlain(doc)
                                                 : impl_->NextRecord(doc);
}

std::vector<Document> LoadDocuments(const std::string &path,
                                    DocumentFormat format) {
  DocumentReader reader(path, format);
  std::vector<Document> docs;
  Document doc;
  while (reader.Next(&doc)) docs.push_back(doc);
  return docs;
}

void CorpusStatsBuilder::Add(const std::string &source,
                             uint64_t sentence_count) {
  SourceCounts &c = stats_.per_source[source];
  ++c.documents;
  c.sentences += sentence_count;
  ++stats_.totals.documents;
  stats_.totals.sentences += sentence_count;
}

CorpusStats ComputeCorpusStats(
    const std::vector<std::pair<Document, uint64_t>> &documents) {
  CorpusStatsBuilder builder;
  for (const auto &[doc, count] : documents) builder.Add(doc.source, count);
  return builder.stats();
}

namespace {

// Pads by codepoint count so Persian source names line up.
std::string PadRight(const std::string &s, size_t width) {
  const size_t len = utf8::Length(s);
  return len >= width ? s : s + std::string(width - len, ' ');
}

std::string Thousands(uint64_t v) {
  std::string digits = std::to_string(v);
  std::string out;
  for (size_t i = 0; i < digits.size(); ++i) {
    if (i > 0 && (digits.size() - i) % 3 == 0) out.push_back(',');
    out.push_back(digits[i]);
  }
  return out;
}

}  // namespace

std::string FormatStatsTable(const CorpusStats &stats) {
  size_t name_width = 6;
  for (const auto &[name, c] : stats.per_source) {
    name_width = std::max(name_width, utf8::Length(name));
  }
  std::ostringstream os;
  os << std::setw(4) << std::left << "#" << PadRight("Source", name_width)
     << "  " << std::setw(16) << std::right << "Total Documents"
     << "  " << std::setw(22) << "Total True Sentences" << '\n';
  int row = 1;
  for (const auto &[name, c] : stats.per_source) {
    os << std::setw(4) << std::left << row++ << PadRight(name, name_width)
       << "  " << std::setw(16) << std::right << Thousands(c.documents)
       << "  " << std::setw(22) << Thousands(c.sentences) << '\n';
  }
  os << std::setw(4) << std::left << "" << PadRight("Total", name_width)
     << "  " << std::setw(16) << std::right << Thousands(stats.totals.documents)
     << "  " << std::setw(22) << Thousands(stats.totals.sentences) << '\n';
  return os.str();
}

void WriteStatsRecords(const CorpusStats &stats, const std::string &path) {
  LineRecordWriter out(path);
  for (const auto &[name, c] : stats.per_source) {
    out.Write(Json{{"source", name},
                   {"documents", c.documents},
                   {"sentences", c.sentences}});
  }
  out.Write(Json{{"total", true},
                 {"documents", stats.totals.documents},
                 {"sentences", stats.totals.sentences}});
  out.Close();
}

}  // namespace persianlm
