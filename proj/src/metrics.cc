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

#include "persianlm/metrics.h"

#include <algorithm>
#include <cstdio>
#include <set>
#include <unordered_map>

#include "persianlm/errors.h"
#include "persianlm/jsonl.h"

namespace persianlm {
namespace {

double Ratio(size_t num, size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

double Harmonic(double p, double r) {
  return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
}

void Finish(EntityScores *s) {
  s->precision = Ratio(s->tp, s->tp + s->fp);
  s->recall = Ratio(s->tp, s->tp + s->fn);
  s->f1 = Harmonic(s->precision, s->recall);
}

const char kAveragingNote[] =
    "macro and weighted F1 over the label inventory; entity scores are "
    "micro-averaged exact span matches";

std::string Fixed(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

}  // namespace

double Accuracy(const std::vector<std::string> &gold,
                const std::vector<std::string> &pred) {
  if (gold.size() != pred.size()) {
    throw DataError("accuracy: " + std::to_string(gold.size()) +
                    " gold labels but " + std::to_string(pred.size()) +
                    " predictions");
  }
  if (gold.empty()) throw DataError("accuracy: no labels");
  size_t hits = 0;
  for (size_t i = 0; i < gold.size(); ++i) hits += gold[i] == pred[i];
  return Ratio(hits, gold.size());
}

EvalReport F1Report(const std::vector<std::string> &gold,
                    const std::vector<std::string> &pred,
                    const std::vector<std::string> &inventory) {
  EvalReport report;
  report.accuracy = Accuracy(gold, pred);
  report.labels = inventory;
  report.per_class.resize(inventory.size());
  std::unordered_map<std::string, size_t> index;
  for (size_t i = 0; i < inventory.size(); ++i) {
    if (!index.emplace(inventory[i], i).second) {
      throw ConfigError("duplicate label in inventory: " + inventory[i]);
    }
  }
  auto lookup = [&](const std::string &label) {
    auto it = index.find(label);
    if (it == index.end()) throw DataError("label not in inventory: " + label);
    return it->second;
  };
  for (size_t i = 0; i < gold.size(); ++i) {
    const size_t g = lookup(gold[i]);
    const size_t p = lookup(pred[i]);
    ++report.per_class[g].support;
    if (g == p) {
      ++report.per_class[g].tp;
    } else {
      ++report.per_class[g].fn;
      ++report.per_class[p].fp;
    }
  }
  double macro = 0.0, weighted = 0.0;
  size_t total_support = 0;
  for (auto &c : report.per_class) {
    c.precision = Ratio(c.tp, c.tp + c.fp);
    c.recall = Ratio(c.tp, c.tp + c.fn);
    c.f1 = Harmonic(c.precision, c.recall);
    macro += c.f1;
    weighted += c.f1 * static_cast<double>(c.support);
    total_support += c.support;
  }
  report.macro_f1 = inventory.empty() ? 0.0 : macro / inventory.size();
  report.weighted_f1 =
      total_support == 0 ? 0.0 : weighted / static_cast<double>(total_support);
  return report;
}

IobTag ParseIobTag(std::string_view tag) {
  if (tag == "O") return {'O', ""};
  if (tag.size() >= 3 && (tag[0] == 'B' || tag[0] == 'I') &&
      (tag[1] == '-' || tag[1] == '_')) {
    return {tag[0], std::string(tag.substr(2))};
  }
  throw DataError("malformed IOB tag '" + std::string(tag) + "'");
}

std::vector<EntitySpan> ExtractEntities(const std::vector<std::string> &tags,
                                        bool strict) {
  std::vector<EntitySpan> spans;
  bool open = false;
  for (size_t i = 0; i < tags.size(); ++i) {
    const IobTag t = ParseIobTag(tags[i]);
    if (t.prefix == 'I' && open && spans.back().category == t.category) {
      spans.back().end = i;
      continue;
    }
    open = false;
    if (t.prefix == 'O') continue;
    if (t.prefix == 'I' && strict) {
      throw DataError("tag " + tags[i] + " at position " + std::to_string(i) +
                      " does not continue an entity");
    }
    spans.push_back({t.category, i, i});
    open = true;
  }
  return spans;
}

EntityReport EntityF1(const std::vector<std::vector<std::string>> &gold,
                      const std::vector<std::vector<std::string>> &pred,
                      bool strict) {
  if (gold.size() != pred.size()) {
    throw DataError("entity F1: " + std::to_string(gold.size()) +
                    " gold sequences but " + std::to_string(pred.size()) +
                    " predicted");
  }
  EntityReport report;
  for (size_t item = 0; item < gold.size(); ++item) {
    if (gold[item].size() != pred[item].size()) {
      throw DataError("entity F1: item " + std::to_string(item) + " has " +
                      std::to_string(gold[item].size()) + " gold tags but " +
                      std::to_string(pred[item].size()) + " predicted");
    }
    const auto g = ExtractEntities(gold[item], strict);
    const auto p = ExtractEntities(pred[item], strict);
    const std::set<EntitySpan> gs(g.begin(), g.end());
    const std::set<EntitySpan> ps(p.begin(), p.end());
    for (const auto &span : gs) {
      EntityScores &cat = report.per_category[span.category];
      if (ps.count(span)) {
        ++report.overall.tp;
        ++cat.tp;
      } else {
        ++report.overall.fn;
        ++cat.fn;
      }
    }
    for (const auto &span : ps) {
      if (!gs.count(span)) {
        ++report.overall.fp;
        ++report.per_category[span.category].fp;
      }
    }
  }
  for (auto &[name, s] : report.per_category) Finish(&s);
  EntityScores &o = report.overall;
  if (o.tp + o.fp + o.fn == 0) {
    o.precision = o.recall = o.f1 = 1.0;
  } else {
    Finish(&o);
  }
  return report;
}

std::string FormatEvalReport(const EvalReport &report) {
  size_t width = 5;
  for (const auto &l : report.labels) width = std::max(width, l.size());
  auto pad = [&](const std::string &s) {
    return s + std::string(width + 2 - std::min(width, s.size()), ' ');
  };
  std::string out = pad("class") + "precision  recall     f1         support\n";
  for (size_t i = 0; i < report.labels.size(); ++i) {
    const ClassScores &c = report.per_class[i];
    char line[128];
    std::snprintf(line, sizeof(line), "%-11s%-11s%-11s%zu\n",
                  Fixed(c.precision).c_str(), Fixed(c.recall).c_str(),
                  Fixed(c.f1).c_str(), c.support);
    out += pad(report.labels[i]) + line;
  }
  out += "accuracy     " + Fixed(report.accuracy) + "\n";
  out += "macro F1     " + Fixed(report.macro_f1) + "\n";
  out += "weighted F1  " + Fixed(report.weighted_f1) + "\n";
  out += std::string("averaging: ") + kAveragingNote + "\n";
  return out;
}

std::string FormatEntityReport(const EntityReport &report) {
  std::string out = "category    precision  recall     f1         tp/fp/fn\n";
  auto row = [&](const std::string &name, const EntityScores &s) {
    char line[160];
    std::snprintf(line, sizeof(line), "%-12s%-11s%-11s%-11s%zu/%zu/%zu\n",
                  name.c_str(), Fixed(s.precision).c_str(),
                  Fixed(s.recall).c_str(), Fixed(s.f1).c_str(), s.tp, s.fp,
                  s.fn);
    out += line;
  };
  for (const auto &[name, s] : report.per_category) row(name, s);
  row("overall", report.overall);
  out += std::string("averaging: ") + kAveragingNote + "\n";
  return out;
}

void WriteEvalReport(const EvalReport &report, const std::string &path) {
  LineRecordWriter out(path);
  for (size_t i = 0; i < report.labels.size(); ++i) {
    const ClassScores &c = report.per_class[i];
    Json rec;
    rec["class"] = report.labels[i];
    rec["precision"] = c.precision;
    rec["recall"] = c.recall;
    rec["f1"] = c.f1;
    rec["support"] = c.support;
    out.Write(rec);
  }
  Json summary;
  summary["accuracy"] = report.accuracy;
  summary["macro_f1"] = report.macro_f1;
  summary["weighted_f1"] = report.weighted_f1;
  summary["averaging"] = kAveragingNote;
  out.Write(summary);
  out.Close();
}

void WriteEntityReport(const EntityReport &report, const std::string &path) {
  LineRecordWriter out(path);
  auto record = [](const EntityScores &s) {
    Json rec;
    rec["precision"] = s.precision;
    rec["recall"] = s.recall;
    rec["f1"] = s.f1;
    rec["tp"] = s.tp;
    rec["fp"] = s.fp;
    rec["fn"] = s.fn;
    return rec;
  };
  for (const auto &[name, s] : report.per_category) {
    Json rec;
    rec["category"] = name;
    rec.update(record(s));
    out.Write(rec);
  }
  Json overall;
  overall["category"] = "overall";
  overall.update(record(report.overall));
  overall["averaging"] = kAveragingNote;
  out.Write(overall);
  out.Close();
}

}  // namespace persianlm
