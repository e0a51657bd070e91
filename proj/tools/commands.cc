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

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "cli.h"
#include "manifest.h"
#include "persianlm/checkpoint.h"
#include "persianlm/corpus.h"
#include "persianlm/errors.h"
#include "persianlm/finetune.h"
#include "persianlm/jsonl.h"
#include "persianlm/metrics.h"
#include "persianlm/pretrain_data.h"
#include "persianlm/pretrainer.h"
#include "persianlm/segmenter.h"
#include "persianlm/synthetic.h"
#include "persianlm/textnorm.h"
#include "persianlm/wordpiece.h"

namespace persianlm {
namespace cli {
namespace {

using Action = std::function<void()>;

// Carries a nested run's exit status out of an action.
struct ExitStatus {
  int code;
};

std::vector<std::string> SplitList(const std::string &s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, ',');) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

void WriteText(const std::string &text, const std::string &path) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << text;
  if (!out) throw IoError("write failed: " + path);
}

// Sentence records grouped by doc_id, in order of first appearance.
std::vector<std::vector<std::string>> LoadSentenceDocuments(
    const std::string &path) {
  LineRecordReader reader(path);
  std::vector<std::vector<std::string>> docs;
  std::map<std::string, size_t> index;
  Json rec;
  while (reader.Next(&rec)) {
    const std::string where = path + ":" + std::to_string(reader.line_number());
    const std::string doc = RequireString(rec, "doc_id", where);
    auto [it, inserted] = index.emplace(doc, docs.size());
    if (inserted) docs.emplace_back();
    docs[it->second].push_back(RequireString(rec, "text", where));
  }
  return docs;
}

std::vector<std::string> LoadTextLines(const std::string &path,
                                       const std::string &format) {
  std::vector<std::string> lines;
  if (format == "plain") {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    for (std::string line; std::getline(in, line);) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      lines.push_back(line);
    }
    return lines;
  }
  if (format != "line-records" && format != "jsonl") {
    throw ConfigError("unknown format '" + format + "'");
  }
  LineRecordReader reader(path);
  Json rec;
  while (reader.Next(&rec)) {
    lines.push_back(RequireString(
        rec, "text", path + ":" + std::to_string(reader.line_number())));
  }
  return lines;
}

// ---------------------------------------------------------------- normalize

void AddNormalize(CLI::App &app, Action *action) {
  struct Opts {
    std::string in, out, format = "plain", rules;
  };
  auto o = std::make_shared<Opts>();
  CLI::App *sub = app.add_subcommand(
      "normalize", "Remove junk and standardize characters");
  sub->add_option("--in", o->in, "Input file")->required();
  sub->add_option("--out", o->out, "Output file")->required();
  sub->add_option("--format", o->format,
                  "plain (one text per line) or line-records")
      ->capture_default_str();
  sub->add_option("--rules", o->rules, "Rules file (default: built-in table)");
  sub->callback([o, action] {
    *action = [o] {
      NormalizationRules rules = o->rules.empty()
                                     ? DefaultNormalizationRules()
                                     : LoadNormalizationRules(o->rules);
      if (o->format == "plain") {
        std::string text;
        for (const auto &line : LoadTextLines(o->in, "plain")) {
          text += Normalize(line, rules) + "\n";
        }
        WriteText(text, o->out);
        return;
      }
      DocumentReader reader(o->in, ParseDocumentFormat(o->format));
      LineRecordWriter out(o->out);
      Document doc;
      while (reader.Next(&doc)) {
        Json rec;
        rec["id"] = doc.id;
        rec["source"] = doc.source;
        rec["text"] = Normalize(doc.text, rules);
        for (const auto &[k, v] : doc.meta) rec[k] = v;
        out.Write(rec);
      }
      out.Close();
    };
  });
}

// ---------------------------------------------------------------- segment

struct SegmentFlags {
  std::string mode = "true";
  std::string abbreviations;
  size_t min_tokens = 3;

  void Register(CLI::App *sub) {
    sub->add_option("--mode", mode, "true or notation")->capture_default_str();
    sub->add_option("--abbreviations", abbreviations,
                    "Abbreviation list (default: built-in lexicon)");
    sub->add_option("--min-tokens", min_tokens,
                    "Shorter fragments merge into the next one")
        ->capture_default_str();
  }

  SegmenterConfig Config() const {
    SegmenterConfig c;
    c.abbreviations = abbreviations.empty() ? DefaultAbbreviations()
                                            : LoadAbbreviations(abbreviations);
    c.min_tokens = min_tokens;
    c.adjudicator = std::make_shared<RuleBasedAdjudicator>(c.abbreviations);
    if (mode != "true" && mode != "notation") {
      throw ConfigError("unknown segmentation mode '" + mode + "'");
    }
    return c;
  }

  std::vector<Sentence> Run(const Document &doc,
                            const SegmenterConfig &c) const {
    return mode == "true" ? SegmentTrue(doc.text, c, doc.id)
                          : SegmentByNotation(doc.text, c, doc.id);
  }
};

void AddSegment(CLI::App &app, Action *action) {
  struct Opts {
    std::string in, out, format = "line-records";
    SegmentFlags seg;
  };
  auto o = std::make_shared<Opts>();
  CLI::App *sub = app.add_subcommand("segment", "Split documents into sentences");
  sub->add_option("--in", o->in, "Document file")->required();
  sub->add_option("--out", o->out, "Sentence records")->required();
  sub->add_option("--format", o->format, "plain or line-records")
      ->capture_default_str();
  o->seg.Register(sub);
  sub->callback([o, action] {
    *action = [o] {
      const SegmenterConfig config = o->seg.Config();
      DocumentReader reader(o->in, ParseDocumentFormat(o->format));
      WriteSentenceRecords({}, o->out, false);
      Document doc;
      while (reader.Next(&doc)) {
        WriteSentenceRecords(o->seg.Run(doc, config), o->out, true);
      }
    };
  });
}

// ---------------------------------------------------------------- stats

void AddStats(CLI::App &app, Action *action) {
  struct Opts {
    std::string in, out, format = "line-records";
    SegmentFlags seg;
  };
  auto o = std::make_shared<Opts>();
  CLI::App *sub = app.add_subcommand(
      "stats", "Per-source document and sentence counts");
  sub->add_option("--in", o->in, "Document file")->required();
  sub->add_option("--out", o->out, "Stats records (table goes to stdout)");
  sub->add_option("--format", o->format, "plain or line-records")
      ->capture_default_str();
  o->seg.Register(sub);
  sub->callback([o, action] {
    *action = [o] {
      const SegmenterConfig config = o->seg.Config();
      DocumentReader reader(o->in, ParseDocumentFormat(o->format));
      CorpusStatsBuilder builder;
      Document doc;
      while (reader.Next(&doc)) {
        builder.Add(doc.source, o->seg.Run(doc, config).size());
      }
      std::cout << FormatStatsTable(builder.stats());
      if (!o->out.empty()) WriteStatsRecords(builder.stats(), o->out);
    };
  });
}

// ---------------------------------------------------------------- tokenizer

void AddTrainTokenizer(CLI::App &app, Action *action) {
  struct Opts {
    std::string in, out, format = "line-records";
    TokenizerTrainConfig config;
  };
  auto o = std::make_shared<Opts>();
  CLI::App *sub = app.add_subcommand("train-tokenizer", "Train a WordPiece vocabulary");
  sub->add_option("--in", o->in, "Sentence records or plain lines")->required();
  sub->add_option("--out", o->out, "Vocabulary file")->required();
  sub->add_option("--format", o->format, "plain or line-records")
      ->capture_default_str();
  sub->add_option("--vocab-size", o->config.vocab_size)->capture_default_str();
  sub->add_option("--min-freq", o->config.min_frequency)->capture_default_str();
  sub->add_option("--alphabet", o->config.alphabet_limit,
                  "Maximum number of distinct base characters")
      ->capture_default_str();
  sub->callback([o, action] {
    *action = [o] {
      WordPieceTrainer trainer(o->config);
      for (const auto &s : LoadTextLines(o->in, o->format)) trainer.AddSentence(s);
      const WordPieceModel model = trainer.Train();
      model.Save(o->out);
      std::cerr << "vocabulary: " << model.size() << " tokens\n";
    };
  });
}

void AddEncode(CLI::App &app, Action *action) {
  struct Opts {
    std::string vocab, in, out, text, format = "plain";
  };
  auto o = std::make_shared<Opts>();
  CLI::App *sub = app.add_subcommand("encode", "Tokenize text with a vocabulary");
  sub->add_option("--vocab", o->vocab, "Vocabulary file")->required();
  auto *in = sub->add_option("--in", o->in, "Input file");
  auto *text = sub->add_option("--text", o->text, "Single text to encode");
  in->excludes(text);
  sub->add_option("--out", o->out, "Output records (default stdout)");
  sub->add_option("--format", o->format, "plain or line-records")
      ->capture_default_str();
  sub->callback([o, action] {
    *action = [o] {
      const WordPieceModel model = WordPieceModel::Load(o->vocab);
      std::vector<std::string> texts;
      if (!o->in.empty()) {
        texts = LoadTextLines(o->in, o->format);
      } else {
        texts.push_back(o->text);
      }
      std::string lines;
      for (const auto &t : texts) {
        Json rec;
        const std::vector<int32_t> ids = model.Encode(t);
        rec["text"] = t;
        rec["ids"] = ids;
        rec["pieces"] = model.EncodeToPieces(t);
        rec["decoded"] = model.Decode(ids);
        lines += ToLine(rec) + "\n";
      }
      WriteText(lines, o->out);
    };
  });
}

// ---------------------------------------------------------------- pretraining

void AddBuildPretrain(CLI::App &app, Action *action) {
  struct Opts {
    std::string in, vocab, out, dump;
    PackingConfig packing;
    MaskingPolicy policy;
    double is_next = 0.5;
  };
  auto o = std::make_shared<Opts>();
  o->packing.max_len = 128;
  CLI::App *sub = app.add_subcommand(
      "build-pretrain", "Build masked NSP pre-training examples");
  sub->add_option("--in", o->in, "Sentence records")->required();
  sub->add_option("--vocab", o->vocab, "Vocabulary file")->required();
  sub->add_option("--out", o->out, "Binary example file")->required();
  sub->add_option("--seed", o->packing.rng_seed)->required();
  sub->add_option("--max-len", o->packing.max_len)->capture_default_str();
  sub->add_option("--mask-fraction", o->policy.select_fraction)
      ->capture_default_str();
  sub->add_option("--is-next-prob", o->is_next)->capture_default_str();
  sub->add_option("--dump", o->dump, "Also write examples as line records");
  sub->callback([o, action] {
    *action = [o] {
      const WordPieceModel model = WordPieceModel::Load(o->vocab);
      const auto docs = LoadSentenceDocuments(o->in);
      ExampleFileHeader header;
      header.max_len = static_cast<uint32_t>(o->packing.max_len);
      header.vocab_size = static_cast<uint32_t>(model.size());
      const auto examples =
          BuildPretrainExamples(docs, model, o->packing, o->policy, o->is_next);
      WriteExamples(examples, header, o->out);
      if (!o->dump.empty()) DumpExamples(examples, o->dump);
      std::cerr << "examples: " << examples.size() << "\n";
    };
  });
}

struct ModelFlags {
  std::string profile = "desk";
  size_t layers = 0, heads = 0, hidden = 0, intermediate = 0, max_positions = 0;
  double dropout = -1.0;
  double init_std = -1.0;

  void Register(CLI::App *sub) {
    sub->add_option("--profile", profile,
                    "desk (hidden 64), small (hidden 128) or base (hidden 768)")
        ->capture_default_str();
    sub->add_option("--layers", layers, "Override the profile");
    sub->add_option("--heads", heads, "Override the profile");
    sub->add_option("--hidden", hidden, "Override the profile");
    sub->add_option("--intermediate", intermediate, "Override the profile");
    sub->add_option("--max-positions", max_positions, "Override the profile");
    sub->add_option("--dropout", dropout, "Override the profile");
    sub->add_option("--init-std", init_std, "Override the profile");
  }

  ModelConfig Config(size_t vocab_size) const {
    ModelConfig c;
    if (profile == "desk") {
      c = ModelConfig::DeskScale(vocab_size);
    } else if (profile == "small") {
      c = ModelConfig::SmallScale(vocab_size);
    } else if (profile == "base") {
      c.vocab_size = vocab_size;
    } else {
      throw ConfigError("unknown model profile '" + profile + "'");
    }
    if (layers) c.layers = layers;
    if (heads) c.heads = heads;
    if (hidden) c.hidden = hidden;
    if (intermediate) c.intermediate = intermediate;
    if (max_positions) c.max_positions = max_positions;
    if (dropout >= 0.0) c.dropout = dropout;
    if (init_std > 0.0) c.init_std = init_std;
    c.Validate();
    return c;
  }
};

void AddPretrain(CLI::App &app, Action *action) {
  struct Opts {
    std::string examples, vocab, out, resume, trace, dev;
    uint64_t seed = 0;
    uint64_t steps = 1000;
    OptimizerConfig opt;
    ModelFlags model;
  };
  auto o = std::make_shared<Opts>();
  CLI::App *sub = app.add_subcommand("pretrain", "Pre-train the encoder with MLM and NSP");
  sub->add_option("--examples", o->examples, "Binary example file")->required();
  sub->add_option("--vocab", o->vocab, "Vocabulary file")->required();
  sub->add_option("--out", o->out, "Checkpoint to write")->required();
  sub->add_option("--seed", o->seed)->required();
  sub->add_option("--steps", o->steps, "Total steps")->capture_default_str();
  sub->add_option("--batch-size", o->opt.batch_size)->capture_default_str();
  sub->add_option("--lr", o->opt.learning_rate)->capture_default_str();
  sub->add_option("--beta1", o->opt.beta1)->capture_default_str();
  sub->add_option("--beta2", o->opt.beta2)->capture_default_str();
  sub->add_option("--warmup", o->opt.warmup_steps, "Linear warmup steps")
      ->capture_default_str();
  sub->add_flag("--linear-decay", o->opt.linear_decay,
                "Decay the rate linearly to zero at the last step");
  sub->add_option("--resume", o->resume, "Continue from this checkpoint");
  sub->add_option("--loss-trace", o->trace, "CSV of per-step losses");
  sub->add_option("--dev-examples", o->dev, "Held-out examples to evaluate");
  o->model.Register(sub);
  sub->callback([o, action] {
    *action = [o] {
      const WordPieceModel vocab = WordPieceModel::Load(o->vocab);
      ExampleFileHeader header;
      const auto examples = ReadExamples(o->examples, &header);
      PretrainOptions options;
      options.model = o->model.Config(vocab.size());
      o->opt.max_steps = o->steps;
      options.optimizer = o->opt;
      options.seed = o->seed;
      options.steps = o->steps;
      options.vocab_fingerprint = vocab.Fingerprint();
      Checkpoint ckpt;
      if (o->resume.empty()) {
        ckpt = InitialCheckpoint(options);
      } else {
        ckpt = LoadCheckpoint(o->resume);
        if (!(ckpt.config() == options.model)) {
          throw ConfigError("resumed checkpoint has a different model config");
        }
        if (ckpt.seed != o->seed) {
          throw ConfigError("resumed checkpoint was trained with seed " +
                            std::to_string(ckpt.seed));
        }
      }
      CheckVocabulary(ckpt, vocab.size(), vocab.Fingerprint());
      std::unique_ptr<LossTraceWriter> trace;
      if (!o->trace.empty()) {
        trace = std::make_unique<LossTraceWriter>(o->trace, !o->resume.empty());
        options.on_step = [&trace](const StepLoss &l) { trace->Write(l); };
      }
      Pretrain(examples, header, options, &ckpt);
      trace.reset();
      SaveCheckpoint(ckpt, o->out);
      if (!o->dev.empty()) {
        const PretrainEval eval =
            EvaluatePretraining(ckpt.params, ReadExamples(o->dev));
        std::printf("dev mlm_loss %.4f mlm_accuracy %.4f nsp_accuracy %.4f\n",
                    eval.mlm_loss, eval.mlm_accuracy, eval.nsp_accuracy);
      }
    };
  });
}

// ---------------------------------------------------------------- fine-tuning

struct FinetuneFlags {
  std::string checkpoint, vocab, train, dev, out, labels, trace;
  FinetuneConfig config;

  void Register(CLI::App *sub, size_t default_epochs) {
    config.epochs = default_epochs;
    sub->add_option("--checkpoint", checkpoint, "Pre-trained checkpoint")->required();
    sub->add_option("--vocab", vocab, "Vocabulary file")->required();
    sub->add_option("--train", train, "Training data")->required();
    sub->add_option("--dev", dev, "Development data")->required();
    sub->add_option("--out", out, "Task checkpoint to write")->required();
    sub->add_option("--seed", config.seed)->required();
    sub->add_option("--epochs", config.epochs)->capture_default_str();
    sub->add_option("--lr", config.learning_rate)->capture_default_str();
    sub->add_option("--batch-size", config.batch_size)->capture_default_str();
    sub->add_option("--max-len", config.max_len)->capture_default_str();
    sub->add_option("--labels", labels,
                    "Comma-separated label inventory (default: from training data)");
    sub->add_option("--trace", trace, "Per-epoch line records");
  }

  void Finish(const FinetuneResult &result) const {
    SaveCheckpoint(result.checkpoint, out);
    std::unique_ptr<LineRecordWriter> writer;
    if (!trace.empty()) writer = std::make_unique<LineRecordWriter>(trace);
    for (const auto &e : result.epochs) {
      std::printf("epoch %zu train_loss %.4f dev %.4f\n", e.epoch, e.train_loss,
                  e.dev_score);
      if (writer) {
        Json rec;
        rec["epoch"] = e.epoch;
        rec["train_loss"] = e.train_loss;
        rec["dev_score"] = e.dev_score;
        writer->Write(rec);
      }
    }
    if (writer) writer->Close();
  }
};

void AddFinetuneCls(CLI::App &app, Action *action) {
  auto o = std::make_shared<FinetuneFlags>();
  CLI::App *sub = app.add_subcommand("finetune-cls", "Fine-tune a sequence classifier");
  o->Register(sub, 5);
  sub->callback([o, action] {
    *action = [o] {
      const WordPieceModel vocab = WordPieceModel::Load(o->vocab);
      const auto train = LoadClassificationData(o->train);
      const auto dev = LoadClassificationData(o->dev);
      FinetuneConfig config = o->config;
      config.label_inventory =
          o->labels.empty() ? InferLabelInventory(train) : SplitList(o->labels);
      o->Finish(FinetuneSequence(LoadCheckpoint(o->checkpoint), vocab, train,
                                 dev, config));
    };
  });
}

void AddFinetuneNer(CLI::App &app, Action *action) {
  auto o = std::make_shared<FinetuneFlags>();
  CLI::App *sub = app.add_subcommand("finetune-ner", "Fine-tune an IOB token tagger");
  o->Register(sub, 10);
  sub->callback([o, action] {
    *action = [o] {
      const WordPieceModel vocab = WordPieceModel::Load(o->vocab);
      const auto train = LoadConllData(o->train);
      const auto dev = LoadConllData(o->dev);
      FinetuneConfig config = o->config;
      config.label_inventory =
          o->labels.empty() ? InferTagInventory(train) : SplitList(o->labels);
      o->Finish(FinetuneTokens(LoadCheckpoint(o->checkpoint), vocab, train,
                               dev, config));
    };
  });
}

void AddEvalCls(CLI::App &app, Action *action) {
  struct Opts {
    std::string checkpoint, vocab, in, out, predictions;
    size_t max_len = 128;
  };
  auto o = std::make_shared<Opts>();
  CLI::App *sub = app.add_subcommand("eval-cls", "Score a classifier");
  sub->add_option("--checkpoint", o->checkpoint, "Classifier checkpoint")->required();
  sub->add_option("--vocab", o->vocab, "Vocabulary file")->required();
  sub->add_option("--in", o->in, "{text, label} records")->required();
  sub->add_option("--out", o->out, "Report records (table goes to stdout)");
  sub->add_option("--predictions", o->predictions, "Predicted-label records");
  sub->add_option("--max-len", o->max_len)->capture_default_str();
  sub->callback([o, action] {
    *action = [o] {
      const Checkpoint ckpt = LoadCheckpoint(o->checkpoint);
      const WordPieceModel vocab = WordPieceModel::Load(o->vocab);
      const auto data = LoadClassificationData(o->in);
      std::vector<std::string> texts, gold;
      for (const auto &d : data) {
        texts.push_back(d.text);
        gold.push_back(d.label);
      }
      const auto pred = PredictLabels(ckpt, vocab, texts, o->max_len);
      const EvalReport report = F1Report(gold, pred, ckpt.labels);
      std::cout << FormatEvalReport(report);
      if (!o->out.empty()) WriteEvalReport(report, o->out);
      if (!o->predictions.empty()) {
        std::vector<LabeledText> out;
        for (size_t i = 0; i < texts.size(); ++i) out.push_back({texts[i], pred[i]});
        WriteClassificationData(out, o->predictions);
      }
    };
  });
}

void AddEvalNer(CLI::App &app, Action *action) {
  struct Opts {
    std::string checkpoint, vocab, in, out, predictions;
    size_t max_len = 128;
    bool strict = false;
  };
  auto o = std::make_shared<Opts>();
  CLI::App *sub = app.add_subcommand("eval-ner", "Score a tagger with entity-level F1");
  sub->add_option("--checkpoint", o->checkpoint, "Tagger checkpoint")->required();
  sub->add_option("--vocab", o->vocab, "Vocabulary file")->required();
  sub->add_option("--in", o->in, "CoNLL file")->required();
  sub->add_option("--out", o->out, "Report records (table goes to stdout)");
  sub->add_option("--predictions", o->predictions, "Predicted CoNLL file");
  sub->add_option("--max-len", o->max_len)->capture_default_str();
  sub->add_flag("--strict", o->strict, "Reject I- tags that do not continue an entity");
  sub->callback([o, action] {
    *action = [o] {
      const Checkpoint ckpt = LoadCheckpoint(o->checkpoint);
      const WordPieceModel vocab = WordPieceModel::Load(o->vocab);
      const auto data = LoadConllData(o->in);
      std::vector<std::vector<std::string>> words, gold;
      for (const auto &d : data) {
        words.push_back(d.tokens);
        gold.push_back(d.tags);
      }
      const auto pred = PredictTags(ckpt, vocab, words, o->max_len);
      const EntityReport report = EntityF1(gold, pred, o->strict);
      std::cout << FormatEntityReport(report);
      if (!o->out.empty()) WriteEntityReport(report, o->out);
      if (!o->predictions.empty()) {
        std::vector<TaggedSequence> out;
        for (size_t i = 0; i < words.size(); ++i) out.push_back({words[i], pred[i]});
        WriteConllData(out, o->predictions);
      }
    };
  });
}

// ---------------------------------------------------------------- synthetic

void AddGenSynthetic(CLI::App &app, Action *action) {
  struct Opts {
    std::string task, out, gold;
    uint64_t seed = 0, lexicon_seed = 0;
    MlmCorpusOptions mlm;
    size_t items = 250, classes = 2;
    double ner_entity_rate = NerOptions{}.entity_rate;
  };
  auto o = std::make_shared<Opts>();
  CLI::App *sub = app.add_subcommand("gen-synthetic", "Generate a seeded synthetic dataset");
  sub->add_option("--task", o->task, "mlm-corpus, cls or ner")
      ->required()
      ->check(CLI::IsMember({"mlm-corpus", "cls", "ner"}));
  sub->add_option("--seed", o->seed)->required();
  sub->add_option("--lexicon-seed", o->lexicon_seed,
                  "Seed of the shared artificial vocabulary")
      ->capture_default_str();
  sub->add_option("--out", o->out, "Dataset file")->required();
  sub->add_option("--gold", o->gold, "mlm-corpus: gold sentence records");
  sub->add_option("--documents", o->mlm.documents)->capture_default_str();
  sub->add_option("--min-sentences", o->mlm.min_sentences)->capture_default_str();
  sub->add_option("--max-sentences", o->mlm.max_sentences)->capture_default_str();
  sub->add_option("--abbreviation-rate", o->mlm.abbreviation_rate)
      ->capture_default_str();
  sub->add_option("--decimal-rate", o->mlm.decimal_rate)->capture_default_str();
  sub->add_option("--marker-rate", o->mlm.marker_rate)->capture_default_str();
  sub->add_option("--items", o->items, "cls/ner: number of records")
      ->capture_default_str();
  sub->add_option("--classes", o->classes, "cls: number of classes")
      ->capture_default_str();
  sub->add_option("--entity-rate", o->ner_entity_rate, "ner: entity rate per slot")
      ->capture_default_str();
  sub->callback([o, action] {
    *action = [o] {
      if (o->task == "mlm-corpus") {
        o->mlm.seed = o->seed;
        o->mlm.lexicon_seed = o->lexicon_seed;
        const SyntheticCorpus corpus = GenerateMlmCorpus(o->mlm);
        WriteCorpus(corpus, o->out);
        if (!o->gold.empty()) WriteGoldSentences(corpus, o->gold);
      } else if (o->task == "cls") {
        ClassificationOptions c;
        c.seed = o->seed;
        c.lexicon_seed = o->lexicon_seed;
        c.items = o->items;
        c.classes = o->classes;
        WriteClassificationData(GenerateClassification(c), o->out);
      } else {
        NerOptions n;
        n.seed = o->seed;
        n.lexicon_seed = o->lexicon_seed;
        n.items = o->items;
        n.entity_rate = o->ner_entity_rate;
        WriteConllData(GenerateNer(n), o->out);
      }
    };
  });
}

void AddDumpRules(CLI::App &app, Action *action) {
  struct Opts {
    std::string rules, out;
  };
  auto o = std::make_shared<Opts>();
  CLI::App *sub = app.add_subcommand("dump-rules", "Print the normalization rule table");
  sub->add_option("--rules", o->rules, "Rules file (default: built-in table)");
  sub->add_option("--out", o->out, "Output file (default stdout)");
  sub->callback([o, action] {
    *action = [o] {
      const NormalizationRules rules = o->rules.empty()
                                           ? DefaultNormalizationRules()
                                           : LoadNormalizationRules(o->rules);
      WriteText(DumpNormalizationRules(rules), o->out);
    };
  });
}

void AddRunManifest(CLI::App &app, Action *action) {
  struct Opts {
    std::string manifest;
    std::vector<std::string> sets;
  };
  auto o = std::make_shared<Opts>();
  CLI::App *sub = app.add_subcommand("run-manifest", "Run every step of a pipeline manifest");
  sub->add_option("--manifest", o->manifest, "Manifest file")->required();
  sub->add_option("--set", o->sets, "Override a manifest variable (name=value)");
  sub->callback([o, action] {
    *action = [o] {
      std::map<std::string, std::string> overrides;
      for (const auto &s : o->sets) {
        const size_t eq = s.find('=');
        if (eq == std::string::npos || eq == 0) {
          throw ConfigError("--set expects name=value, got '" + s + "'");
        }
        overrides[s.substr(0, eq)] = s.substr(eq + 1);
      }
      const int status = RunManifest(o->manifest, overrides);
      if (status != kOk) throw ExitStatus{status};
    };
  });
}

}  // namespace

int RunCli(const std::vector<std::string> &args) {
  CLI::App app{"Persian BERT-style pipeline: normalization, segmentation, "
               "WordPiece, pre-training and fine-tuning",
               "persianlm"};
  app.require_subcommand(1);
  app.fallthrough(false);
  Action action;
  AddNormalize(app, &action);
  AddSegment(app, &action);
  AddStats(app, &action);
  AddTrainTokenizer(app, &action);
  AddEncode(app, &action);
  AddBuildPretrain(app, &action);
  AddPretrain(app, &action);
  AddFinetuneCls(app, &action);
  AddFinetuneNer(app, &action);
  AddEvalCls(app, &action);
  AddEvalNer(app, &action);
  AddGenSynthetic(app, &action);
  AddDumpRules(app, &action);
  AddRunManifest(app, &action);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp &) {
    std::cout << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp &) {
    std::cout << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError &e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return kUsage;
  }
  try {
    if (action) action();
  } catch (const ExitStatus &s) {
    return s.code;
  } catch (const ConfigError &e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const Error &e) {
    std::cerr << "error: " << e.what() << "\n";
    return kData;
  } catch (const std::filesystem::filesystem_error &e) {
    std::cerr << "error: " << e.what() << "\n";
    return kData;
  }
  return kOk;
}

}  // namespace cli
}  // namespace persianlm
