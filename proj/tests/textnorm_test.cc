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

#include "persianlm/textnorm.h"

#include <set>

#include <gtest/gtest.h>

#include "persianlm/errors.h"
#include "persianlm/random.h"
#include "persianlm/utf8.h"
#include "test_util.h"

namespace persianlm {
namespace {

const NormalizationRules &Rules() { return DefaultNormalizationRules(); }

TEST(CleanJunkTest, RemovesTags) {
  EXPECT_EQ(CleanJunk("<b>سلام</b>", Rules()), "سلام");
}

TEST(CleanJunkTest, RemovesUrlsBeforeWhitespaceCollapse) {
  EXPECT_EQ(CleanJunk("see https://x.y now", Rules()), "see  now");
  EXPECT_EQ(Normalize("see https://x.y now"), "see now");
}

TEST(CleanJunkTest, IdentityOnCleanInput) {
  EXPECT_EQ(CleanJunk("abc", Rules()), "abc");
}

TEST(CleanJunkTest, EmailsControlsEmojiAndZeroWidth) {
  EXPECT_EQ(Normalize("mail a.b@c.org now"), "mail now");
  EXPECT_EQ(CleanJunk("a\x01" "b\x7f", Rules()), "ab");
  EXPECT_EQ(CleanJunk("خوب\U0001F600", Rules()), "خوب");
  // ZWJ is junk, ZWNJ is kept inside words.
  EXPECT_EQ(CleanJunk("می‍روم", Rules()), "میروم");
  EXPECT_EQ(CleanJunk("می‌روم", Rules()), "می‌روم");
}

TEST(StandardizeCharsTest, ArabicYehAndKaf) {
  EXPECT_EQ(StandardizeChars("علي", Rules()), "علی");
  EXPECT_EQ(StandardizeChars("كتاب", Rules()), "کتاب");
}

TEST(StandardizeCharsTest, DigitsFoldToOneFamily) {
  EXPECT_EQ(StandardizeChars("١٢٣", Rules()), "۱۲۳");
  EXPECT_EQ(StandardizeChars("123", Rules()), "۱۲۳");
}

TEST(StandardizeCharsTest, WhitespaceCollapseAndTrim) {
  EXPECT_EQ(StandardizeChars("a  b\t c", Rules()), "a b c");
  EXPECT_EQ(StandardizeChars("  a \n b  ", Rules()), "a b");
}

TEST(StandardizeCharsTest, DiacriticsAndZwnjTidying) {
  EXPECT_EQ(StandardizeChars("كَتَبَ", Rules()), "کتب");
  EXPECT_EQ(StandardizeChars("می‌‌روم", Rules()), "می‌روم");
  EXPECT_EQ(StandardizeChars("می‌ روم", Rules()), "می روم");
}

TEST(NormalizeTest, FixedExamples) {
  EXPECT_EQ(Normalize(""), "");
  EXPECT_EQ(Normalize("<i>علي</i>"), "علی");
}

TEST(NormalizationRulesTest, CharMapIsIdempotent) {
  for (const auto &[from, to] : Rules().char_map) {
    for (char32_t cp : to) {
      EXPECT_FALSE(Rules().IsMapped(cp))
          << "target of U+" << std::hex << static_cast<uint32_t>(from)
          << " is itself mapped";
    }
  }
}

TEST(NormalizationRulesTest, NonIdempotentMapIsRejected) {
  NormalizationRules rules;
  rules.char_map[U'a'] = U"b";
  rules.char_map[U'b'] = U"c";
  EXPECT_THROW(rules.Finalize(), ConfigError);
}

TEST(NormalizationRulesTest, DumpLoadRoundTrip) {
  test::TempDir dir;
  const std::string dumped = DumpNormalizationRules(Rules());
  test::WriteFile(dir.Path("rules.jsonl"), dumped);
  const NormalizationRules loaded = LoadNormalizationRules(dir.Path("rules.jsonl"));
  EXPECT_EQ(DumpNormalizationRules(loaded), dumped);
  for (const char *s : {"<p>كتاب ١٢٣</p> https://a.b", "علي  ‌ x"}) {
    EXPECT_EQ(Normalize(s, loaded), Normalize(s));
  }
}

TEST(NormalizationRulesTest, BadRulesFileIsRejected) {
  test::TempDir dir;
  test::WriteFile(dir.Path("bad.jsonl"),
                  "{\"kind\":\"no-such-kind\",\"pattern\":\"x\",\"replacement\":\"\"}\n");
  EXPECT_THROW(LoadNormalizationRules(dir.Path("bad.jsonl")), Error);
}

// Strings mixing every class the rules act on.
std::string RandomMessyString(Rng *rng) {
  static const std::vector<std::u32string> kPieces = {
      U"سلام", U"كتاب", U"علي", U"ی", U"ك", U"ي", U"ة", U"ۀ", U"أ", U"إ",
      U"ﻻ", U"ﺎ", U"ﯼ", U"ﻯ", U"ﮏ", U"ﺑ",
      U"١٢٣", U"۴۵۶", U"789", U"ً", U"َ", U"ِ", U"ْ",
      U"ٰ", U"‌", U"‍", U"​", U"⁠", U"﻿",
      U"\x01", U"\x1b", U"\x7f", U"\u0085", U"\U0001F600", U"❤",
      U"\U0001F44D", U"<b>", U"</div>", U"<a href=\"x\">", U"http://a.b/c",
      U"www.x.ir", U"u@v.com", U" ", U"  ", U"\t", U"\n", U"\r", U" ",
      U" ", U".", U"؟", U"!", U"،", U"«", U"»", U"abc", U"Z", U"-",
      U"<", U">", U"@", U"/", U":"};
  std::u32string out;
  const size_t n = 1 + rng->Below(12);
  for (size_t i = 0; i < n; ++i) {
    if (rng->Below(8) == 0) {
      out.push_back(static_cast<char32_t>(rng->Below(0x3000)));
      if (out.back() >= 0xD800 && out.back() <= 0xDFFF) out.back() = U'x';
    } else {
      out += kPieces[rng->Below(kPieces.size())];
    }
  }
  return utf8::Encode(out);
}

TEST(NormalizePropertyTest, IdempotentAndClosed) {
  const NormalizationRules &rules = Rules();
  Rng rng(2026);
  for (int i = 0; i < 3000; ++i) {
    const std::string input = RandomMessyString(&rng);
    const std::string once = Normalize(input, rules);
    ASSERT_EQ(Normalize(once, rules), once) << "input: " << input;
    std::set<char32_t> allowed;
    for (char32_t cp : utf8::Decode(input)) allowed.insert(cp);
    for (const auto &[from, to] : rules.char_map) {
      allowed.insert(to.begin(), to.end());
    }
    allowed.insert(U' ');
    for (char32_t cp : utf8::Decode(once)) {
      ASSERT_FALSE(rules.IsJunkCodepoint(cp)) << "input: " << input;
      ASSERT_FALSE(rules.IsMapped(cp)) << "input: " << input;
      ASSERT_FALSE(rules.IsStrippedMark(cp)) << "input: " << input;
      ASSERT_TRUE(allowed.count(cp)) << "introduced U+" << std::hex
                                     << static_cast<uint32_t>(cp);
    }
  }
}

}  // namespace
}  // namespace persianlm
