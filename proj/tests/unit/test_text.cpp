#include "doctest.h"

#include "medie/random.hpp"
#include "medie/text.hpp"

using namespace medie;

TEST_SUITE("text") {

TEST_CASE("utf8 decode and encode are inverse on CJK text") {
  const std::string s = "患者右侧胸痛，CT示：6.6*10^9/L";
  const auto chars = utf8_decode(s);
  CHECK(chars.size() == 21);
  CHECK(chars[2] == U'右');
  CHECK(utf8_encode(chars) == s);
}

TEST_CASE("malformed utf8 is rejected") {
  CHECK_THROWS_AS(utf8_decode("\xE5\x8F"), Utf8Error);
  CHECK_THROWS_AS(utf8_decode("\xFF"), Utf8Error);
  CHECK_THROWS_AS(utf8_decode("\xC0\x80"), Utf8Error);  // overlong
}

TEST_CASE("character classes") {
  CHECK(char_class(U'7') == CharClass::Digit);
  CHECK(char_class(U'x') == CharClass::Latin);
  CHECK(char_class(U'，') == CharClass::Punct);
  CHECK(char_class(U'.') == CharClass::Punct);
  CHECK(char_class(U'胸') == CharClass::Cjk);
  CHECK(char_class(U' ') == CharClass::Space);
}

TEST_CASE("sentences split after delimiters and newlines") {
  const std::u32string t = U"胸痛。无发热！\n咳嗽";
  const auto segs = segment_sentences(t);
  REQUIRE(segs.size() == 4);
  CHECK(segs[0] == Segment{0, 3});
  CHECK(segs[1] == Segment{3, 7});
  CHECK(segs[2] == Segment{7, 8});
  CHECK(segs[3] == Segment{8, 10});
}

TEST_CASE("long segments are hard-wrapped") {
  const std::u32string t(600, U'痛');
  const auto segs = segment_sentences(t, 256);
  REQUIRE(segs.size() == 3);
  CHECK(segs[0] == Segment{0, 256});
  CHECK(segs[2] == Segment{512, 600});
}

TEST_CASE("no_break_before keeps spans whole") {
  const std::u32string t = U"甲乙。丙丁";
  std::vector<bool> keep(t.size(), false);
  keep[3] = true;  // pretend an entity covers 2..4
  const auto segs = segment_sentences(t, 256, &keep);
  REQUIRE(segs.size() == 1);
  CHECK(segs[0] == Segment{0, 5});
}

TEST_CASE("segments tile the text") {
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    std::u32string t;
    for (std::size_t i = 0, n = rng.below(400); i < n; ++i) t.push_back(rng.bernoulli(0.05) ? U'。' : U'字');
    const auto segs = segment_sentences(t, 1 + rng.below(60));
    std::size_t pos = 0;
    for (const auto& s : segs) {
      CHECK(s.start == pos);
      CHECK(s.end > s.start);
      pos = s.end;
    }
    CHECK(pos == t.size());
  }
}

TEST_CASE("derived seeds are stable and distinct") {
  CHECK(derive_seed(1, "doc-1") == derive_seed(1, "doc-1"));
  CHECK(derive_seed(1, "doc-1") != derive_seed(1, "doc-2"));
  CHECK(derive_seed(1, 7) != derive_seed(2, 7));
  Rng a(3), b(3);
  for (int i = 0; i < 10; ++i) CHECK(a.below(100) == b.below(100));
}

}
