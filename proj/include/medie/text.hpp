#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace medie {

class Utf8Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Throws Utf8Error on malformed input. Offsets everywhere in this library
// index the decoded code points, never bytes.
std::u32string utf8_decode(std::string_view bytes);
std::string utf8_encode(std::u32string_view chars);
std::string utf8_encode(char32_t c);

enum class CharClass : std::uint8_t { Other, Digit, Latin, Punct, Cjk, Space };

CharClass char_class(char32_t c);

// [start, end) in code points.
struct Segment {
  std::size_t start = 0;
  std::size_t end = 0;
  bool operator==(const Segment&) const = default;
};

// Splits at 。！？； and newlines (the delimiter stays with the segment it
// closes) and hard-wraps anything longer than max_len. Positions listed in
// `no_break_before` are never used as a segment start; callers pass interior
// entity positions so no gold span is cut.
std::vector<Segment> segment_sentences(std::u32string_view text, std::size_t max_len = 256,
                                       const std::vector<bool>* no_break_before = nullptr);

std::vector<std::string> split(std::string_view s, char sep);
std::string_view trim(std::string_view s);

}  // namespace medie
