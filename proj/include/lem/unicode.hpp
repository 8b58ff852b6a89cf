#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace lem::unicode {

struct CodePoint {
  char32_t value;
  std::size_t offset;  // byte offset of the first code unit
  std::size_t length;  // byte length of the encoding
};

// Lenient decoder: each invalid byte becomes one U+FFFD of length 1.
std::vector<CodePoint> decode(std::string_view text);

// Byte length of the code point starting at text[offset].
std::size_t sequence_length(std::string_view text, std::size_t offset);

bool is_letter(char32_t c);
bool is_mark(char32_t c);
bool is_whitespace(char32_t c);

std::string case_fold(std::string_view text);

// Trims Unicode whitespace at both ends.
std::string_view trim(std::string_view text);

// Splits on runs of Unicode whitespace; no empty pieces.
std::vector<std::string_view> split_words(std::string_view text);

}  // namespace lem::unicode
