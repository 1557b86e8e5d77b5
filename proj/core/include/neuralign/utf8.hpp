#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace neuralign {

// Splits a UTF-8 string into code points, each returned as its byte sequence.
// Invalid bytes are returned as single-byte units.
std::vector<std::string> utf8_chars(std::string_view text);

// Splits on ASCII whitespace.
std::vector<std::string> split_whitespace(std::string_view line);

}  // namespace neuralign
