#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ctrlroom::nlu::detail {

struct Token {
    std::string text;  // lower-cased
    std::size_t start = 0;
    std::size_t end = 0;
};

/// Words are maximal runs of ASCII letters, digits and apostrophes; a decimal
/// point between digits stays inside the token.
std::vector<Token> tokenize(std::string_view text);

std::string stem(std::string_view word);

std::optional<int> parse_small_int(std::string_view token);

}  // namespace ctrlroom::nlu::detail
