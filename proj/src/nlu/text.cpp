#include "text.hpp"

#include <cctype>
#include <charconv>

namespace ctrlroom::nlu::detail {

namespace {

bool is_word_char(char c) {
    const auto u = static_cast<unsigned char>(c);
    return std::isalnum(u) != 0 || c == '\'';
}

bool ends_with(std::string_view s, std::string_view suffix) {
    return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

bool is_vowel(char c) { return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u'; }

}  // namespace

std::vector<Token> tokenize(std::string_view text) {
    std::vector<Token> tokens;
    std::size_t i = 0;
    while (i < text.size()) {
        if (!is_word_char(text[i])) {
            ++i;
            continue;
        }
        const std::size_t start = i;
        while (i < text.size()) {
            if (is_word_char(text[i])) {
                ++i;
            } else if (text[i] == '.' && i > start && i + 1 < text.size() &&
                       std::isdigit(static_cast<unsigned char>(text[i - 1])) &&
                       std::isdigit(static_cast<unsigned char>(text[i + 1]))) {
                ++i;
            } else {
                break;
            }
        }
        Token t;
        t.start = start;
        t.end = i;
        t.text.reserve(i - start);
        for (std::size_t k = start; k < i; ++k) {
            t.text.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(text[k]))));
        }
        // Trailing apostrophes ("speakers'") carry nothing.
        while (!t.text.empty() && t.text.back() == '\'') {
            t.text.pop_back();
            --t.end;
        }
        if (!t.text.empty()) tokens.push_back(std::move(t));
    }
    return tokens;
}

// A deliberately small suffix stripper: enough to merge "zooming", "zoomed"
// and "zoom", or "monitors" and "monitor".
std::string stem(std::string_view word) {
    std::string w(word);
    if (w.size() > 3 && ends_with(w, "'s")) w.resize(w.size() - 2);
    bool stripped = false;
    if (w.size() > 5 && ends_with(w, "ing")) {
        w.resize(w.size() - 3);
        stripped = true;
    } else if (w.size() > 4 && ends_with(w, "ed")) {
        w.resize(w.size() - 2);
        stripped = true;
    } else if (w.size() > 4 && ends_with(w, "s") && !ends_with(w, "ss")) {
        w.resize(w.size() - 1);
    }
    if (stripped && w.size() > 2 && w[w.size() - 1] == w[w.size() - 2] && !is_vowel(w.back()) &&
        w.back() != 'l' && w.back() != 's') {
        w.pop_back();
    }
    if (w.size() > 3 && w.back() == 'e') w.pop_back();
    return w;
}

std::optional<int> parse_small_int(std::string_view token) {
    if (token.empty() || token.size() > 4) return std::nullopt;
    int value = 0;
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc{} || ptr != token.data() + token.size()) return std::nullopt;
    return value;
}

}  // namespace ctrlroom::nlu::detail
