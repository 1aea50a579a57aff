#include "semdrift/preprocess.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace semdrift::preprocess {

namespace {

// --- UTF-8 tokenizer -------------------------------------------------------

// Decodes one codepoint starting at i; advances i. Invalid bytes decode as
// U+FFFD and advance one byte.
std::uint32_t decode_utf8(std::string_view s, std::size_t& i) {
    const auto byte = [&](std::size_t k) { return static_cast<unsigned char>(s[k]); };
    const unsigned char b0 = byte(i);
    if (b0 < 0x80) { ++i; return b0; }
    auto cont = [&](std::size_t k) { return k < s.size() && (byte(k) & 0xC0) == 0x80; };
    if ((b0 & 0xE0) == 0xC0 && cont(i + 1)) {
        const std::uint32_t cp = ((b0 & 0x1Fu) << 6) | (byte(i + 1) & 0x3Fu);
        i += 2;
        return cp;
    }
    if ((b0 & 0xF0) == 0xE0 && cont(i + 1) && cont(i + 2)) {
        const std::uint32_t cp =
            ((b0 & 0x0Fu) << 12) | ((byte(i + 1) & 0x3Fu) << 6) | (byte(i + 2) & 0x3Fu);
        i += 3;
        return cp;
    }
    if ((b0 & 0xF8) == 0xF0 && cont(i + 1) && cont(i + 2) && cont(i + 3)) {
        const std::uint32_t cp = ((b0 & 0x07u) << 18) | ((byte(i + 1) & 0x3Fu) << 12) |
                                 ((byte(i + 2) & 0x3Fu) << 6) | (byte(i + 3) & 0x3Fu);
        i += 4;
        return cp;
    }
    ++i;
    return 0xFFFD;
}

void append_utf8(std::string& out, std::uint32_t cp) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

bool is_word_codepoint(std::uint32_t cp) {
    if (cp < 0x80) {
        return (cp >= '0' && cp <= '9') || (cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z');
    }
    // Latin-1 punctuation/symbols, general punctuation, CJK punctuation,
    // fullwidth forms; everything else beyond ASCII counts as a word char.
    if (cp >= 0xA0 && cp <= 0xBF) return false;
    if (cp == 0xD7 || cp == 0xF7) return false;
    if (cp >= 0x2000 && cp <= 0x206F) return false;
    if (cp >= 0x3000 && cp <= 0x303F) return false;
    if (cp >= 0xFF00 && cp <= 0xFF0F) return false;
    if (cp == 0xFFFD) return false;
    return true;
}

// --- lemmatizer tables ------------------------------------------------------

const std::unordered_map<std::string_view, std::string_view>& irregular_forms() {
    static const std::unordered_map<std::string_view, std::string_view> table = {
        {"men", "man"},       {"women", "woman"},   {"children", "child"}, {"feet", "foot"},
        {"teeth", "tooth"},   {"mice", "mouse"},    {"geese", "goose"},    {"ran", "run"},
        {"went", "go"},       {"gone", "go"},       {"going", "go"},       {"said", "say"},
        {"made", "make"},     {"took", "take"},     {"taken", "take"},     {"came", "come"},
        {"got", "get"},       {"gave", "give"},     {"knew", "know"},      {"known", "know"},
        {"threw", "throw"},   {"thrown", "throw"},  {"grew", "grow"},      {"grown", "grow"},
        {"drew", "draw"},     {"drawn", "draw"},    {"flew", "fly"},       {"ate", "eat"},
        {"eaten", "eat"},     {"saw", "see"},       {"seen", "see"},       {"did", "do"},
        {"done", "do"},       {"wrote", "write"},   {"written", "write"},  {"won", "win"},
        {"lost", "lose"},     {"left", "leave"},    {"felt", "feel"},      {"kept", "keep"},
        {"held", "hold"},     {"met", "meet"},      {"paid", "pay"},       {"sold", "sell"},
        {"told", "tell"},     {"thought", "think"}, {"bought", "buy"},     {"brought", "bring"},
        {"caught", "catch"},  {"taught", "teach"},  {"fought", "fight"},   {"found", "find"},
        {"sent", "send"},     {"spent", "spend"},   {"built", "build"},    {"swam", "swim"},
        {"sang", "sing"},     {"began", "begin"},   {"begun", "begin"},    {"spoke", "speak"},
    };
    return table;
}

bool is_vowel(char c) { return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u'; }

bool ends_with(std::string_view s, std::string_view suffix) {
    return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

// stem cleanup shared by -ing and -ed: undo consonant doubling, restore a
// trailing 'e' for CVC stems
std::string fix_stripped_stem(std::string stem) {
    const std::size_t n = stem.size();
    if (n >= 2 && stem[n - 1] == stem[n - 2] && !is_vowel(stem[n - 1]) &&
        stem[n - 1] != 'l' && stem[n - 1] != 's' && stem[n - 1] != 'z') {
        stem.pop_back();
        return stem;
    }
    if (n >= 3) {
        const char c2 = stem[n - 1], c1 = stem[n - 2], c0 = stem[n - 3];
        if (!is_vowel(c2) && c2 != 'w' && c2 != 'x' && c2 != 'y' && is_vowel(c1) && !is_vowel(c0)) {
            stem.push_back('e');
        }
    }
    return stem;
}

const std::array<std::string_view, 178>& stopword_list() {
    static const std::array<std::string_view, 178> words = {
        "a",       "about",   "above",   "after",   "again",    "against", "all",     "am",
        "an",      "and",     "any",     "are",     "aren",     "as",      "at",      "be",
        "because", "been",    "before",  "being",   "below",    "between", "both",    "but",
        "by",      "can",     "cannot",  "could",   "couldn",   "did",     "didn",    "do",
        "does",    "doesn",   "doing",   "don",     "down",     "during",  "each",    "few",
        "for",     "from",    "further", "had",     "hadn",     "has",     "hasn",    "have",
        "haven",   "having",  "he",      "her",     "here",     "hers",    "herself", "him",
        "himself", "his",     "how",     "i",       "if",       "in",      "into",    "is",
        "isn",     "it",      "its",     "itself",  "just",     "ll",      "me",      "might",
        "more",    "most",    "must",    "mustn",   "my",       "myself",  "no",      "nor",
        "not",     "now",     "of",      "off",     "on",       "once",    "only",    "or",
        "other",   "ought",   "our",     "ours",    "ourselves", "out",    "over",    "own",
        "re",      "s",       "same",    "shan",    "she",      "should",  "shouldn", "so",
        "some",    "such",    "t",       "than",    "that",     "the",     "their",   "theirs",
        "them",    "themselves", "then", "there",   "these",    "they",    "this",    "those",
        "through", "to",      "too",     "under",   "until",    "up",      "ve",      "very",
        "was",     "wasn",    "we",      "were",    "weren",    "what",    "when",    "where",
        "which",   "while",   "who",     "whom",    "why",      "will",    "with",    "yet",
        "would",   "wouldn",  "you",     "your",    "yours",    "yourself", "yourselves", "d",
        "m",       "o",       "y",       "ain",     "ma",       "shall",   "else",    "thus",
        "also",    "via",     "per",     "etc",     "ie",       "eg",      "upon",    "onto",
        "amongst", "among",   "whilst",  "within",  "without",  "toward",  "towards", "across",
        "behind",  "beside",
    };
    return words;
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::string current;
    bool all_digits = true;

    const auto flush = [&] {
        if (!current.empty() && !all_digits) tokens.push_back(current);
        current.clear();
        all_digits = true;
    };

    std::size_t i = 0;
    while (i < text.size()) {
        const std::uint32_t cp = decode_utf8(text, i);
        if (!is_word_codepoint(cp)) {
            flush();
            continue;
        }
        const std::uint32_t lowered = (cp >= 'A' && cp <= 'Z') ? cp + 32 : cp;
        if (lowered < '0' || lowered > '9') all_digits = false;
        append_utf8(current, lowered);
    }
    flush();
    return tokens;
}

const StopwordSet& default_stopwords() {
    static const StopwordSet set = [] {
        StopwordSet s;
        for (const auto w : stopword_list()) s.emplace(w);
        return s;
    }();
    return set;
}

StopwordSet load_stopwords(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open stopword file: " + path.string());
    StopwordSet set;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) set.insert(line);
    }
    return set;
}

std::vector<std::string> remove_stopwords(std::vector<std::string> tokens, const StopwordSet& stopwords) {
    std::erase_if(tokens, [&](const std::string& t) { return stopwords.count(t) != 0; });
    return tokens;
}

std::string lemmatize(std::string_view token) {
    const auto& irregulars = irregular_forms();
    if (const auto it = irregulars.find(token); it != irregulars.end()) {
        return std::string(it->second);
    }
    const std::size_t n = token.size();
    if (n < 4) return std::string(token);
    if (ends_with(token, "ics")) return std::string(token);  // olympics, physics, politics

    // one suffix layer per call, first matching rule wins
    if (ends_with(token, "sses")) return std::string(token.substr(0, n - 2));
    if (ends_with(token, "ies")) {
        if (n >= 5) return std::string(token.substr(0, n - 3)) + "y";  // studies -> study
        return std::string(token.substr(0, n - 1));                    // ties -> tie
    }
    if (ends_with(token, "xes") || ends_with(token, "zes") || ends_with(token, "ches") ||
        ends_with(token, "shes") || ends_with(token, "oes")) {
        return std::string(token.substr(0, n - 2));
    }
    if (ends_with(token, "ing") && n >= 6) {
        return fix_stripped_stem(std::string(token.substr(0, n - 3)));
    }
    if (ends_with(token, "ed") && n >= 5) {
        return fix_stripped_stem(std::string(token.substr(0, n - 2)));
    }
    if (token.back() == 's' && !ends_with(token, "ss") && !ends_with(token, "us") &&
        !ends_with(token, "is")) {
        return std::string(token.substr(0, n - 1));
    }
    return std::string(token);
}

TokenSequence preprocess_document(const corpus::Document& doc, const StopwordSet& stopwords) {
    TokenSequence seq;
    seq.doc_id = doc.id;
    auto tokens = remove_stopwords(tokenize(doc.text), stopwords);
    seq.tokens.reserve(tokens.size());
    for (auto& tok : tokens) seq.tokens.push_back(lemmatize(tok));
    return seq;
}

Vocabulary build_vocabulary(std::span<const TokenSequence> sequences, int min_count) {
    if (min_count < 1) throw std::invalid_argument("build_vocabulary: min_count must be >= 1");

    std::unordered_map<std::string, std::int64_t> counts;
    for (const auto& seq : sequences) {
        for (const auto& tok : seq.tokens) ++counts[tok];
    }

    std::vector<std::pair<std::string, std::int64_t>> kept;
    for (auto& [tok, cnt] : counts) {
        if (cnt >= min_count) kept.emplace_back(tok, cnt);
    }
    if (kept.empty()) throw std::runtime_error("empty vocabulary after min_count filtering");

    std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });

    Vocabulary vocab;
    vocab.min_count = min_count;
    vocab.token_of.reserve(kept.size());
    vocab.frequency.reserve(kept.size());
    for (std::size_t i = 0; i < kept.size(); ++i) {
        vocab.id_of.emplace(kept[i].first, static_cast<int>(i));
        vocab.token_of.push_back(std::move(kept[i].first));
        vocab.frequency.push_back(kept[i].second);
    }
    return vocab;
}

std::vector<int> encode(const TokenSequence& sequence, const Vocabulary& vocab) {
    std::vector<int> ids;
    ids.reserve(sequence.tokens.size());
    for (const auto& tok : sequence.tokens) {
        const int id = vocab.id(tok);
        if (id >= 0) ids.push_back(id);
    }
    return ids;
}

std::string normalize_term(std::string_view term) {
    auto tokens = tokenize(term);
    for (auto& tok : tokens) tok = lemmatize(tok);
    if (tokens.size() != 1) {
        throw std::runtime_error("term '" + std::string(term) + "' does not normalize to a single token");
    }
    return tokens.front();
}

void write_slice_cache(const std::filesystem::path& path, const Vocabulary& vocab,
                       const std::vector<std::vector<int>>& documents) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write slice cache: " + path.string());
    out << vocab.size() << '\n';
    for (int i = 0; i < vocab.size(); ++i) {
        out << vocab.token_of[static_cast<std::size_t>(i)] << ' '
            << vocab.frequency[static_cast<std::size_t>(i)] << '\n';
    }
    for (const auto& doc : documents) {
        for (std::size_t i = 0; i < doc.size(); ++i) {
            if (i) out << ' ';
            out << doc[i];
        }
        out << '\n';
    }
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

SliceCache read_slice_cache(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open slice cache: " + path.string());

    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("truncated slice cache: " + path.string());
    int vocab_size = 0;
    {
        const auto [ptr, ec] = std::from_chars(line.data(), line.data() + line.size(), vocab_size);
        if (ec != std::errc{} || ptr != line.data() + line.size() || vocab_size < 0) {
            throw std::runtime_error("malformed vocabulary header in " + path.string());
        }
    }

    SliceCache cache;
    std::int64_t min_freq = 0;
    for (int i = 0; i < vocab_size; ++i) {
        if (!std::getline(in, line)) throw std::runtime_error("truncated vocabulary block in " + path.string());
        const auto space = line.rfind(' ');
        if (space == std::string::npos) throw std::runtime_error("malformed vocabulary line in " + path.string());
        const std::string token = line.substr(0, space);
        std::int64_t freq = 0;
        const auto [ptr, ec] =
            std::from_chars(line.data() + space + 1, line.data() + line.size(), freq);
        if (ec != std::errc{} || ptr != line.data() + line.size() || token.empty()) {
            throw std::runtime_error("malformed vocabulary line in " + path.string());
        }
        cache.vocab.id_of.emplace(token, i);
        cache.vocab.token_of.push_back(token);
        cache.vocab.frequency.push_back(freq);
        min_freq = (i == 0) ? freq : std::min(min_freq, freq);
    }
    // the cache does not store the threshold; the observed minimum keeps the
    // frequency >= min_count invariant intact
    cache.vocab.min_count = vocab_size > 0 ? static_cast<int>(std::min<std::int64_t>(min_freq, INT32_MAX)) : 1;

    while (std::getline(in, line)) {
        std::vector<int> ids;
        std::size_t pos = 0;
        while (pos < line.size()) {
            const std::size_t start = line.find_first_not_of(' ', pos);
            if (start == std::string::npos) break;
            std::size_t end = line.find(' ', start);
            if (end == std::string::npos) end = line.size();
            int id = 0;
            const auto [ptr, ec] = std::from_chars(line.data() + start, line.data() + end, id);
            if (ec != std::errc{} || ptr != line.data() + end || id < 0 || id >= vocab_size) {
                throw std::runtime_error("malformed document line in " + path.string());
            }
            ids.push_back(id);
            pos = end;
        }
        cache.documents.push_back(std::move(ids));
    }
    return cache;
}

}  // namespace semdrift::preprocess
