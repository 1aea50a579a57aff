#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "semdrift/corpus.hpp"

namespace semdrift::preprocess {

struct TokenSequence {
    std::string doc_id;
    std::vector<std::string> tokens;  // lowercase, no stopwords, no punctuation/digit-only
};

// Token <-> id map over one slice; ids are 0..V-1 by descending frequency,
// ties broken lexicographically. Every retained token occurs >= min_count
// times in the slice.
struct Vocabulary {
    std::unordered_map<std::string, int> id_of;
    std::vector<std::string> token_of;
    std::vector<std::int64_t> frequency;
    int min_count = 1;

    int size() const { return static_cast<int>(token_of.size()); }
    bool contains(const std::string& token) const { return id_of.count(token) != 0; }
    // -1 when absent
    int id(const std::string& token) const {
        const auto it = id_of.find(token);
        return it == id_of.end() ? -1 : it->second;
    }
};

using StopwordSet = std::unordered_set<std::string>;

// Lowercased split on non-alphanumeric boundaries (UTF-8 aware); pure-digit
// tokens are dropped.
std::vector<std::string> tokenize(std::string_view text);

const StopwordSet& default_stopwords();
StopwordSet load_stopwords(const std::filesystem::path& path);  // one token per line

std::vector<std::string> remove_stopwords(std::vector<std::string> tokens, const StopwordSet& stopwords);

// Deterministic suffix-rule lemmatizer with a small irregular-form table.
// Out-of-dictionary tokens that match no rule come back unchanged.
std::string lemmatize(std::string_view token);

// tokenize -> remove_stopwords -> lemmatize
TokenSequence preprocess_document(const corpus::Document& doc, const StopwordSet& stopwords);

// Throws when no token survives the min_count filter.
Vocabulary build_vocabulary(std::span<const TokenSequence> sequences, int min_count);

// OOV tokens are dropped, order preserved.
std::vector<int> encode(const TokenSequence& sequence, const Vocabulary& vocab);

// Normalizes a query term through the same pipeline (stopwords not applied;
// an absent term simply never matches a vocabulary). Throws unless the term
// reduces to exactly one token.
std::string normalize_term(std::string_view term);

// Slice cache: vocabulary block ("V", then V "token frequency" lines) followed
// by one line of space-separated token ids per document.
struct SliceCache {
    Vocabulary vocab;
    std::vector<std::vector<int>> documents;
};

void write_slice_cache(const std::filesystem::path& path, const Vocabulary& vocab,
                       const std::vector<std::vector<int>>& documents);
SliceCache read_slice_cache(const std::filesystem::path& path);

}  // namespace semdrift::preprocess
