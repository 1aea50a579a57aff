#pragma once

#include <compare>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace semdrift::corpus {

// Calendar date, day precision. Validity means a real calendar day
// (leap years handled, months 1-12).
struct Date {
    int year = 0;
    int month = 1;
    int day = 1;

    auto operator<=>(const Date&) const = default;

    bool valid() const;
    std::string to_string() const;  // YYYY-MM-DD

    static std::optional<Date> parse_iso(std::string_view text);
    // "Date:" header value of a newsgroup post; accepts the common RFC 822
    // layouts ("Mon, 29 Mar 1993 11:57:03 GMT", "29 Mar 93 ...") and ISO.
    static std::optional<Date> parse_header(std::string_view text);
};

struct Document {
    std::string id;
    Date timestamp;
    std::string text;
    std::string source;  // newsgroup / category label, may be empty
};

enum class CorpusFormat { jsonl, newsgroups_dir };

struct DocumentStore {
    std::vector<Document> documents;  // ascending (timestamp, id)
    std::string source_path;
    CorpusFormat format = CorpusFormat::jsonl;
    std::size_t skipped = 0;  // records dropped for missing/invalid fields or dates
};

enum class Granularity { year, month };

struct TimeSlice {
    std::string label;  // "2016" or "2020-06"
    Date period_start;
    Date period_end;  // exclusive
    std::vector<Document> documents;
};

// Loads a corpus and returns it sorted by (timestamp, id). Unparseable
// records are skipped with a warning on stderr and counted in `skipped`.
// Throws on an unreadable path or when nothing parseable remains.
DocumentStore ingest_documents(const std::filesystem::path& path, CorpusFormat format);

// Partitions a non-empty store into consecutive periods. Empty periods
// between the first and last document are emitted as empty slices so the
// timeline has uniform spacing.
std::vector<TimeSlice> slice_by_period(const DocumentStore& store, Granularity granularity);

// Picks slices by label, returned in chronological order regardless of the
// request order. Throws on an unknown label.
std::vector<TimeSlice> select_slices(const std::vector<TimeSlice>& slices,
                                     const std::vector<std::string>& labels);

std::string granularity_name(Granularity g);
std::optional<Granularity> parse_granularity(std::string_view name);
std::optional<CorpusFormat> parse_corpus_format(std::string_view name);

}  // namespace semdrift::corpus
