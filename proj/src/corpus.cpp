#include "semdrift/corpus.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

#include "json.hpp"

namespace semdrift::corpus {

namespace {

bool is_leap(int year) { return (year % 4 == 0 && year % 100 != 0) || year % 400 == 0; }

int days_in_month(int year, int month) {
    static constexpr std::array<int, 13> kDays = {0, 31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (month == 2 && is_leap(year)) return 29;
    return kDays[static_cast<std::size_t>(month)];
}

std::optional<int> parse_int(std::string_view s) {
    int v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

std::optional<int> month_from_name(std::string_view tok) {
    static constexpr std::array<std::string_view, 12> kNames = {
        "jan", "feb", "mar", "apr", "may", "jun", "jul", "aug", "sep", "oct", "nov", "dec"};
    if (tok.size() < 3) return std::nullopt;
    std::string lower;
    for (char c : tok.substr(0, 3)) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    for (std::size_t i = 0; i < kNames.size(); ++i) {
        if (lower == kNames[i]) return static_cast<int>(i) + 1;
    }
    return std::nullopt;
}

void sort_store(std::vector<Document>& docs) {
    std::stable_sort(docs.begin(), docs.end(), [](const Document& a, const Document& b) {
        if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
        return a.id < b.id;
    });
}

DocumentStore ingest_jsonl(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open corpus file: " + path.string());

    DocumentStore store;
    store.source_path = path.string();
    store.format = CorpusFormat::jsonl;

    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        nlohmann::json rec;
        try {
            rec = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error&) {
            std::cerr << "warning: " << path.string() << ":" << line_no << ": malformed record, skipped\n";
            ++store.skipped;
            continue;
        }
        if (!rec.is_object() || !rec.contains("id") || !rec.contains("timestamp") || !rec.contains("text") ||
            !rec["id"].is_string() || !rec["timestamp"].is_string() || !rec["text"].is_string()) {
            std::cerr << "warning: " << path.string() << ":" << line_no << ": missing required field, skipped\n";
            ++store.skipped;
            continue;
        }
        const auto date = Date::parse_iso(rec["timestamp"].get<std::string>());
        if (!date) {
            std::cerr << "warning: " << path.string() << ":" << line_no << ": unparseable timestamp, skipped\n";
            ++store.skipped;
            continue;
        }
        Document doc;
        doc.id = rec["id"].get<std::string>();
        doc.timestamp = *date;
        doc.text = rec["text"].get<std::string>();
        if (rec.contains("source") && rec["source"].is_string()) doc.source = rec["source"].get<std::string>();
        store.documents.push_back(std::move(doc));
    }
    return store;
}

// One post per file; the date comes from a "Date:" header line, the group
// label from the containing directory name.
DocumentStore ingest_newsgroups(const std::filesystem::path& root) {
    DocumentStore store;
    store.source_path = root.string();
    store.format = CorpusFormat::newsgroups_dir;

    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::recursive_directory_iterator(root)) {
        if (entry.is_regular_file()) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());

    for (const auto& file : files) {
        std::ifstream in(file);
        if (!in) {
            std::cerr << "warning: cannot read " << file.string() << ", skipped\n";
            ++store.skipped;
            continue;
        }
        std::ostringstream body;
        std::optional<Date> date;
        std::string line;
        bool in_headers = true;
        while (std::getline(in, line)) {
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (in_headers) {
                if (line.empty()) {
                    in_headers = false;
                    continue;
                }
                std::string lower;
                for (char c : line.substr(0, 5)) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
                if (lower == "date:" && !date) date = Date::parse_header(line.substr(5));
                continue;
            }
            body << line << '\n';
        }
        if (!date) {
            std::cerr << "warning: " << file.string() << ": no parseable Date header, skipped\n";
            ++store.skipped;
            continue;
        }
        Document doc;
        doc.id = std::filesystem::relative(file, root).generic_string();
        doc.timestamp = *date;
        doc.text = body.str();
        doc.source = file.parent_path().filename().string();
        store.documents.push_back(std::move(doc));
    }
    return store;
}

}  // namespace

bool Date::valid() const {
    return month >= 1 && month <= 12 && day >= 1 && day <= days_in_month(year, month);
}

std::string Date::to_string() const {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", year, month, day);
    return buf;
}

std::optional<Date> Date::parse_iso(std::string_view text) {
    if (text.size() < 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
    const auto y = parse_int(text.substr(0, 4));
    const auto m = parse_int(text.substr(5, 2));
    const auto d = parse_int(text.substr(8, 2));
    if (!y || !m || !d) return std::nullopt;
    // allow a trailing time part ("2020-01-05T10:00:00")
    if (text.size() > 10 && text[10] != 'T' && text[10] != ' ') return std::nullopt;
    Date date{*y, *m, *d};
    if (!date.valid()) return std::nullopt;
    return date;
}

std::optional<Date> Date::parse_header(std::string_view text) {
    const auto first = text.find_first_not_of(" \t");
    if (first == std::string_view::npos) return std::nullopt;
    if (auto iso = parse_iso(text.substr(first))) return iso;

    // tokenize on spaces/commas, look for "<day> <MonthName> <year>"
    std::vector<std::string_view> tokens;
    std::size_t pos = 0;
    while (pos < text.size()) {
        const std::size_t start = text.find_first_not_of(" \t,", pos);
        if (start == std::string_view::npos) break;
        std::size_t end = text.find_first_of(" \t,", start);
        if (end == std::string_view::npos) end = text.size();
        tokens.push_back(text.substr(start, end - start));
        pos = end;
    }
    for (std::size_t i = 1; i + 1 < tokens.size(); ++i) {
        const auto month = month_from_name(tokens[i]);
        if (!month) continue;
        const auto day = parse_int(tokens[i - 1]);
        const auto year = parse_int(tokens[i + 1]);
        if (!day || !year) continue;
        int y = *year;
        if (y < 100) y += (y >= 70) ? 1900 : 2000;  // two-digit years
        Date date{y, *month, *day};
        if (date.valid()) return date;
    }
    return std::nullopt;
}

DocumentStore ingest_documents(const std::filesystem::path& path, CorpusFormat format) {
    if (!std::filesystem::exists(path)) {
        throw std::runtime_error("corpus path does not exist: " + path.string());
    }
    DocumentStore store =
        format == CorpusFormat::jsonl ? ingest_jsonl(path) : ingest_newsgroups(path);
    if (store.documents.empty()) {
        throw std::runtime_error("zero parseable documents in " + path.string());
    }
    // duplicate ids count as malformed records
    sort_store(store.documents);
    std::unordered_set<std::string> seen;
    seen.reserve(store.documents.size());
    std::vector<Document> unique;
    unique.reserve(store.documents.size());
    for (auto& doc : store.documents) {
        if (!seen.insert(doc.id).second) {
            std::cerr << "warning: duplicate document id '" << doc.id << "', skipped\n";
            ++store.skipped;
            continue;
        }
        unique.push_back(std::move(doc));
    }
    store.documents = std::move(unique);
    if (store.documents.empty()) {
        throw std::runtime_error("zero parseable documents in " + path.string());
    }
    if (store.skipped > 0) {
        std::cerr << "note: skipped " << store.skipped << " unparseable record(s)\n";
    }
    return store;
}

std::vector<TimeSlice> slice_by_period(const DocumentStore& store, Granularity granularity) {
    if (store.documents.empty()) throw std::invalid_argument("slice_by_period: empty store");

    const Date first = store.documents.front().timestamp;
    const Date last = store.documents.back().timestamp;

    std::vector<TimeSlice> slices;
    if (granularity == Granularity::year) {
        for (int y = first.year; y <= last.year; ++y) {
            TimeSlice s;
            s.label = std::to_string(y);
            s.period_start = Date{y, 1, 1};
            s.period_end = Date{y + 1, 1, 1};
            slices.push_back(std::move(s));
        }
    } else {
        int y = first.year, m = first.month;
        while (y < last.year || (y == last.year && m <= last.month)) {
            TimeSlice s;
            char buf[8];
            std::snprintf(buf, sizeof(buf), "%02d", m);
            s.label = std::to_string(y) + "-" + buf;
            s.period_start = Date{y, m, 1};
            s.period_end = (m == 12) ? Date{y + 1, 1, 1} : Date{y, m + 1, 1};
            slices.push_back(std::move(s));
            if (++m > 12) { m = 1; ++y; }
        }
    }

    std::size_t idx = 0;
    for (const auto& doc : store.documents) {
        while (idx < slices.size() && !(doc.timestamp < slices[idx].period_end)) ++idx;
        slices[idx].documents.push_back(doc);
    }
    return slices;
}

std::vector<TimeSlice> select_slices(const std::vector<TimeSlice>& slices,
                                     const std::vector<std::string>& labels) {
    std::vector<const TimeSlice*> picked;
    for (const auto& label : labels) {
        const auto it = std::find_if(slices.begin(), slices.end(),
                                     [&](const TimeSlice& s) { return s.label == label; });
        if (it == slices.end()) throw std::runtime_error("unknown slice label: " + label);
        if (std::find(picked.begin(), picked.end(), &*it) == picked.end()) picked.push_back(&*it);
    }
    std::sort(picked.begin(), picked.end(),
              [](const TimeSlice* a, const TimeSlice* b) { return a->period_start < b->period_start; });
    std::vector<TimeSlice> out;
    out.reserve(picked.size());
    for (const TimeSlice* s : picked) out.push_back(*s);
    return out;
}

std::string granularity_name(Granularity g) { return g == Granularity::year ? "year" : "month"; }

std::optional<Granularity> parse_granularity(std::string_view name) {
    if (name == "year") return Granularity::year;
    if (name == "month") return Granularity::month;
    return std::nullopt;
}

std::optional<CorpusFormat> parse_corpus_format(std::string_view name) {
    if (name == "jsonl") return CorpusFormat::jsonl;
    if (name == "newsgroups_dir") return CorpusFormat::newsgroups_dir;
    return std::nullopt;
}

}  // namespace semdrift::corpus
