#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "semdrift/corpus.hpp"
#include "testutil.hpp"

#include <set>

using namespace semdrift::corpus;
using testutil::TempDir;
using testutil::write_file;

TEST_CASE("date parsing and validity") {
    CHECK(Date::parse_iso("2020-01-05") == Date{2020, 1, 5});
    CHECK(Date::parse_iso("2020-02-29") == Date{2020, 2, 29});  // leap year
    CHECK_FALSE(Date::parse_iso("2021-02-29").has_value());
    CHECK_FALSE(Date::parse_iso("2020-13-01").has_value());
    CHECK_FALSE(Date::parse_iso("2020-00-10").has_value());
    CHECK_FALSE(Date::parse_iso("not a date").has_value());
    CHECK(Date::parse_iso("2020-06-10T12:30:00") == Date{2020, 6, 10});
    CHECK(Date{2020, 6, 10}.to_string() == "2020-06-10");
    CHECK(Date{2019, 12, 31} < Date{2020, 1, 1});
}

TEST_CASE("newsgroup Date header layouts") {
    CHECK(Date::parse_header(" Mon, 29 Mar 1993 11:57:03 GMT") == Date{1993, 3, 29});
    CHECK(Date::parse_header(" 29 Mar 93 11:57:03 GMT") == Date{1993, 3, 29});
    CHECK(Date::parse_header(" 5 Apr 2021") == Date{2021, 4, 5});
    CHECK(Date::parse_header(" 2020-06-10") == Date{2020, 6, 10});
    CHECK_FALSE(Date::parse_header(" whenever").has_value());
    CHECK_FALSE(Date::parse_header(" 32 Mar 1993").has_value());
    CHECK_FALSE(Date::parse_header("   ").has_value());
    CHECK_FALSE(Date::parse_header("").has_value());
}

TEST_CASE("jsonl ingestion sorts by timestamp then id") {
    TempDir dir("ingest");
    write_file(dir / "corpus.jsonl",
               "{\"id\": \"b\", \"timestamp\": \"2020-01-05\", \"text\": \"one\"}\n"
               "{\"id\": \"c\", \"timestamp\": \"2020-06-10\", \"text\": \"two\"}\n"
               "{\"id\": \"a\", \"timestamp\": \"2020-01-02\", \"text\": \"three\"}\n");
    const auto store = ingest_documents(dir / "corpus.jsonl", CorpusFormat::jsonl);
    REQUIRE(store.documents.size() == 3);
    CHECK(store.documents[0].id == "a");
    CHECK(store.documents[0].timestamp == Date{2020, 1, 2});
    CHECK(store.documents[1].id == "b");
    CHECK(store.documents[2].id == "c");
    CHECK(store.skipped == 0);
}

TEST_CASE("jsonl ingestion skips malformed records and bad dates, keeps count") {
    TempDir dir("ingest_bad");
    write_file(dir / "corpus.jsonl",
               "{\"id\": \"a\", \"timestamp\": \"2020-01-02\", \"text\": \"ok\"}\n"
               "this is not json\n"
               "{\"id\": \"b\", \"timestamp\": \"2020-99-99\", \"text\": \"bad date\"}\n"
               "{\"id\": \"c\", \"text\": \"no timestamp\"}\n"
               "{\"id\": \"a\", \"timestamp\": \"2020-01-03\", \"text\": \"duplicate id\"}\n"
               "{\"id\": \"d\", \"timestamp\": \"2020-01-04\", \"text\": \"ok too\"}\n");
    const auto store = ingest_documents(dir / "corpus.jsonl", CorpusFormat::jsonl);
    CHECK(store.documents.size() == 2);
    CHECK(store.skipped == 4);
}

TEST_CASE("empty corpus is an error") {
    TempDir dir("ingest_empty");
    write_file(dir / "corpus.jsonl", "");
    CHECK_THROWS_WITH_AS(ingest_documents(dir / "corpus.jsonl", CorpusFormat::jsonl),
                         doctest::Contains("zero parseable documents"), std::runtime_error);
    CHECK_THROWS_AS(ingest_documents(dir / "missing.jsonl", CorpusFormat::jsonl),
                    std::runtime_error);
}

TEST_CASE("newsgroups directory ingestion takes dates from headers") {
    TempDir dir("newsgroups");
    write_file(dir / "rec.sport.hockey" / "1001",
               "From: fan@example.com\n"
               "Date: Mon, 29 Mar 1993 11:57:03 GMT\n"
               "Subject: playoffs\n"
               "\n"
               "the game last night was great\n");
    write_file(dir / "rec.sport.hockey" / "1002",
               "Date: 2 Apr 93 09:00:00\n"
               "\n"
               "another post body\n");
    write_file(dir / "soc.religion.christian" / "2001",
               "Date: 15 Mar 1993 08:30:00\n"
               "\n"
               "a different group\n");
    write_file(dir / "rec.sport.hockey" / "9999", "no date header here\n\nbody\n");

    const auto store = ingest_documents(dir.path(), CorpusFormat::newsgroups_dir);
    REQUIRE(store.documents.size() == 3);
    CHECK(store.skipped == 1);
    CHECK(store.documents[0].source == "soc.religion.christian");
    CHECK(store.documents[0].timestamp == Date{1993, 3, 15});
    CHECK(store.documents[1].source == "rec.sport.hockey");
    CHECK(store.documents[1].timestamp == Date{1993, 3, 29});
    CHECK(store.documents[1].text.find("game last night") != std::string::npos);
    CHECK(store.documents[1].text.find("Subject") == std::string::npos);  // headers stripped
    CHECK(store.documents[2].timestamp == Date{1993, 4, 2});
}

TEST_CASE("monthly slicing emits empty interior periods") {
    DocumentStore store;
    store.documents = {
        {"a", {2020, 1, 5}, "x", ""},
        {"b", {2020, 1, 20}, "y", ""},
        {"c", {2020, 6, 10}, "z", ""},
    };
    const auto slices = slice_by_period(store, Granularity::month);
    REQUIRE(slices.size() == 6);
    CHECK(slices[0].label == "2020-01");
    CHECK(slices[0].documents.size() == 2);
    for (int i = 1; i < 5; ++i) {
        CHECK(slices[static_cast<std::size_t>(i)].documents.empty());
    }
    CHECK(slices[5].label == "2020-06");
    CHECK(slices[5].documents.size() == 1);

    // every slice is a [start, end) month
    for (const auto& s : slices) {
        CHECK(s.period_start < s.period_end);
        for (const auto& d : s.documents) {
            CHECK_FALSE(d.timestamp < s.period_start);
            CHECK(d.timestamp < s.period_end);
        }
    }
}

TEST_CASE("year slicing counts per-year totals") {
    DocumentStore store;
    store.documents = {
        {"a", {2016, 3, 1}, "", ""},
        {"b", {2016, 11, 30}, "", ""},
        {"c", {2017, 1, 1}, "", ""},
    };
    const auto slices = slice_by_period(store, Granularity::year);
    REQUIRE(slices.size() == 2);
    CHECK(slices[0].label == "2016");
    CHECK(slices[0].documents.size() == 2);
    CHECK(slices[1].label == "2017");
    CHECK(slices[1].documents.size() == 1);
}

TEST_CASE("single document produces a single slice") {
    DocumentStore store;
    store.documents = {{"only", {2021, 12, 25}, "", ""}};
    const auto slices = slice_by_period(store, Granularity::month);
    REQUIRE(slices.size() == 1);
    CHECK(slices[0].label == "2021-12");
    CHECK(slices[0].documents.size() == 1);

    DocumentStore empty;
    CHECK_THROWS_AS(slice_by_period(empty, Granularity::month), std::invalid_argument);
}

TEST_CASE("slicing is a partition and is idempotent") {
    DocumentStore store;
    semdrift::Rng rng(7);
    for (int i = 0; i < 200; ++i) {
        Date date{2019 + rng.uniform_int(0, 2), rng.uniform_int(1, 12), rng.uniform_int(1, 28)};
        store.documents.push_back({"doc" + std::to_string(i), date, "", ""});
    }
    std::stable_sort(store.documents.begin(), store.documents.end(),
                     [](const Document& a, const Document& b) {
                         if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
                         return a.id < b.id;
                     });

    const auto first = slice_by_period(store, Granularity::month);
    const auto second = slice_by_period(store, Granularity::month);

    std::size_t total = 0;
    std::set<std::string> seen_ids;
    for (const auto& s : first) {
        total += s.documents.size();
        for (const auto& d : s.documents) CHECK(seen_ids.insert(d.id).second);
    }
    CHECK(total == store.documents.size());

    REQUIRE(first.size() == second.size());
    for (std::size_t i = 0; i < first.size(); ++i) {
        CHECK(first[i].label == second[i].label);
        CHECK(first[i].documents.size() == second[i].documents.size());
        if (i > 0) CHECK(first[i - 1].period_start < first[i].period_start);
    }
}

TEST_CASE("select_slices returns chronological order and rejects unknown labels") {
    DocumentStore store;
    store.documents = {
        {"a", {2020, 1, 5}, "", ""},
        {"b", {2020, 12, 20}, "", ""},
    };
    const auto slices = slice_by_period(store, Granularity::month);
    REQUIRE(slices.size() == 12);

    const auto picked = select_slices(slices, {"2020-12", "2020-01"});
    REQUIRE(picked.size() == 2);
    CHECK(picked[0].label == "2020-01");
    CHECK(picked[1].label == "2020-12");

    std::vector<std::string> all_labels;
    for (const auto& s : slices) all_labels.push_back(s.label);
    const auto everything = select_slices(slices, all_labels);
    REQUIRE(everything.size() == slices.size());
    for (std::size_t i = 0; i < slices.size(); ++i) CHECK(everything[i].label == slices[i].label);

    CHECK_THROWS_WITH_AS(select_slices(slices, {"2020-13"}), doctest::Contains("unknown slice label"),
                         std::runtime_error);
}
