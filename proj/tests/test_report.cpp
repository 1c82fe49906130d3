#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "specmm/common.hpp"
#include "specmm/report.hpp"

using namespace specmm;

namespace {

Table sample_table() {
    Table t;
    t.name = "sample";
    t.columns = {"idx", "value", "label"};
    t.row({0LL, 1.5, std::string("plain")});
    t.row({1LL, 0.1234567890123456789, std::string("with,comma")});
    t.row({2LL, -3.0e-15, std::string("quote\"inside")});
    return t;
}

}  // namespace

TEST_CASE("float formatting round-trips") {
    CHECK(fmt17(1.0) == "1");
    CHECK(fmt17(0.5) == "0.5");
    double v = 0.1 + 0.2;
    CHECK(std::stod(fmt17(v)) == v);
    CHECK(fmt17(1e300).find("e+300") != std::string::npos);
    CHECK(fmt_int(-42) == "-42");
}

TEST_CASE("csv cells quote separators and quotes") {
    CHECK(cell_csv(Cell{std::string("plain")}) == "plain");
    CHECK(cell_csv(Cell{std::string("a,b")}) == "\"a,b\"");
    CHECK(cell_csv(Cell{std::string("say \"hi\"")}) == "\"say \"\"hi\"\"\"");
    CHECK(cell_csv(Cell{2LL}) == "2");
    CHECK(cell_csv(Cell{0.25}) == "0.25");
}

TEST_CASE("csv round-trips through the loader") {
    ReportDoc doc;
    doc.name = "doc";
    doc.tables.push_back(sample_table());
    std::vector<Artifact> first = emit_report(doc, Format::csv);
    REQUIRE(first.size() == 1);
    CHECK(first[0].filename == "doc_sample.csv");

    Table back = parse_table_csv("sample", first[0].bytes);
    CHECK(back.columns == doc.tables[0].columns);
    REQUIRE(back.rows.size() == 3);
    CHECK(std::get<long long>(back.rows[0][0]) == 0);
    CHECK(std::get<double>(back.rows[1][1]) == 0.1234567890123456789);
    CHECK(std::get<std::string>(back.rows[1][2]) == "with,comma");
    CHECK(std::get<std::string>(back.rows[2][2]) == "quote\"inside");

    ReportDoc doc2;
    doc2.name = "doc";
    doc2.tables.push_back(back);
    std::vector<Artifact> second = emit_report(doc2, Format::csv);
    CHECK(second[0].bytes == first[0].bytes);

    CHECK_THROWS_AS(parse_table_csv("bad", "a,b\n1\n"), contract_error);
}

TEST_CASE("emitting twice is byte-identical") {
    ReportDoc doc;
    doc.name = "doc";
    doc.tables.push_back(sample_table());
    doc.tables[0].chart.enabled = true;
    doc.tables[0].chart.x_col = 0;
    doc.tables[0].chart.y_cols = {1};
    for (Format f : {Format::csv, Format::json, Format::svg}) {
        auto a = emit_report(doc, f), b = emit_report(doc, f);
        REQUIRE(a.size() == b.size());
        for (size_t i = 0; i < a.size(); ++i) {
            CHECK(a[i].filename == b[i].filename);
            CHECK(a[i].bytes == b[i].bytes);
        }
    }
}

TEST_CASE("empty documents and chartless svg are rejected") {
    ReportDoc empty;
    empty.name = "empty";
    CHECK_THROWS_AS(emit_report(empty, Format::csv), contract_error);

    ReportDoc no_rows;
    no_rows.name = "empty";
    Table t;
    t.name = "t";
    t.columns = {"a"};
    no_rows.tables.push_back(t);
    CHECK_THROWS_AS(emit_report(no_rows, Format::csv), contract_error);

    ReportDoc chartless;
    chartless.name = "doc";
    chartless.tables.push_back(sample_table());
    CHECK_THROWS_AS(emit_report(chartless, Format::svg), contract_error);
}

TEST_CASE("svg and json shapes") {
    ReportDoc doc;
    doc.name = "doc";
    doc.meta = {{"origin", "test"}};
    doc.tables.push_back(sample_table());
    doc.tables[0].chart.enabled = true;
    doc.tables[0].chart.x_col = 0;
    doc.tables[0].chart.y_cols = {1};
    doc.tables[0].chart.title = "values";

    auto svgs = emit_report(doc, Format::svg);
    REQUIRE(svgs.size() == 1);
    CHECK(svgs[0].filename == "doc_sample.svg");
    CHECK(svgs[0].bytes.find("viewBox=\"0 0 800 500\"") != std::string::npos);
    CHECK(svgs[0].bytes.find("values") != std::string::npos);
    CHECK(svgs[0].bytes.find("polyline") != std::string::npos);

    auto jsons = emit_report(doc, Format::json);
    REQUIRE(jsons.size() == 1);
    CHECK(jsons[0].filename == "doc.json");
    CHECK(jsons[0].bytes.find("\"origin\":\"test\"") != std::string::npos);
    CHECK(jsons[0].bytes.find("\"sample\"") != std::string::npos);

    CHECK(parse_format("csv") == Format::csv);
    CHECK(parse_format("svg") == Format::svg);
    CHECK_THROWS_AS(parse_format("pdf"), contract_error);
}

TEST_CASE("artifact writing") {
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / "specmm_report_test";
    fs::remove_all(dir);
    write_artifacts({{"a.csv", "x\n1\n"}}, dir.string());
    std::ifstream in(dir / "a.csv");
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    CHECK(content == "x\n1\n");
    fs::remove_all(dir);

    CHECK_THROWS_AS(write_artifacts({{"a.csv", "x"}}, "/proc/definitely/not/writable"),
                    io_error);
}

TEST_CASE("json writer escapes and nests") {
    JsonWriter w;
    w.begin_object();
    w.key("text");
    w.value(std::string("line\n\"q\""));
    w.key("nan");
    w.value(std::numeric_limits<double>::quiet_NaN());
    w.key("arr");
    w.begin_array();
    w.value(1LL);
    w.value(2.5);
    w.end_array();
    w.end_object();
    CHECK(w.str() == "{\"text\":\"line\\n\\\"q\\\"\",\"nan\":null,\"arr\":[1,2.5]}");
}
