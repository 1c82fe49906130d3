#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "specmm/common.hpp"

namespace specmm {

// Report layer: every artifact the library emits goes through these writers so
// output bytes are a pure function of the payload. Doubles are printed with 17
// significant digits (round-trip exact), never via locale-dependent streams.

std::string fmt17(double v);
std::string fmt_int(long long v);

using Cell = std::variant<double, long long, std::string>;

std::string cell_csv(const Cell& c);

struct ChartSpec {
    bool enabled = false;
    int x_col = 0;
    std::vector<int> y_cols;
    bool log_x = false;
    bool log_y = false;
    std::string title;
};

struct Table {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
    ChartSpec chart;

    void row(std::vector<Cell> cells);
};

struct ReportDoc {
    std::string name;
    std::vector<std::pair<std::string, std::string>> meta;  // ordered key/value
    std::vector<Table> tables;
};

enum class Format { csv, json, svg };

Format parse_format(const std::string& s);

struct Artifact {
    std::string filename;
    std::string bytes;
};

// Renders the document in the requested format. Throws contract_error when the
// document carries no rows at all; charts are emitted only for tables that ask
// for one.
std::vector<Artifact> emit_report(const ReportDoc& doc, Format format);

// Inverse of the CSV rendering: cells that look like integers come back as
// long long, other numerics as double, everything else as (unquoted) text.
Table parse_table_csv(const std::string& name, const std::string& csv);

void write_artifacts(const std::vector<Artifact>& artifacts, const std::string& out_dir);

// Minimal deterministic JSON emission for report payloads built by hand.
class JsonWriter {
  public:
    void begin_object();
    void end_object();
    void begin_array();
    void end_array();
    void key(const std::string& k);
    void value(double v);       // nonfinite -> null
    void value(long long v);
    void value(const std::string& v);
    void value_bool(bool v);
    void raw(const std::string& r);
    std::string str() const { return out_; }

  private:
    void comma();
    std::string out_;
    std::vector<bool> first_stack_;
    bool pending_key_ = false;
};

std::string json_escape(const std::string& s);

}  // namespace specmm
