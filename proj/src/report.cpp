#include "specmm/report.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cerrno>
#include <filesystem>
#include <fstream>

namespace specmm {

std::string fmt17(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string fmt_int(long long v) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%lld", v);
    return buf;
}

std::string cell_csv(const Cell& c) {
    if (std::holds_alternative<double>(c)) return fmt17(std::get<double>(c));
    if (std::holds_alternative<long long>(c)) return fmt_int(std::get<long long>(c));
    const std::string& s = std::get<std::string>(c);
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') out += '"';
        out += ch;
    }
    out += '"';
    return out;
}

void Table::row(std::vector<Cell> cells) {
    if (cells.size() != columns.size())
        throw contract_error("table '" + name + "': row width does not match column count");
    rows.push_back(std::move(cells));
}

Format parse_format(const std::string& s) {
    if (s == "csv") return Format::csv;
    if (s == "json") return Format::json;
    if (s == "svg") return Format::svg;
    throw contract_error("unknown format '" + s + "' (expected csv, json or svg)");
}

std::string json_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size() + 2);
    for (char ch : s) {
        switch (ch) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            case '\t': out += "\\t"; break;
            default:
                if (static_cast<unsigned char>(ch) < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof(buf), "\\u%04x", ch);
                    out += buf;
                } else {
                    out += ch;
                }
        }
    }
    return out;
}

void JsonWriter::comma() {
    if (!first_stack_.empty()) {
        if (!first_stack_.back() && !pending_key_) out_ += ',';
        first_stack_.back() = false;
    }
    pending_key_ = false;
}

void JsonWriter::begin_object() {
    comma();
    out_ += '{';
    first_stack_.push_back(true);
}

void JsonWriter::end_object() {
    out_ += '}';
    first_stack_.pop_back();
}

void JsonWriter::begin_array() {
    comma();
    out_ += '[';
    first_stack_.push_back(true);
}

void JsonWriter::end_array() {
    out_ += ']';
    first_stack_.pop_back();
}

void JsonWriter::key(const std::string& k) {
    comma();
    out_ += '"';
    out_ += json_escape(k);
    out_ += "\":";
    pending_key_ = true;
}

void JsonWriter::value(double v) {
    comma();
    if (!std::isfinite(v)) {
        out_ += "null";
    } else {
        out_ += fmt17(v);
    }
}

void JsonWriter::value(long long v) {
    comma();
    out_ += fmt_int(v);
}

void JsonWriter::value(const std::string& v) {
    comma();
    out_ += '"';
    out_ += json_escape(v);
    out_ += '"';
}

void JsonWriter::value_bool(bool v) {
    comma();
    out_ += v ? "true" : "false";
}

void JsonWriter::raw(const std::string& r) {
    comma();
    out_ += r;
}

namespace {

std::string table_csv(const Table& t) {
    std::string out;
    for (size_t j = 0; j < t.columns.size(); ++j) {
        if (j) out += ',';
        out += t.columns[j];
    }
    out += '\n';
    for (const auto& r : t.rows) {
        for (size_t j = 0; j < r.size(); ++j) {
            if (j) out += ',';
            out += cell_csv(r[j]);
        }
        out += '\n';
    }
    return out;
}

void cell_json(JsonWriter& w, const Cell& c) {
    if (std::holds_alternative<double>(c))
        w.value(std::get<double>(c));
    else if (std::holds_alternative<long long>(c))
        w.value(std::get<long long>(c));
    else
        w.value(std::get<std::string>(c));
}

std::string doc_json(const ReportDoc& doc) {
    JsonWriter w;
    w.begin_object();
    w.key("name");
    w.value(doc.name);
    for (const auto& [k, v] : doc.meta) {
        w.key(k);
        w.value(v);
    }
    w.key("tables");
    w.begin_object();
    for (const auto& t : doc.tables) {
        w.key(t.name);
        w.begin_array();
        for (const auto& r : t.rows) {
            w.begin_object();
            for (size_t j = 0; j < t.columns.size(); ++j) {
                w.key(t.columns[j]);
                cell_json(w, r[j]);
            }
            w.end_object();
        }
        w.end_array();
    }
    w.end_object();
    w.end_object();
    std::string s = w.str();
    s += '\n';
    return s;
}

double cell_num(const Cell& c) {
    if (std::holds_alternative<double>(c)) return std::get<double>(c);
    if (std::holds_alternative<long long>(c)) return static_cast<double>(std::get<long long>(c));
    return std::nan("");
}

// Fixed-canvas polyline chart. Element order and coordinate formatting are
// fully determined by the table contents, so emitted bytes are stable.
std::string table_svg(const Table& t) {
    const ChartSpec& cs = t.chart;
    const double W = 800, H = 500, ml = 70, mr = 20, mt = 40, mb = 50;
    std::vector<int> ycols = cs.y_cols;
    if (ycols.empty())
        for (size_t j = 0; j < t.columns.size(); ++j)
            if (static_cast<int>(j) != cs.x_col) ycols.push_back(static_cast<int>(j));

    auto tx = [&](const Cell& c, bool logscale) {
        double v = cell_num(c);
        return logscale ? std::log10(v) : v;
    };

    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (const auto& r : t.rows) {
        double x = tx(r[cs.x_col], cs.log_x);
        if (std::isfinite(x)) xmin = std::min(xmin, x), xmax = std::max(xmax, x);
        for (int yc : ycols) {
            double y = tx(r[yc], cs.log_y);
            if (std::isfinite(y)) ymin = std::min(ymin, y), ymax = std::max(ymax, y);
        }
    }
    if (xmin > xmax) xmin = 0, xmax = 1;
    if (ymin > ymax) ymin = 0, ymax = 1;
    if (xmax - xmin < 1e-300) xmax = xmin + 1;
    if (ymax - ymin < 1e-300) ymax = ymin + 1;

    auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * (W - ml - mr); };
    auto py = [&](double y) { return H - mb - (y - ymin) / (ymax - ymin) * (H - mt - mb); };
    auto f2 = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.2f", v);
        return std::string(buf);
    };

    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                    "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

    std::string s;
    s += "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 800 500\">\n";
    s += "<rect width=\"800\" height=\"500\" fill=\"white\"/>\n";
    s += "<text x=\"400\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">" +
         json_escape(cs.title.empty() ? t.name : cs.title) + "</text>\n";
    s += "<line x1=\"" + f2(ml) + "\" y1=\"" + f2(H - mb) + "\" x2=\"" + f2(W - mr) + "\" y2=\"" +
         f2(H - mb) + "\" stroke=\"black\"/>\n";
    s += "<line x1=\"" + f2(ml) + "\" y1=\"" + f2(mt) + "\" x2=\"" + f2(ml) + "\" y2=\"" +
         f2(H - mb) + "\" stroke=\"black\"/>\n";
    for (int k = 0; k <= 4; ++k) {
        double fx = xmin + (xmax - xmin) * k / 4.0;
        double fy = ymin + (ymax - ymin) * k / 4.0;
        std::string lx = fmt17(cs.log_x ? std::pow(10.0, fx) : fx);
        std::string ly = fmt17(cs.log_y ? std::pow(10.0, fy) : fy);
        if (lx.size() > 9) lx = lx.substr(0, 9);
        if (ly.size() > 9) ly = ly.substr(0, 9);
        s += "<text x=\"" + f2(px(fx)) + "\" y=\"" + f2(H - mb + 18) +
             "\" text-anchor=\"middle\" font-size=\"11\">" + lx + "</text>\n";
        s += "<text x=\"" + f2(ml - 6) + "\" y=\"" + f2(py(fy) + 4) +
             "\" text-anchor=\"end\" font-size=\"11\">" + ly + "</text>\n";
    }
    s += "<text x=\"400\" y=\"" + f2(H - 12) + "\" text-anchor=\"middle\" font-size=\"13\">" +
         json_escape(t.columns[cs.x_col]) + "</text>\n";
    for (size_t si = 0; si < ycols.size(); ++si) {
        const char* color = palette[si % 8];
        std::string pts;
        for (const auto& r : t.rows) {
            double x = tx(r[cs.x_col], cs.log_x), y = tx(r[ycols[si]], cs.log_y);
            if (!std::isfinite(x) || !std::isfinite(y)) continue;
            pts += f2(px(x)) + "," + f2(py(y)) + " ";
        }
        s += "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"1.5\" points=\"" +
             pts + "\"/>\n";
        for (const auto& r : t.rows) {
            double x = tx(r[cs.x_col], cs.log_x), y = tx(r[ycols[si]], cs.log_y);
            if (!std::isfinite(x) || !std::isfinite(y)) continue;
            s += "<circle cx=\"" + f2(px(x)) + "\" cy=\"" + f2(py(y)) + "\" r=\"3\" fill=\"" + color +
                 "\"/>\n";
        }
        s += "<text x=\"" + f2(W - mr - 8) + "\" y=\"" + f2(mt + 16.0 * (double)si + 12) +
             "\" text-anchor=\"end\" font-size=\"12\" fill=\"" + color + "\">" +
             json_escape(t.columns[ycols[si]]) + "</text>\n";
    }
    s += "</svg>\n";
    return s;
}

}  // namespace

std::vector<Artifact> emit_report(const ReportDoc& doc, Format format) {
    size_t total_rows = 0;
    for (const auto& t : doc.tables) total_rows += t.rows.size();
    if (doc.tables.empty() || total_rows == 0)
        throw contract_error("emit_report: document '" + doc.name + "' has no rows");

    std::vector<Artifact> out;
    switch (format) {
        case Format::csv:
            for (const auto& t : doc.tables)
                out.push_back({doc.name + "_" + t.name + ".csv", table_csv(t)});
            break;
        case Format::json:
            out.push_back({doc.name + ".json", doc_json(doc)});
            break;
        case Format::svg:
            for (const auto& t : doc.tables)
                if (t.chart.enabled) out.push_back({doc.name + "_" + t.name + ".svg", table_svg(t)});
            if (out.empty())
                throw contract_error("emit_report: no table in '" + doc.name + "' defines a chart");
            break;
    }
    return out;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (size_t i = 0; i < line.size(); ++i) {
        char ch = line[i];
        if (quoted) {
            if (ch == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += ch;
            }
        } else if (ch == '"' && cur.empty()) {
            quoted = true;
        } else if (ch == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += ch;
        }
    }
    fields.push_back(std::move(cur));
    return fields;
}

Cell classify_cell(const std::string& field) {
    if (field.empty()) return field;
    errno = 0;
    char* end = nullptr;
    long long ll = std::strtoll(field.c_str(), &end, 10);
    if (errno == 0 && end == field.c_str() + field.size()) return ll;
    errno = 0;
    double d = std::strtod(field.c_str(), &end);
    if (errno != ERANGE && end == field.c_str() + field.size()) return d;
    return field;
}

}  // namespace

Table parse_table_csv(const std::string& name, const std::string& csv) {
    Table tbl;
    tbl.name = name;
    size_t pos = 0;
    bool header = true;
    while (pos < csv.size()) {
        size_t eol = csv.find('\n', pos);
        std::string line = csv.substr(pos, eol == std::string::npos ? eol : eol - pos);
        pos = eol == std::string::npos ? csv.size() : eol + 1;
        if (line.empty()) continue;
        if (header) {
            for (auto& f : split_csv_line(line)) tbl.columns.push_back(f);
            header = false;
            continue;
        }
        std::vector<Cell> row;
        const std::vector<std::string> fields = split_csv_line(line);
        if (fields.size() != tbl.columns.size())
            throw contract_error("parse_table_csv: row width does not match header in '" +
                                 name + "'");
        for (const std::string& f : fields) row.push_back(classify_cell(f));
        tbl.rows.push_back(std::move(row));
    }
    return tbl;
}

void write_artifacts(const std::vector<Artifact>& artifacts, const std::string& out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw io_error("cannot create " + out_dir + ": " + ec.message());
    for (const auto& a : artifacts) {
        std::filesystem::path p = std::filesystem::path(out_dir) / a.filename;
        std::ofstream f(p, std::ios::binary);
        if (!f) throw io_error("cannot open " + p.string() + " for writing");
        f.write(a.bytes.data(), static_cast<std::streamsize>(a.bytes.size()));
        if (!f) throw io_error("short write to " + p.string());
    }
}

}  // namespace specmm
