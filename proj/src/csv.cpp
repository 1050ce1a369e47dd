#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <unordered_map>

#include <json.hpp>

#include "qfd/dataprep.hpp"
#include "qfd/errors.hpp"
#include "qfd/format.hpp"

namespace qfd::dataprep {

namespace {

using nlohmann::json;

// RFC4180-style field splitting; quotes only matter when a field starts with one.
std::vector<std::string> split_csv_line(const std::string& line, std::size_t line_no,
                                        const std::string& file) {
    std::vector<std::string> fields;
    std::string field;
    bool in_quotes = false;
    for (std::size_t k = 0; k < line.size(); ++k) {
        const char ch = line[k];
        if (in_quotes) {
            if (ch == '"') {
                if (k + 1 < line.size() && line[k + 1] == '"') {
                    field.push_back('"');
                    ++k;
                } else {
                    in_quotes = false;
                }
            } else {
                field.push_back(ch);
            }
        } else if (ch == '"' && field.empty()) {
            in_quotes = true;
        } else if (ch == ',') {
            fields.push_back(std::move(field));
            field.clear();
        } else {
            field.push_back(ch);
        }
    }
    if (in_quotes) {
        throw data_error(file + " line " + std::to_string(line_no) + ": unterminated quote");
    }
    fields.push_back(std::move(field));
    return fields;
}

std::string csv_escape(const std::string& value) {
    if (value.find_first_of(",\"\n") == std::string::npos) {
        return value;
    }
    std::string out = "\"";
    for (char ch : value) {
        if (ch == '"') {
            out += "\"\"";
        } else {
            out.push_back(ch);
        }
    }
    out.push_back('"');
    return out;
}

double parse_double_strict(const std::string& text, const std::string& col, std::size_t line_no,
                           const std::string& file) {
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(text.c_str(), &end);
    if (end == text.c_str() || *end != '\0' || errno == ERANGE) {
        throw data_error(file + " line " + std::to_string(line_no) + ": bad numeric value '" +
                         text + "' in column '" + col + "'");
    }
    return v;
}

long long parse_ll_strict(const std::string& text, const std::string& col, std::size_t line_no,
                          const std::string& file) {
    errno = 0;
    char* end = nullptr;
    const long long v = std::strtoll(text.c_str(), &end, 10);
    if (end == text.c_str() || *end != '\0' || errno == ERANGE) {
        throw data_error(file + " line " + std::to_string(line_no) + ": bad integer value '" +
                         text + "' in column '" + col + "'");
    }
    return v;
}

std::ifstream open_for_read(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw data_error("cannot open " + path.string() + " for reading");
    }
    return in;
}

std::ofstream open_for_write(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw data_error("cannot open " + path.string() + " for writing");
    }
    return out;
}

} // namespace

void write_raw_csv(const std::filesystem::path& path, const std::vector<RawTransaction>& rows) {
    std::ofstream out = open_for_write(path);
    const auto& cols = raw_columns();
    for (std::size_t k = 0; k < cols.size(); ++k) {
        out << (k ? "," : "") << cols[k];
    }
    out << "\n";
    char num[32];
    for (const RawTransaction& r : rows) {
        std::snprintf(num, sizeof num, "%.2f", r.amt);
        out << csv_escape(r.cc_num) << ',' << csv_escape(r.merchant) << ',' << num << ','
            << csv_escape(r.first) << ',' << csv_escape(r.last) << ',' << csv_escape(r.street)
            << ',' << csv_escape(r.gender) << ',' << r.dob << ',' << csv_escape(r.city) << ','
            << csv_escape(r.state) << ',' << r.zip << ',';
        std::snprintf(num, sizeof num, "%.6f", r.lat);
        out << num << ',';
        std::snprintf(num, sizeof num, "%.6f", r.lon);
        out << num << ',' << r.city_pop << ',' << r.unix_time << ',' << csv_escape(r.category)
            << ',' << csv_escape(r.job) << ',';
        std::snprintf(num, sizeof num, "%.6f", r.merch_lat);
        out << num << ',';
        std::snprintf(num, sizeof num, "%.6f", r.merch_lon);
        out << num << ',' << r.trans_num << ',' << r.is_fraud << "\n";
    }
    if (!out) {
        throw data_error("write failed for " + path.string());
    }
}

std::vector<RawTransaction> read_raw_csv(const std::filesystem::path& path) {
    std::ifstream in = open_for_read(path);
    const std::string file = path.filename().string();

    std::string line;
    if (!std::getline(in, line)) {
        throw data_error(file + ": empty file, expected a header row");
    }
    if (!line.empty() && line.back() == '\r') {
        line.pop_back();
    }
    const std::vector<std::string> header = split_csv_line(line, 1, file);
    std::unordered_map<std::string, std::size_t> col_index;
    for (std::size_t k = 0; k < header.size(); ++k) {
        col_index[header[k]] = k;
    }
    for (const std::string& required : raw_columns()) {
        if (!col_index.count(required)) {
            throw data_error(file + ": missing required column '" + required + "'");
        }
    }

    std::vector<RawTransaction> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        const std::vector<std::string> fields = split_csv_line(line, line_no, file);
        if (fields.size() != header.size()) {
            throw data_error(file + " line " + std::to_string(line_no) + ": expected " +
                             std::to_string(header.size()) + " fields, got " +
                             std::to_string(fields.size()));
        }
        const auto get = [&](const char* col) -> const std::string& {
            return fields[col_index.at(col)];
        };

        RawTransaction r;
        r.cc_num = get("cc_num");
        r.merchant = get("merchant");
        r.amt = parse_double_strict(get("amt"), "amt", line_no, file);
        r.first = get("first");
        r.last = get("last");
        r.street = get("street");
        r.gender = get("gender");
        r.dob = get("dob");
        r.city = get("city");
        r.state = get("state");
        r.zip = get("zip");
        r.lat = parse_double_strict(get("lat"), "lat", line_no, file);
        r.lon = parse_double_strict(get("long"), "long", line_no, file);
        r.city_pop = parse_ll_strict(get("city_pop"), "city_pop", line_no, file);
        r.unix_time = parse_ll_strict(get("unix_time"), "unix_time", line_no, file);
        r.category = get("category");
        r.job = get("job");
        r.merch_lat = parse_double_strict(get("merch_lat"), "merch_lat", line_no, file);
        r.merch_lon = parse_double_strict(get("merch_long"), "merch_long", line_no, file);
        r.trans_num = get("trans_num");
        const long long label = parse_ll_strict(get("is_fraud"), "is_fraud", line_no, file);

        if (r.lat < -90.0 || r.lat > 90.0 || r.merch_lat < -90.0 || r.merch_lat > 90.0) {
            throw data_error(file + " line " + std::to_string(line_no) +
                             ": latitude outside [-90, 90]");
        }
        if (r.lon < -180.0 || r.lon > 180.0 || r.merch_lon < -180.0 || r.merch_lon > 180.0) {
            throw data_error(file + " line " + std::to_string(line_no) +
                             ": longitude outside [-180, 180]");
        }
        if (r.amt < 0.0) {
            throw data_error(file + " line " + std::to_string(line_no) + ": negative amount");
        }
        if (label != 0 && label != 1) {
            throw data_error(file + " line " + std::to_string(line_no) +
                             ": is_fraud must be 0 or 1");
        }
        r.is_fraud = static_cast<int>(label);
        try {
            parse_date(r.dob);
        } catch (const std::invalid_argument& e) {
            throw data_error(file + " line " + std::to_string(line_no) + ": " + e.what());
        }
        rows.push_back(std::move(r));
    }
    return rows;
}

namespace {

constexpr int kSplitFormatVersion = 1;

void write_feature_csv(const std::filesystem::path& path, const std::vector<std::string>& columns,
                       const std::vector<std::vector<double>>& x, const std::vector<int>& y) {
    std::ofstream out = open_for_write(path);
    for (const std::string& col : columns) {
        out << col << ',';
    }
    out << "label\n";
    for (std::size_t r = 0; r < x.size(); ++r) {
        for (double v : x[r]) {
            out << fmt_g17(v) << ',';
        }
        out << y[r] << "\n";
    }
    if (!out) {
        throw data_error("write failed for " + path.string());
    }
}

void read_feature_csv(const std::filesystem::path& path, const std::vector<std::string>& columns,
                      std::vector<std::vector<double>>& x, std::vector<int>& y) {
    std::ifstream in = open_for_read(path);
    const std::string file = path.filename().string();
    std::string line;
    if (!std::getline(in, line)) {
        throw data_error(file + ": empty file");
    }
    if (!line.empty() && line.back() == '\r') {
        line.pop_back();
    }
    const std::vector<std::string> header = split_csv_line(line, 1, file);
    if (header.size() != columns.size() + 1 || header.back() != "label") {
        throw data_error(file + ": header does not match the split metadata");
    }
    for (std::size_t k = 0; k < columns.size(); ++k) {
        if (header[k] != columns[k]) {
            throw data_error(file + ": column " + std::to_string(k) + " is '" + header[k] +
                             "', expected '" + columns[k] + "'");
        }
    }
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        const std::vector<std::string> fields = split_csv_line(line, line_no, file);
        if (fields.size() != header.size()) {
            throw data_error(file + " line " + std::to_string(line_no) + ": field count mismatch");
        }
        std::vector<double> row(columns.size());
        for (std::size_t k = 0; k < columns.size(); ++k) {
            row[k] = parse_double_strict(fields[k], columns[k], line_no, file);
        }
        const long long label = parse_ll_strict(fields.back(), "label", line_no, file);
        if (label != 0 && label != 1) {
            throw data_error(file + " line " + std::to_string(line_no) + ": label must be 0 or 1");
        }
        x.push_back(std::move(row));
        y.push_back(static_cast<int>(label));
    }
}

} // namespace

void save_split(const std::filesystem::path& dir, const DatasetSplit& split) {
    std::filesystem::create_directories(dir);
    write_feature_csv(dir / "train.csv", split.columns, split.train_x, split.train_y);
    write_feature_csv(dir / "validation.csv", split.columns, split.val_x, split.val_y);
    write_feature_csv(dir / "test.csv", split.columns, split.test_x, split.test_y);

    json meta;
    meta["format_version"] = kSplitFormatVersion;
    meta["seed"] = split.seed;
    meta["columns"] = split.columns;
    json encoders = json::object();
    for (const auto& [col, enc] : split.encoders) {
        json m = json::object();
        for (const auto& [category, code] : enc.mapping) {
            m[category] = code;
        }
        encoders[col] = std::move(m);
    }
    meta["encoders"] = std::move(encoders);
    meta["norm_stats"] = {{"mean", split.norm_stats.mean}, {"stddev", split.norm_stats.stddev}};

    std::ofstream out = open_for_write(dir / "meta.json");
    out << meta.dump(2) << "\n";
    if (!out) {
        throw data_error("write failed for " + (dir / "meta.json").string());
    }
}

DatasetSplit load_split(const std::filesystem::path& dir) {
    std::ifstream in = open_for_read(dir / "meta.json");
    json meta;
    try {
        in >> meta;
    } catch (const json::exception& e) {
        throw data_error((dir / "meta.json").string() + ": " + e.what());
    }

    DatasetSplit split;
    try {
        if (meta.at("format_version").get<int>() != kSplitFormatVersion) {
            throw data_error((dir / "meta.json").string() + ": unsupported format_version");
        }
        split.seed = meta.at("seed").get<std::uint64_t>();
        split.columns = meta.at("columns").get<std::vector<std::string>>();
        for (const auto& [col, m] : meta.at("encoders").items()) {
            LabelEncoder enc;
            for (const auto& [category, code] : m.items()) {
                enc.mapping[category] = code.get<int>();
            }
            split.encoders[col] = std::move(enc);
        }
        split.norm_stats.mean = meta.at("norm_stats").at("mean").get<std::vector<double>>();
        split.norm_stats.stddev = meta.at("norm_stats").at("stddev").get<std::vector<double>>();
    } catch (const json::exception& e) {
        throw data_error((dir / "meta.json").string() + ": " + e.what());
    }
    if (split.norm_stats.mean.size() != split.columns.size() ||
        split.norm_stats.stddev.size() != split.columns.size()) {
        throw data_error((dir / "meta.json").string() + ": norm_stats do not match columns");
    }

    read_feature_csv(dir / "train.csv", split.columns, split.train_x, split.train_y);
    read_feature_csv(dir / "validation.csv", split.columns, split.val_x, split.val_y);
    read_feature_csv(dir / "test.csv", split.columns, split.test_x, split.test_y);
    return split;
}

} // namespace qfd::dataprep
