#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <string>

#include <json.hpp>

#include "qfd/errors.hpp"
#include "qfd/format.hpp"
#include "qfd/harness.hpp"

namespace qfd::harness {

namespace {

using nlohmann::json;

double parse_field(const std::string& text, const std::filesystem::path& path, std::size_t line_no) {
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(text.c_str(), &end);
    if (end == text.c_str() || *end != '\0' || errno == ERANGE) {
        throw data_error(path.string() + " line " + std::to_string(line_no) +
                         ": bad numeric value '" + text + "'");
    }
    return v;
}

} // namespace

void emit_logs(const std::vector<EpochRecord>& records, const MetricsReport& report,
               const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);

    {
        std::ofstream out(dir / "epochs.csv");
        if (!out) {
            throw data_error("cannot open " + (dir / "epochs.csv").string() + " for writing");
        }
        out << "epoch,train_loss,val_loss,val_accuracy,epoch_seconds\n";
        for (const EpochRecord& r : records) {
            out << r.epoch << ',' << fmt_g17(r.train_loss) << ',' << fmt_g17(r.val_loss) << ','
                << fmt_g17(r.val_accuracy) << ',' << fmt_g17(r.epoch_seconds) << "\n";
        }
        if (!out) {
            throw data_error("write failed for " + (dir / "epochs.csv").string());
        }
    }

    {
        json j;
        j["accuracy"] = report.accuracy;
        j["precision"] = report.precision;
        j["recall"] = report.recall;
        j["f1"] = report.f1;
        j["confusion_matrix"] = {{"tp", report.cm.tp},
                                 {"fp", report.cm.fp},
                                 {"tn", report.cm.tn},
                                 {"fn", report.cm.fn}};
        j["inference_seconds"] = report.inference_seconds;
        std::ofstream out(dir / "report.json");
        if (!out) {
            throw data_error("cannot open " + (dir / "report.json").string() + " for writing");
        }
        out << j.dump(2) << "\n";
        if (!out) {
            throw data_error("write failed for " + (dir / "report.json").string());
        }
    }
}

std::vector<EpochRecord> read_epoch_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw data_error("cannot open " + path.string() + " for reading");
    }
    std::string line;
    if (!std::getline(in, line) || line != "epoch,train_loss,val_loss,val_accuracy,epoch_seconds") {
        throw data_error(path.string() + ": unexpected header");
    }
    std::vector<EpochRecord> records;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        std::vector<std::string> fields;
        std::size_t pos = 0;
        while (true) {
            const std::size_t comma = line.find(',', pos);
            fields.push_back(line.substr(pos, comma == std::string::npos ? comma : comma - pos));
            if (comma == std::string::npos) {
                break;
            }
            pos = comma + 1;
        }
        if (fields.size() != 5) {
            throw data_error(path.string() + " line " + std::to_string(line_no) +
                             ": expected 5 fields");
        }
        EpochRecord r;
        r.epoch = static_cast<std::size_t>(parse_field(fields[0], path, line_no));
        r.train_loss = parse_field(fields[1], path, line_no);
        r.val_loss = parse_field(fields[2], path, line_no);
        r.val_accuracy = parse_field(fields[3], path, line_no);
        r.epoch_seconds = parse_field(fields[4], path, line_no);
        records.push_back(r);
    }
    return records;
}

} // namespace qfd::harness
