#include "qfd/dataprep.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <numeric>
#include <random>
#include <stdexcept>
#include <tuple>

#include "qfd/errors.hpp"

namespace qfd::dataprep {

namespace {

constexpr double kEarthRadiusKm = 6371.0;
constexpr double kDegToRad = std::numbers::pi / 180.0;

void check_lat_lon(double lat, double lon, const char* who) {
    if (!(lat >= -90.0 && lat <= 90.0)) {
        throw std::invalid_argument(std::string(who) + ": latitude " + std::to_string(lat) +
                                    " outside [-90, 90]");
    }
    if (!(lon >= -180.0 && lon <= 180.0)) {
        throw std::invalid_argument(std::string(who) + ": longitude " + std::to_string(lon) +
                                    " outside [-180, 180]");
    }
}

bool is_leap(int year) {
    return (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
}

int days_in_month(int year, int month) {
    static constexpr int kDays[12] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (month == 2 && is_leap(year)) {
        return 29;
    }
    return kDays[month - 1];
}

// Proleptic Gregorian civil date from days since 1970-01-01.
void civil_from_days(long long z, int& year, int& month, int& day) {
    z += 719468;
    const long long era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const long long y = static_cast<long long>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    day = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
    month = static_cast<int>(mp < 10 ? mp + 3 : mp - 9);
    year = static_cast<int>(month <= 2 ? y + 1 : y);
}

long long floor_div(long long a, long long b) {
    long long q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) {
        --q;
    }
    return q;
}

} // namespace

const std::vector<std::string>& raw_columns() {
    static const std::vector<std::string> kColumns = {
        "cc_num", "merchant", "amt",       "first",     "last",      "street", "gender",
        "dob",    "city",     "state",     "zip",       "lat",       "long",   "city_pop",
        "unix_time", "category", "job",    "merch_lat", "merch_long", "trans_num", "is_fraud"};
    return kColumns;
}

double haversine_km(double lat1, double lon1, double lat2, double lon2) {
    check_lat_lon(lat1, lon1, "haversine_km");
    check_lat_lon(lat2, lon2, "haversine_km");
    const double phi1 = lat1 * kDegToRad;
    const double phi2 = lat2 * kDegToRad;
    const double dphi = (lat2 - lat1) * kDegToRad;
    const double dlambda = (lon2 - lon1) * kDegToRad;
    const double sin_dphi = std::sin(dphi / 2.0);
    const double sin_dlam = std::sin(dlambda / 2.0);
    const double a = sin_dphi * sin_dphi + std::cos(phi1) * std::cos(phi2) * sin_dlam * sin_dlam;
    return 2.0 * kEarthRadiusKm * std::atan2(std::sqrt(a), std::sqrt(std::max(0.0, 1.0 - a)));
}

TimeFeatures extract_time_features(long long unix_time) {
    const long long days = floor_div(unix_time, 86400);
    const long long secs = unix_time - days * 86400;
    TimeFeatures tf{};
    civil_from_days(days, tf.year, tf.month, tf.day);
    tf.hour = static_cast<int>(secs / 3600);
    // 1970-01-01 was a Thursday; Monday = 0.
    tf.weekday = static_cast<int>(((days + 3) % 7 + 7) % 7);
    return tf;
}

Date parse_date(const std::string& text) {
    Date d{};
    char tail = '\0';
    if (std::sscanf(text.c_str(), "%d-%d-%d%c", &d.year, &d.month, &d.day, &tail) != 3) {
        throw std::invalid_argument("parse_date: expected YYYY-MM-DD, got '" + text + "'");
    }
    if (d.month < 1 || d.month > 12 || d.day < 1 || d.day > days_in_month(d.year, d.month)) {
        throw std::invalid_argument("parse_date: invalid calendar date '" + text + "'");
    }
    return d;
}

int compute_age_years(const Date& dob, const Date& at) {
    const auto key = [](const Date& d) { return std::tuple(d.year, d.month, d.day); };
    if (key(at) < key(dob)) {
        throw std::invalid_argument("compute_age_years: date of birth is in the future");
    }
    int age = at.year - dob.year;
    if (std::tuple(at.month, at.day) < std::tuple(dob.month, dob.day)) {
        --age;
    }
    return age;
}

LabelEncoder LabelEncoder::fit(const std::vector<std::string>& column) {
    if (column.empty()) {
        throw std::invalid_argument("LabelEncoder::fit: empty column");
    }
    LabelEncoder enc;
    for (const std::string& v : column) {
        enc.mapping.emplace(v, 0);
    }
    // std::map iterates lexicographically; codes follow that order.
    int code = 0;
    for (auto& [key, value] : enc.mapping) {
        value = code++;
    }
    return enc;
}

int LabelEncoder::encode(const std::string& value) const {
    const auto it = mapping.find(value);
    if (it == mapping.end()) {
        throw data_error("label encoding: unseen category '" + value + "'");
    }
    return it->second;
}

std::string LabelEncoder::decode(int code) const {
    for (const auto& [key, value] : mapping) {
        if (value == code) {
            return key;
        }
    }
    throw std::invalid_argument("LabelEncoder::decode: unknown code " + std::to_string(code));
}

std::pair<std::vector<int>, LabelEncoder> label_encode(const std::vector<std::string>& column) {
    LabelEncoder enc = LabelEncoder::fit(column);
    std::vector<int> codes(column.size());
    for (std::size_t k = 0; k < column.size(); ++k) {
        codes[k] = enc.encode(column[k]);
    }
    return {std::move(codes), std::move(enc)};
}

EngineeredData engineer_features(const std::vector<RawTransaction>& rows) {
    if (rows.empty()) {
        throw std::invalid_argument("engineer_features: no rows");
    }

    EngineeredData out;
    out.columns = {"cc_num",           "merchant",          "amt",
                   "gender",           "customer_age",      "city",
                   "zip",              "lat",               "long",
                   "city_pop",         "state",             "unix_time",
                   "transaction_hour", "transaction_day",   "transaction_weekday",
                   "transaction_month", "transaction_year", "category",
                   "job",              "cust_merch_distance_km"};

    const std::vector<std::string> categorical = {"cc_num", "merchant", "gender", "city",
                                                  "zip",    "state",    "category", "job"};
    const auto field_of = [](const RawTransaction& r, const std::string& col) -> const std::string& {
        if (col == "cc_num") return r.cc_num;
        if (col == "merchant") return r.merchant;
        if (col == "gender") return r.gender;
        if (col == "city") return r.city;
        if (col == "zip") return r.zip;
        if (col == "state") return r.state;
        if (col == "category") return r.category;
        return r.job;
    };

    for (const std::string& col : categorical) {
        std::vector<std::string> values;
        values.reserve(rows.size());
        for (const RawTransaction& r : rows) {
            values.push_back(field_of(r, col));
        }
        out.encoders[col] = LabelEncoder::fit(values);
    }

    out.x.reserve(rows.size());
    out.y.reserve(rows.size());
    for (std::size_t row_idx = 0; row_idx < rows.size(); ++row_idx) {
        const RawTransaction& r = rows[row_idx];
        TimeFeatures tf;
        int age = 0;
        double dist = 0.0;
        try {
            tf = extract_time_features(r.unix_time);
            const Date dob = parse_date(r.dob);
            age = compute_age_years(dob, Date{tf.year, tf.month, tf.day});
            dist = haversine_km(r.lat, r.lon, r.merch_lat, r.merch_lon);
        } catch (const std::invalid_argument& e) {
            throw data_error("engineer_features: row " + std::to_string(row_idx + 1) + ": " +
                             e.what());
        }

        std::vector<double> f;
        f.reserve(out.columns.size());
        f.push_back(out.encoders.at("cc_num").encode(r.cc_num));
        f.push_back(out.encoders.at("merchant").encode(r.merchant));
        f.push_back(r.amt);
        f.push_back(out.encoders.at("gender").encode(r.gender));
        f.push_back(age);
        f.push_back(out.encoders.at("city").encode(r.city));
        f.push_back(out.encoders.at("zip").encode(r.zip));
        f.push_back(r.lat);
        f.push_back(r.lon);
        f.push_back(static_cast<double>(r.city_pop));
        f.push_back(out.encoders.at("state").encode(r.state));
        f.push_back(static_cast<double>(r.unix_time));
        f.push_back(tf.hour);
        f.push_back(tf.day);
        f.push_back(tf.weekday);
        f.push_back(tf.month);
        f.push_back(tf.year);
        f.push_back(out.encoders.at("category").encode(r.category));
        f.push_back(out.encoders.at("job").encode(r.job));
        f.push_back(dist);
        out.x.push_back(std::move(f));
        out.y.push_back(r.is_fraud);
    }
    return out;
}

void balance_subset(EngineeredData& data, std::size_t per_class, std::uint64_t seed) {
    if (per_class == 0) {
        throw std::invalid_argument("balance_subset: per_class must be positive");
    }
    std::vector<std::size_t> neg, pos;
    for (std::size_t k = 0; k < data.y.size(); ++k) {
        (data.y[k] == 1 ? pos : neg).push_back(k);
    }
    if (neg.empty() || pos.empty()) {
        throw std::invalid_argument("balance_subset: both classes must be present");
    }

    std::mt19937_64 rng(seed);
    const auto sample_class = [&](std::vector<std::size_t>& indices) {
        std::vector<std::size_t> chosen;
        chosen.reserve(per_class);
        if (indices.size() >= per_class) {
            std::shuffle(indices.begin(), indices.end(), rng);
            chosen.assign(indices.begin(), indices.begin() + static_cast<std::ptrdiff_t>(per_class));
        } else {
            std::uniform_int_distribution<std::size_t> pick(0, indices.size() - 1);
            for (std::size_t k = 0; k < per_class; ++k) {
                chosen.push_back(indices[pick(rng)]);
            }
        }
        return chosen;
    };

    const std::vector<std::size_t> keep_neg = sample_class(neg);
    const std::vector<std::size_t> keep_pos = sample_class(pos);

    std::vector<std::vector<double>> new_x;
    std::vector<int> new_y;
    new_x.reserve(2 * per_class);
    new_y.reserve(2 * per_class);
    for (std::size_t idx : keep_neg) {
        new_x.push_back(data.x[idx]);
        new_y.push_back(0);
    }
    for (std::size_t idx : keep_pos) {
        new_x.push_back(data.x[idx]);
        new_y.push_back(1);
    }
    data.x = std::move(new_x);
    data.y = std::move(new_y);
}

NormStats zscore_fit(const std::vector<std::vector<double>>& x) {
    if (x.size() < 2) {
        throw std::invalid_argument("zscore_fit: need at least 2 rows");
    }
    const std::size_t cols = x[0].size();
    NormStats stats;
    stats.mean.assign(cols, 0.0);
    stats.stddev.assign(cols, 0.0);
    const double n = static_cast<double>(x.size());
    for (const auto& row : x) {
        for (std::size_t c = 0; c < cols; ++c) {
            stats.mean[c] += row[c];
        }
    }
    for (double& m : stats.mean) {
        m /= n;
    }
    for (const auto& row : x) {
        for (std::size_t c = 0; c < cols; ++c) {
            const double d = row[c] - stats.mean[c];
            stats.stddev[c] += d * d;
        }
    }
    for (double& s : stats.stddev) {
        s = std::sqrt(s / n);
        if (s < 1e-12) {
            s = 1.0; // constant column: normalize to zero instead of dividing by ~0
        }
    }
    return stats;
}

void zscore_apply(std::vector<std::vector<double>>& x, const NormStats& stats) {
    for (auto& row : x) {
        if (row.size() != stats.mean.size()) {
            throw std::invalid_argument("zscore_apply: column count mismatch");
        }
        for (std::size_t c = 0; c < row.size(); ++c) {
            row[c] = (row[c] - stats.mean[c]) / stats.stddev[c];
        }
    }
}

DatasetSplit stratified_split(const EngineeredData& data, const SplitFractions& fractions,
                              std::uint64_t seed) {
    const double sum = fractions.train + fractions.validation + fractions.test;
    if (std::abs(sum - 1.0) > 1e-9 || fractions.train < 0 || fractions.validation < 0 ||
        fractions.test < 0) {
        throw std::invalid_argument("stratified_split: fractions must be non-negative and sum to 1");
    }

    std::vector<std::vector<std::size_t>> by_class(2);
    for (std::size_t k = 0; k < data.y.size(); ++k) {
        by_class[static_cast<std::size_t>(data.y[k])].push_back(k);
    }
    for (int c = 0; c < 2; ++c) {
        if (by_class[c].size() < 3) {
            throw std::invalid_argument("stratified_split: class " + std::to_string(c) +
                                        " has fewer than 3 rows");
        }
    }

    std::mt19937_64 rng(seed);
    for (auto& indices : by_class) {
        std::shuffle(indices.begin(), indices.end(), rng);
    }

    // Global sizes: floors for validation and test, remainder to train.
    const std::size_t n = data.y.size();
    const std::size_t n_val = static_cast<std::size_t>(fractions.validation * static_cast<double>(n));
    const std::size_t n_test = static_cast<std::size_t>(fractions.test * static_cast<double>(n));

    // Largest-remainder apportionment of a split among the classes. Ties go to
    // the class with the fewest rows handed out so far, keeping splits
    // class-balanced within one row.
    std::array<std::size_t, 2> assigned{0, 0};
    const auto apportion = [&](std::size_t split_size) {
        std::array<std::size_t, 2> counts{0, 0};
        std::array<double, 2> remainders{0.0, 0.0};
        std::size_t used = 0;
        for (int c = 0; c < 2; ++c) {
            const double share = static_cast<double>(split_size) *
                                 static_cast<double>(by_class[c].size()) / static_cast<double>(n);
            counts[c] = static_cast<std::size_t>(share);
            remainders[c] = share - static_cast<double>(counts[c]);
            used += counts[c];
        }
        while (used < split_size) {
            int winner = 0;
            if (remainders[1] > remainders[0] ||
                (remainders[1] == remainders[0] &&
                 (assigned[1] + counts[1] < assigned[0] + counts[0]))) {
                winner = 1;
            }
            counts[winner] += 1;
            remainders[winner] = -1.0;
            ++used;
        }
        assigned[0] += counts[0];
        assigned[1] += counts[1];
        return counts;
    };

    const std::array<std::size_t, 2> val_c = apportion(n_val);
    const std::array<std::size_t, 2> test_c = apportion(n_test);

    DatasetSplit split;
    split.columns = data.columns;
    split.encoders = data.encoders;
    split.seed = seed;

    for (int c = 0; c < 2; ++c) {
        const auto& indices = by_class[c];
        const std::size_t train_c = indices.size() - val_c[c] - test_c[c];
        for (std::size_t k = 0; k < indices.size(); ++k) {
            const std::size_t idx = indices[k];
            if (k < train_c) {
                split.train_x.push_back(data.x[idx]);
                split.train_y.push_back(data.y[idx]);
            } else if (k < train_c + val_c[c]) {
                split.val_x.push_back(data.x[idx]);
                split.val_y.push_back(data.y[idx]);
            } else {
                split.test_x.push_back(data.x[idx]);
                split.test_y.push_back(data.y[idx]);
            }
        }
    }

    split.norm_stats = zscore_fit(split.train_x);
    zscore_apply(split.train_x, split.norm_stats);
    zscore_apply(split.val_x, split.norm_stats);
    zscore_apply(split.test_x, split.norm_stats);
    return split;
}

DatasetSplit preprocess(const std::vector<RawTransaction>& rows, std::size_t per_class,
                        std::uint64_t seed) {
    EngineeredData data = engineer_features(rows);
    balance_subset(data, per_class, seed);
    return stratified_split(data, SplitFractions{}, seed);
}

} // namespace qfd::dataprep
