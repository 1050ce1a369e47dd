#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace qfd::dataprep {

// ---------------------------------------------------------------------------
// Raw schema
// ---------------------------------------------------------------------------

// One raw transaction record as it appears in the input CSV (column order in
// kRawColumns). Coordinates are degrees, amt is USD, unix_time is epoch
// seconds, is_fraud is the binary label.
struct RawTransaction {
    std::string cc_num;
    std::string merchant;
    double amt = 0.0;
    std::string first;
    std::string last;
    std::string street;
    std::string gender;
    std::string dob; // YYYY-MM-DD
    std::string city;
    std::string state;
    std::string zip;
    double lat = 0.0;
    double lon = 0.0;
    long long city_pop = 0;
    long long unix_time = 0;
    std::string category;
    std::string job;
    double merch_lat = 0.0;
    double merch_lon = 0.0;
    std::string trans_num;
    int is_fraud = 0;
};

// CSV header of the raw schema, in file order.
const std::vector<std::string>& raw_columns();

// ---------------------------------------------------------------------------
// Feature primitives
// ---------------------------------------------------------------------------

// Great-circle distance in km on a sphere of radius 6371 km:
//   d = 2R atan2(sqrt(a), sqrt(1-a)),
//   a = sin^2(dphi/2) + cos(phi1) cos(phi2) sin^2(dlambda/2).
// Inputs are degrees; throws std::invalid_argument outside valid ranges.
double haversine_km(double lat1, double lon1, double lat2, double lon2);

struct TimeFeatures {
    int hour;    // 0-23
    int day;     // 1-31
    int weekday; // 0 = Monday .. 6 = Sunday
    int month;   // 1-12
    int year;
};

// UTC calendar decomposition of an epoch timestamp.
TimeFeatures extract_time_features(long long unix_time);

struct Date {
    int year;
    int month;
    int day;
};

// Parses YYYY-MM-DD, validating the calendar (leap years included).
Date parse_date(const std::string& text);

// Completed years between dob and `at`, birthday-aware: the year ticks over
// only once (month, day) >= dob's. Throws when dob > at.
int compute_age_years(const Date& dob, const Date& at);

// ---------------------------------------------------------------------------
// Encoding
// ---------------------------------------------------------------------------

// Category -> code map with lexicographic code assignment (0..K-1), so the
// encoding is stable across runs and platforms.
struct LabelEncoder {
    std::map<std::string, int> mapping;

    static LabelEncoder fit(const std::vector<std::string>& column);
    // Throws data_error naming the value when it was never seen during fit.
    int encode(const std::string& value) const;
    std::string decode(int code) const;
};

std::pair<std::vector<int>, LabelEncoder> label_encode(const std::vector<std::string>& column);

// ---------------------------------------------------------------------------
// Engineered features
// ---------------------------------------------------------------------------

struct EngineeredData {
    std::vector<std::string> columns;        // feature names, fixed order
    std::vector<std::vector<double>> x;      // rows x columns
    std::vector<int> y;                      // binary labels
    std::map<std::string, LabelEncoder> encoders; // per categorical column
};

// Drops PII columns (first, last, street, trans_num), label-encodes the
// categorical columns, derives age / time features / customer-merchant
// distance, and assembles the fixed-order numeric matrix.
EngineeredData engineer_features(const std::vector<RawTransaction>& rows);

// ---------------------------------------------------------------------------
// Balancing, normalization, splitting
// ---------------------------------------------------------------------------

// Exactly per_class rows of each label: surplus classes are sampled without
// replacement, deficit classes with replacement. Output is class-0 rows then
// class-1 rows. Deterministic under seed.
void balance_subset(EngineeredData& data, std::size_t per_class, std::uint64_t seed);

struct NormStats {
    std::vector<double> mean;
    std::vector<double> stddev; // population convention; degenerate columns get 1
};

// Population mean/stddev per column; columns with stddev < 1e-12 get stddev 1
// so constant features normalize to zero. Requires at least 2 rows.
NormStats zscore_fit(const std::vector<std::vector<double>>& x);
void zscore_apply(std::vector<std::vector<double>>& x, const NormStats& stats);

struct SplitFractions {
    double train = 0.70;
    double validation = 0.15;
    double test = 0.15;
};

struct DatasetSplit {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> train_x, val_x, test_x;
    std::vector<int> train_y, val_y, test_y;
    NormStats norm_stats;
    std::map<std::string, LabelEncoder> encoders;
    std::uint64_t seed = 0;
};

// Stratified 70/15/15 split: global validation/test sizes are floors of the
// fractions (the remainder goes to train) and per-class counts are
// apportioned by largest remainder, keeping every split's class ratio within
// one row of the global ratio. Rows are shuffled per class under seed.
// Normalization stats are fitted on train only and applied to all splits.
DatasetSplit stratified_split(const EngineeredData& data, const SplitFractions& fractions,
                              std::uint64_t seed);

// Full preprocessing: engineer -> balance -> split -> normalize.
DatasetSplit preprocess(const std::vector<RawTransaction>& rows, std::size_t per_class,
                        std::uint64_t seed);

// ---------------------------------------------------------------------------
// Synthetic generator
// ---------------------------------------------------------------------------

// Seeded generator for raw rows in the schema above. Fraud rows carry planted
// signals (large amounts, large customer-merchant distance, night-time hours,
// a skew toward online categories) on top of noise; the base rate is 50%.
// Requires n_rows >= 100.
std::vector<RawTransaction> generate_synthetic(std::size_t n_rows, std::uint64_t seed);

// ---------------------------------------------------------------------------
// CSV / persistence
// ---------------------------------------------------------------------------

void write_raw_csv(const std::filesystem::path& path, const std::vector<RawTransaction>& rows);

// Strict reader: the header must contain every raw column, every row must
// parse, and range checks (lat/lon bounds, amt >= 0, label in {0,1}) reject
// bad rows with a row-numbered data_error. No silent skips.
std::vector<RawTransaction> read_raw_csv(const std::filesystem::path& path);

// Writes train/validation/test CSVs (feature columns then `label`) plus a
// meta.json sidecar carrying format version, seed, encoder mappings, the
// normalization stats and the column order.
void save_split(const std::filesystem::path& dir, const DatasetSplit& split);
DatasetSplit load_split(const std::filesystem::path& dir);

} // namespace qfd::dataprep
