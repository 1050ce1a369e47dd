#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

#include "qfd/dataprep.hpp"

namespace qfd::dataprep {

namespace {

constexpr double kEarthRadiusKm = 6371.0;
constexpr double kDegToRad = std::numbers::pi / 180.0;
constexpr double kRadToDeg = 180.0 / std::numbers::pi;

// Hand-rolled draws so the emitted corpus does not depend on the standard
// library's distribution internals.
double u01(std::mt19937_64& rng) {
    return std::ldexp(static_cast<double>(rng() >> 11), -53);
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
    return lo + (hi - lo) * u01(rng);
}

std::size_t pick(std::mt19937_64& rng, std::size_t n) {
    return static_cast<std::size_t>(rng() % n);
}

double normal(std::mt19937_64& rng) {
    const double u1 = 1.0 - u01(rng); // avoid log(0)
    const double u2 = u01(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double lognormal(std::mt19937_64& rng, double mu, double sigma) {
    return std::exp(mu + sigma * normal(rng));
}

double exponential(std::mt19937_64& rng, double mean) {
    return -mean * std::log(1.0 - u01(rng));
}

// Destination point at distance_km along the given bearing on the sphere.
void destination(double lat_deg, double lon_deg, double bearing_rad, double distance_km,
                 double& out_lat, double& out_lon) {
    const double phi1 = lat_deg * kDegToRad;
    const double lam1 = lon_deg * kDegToRad;
    const double delta = distance_km / kEarthRadiusKm;
    const double sin_phi2 = std::sin(phi1) * std::cos(delta) +
                            std::cos(phi1) * std::sin(delta) * std::cos(bearing_rad);
    const double phi2 = std::asin(std::clamp(sin_phi2, -1.0, 1.0));
    const double lam2 = lam1 + std::atan2(std::sin(bearing_rad) * std::sin(delta) * std::cos(phi1),
                                          std::cos(delta) - std::sin(phi1) * sin_phi2);
    out_lat = phi2 * kRadToDeg;
    double lon = lam2 * kRadToDeg;
    while (lon > 180.0) lon -= 360.0;
    while (lon < -180.0) lon += 360.0;
    out_lon = lon;
}

const char* kStates[] = {"AL", "AZ", "CA", "CO", "FL", "GA", "IL", "IN", "KY", "MA",
                         "MD", "MI", "MN", "MO", "NC", "NJ", "NV", "NY", "OH", "OK",
                         "OR", "PA", "SC", "TN", "TX", "UT", "VA", "WA", "WI", "WV"};

const char* kCityPrefixes[] = {"North", "East", "West", "South", "New",
                               "Lake",  "Port", "Fort", "Mount", "Glen"};
const char* kCityStems[] = {"field", "ville", "ton", "burg", "wood",
                            "haven", "dale",  "ford", "port", "view"};

const char* kFirstNames[] = {"James", "Mary",   "Robert", "Patricia", "John",   "Jennifer",
                             "Michael", "Linda", "David",  "Elizabeth", "William", "Barbara",
                             "Richard", "Susan", "Joseph", "Jessica",  "Thomas",  "Sarah",
                             "Charles", "Karen", "Daniel", "Lisa",     "Matthew", "Nancy"};

const char* kLastNames[] = {"Smith",    "Johnson", "Williams", "Brown",  "Jones",   "Garcia",
                            "Miller",   "Davis",   "Rodriguez", "Martinez", "Hernandez", "Lopez",
                            "Gonzalez", "Wilson",  "Anderson", "Thomas", "Taylor",  "Moore",
                            "Jackson",  "Martin",  "Lee",      "Perez",  "Thompson", "White",
                            "Harris",   "Sanchez", "Clark",    "Ramirez", "Lewis",  "Robinson",
                            "Walker",   "Young",   "Allen",    "King",   "Wright",  "Scott",
                            "Torres",   "Nguyen",  "Hill",     "Flores"};

const char* kMerchantSuffixes[] = {"LLC", "Inc", "Group", "and Sons", "Ltd", "PLC"};

const char* kStreetSuffixes[] = {"St", "Ave", "Rd", "Blvd", "Ln"};

const char* kCategories[] = {"entertainment", "food_dining",  "gas_transport", "grocery_net",
                             "grocery_pos",   "health_fitness", "home",        "kids_pets",
                             "misc_net",      "misc_pos",     "personal_care", "shopping_net",
                             "shopping_pos",  "travel"};

const char* kOnlineCategories[] = {"grocery_net", "misc_net", "shopping_net"};

const char* kJobs[] = {"Accountant",      "Architect",     "Chef",          "Civil engineer",
                       "Dentist",         "Electrician",   "Farmer",        "Firefighter",
                       "Graphic designer", "Journalist",    "Lawyer",        "Librarian",
                       "Mechanic",        "Nurse",         "Optician",      "Paramedic",
                       "Pharmacist",      "Photographer",  "Pilot",         "Plumber",
                       "Surveyor",        "Teacher",       "Translator",    "Veterinarian"};

// Daytime-weighted hour table for legitimate transactions (per-hour weights).
const int kDayHourWeights[24] = {1, 1, 1, 1, 1, 2, 4, 6, 8, 9, 10, 10,
                                 10, 10, 10, 9, 9, 9, 10, 10, 8, 6, 4, 2};

int draw_hour_daytime(std::mt19937_64& rng) {
    static const int total = [] {
        int t = 0;
        for (int w : kDayHourWeights) t += w;
        return t;
    }();
    int r = static_cast<int>(pick(rng, static_cast<std::size_t>(total)));
    for (int h = 0; h < 24; ++h) {
        r -= kDayHourWeights[h];
        if (r < 0) {
            return h;
        }
    }
    return 23;
}

struct City {
    std::string name;
    std::string state;
    std::string zip;
    double lat;
    double lon;
    long long pop;
};

std::vector<City> make_cities(std::mt19937_64& rng) {
    std::vector<City> cities;
    cities.reserve(40);
    for (int k = 0; k < 40; ++k) {
        City c;
        c.name = std::string(kCityPrefixes[pick(rng, std::size(kCityPrefixes))]) + " " +
                 kCityStems[pick(rng, std::size(kCityStems))];
        c.state = kStates[pick(rng, std::size(kStates))];
        char zip[8];
        std::snprintf(zip, sizeof zip, "%05llu", static_cast<unsigned long long>(rng() % 90000 + 10000));
        c.zip = zip;
        c.lat = uniform(rng, 25.5, 48.5);
        c.lon = uniform(rng, -124.0, -67.5);
        c.pop = static_cast<long long>(std::exp(uniform(rng, std::log(2.0e3), std::log(2.5e6))));
        cities.push_back(std::move(c));
    }
    return cities;
}

std::vector<std::string> make_merchants(std::mt19937_64& rng) {
    std::vector<std::string> merchants;
    merchants.reserve(120);
    for (int k = 0; k < 120; ++k) {
        merchants.push_back(std::string(kLastNames[pick(rng, std::size(kLastNames))]) + " " +
                            kMerchantSuffixes[pick(rng, std::size(kMerchantSuffixes))]);
    }
    return merchants;
}

std::string random_digits(std::mt19937_64& rng, int count) {
    std::string s;
    s.reserve(static_cast<std::size_t>(count));
    for (int k = 0; k < count; ++k) {
        s.push_back(static_cast<char>('0' + rng() % 10));
    }
    return s;
}

std::string random_hex(std::mt19937_64& rng, int count) {
    static const char* kHex = "0123456789abcdef";
    std::string s;
    s.reserve(static_cast<std::size_t>(count));
    for (int k = 0; k < count; ++k) {
        s.push_back(kHex[rng() % 16]);
    }
    return s;
}

} // namespace

std::vector<RawTransaction> generate_synthetic(std::size_t n_rows, std::uint64_t seed) {
    if (n_rows < 100) {
        throw std::invalid_argument("generate_synthetic: n_rows must be at least 100");
    }
    std::mt19937_64 rng(seed);
    const std::vector<City> cities = make_cities(rng);
    const std::vector<std::string> merchants = make_merchants(rng);

    constexpr long long kBaseTime = 1704067200; // 2024-01-01T00:00:00Z

    std::vector<RawTransaction> rows;
    rows.reserve(n_rows);
    for (std::size_t k = 0; k < n_rows; ++k) {
        RawTransaction r;
        const bool fraud = u01(rng) < 0.5;
        r.is_fraud = fraud ? 1 : 0;

        const City& city = cities[pick(rng, cities.size())];
        r.city = city.name;
        r.state = city.state;
        r.zip = city.zip;
        r.lat = city.lat + 0.08 * normal(rng);
        r.lon = city.lon + 0.08 * normal(rng);
        r.city_pop = static_cast<long long>(static_cast<double>(city.pop) * uniform(rng, 0.95, 1.05));

        r.cc_num = random_digits(rng, 16);
        r.merchant = merchants[pick(rng, merchants.size())];
        r.first = kFirstNames[pick(rng, std::size(kFirstNames))];
        r.last = kLastNames[pick(rng, std::size(kLastNames))];
        r.gender = (u01(rng) < 0.5) ? "F" : "M";
        r.street = random_digits(rng, 1 + static_cast<int>(pick(rng, 4))) + " " +
                   kCityStems[pick(rng, std::size(kCityStems))] + " " +
                   kStreetSuffixes[pick(rng, std::size(kStreetSuffixes))];
        {
            const int year = 1950 + static_cast<int>(pick(rng, 55));
            const int month = 1 + static_cast<int>(pick(rng, 12));
            const int day = 1 + static_cast<int>(pick(rng, 28));
            char buf[16];
            std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", year, month, day);
            r.dob = buf;
        }
        r.trans_num = random_hex(rng, 32);

        // Planted signals: fraud skews toward large amounts, distant
        // merchants, night-time hours and online categories.
        if (fraud && u01(rng) < 0.85) {
            r.amt = std::clamp(lognormal(rng, std::log(500.0), 0.55), 1.0, 10000.0);
        } else {
            r.amt = std::clamp(lognormal(rng, std::log(40.0), 0.85), 1.0, 5000.0);
        }
        r.amt = std::round(r.amt * 100.0) / 100.0;

        double dist_km;
        if (fraud && u01(rng) < 0.75) {
            dist_km = 150.0 + exponential(rng, 450.0);
        } else if (u01(rng) < 0.04) {
            dist_km = uniform(rng, 100.0, 800.0); // occasional legitimate travel
        } else {
            dist_km = 0.3 + exponential(rng, 18.0);
        }
        destination(std::clamp(r.lat, -89.0, 89.0), r.lon, uniform(rng, 0.0, 2.0 * std::numbers::pi),
                    dist_km, r.merch_lat, r.merch_lon);
        r.lat = std::clamp(r.lat, -90.0, 90.0);

        int hour;
        if (fraud && u01(rng) < 0.7) {
            hour = static_cast<int>(pick(rng, 6)); // 00:00 - 05:59
        } else {
            hour = draw_hour_daytime(rng);
        }
        const long long day_offset = static_cast<long long>(pick(rng, 365));
        r.unix_time = kBaseTime + day_offset * 86400 + hour * 3600 +
                      static_cast<long long>(pick(rng, 60)) * 60 +
                      static_cast<long long>(pick(rng, 60));

        if (fraud && u01(rng) < 0.55) {
            r.category = kOnlineCategories[pick(rng, std::size(kOnlineCategories))];
        } else {
            r.category = kCategories[pick(rng, std::size(kCategories))];
        }
        r.job = kJobs[pick(rng, std::size(kJobs))];

        rows.push_back(std::move(r));
    }
    return rows;
}

} // namespace qfd::dataprep
