#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "mpu/common.hpp"
#include "mpu/mp_model.hpp"
#include "mpu/rigidity.hpp"
#include "mpu/spectral.hpp"

namespace mpu {

using json = nlohmann::json;

inline std::uint64_t fnv1a64(const std::string& data) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string hash_hex(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

// Content hash of a config: canonical dump with volatile fields (output
// location, thread count) removed, so the hash identifies the experiment.
inline std::string config_hash(json cfg) {
    cfg.erase("out");
    cfg.erase("threads");
    return hash_hex(fnv1a64(cfg.dump()));
}

inline json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw data_error("cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw data_error("cannot parse " + path + ": " + e.what());
    }
    return j;
}

inline std::vector<json> load_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw data_error("cannot open " + path);
    std::vector<json> rows;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            rows.push_back(json::parse(line));
        } catch (const json::exception& e) {
            throw data_error(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return rows;
}

inline void write_spectrum_csv(const Spectrum& S, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw data_error("cannot write " + path);
    out << "j,lambda\n";
    char buf[64];
    for (int j = 0; j < S.values.size(); ++j) {
        std::snprintf(buf, sizeof buf, "%d,%.17g\n", j + 1, S.values[j]);
        out << buf;
    }
}

inline void write_locations_csv(const ClassicalLocations& locs,
                                const std::string& path) {
    std::ofstream out(path);
    if (!out) throw data_error("cannot write " + path);
    out << "j,gamma_j\n";
    char buf[64];
    for (int j = 0; j < locs.count; ++j) {
        std::snprintf(buf, sizeof buf, "%d,%.17g\n", j + 1,
                      locs.gamma[static_cast<std::size_t>(j)]);
        out << buf;
    }
}

inline void write_rigidity_csv(const RigidityReport& rep, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw data_error("cannot write " + path);
    out << "j,jtilde,lambda,gamma,raw_dev,normalized_dev\n";
    char buf[160];
    for (const RigidityRow& r : rep.rows) {
        std::snprintf(buf, sizeof buf, "%d,%d,%.17g,%.17g,%.17g,%.17g\n", r.j,
                      r.jtilde, r.lambda, r.gamma, r.raw_dev, r.normalized_dev);
        out << buf;
    }
}

}  // namespace mpu
