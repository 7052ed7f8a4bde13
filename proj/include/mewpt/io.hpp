#pragma once

// File I/O: impedance CSV ingestion (two accepted header forms), model JSON,
// run manifests for reproducibility, and atomic file writes.

#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "mewpt/bvd.hpp"
#include "mewpt/errors.hpp"
#include "mewpt/version.hpp"

namespace mewpt::io {

using json = nlohmann::json;

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream f(p, std::ios::binary);
    if (!f) throw input_error("cannot open file: " + p.string());
    std::ostringstream os;
    os << f.rdbuf();
    return os.str();
}

/// Write via a temp file in the same directory, then rename into place.
inline void atomic_write(const std::filesystem::path& p, const std::string& content) {
    namespace fs = std::filesystem;
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    const fs::path tmp = p.string() + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw input_error("cannot write file: " + tmp.string());
        f << content;
    }
    fs::rename(tmp, p);
}

/// Fixed significant-digit formatting for reproducible CSV bodies.
inline std::string fmt_g(double v, int significant = 9) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*g", significant, v);
    return buf;
}

inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

struct RunManifest {
    std::string command;
    std::vector<std::string> input_names;
    std::uint64_t input_hash = fnv1a64("");

    static RunManifest make(std::string cmd,
                            const std::vector<std::pair<std::string, std::string>>& inputs) {
        RunManifest m;
        m.command = std::move(cmd);
        std::string all;
        for (const auto& [name, content] : inputs) {
            m.input_names.push_back(name);
            all += name;
            all += '\0';
            all += content;
            all += '\0';
        }
        m.input_hash = fnv1a64(all);
        return m;
    }

    json to_json() const {
        char hex[32];
        std::snprintf(hex, sizeof(hex), "%016llx",
                      static_cast<unsigned long long>(input_hash));
        return json{{"tool", "mewpt"},
                    {"version", kVersion},
                    {"command", command},
                    {"inputs", input_names},
                    {"input_hash", std::string(hex)}};
    }

    /// One-line comment form for CSV artifacts.
    std::string comment_line() const {
        char hex[32];
        std::snprintf(hex, sizeof(hex), "%016llx",
                      static_cast<unsigned long long>(input_hash));
        std::string s = "# mewpt ";
        s += kVersion;
        s += " ";
        s += command;
        s += " inputs=";
        s += hex;
        return s;
    }
};

// ---------------------------------------------------------------------------
// Impedance CSV
//   freq_hz,z_re_ohm,z_im_ohm          (rectangular)
//   freq_hz,z_mag_ohm,z_phase_deg      (polar, auto-detected and converted)
// ---------------------------------------------------------------------------

namespace detail {
inline std::string trim_lower(std::string s) {
    std::string out;
    for (char c : s)
        if (!std::isspace(static_cast<unsigned char>(c)))
            out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}
inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    fields.push_back(cur);
    return fields;
}
}  // namespace detail

inline std::vector<ImpedanceSample> parse_impedance_csv(const std::string& text) {
    std::istringstream is(text);
    std::string line;
    int line_no = 0;
    bool header_seen = false;
    bool polar = false;
    std::vector<ImpedanceSample> out;
    while (std::getline(is, line)) {
        ++line_no;
        const std::string stripped = detail::trim_lower(line);
        if (stripped.empty() || stripped[0] == '#') continue;
        if (!header_seen) {
            if (stripped == "freq_hz,z_re_ohm,z_im_ohm") {
                polar = false;
            } else if (stripped == "freq_hz,z_mag_ohm,z_phase_deg") {
                polar = true;
            } else {
                throw input_error("impedance CSV line " + std::to_string(line_no) +
                                  ": unrecognized header '" + line + "'");
            }
            header_seen = true;
            continue;
        }
        const auto fields = detail::split_csv_line(line);
        if (fields.size() != 3)
            throw input_error("impedance CSV line " + std::to_string(line_no) +
                              ": expected 3 fields, got " + std::to_string(fields.size()));
        double v[3];
        for (int i = 0; i < 3; ++i) {
            try {
                std::size_t pos = 0;
                v[i] = std::stod(fields[i], &pos);
                while (pos < fields[i].size() &&
                       std::isspace(static_cast<unsigned char>(fields[i][pos])))
                    ++pos;
                if (pos != fields[i].size()) throw std::invalid_argument("trailing");
            } catch (const std::exception&) {
                throw input_error("impedance CSV line " + std::to_string(line_no) +
                                  ": field " + std::to_string(i + 1) + " is not a number: '" +
                                  fields[i] + "'");
            }
            if (!std::isfinite(v[i]))
                throw input_error("impedance CSV line " + std::to_string(line_no) +
                                  ": field " + std::to_string(i + 1) + " is not finite");
        }
        ImpedanceSample s;
        s.freq_hz = v[0];
        if (polar) {
            const double ph = v[2] * std::numbers::pi / 180.0;
            s.z_re_ohm = v[1] * std::cos(ph);
            s.z_im_ohm = v[1] * std::sin(ph);
        } else {
            s.z_re_ohm = v[1];
            s.z_im_ohm = v[2];
        }
        out.push_back(s);
    }
    if (!header_seen) throw input_error("impedance CSV: missing header line");
    return out;
}

// ---------------------------------------------------------------------------
// Model JSON
// ---------------------------------------------------------------------------

inline json model_to_json(const BvdModel& m, double residual = 0.0) {
    const CouplingReport cr = coupling_factor(m);
    const ResonancePair rf = resonance_frequencies(m);
    return json{{"v_s_amp_v", m.v_s_amp_v}, {"r_m_ohm", m.r_m_ohm}, {"l_m_h", m.l_m_h},
                {"c_m_f", m.c_m_f},         {"c_p_f", m.c_p_f},     {"coupling", cr.coupling},
                {"f_short_hz", rf.f_short_hz}, {"f_open_hz", rf.f_open_hz},
                {"residual", residual}};
}

inline BvdModel model_from_json(const json& j) {
    BvdModel m;
    try {
        m.v_s_amp_v = j.value("v_s_amp_v", 1.0);
        m.r_m_ohm = j.at("r_m_ohm").get<double>();
        m.l_m_h = j.at("l_m_h").get<double>();
        m.c_m_f = j.at("c_m_f").get<double>();
        m.c_p_f = j.at("c_p_f").get<double>();
    } catch (const json::exception& e) {
        throw input_error(std::string("model JSON: ") + e.what());
    }
    m.validate();
    return m;
}

inline BvdModel load_model(const std::filesystem::path& p) {
    json j;
    try {
        j = json::parse(read_file(p));
    } catch (const json::exception& e) {
        throw input_error("model JSON " + p.string() + ": " + e.what());
    }
    return model_from_json(j);
}

}  // namespace mewpt::io
