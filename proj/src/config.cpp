#include "qsbs/config.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace qsbs {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

}  // namespace

std::map<std::string, std::string> read_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file '" + path + "'");
    std::map<std::string, std::string> entries;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string text = trim(line);
        if (text.empty()) continue;
        const std::size_t eq = text.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("config line " + std::to_string(line_no) +
                                     " is not 'key = value'");
        const std::string key = trim(text.substr(0, eq));
        const std::string value = trim(text.substr(eq + 1));
        if (key.empty()) throw std::runtime_error("empty key at config line " + std::to_string(line_no));
        entries[key] = value;
    }
    return entries;
}

std::vector<double> parse_number_list(const std::string& text) {
    std::vector<double> out;
    const std::string s = trim(text);
    if (s.empty()) return out;
    if (s.find(':') != std::string::npos) {
        double start = 0.0, stop = 0.0, step = 0.0;
        if (std::sscanf(s.c_str(), "%lf:%lf:%lf", &start, &stop, &step) != 3 || step <= 0.0)
            throw std::invalid_argument("range must be 'start:stop:step' with positive step: '" +
                                        s + "'");
        for (double v = start; v <= stop + 1e-9 * step; v += step)
            out.push_back(std::round(v * 1e9) / 1e9);  // keep grid points exact-ish
        return out;
    }
    std::size_t pos = 0;
    while (pos <= s.size()) {
        const std::size_t comma = s.find(',', pos);
        const std::string token =
            trim(s.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos));
        if (!token.empty()) {
            std::size_t used = 0;
            double v = std::stod(token, &used);
            if (used != token.size())
                throw std::invalid_argument("not a number: '" + token + "'");
            out.push_back(v);
        }
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return out;
}

std::vector<std::string> parse_name_list(const std::string& text) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t comma = text.find(',', pos);
        const std::string token =
            trim(text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos));
        if (!token.empty()) out.push_back(token);
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return out;
}

Kind parse_family_kind(const std::string& name) {
    if (name == "normal") return Kind::Normal;
    if (name == "cn" || name == "contaminated-normal") return Kind::ContaminatedNormal;
    if (name == "slash" || name == "sl") return Kind::Slash;
    if (name == "t" || name == "student-t") return Kind::StudentT;
    throw std::invalid_argument("unknown family '" + name +
                                "' (expected normal, cn, slash or t)");
}

std::vector<MixtureFamily> default_nu_grid(Kind kind) {
    switch (kind) {
        case Kind::Normal:
            return {MixtureFamily::normal()};
        case Kind::StudentT:
            return build_nu_grid(kind, "2:30:1", "");
        case Kind::Slash:
            return build_nu_grid(kind, "1.5:10:0.5", "");
        case Kind::ContaminatedNormal:
            return build_nu_grid(kind, "0.01:0.5:0.01", "0.02:0.9:0.04");
    }
    return {};
}

std::vector<MixtureFamily> build_nu_grid(Kind kind, const std::string& nu_text,
                                         const std::string& delta_text) {
    if (kind == Kind::Normal) return {MixtureFamily::normal()};
    if (trim(nu_text).empty()) return default_nu_grid(kind);
    const std::vector<double> nus = parse_number_list(nu_text);
    std::vector<MixtureFamily> grid;
    if (kind == Kind::ContaminatedNormal) {
        const std::vector<double> deltas =
            trim(delta_text).empty() ? parse_number_list("0.02:0.9:0.04")
                                     : parse_number_list(delta_text);
        for (double nu : nus)
            for (double delta : deltas)
                grid.push_back(MixtureFamily::contaminated_normal(nu, delta));
        return grid;
    }
    for (double nu : nus)
        grid.push_back(kind == Kind::Slash ? MixtureFamily::slash(nu)
                                           : MixtureFamily::student_t(nu));
    return grid;
}

std::string config_hash(const std::map<std::string, std::string>& entries) {
    std::uint64_t h = 1469598103934665603ULL;
    auto mix = [&h](const std::string& s) {
        for (unsigned char c : s) {
            h ^= c;
            h *= 1099511628211ULL;
        }
    };
    for (const auto& [key, value] : entries) {
        mix(key);
        mix("=");
        mix(value);
        mix("\n");
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace qsbs
