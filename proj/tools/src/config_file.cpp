#include "fedcurr/cli/config_file.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <sstream>

#include "fedcurr/error.hpp"

namespace fedcurr::cli {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::string qualified(std::string_view section, std::string_view key) {
    return section.empty() ? std::string(key) : std::string(section) + "." + std::string(key);
}

}  // namespace

ConfigFile ConfigFile::parse(std::istream& is, std::string source) {
    ConfigFile cfg;
    cfg.source_ = std::move(source);
    cfg.sections_[""];
    std::string current;
    std::string raw;
    int line_no = 0;
    while (std::getline(is, raw)) {
        ++line_no;
        std::string_view line = raw;
        if (const auto c = line.find_first_of("#;"); c != std::string_view::npos) line = line.substr(0, c);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError(cfg.located(line_no, "unterminated section header"), line_no);
            current = std::string(trim(line.substr(1, line.size() - 2)));
            if (current.empty()) throw ConfigError(cfg.located(line_no, "empty section name"), line_no);
            if (cfg.sections_.count(current) != 0)
                throw ConfigError(cfg.located(line_no, "duplicate section [" + current + "]"), line_no);
            cfg.sections_[current].line = line_no;
            cfg.order_.push_back(current);
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError(cfg.located(line_no, "expected 'key = value'"), line_no);
        const std::string key(trim(line.substr(0, eq)));
        if (key.empty()) throw ConfigError(cfg.located(line_no, "missing key before '='"), line_no);
        auto& entries = cfg.sections_[current].entries;
        if (entries.count(key) != 0)
            throw ConfigError(cfg.located(line_no, "duplicate key '" + qualified(current, key) + "'"), line_no);
        entries[key] = Entry{std::string(trim(line.substr(eq + 1))), line_no};
    }
    return cfg;
}

ConfigFile ConfigFile::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
    return parse(in, path.string());
}

std::string ConfigFile::located(int line, const std::string& message) const {
    return line > 0 ? source_ + ":" + std::to_string(line) + ": " + message : source_ + ": " + message;
}

bool ConfigFile::has_section(std::string_view section) const { return sections_.find(section) != sections_.end(); }

const ConfigFile::Entry* ConfigFile::find(std::string_view section, std::string_view key) const {
    const auto s = sections_.find(section);
    if (s == sections_.end()) return nullptr;
    const auto e = s->second.entries.find(key);
    return e == s->second.entries.end() ? nullptr : &e->second;
}

bool ConfigFile::has(std::string_view section, std::string_view key) const { return find(section, key) != nullptr; }

int ConfigFile::line_of(std::string_view section, std::string_view key) const {
    if (const Entry* e = find(section, key)) return e->line;
    const auto s = sections_.find(section);
    return s == sections_.end() ? 0 : s->second.line;
}

const ConfigFile::Entry& ConfigFile::require(std::string_view section, std::string_view key) const {
    if (const Entry* e = find(section, key)) return *e;
    const int line = line_of(section, key);
    throw ConfigError(located(line, "missing required key '" + qualified(section, key) + "'"), line);
}

void ConfigFile::fail(const Entry& e, std::string_view section, std::string_view key, const std::string& what) const {
    throw ConfigError(located(e.line, "'" + qualified(section, key) + "' " + what + ", got '" + e.value + "'"), e.line);
}

std::string ConfigFile::get_string(std::string_view section, std::string_view key) const {
    const Entry& e = require(section, key);
    if (e.value.empty()) fail(e, section, key, "must not be empty");
    return e.value;
}

std::string ConfigFile::get_string(std::string_view section, std::string_view key, std::string fallback) const {
    return has(section, key) ? get_string(section, key) : fallback;
}

double ConfigFile::get_real(std::string_view section, std::string_view key) const {
    const Entry& e = require(section, key);
    std::istringstream ss(e.value);
    double v = 0.0;
    if (!(ss >> v) || !(ss >> std::ws).eof()) fail(e, section, key, "must be a number");
    return v;
}

double ConfigFile::get_real(std::string_view section, std::string_view key, double fallback) const {
    return has(section, key) ? get_real(section, key) : fallback;
}

std::size_t ConfigFile::get_count(std::string_view section, std::string_view key) const {
    const Entry& e = require(section, key);
    std::size_t v = 0;
    const auto* end = e.value.data() + e.value.size();
    const auto [ptr, ec] = std::from_chars(e.value.data(), end, v);
    if (ec != std::errc() || ptr != end) fail(e, section, key, "must be a nonnegative integer");
    return v;
}

std::size_t ConfigFile::get_count(std::string_view section, std::string_view key, std::size_t fallback) const {
    return has(section, key) ? get_count(section, key) : fallback;
}

std::uint64_t ConfigFile::get_u64(std::string_view section, std::string_view key, std::uint64_t fallback) const {
    const Entry* e = find(section, key);
    if (e == nullptr) return fallback;
    std::uint64_t v = 0;
    const auto* end = e->value.data() + e->value.size();
    const auto [ptr, ec] = std::from_chars(e->value.data(), end, v);
    if (ec != std::errc() || ptr != end) fail(*e, section, key, "must be a nonnegative integer");
    return v;
}

bool ConfigFile::get_bool(std::string_view section, std::string_view key, bool fallback) const {
    const Entry* e = find(section, key);
    if (e == nullptr) return fallback;
    if (e->value == "true" || e->value == "yes" || e->value == "1") return true;
    if (e->value == "false" || e->value == "no" || e->value == "0") return false;
    fail(*e, section, key, "must be true or false");
}

std::vector<std::string> ConfigFile::get_list(std::string_view section, std::string_view key) const {
    const Entry& e = require(section, key);
    std::vector<std::string> out;
    std::string_view rest = e.value;
    while (true) {
        const auto comma = rest.find(',');
        const auto item = trim(rest.substr(0, comma));
        if (item.empty()) fail(e, section, key, "must be a comma-separated list without empty items");
        out.emplace_back(item);
        if (comma == std::string_view::npos) break;
        rest = rest.substr(comma + 1);
    }
    return out;
}

void ConfigFile::require_known(std::string_view section, std::initializer_list<std::string_view> known) const {
    const auto s = sections_.find(section);
    if (s == sections_.end()) return;
    for (const auto& [key, entry] : s->second.entries) {
        bool ok = false;
        for (auto k : known) ok = ok || k == key;
        if (!ok)
            throw ConfigError(located(entry.line, "unknown key '" + qualified(section, key) + "'"), entry.line);
    }
}

}  // namespace fedcurr::cli
