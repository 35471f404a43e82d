#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <initializer_list>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace fedcurr::cli {

/// Sectioned `key = value` text. '#' and ';' start comments, keys outside a
/// section header live in section "". Every accessor error is a ConfigError
/// carrying the line of the offending entry (or of the section header).
class ConfigFile {
public:
    static ConfigFile parse(std::istream& is, std::string source = "<config>");
    static ConfigFile load(const std::filesystem::path& path);

    const std::string& source() const noexcept { return source_; }
    /// Section names in file order.
    const std::vector<std::string>& sections() const noexcept { return order_; }
    bool has_section(std::string_view section) const;
    bool has(std::string_view section, std::string_view key) const;
    int line_of(std::string_view section, std::string_view key) const;

    std::string get_string(std::string_view section, std::string_view key) const;
    std::string get_string(std::string_view section, std::string_view key, std::string fallback) const;
    double get_real(std::string_view section, std::string_view key) const;
    double get_real(std::string_view section, std::string_view key, double fallback) const;
    std::size_t get_count(std::string_view section, std::string_view key) const;
    std::size_t get_count(std::string_view section, std::string_view key, std::size_t fallback) const;
    std::uint64_t get_u64(std::string_view section, std::string_view key, std::uint64_t fallback) const;
    bool get_bool(std::string_view section, std::string_view key, bool fallback) const;
    /// Comma-separated list, items trimmed, empty items rejected.
    std::vector<std::string> get_list(std::string_view section, std::string_view key) const;

    /// Rejects keys of `section` that are not in `known` (catches typos).
    void require_known(std::string_view section, std::initializer_list<std::string_view> known) const;

    /// "<source>:<line>: message" (line omitted when 0).
    std::string located(int line, const std::string& message) const;

private:
    struct Entry {
        std::string value;
        int line = 0;
    };
    struct Section {
        int line = 0;
        std::map<std::string, Entry, std::less<>> entries;
    };

    const Entry& require(std::string_view section, std::string_view key) const;
    const Entry* find(std::string_view section, std::string_view key) const;
    [[noreturn]] void fail(const Entry& e, std::string_view section, std::string_view key,
                           const std::string& what) const;

    std::string source_;
    std::map<std::string, Section, std::less<>> sections_;
    std::vector<std::string> order_;
};

}  // namespace fedcurr::cli
