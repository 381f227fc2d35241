#pragma once

#include <charconv>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "kotta/csv.hpp"
#include "kotta/error.hpp"

namespace kotta {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string> split_words(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t') ++j;
    if (j > i) out.emplace_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

inline std::optional<double> parse_double(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  // std::from_chars for double is available in libstdc++ 11.
  double v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

inline std::optional<std::int64_t> parse_int(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

// One `key = value` line.
struct ConfigEntry {
  std::string key;
  std::string value;
  std::size_t line = 0;
};

// Line-oriented sectioned key/value text:
//
//   # comment
//   [section]
//   key = value        # trailing comments are allowed
//   key = value        # keys may repeat (see all())
//
// Every lookup error names the file and line.
class ConfigFile {
 public:
  class Section {
   public:
    Section(const ConfigFile* file, std::string name) : file_(file), name_(std::move(name)) {}

    const std::string& name() const noexcept { return name_; }
    const std::vector<ConfigEntry>& entries() const noexcept { return entries_; }

    bool has(std::string_view key) const { return find(key) != nullptr; }

    const ConfigEntry* find(std::string_view key) const {
      const ConfigEntry* hit = nullptr;
      for (const auto& e : entries_) {
        if (e.key == key) hit = &e;
      }
      return hit;
    }

    std::vector<ConfigEntry> all(std::string_view key) const {
      std::vector<ConfigEntry> out;
      for (const auto& e : entries_) {
        if (e.key == key) out.push_back(e);
      }
      return out;
    }

    const ConfigEntry& require(std::string_view key) const {
      const auto* e = find(key);
      if (!e) {
        throw ConfigError(file_->path() + ": missing key '" + std::string(key) + "' in [" + name_ + "]");
      }
      return *e;
    }

    std::string string(std::string_view key, std::string fallback) const {
      const auto* e = find(key);
      return e ? e->value : std::move(fallback);
    }

    std::string string(std::string_view key) const { return require(key).value; }

    double number(std::string_view key) const {
      const auto& e = require(key);
      auto v = parse_double(e.value);
      if (!v) throw error_at(e, "expected a number for '" + e.key + "', got '" + e.value + "'");
      return *v;
    }

    double number(std::string_view key, double fallback) const {
      return has(key) ? number(key) : fallback;
    }

    std::int64_t integer(std::string_view key) const {
      const auto& e = require(key);
      auto v = parse_int(e.value);
      if (!v) throw error_at(e, "expected an integer for '" + e.key + "', got '" + e.value + "'");
      return *v;
    }

    std::int64_t integer(std::string_view key, std::int64_t fallback) const {
      return has(key) ? integer(key) : fallback;
    }

    bool boolean(std::string_view key, bool fallback) const {
      const auto* e = find(key);
      if (!e) return fallback;
      if (e->value == "true" || e->value == "yes" || e->value == "1") return true;
      if (e->value == "false" || e->value == "no" || e->value == "0") return false;
      throw error_at(*e, "expected true/false for '" + e->key + "', got '" + e->value + "'");
    }

    std::vector<double> numbers(std::string_view key) const {
      const auto& e = require(key);
      std::vector<double> out;
      for (const auto& w : split_words(e.value)) {
        auto v = parse_double(w);
        if (!v) throw error_at(e, "expected numbers for '" + e.key + "', got '" + w + "'");
        out.push_back(*v);
      }
      return out;
    }

    ConfigError error_at(const ConfigEntry& e, const std::string& message) const {
      return ConfigError(file_->path() + ":" + std::to_string(e.line) + ": " + message);
    }

   private:
    friend class ConfigFile;
    const ConfigFile* file_;
    std::string name_;
    std::vector<ConfigEntry> entries_;
  };

  static ConfigFile parse(std::string_view text, std::string path) {
    ConfigFile file;
    file.path_ = std::move(path);
    Section* current = nullptr;
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
      auto end = text.find('\n', start);
      if (end == std::string_view::npos) end = text.size();
      std::string_view line = text.substr(start, end - start);
      start = end + 1;
      ++line_no;
      if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
      line = trim(line);
      if (line.empty()) {
        if (end == text.size()) break;
        continue;
      }
      if (line.front() == '[') {
        if (line.back() != ']' || line.size() < 3) {
          throw ConfigError(file.path_ + ":" + std::to_string(line_no) + ": malformed section header");
        }
        std::string name(trim(line.substr(1, line.size() - 2)));
        if (file.index_.count(name)) {
          throw ConfigError(file.path_ + ":" + std::to_string(line_no) + ": duplicate section [" + name + "]");
        }
        file.index_[name] = file.sections_.size();
        file.sections_.emplace_back(&file, name);
        current = &file.sections_.back();
      } else {
        auto eq = line.find('=');
        if (eq == std::string_view::npos) {
          throw ConfigError(file.path_ + ":" + std::to_string(line_no) + ": expected 'key = value'");
        }
        if (!current) {
          throw ConfigError(file.path_ + ":" + std::to_string(line_no) + ": key outside of any section");
        }
        ConfigEntry entry{std::string(trim(line.substr(0, eq))), std::string(trim(line.substr(eq + 1))), line_no};
        if (entry.key.empty()) {
          throw ConfigError(file.path_ + ":" + std::to_string(line_no) + ": empty key");
        }
        current->entries_.push_back(std::move(entry));
      }
      if (end == text.size()) break;
    }
    return file;
  }

  static ConfigFile load(const std::string& path) { return parse(read_text_file(path), path); }

  ConfigFile() = default;
  ConfigFile(const ConfigFile& other) { *this = other; }
  ConfigFile& operator=(const ConfigFile& other) {
    path_ = other.path_;
    index_ = other.index_;
    sections_ = other.sections_;
    for (auto& s : sections_) s.file_ = this;
    return *this;
  }
  ConfigFile(ConfigFile&& other) noexcept { *this = std::move(other); }
  ConfigFile& operator=(ConfigFile&& other) noexcept {
    path_ = std::move(other.path_);
    index_ = std::move(other.index_);
    sections_ = std::move(other.sections_);
    for (auto& s : sections_) s.file_ = this;
    return *this;
  }

  const std::string& path() const noexcept { return path_; }

  bool has(std::string_view section) const { return index_.count(std::string(section)) > 0; }

  const Section& section(std::string_view name) const {
    auto it = index_.find(std::string(name));
    if (it == index_.end()) throw ConfigError(path_ + ": missing section [" + std::string(name) + "]");
    return sections_[it->second];
  }

  // Empty section when absent, so optional sections read their defaults.
  const Section& section_or_empty(std::string_view name) const {
    auto it = index_.find(std::string(name));
    if (it == index_.end()) {
      empty_ = Section(this, std::string(name));
      return empty_;
    }
    return sections_[it->second];
  }

 private:
  std::string path_;
  std::map<std::string, std::size_t> index_;
  std::vector<Section> sections_;
  mutable Section empty_{nullptr, ""};
};

}  // namespace kotta
