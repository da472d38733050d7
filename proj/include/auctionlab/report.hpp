#pragma once

#include <cstdio>
#include <string>
#include <string_view>

namespace auctionlab {

// Fixed-width-free, locale-free float rendering for reports.  Every number
// printed by the CLI goes through this so identical inputs yield byte
// identical reports; negative zero is normalized away.
inline std::string fmt_num(double v) {
    if (v == 0.0) v = 0.0;
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

// Line-oriented report accumulator.  Records are plain `key: value` lines
// or space-separated positional rows; no timestamps, no pointers, nothing
// run-dependent ever enters the text.
class Report {
public:
    void raw(std::string_view line) {
        text_ += line;
        text_ += '\n';
    }

    void kv(std::string_view key, std::string_view value) {
        text_ += key;
        text_ += ": ";
        text_ += value;
        text_ += '\n';
    }

    void kv(std::string_view key, const char* value) {
        kv(key, std::string_view(value));
    }
    void kv(std::string_view key, double value) { kv(key, fmt_num(value)); }
    void kv(std::string_view key, int value) {
        kv(key, std::to_string(value));
    }
    void kv(std::string_view key, long value) {
        kv(key, std::to_string(value));
    }
    void kv(std::string_view key, long long value) {
        kv(key, std::to_string(value));
    }
    void kv(std::string_view key, unsigned long value) {
        kv(key, std::to_string(value));
    }
    void kv(std::string_view key, unsigned long long value) {
        kv(key, std::to_string(value));
    }

    const std::string& text() const { return text_; }

private:
    std::string text_;
};

}  // namespace auctionlab
