#pragma once

#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

namespace htype::jsonio {

// Deterministic JSON assembly: insertion-ordered keys, doubles printed with
// 17 significant digits, LF-only. Identical inputs produce identical bytes.
inline std::string format_double(double v) {
    if (std::isnan(v)) return "null";
    if (std::isinf(v)) return v > 0 ? "1e999" : "-1e999";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string escape(std::string_view s) {
    std::string out;
    out.reserve(s.size() + 2);
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            default:
                if (static_cast<unsigned char>(c) < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof buf, "\\u%04x", c);
                    out += buf;
                } else {
                    out += c;
                }
        }
    }
    return out;
}

class Object {
  public:
    Object& put(std::string_view key, double v) { return raw(key, format_double(v)); }
    Object& put(std::string_view key, int v) { return raw(key, std::to_string(v)); }
    Object& put(std::string_view key, long v) { return raw(key, std::to_string(v)); }
    Object& put(std::string_view key, uint64_t v) { return raw(key, std::to_string(v)); }
    Object& put(std::string_view key, bool v) { return raw(key, v ? "true" : "false"); }
    Object& put(std::string_view key, std::string_view v) {
        return raw(key, "\"" + escape(v) + "\"");
    }
    Object& put(std::string_view key, const char* v) { return put(key, std::string_view(v)); }
    Object& raw(std::string_view key, std::string_view serialized) {
        if (!body_.empty()) body_ += ",";
        body_ += "\"" + escape(key) + "\":";
        body_ += serialized;
        return *this;
    }
    std::string str() const { return "{" + body_ + "}"; }

  private:
    std::string body_;
};

class Array {
  public:
    Array& add(double v) { return raw(format_double(v)); }
    Array& add(std::string_view v) { return raw("\"" + escape(v) + "\""); }
    Array& raw(std::string_view serialized) {
        if (!body_.empty()) body_ += ",";
        body_ += serialized;
        return *this;
    }
    std::string str() const { return "[" + body_ + "]"; }

  private:
    std::string body_;
};

inline uint64_t fnv1a(std::string_view s) {
    uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

inline std::string digest_hex(std::string_view s) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, fnv1a(s));
    return buf;
}

// RFC-style CSV: quote fields containing separators or quotes, LF endings,
// mandatory header row.
class Csv {
  public:
    explicit Csv(std::vector<std::string> header) : cols_(header.size()) {
        row(std::move(header));
    }
    void row(const std::vector<std::string>& fields) {
        std::string line;
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i) line += ",";
            line += quote(fields[i]);
        }
        data_ += line + "\n";
    }
    void row_values(const std::vector<double>& vals) {
        std::vector<std::string> fields;
        fields.reserve(vals.size());
        for (double v : vals) fields.push_back(format_double(v));
        row(fields);
    }
    bool write(const std::string& path) const {
        std::ofstream out(path, std::ios::binary);
        if (!out) return false;
        out << data_;
        return static_cast<bool>(out);
    }
    const std::string& str() const { return data_; }

  private:
    static std::string quote(const std::string& f) {
        if (f.find_first_of(",\"\n") == std::string::npos) return f;
        std::string out = "\"";
        for (char c : f) {
            if (c == '"') out += "\"\"";
            else out += c;
        }
        return out + "\"";
    }
    std::size_t cols_;
    std::string data_;
};

}  // namespace htype::jsonio
