// SPDX-License-Identifier: Apache-2.0
//
// mmw-sounding: 28 GHz channel-sounding analysis and beam-tracking simulation
// ------------------------------------------------------------------------

#pragma once

#include "core.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

namespace mmw::csv {

inline std::string_view trim(std::string_view s)
{
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' || s.back() == '\n'))
        s.remove_suffix(1);
    return s;
}

inline std::vector<std::string> split(std::string_view line, char sep = ',')
{
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        auto pos = line.find(sep, start);
        out.emplace_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos)
            break;
        start = pos + 1;
    }
    return out;
}

inline double to_double(std::string_view field)
{
    field = trim(field);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc{} || ptr != field.data() + field.size())
        throw Error(ErrorCode::MalformedField, "not a number: '" + std::string(field) + "'");
    return v;
}

inline long long to_int(std::string_view field)
{
    field = trim(field);
    long long v = 0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc{} || ptr != field.data() + field.size())
        throw Error(ErrorCode::MalformedField, "not an integer: '" + std::string(field) + "'");
    return v;
}

// Header-addressed table. Blank lines are skipped.
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::size_t column(std::string_view name) const
    {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name)
                return i;
        throw Error(ErrorCode::MalformedField, "missing column '" + std::string(name) + "'");
    }

    bool has_column(std::string_view name) const
    {
        for (const auto& h : header)
            if (h == name)
                return true;
        return false;
    }
};

inline Table read(std::istream& in)
{
    Table t;
    std::string line;
    bool have_header = false;
    while (std::getline(in, line)) {
        if (trim(line).empty())
            continue;
        auto fields = split(line);
        if (!have_header) {
            t.header = std::move(fields);
            have_header = true;
            continue;
        }
        if (fields.size() != t.header.size())
            throw Error(ErrorCode::MalformedField, "row has " + std::to_string(fields.size()) + " fields, header has " +
                                                       std::to_string(t.header.size()));
        t.rows.push_back(std::move(fields));
    }
    if (!have_header)
        throw Error(ErrorCode::MalformedField, "empty CSV");
    return t;
}

inline Table read_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw Error(ErrorCode::IoError, "cannot open " + path);
    return read(in);
}

// Shortest round-trippable decimal form; stable across runs and platforms
// sharing an IEEE-754 double.
inline std::string fmt(double v)
{
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

} // namespace mmw::csv
