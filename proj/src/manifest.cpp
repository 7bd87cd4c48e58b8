#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "wawenet/errors.hpp"
#include "wawenet/io.hpp"
#include "wawenet/preprocess.hpp"

namespace wawenet {

std::string format_real(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

Split parse_split(const std::string& tag) {
    if (tag == "train") return Split::Train;
    if (tag == "val") return Split::Val;
    if (tag == "test") return Split::Test;
    if (tag == "unseen") return Split::Unseen;
    throw ParseError("unknown split tag '" + tag + "' (expected train|val|test|unseen)");
}

std::string split_name(Split s) {
    switch (s) {
        case Split::Train: return "train";
        case Split::Val: return "val";
        case Split::Test: return "test";
        case Split::Unseen: return "unseen";
    }
    return "?";
}

double Manifest::fraction(Split s) const {
    if (records.empty()) return 0.0;
    const auto n = std::count_if(records.begin(), records.end(),
                                 [&](const ManifestRecord& r) { return r.split == s; });
    return double(n) / double(records.size());
}

namespace {

std::vector<std::string> split_commas(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

[[noreturn]] void fail(const std::string& path, std::size_t line, const std::string& what) {
    throw ParseError(path + ":" + std::to_string(line) + ": " + what);
}

}  // namespace

Manifest manifest_load(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw Error("manifest_load: cannot open " + path);
    const std::filesystem::path base = std::filesystem::path(path).parent_path();

    std::vector<std::string> lines;
    std::string line;
    while (std::getline(f, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(line);
    }
    while (!lines.empty() && lines.back().empty()) lines.pop_back();
    if (lines.empty()) throw EmptyResult("manifest_load: " + path + " is empty");

    const std::vector<std::string> header = split_commas(lines[0]);
    if (header.size() < 3 || header[0] != "path" || header[1] != "condition" ||
        header[2] != "split")
        fail(path, 1, "header must start with path,condition,split");

    Manifest m;
    for (std::size_t c = 3; c < header.size(); ++c) {
        try {
            (void)find_target(header[c]);
        } catch (const InvalidConfig& e) {
            fail(path, 1, e.what());
        }
        if (std::count(m.target_names.begin(), m.target_names.end(), header[c]) > 0)
            fail(path, 1, "duplicate target column '" + header[c] + "'");
        m.target_names.push_back(header[c]);
    }

    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        const std::size_t line_no = i + 1;
        const std::vector<std::string> cols = split_commas(lines[i]);
        if (cols.size() != header.size())
            fail(path, line_no,
                 "expected " + std::to_string(header.size()) + " columns, found " +
                     std::to_string(cols.size()));

        ManifestRecord rec;
        std::filesystem::path p = cols[0];
        if (p.is_relative()) p = base / p;
        if (!std::filesystem::exists(p))
            fail(path, line_no, "segment file does not exist: " + p.string());
        rec.path = p.string();
        rec.condition = cols[1];
        try {
            rec.split = parse_split(cols[2]);
        } catch (const ParseError& e) {
            fail(path, line_no, e.what());
        }
        for (std::size_t c = 3; c < cols.size(); ++c) {
            char* end = nullptr;
            const double v = std::strtod(cols[c].c_str(), &end);
            if (end == cols[c].c_str() || *end != '\0')
                fail(path, line_no, "cannot parse target value '" + cols[c] + "'");
            if (v < -1.0 - 1e-9 || v > 1.0 + 1e-9)
                fail(path, line_no,
                     "target value " + cols[c] + " outside the scaled range [-1, 1]");
            rec.targets.push_back(std::clamp(v, -1.0, 1.0));
        }
        m.records.push_back(std::move(rec));
    }
    if (m.records.empty()) throw EmptyResult("manifest_load: " + path + " has no records");
    return m;
}

void manifest_save(const std::string& path, const Manifest& m) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw Error("manifest_save: cannot open " + path);
    f << "path,condition,split";
    for (const auto& name : m.target_names) f << ',' << name;
    f << '\n';
    for (const auto& rec : m.records) {
        if (rec.targets.size() != m.target_names.size())
            throw InvalidShape("manifest_save: record for " + rec.path + " carries " +
                               std::to_string(rec.targets.size()) + " targets, manifest names " +
                               std::to_string(m.target_names.size()));
        f << rec.path << ',' << rec.condition << ',' << split_name(rec.split);
        for (double v : rec.targets) f << ',' << format_real(v);
        f << '\n';
    }
    if (!f) throw Error("manifest_save: write failed for " + path);
}

}  // namespace wawenet
