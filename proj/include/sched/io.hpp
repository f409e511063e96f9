#pragma once

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "sched/model.hpp"

namespace sched::io {

// Shortest decimal string that round-trips the exact double.
inline std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

// Fixed 12 significant digits, the pinned precision for trace timestamps.
inline std::string format_time(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

inline std::ofstream open_out(const std::string& path) {
    std::ofstream f(path);
    if (!f) throw IoError("cannot open for writing: " + path);
    return f;
}

inline std::ifstream open_in(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open for reading: " + path);
    return f;
}

inline Instance sorted_copy(const Instance& inst) {
    Instance out = inst;
    out.sort_jobs();
    return out;
}

inline void write_instance_csv(std::ostream& os, const Instance& inst) {
    Instance s = sorted_copy(inst);
    os << "id,arrival,workload,weight\n";
    for (const auto& j : s.jobs)
        os << j.id << ',' << format_double(j.arrival) << ','
           << format_double(j.workload) << ',' << format_double(j.weight)
           << '\n';
}

inline void write_instance_jsonl(std::ostream& os, const Instance& inst) {
    Instance s = sorted_copy(inst);
    for (const auto& j : s.jobs) {
        nlohmann::json o;
        o["id"] = j.id;
        o["arrival"] = j.arrival;
        o["workload"] = j.workload;
        o["weight"] = j.weight;
        os << o.dump() << '\n';
    }
}

namespace detail {

inline std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

inline double parse_num(const std::string& s, std::size_t lineno) {
    try {
        std::size_t used = 0;
        double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw IoError("line " + std::to_string(lineno) + ": bad number '" + s +
                      "'");
    }
}

inline int parse_int(const std::string& s, std::size_t lineno) {
    try {
        std::size_t used = 0;
        int v = std::stoi(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw IoError("line " + std::to_string(lineno) + ": bad integer '" + s +
                      "'");
    }
}

}  // namespace detail

inline Instance read_instance_csv(std::istream& is, const std::string& name) {
    Instance inst;
    inst.meta["source"] = name;
    std::string line;
    std::size_t lineno = 0;
    if (!std::getline(is, line)) throw IoError(name + ": empty file");
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "id,arrival,workload,weight")
        throw IoError(name + ": unexpected header '" + line + "'");
    while (std::getline(is, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto cols = detail::split(line, ',');
        if (cols.size() != 4)
            throw IoError(name + ": line " + std::to_string(lineno) +
                          ": expected 4 columns");
        Job j;
        j.id = detail::parse_int(cols[0], lineno);
        j.arrival = detail::parse_num(cols[1], lineno);
        j.workload = detail::parse_num(cols[2], lineno);
        j.weight = detail::parse_num(cols[3], lineno);
        inst.jobs.push_back(j);
    }
    return inst;
}

inline Instance read_instance_jsonl(std::istream& is, const std::string& name) {
    Instance inst;
    inst.meta["source"] = name;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        nlohmann::json o = nlohmann::json::parse(line, nullptr, false);
        if (o.is_discarded() || !o.is_object())
            throw IoError(name + ": line " + std::to_string(lineno) +
                          ": not a JSON object");
        for (const char* key : {"id", "arrival", "workload", "weight"})
            if (!o.contains(key))
                throw IoError(name + ": line " + std::to_string(lineno) +
                              ": missing key '" + key + "'");
        Job j;
        try {
            j.id = o["id"].get<int>();
            j.arrival = o["arrival"].get<double>();
            j.workload = o["workload"].get<double>();
            j.weight = o["weight"].get<double>();
        } catch (const nlohmann::json::exception& e) {
            throw IoError(name + ": line " + std::to_string(lineno) + ": " +
                          e.what());
        }
        inst.jobs.push_back(j);
    }
    return inst;
}

inline bool looks_like_jsonl(const std::string& path) {
    if (path.size() >= 6 && path.substr(path.size() - 6) == ".jsonl") return true;
    if (path.size() >= 5 && path.substr(path.size() - 5) == ".json") return true;
    return false;
}

inline Instance read_instance(const std::string& path) {
    auto f = open_in(path);
    return looks_like_jsonl(path) ? read_instance_jsonl(f, path)
                                  : read_instance_csv(f, path);
}

inline void write_instance(const std::string& path, const Instance& inst) {
    auto f = open_out(path);
    if (looks_like_jsonl(path))
        write_instance_jsonl(f, inst);
    else
        write_instance_csv(f, inst);
    if (!f) throw IoError("write failed: " + path);
}

inline void write_trace_csv(std::ostream& os, const ScheduleTrace& trace) {
    os << "event,time,job_id,machine\n";
    for (const auto& e : trace.events)
        os << to_string(e.kind) << ',' << format_time(e.time) << ',' << e.job_id
           << ',' << e.machine << '\n';
}

inline void write_trace_jsonl(std::ostream& os, const ScheduleTrace& trace) {
    for (const auto& e : trace.events) {
        nlohmann::json o;
        o["event"] = to_string(e.kind);
        o["time"] = e.time;
        o["job_id"] = e.job_id;
        o["machine"] = e.machine;
        os << o.dump() << '\n';
    }
}

inline void write_trace(const std::string& path, const ScheduleTrace& trace) {
    auto f = open_out(path);
    if (looks_like_jsonl(path))
        write_trace_jsonl(f, trace);
    else
        write_trace_csv(f, trace);
    if (!f) throw IoError("write failed: " + path);
}

inline nlohmann::json read_config(const std::string& path) {
    auto f = open_in(path);
    nlohmann::json cfg = nlohmann::json::parse(f, nullptr, false);
    if (cfg.is_discarded() || !cfg.is_object())
        throw IoError(path + ": not a JSON object");
    return cfg;
}

}  // namespace sched::io
