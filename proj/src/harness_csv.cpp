#include "cesim/harness.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace cesim::harness {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    fields.push_back(cur);
    return fields;
}

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

double parse_double_field(const std::string& v, size_t lineno, const std::string& col,
                          std::vector<std::string>& errors) {
    try {
        size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        errors.push_back("line " + std::to_string(lineno) + ": column '" + col +
                         "' is not numeric ('" + v + "')");
        return 0.0;
    }
}

uint64_t parse_u64_field(const std::string& v, size_t lineno, const std::string& col,
                         std::vector<std::string>& errors) {
    try {
        size_t pos = 0;
        const uint64_t x = std::stoull(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        errors.push_back("line " + std::to_string(lineno) + ": column '" + col +
                         "' is not an integer ('" + v + "')");
        return 0;
    }
}

void require_unit_range(double v, size_t lineno, const std::string& col,
                        std::vector<std::string>& errors) {
    if (!(v >= 0.0 && v <= 1.0))
        errors.push_back("line " + std::to_string(lineno) + ": column '" + col + "' value " +
                         fmt_double(v) + " outside [0,1]");
}

[[noreturn]] void raise(const std::string& what, const std::vector<std::string>& errors) {
    std::string msg = what;
    for (const auto& e : errors) msg += "\n  " + e;
    throw IngestError(msg);
}

const std::vector<std::string> kCycleHeader = {"llm",         "cycle",
                                               "valid_rate",  "elite_concentration",
                                               "mean_quality", "admissions"};
const std::vector<std::string> kProxyHeader = {"llm", "arch_id", "dataset", "proxy_acc",
                                               "full_acc"};

std::vector<std::string> read_header(std::istream& in, const std::vector<std::string>& canon,
                                     const char* what) {
    std::string line;
    if (!std::getline(in, line)) throw IngestError(std::string(what) + ": empty file");
    auto fields = split_csv_line(line);
    if (fields.size() < canon.size())
        throw IngestError(std::string(what) + ": header has " + std::to_string(fields.size()) +
                          " columns, expected at least " + std::to_string(canon.size()));
    for (size_t i = 0; i < canon.size(); ++i)
        if (fields[i] != canon[i])
            throw IngestError(std::string(what) + ": header column " + std::to_string(i + 1) +
                              " is '" + fields[i] + "', expected '" + canon[i] + "'");
    return {fields.begin() + static_cast<std::ptrdiff_t>(canon.size()), fields.end()};
}

} // namespace

std::vector<CycleRecord> ingest_cycle_csv(std::istream& in) {
    const auto extra_cols = read_header(in, kCycleHeader, "cycle csv");
    std::vector<CycleRecord> records;
    std::vector<std::string> errors;
    std::string line;
    size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto f = split_csv_line(line);
        if (f.size() != kCycleHeader.size() + extra_cols.size()) {
            errors.push_back("line " + std::to_string(lineno) + ": expected " +
                             std::to_string(kCycleHeader.size() + extra_cols.size()) +
                             " fields, got " + std::to_string(f.size()));
            continue;
        }
        CycleRecord r;
        r.llm = f[0];
        r.cycle = parse_u64_field(f[1], lineno, "cycle", errors);
        r.valid_rate = parse_double_field(f[2], lineno, "valid_rate", errors);
        require_unit_range(r.valid_rate, lineno, "valid_rate", errors);
        if (!f[3].empty()) {
            r.elite_concentration = parse_double_field(f[3], lineno, "elite_concentration", errors);
            require_unit_range(*r.elite_concentration, lineno, "elite_concentration", errors);
        }
        if (!f[4].empty()) {
            r.mean_quality = parse_double_field(f[4], lineno, "mean_quality", errors);
            require_unit_range(*r.mean_quality, lineno, "mean_quality", errors);
        }
        r.admissions = parse_u64_field(f[5], lineno, "admissions", errors);
        for (size_t i = 0; i < extra_cols.size(); ++i)
            r.extras.emplace_back(extra_cols[i], f[kCycleHeader.size() + i]);
        records.push_back(std::move(r));
    }
    if (!errors.empty()) raise("cycle csv: malformed rows", errors);
    return records;
}

std::vector<CycleRecord> load_cycle_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IngestError("cannot open csv file: " + path);
    return ingest_cycle_csv(in);
}

void write_cycle_csv(std::ostream& out, std::span<const CycleRecord> records) {
    out << "llm,cycle,valid_rate,elite_concentration,mean_quality,admissions";
    if (!records.empty())
        for (const auto& [k, v] : records.front().extras) out << ',' << k;
    out << '\n';
    for (const auto& r : records) {
        out << r.llm << ',' << r.cycle << ',' << fmt_double(r.valid_rate) << ',';
        if (r.elite_concentration) out << fmt_double(*r.elite_concentration);
        out << ',';
        if (r.mean_quality) out << fmt_double(*r.mean_quality);
        out << ',' << r.admissions;
        for (const auto& [k, v] : r.extras) out << ',' << v;
        out << '\n';
    }
}

std::vector<ProxyPairRecord> ingest_proxy_csv(std::istream& in) {
    const auto extra_cols = read_header(in, kProxyHeader, "proxy csv");
    std::vector<ProxyPairRecord> records;
    std::vector<std::string> errors;
    std::string line;
    size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto f = split_csv_line(line);
        if (f.size() != kProxyHeader.size() + extra_cols.size()) {
            errors.push_back("line " + std::to_string(lineno) + ": expected " +
                             std::to_string(kProxyHeader.size() + extra_cols.size()) +
                             " fields, got " + std::to_string(f.size()));
            continue;
        }
        ProxyPairRecord r;
        r.llm = f[0];
        r.arch_id = f[1];
        r.dataset = f[2];
        r.proxy_acc = parse_double_field(f[3], lineno, "proxy_acc", errors);
        require_unit_range(r.proxy_acc, lineno, "proxy_acc", errors);
        r.full_acc = parse_double_field(f[4], lineno, "full_acc", errors);
        require_unit_range(r.full_acc, lineno, "full_acc", errors);
        for (size_t i = 0; i < extra_cols.size(); ++i)
            r.extras.emplace_back(extra_cols[i], f[kProxyHeader.size() + i]);
        records.push_back(std::move(r));
    }
    if (!errors.empty()) raise("proxy csv: malformed rows", errors);
    return records;
}

std::vector<ProxyPairRecord> load_proxy_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IngestError("cannot open csv file: " + path);
    return ingest_proxy_csv(in);
}

void write_proxy_csv(std::ostream& out, std::span<const ProxyPairRecord> records) {
    out << "llm,arch_id,dataset,proxy_acc,full_acc";
    if (!records.empty())
        for (const auto& [k, v] : records.front().extras) out << ',' << k;
    out << '\n';
    for (const auto& r : records) {
        out << r.llm << ',' << r.arch_id << ',' << r.dataset << ','
            << fmt_double(r.proxy_acc) << ',' << fmt_double(r.full_acc);
        for (const auto& [k, v] : r.extras) out << ',' << v;
        out << '\n';
    }
}

} // namespace cesim::harness
