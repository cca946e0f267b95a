#pragma once

#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace nct {

using json = nlohmann::json;

/// One verified inequality: passed iff measured <= bound (and both finite).
struct Check {
    std::string name;
    bool passed = false;
    double measured = 0.0;
    double bound = 0.0;
    double margin = 0.0; ///< bound - measured
    json details = json::object();
};

struct VerificationReport {
    std::string suite;
    std::uint64_t seed = 0;
    json parameters = json::object();
    std::vector<Check> checks;
    double timing_ms = 0.0;

    bool passed() const {
        for (const auto &c : checks)
            if (!c.passed)
                return false;
        return true;
    }

    Check &add_check(std::string name, double measured, double bound, json details = json::object()) {
        Check c;
        c.name = std::move(name);
        c.measured = measured;
        c.bound = bound;
        c.margin = bound - measured;
        c.passed = std::isfinite(measured) && std::isfinite(bound) && measured <= bound;
        c.details = std::move(details);
        checks.push_back(std::move(c));
        return checks.back();
    }

    /// Boolean check recorded as measured = 0 (ok) or 1 (failed) against bound 0.
    Check &add_flag(std::string name, bool ok, json details = json::object()) {
        return add_check(std::move(name), ok ? 0.0 : 1.0, 0.0, std::move(details));
    }

    void merge(const VerificationReport &other) {
        for (auto c : other.checks) {
            c.name = other.suite + "/" + c.name;
            checks.push_back(std::move(c));
        }
    }

    const Check *find(const std::string &name) const {
        for (const auto &c : checks)
            if (c.name == name)
                return &c;
        return nullptr;
    }
};

inline void to_json(json &j, const Check &c) {
    j = json{{"name", c.name},         {"status", c.passed ? "pass" : "fail"}, {"measured", c.measured},
             {"bound", c.bound},       {"margin", c.margin},                   {"details", c.details}};
}

inline void from_json(const json &j, Check &c) {
    c.name = j.at("name").get<std::string>();
    c.passed = j.at("status").get<std::string>() == "pass";
    c.measured = j.at("measured").get<double>();
    c.bound = j.at("bound").get<double>();
    c.margin = j.at("margin").get<double>();
    c.details = j.value("details", json::object());
}

inline void to_json(json &j, const VerificationReport &r) {
    j = json{{"suite", r.suite},
             {"seed", r.seed},
             {"status", r.passed() ? "pass" : "fail"},
             {"parameters", r.parameters},
             {"checks", r.checks},
             {"timing_ms", r.timing_ms}};
}

inline void from_json(const json &j, VerificationReport &r) {
    r.suite = j.at("suite").get<std::string>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.parameters = j.value("parameters", json::object());
    r.checks = j.at("checks").get<std::vector<Check>>();
    r.timing_ms = j.value("timing_ms", 0.0);
}

/// Report JSON with timing removed, for reproducibility comparisons.
inline std::string canonical_dump(const VerificationReport &r) {
    json j = r;
    j.erase("timing_ms");
    return j.dump(2);
}

inline std::string to_csv(const VerificationReport &r) {
    std::ostringstream os;
    os.precision(17);
    os << "suite,check,status,measured,bound,margin\n";
    for (const auto &c : r.checks)
        os << r.suite << ',' << c.name << ',' << (c.passed ? "pass" : "fail") << ',' << c.measured << ',' << c.bound
           << ',' << c.margin << '\n';
    return os.str();
}

inline std::string to_markdown(const VerificationReport &r) {
    std::ostringstream os;
    os.precision(6);
    os << "## " << r.suite << " (seed " << r.seed << "): " << (r.passed() ? "PASS" : "FAIL") << "\n\n";
    os << "| check | status | measured | bound | margin |\n|---|---|---|---|---|\n";
    for (const auto &c : r.checks)
        os << "| " << c.name << " | " << (c.passed ? "pass" : "fail") << " | " << c.measured << " | " << c.bound
           << " | " << c.margin << " |\n";
    return os.str();
}

} // namespace nct
