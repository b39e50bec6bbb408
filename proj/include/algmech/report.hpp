#pragma once

#include "algmech/core.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace algmech {

/// One sampled check: the worst residual seen, and where it exceeded the tolerance.
struct CheckResult {
    static constexpr std::size_t max_offending = 5;

    std::string name;
    double max_residual = 0.0;
    double tolerance = 0.0;
    bool passed = true;
    std::vector<ChartPoint> offending;
    std::string detail;

    CheckResult() = default;
    CheckResult(std::string n, double tol) : name(std::move(n)), tolerance(tol) {}

    void record(double residual, const ChartPoint& at) {
        const bool bad = !(residual <= tolerance);
        if (!std::isfinite(residual)) {
            max_residual = std::numeric_limits<double>::infinity();
        } else {
            max_residual = std::max(max_residual, residual);
        }
        if (bad) {
            passed = false;
            if (offending.size() < max_offending) offending.push_back(at);
        }
    }

    void fail(const std::string& why) {
        passed = false;
        if (detail.empty()) detail = why;
    }
};

struct Report {
    std::vector<CheckResult> checks;

    bool passed() const {
        return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
    }

    const CheckResult* first_failure() const {
        for (const auto& c : checks)
            if (!c.passed) return &c;
        return nullptr;
    }

    const CheckResult* find(const std::string& name) const {
        for (const auto& c : checks)
            if (c.name == name) return &c;
        return nullptr;
    }

    CheckResult& add(CheckResult c) {
        checks.push_back(std::move(c));
        return checks.back();
    }

    void append(const Report& other) { checks.insert(checks.end(), other.checks.begin(), other.checks.end()); }
};

/// Raised when a hypothesis of the reduction theorems fails; carries the failing check.
class HypothesisError : public Error {
public:
    explicit HypothesisError(CheckResult c) : Error(message_for(c)), check(std::move(c)) {}
    CheckResult check;

private:
    static std::string message_for(const CheckResult& c) {
        std::string m = "hypothesis failed: " + c.name;
        if (!c.detail.empty()) m += " (" + c.detail + ")";
        return m;
    }
};

using Json = nlohmann::ordered_json;

inline Json to_json(const Vector& v) {
    Json a = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
}

inline Json to_json(const Matrix& m) {
    Json a = Json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        Json row = Json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        a.push_back(row);
    }
    return a;
}

inline Json to_json(const CheckResult& c) {
    Json j;
    j["name"] = c.name;
    // JSON has no infinity; a non-finite residual is reported as null.
    if (std::isfinite(c.max_residual))
        j["max_residual"] = c.max_residual;
    else
        j["max_residual"] = nullptr;
    j["tolerance"] = c.tolerance;
    j["passed"] = c.passed;
    Json pts = Json::array();
    for (const auto& p : c.offending) pts.push_back(to_json(Vector(p)));
    j["offending_points"] = pts;
    if (!c.detail.empty()) j["detail"] = c.detail;
    return j;
}

inline Json to_json(const Report& r) {
    Json j;
    j["passed"] = r.passed();
    const CheckResult* f = r.first_failure();
    if (f)
        j["first_failure"] = f->name;
    else
        j["first_failure"] = nullptr;
    Json checks = Json::array();
    for (const auto& c : r.checks) checks.push_back(to_json(c));
    j["checks"] = checks;
    return j;
}

}  // namespace algmech
