#ifndef RSTR_VERIFICATION_ACCEPTANCE_HPP
#define RSTR_VERIFICATION_ACCEPTANCE_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace rstr::verify {

struct Options {
    std::uint64_t seed = 1;
    int jobs = 1;
    // Extra feature file to push through the loader check.
    std::optional<std::string> fixture;
};

struct CheckResult {
    std::string id;    // "C1" .. "C11", "L1"
    std::string name;
    bool passed = false;
    std::string detail;
    double seconds = 0.0;
    double budget_seconds = 0.0;
};

struct Check {
    std::string id;
    std::string name;
    double budget_seconds;
    std::function<CheckResult(const Options&)> run;
};

/// Every acceptance check in id order.
const std::vector<Check>& checks();

/// Runs one check, timing it and failing it on an exception or a blown budget.
CheckResult run_check(const Check& check, const Options& options);

std::vector<CheckResult> run_all(const Options& options,
                                 const std::function<void(const CheckResult&)>& on_result = {});

/// "PASS C3 ialm matches least squares (12.1s / 60s): max |dP| = 3.1e-09"
std::string format_line(const CheckResult& r);

}  // namespace rstr::verify

#endif  // RSTR_VERIFICATION_ACCEPTANCE_HPP
