#pragma once

// Acceptance criteria A1-A10, shared by `evla validate` and the test suite.

#include <string>
#include <vector>

namespace evla {

struct CriterionResult {
    std::string id;       // "A1" .. "A10"
    std::string alias;    // short name accepted by --only
    bool passed = false;
    std::string summary;  // measured values against the limit
    std::vector<std::string> details;
    double seconds = 0;
};

struct AcceptanceOptions {
    int fd_base = 300;    // A5 coarse grid nr = nz
    int grid_refine = 2;  // A5 fine grid = fd_base * grid_refine
};

struct CriterionInfo {
    std::string id;
    std::string alias;
    std::string title;
};

const std::vector<CriterionInfo>& criteria();

/// Accepts an id ("A5", case-insensitive) or alias ("fluence-fd").
/// Throws ConfigError for unknown names.
const CriterionInfo& find_criterion(const std::string& name);

CriterionResult run_criterion(const std::string& name, const AcceptanceOptions& opt = {});

/// One line: id, PASS/FAIL, alias, summary, runtime.
std::string format_result(const CriterionResult& r);

}  // namespace evla
