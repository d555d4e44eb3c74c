#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace kpp::accept {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    double seconds = 0.0;
    double budget = 0.0;
    std::string detail;
};

/// Runs criteria 1-12 (or only `only` when it is in range).
std::vector<CriterionResult> run_all(int only = 0);

/// One line per criterion: "criterion N PASS|FAIL name (t s / budget s) detail".
void print_table(const std::vector<CriterionResult>& results, std::ostream& os);

}  // namespace kpp::accept
