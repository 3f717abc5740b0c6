#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace splitree::acceptance {

// Pinned thresholds and budgets. Values without a derivable target were set
// by documented pilot runs; they live here (the acceptance config), not
// inside the criteria.
struct Config {
    bool quick = false;
    std::uint64_t seed = 20110901;  // master seed for the whole suite
    int threads = 0;

    double w2_limit_at_1e4 = 0.05;    // criterion 6 (pilot-pinned)
    double depth_ks_limit = 0.19;     // criterion 10 (pilot: 0.160 at n=1e5 + headroom;
                                      // see README on the overflow keep rule)
    double contraction_slack = 0.05;  // criterion 5
    double smoothness_ratio_cap = 10.0;
};

struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    bool skipped = false;
    std::string detail;
};

std::vector<CriterionResult> run_all(const Config& config, std::ostream& log);

// Prints one line per criterion; returns true when nothing failed.
bool print_table(const std::vector<CriterionResult>& results, std::ostream& out);

}  // namespace splitree::acceptance
