#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "mtstab/distances.hpp"
#include "mtstab/perturb.hpp"

namespace mts {

// Cells of the (metric, class) matrix for which a deg(T_f)*eps bound is claimed.
bool claimed(Metric m, ChangeClass c);

struct BoundReport {
    Metric metric = Metric::E;
    ChangeClass cls = ChangeClass::SimpleChange;
    double extent = 0.0;
    int deg = 0;
    double distance = 0.0;
    double bound = 0.0;
    bool claimed = false;
    bool pass = true;  // distance <= bound + tol; always true for unclaimed cells
};

BoundReport check_bound(const ScalarField& f, const ScalarField& g, Metric m, const Guards& guards = {});

enum class Family { EdgeSplit, HorizontalSwap, VerticalSwap };

Family parse_family(const std::string& s);  // edge-split | horizontal-swap | vertical-swap
std::string family_name(Family f);

// Trees of the three instability families with x and eps instantiated.
std::pair<MergeTree, MergeTree> counterexample(Family fam, double x, double eps);

// Metrics that grow with x on the given family.
std::vector<Metric> unstable_metrics(Family fam);

struct GrowthTable {
    Family family;
    Metric metric;
    double eps = 0.0;
    std::vector<std::pair<double, double>> rows;  // (x, distance)
    bool linear = false;  // d(2x)/d(x) within 10% of 2 for every doubled pair
};

GrowthTable instability_growth(Family fam, Metric m, const std::vector<double>& xs, double eps);

// Random field on a rows x cols triangulated grid with distinct values in [0, 1).
ScalarField random_grid_field(int rows, int cols, std::mt19937_64& rng);

// Per-trial generator derived from the run seed.
std::mt19937_64 trial_rng(std::uint64_t seed, int trial);

struct SuiteConfig {
    std::uint64_t seed = 1;
    int trials = 200;
    int grid = 4;
    std::vector<Metric> metrics;
    Guards guards;
    int max_attempts = 200;  // field redraws until both trees fit the guards
    bool witness = true;     // check the explicit deformation sequence
};

struct CellStats {
    int trials = 0;
    int passes = 0;
    double worst_ratio = 0.0;  // max distance / (deg * eps)
    int within_deg_plus_one = 0;  // distance <= (deg + 1) * eps
};

struct Witness {
    int trial = 0;
    Metric metric = Metric::E;
    ChangeClass cls = ChangeClass::SimpleChange;
    ScalarField f, g;
    double distance = 0.0;
    double bound = 0.0;
};

struct SuiteReport {
    SuiteConfig config;
    std::map<std::pair<Metric, ChangeClass>, CellStats> cells;
    std::map<ChangeClass, int> class_counts;
    int trials_run = 0;
    int shape_failures = 0;
    int witness_checked = 0;
    int witness_short = 0;       // the best candidate has at most deg operations
    int witness_cheap = 0;       // some candidate costs at most eps per operation
    int witness_reproduces = 0;  // applying it reaches T_g at the optimal cost
    int witness_valid = 0;       // one candidate is both short and cheap
    std::vector<Witness> failures;

    bool claimed_cells_pass() const;
};

SuiteReport run_stability_suite(const SuiteConfig& cfg);

struct FiniteConfig {
    std::uint64_t seed = 7;
    int trials = 100;
    int grid = 3;
    double eps = 0.05;
    std::vector<Metric> metrics;
    Guards guards;
};

struct FiniteStats {
    int checked = 0;
    int passes = 0;
    int skipped = 0;  // precondition not met
};

struct FiniteReport {
    FiniteConfig config;
    std::map<Metric, FiniteStats> stats;
    int steps_total = 0;
    int steps_valid = 0;       // each decomposition step is a minimal perturbation
    int sequences_exact = 0;   // last snapshot equals g
    int step_bound_ok = 0;     // step count <= n + inversions
    int shift_checks = 0;
    int shift_zero = 0;        // delta_E(f, f + c) == 0
    std::vector<Witness> failures;

    bool all_pass() const;
};

FiniteReport run_finite_stability(const FiniteConfig& cfg);

} // namespace mts
