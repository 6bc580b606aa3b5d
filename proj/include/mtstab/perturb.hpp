#pragma once

#include <string>
#include <vector>

#include "mtstab/field.hpp"
#include "mtstab/mergetree.hpp"

namespace mts {

struct MinimalPerturbation {
    int vertex = -1;  // -1: fields are identical
    double old_value = 0.0;
    double new_value = 0.0;
    double extent = 0.0;
    int partner = -1;  // vertex passed, if any
    bool up = true;
};

enum class ChangeClass {
    SimpleChange,
    EdgeSplit,
    VerticalSwap,
    OrderedHorizontalSwap,
    UnorderedHorizontalSwap
};

std::string class_name(ChangeClass c);
std::string class_short(ChangeClass c);  // SC ES VS OHS UHS
bool is_horizontal(ChangeClass c);

// Throws Validation ("not a minimal perturbation ...") unless g differs from f
// in at most one vertex and at most one adjacent transposition of ranks.
MinimalPerturbation check_minimal(const ScalarField& f, const ScalarField& g);

ScalarField apply(const ScalarField& f, const MinimalPerturbation& p);

// Up to four candidates: move up/down without crossing, swap with the rank
// successor/predecessor. margin <= 0 picks half the gap to the next-but-one value.
std::vector<MinimalPerturbation> enumerate_minimal_perturbations(const ScalarField& f, int vertex,
                                                                 double margin = -1.0);

struct Classification {
    ChangeClass cls = ChangeClass::SimpleChange;
    MinimalPerturbation move;
    bool tree_f_in_g = false, tree_g_in_f = false;
    bool obdt_f_in_g = false, obdt_g_in_f = false;
    bool bdt_f_in_g = false, bdt_g_in_f = false;
    int nodes_f = 0, nodes_g = 0;
    int branches_f = 0, branches_g = 0;
};

Classification classify(const ScalarField& f, const ScalarField& g);
ChangeClass classify_change(const ScalarField& f, const ScalarField& g);

// Shape facts each class must satisfy. Returns an empty string when they hold,
// otherwise a description of the violated fact.
std::string shape_violation(const ScalarField& f, const ScalarField& g, ChangeClass c);

// Structural facts about augmented trees under an upward move (downward moves
// are checked on the reversed pair). Returns the violated facts, if any.
std::vector<std::string> observation_violations(const ScalarField& f, const ScalarField& g);

struct Scenario {
    std::string name;
    ScalarField f, g;
    ChangeClass expected;
};

std::vector<Scenario> scenario_suite();

struct PerturbationSequence {
    std::vector<ScalarField> fields;  // f, ..., g
    std::vector<MinimalPerturbation> steps;
};

// Transpositions first (bubble sort, each realized as a single vertex move just
// past its neighbour), then order-preserving moves onto the target values.
PerturbationSequence decompose_perturbation(const ScalarField& f, const ScalarField& g);

} // namespace mts
