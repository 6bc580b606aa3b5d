#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "mtstab/distances.hpp"
#include "mtstab/field.hpp"
#include "mtstab/mergetree.hpp"
#include "mtstab/perturb.hpp"
#include "mtstab/stability.hpp"

namespace mts {

using json = nlohmann::json;

// Field files: {"vertices": [{"id", "value"}], "edges": [[u, v]]} or
// {"grid": {"rows", "cols", "values"}}. Syntax errors report line and column.
ScalarField parse_field(const std::string& text, const std::string& source = "<input>");
ScalarField read_field(const std::string& path);
json field_to_json(const ScalarField& f);
void write_field(const std::string& path, const ScalarField& f);

json tree_to_json(const MergeTree& t);
json bdt_to_json(const Bdt& b, bool ordered);
json tree_dump(const ScalarField& f);  // abstract tree, BDT and ordered BDT

// Tree files written by the counterexample command.
MergeTree tree_from_json(const json& j);
MergeTree read_tree(const std::string& path);

struct MatrixResult {
    std::vector<std::string> names;
    std::vector<std::vector<double>> values;  // NaN where skipped
    std::vector<std::vector<bool>> skipped;   // guard-skipped pairs
    Metric metric = Metric::W;

    int size() const { return static_cast<int>(names.size()); }
};

// Header row of names, then one row per member; 9 significant digits, "skip"
// for guard-skipped entries.
void write_csv(std::ostream& os, const MatrixResult& m);
MatrixResult read_csv(std::istream& is, Metric metric);
json matrix_to_json(const MatrixResult& m);

json classification_to_json(const Classification& c);
json perturbation_to_json(const MinimalPerturbation& p);
json suite_to_json(const SuiteReport& r);
json finite_to_json(const FiniteReport& r);
json growth_to_json(const GrowthTable& g);

std::string format_number(double v);  // 9 significant digits

} // namespace mts
