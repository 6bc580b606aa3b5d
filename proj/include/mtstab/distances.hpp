#pragma once

#include <string>
#include <vector>

#include "mtstab/editcore.hpp"
#include "mtstab/field.hpp"
#include "mtstab/mergetree.hpp"

namespace mts {

enum class Metric { W, X, S, L, G, P, E, B };

struct Guards {
    int brute_nodes = 12;   // TAI / Zhang / Selkow oracle
    int deform_edges = 10;  // subset enumeration for E and P
    int branch_edges = 8;   // decomposition enumeration for B
    int inclusion = 64;
};

const std::vector<Metric>& all_metrics();
Metric parse_metric(const std::string& s);  // w|x|s|l|g|p|e|b
char metric_letter(Metric m);
std::string metric_name(Metric m);  // "delta_W" ...

// One-degree DPs. The roots are always paired.
double selkow_dp(const LabeledTree& t1, const LabeledTree& t2, const CostModel& cost);
// Children may only be matched without strictly inverting ranks.
double ordered_selkow_dp(const LabeledTree& t1, const LabeledTree& t2, const CostModel& cost);

LabeledTree bdt_labels(const MergeTree& t, bool ordered);

double delta_W(const MergeTree& t1, const MergeTree& t2);
double delta_X(const MergeTree& t1, const MergeTree& t2);
double delta_S(const MergeTree& t1, const MergeTree& t2, const Guards& g = {});
double delta_L(const MergeTree& t1, const MergeTree& t2);
double delta_G(const MergeTree& t1, const MergeTree& t2, const Guards& g = {});
double delta_P(const MergeTree& t1, const MergeTree& t2, const Guards& g = {});
double delta_E(const MergeTree& t1, const MergeTree& t2, const Guards& g = {});
double delta_B(const MergeTree& t1, const MergeTree& t2, const Guards& g = {});

double distance(Metric m, const MergeTree& t1, const MergeTree& t2, const Guards& g = {});
double compute(Metric m, const ScalarField& f1, const ScalarField& f2, const Guards& g = {});

} // namespace mts
