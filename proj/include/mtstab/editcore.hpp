#pragma once

#include <string>
#include <utility>
#include <vector>

#include "mtstab/tree.hpp"

namespace mts {

enum class Constraint { Tai, Selkow, ZhangConstrained, DeformFree, DeformOneDegree };

enum class CostKind { AbsDiff, Wasserstein };

struct CostModel {
    CostKind kind = CostKind::AbsDiff;

    // AbsDiff: |a1 - a2|; a blank only pairs with a blank and is never deleted.
    // Wasserstein: Euclidean distance of (a, b) points, deletion = distance to the diagonal.
    double relabel(const Label& l1, const Label& l2) const;
    double remove(const Label& l) const;  // delete and insert cost
};

CostModel cost_for(LabelScheme scheme);

struct EditMapping {
    std::vector<std::pair<int, int>> pairs;  // sorted by first
};

struct MappingResult {
    double cost = 0.0;
    EditMapping mapping;
};

double mapping_cost(const LabeledTree& t1, const LabeledTree& t2, const EditMapping& m,
                    const CostModel& cost);

// Checks one-to-one-ness and the constraint (node-based constraints only). For
// ordered trees mapped siblings must not invert their strict rank order.
bool mapping_valid(const LabeledTree& t1, const LabeledTree& t2, const EditMapping& m,
                   Constraint c);

// Exact optimum by branch and bound over all valid mappings. Ties keep the first
// optimum found, enumerating T1 in preorder with T2 candidates ascending and
// "unmapped" last.
MappingResult brute_force_distance(const LabeledTree& t1, const LabeledTree& t2, Constraint c,
                                   const CostModel& cost, int guard = 12);

struct EditOp {
    enum class Kind { Delete, Relabel, Insert };
    Kind kind = Kind::Relabel;
    int node = -1;    // node id in the working tree; new id for inserts
    int parent = -1;  // insert: parent id, -1 for a new root
    std::vector<int> adopt;  // insert: current children of parent that move under the new node
    Label from, to;
    int rank = 0;  // sibling rank after relabel/insert (ordered trees)
    double cost = 0.0;
    // deformation insert that splits the edge above `split_child`: the new
    // saddle `saddle` sits `split_len` above the edge's parent end
    int split_child = -1;
    int saddle = -1;
    double split_len = 0.0;
};

struct EditSequence {
    std::vector<EditOp> ops;
    double cost() const;
};

std::string op_kind_name(EditOp::Kind k);

// Normalized delete (leaf first), relabel, insert (root first) sequence. T1 nodes
// keep their ids; the insert of T2 node w creates id t1.size() + w.
EditSequence mapping_to_sequence(const LabeledTree& t1, const LabeledTree& t2, const EditMapping& m,
                                 const CostModel& cost);

// Node-based operations: deleting v hands its children to v's parent. Throws
// Validation naming the 1-based step on an inapplicable operation.
LabeledTree check_sequence(const LabeledTree& t1, const EditSequence& s);

// Rooted isomorphism respecting labels within tolerance (and ranks when ordered).
bool equivalent(const LabeledTree& a, const LabeledTree& b);

} // namespace mts
