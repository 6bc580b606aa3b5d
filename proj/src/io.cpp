#include "mtstab/io.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "mtstab/common.hpp"

namespace mts {

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, "cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// byte offset -> "line L, column C"
std::string locate(const std::string& text, std::size_t byte) {
    byte = std::min(byte, text.size());
    int line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < byte; ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

json parse_json(const std::string& text, const std::string& source) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error(ErrorKind::Validation,
                    source + ": " + locate(text, e.byte) + ": malformed JSON (" + e.what() + ")");
    }
}

const json& member(const json& j, const char* key, const std::string& where) {
    if (!j.is_object() || !j.contains(key))
        throw Error(ErrorKind::Validation, where + ": missing \"" + key + "\"");
    return j.at(key);
}

double number(const json& j, const std::string& where) {
    if (!j.is_number()) throw Error(ErrorKind::Validation, where + ": expected a number");
    double v = j.get<double>();
    if (!std::isfinite(v)) throw Error(ErrorKind::Validation, where + ": value is not finite");
    return v;
}

int integer(const json& j, const std::string& where) {
    if (!j.is_number_integer()) throw Error(ErrorKind::Validation, where + ": expected an integer");
    return j.get<int>();
}

} // namespace

ScalarField parse_field(const std::string& text, const std::string& source) {
    json j = parse_json(text, source);
    if (!j.is_object()) throw Error(ErrorKind::Validation, source + ": top level must be an object");

    if (j.contains("grid")) {
        const json& g = j.at("grid");
        int rows = integer(member(g, "rows", source + ": grid"), source + ": grid.rows");
        int cols = integer(member(g, "cols", source + ": grid"), source + ": grid.cols");
        const json& vals = member(g, "values", source + ": grid");
        if (!vals.is_array()) throw Error(ErrorKind::Validation, source + ": grid.values must be an array");
        if (rows < 2 || cols < 2) throw Error(ErrorKind::Validation, source + ": grid needs at least 2x2 vertices");
        if (static_cast<long>(vals.size()) != static_cast<long>(rows) * cols)
            throw Error(ErrorKind::Validation, source + ": grid.values has " + std::to_string(vals.size()) +
                                                   " entries, expected " + std::to_string(rows * cols));
        std::vector<double> v;
        for (std::size_t i = 0; i < vals.size(); ++i)
            v.push_back(number(vals[i], source + ": grid.values[" + std::to_string(i) + "]"));
        try {
            return validate_field(build_grid_domain(rows, cols), v);
        } catch (const Error& e) {
            throw Error(e.kind(), source + ": " + e.what());
        }
    }

    const json& verts = member(j, "vertices", source);
    const json& edges = member(j, "edges", source);
    if (!verts.is_array() || !edges.is_array())
        throw Error(ErrorKind::Validation, source + ": vertices and edges must be arrays");
    const int n = static_cast<int>(verts.size());
    std::vector<double> values(n, 0.0);
    std::vector<char> seen(n, 0);
    for (int i = 0; i < n; ++i) {
        std::string where = source + ": vertices[" + std::to_string(i) + "]";
        int id = integer(member(verts[i], "id", where), where + ".id");
        if (id < 0 || id >= n) throw Error(ErrorKind::Validation, where + ": id out of range (ids are dense 0-based)");
        if (seen[id]) throw Error(ErrorKind::Validation, where + ": duplicate id " + std::to_string(id));
        seen[id] = 1;
        values[id] = number(member(verts[i], "value", where), where + ".value");
    }
    std::vector<std::pair<int, int>> el;
    for (std::size_t i = 0; i < edges.size(); ++i) {
        std::string where = source + ": edges[" + std::to_string(i) + "]";
        if (!edges[i].is_array() || edges[i].size() != 2)
            throw Error(ErrorKind::Validation, where + ": expected [u, v]");
        el.emplace_back(integer(edges[i][0], where), integer(edges[i][1], where));
    }
    try {
        return validate_field(make_domain(n, el), values);
    } catch (const Error& e) {
        throw Error(e.kind(), source + ": " + e.what());
    }
}

ScalarField read_field(const std::string& path) { return parse_field(slurp(path), path); }

json field_to_json(const ScalarField& f) {
    json j;
    j["vertices"] = json::array();
    for (int v = 0; v < f.size(); ++v) j["vertices"].push_back({{"id", v}, {"value", f.values[v]}});
    j["edges"] = json::array();
    for (auto [a, b] : f.domain.edges) j["edges"].push_back({a, b});
    return j;
}

void write_field(const std::string& path, const ScalarField& f) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + path);
    out << field_to_json(f).dump(2) << '\n';
}

json tree_to_json(const MergeTree& t) {
    json nodes = json::array();
    for (int v = 0; v < t.size(); ++v) {
        json n{{"id", v}, {"vertex", t.vertex[v]}, {"value", t.value[v]}, {"parent", t.parent[v]},
               {"children", t.children[v]}};
        if (v < static_cast<int>(t.name.size()) && !t.name[v].empty()) n["name"] = t.name[v];
        nodes.push_back(n);
    }
    return {{"root", t.root}, {"degree", t.degree()}, {"nodes", nodes}};
}

json bdt_to_json(const Bdt& b, bool ordered) {
    json nodes = json::array();
    for (int v = 0; v < b.size(); ++v) {
        json n{{"id", v},
               {"birth", b.birth[v]},
               {"death", b.death[v]},
               {"birth_vertex", b.birth_vertex[v]},
               {"death_vertex", b.death_vertex[v]},
               {"parent", b.parent[v]},
               {"children", b.children[v]}};
        if (ordered) n["attach_pos"] = b.attach_pos[v];
        if (v < static_cast<int>(b.name.size())) n["name"] = b.name[v];
        nodes.push_back(n);
    }
    return {{"root", b.root}, {"ordered", ordered}, {"branches", nodes}};
}

json tree_dump(const ScalarField& f) {
    MergeTree t = build_merge_tree(f);
    BranchDecomposition bd = persistence_branch_decomposition(t);
    return {{"tree", tree_to_json(t)},
            {"bdt", bdt_to_json(build_bdt(t, bd), false)},
            {"obdt", bdt_to_json(build_obdt(t, bd).bdt, true)}};
}

MergeTree tree_from_json(const json& j) {
    const json& nodes = member(j, "nodes", "tree");
    if (!nodes.is_array()) throw Error(ErrorKind::Validation, "tree: nodes must be an array");
    const int n = static_cast<int>(nodes.size());
    std::vector<double> values(n);
    std::vector<int> parent(n);
    std::vector<std::string> names(n);
    for (int i = 0; i < n; ++i) {
        std::string where = "tree: nodes[" + std::to_string(i) + "]";
        if (integer(member(nodes[i], "id", where), where) != i)
            throw Error(ErrorKind::Validation, where + ": ids must be dense and in order");
        values[i] = number(member(nodes[i], "value", where), where + ".value");
        parent[i] = integer(member(nodes[i], "parent", where), where + ".parent");
        if (nodes[i].contains("name")) names[i] = nodes[i]["name"].get<std::string>();
    }
    return make_tree(values, parent, names);
}

MergeTree read_tree(const std::string& path) {
    std::string text = slurp(path);
    json j = parse_json(text, path);
    if (j.contains("tree")) j = j["tree"];
    try {
        return tree_from_json(j);
    } catch (const Error& e) {
        throw Error(e.kind(), path + ": " + e.what());
    }
}

std::string format_number(double v) {
    std::ostringstream os;
    os << std::setprecision(9) << v;
    return os.str();
}

void write_csv(std::ostream& os, const MatrixResult& m) {
    for (int i = 0; i < m.size(); ++i) os << (i ? "," : "") << m.names[i];
    os << '\n';
    for (int i = 0; i < m.size(); ++i) {
        for (int k = 0; k < m.size(); ++k) {
            if (k) os << ',';
            os << (m.skipped[i][k] ? std::string("skip") : format_number(m.values[i][k]));
        }
        os << '\n';
    }
}

MatrixResult read_csv(std::istream& is, Metric metric) {
    MatrixResult m;
    m.metric = metric;
    auto split = [](const std::string& line) {
        std::vector<std::string> out;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) out.push_back(cell);
        return out;
    };
    std::string line;
    if (!std::getline(is, line)) throw Error(ErrorKind::Validation, "csv: empty input");
    m.names = split(line);
    const int n = m.size();
    for (int i = 0; i < n; ++i) {
        if (!std::getline(is, line))
            throw Error(ErrorKind::Validation, "csv: expected " + std::to_string(n) + " rows");
        auto cells = split(line);
        if (static_cast<int>(cells.size()) != n)
            throw Error(ErrorKind::Validation, "csv: line " + std::to_string(i + 2) + " has " +
                                                   std::to_string(cells.size()) + " cells");
        m.values.emplace_back(n);
        m.skipped.emplace_back(n, false);
        for (int k = 0; k < n; ++k) {
            if (cells[k] == "skip") {
                m.skipped[i][k] = true;
                m.values[i][k] = std::numeric_limits<double>::quiet_NaN();
                continue;
            }
            try {
                std::size_t used = 0;
                m.values[i][k] = std::stod(cells[k], &used);
                if (used != cells[k].size()) throw std::invalid_argument("trailing");
            } catch (const std::exception&) {
                throw Error(ErrorKind::Validation, "csv: line " + std::to_string(i + 2) + ", column " +
                                                       std::to_string(k + 1) + ": bad number '" + cells[k] + "'");
            }
        }
    }
    return m;
}

json matrix_to_json(const MatrixResult& m) {
    json vals = json::array(), skip = json::array();
    for (int i = 0; i < m.size(); ++i) {
        json row = json::array();
        for (int k = 0; k < m.size(); ++k) {
            if (m.skipped[i][k]) {
                row.push_back(nullptr);
                skip.push_back({i, k});
            } else {
                row.push_back(m.values[i][k]);
            }
        }
        vals.push_back(row);
    }
    return {{"metric", metric_name(m.metric)}, {"names", m.names}, {"values", vals}, {"skipped", skip}};
}

json perturbation_to_json(const MinimalPerturbation& p) {
    return {{"vertex", p.vertex},   {"old_value", p.old_value}, {"new_value", p.new_value},
            {"extent", p.extent},   {"partner", p.partner},     {"direction", p.up ? "up" : "down"}};
}

json classification_to_json(const Classification& c) {
    return {{"class", class_name(c.cls)},
            {"short", class_short(c.cls)},
            {"move", perturbation_to_json(c.move)},
            {"inclusion",
             {{"tree_f_in_g", c.tree_f_in_g},
              {"tree_g_in_f", c.tree_g_in_f},
              {"obdt_f_in_g", c.obdt_f_in_g},
              {"obdt_g_in_f", c.obdt_g_in_f},
              {"bdt_f_in_g", c.bdt_f_in_g},
              {"bdt_g_in_f", c.bdt_g_in_f}}},
            {"nodes", {c.nodes_f, c.nodes_g}},
            {"branches", {c.branches_f, c.branches_g}}};
}

namespace {

json witness_json(const Witness& w) {
    return {{"trial", w.trial},
            {"metric", metric_name(w.metric)},
            {"class", class_short(w.cls)},
            {"distance", w.distance},
            {"bound", w.bound},
            {"f", field_to_json(w.f)},
            {"g", field_to_json(w.g)}};
}

json metric_list(const std::vector<Metric>& ms) {
    json a = json::array();
    for (Metric m : ms) a.push_back(std::string(1, metric_letter(m)));
    return a;
}

} // namespace

json suite_to_json(const SuiteReport& r) {
    json cells = json::array();
    for (const auto& [key, s] : r.cells) {
        cells.push_back({{"metric", metric_name(key.first)},
                         {"class", class_short(key.second)},
                         {"claimed", claimed(key.first, key.second)},
                         {"trials", s.trials},
                         {"passes", s.passes},
                         {"worst_ratio", s.worst_ratio},
                         {"within_deg_plus_one", s.within_deg_plus_one}});
    }
    json classes = json::object();
    for (const auto& [c, n] : r.class_counts) classes[class_short(c)] = n;
    json fails = json::array();
    for (const Witness& w : r.failures) fails.push_back(witness_json(w));
    return {{"seed", r.config.seed},
            {"trials", r.config.trials},
            {"trials_run", r.trials_run},
            {"grid", r.config.grid},
            {"metrics", metric_list(r.config.metrics)},
            {"note", "delta_L bounds are claimed for simple changes and vertical swaps, not edge splits "
                     "(the edge split family makes delta_L grow with x); one statement of the bound names "
                     "edge splits instead"},
            {"class_counts", classes},
            {"shape_failures", r.shape_failures},
            {"witness",
             {{"checked", r.witness_checked},
              {"short", r.witness_short},
              {"cheap", r.witness_cheap},
              {"reproduces", r.witness_reproduces},
              {"short_and_cheap", r.witness_valid}}},
            {"cells", cells},
            {"claimed_cells_pass", r.claimed_cells_pass()},
            {"failures", fails}};
}

json finite_to_json(const FiniteReport& r) {
    json stats = json::object();
    for (const auto& [m, s] : r.stats)
        stats[metric_name(m)] = {{"checked", s.checked}, {"passes", s.passes}, {"skipped", s.skipped}};
    json fails = json::array();
    for (const Witness& w : r.failures) fails.push_back(witness_json(w));
    return {{"seed", r.config.seed},
            {"trials", r.config.trials},
            {"grid", r.config.grid},
            {"eps", r.config.eps},
            {"metrics", metric_list(r.config.metrics)},
            {"stats", stats},
            {"steps_total", r.steps_total},
            {"steps_valid", r.steps_valid},
            {"sequences_exact", r.sequences_exact},
            {"step_bound_ok", r.step_bound_ok},
            {"shift_checks", r.shift_checks},
            {"shift_zero", r.shift_zero},
            {"all_pass", r.all_pass()},
            {"failures", fails}};
}

json growth_to_json(const GrowthTable& g) {
    json rows = json::array();
    for (auto [x, d] : g.rows) rows.push_back({{"x", x}, {"distance", d}});
    return {{"family", family_name(g.family)},
            {"metric", metric_name(g.metric)},
            {"eps", g.eps},
            {"rows", rows},
            {"linear", g.linear}};
}

} // namespace mts
