#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <thread>

#include <CLI11.hpp>

#include "mtstab/common.hpp"
#include "mtstab/io.hpp"
#include "mtstab/stability.hpp"

namespace fs = std::filesystem;
using namespace mts;

namespace {

std::vector<Metric> parse_metrics(const std::string& s) {
    if (s == "all") return all_metrics();
    std::vector<Metric> out;
    for (char c : s) {
        if (c == ',' || c == ' ') continue;
        Metric m = parse_metric(std::string(1, c));
        if (std::find(out.begin(), out.end(), m) == out.end()) out.push_back(m);
    }
    if (out.empty()) throw Error(ErrorKind::Parameter, "no metrics given");
    return out;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + path);
    out << text;
}

void add_guards(CLI::App* cmd, Guards& g) {
    cmd->add_option("--max-brute-nodes", g.brute_nodes, "node limit for brute-force mapping search");
    cmd->add_option("--max-deform-edges", g.deform_edges, "edge limit for deformation subset search");
    cmd->add_option("--max-branch-edges", g.branch_edges, "edge limit for branch mapping enumeration");
}

int cmd_build_tree(const std::string& path) {
    std::cout << tree_dump(read_field(path)).dump(2) << '\n';
    return 0;
}

int cmd_matrix(const std::string& dir, const std::string& metric, const std::string& csv_path,
               const std::string& json_path, int threads, const Guards& guards) {
    Metric m = parse_metric(metric);
    if (!fs::is_directory(dir)) throw Error(ErrorKind::Io, "not a directory: " + dir);
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    if (files.empty()) throw Error(ErrorKind::Io, "no .json field files in " + dir);

    std::vector<MergeTree> trees;
    std::vector<std::string> errors;
    MatrixResult res;
    res.metric = m;
    for (const auto& p : files) {
        try {
            trees.push_back(build_merge_tree(read_field(p.string())));
            res.names.push_back(p.stem().string());
        } catch (const Error& e) {
            errors.push_back(e.what());
        }
    }
    if (!errors.empty()) {
        for (const auto& e : errors) std::cerr << "error: " << e << '\n';
        throw Error(ErrorKind::Validation, std::to_string(errors.size()) + " field file(s) failed to parse");
    }
    if (trees.size() < 2) throw Error(ErrorKind::Validation, "matrix needs at least two fields");

    const int n = res.size();
    res.values.assign(n, std::vector<double>(n, 0.0));
    res.skipped.assign(n, std::vector<bool>(n, false));
    std::vector<std::pair<int, int>> pairs;
    for (int i = 0; i < n; ++i)
        for (int k = i + 1; k < n; ++k) pairs.emplace_back(i, k);
    std::vector<double> out(pairs.size());
    std::vector<char> skip(pairs.size(), 0);
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t p; (p = next++) < pairs.size();) {
            try {
                out[p] = distance(m, trees[pairs[p].first], trees[pairs[p].second], guards);
            } catch (const Error& e) {
                if (e.kind() != ErrorKind::Guard) throw;
                skip[p] = 1;
            }
        }
    };
    if (threads <= 0) threads = std::max(1u, std::thread::hardware_concurrency());
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(work);
    for (auto& t : pool) t.join();
    for (std::size_t p = 0; p < pairs.size(); ++p) {
        auto [i, k] = pairs[p];
        double v = skip[p] ? std::numeric_limits<double>::quiet_NaN() : out[p];
        res.values[i][k] = res.values[k][i] = v;
        res.skipped[i][k] = res.skipped[k][i] = skip[p];
    }

    if (csv_path.empty()) {
        write_csv(std::cout, res);
    } else {
        std::ofstream os(csv_path);
        if (!os) throw Error(ErrorKind::Io, "cannot write " + csv_path);
        write_csv(os, res);
    }
    if (!json_path.empty()) write_text(json_path, matrix_to_json(res).dump(2) + "\n");
    int skipped = static_cast<int>(std::count(skip.begin(), skip.end(), 1));
    if (skipped) std::cerr << skipped << " pair(s) skipped by guards\n";
    return 0;
}

int cmd_classify(const std::string& a, const std::string& b, bool as_json) {
    ScalarField f = read_field(a), g = read_field(b);
    Classification c = classify(f, g);
    std::string shape = shape_violation(f, g, c.cls);
    std::vector<std::string> obs = observation_violations(f, g);
    if (as_json) {
        json j = classification_to_json(c);
        j["shape_check"] = shape.empty() ? "ok" : shape;
        j["observation_violations"] = obs;
        std::cout << j.dump(2) << '\n';
        return 0;
    }
    std::cout << class_name(c.cls) << '\n';
    if (c.move.vertex < 0) {
        std::cout << "  fields are identical\n";
    } else {
        std::cout << "  vertex " << c.move.vertex << ": " << format_number(c.move.old_value) << " -> "
                  << format_number(c.move.new_value) << " (extent " << format_number(c.move.extent) << ")";
        if (c.move.partner >= 0) std::cout << ", passes vertex " << c.move.partner;
        std::cout << '\n';
    }
    std::cout << "  tree nodes " << c.nodes_f << " -> " << c.nodes_g << ", branches " << c.branches_f << " -> "
              << c.branches_g << '\n';
    std::cout << "  tree inclusion f<g " << c.tree_f_in_g << " g<f " << c.tree_g_in_f << "; ordered bdt f<g "
              << c.obdt_f_in_g << " g<f " << c.obdt_g_in_f << "; bdt f<g " << c.bdt_f_in_g << " g<f "
              << c.bdt_g_in_f << '\n';
    std::cout << "  shape check: " << (shape.empty() ? "ok" : shape) << '\n';
    for (const auto& o : obs) std::cout << "  observation violated: " << o << '\n';
    return 0;
}

int cmd_perturb(const std::string& path, int vertex, double margin, int pick, const std::string& out) {
    ScalarField f = read_field(path);
    if (vertex < 0 || vertex >= f.size())
        throw Error(ErrorKind::Parameter, "vertex " + std::to_string(vertex) + " out of range");
    auto cands = enumerate_minimal_perturbations(f, vertex, margin);
    if (pick >= 0) {
        if (pick >= static_cast<int>(cands.size()))
            throw Error(ErrorKind::Parameter, "candidate index out of range");
        ScalarField g = apply(f, cands[pick]);
        if (out.empty()) {
            std::cout << field_to_json(g).dump(2) << '\n';
        } else {
            write_field(out, g);
        }
        return 0;
    }
    json list = json::array();
    for (std::size_t i = 0; i < cands.size(); ++i) {
        ScalarField g = apply(f, cands[i]);
        json j = perturbation_to_json(cands[i]);
        j["index"] = i;
        j["class"] = class_name(classify_change(f, g));
        list.push_back(j);
    }
    std::cout << list.dump(2) << '\n';
    return 0;
}

void print_matrix(const SuiteReport& r) {
    const std::vector<ChangeClass> cols{ChangeClass::SimpleChange, ChangeClass::EdgeSplit, ChangeClass::VerticalSwap,
                                        ChangeClass::OrderedHorizontalSwap, ChangeClass::UnorderedHorizontalSwap};
    std::printf("%-9s", "metric");
    for (ChangeClass c : cols) std::printf(" %12s", class_short(c).c_str());
    std::printf("\n");
    for (Metric m : r.config.metrics) {
        std::printf("%-9s", metric_name(m).c_str());
        for (ChangeClass c : cols) {
            auto it = r.cells.find({m, c});
            std::string cell = "-";
            if (it != r.cells.end())
                cell = std::to_string(it->second.passes) + "/" + std::to_string(it->second.trials);
            cell += claimed(m, c) ? "*" : " ";
            std::printf(" %12s", cell.c_str());
        }
        std::printf("\n");
    }
    std::printf("(* claimed bound deg(T_f)*eps; unstarred cells are informational)\n");
}

int cmd_stability(const SuiteConfig& sc, const FiniteConfig& fc, bool finite, const std::string& json_path) {
    SuiteReport r = run_stability_suite(sc);
    json j{{"minimal", suite_to_json(r)}};
    std::printf("minimal perturbations: %d trials on a %dx%d grid, seed %llu\n", r.trials_run, sc.grid, sc.grid,
                static_cast<unsigned long long>(sc.seed));
    print_matrix(r);
    std::printf("class counts:");
    for (const auto& [c, n] : r.class_counts) std::printf(" %s=%d", class_short(c).c_str(), n);
    std::printf("\nshape check failures: %d\n", r.shape_failures);
    if (r.witness_checked)
        std::printf("delta_E witness: %d checked, %d within deg ops, %d with ops <= eps, %d both, %d reproduce T_g\n",
                    r.witness_checked, r.witness_short, r.witness_cheap, r.witness_valid, r.witness_reproduces);
    std::printf("claimed cells: %s\n", r.claimed_cells_pass() ? "PASS" : "FAIL");
    if (finite) {
        FiniteReport fr = run_finite_stability(fc);
        j["finite"] = finite_to_json(fr);
        std::printf("finite perturbations: %d trials on a %dx%d grid, eps %g\n", fc.trials, fc.grid, fc.grid, fc.eps);
        for (const auto& [m, s] : fr.stats)
            std::printf("  %-8s %d/%d (skipped %d)\n", metric_name(m).c_str(), s.passes, s.checked, s.skipped);
        std::printf("  decomposition steps valid %d/%d, exact %d/%d, shift %d/%d\n", fr.steps_valid, fr.steps_total,
                    fr.sequences_exact, fc.trials, fr.shift_zero, fr.shift_checks);
        std::printf("finite bounds: %s\n", fr.all_pass() ? "PASS" : "FAIL");
    }
    if (!json_path.empty()) write_text(json_path, j.dump(2) + "\n");
    return 0;
}

int cmd_counterexample(const std::string& family, double x, double eps, const std::string& metrics,
                       const std::string& out_dir) {
    Family fam = parse_family(family);
    auto [t1, t2] = counterexample(fam, x, eps);
    std::vector<Metric> ms = parse_metrics(metrics);
    std::vector<Metric> unstable = unstable_metrics(fam);
    json rows = json::array();
    std::printf("%s x=%g eps=%g\n", family_name(fam).c_str(), x, eps);
    for (Metric m : ms) {
        bool grows = std::find(unstable.begin(), unstable.end(), m) != unstable.end();
        GrowthTable g = instability_growth(fam, m, {x, 2 * x}, eps);
        std::printf("  %-8s %14s  at 2x %14s  %s\n", metric_name(m).c_str(), format_number(g.rows[0].second).c_str(),
                    format_number(g.rows[1].second).c_str(), grows ? "unstable" : "");
        json r = growth_to_json(g);
        r["unstable"] = grows;
        rows.push_back(r);
    }
    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        write_text((fs::path(out_dir) / (family_name(fam) + "_t1.json")).string(), tree_to_json(t1).dump(2) + "\n");
        write_text((fs::path(out_dir) / (family_name(fam) + "_t2.json")).string(), tree_to_json(t2).dump(2) + "\n");
        write_text((fs::path(out_dir) / (family_name(fam) + "_distances.json")).string(), rows.dump(2) + "\n");
    }
    return 0;
}

int cmd_distance(const std::string& a, const std::string& b, const std::string& metrics, bool trees,
                 const Guards& guards) {
    MergeTree t1 = trees ? read_tree(a) : build_merge_tree(read_field(a));
    MergeTree t2 = trees ? read_tree(b) : build_merge_tree(read_field(b));
    for (Metric m : parse_metrics(metrics))
        std::printf("%s %s\n", metric_name(m).c_str(), format_number(distance(m, t1, t2, guards)).c_str());
    return 0;
}

int cmd_scenarios(const std::string& out_dir) {
    json index = json::array();
    if (!out_dir.empty()) fs::create_directories(out_dir);
    for (const Scenario& sc : scenario_suite()) {
        std::string stem;
        for (char c : sc.name) {
            if (std::isalnum(static_cast<unsigned char>(c))) stem += c;
            else if (!stem.empty() && stem.back() != '_') stem += '_';
        }
        index.push_back({{"name", sc.name}, {"file", stem}, {"class", class_name(sc.expected)}});
        if (out_dir.empty()) continue;
        write_field((fs::path(out_dir) / (stem + "_f.json")).string(), sc.f);
        write_field((fs::path(out_dir) / (stem + "_g.json")).string(), sc.g);
    }
    std::cout << index.dump(2) << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"merge tree construction, edit distances and stability checks"};
    app.require_subcommand(1);

    std::string field, field_b, dir, metric = "w", metrics = "all", csv, json_out, out, family = "edge-split";
    int threads = 0, vertex = -1, pick = -1;
    double margin = -1.0, x = 10.0, eps = 0.1;
    bool as_json = false, finite = true, trees = false;
    Guards guards;
    SuiteConfig sc;
    FiniteConfig fc;

    auto* bt = app.add_subcommand("build-tree", "dump the merge tree, BDT and ordered BDT of a field");
    bt->add_option("field", field, "field JSON file")->required();

    auto* mx = app.add_subcommand("matrix", "pairwise distance matrix over a directory of fields");
    mx->add_option("dir", dir, "directory of field JSON files")->required();
    mx->add_option("--metric,-m", metric, "w|x|s|l|g|p|e|b");
    mx->add_option("--csv", csv, "write CSV here instead of stdout");
    mx->add_option("--json", json_out, "also write JSON");
    mx->add_option("--threads", threads, "worker threads (0: all cores)");
    add_guards(mx, guards);

    auto* cl = app.add_subcommand("classify", "classify the minimal perturbation between two fields");
    cl->add_option("--field-a", field, "first field")->required();
    cl->add_option("--field-b", field_b, "second field")->required();
    cl->add_flag("--json", as_json, "JSON output");

    auto* pt = app.add_subcommand("perturb", "list or apply minimal perturbations of one vertex");
    pt->add_option("field", field, "field JSON file")->required();
    pt->add_option("--vertex,-v", vertex, "vertex id")->required();
    pt->add_option("--margin", margin, "distance past the neighbour value (default: half the next gap)");
    pt->add_option("--apply", pick, "index of the candidate to apply");
    pt->add_option("--out,-o", out, "write the perturbed field here");

    auto* st = app.add_subcommand("stability-run", "randomized checks of the stability bounds");
    st->add_option("--seed", sc.seed, "run seed");
    st->add_option("--trials", sc.trials, "minimal perturbation trials");
    st->add_option("--grid", sc.grid, "grid side for minimal perturbation trials");
    st->add_option("--metrics", metrics, "metric letters or 'all'");
    st->add_option("--eps", fc.eps, "extent of finite perturbations");
    st->add_option("--finite-trials", fc.trials, "finite perturbation trials");
    st->add_option("--finite-grid", fc.grid, "grid side for finite perturbation trials");
    st->add_flag("!--no-finite", finite, "skip finite perturbation trials");
    st->add_flag("!--no-witness", sc.witness, "skip the delta_E witness check");
    st->add_option("--json", json_out, "write the JSON report here");
    add_guards(st, guards);

    auto* ce = app.add_subcommand("counterexample", "instability families with distances at x and 2x");
    ce->add_option("--family", family, "edge-split|horizontal-swap|vertical-swap");
    ce->add_option("--x", x, "scale");
    ce->add_option("--eps", eps, "perturbation extent");
    ce->add_option("--metrics", metrics, "metric letters or 'all'");
    ce->add_option("--out-dir", out, "write both trees and the distances here");

    auto* ds = app.add_subcommand("distance", "distances between two fields or two tree files");
    ds->add_option("a", field, "first file")->required();
    ds->add_option("b", field_b, "second file")->required();
    ds->add_option("--metrics", metrics, "metric letters or 'all'");
    ds->add_flag("--trees", trees, "inputs are tree dumps rather than fields");
    add_guards(ds, guards);

    auto* sn = app.add_subcommand("scenarios", "list the constructed perturbation cases, optionally writing them");
    sn->add_option("--out-dir", out, "write <file>_f.json and <file>_g.json here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (*bt) return cmd_build_tree(field);
        if (*mx) return cmd_matrix(dir, metric, csv, json_out, threads, guards);
        if (*cl) return cmd_classify(field, field_b, as_json);
        if (*pt) return cmd_perturb(field, vertex, margin, pick, out);
        if (*st) {
            sc.metrics = fc.metrics = parse_metrics(metrics);
            sc.guards = fc.guards = guards;
            fc.seed = sc.seed;
            return cmd_stability(sc, fc, finite, json_out);
        }
        if (*ce) return cmd_counterexample(family, x, eps, metrics, out);
        if (*sn) return cmd_scenarios(out);
        if (*ds) return cmd_distance(field, field_b, metrics, trees, guards);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_code(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
