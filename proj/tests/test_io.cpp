#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>
#include <sstream>

#include "helpers.hpp"
#include "mtstab/common.hpp"
#include "mtstab/io.hpp"

using namespace mts;

namespace {

std::string error_text(const std::string& text) {
    try {
        parse_field(text, "t.json");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Validation);
        return e.what();
    }
    FAIL("expected an error");
    return {};
}

bool contains(const std::string& s, const std::string& part) { return s.find(part) != std::string::npos; }

} // namespace

TEST_CASE("field formats") {
    ScalarField g = parse_field(R"({"grid": {"rows": 2, "cols": 3, "values": [0, 5, 1, 4, 2, 3]}})");
    CHECK(g.size() == 6);
    CHECK(g.domain.edges.size() == 9);
    CHECK(g.values[1] == 5);

    ScalarField v = parse_field(R"({"vertices": [{"id": 1, "value": 2.5}, {"id": 0, "value": 1}],
                                   "edges": [[0, 1]]})");
    CHECK(v.values == std::vector<double>{1, 2.5});

    ScalarField back = parse_field(field_to_json(g).dump());
    CHECK(back.values == g.values);
    CHECK(back.domain.edges.size() == g.domain.edges.size());
}

TEST_CASE("field errors carry context") {
    std::string syntax = error_text("{\n  \"vertices\": [\n    {\"id\": 0,, }\n]}");
    CHECK(contains(syntax, "t.json"));
    CHECK(contains(syntax, "line 3"));
    CHECK(contains(error_text(R"({"edges": []})"), "vertices"));
    CHECK(contains(error_text(R"({"vertices": [{"id": 0, "value": "x"}], "edges": []})"), "value"));
    CHECK(contains(error_text(R"({"vertices": [{"id": 0, "value": 1}, {"id": 0, "value": 2}], "edges": []})"),
                   "duplicate"));
    CHECK(contains(error_text(R"({"vertices": [{"id": 0, "value": 1}, {"id": 5, "value": 2}], "edges": [[0, 5]]})"),
                   "out of range"));
    error_text(R"({"grid": {"rows": 2, "cols": 2, "values": [0, 1, 2]}})");
    error_text(R"({"vertices": [{"id": 0, "value": 1}, {"id": 1, "value": 1}], "edges": [[0, 1]]})");

    try {
        read_field("/nonexistent/field.json");
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Io);
        CHECK(exit_code(e.kind()) == 1);
    }
    CHECK(exit_code(ErrorKind::Validation) == 2);
    CHECK(exit_code(ErrorKind::Parameter) == 2);
    CHECK(exit_code(ErrorKind::Guard) == 3);
}

TEST_CASE("bundled field files") {
    const std::filesystem::path dir = MTSTAB_DATA_DIR;
    for (const char* stem : {"edge_split", "horizontal_swap", "vertical_swap"}) {
        INFO(stem);
        ScalarField f = read_field((dir / (std::string(stem) + "_f.json")).string());
        ScalarField g = read_field((dir / (std::string(stem) + "_g.json")).string());
        CHECK_NOTHROW(check_minimal(f, g));
    }
}

TEST_CASE("csv round trip") {
    MatrixResult m;
    m.metric = Metric::L;
    m.names = {"a", "b", "c"};
    m.values = {{0, 1.0 / 3, std::nan("")}, {1.0 / 3, 0, 2e-7}, {std::nan(""), 2e-7, 0}};
    m.skipped = {{false, false, true}, {false, false, false}, {true, false, false}};
    std::stringstream ss;
    write_csv(ss, m);
    const std::string text = ss.str();
    CHECK(contains(text, "skip"));
    CHECK(contains(text, "0.333333333"));
    CHECK_FALSE(contains(text, "0.3333333333"));
    MatrixResult r = read_csv(ss, Metric::L);
    REQUIRE(r.size() == 3);
    CHECK(r.names == m.names);
    CHECK(r.skipped == m.skipped);
    CHECK(r.values[0][1] == doctest::Approx(1.0 / 3).epsilon(1e-8));
    CHECK(r.values[1][2] == doctest::Approx(2e-7).epsilon(1e-8));
    CHECK(std::isnan(r.values[0][2]));
    CHECK(format_number(0) == "0");

    json j = matrix_to_json(m);
    CHECK(j["metric"] == "delta_L");
    CHECK(j["names"].size() == 3);
}

TEST_CASE("tree json round trip") {
    std::mt19937_64 rng(51);
    for (int i = 0; i < 20; ++i) {
        MergeTree t = testing::random_abstract_tree(rng, 9);
        MergeTree u = tree_from_json(tree_to_json(t));
        CHECK(u.parent == t.parent);
        CHECK(u.value == t.value);
        CHECK(u.name == t.name);
        CHECK(tree_to_json(u) == tree_to_json(t));
    }
    ScalarField f = random_grid_field(3, 3, rng);
    json d = tree_dump(f);
    CHECK(d.contains("tree"));
    CHECK(d.contains("bdt"));
    CHECK(d.contains("obdt"));
    CHECK(tree_from_json(d["tree"]).size() == build_merge_tree(f).size());
    CHECK_THROWS_AS(tree_from_json(json::parse(R"({"nodes": 3})")), Error);
}
