#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "homord/builders.hpp"
#include "homord/errors.hpp"
#include "homord/io.hpp"

using namespace homord;

TEST_CASE("text round trip") {
  for (const auto& s : {build_paley_graph(13), build_bipartite_deg2(6, 3), build_involution_order(4, 9),
                        build_f2_vector_space(2), build_two_predicate_PQ(2, 3)}) {
    const auto text = to_text(s);
    const auto back = parse_text(text);
    CHECK(back == s);
    CHECK(to_text(back) == text);
  }
}

TEST_CASE("text format details") {
  const auto s = parse_text("# a path\nsig E:2:sym:irr\nsize 3\nrel E 0 1  # edge\nrel E 1 0\n\nrel E 1 2\nrel E 2 1\n");
  CHECK(s.size() == 3);
  CHECK(s.holds(0, 0, 1));
  CHECK_FALSE(s.holds(0, 0, 2));
  // Declared symmetric: a missing reverse tuple is an error, not implied.
  CHECK_THROWS_AS(parse_text("sig E:2:sym\nsize 2\nrel E 0 1\n"), ValidationError);
  CHECK_THROWS_AS(parse_text("size 3\n"), ValidationError);
  CHECK_THROWS_AS(parse_text("sig E:2\n"), ValidationError);
  CHECK_THROWS_AS(parse_text("sig E:2\nsize 2\nrel E 0 5\n"), ValidationError);
  CHECK_THROWS_AS(parse_text("sig E:2\nsize 2\nrel F 0 1\n"), ValidationError);
  CHECK_THROWS_AS(parse_text("sig E:two\nsize 2\n"), ValidationError);
  CHECK_THROWS_AS(parse_text("sig E:2:odd\nsize 2\n"), ValidationError);
  CHECK_THROWS_AS(parse_text("sig E:2\nsize 2\nedge 0 1\n"), ValidationError);
  CHECK_THROWS_AS(parse_text("sig P:1\nsize 2\nsorts A\n"), ValidationError);
}

TEST_CASE("json round trip") {
  const auto s = build_bipartite_deg2(10, 4);
  CHECK(structure_from_json(to_json(s)) == s);
  CHECK(structure_from_json(Json::parse(to_json(s).dump())) == s);
  const auto chain = build_involution_chain({2, 4}, 5);
  const auto back = chain_from_json(Json::parse(to_json(chain).dump()));
  REQUIRE(back.levels.size() == chain.levels.size());
  for (std::size_t i = 0; i < chain.levels.size(); ++i) CHECK(back.levels[i] == chain.levels[i]);
  CHECK(back.class_name == chain.class_name);
  CHECK(back.seed == chain.seed);
  CHECK(back.saturation == chain.saturation);
  CHECK_THROWS_AS(structure_from_json(Json{{"size", 2}}), ValidationError);
}

TEST_CASE("chain files") {
  const auto dir = std::string(std::getenv("TMPDIR") ? std::getenv("TMPDIR") : "/tmp");
  const auto json_path = dir + "/homord_io_chain.json";
  const auto text_path = dir + "/homord_io_structure.txt";
  const auto chain = build_paley_chain();
  std::ofstream(json_path) << to_json(chain).dump();
  std::ofstream(text_path) << to_text(chain.last());
  CHECK(load_chain(json_path).last() == chain.last());
  CHECK(load_chain(text_path).last() == chain.last());
  CHECK_THROWS_AS(load_chain(dir + "/homord_missing_file.json"), ValidationError);
  std::remove(json_path.c_str());
  std::remove(text_path.c_str());
}

TEST_CASE("report json") {
  const auto system = build_cro_system(FraisseClassSpec::parse("linear_order"), 3);
  const auto r = uniqueness_report(system);
  const auto j = to_json(system, r);
  CHECK(j.at("uniformFeasible") == true);
  CHECK(j.at("variables").size() == system.variables.size());
  CHECK(j.at("diracSolutions").size() == 2);
  CHECK(j.at("equalities").at("total") == system.rows.size());
  const auto v = to_json(TestVerdict{"x", 0.5, 0.001, "p >= alpha", true, 7, 100, ""});
  CHECK(v.at("seed") == 7);
  CHECK(to_json(Estimate::frequency(1, 4)).at("ci99").size() == 2);
}
