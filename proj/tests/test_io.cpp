#include <gtest/gtest.h>

#include <map>
#include <sstream>

#include "atsp/errors.hpp"
#include "atsp/gadgets.hpp"
#include "atsp/io.hpp"
#include "atsp/laminar_ops.hpp"

namespace atsp {
namespace {

const char* kHeader =
    "NAME: t\nTYPE: ATSP\nDIMENSION: 3\nEDGE_WEIGHT_TYPE: EXPLICIT\nEDGE_WEIGHT_FORMAT: FULL_MATRIX\n"
    "EDGE_WEIGHT_SECTION\n";

InputGraph parse_text(const std::string& text) {
  std::istringstream in(text);
  return read_input(in);
}

std::string parse_error_of(const std::string& text) {
  try {
    parse_text(text);
  } catch (const ParseError& e) {
    return e.what();
  }
  return "";
}

TEST(Tsplib, UnitMatrixIsCompleteK3) {
  InputGraph in = parse_text(std::string(kHeader) + "0 1 1\n1 0 1\n1 1 0\nEOF\n");
  EXPECT_EQ(in.g.num_vertices(), 3);
  ASSERT_EQ(in.g.num_edges(), 6);
  for (const Edge& e : in.g.edges()) {
    EXPECT_NE(e.tail, e.head);
    EXPECT_EQ(in.w[e.id], 1);
  }
  EXPECT_FALSE(in.instance.has_value());
}

TEST(Tsplib, DimensionMismatchNamesTheLine) {
  const std::string err = parse_error_of(std::string(kHeader) + "0 1\n1 0\nEOF\n");
  EXPECT_NE(err.find("line 8"), std::string::npos) << err;
  EXPECT_NE(err.find("DIMENSION 3"), std::string::npos) << err;
}

TEST(Tsplib, RejectsMalformedInput) {
  EXPECT_NE(parse_error_of("TYPE: TSP\n"), "");
  EXPECT_NE(parse_error_of("TYPE: ATSP\nEDGE_WEIGHT_FORMAT: UPPER_ROW\n"), "");
  EXPECT_NE(parse_error_of(std::string(kHeader) + "0 1 1\n1 0 -1\n1 1 0\n"), "");
  EXPECT_NE(parse_error_of(std::string(kHeader) + "0 1 1\n1 0 1\n1 1 0 7\n"), "");
  EXPECT_NE(parse_error_of(std::string(kHeader) + "0 1 x\n1 0 1\n1 1 0\n"), "");
  EXPECT_NE(parse_error_of("TYPE: ATSP\nEDGE_WEIGHT_SECTION\n0\n"), "");
  EXPECT_NE(parse_error_of("TYPE: ATSP\nDIMENSION: 2\n"), "");
}

TEST(Tsplib, AcceptsFullInt64Range) {
  InputGraph in = parse_text(
      "TYPE: ATSP\nDIMENSION: 2\nEDGE_WEIGHT_TYPE: EXPLICIT\nEDGE_WEIGHT_FORMAT: FULL_MATRIX\n"
      "EDGE_WEIGHT_SECTION\n0 9223372036854775807\n0 0\nEOF\n");
  EXPECT_EQ(to_string(in.w[0]), "9223372036854775807");
  EXPECT_NE(parse_error_of("TYPE: ATSP\nDIMENSION: 2\nEDGE_WEIGHT_SECTION\n0 9223372036854775808\n0 0\n"), "");
}

TEST(Tsplib, WriteThenParseRoundTrips) {
  InputGraph a = generate("random", 6, 11);
  InputGraph b = parse_text(write_tsplib(a.g, a.w, "r6"));
  ASSERT_EQ(a.g.num_edges(), b.g.num_edges());
  for (const Edge& e : a.g.edges()) {
    EXPECT_EQ(b.g.edge(e.id).tail, e.tail);
    EXPECT_EQ(b.g.edge(e.id).head, e.head);
    EXPECT_EQ(b.w[e.id], a.w[e.id]);
  }
  InputGraph sparse = generate("sparse", 6, 1);
  EXPECT_THROW(write_tsplib(sparse.g, sparse.w, "s"), SolveError);
}

TEST(Json, GraphRoundTripIsIdentical) {
  for (const std::string kind : {"random", "sparse", "node-weighted", "two-weight"}) {
    InputGraph a = generate(kind, 7, 3);
    const std::string text = graph_to_json(a.g, a.w).dump();
    InputGraph b = parse_text(text);
    EXPECT_EQ(graph_to_json(b.g, b.w).dump(), text) << kind;
  }
}

TEST(Json, InstanceRoundTripKeepsLaminarFamily) {
  InputGraph a = generate("series-scc", 0, 0);
  ASSERT_TRUE(a.instance.has_value());
  const std::string text = input_to_json(a).dump();
  InputGraph b = parse_text(text);
  ASSERT_TRUE(b.instance.has_value());
  EXPECT_EQ(input_to_json(b).dump(), text);
  EXPECT_TRUE(verify_instance(*b.instance).empty());
}

TEST(Json, RejectsBadInput) {
  EXPECT_THROW(parse_text("{\"n\": 2, \"edges\": [{\"tail\": 0, \"head\": 5, \"w\": 1}]}"), ParseError);
  EXPECT_THROW(parse_text("{\"n\": 2, \"edges\": [{\"tail\": 0, \"head\": 1, \"w\": \"-1\"}]}"), ParseError);
  EXPECT_THROW(parse_text("{\"n\": 2, \"edges\": [{\"tail\": 0, \"head\": 1, \"w\": 0.5}]}"), ParseError);
  EXPECT_THROW(parse_text("{\"n\": 2"), ParseError);
  InputGraph ok = parse_text("{\"n\": 2, \"edges\": [{\"tail\": 0, \"head\": 1, \"w\": \"3/2\"}, {\"tail\": 1, \"head\": 0, \"w\": 4}]}");
  EXPECT_EQ(ok.w[0], make_rational(3, 2));
  EXPECT_EQ(ok.w[1], 4);
}

TEST(Generate, NodeWeightedDecomposes) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    InputGraph in = generate("node-weighted", 5, seed);
    std::map<std::pair<int, int>, Rational> w;
    for (const Edge& e : in.g.edges()) w[{e.tail, e.head}] = in.w[e.id];
    std::vector<Rational> f(5);
    f[0] = (w[{0, 1}] + w[{0, 2}] - w[{1, 2}]) / 2;
    for (int v = 1; v < 5; ++v) f[v] = w[{0, v}] - f[0];
    for (const Edge& e : in.g.edges()) EXPECT_EQ(in.w[e.id], f[e.tail] + f[e.head]) << seed;
  }
}

TEST(Generate, DeterministicPerSeed) {
  for (const std::string kind : generator_kinds()) {
    EXPECT_EQ(input_to_json(generate(kind, 6, 42)).dump(), input_to_json(generate(kind, 6, 42)).dump()) << kind;
  }
  EXPECT_NE(input_to_json(generate("random", 6, 1)).dump(), input_to_json(generate("random", 6, 2)).dump());
}

TEST(Generate, OutputsAreStronglyConnected) {
  for (const std::string kind : generator_kinds()) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      InputGraph in = generate(kind, 2 + static_cast<int>(seed) * 2, seed);
      EXPECT_TRUE(strongly_connected(in.g, all_vertices(in.g.num_vertices()))) << kind << " " << seed;
    }
  }
  InputGraph tw = generate("two-weight", 6, 0);
  for (const Rational& w : tw.w) EXPECT_TRUE(w == 1 || w == 2);
}

TEST(Generate, Fig2GadgetReproducesDs) {
  InputGraph in = generate("fig2-contraction", 0, 0);
  ASSERT_TRUE(in.instance.has_value());
  Gadget gd = fig2_contraction_gadget();
  EXPECT_EQ(*distance_DS(*in.instance, gd.focus, gd.named.at("v_in"), gd.named.at("u_out")), 22);
}

TEST(Generate, RejectsUnknownKindAndTinyN) {
  EXPECT_THROW(generate("nope", 5, 0), SolveError);
  EXPECT_THROW(generate("random", 1, 0), SolveError);
  EXPECT_THROW(parse_format("xml"), ParseError);
}

}  // namespace
}  // namespace atsp
