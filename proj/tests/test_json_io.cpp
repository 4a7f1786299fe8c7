#include <gtest/gtest.h>

#include "nhomog/json_io.hpp"

using namespace nhomog;

namespace {

ErrorKind kind_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    ADD_FAILURE() << "no error raised";
    return ErrorKind::DomainError;
}

}  // namespace

TEST(JsonIo, ValidTuple) {
    const auto doc = json_io::parse_text(R"({"tuple": [[[0, 1], [1, 0]], [[1, 0], [0, [-1, 0.5]]]]})");
    const MatTuple t = json_io::tuple(doc);
    EXPECT_EQ(t.dim(), 2);
    EXPECT_EQ(t.size(), 2);
    EXPECT_EQ(t[1](1, 1), Complex(-1, 0.5));
}

TEST(JsonIo, SchemaErrors) {
    EXPECT_EQ(kind_of([] { json_io::tuple(json_io::parse_text(R"({"tuple": [[[0, 1], [1]]]})")); }), ErrorKind::SchemaError);
    EXPECT_EQ(kind_of([] { json_io::tuple(json_io::parse_text(R"({"tuple": [[[0, NaN], [1, 0]]]})")); }), ErrorKind::SchemaError);
    EXPECT_EQ(kind_of([] { json_io::tuple(json_io::parse_text(R"({"tuple": [[[0, -Infinity], [1, 0]]]})")); }), ErrorKind::SchemaError);
    EXPECT_EQ(kind_of([] { json_io::tuple(json_io::parse_text(R"({"tuple": [[[0, 1, 2], [1, 0, 3]]]})")); }), ErrorKind::SchemaError);
    EXPECT_EQ(kind_of([] { json_io::tuple(json_io::parse_text(R"({"tuple": [[[1]], [[1, 0], [0, 1]]]})")); }), ErrorKind::SchemaError);
    EXPECT_EQ(kind_of([] { json_io::tuple(json_io::parse_text(R"({"tuples": []})")); }), ErrorKind::SchemaError);
    EXPECT_EQ(kind_of([] { json_io::tuple(json_io::parse_text(R"({"tuple": [[["1", 0], [0, 1]]]})")); }), ErrorKind::SchemaError);
    EXPECT_EQ(kind_of([] { json_io::tuple(json_io::parse_text(R"({"tuple": [[[[1, 2, 3], 0], [0, 1]]]})")); }), ErrorKind::SchemaError);
}

TEST(JsonIo, ParseErrors) {
    EXPECT_EQ(kind_of([] { json_io::parse_text(R"({"tuple": [)"); }), ErrorKind::ParseError);
    EXPECT_EQ(kind_of([] { json_io::parse_file("/nonexistent/input.json"); }), ErrorKind::ParseError);
    // a NaN inside a string is left alone
    EXPECT_EQ(json_io::parse_text(R"({"s": "NaN"})")["s"], "NaN");
}

TEST(JsonIo, FunctionAlgebraAndSpace) {
    const auto doc = json_io::parse_text(
        R"({"points": 2, "n": 1, "generators": [[[[1]], [[2]]]], "orbits": 3})");
    const FnAlgebra e = json_io::fn_algebra(doc, {});
    EXPECT_EQ(e.dim(), 2);
    const FiniteNSpace s = json_io::n_space(doc);
    EXPECT_EQ(s.m, 3);
    EXPECT_EQ(kind_of([] {
                  json_io::fn_algebra(json_io::parse_text(R"({"points": 3, "n": 1, "generators": [[[[1]], [[2]]]]})"), {});
              }),
              ErrorKind::SchemaError);
}

TEST(JsonIo, Roundtrip) {
    const CMatrix m = make_matrix(2, 2, {Complex(1, 2), 0, Complex(-0.5, 0), Complex(0, -3)});
    const auto j = json_io::to_json(m);
    EXPECT_EQ((json_io::matrix(j, "m") - m).norm(), 0.0);
    const auto t = json_io::to_json(Tolerance{});
    EXPECT_EQ(t["rank_cut"], 1e-9);
}
