#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>

#include <hlfp/io.hpp>

using namespace hlfp;

TEST_CASE("grid function round trip is exact") {
    MeshParams p;
    p.panels_per_decade = 3;
    p.x_max = 1e14;
    auto f = sample(make_mesh(p), [](double x) { return m0(x); });
    f.match_tail(0.0, 4.0);
    const std::string text = to_json(f).dump();
    const GridFunction g = grid_function_from_json(json::parse(text));
    CHECK(g.mesh->params() == p);
    CHECK(g.v == f.v);
    CHECK(g.tail == f.tail);
    CHECK(g.parity == f.parity);
    CHECK(to_json(g).dump() == text);
}

TEST_CASE("scaled meshes and odd parity survive") {
    const MeshPtr M = make_mesh()->scaled(0.75);
    auto f = sample(M, [](double x) { return x / (1.0 + x * x); }, {}, Parity::odd);
    const GridFunction g = grid_function_from_json(json::parse(to_json(f).dump()));
    CHECK(g.mesh->scale() == 0.75);
    CHECK(g.parity == Parity::odd);
    CHECK(g.mesh->x() == M->x());
}

TEST_CASE("corrupt input is rejected") {
    auto f = sample(make_mesh(), [](double x) { return m0(x); });
    json j = to_json(f);
    j["values"].erase(j["values"].begin());
    CHECK_THROWS(grid_function_from_json(j));
    json k = to_json(f);
    k["x"][5] = 123.0;
    CHECK_THROWS(grid_function_from_json(k));
}

TEST_CASE("constants document") {
    const json j = constants_json(constants());
    REQUIRE(j.contains("eta"));
    const std::string eta = j["eta"].get<std::string>();
    CHECK(eta.rfind("2.4363", 0) == 0);  // 1/(3^11 2^14 sqrt 2)
    CHECK(eta.find('e') != std::string::npos);
    // 17 significant digits
    CHECK(eta.substr(0, eta.find('e')).size() == 18);
    CHECK(std::stod(eta) == constants().eta);
    for (const char* k : {"delta0", "L0", "delta1", "delta_rho", "ln_L1", "b_m1", "d_m1_minus_1"}) CHECK(j.contains(k));
}

TEST_CASE("csv with several columns") {
    const MeshPtr M = make_mesh();
    auto a = sample(M, [](double) { return 1.0; });
    auto b = sample(M, [](double x) { return x; });
    const std::string s = to_csv({{"a", &a}, {"b", &b}});
    CHECK(s.rfind("x,a,b\n", 0) == 0);
    CHECK(std::count(s.begin(), s.end(), '\n') == M->size() + 1);
}

TEST_CASE("text files") {
    const auto path = (std::filesystem::temp_directory_path() / "hlfp_io_test.txt").string();
    write_text(path, "abc\n");
    CHECK(read_text(path) == "abc\n");
    std::filesystem::remove(path);
    CHECK_THROWS(read_text(path));
}
