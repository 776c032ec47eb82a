#include "gradvi/error.hpp"
#include "gradvi/field_io.hpp"

#include "doctest.h"

#include <cmath>
#include <cstring>
#include <filesystem>
#include <random>

using namespace gradvi;

namespace {

bool same_bits(double a, double b) {
    if (std::isnan(a) || std::isnan(b)) return std::isnan(a) && std::isnan(b);
    return std::memcmp(&a, &b, sizeof a) == 0;
}

}  // namespace

TEST_CASE("scalar fields round-trip bit for bit") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1e3, 1e3);
    const auto dir = std::filesystem::temp_directory_path() / "gradvi_field_io";
    std::filesystem::create_directories(dir);
    for (const auto& shape : {DomainShape::disk(0.1, -0.2, 0.7), DomainShape::interval(-1, 2),
                              DomainShape::polygon({{0, 0}, {1, 0}, {0.3, 0.9}})}) {
        const auto g = build_grid(shape, 1.0 / 19.0);
        ScalarField f = ScalarField::zeros(g);
        for (auto& v : f.values) {
            if (!std::isnan(v)) v = u(rng) * std::pow(10.0, static_cast<int>(u(rng)) % 20);
        }
        const auto path = (dir / "f.csv").string();
        export_field(f, path);
        const auto back = import_scalar_field(path);
        REQUIRE(back.values.size() == f.values.size());
        CHECK(back.grid->shape().descriptor() == g->shape().descriptor());
        CHECK(back.grid->h() == g->h());
        for (std::size_t i = 0; i < f.values.size(); ++i) CHECK(same_bits(back[i], f[i]));
        CHECK(field_to_csv(VectorField{back.grid, {back.values}}) == field_to_csv(VectorField{g, {f.values}}));
    }
    std::filesystem::remove_all(dir);
}

TEST_CASE("vector fields keep every component") {
    const auto g = build_grid(DomainShape::rectangle(0, 0, 1, 0.5), 0.125);
    auto v = VectorField::zeros(g, 3);
    for (std::size_t l = 0; l < 3; ++l) {
        for (std::size_t i = 0; i < g->node_count(); ++i) {
            if (!std::isnan(v.components[l][i])) v.components[l][i] = 1.0 / (1.0 + static_cast<double>(i + 7 * l));
        }
    }
    const auto back = field_from_csv(field_to_csv(v));
    REQUIRE(back.size() == 3);
    for (std::size_t l = 0; l < 3; ++l) {
        for (std::size_t i = 0; i < g->node_count(); ++i) CHECK(same_bits(back.components[l][i], v.components[l][i]));
    }
}

TEST_CASE("malformed field files are rejected") {
    const auto g = build_grid(DomainShape::interval(0, 1), 0.25);
    auto f = ScalarField::zeros(g);
    const std::string good = field_to_csv(VectorField{g, {f.values}});
    CHECK_NOTHROW(field_from_csv(good));
    CHECK_THROWS_AS(field_from_csv(""), Error);
    CHECK_THROWS_AS(field_from_csv("shape=interval(0,1)\n"), Error);
    CHECK_THROWS_AS(field_from_csv(good + "1,2\n"), Error);
    std::string bad = good;
    bad.replace(bad.rfind('0'), 1, "x");
    CHECK_THROWS_AS(field_from_csv(bad), Error);
    std::string wide = good;
    wide.insert(wide.size() - 1, ",0");
    CHECK_THROWS_AS(field_from_csv(wide), Error);
    CHECK_THROWS_AS(import_scalar_field("/nonexistent/field.csv"), Error);
}
