#include "support.hpp"

#include "sorted_effects/confset.hpp"
#include "sorted_effects/error.hpp"
#include "sorted_effects/normal.hpp"
#include "sorted_effects/quantile.hpp"

#include <doctest.h>

#include <algorithm>

using namespace sorted_effects;
using testing_support::effects_of;

namespace {

RowMask mask_of(std::size_t n, std::vector<std::size_t> members) {
    RowMask m(n, false);
    for (auto i : members) m[i] = true;
    return m;
}

bool subset(const RowMask& a, const RowMask& b) {
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i] && !b[i]) return false;
    return true;
}

}  // namespace

TEST_CASE("estimated sets use weak thresholds") {
    std::vector<double> d;
    for (int k = 1; k <= 10; ++k) d.push_back(k / 10.0);
    const auto sets = estimated_sets(effects_of(d), 0.2);
    const std::vector<double> w(10, 1.0);
    const double lo = weighted_quantile(d, w, 0.2), hi = weighted_quantile(d, w, 0.8);
    for (std::size_t i = 0; i < 10; ++i) {
        CHECK(sets.least[i] == (d[i] <= lo));
        CHECK(sets.most[i] == (d[i] >= hi));
    }
    const auto flat = estimated_sets(effects_of({2, 2, 2}), 0.1);
    CHECK(flat.least == RowMask(3, true));
    CHECK(flat.most == RowMask(3, true));
}

TEST_CASE("six-unit toy trace") {
    // delta = 0.1..0.6, u = 0.2: q(0.2) = 0.2, q(0.8) = 0.5.
    // Replicate r perturbs unit i by a_i * p_r with p = (-1, 0, 2) and keeps
    // the quantiles fixed, so every gap has se_i = 3 a_i / D, D = 1.34898.
    // Least side: argmin |delta - 0.2| is unit 2 (a = 0.05), V* = p D / 3,
    // c_least = 2D/3 = 0.8993. Stats (delta - 0.2) / se:
    //   -0.45, 0, 0.45, 1.80, 0.67, 1.80  -> {1, 2, 3, 5}.
    // Most side: argmin is unit 5, V* = -p D / 3, c_most = D/3 = 0.4497.
    // Stats (0.5 - delta) / se: 1.80, 2.70, 0.90, 0.90, 0, -0.45 -> {5, 6}.
    const auto e = effects_of({0.1, 0.2, 0.3, 0.4, 0.5, 0.6});
    const double a[] = {0.1, 0.05, 0.1, 0.05, 0.2, 0.1};
    const double p[] = {-1, 0, 2};
    Eigen::MatrixXd draws(3, 8);
    for (Eigen::Index r = 0; r < 3; ++r) {
        for (Eigen::Index i = 0; i < 6; ++i) draws(r, i) = e.delta(i) + a[i] * p[r];
        draws(r, 6) = 0.2;
        draws(r, 7) = 0.5;
    }
    const auto res = confidence_sets(e, draws, 0.2, 0.1);
    const double D = normal_quantile(0.75) - normal_quantile(0.25);
    CHECK(res.sets.least == mask_of(6, {0, 1}));
    CHECK(res.sets.most == mask_of(6, {4, 5}));
    CHECK(res.argmin_least == 1);
    CHECK(res.argmin_most == 4);
    CHECK(res.c_least == doctest::Approx(2 * D / 3));
    CHECK(res.c_most == doctest::Approx(D / 3));
    CHECK(res.se_least(0) == doctest::Approx(0.3 / D));
    CHECK(res.cs_least == mask_of(6, {0, 1, 2, 4}));
    CHECK(res.cs_most == mask_of(6, {4, 5}));
}

TEST_CASE("zero se at the closest unit is an error") {
    const auto e = effects_of({0.1, 0.2, 0.3, 0.4, 0.5, 0.6});
    Eigen::MatrixXd draws(3, 8);
    for (Eigen::Index r = 0; r < 3; ++r) {
        for (Eigen::Index i = 0; i < 6; ++i) draws(r, i) = e.delta(i);
        draws(r, 6) = 0.2;
        draws(r, 7) = 0.5;
    }
    CHECK_THROWS_AS(confidence_sets(e, draws, 0.2, 0.1), Error);
}

TEST_CASE("containment and monotonicity in alpha on simulated draws") {
    Philox4x32 g(3, 0);
    for (int rep = 0; rep < 20; ++rep) {
        const std::size_t n = 40;
        std::vector<double> d(n);
        for (auto& v : d) v = g.normal();
        const auto e = effects_of(d);
        Eigen::MatrixXd draws(200, static_cast<Eigen::Index>(n) + 2);
        for (Eigen::Index r = 0; r < 200; ++r) {
            std::vector<double> star(n);
            for (std::size_t i = 0; i < n; ++i) star[i] = d[i] + 0.2 * g.normal();
            for (std::size_t i = 0; i < n; ++i) draws(r, static_cast<Eigen::Index>(i)) = star[i];
            const std::vector<double> w(n, 1.0);
            draws(r, static_cast<Eigen::Index>(n)) = weighted_quantile(star, w, 0.1);
            draws(r, static_cast<Eigen::Index>(n) + 1) = weighted_quantile(star, w, 0.9);
        }
        const auto wide = confidence_sets(e, draws, 0.1, 0.01);
        const auto narrow = confidence_sets(e, draws, 0.1, 0.3);
        if (narrow.c_least >= 0) CHECK(subset(narrow.sets.least, narrow.cs_least));
        if (narrow.c_most >= 0) CHECK(subset(narrow.sets.most, narrow.cs_most));
        CHECK(subset(narrow.cs_least, wide.cs_least));
        CHECK(subset(narrow.cs_most, wide.cs_most));
    }
}

TEST_CASE("six-number summaries") {
    Dataset data;
    data.add_numeric("v", {4, 1, 3, 2, 10});
    data.add_factor("f", {"a", "b", "a", "b", "a"});
    const auto e = effects_of({0, 0, 0, 0, 0});
    const auto one = summarize_affected(data, e, mask_of(5, {2}), {"v"});
    REQUIRE(one.size() == 1);
    for (double s : {one[0].min, one[0].q1, one[0].median, one[0].mean, one[0].q3, one[0].max}) CHECK(s == 3.0);
    // Members {4, 1, 3, 2}: type-1 quartiles 1, 2, 3; mean 2.5.
    const auto four = summarize_affected(data, e, mask_of(5, {0, 1, 2, 3}), {"v"});
    CHECK(four[0].min == 1.0);
    CHECK(four[0].q1 == 1.0);
    CHECK(four[0].median == 2.0);
    CHECK(four[0].mean == 2.5);
    CHECK(four[0].q3 == 3.0);
    CHECK(four[0].max == 4.0);
    CHECK_THROWS_AS(summarize_affected(data, e, mask_of(5, {0}), {"f"}), Error);
}

TEST_CASE("projection drops shared units unless overlap is requested") {
    Dataset data;
    data.add_numeric("x", {1, 2, 3, 4});
    data.add_numeric("y", {5, 6, 7, 8});
    const auto e = effects_of({0, 0, 0, 0});
    ConfSetResult res;
    res.cs_most = mask_of(4, {2, 3});
    res.cs_least = mask_of(4, {0, 2});
    const auto keep = project_sets(data, e, res, "x", "y", true);
    const auto drop = project_sets(data, e, res, "x", "y", false);
    CHECK(keep.most.size() == 2);
    CHECK(keep.least.size() == 2);
    CHECK(drop.most.size() == 1);
    CHECK(drop.least.size() == 1);
    CHECK(drop.most[0].unit == 3);
    CHECK(drop.least[0].x == 1.0);
    res.cs_least = mask_of(4, {0});
    const auto disjoint_a = project_sets(data, e, res, "x", "y", true);
    const auto disjoint_b = project_sets(data, e, res, "x", "y", false);
    CHECK(disjoint_a.most.size() == disjoint_b.most.size());
    CHECK(disjoint_a.least.size() == disjoint_b.least.size());
}
