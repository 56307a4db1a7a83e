#include <cmath>

#include "doctest.h"
#include "oia/ia.hpp"

using namespace oia;

namespace {

double gram_error(const ComplexMatrix& m) {
    return (m.adjoint() * m - ComplexMatrix::identity(m.cols())).max_abs();
}

}  // namespace

TEST_CASE("feasibility counts antennas against streams") {
    CHECK(feasibility(3, 3, 1, 5));        // 6 >= 6
    CHECK_FALSE(feasibility(3, 3, 1, 6));  // 6 < 7
    CHECK(feasibility(2, 2, 1, 3));        // 4 >= 4
    CHECK_FALSE(feasibility(2, 2, 1, 4));
    CHECK(feasibility(4, 4, 2, 3));        // 8 >= 8
    CHECK_THROWS_AS(feasibility(0, 3, 1, 2), std::invalid_argument);
    CHECK_THROWS_AS(feasibility(3, 3, 0, 2), std::invalid_argument);
}

TEST_CASE("single active user aligns trivially") {
    Rng rng(5);
    const ChannelRealization ch = sample_channel_matrices(3, 3, 3, rng);
    IaConfig cfg;
    const IaSolution sol = solve_ia(ch, {1}, cfg, rng);
    CHECK(sol.leakage == 0.0);
    CHECK(sol.iterations_used == 1);
    REQUIRE(sol.precoders.size() == 1);
    CHECK(gram_error(sol.precoders[0]) < 1e-12);
    CHECK(gram_error(sol.combiners[0]) < 1e-12);
    const std::vector<bool> rank_ok = desired_rank_check(sol, ch, cfg.d);
    REQUIRE(rank_ok.size() == 1);
    CHECK(rank_ok[0]);
}

TEST_CASE("three users on 2x2 antennas reach alignment") {
    Rng rng(11);
    const ChannelRealization ch = sample_channel_matrices(3, 2, 2, rng);
    IaConfig cfg;
    const IaSolution sol = solve_ia(ch, {0, 1, 2}, cfg, rng);
    CHECK(sol.leakage < cfg.tol);
    CHECK(sol.leakage == leakage(ch, sol));
    for (const ComplexMatrix& v : sol.precoders) CHECK(gram_error(v) < 1e-10);
    for (const ComplexMatrix& u : sol.combiners) CHECK(gram_error(u) < 1e-10);
    for (std::size_t i = 1; i < sol.leakage_history.size(); ++i)
        CHECK(sol.leakage_history[i] <= sol.leakage_history[i - 1] + 1e-15);
    const std::vector<bool> rank_ok = desired_rank_check(sol, ch, cfg.d);
    for (const bool ok : rank_ok) CHECK(ok);
}

TEST_CASE("leakage matches an independent accumulation") {
    Rng rng(13);
    const ChannelRealization ch = sample_channel_matrices(3, 2, 2, rng);
    IaConfig cfg;
    cfg.max_iter = 3;  // keep a clearly nonzero residual
    cfg.tol = 1e-30;
    const IaSolution sol = solve_ia(ch, {0, 1, 2}, cfg, rng);
    double manual = 0.0;
    for (int k = 0; k < 3; ++k)
        for (int j = 0; j < 3; ++j) {
            if (k == j) continue;
            manual += (sol.combiners[k].adjoint() * ch.link(sol.active_set[k], sol.active_set[j]) *
                       sol.precoders[j])
                          .frobenius_norm_sq();
        }
    CHECK(leakage(ch, sol) == doctest::Approx(manual).epsilon(1e-12));
}

TEST_CASE("infeasible sets stop at a positive residual") {
    Rng rng(17);
    const ChannelRealization ch = sample_channel_matrices(4, 2, 2, rng);
    IaConfig cfg;
    cfg.max_iter = 60;
    const IaSolution sol = solve_ia(ch, {0, 1, 2, 3}, cfg, rng);
    CHECK_FALSE(feasibility(2, 2, 1, 4));
    CHECK(sol.leakage > 1e-4);
    CHECK(sol.iterations_used == 60);
    for (std::size_t i = 1; i < sol.leakage_history.size(); ++i)
        CHECK(sol.leakage_history[i] <= sol.leakage_history[i - 1] + 1e-12);
}

TEST_CASE("solver validates its inputs") {
    Rng rng(19);
    const ChannelRealization ch = sample_channel_matrices(2, 2, 2, rng);
    IaConfig cfg;
    CHECK_THROWS_AS(solve_ia(ch, {}, cfg, rng), std::invalid_argument);
    CHECK_THROWS_AS(solve_ia(ch, {0, 2}, cfg, rng), std::invalid_argument);
    CHECK_THROWS_AS(solve_ia(ch, {-1}, cfg, rng), std::invalid_argument);
    IaConfig wide = cfg;
    wide.d = 3;  // more streams than antennas
    CHECK_THROWS_AS(solve_ia(ch, {0, 1}, wide, rng), std::invalid_argument);
    IaConfig bad = cfg;
    bad.tol = -1.0;
    CHECK_THROWS_AS(solve_ia(ch, {0, 1}, bad, rng), std::invalid_argument);
}

TEST_CASE("identical seeds give identical solutions") {
    Rng ch_rng(23);
    const ChannelRealization ch = sample_channel_matrices(3, 2, 2, ch_rng);
    IaConfig cfg;
    Rng a(31), b(31);
    const IaSolution sa = solve_ia(ch, {0, 1, 2}, cfg, a);
    const IaSolution sb = solve_ia(ch, {0, 1, 2}, cfg, b);
    CHECK(sa.leakage == sb.leakage);
    CHECK(sa.iterations_used == sb.iterations_used);
    CHECK((sa.precoders[2] - sb.precoders[2]).max_abs() == 0.0);
}

TEST_CASE("effective gain is the squared filtered coefficient") {
    Rng rng(37);
    const ChannelRealization ch = sample_channel_matrices(1, 2, 2, rng);
    const IaSolution sol = solve_ia(ch, {0}, IaConfig{}, rng);
    const ComplexMatrix& u = sol.combiners[0];
    const ComplexMatrix& v = sol.precoders[0];
    const ComplexMatrix scalar = u.adjoint() * ch.link(0, 0) * v;
    CHECK(effective_gain(u, ch.link(0, 0), v) ==
          doctest::Approx(std::norm(scalar(0, 0))).epsilon(1e-14));
    ComplexMatrix wide(2, 2);
    CHECK_THROWS_AS(effective_gain(wide, ch.link(0, 0), v), std::invalid_argument);
}
