#include <cmath>
#include <limits>
#include <vector>

#include "doctest.h"
#include "hwm/field.hpp"
#include "hwm/grid.hpp"
#include "hwm/spacetime.hpp"
#include "hwm/spectral.hpp"
#include "hwm/util.hpp"

using namespace hwm;

namespace {

// Standing free wave cos(xi0 t) sin(xi0 x) stored in the first component;
// an exact solution of the linear wave equation, concentrated on the cone.
Trajectory standing_wave(const Grid& g, int m0, double dt, std::size_t frames) {
    Trajectory traj;
    traj.grid = g;
    const double xi0 = m0 * g.xi_unit();
    for (std::size_t i = 0; i < frames; ++i) {
        const double t = i * dt;
        VecField u(g), ut(g);
        for (int j = 0; j < g.N; ++j) {
            const double s = std::sin(2.0 * M_PI * m0 * j / g.N);
            u.c[0][static_cast<std::size_t>(j)] = std::cos(xi0 * t) * s;
            ut.c[0][static_cast<std::size_t>(j)] = -xi0 * std::sin(xi0 * t) * s;
        }
        traj.times.push_back(t);
        traj.u.push_back(u);
        traj.ut.push_back(ut);
    }
    return traj;
}

double block_linf_diff(const SpaceTimeBlock& a, const SpaceTimeBlock& b) {
    double m = 0.0;
    for (std::size_t f = 0; f < a.frames.size(); ++f)
        for (int c = 0; c < 3; ++c)
            for (std::size_t i = 0; i < a.frames[f].size(); ++i)
                m = std::max(m, std::abs(a.frames[f].c[c][i] - b.frames[f].c[c][i]));
    return m;
}

} // namespace

TEST_SUITE("spacetime") {

TEST_CASE("block construction and validation") {
    const Grid g(1, 16, 2.0 * M_PI);
    const Trajectory traj = standing_wave(g, 2, 0.1, 12);

    const SpaceTimeBlock b = make_block(traj, Channel::U, "none");
    CHECK(b.frame_count() == 12);
    CHECK(b.dt() == doctest::Approx(0.1).epsilon(1e-15));
    CHECK(b.duration() == doctest::Approx(1.2).epsilon(1e-12));
    CHECK(block_linf_diff(b, b) == 0.0);

    // Untapered frames are verbatim copies of the channel.
    for (std::size_t i = 0; i < b.frames.size(); ++i)
        CHECK(b.frames[i].c[0][3] == traj.u[i].c[0][3]);

    CHECK_THROWS_AS(make_block(traj, Channel::U, "tukey"), ConfigError);
    CHECK_THROWS_AS(make_block(traj, Channel::U, "none", 20), ConfigError);
    CHECK_THROWS_AS(make_block(traj, Channel::U, "none", 0, 1), ConfigError);
}

TEST_CASE("hann taper hits the advertised window samples") {
    const Grid g(1, 8, 2.0 * M_PI);
    Trajectory traj;
    traj.grid = g;
    for (std::size_t i = 0; i < 9; ++i) {
        VecField one(g);
        for (auto& x : one.c[0]) x = 1.0;
        traj.times.push_back(0.5 * i);
        traj.u.push_back(one);
        traj.ut.push_back(VecField(g));
    }
    const SpaceTimeBlock b = make_block(traj, Channel::U, "hann");
    CHECK(b.taper == "hann");
    CHECK(b.frames.front().c[0][0] == 0.0);
    CHECK(b.frames.back().c[0][0] == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(b.frames[4].c[0][0] == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("cone shell weights sum to one everywhere") {
    const Grid g(1, 32, 2.0 * M_PI);
    const SpaceTimeBlock b = make_block(standing_wave(g, 3, 0.2, 16), Channel::U, "none");
    const QSpec spec = QSpec::infer(b);
    CHECK(spec.shells() >= 2);
    std::vector<double> ds{0.0, 1e-9, 1e-3};
    for (int i = -10; i <= 10; ++i) ds.push_back(std::ldexp(1.0, i));
    for (double d : ds) {
        double sum = 0.0;
        for (int j = spec.jMin; j <= spec.jMax; ++j) sum += spec.weight(j, d);
        CHECK(std::abs(sum - 1.0) < 1e-14);
    }
}

TEST_CASE("cone shell projections reassemble the block") {
    const Grid g(1, 32, 2.0 * M_PI);
    const Trajectory traj = standing_wave(g, 3, 0.2, 16);
    const SpaceTimeBlock b = make_block(traj, Channel::U, "hann");
    const QSpec spec = QSpec::infer(b);

    SpaceTimeBlock sum = b;
    for (auto& f : sum.frames) f = VecField(g);
    for (int j = spec.jMin; j <= spec.jMax; ++j) {
        const SpaceTimeBlock qj = q_project(b, j, spec);
        for (std::size_t f = 0; f < sum.frames.size(); ++f)
            for (int c = 0; c < 3; ++c)
                for (std::size_t i = 0; i < sum.frames[f].size(); ++i)
                    sum.frames[f].c[c][i] += qj.frames[f].c[c][i];
    }
    CHECK(block_linf_diff(sum, b) < 1e-10);

    const Trajectory tiny = standing_wave(g, 3, 0.2, 4);
    const SpaceTimeBlock small = make_block(tiny, Channel::U, "none");
    CHECK_THROWS_AS(q_project(small, spec.jMin, spec), ConfigError);
}

TEST_CASE("mixed space-time Lebesgue norms on a separable block") {
    const Grid g(1, 64, 2.0 * M_PI);
    Trajectory traj;
    traj.grid = g;
    const std::size_t M = 11;
    const double dt = 0.1;
    for (std::size_t i = 0; i < M; ++i) {
        VecField u(g);
        for (int j = 0; j < g.N; ++j)
            u.c[0][static_cast<std::size_t>(j)] = std::sin(2.0 * M_PI * 2 * j / g.N);
        traj.times.push_back(i * dt);
        traj.u.push_back(u);
        traj.ut.push_back(VecField(g));
    }
    const SpaceTimeBlock b = make_block(traj, Channel::U, "none");
    const double span = (M - 1) * dt;
    const double space_l2 = std::sqrt(M_PI); // ||sin(2x)||_{L2} on [0, 2*pi)

    CHECK(spacetime_norm(b, NormSpec::lpt_lqx(2.0, 2.0)) ==
          doctest::Approx(std::sqrt(span) * space_l2).epsilon(1e-12));
    CHECK(spacetime_norm(b, NormSpec::lpt_lqx(1.0, 2.0)) ==
          doctest::Approx(span * space_l2).epsilon(1e-12));
    const double inf = std::numeric_limits<double>::infinity();
    CHECK(spacetime_norm(b, NormSpec::lpt_lqx(inf, 2.0)) ==
          doctest::Approx(space_l2).epsilon(1e-12));
    CHECK(spacetime_norm(b, NormSpec::lpt_lqx(inf, inf)) ==
          doctest::Approx(1.0).epsilon(1e-12));
    // One derivative weight doubles each mode-2 coefficient.
    CHECK(spacetime_norm(b, NormSpec::lpt_lqx(2.0, 2.0, 1.0)) ==
          doctest::Approx(2.0 * std::sqrt(span) * space_l2).epsilon(1e-12));

    CHECK_THROWS_AS(spacetime_norm(b, NormSpec::sobolev(0.5)), ConfigError);
}

TEST_CASE("cone norm options and guards") {
    const Grid g(1, 32, 2.0 * M_PI);
    const Trajectory traj = standing_wave(g, 3, 0.1, 33);
    const SpaceTimeBlock b = make_block(traj, Channel::U, "hann");

    const double l1 = spacetime_norm(b, NormSpec::xstheta(0.25, 0.25, NormSpec::Ell::L1));
    const double sup = spacetime_norm(b, NormSpec::xstheta(0.25, 0.25, NormSpec::Ell::Sup));
    CHECK(l1 > 0.0);
    CHECK(sup > 0.0);
    CHECK(sup <= l1 * (1.0 + 1e-12));

    NormSpec paired = NormSpec::xstheta(0.25, 0.25); // s - 1/2 == theta - 1/2 in 1d
    paired.check_pairing = true;
    CHECK_NOTHROW(spacetime_norm(b, paired));
    NormSpec broken = NormSpec::xstheta(0.3, 0.5);
    broken.check_pairing = true;
    CHECK_THROWS_AS(spacetime_norm(b, broken), ConfigError);

    // Negative spatial order demands mean-free frames.
    Trajectory biased = traj;
    for (auto& f : biased.u)
        for (auto& x : f.c[0]) x += 0.7;
    const SpaceTimeBlock bb = make_block(biased, Channel::U, "none");
    CHECK_THROWS_AS(spacetime_norm(bb, NormSpec::xstheta(-0.5, 0.5)), DomainError);
}

TEST_CASE("dispersive norm admissibility") {
    const Grid g1(1, 32, 2.0 * M_PI);
    const SpaceTimeBlock b1 = make_block(standing_wave(g1, 3, 0.1, 17), Channel::U, "none");
    CHECK(spacetime_norm(b1, NormSpec::snorm()) > 0.0);

    const double inf = std::numeric_limits<double>::infinity();
    NormSpec bad = NormSpec::snorm();
    bad.pairs = {{4.0, inf}}; // fails 1/p + (n-1)/(2q) <= (n-1)/4 in one dimension
    CHECK_THROWS_AS(spacetime_norm(b1, bad), ConfigError);
    NormSpec sub = NormSpec::snorm();
    sub.pairs = {{2.0, 1.0}};
    CHECK_THROWS_AS(spacetime_norm(b1, sub), ConfigError);

    const Grid g2(2, 8, 2.0 * M_PI);
    Trajectory t2;
    t2.grid = g2;
    for (std::size_t i = 0; i < 17; ++i) {
        VecField u(g2);
        for (std::size_t j = 0; j < u.size(); ++j)
            u.c[0][j] = std::sin(2.0 * M_PI * static_cast<double>(j % 8) / 8.0) *
                        std::cos(0.3 * i);
        t2.times.push_back(0.1 * i);
        t2.u.push_back(u);
        t2.ut.push_back(VecField(g2));
    }
    const SpaceTimeBlock b2 = make_block(t2, Channel::U, "none");
    NormSpec two = NormSpec::snorm();
    two.pairs = {{4.0, inf}}; // admissible once n = 2
    CHECK_NOTHROW(spacetime_norm(b2, two));
}

TEST_CASE("interaction norm never exceeds its first branch") {
    const Grid g(1, 32, 2.0 * M_PI);
    const Trajectory traj = standing_wave(g, 3, 0.1, 17);
    const SpaceTimeBlock b = make_block(traj, Channel::U, "hann");
    const LPSpec spec = LPSpec::infer(g);

    // Independent evaluation of the L1-in-time Sobolev branch, shell by shell.
    double branch = 0.0;
    for (int k = spec.kMin; k <= spec.kMax; ++k) {
        SpaceTimeBlock bk = b;
        for (auto& f : bk.frames) f = lp_project(f, k, spec);
        branch += spacetime_norm(bk, NormSpec::lpt_lqx(1.0, 2.0, g.n / 2.0 - 1.0));
    }
    const double nn = spacetime_norm(b, NormSpec::nnorm());
    CHECK(nn > 0.0);
    CHECK(nn <= branch * (1.0 + 1e-12));
}

TEST_CASE("time localization plateau and support") {
    const Grid g(1, 16, 2.0 * M_PI);
    const Trajectory traj = standing_wave(g, 2, 0.5, 21); // times up to 10
    const Trajectory loc = time_localize(traj, 2.0);
    REQUIRE(loc.frames() == traj.frames());
    for (std::size_t i = 0; i < traj.frames(); ++i) {
        const double t = traj.times[i];
        if (t <= 2.0) {
            CHECK(loc.u[i].c[0][3] == traj.u[i].c[0][3]);
            CHECK(loc.ut[i].c[0][3] == traj.ut[i].c[0][3]);
        }
        if (t >= 4.0) {
            CHECK(loc.u[i].c[0][3] == 0.0);
            CHECK(loc.ut[i].c[0][3] == 0.0);
        }
    }
    CHECK_THROWS_AS(time_localize(traj, 0.0), ConfigError);
}

TEST_CASE("cone norm of a localized free wave scales with the window") {
    // A free wave lives on d ~ 1/T after smooth truncation to width T, so
    // X^{0,theta} ~ T^{1/2 - theta}: energy grows like sqrt(T) while the
    // cone-distance weight contributes T^{-theta}.
    const Grid g(1, 32, 2.0 * M_PI);
    const double dt = 0.25;
    const Trajectory traj = standing_wave(g, 4, dt, 513); // times up to 128
    const double theta = 0.25;

    std::vector<double> lx, ly;
    for (double T : {0.8, 1.6, 3.2, 6.4}) {
        const Trajectory loc = time_localize(traj, T);
        const SpaceTimeBlock b = make_block(loc, Channel::U, "none");
        const double v = spacetime_norm(b, NormSpec::xstheta(0.0, theta));
        CHECK(v > 0.0);
        lx.push_back(std::log2(T));
        ly.push_back(std::log2(v));
    }
    const double slope = fit_slope(lx, ly);
    const double want = 0.5 - theta;
    CHECK(slope > want * 0.75);
    CHECK(slope < want * 1.25);
}

} // TEST_SUITE
