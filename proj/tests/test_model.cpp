#include <doctest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "splitfit/models.hpp"

using namespace splitfit;

TEST_CASE("response of the worked model at the true parameter") {
    const ModelDefinition m = make_appendix_model();
    const std::vector<double> u = response(m, m.make_point({2.0}), fixtures::appendix_schedule());
    CHECK(u == std::vector<double>{2.0, 8.0, 18.0});
}

TEST_CASE("response on a single-sample schedule") {
    const ModelDefinition m = make_exponential_model();
    const SamplingSchedule one({0.7});
    const std::vector<double> u = response(m, m.make_point({3.0, 0.5}), one);
    REQUIRE(u.size() == 1);
    CHECK(u[0] == doctest::Approx(3.0 * std::exp(-0.35)).epsilon(1e-15));
}

TEST_CASE("partly-linear response equals the design-matrix route") {
    const ModelDefinition m = make_exponential_model();
    const SamplingSchedule sched = fixtures::exp_schedule();
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> amp(-5.0, 5.0), rate(0.05, 3.0);
    for (int trial = 0; trial < 100; ++trial) {
        const double p1 = amp(rng), p2 = rate(rng);
        const std::vector<double> u = response(m, m.make_point({p1, p2}), sched);
        const DenseMatrix a = design_matrix(m, std::vector<double>{p2}, sched);
        for (std::size_t i = 0; i < u.size(); ++i) {
            const double via_basis = a(i, 0) * p1;
            CHECK(std::abs(u[i] - via_basis) <= 1e-12 * (1.0 + std::abs(u[i])));
        }
    }
}

TEST_CASE("residual against the worked noisy data") {
    const ModelDefinition m = make_appendix_model();
    const DataSeries data = fixtures::appendix_data();

    SUBCASE("at the true parameter") {
        const ResidualVector h = residual(m, m.make_point({2.0}), data);
        CHECK(h.entries[0] == doctest::Approx(0.1).epsilon(1e-12));
        CHECK(h.entries[1] == doctest::Approx(-0.2).epsilon(1e-12));
        CHECK(h.entries[2] == doctest::Approx(0.2).epsilon(1e-12));
    }
    SUBCASE("data equal to the response gives a zero vector") {
        const DataSeries clean{data.schedule, {2.0, 8.0, 18.0}};
        const ResidualVector h = residual(m, m.make_point({2.0}), clean);
        for (double e : h.entries) CHECK(e == 0.0);
    }
    SUBCASE("at the identified minimizer") {
        const ResidualVector h = residual(m, m.make_point({fixtures::appendix_a_min()}), data);
        CHECK(h.entries[0] == doctest::Approx(0.088776).epsilon(1e-4));
        CHECK(h.entries[1] == doctest::Approx(-0.244898).epsilon(1e-4));
        CHECK(h.entries[2] == doctest::Approx(0.098980).epsilon(1e-4));
    }
}

TEST_CASE("merit values of the worked example") {
    const ModelDefinition m = make_appendix_model();
    const DataSeries data = fixtures::appendix_data();
    CHECK(merit(m, m.make_point({2.0}), data) == doctest::Approx(0.09).epsilon(1e-12));
    CHECK(merit(m, m.make_point({fixtures::appendix_a_min()}), data) ==
          doctest::Approx(fixtures::appendix_f_min()).epsilon(1e-12));
    const DataSeries clean{data.schedule, {2.0, 8.0, 18.0}};
    CHECK(merit(m, m.make_point({2.0}), clean) == 0.0);
}

TEST_CASE("design matrix columns") {
    SUBCASE("worked model: t^2 column") {
        const ModelDefinition m = make_appendix_model();
        const DenseMatrix a = design_matrix(m, {}, fixtures::appendix_schedule());
        REQUIRE(a.rows() == 3);
        REQUIRE(a.cols() == 1);
        CHECK(a(0, 0) == 1.0);
        CHECK(a(1, 0) == 4.0);
        CHECK(a(2, 0) == 9.0);
    }
    SUBCASE("constant basis") {
        ModelDefinition m;
        m.parameter_count = 1;
        m.parameter_names = {"offset"};
        m.split = ParameterSplit::all_linear(1);
        m.domain = {{-10, 10}};
        m.evaluate = [](double, std::span<const double> p) { return p[0]; };
        m.basis = [](double, std::span<const double>) { return std::vector<double>{1.0}; };
        const DenseMatrix a = design_matrix(m, {}, SamplingSchedule({1.0, 2.0}));
        CHECK(a(0, 0) == 1.0);
        CHECK(a(1, 0) == 1.0);
    }
    SUBCASE("general linear model: entries are the basis functions at the times") {
        ModelDefinition m;
        m.parameter_count = 2;
        m.parameter_names = {"p1", "p2"};
        m.split = ParameterSplit::all_linear(2);
        m.domain = {{-10, 10}, {-10, 10}};
        m.evaluate = [](double t, std::span<const double> p) {
            return p[0] * std::sin(t) + p[1] * t;
        };
        m.basis = [](double t, std::span<const double>) {
            return std::vector<double>{std::sin(t), t};
        };
        const SamplingSchedule sched({0.5, 1.5, 2.5, 3.5});
        const DenseMatrix a = design_matrix(m, {}, sched);
        for (std::size_t i = 0; i < 4; ++i) {
            CHECK(a(i, 0) == std::sin(sched.times()[i]));
            CHECK(a(i, 1) == sched.times()[i]);
        }
    }
    SUBCASE("missing basis is an error") {
        ModelDefinition m = make_appendix_model();
        m.basis = nullptr;
        CHECK_THROWS_AS(design_matrix(m, {}, fixtures::appendix_schedule()), InvalidArgument);
    }
}

TEST_CASE("eliminate_linear reproduces the worked solution") {
    const ModelDefinition m = make_appendix_model();
    const Elimination e = eliminate_linear(m, {}, fixtures::appendix_data());
    REQUIRE(e.linear_part.size() == 1);
    CHECK(e.linear_part[0] == doctest::Approx(fixtures::appendix_a_min()).epsilon(1e-14));
    CHECK(e.section_value == doctest::Approx(fixtures::appendix_f_min()).epsilon(1e-12));
    CHECK(e.effective_rank == 1);
}

TEST_CASE("eliminate_linear is exact for data in the basis span") {
    const ModelDefinition m = make_exponential_model();
    const SamplingSchedule sched = fixtures::exp_schedule();
    const DataSeries data = fixtures::exp_data(3.0, 0.5, sched);
    const Elimination e = eliminate_linear(m, std::vector<double>{0.5}, data);
    CHECK(e.linear_part[0] == doctest::Approx(3.0).epsilon(1e-13));
    CHECK(e.section_value <= 1e-24);
}

TEST_CASE("eliminate_linear matches a dense sweep oracle at fixed p2") {
    const ModelDefinition m = make_exponential_model();
    const SamplingSchedule sched = fixtures::exp_schedule();
    const DataSeries data = fixtures::exp_data(3.0, 0.5, sched);
    const double p2 = 0.7;
    const Elimination e = eliminate_linear(m, std::vector<double>{p2}, data);

    auto slice = [&](double p1) {
        return merit(m, m.make_point({p1, p2}), data);
    };
    const auto [p1_best, f_best] = oracles::sweep_min(slice, 2.0, 4.0, 100000);
    CHECK(e.linear_part[0] == doctest::Approx(p1_best).epsilon(1e-4));
    CHECK(e.section_value <= f_best + 1e-12);
}

TEST_CASE("conditional optimality of the eliminated point") {
    const ModelDefinition m = make_exponential_model();
    const SamplingSchedule sched = fixtures::exp_schedule();
    DataSeries data = fixtures::exp_data(3.0, 0.5, sched);
    for (std::size_t i = 0; i < data.values.size(); ++i)
        data.values[i] += 0.05 * std::sin(static_cast<double>(3 * i + 1));

    std::mt19937_64 rng(22);
    std::uniform_real_distribution<double> delta(-0.5, 0.5), rate(0.1, 2.0);
    for (int trial = 0; trial < 50; ++trial) {
        const double p2 = rate(rng);
        const Elimination e = eliminate_linear(m, std::vector<double>{p2}, data);
        const double perturbed =
            merit(m, m.make_point({e.linear_part[0] + delta(rng), p2}), data);
        CHECK(perturbed >= e.section_value - 1e-10);
    }
}

TEST_CASE("the conditional Hessian is a positive definite Gram matrix") {
    const ModelDefinition m = make_exponential_model();
    const SamplingSchedule sched = fixtures::exp_schedule();
    const DenseMatrix a = design_matrix(m, std::vector<double>{0.4}, sched);
    DenseMatrix hess = gram(a);
    for (std::size_t i = 0; i < hess.rows(); ++i)
        for (std::size_t j = 0; j < hess.cols(); ++j) hess(i, j) *= 2.0;
    CHECK(is_positive_definite(hess));
}

TEST_CASE("evaluation failures carry the offending sample index") {
    ModelDefinition m = make_exponential_model();
    m.evaluate = [](double t, std::span<const double> p) {
        return t > 5.0 ? std::numeric_limits<double>::quiet_NaN() : p[0] * std::exp(-p[1] * t);
    };
    const SamplingSchedule sched({1.0, 4.0, 6.0});
    try {
        response(m, m.make_point({1.0, 0.5}), sched);
        FAIL("expected EvaluationError");
    } catch (const EvaluationError& e) {
        CHECK(e.sample_index == 2);
        CHECK(e.time == 6.0);
    }
}

TEST_CASE("parameter vectors enforce their bounds and split") {
    const ModelDefinition m = make_exponential_model({-10, 10}, {0.1, 2.0});
    CHECK_THROWS_AS(m.make_point({0.0, 5.0}), InvalidArgument);
    CHECK_THROWS_AS(m.make_point({11.0, 0.5}), InvalidArgument);
    CHECK_NOTHROW(m.make_point({10.0, 2.0})); // closed interval: endpoints admissible
    CHECK_THROWS_AS(m.make_point({1.0}), DimensionError);

    const ParameterVector p = m.make_point({3.0, 0.5});
    CHECK(p.linear_part() == std::vector<double>{3.0});
    CHECK(p.nonlinear_part() == std::vector<double>{0.5});
}

TEST_CASE("parameter split validates the partition") {
    CHECK_THROWS_AS(ParameterSplit({0, 1}, {1}), InvalidArgument);
    CHECK_THROWS_AS(ParameterSplit({0}, {2}), InvalidArgument);
    CHECK_NOTHROW(ParameterSplit({1}, {0, 2}));
    const ParameterSplit s({2, 0}, {1});
    const std::vector<double> full{10.0, 20.0, 30.0};
    CHECK(s.pack_linear(full) == std::vector<double>{30.0, 10.0});
    CHECK(s.pack_nonlinear(full) == std::vector<double>{20.0});
    CHECK(s.assemble(std::vector<double>{30.0, 10.0}, std::vector<double>{20.0}) == full);
}

TEST_CASE("sampling schedules must be strictly increasing and positive") {
    CHECK_THROWS_AS(SamplingSchedule({}), InvalidArgument);
    CHECK_THROWS_AS(SamplingSchedule({0.0, 1.0}), InvalidArgument);
    CHECK_THROWS_AS(SamplingSchedule({1.0, 1.0}), InvalidArgument);
    CHECK_THROWS_AS(SamplingSchedule({2.0, 1.0}), InvalidArgument);
    CHECK_NOTHROW(SamplingSchedule({0.5}));
}

TEST_CASE("repin_linear turns a linear parameter into a scan coordinate") {
    const ModelDefinition m = make_exponential_model();
    const ModelDefinition pinned = repin_linear(m, 0);
    CHECK(pinned.split.linear_indices().empty());
    CHECK(pinned.split.nonlinear_indices() == std::vector<std::size_t>{1, 0});

    const SamplingSchedule sched = fixtures::exp_schedule();
    const DataSeries data = fixtures::exp_data(3.0, 0.5, sched);

    // Eliminating nothing at pinned (rate, amplitude) gives the plain merit.
    const Elimination e = eliminate_linear(pinned, std::vector<double>{0.5, 2.5}, data);
    CHECK(e.linear_part.empty());
    CHECK(e.section_value ==
          doctest::Approx(merit(m, m.make_point({2.5, 0.5}), data)).epsilon(1e-12));

    // Repinning a nonlinear parameter or on a basis-free model is an error.
    CHECK_THROWS_AS(repin_linear(m, 1), InvalidArgument);
    ModelDefinition no_basis = m;
    no_basis.basis = nullptr;
    CHECK_THROWS_AS(repin_linear(no_basis, 0), InvalidArgument);
}

TEST_CASE("repin_linear keeps the remaining columns eliminable") {
    // Bi-exponential: two linear amplitudes, one stays eliminable after the
    // other is pinned.
    ModelDefinition m;
    m.parameter_count = 4;
    m.parameter_names = {"a1", "a2", "r1", "r2"};
    m.split = ParameterSplit({0, 1}, {2, 3});
    m.domain = {{-100, 100}, {-100, 100}, {0.01, 5.0}, {0.01, 5.0}};
    m.evaluate = [](double t, std::span<const double> p) {
        return p[0] * std::exp(-p[2] * t) + p[1] * std::exp(-p[3] * t);
    };
    m.basis = [](double t, std::span<const double> p2) {
        return std::vector<double>{std::exp(-p2[0] * t), std::exp(-p2[1] * t)};
    };

    const SamplingSchedule sched = fixtures::exp_schedule(40);
    std::vector<double> values(sched.size());
    for (std::size_t i = 0; i < values.size(); ++i)
        values[i] = 2.0 * std::exp(-0.3 * sched.times()[i]) +
                    1.5 * std::exp(-1.1 * sched.times()[i]);
    const DataSeries data{sched, values};

    const ModelDefinition pinned = repin_linear(m, 1); // pin a2
    // p2 of the pinned model is (r1, r2, a2).
    const Elimination e = eliminate_linear(pinned, std::vector<double>{0.3, 1.1, 1.5}, data);
    REQUIRE(e.linear_part.size() == 1);
    CHECK(e.linear_part[0] == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(e.section_value <= 1e-20);
}
