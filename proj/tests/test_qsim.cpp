#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "qfd/qsim.hpp"

using qfd::qsim::Complex;
using qfd::qsim::StateVector;

namespace {

constexpr double kPi = std::numbers::pi;

void check_amplitudes(const StateVector& st, const oracles::CVec& expected, double tol = 1e-12) {
    REQUIRE(st.dim() == expected.size());
    for (std::size_t k = 0; k < expected.size(); ++k) {
        CHECK(std::abs(st.amplitudes()[k] - expected[k]) <= tol);
    }
}

Complex inner_product(const StateVector& a, const StateVector& b) {
    Complex acc{0.0, 0.0};
    for (std::size_t k = 0; k < a.dim(); ++k) {
        acc += std::conj(a.amplitudes()[k]) * b.amplitudes()[k];
    }
    return acc;
}

StateVector random_state(std::size_t n, std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<Complex> amps(std::size_t{1} << n);
    double norm = 0.0;
    for (Complex& a : amps) {
        a = Complex{gauss(rng), gauss(rng)};
        norm += std::norm(a);
    }
    norm = std::sqrt(norm);
    for (Complex& a : amps) {
        a /= norm;
    }
    return StateVector::from_amplitudes(n, std::move(amps));
}

// Applies the same uniformly random gate to two states.
void apply_random_gate(StateVector& s1, StateVector* s2, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> angle(-kPi, kPi);
    std::uniform_int_distribution<std::size_t> wire(0, s1.n_qubits() - 1);
    std::uniform_int_distribution<int> kind(0, s1.n_qubits() > 1 ? 3 : 2);
    const int g = kind(rng);
    const std::size_t q = wire(rng);
    switch (g) {
        case 0: {
            const double t = angle(rng);
            s1.apply_ry(q, t);
            if (s2) s2->apply_ry(q, t);
            break;
        }
        case 1: {
            const double t = angle(rng);
            s1.apply_rz(q, t);
            if (s2) s2->apply_rz(q, t);
            break;
        }
        case 2: {
            const double a = angle(rng), b = angle(rng), c = angle(rng);
            s1.apply_rot(q, a, b, c);
            if (s2) s2->apply_rot(q, a, b, c);
            break;
        }
        default: {
            std::size_t t = wire(rng);
            while (t == q) {
                t = wire(rng);
            }
            s1.apply_cnot(q, t);
            if (s2) s2->apply_cnot(q, t);
            break;
        }
    }
}

} // namespace

TEST_CASE("init_state produces the all-zeros basis state") {
    const StateVector two = qfd::qsim::init_state(2);
    check_amplitudes(two, {Complex{1, 0}, Complex{0, 0}, Complex{0, 0}, Complex{0, 0}}, 0.0);

    const StateVector one = qfd::qsim::init_state(1);
    check_amplitudes(one, {Complex{1, 0}, Complex{0, 0}}, 0.0);

    CHECK_THROWS_AS(qfd::qsim::init_state(0), std::invalid_argument);
    CHECK_THROWS_AS(qfd::qsim::init_state(17), std::invalid_argument);
    CHECK_THROWS_WITH_AS(qfd::qsim::init_state(17), doctest::Contains("16"),
                         std::invalid_argument);
}

TEST_CASE("apply_ry basics") {
    StateVector st = qfd::qsim::init_state(1);
    st.apply_ry(0, kPi);
    check_amplitudes(st, {Complex{0, 0}, Complex{1, 0}});

    StateVector id = qfd::qsim::init_state(1);
    id.apply_ry(0, 0.0);
    check_amplitudes(id, {Complex{1, 0}, Complex{0, 0}}, 0.0);

    CHECK_THROWS_AS(qfd::qsim::init_state(1).apply_ry(1, 0.1), std::out_of_range);
}

TEST_CASE("RY additivity: RY(b) after RY(a) equals RY(a+b)") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> angle(-kPi, kPi);
    for (int rep = 0; rep < 50; ++rep) {
        const double a = angle(rng), b = angle(rng);
        StateVector chained = qfd::qsim::init_state(1);
        chained.apply_ry(0, a).apply_ry(0, b);
        StateVector direct = qfd::qsim::init_state(1);
        direct.apply_ry(0, a + b);
        for (std::size_t k = 0; k < 2; ++k) {
            CHECK(std::abs(chained.amplitudes()[k] - direct.amplitudes()[k]) <= 1e-12);
        }
    }
}

TEST_CASE("apply_rz leaves <Z> alone and matches the matrix oracle") {
    for (double phi : {0.1, 1.3, -2.5, kPi}) {
        StateVector st = qfd::qsim::init_state(1);
        st.apply_rz(0, phi);
        CHECK(st.expect_z(0) == doctest::Approx(1.0).epsilon(1e-14));
    }

    StateVector id = qfd::qsim::init_state(1);
    id.apply_rz(0, 0.0);
    check_amplitudes(id, {Complex{1, 0}, Complex{0, 0}}, 0.0);

    // RZ(pi) on an equal superposition flips <X>.
    StateVector st = qfd::qsim::init_state(1);
    st.apply_ry(0, kPi / 2.0);
    const auto x_expect = [](const StateVector& s) {
        return 2.0 * std::real(std::conj(s.amplitudes()[0]) * s.amplitudes()[1]);
    };
    const double x_before = x_expect(st);
    st.apply_rz(0, kPi);
    CHECK(x_expect(st) == doctest::Approx(-x_before).epsilon(1e-12));

    const oracles::CVec expected = oracles::run_circuit(
        1, {{oracles::Gate::RY, 0, 0, kPi / 2.0}, {oracles::Gate::RZ, 0, 0, kPi}});
    check_amplitudes(st, expected);
}

TEST_CASE("apply_rot equals sequential RZ, RY, RZ and the composed oracle") {
    StateVector id = qfd::qsim::init_state(2);
    id.apply_rot(1, 0.0, 0.0, 0.0);
    check_amplitudes(id, {Complex{1, 0}, Complex{0, 0}, Complex{0, 0}, Complex{0, 0}}, 0.0);

    StateVector flip = qfd::qsim::init_state(1);
    flip.apply_rot(0, 0.0, kPi, 0.0);
    check_amplitudes(flip, {Complex{0, 0}, Complex{1, 0}});

    const double a = 0.2, b = 0.5, c = 0.9;
    StateVector fused = qfd::qsim::init_state(1);
    fused.apply_ry(0, 0.4); // some non-basis starting point
    StateVector seq = qfd::qsim::init_state(1);
    seq.apply_ry(0, 0.4);
    fused.apply_rot(0, a, b, c);
    seq.apply_rz(0, a).apply_ry(0, b).apply_rz(0, c);
    for (std::size_t k = 0; k < 2; ++k) {
        CHECK(std::abs(fused.amplitudes()[k] - seq.amplitudes()[k]) <= 1e-12);
    }

    const oracles::CVec expected = oracles::run_circuit(
        1, {{oracles::Gate::RY, 0, 0, 0.4}, {oracles::Gate::ROT, 0, 0, a, b, c}});
    check_amplitudes(fused, expected);
}

TEST_CASE("apply_cnot truth table pins the bit ordering") {
    // |10> means qubit 0 (MSB) is 1, i.e. amplitude index 2.
    StateVector st = qfd::qsim::init_state(2);
    st.apply_ry(0, kPi); // |00> -> |10>
    st.apply_cnot(0, 1);
    check_amplitudes(st, {Complex{0, 0}, Complex{0, 0}, Complex{0, 0}, Complex{1, 0}});

    StateVector zeros = qfd::qsim::init_state(2);
    zeros.apply_cnot(0, 1);
    check_amplitudes(zeros, {Complex{1, 0}, Complex{0, 0}, Complex{0, 0}, Complex{0, 0}}, 0.0);

    CHECK_THROWS_AS(qfd::qsim::init_state(2).apply_cnot(1, 1), std::invalid_argument);
    CHECK_THROWS_AS(qfd::qsim::init_state(2).apply_cnot(0, 2), std::out_of_range);
}

TEST_CASE("CNOT is an exact involution") {
    std::mt19937_64 rng(11);
    StateVector st = random_state(3, rng);
    const StateVector before = st;
    st.apply_cnot(2, 0).apply_cnot(2, 0);
    for (std::size_t k = 0; k < st.dim(); ++k) {
        CHECK(st.amplitudes()[k] == before.amplitudes()[k]);
    }
}

TEST_CASE("expect_z basics and the analytic cos(theta) curve") {
    const StateVector zeros = qfd::qsim::init_state(3);
    for (std::size_t q = 0; q < 3; ++q) {
        CHECK(zeros.expect_z(q) == 1.0);
    }

    for (double theta : {0.0, 0.4, kPi / 2.0, 2.1, kPi}) {
        StateVector st = qfd::qsim::init_state(1);
        st.apply_ry(0, theta);
        CHECK(st.expect_z(0) == doctest::Approx(std::cos(theta)).epsilon(1e-12));
    }

    CHECK_THROWS_AS(zeros.expect_z(3), std::out_of_range);
}

TEST_CASE("two-qubit circuit matches the brute-force oracle: <Z1> = cos(0.3)cos(0.7)") {
    StateVector st = qfd::qsim::init_state(2);
    st.apply_ry(0, 0.3).apply_ry(1, 0.7).apply_cnot(0, 1);
    CHECK(st.expect_z(1) == doctest::Approx(std::cos(0.3) * std::cos(0.7)).epsilon(1e-12));

    const oracles::CVec expected =
        oracles::run_circuit(2, {{oracles::Gate::RY, 0, 0, 0.3},
                                 {oracles::Gate::RY, 1, 0, 0.7},
                                 {oracles::Gate::CNOT, 0, 1}});
    check_amplitudes(st, expected);
    CHECK(oracles::expect_z(expected, 1, 2) ==
          doctest::Approx(std::cos(0.3) * std::cos(0.7)).epsilon(1e-12));
}

TEST_CASE("norm is preserved across long random gate sequences") {
    std::mt19937_64 rng(23);
    StateVector st = qfd::qsim::init_state(4);
    for (int k = 0; k < 2000; ++k) {
        apply_random_gate(st, nullptr, rng);
        CHECK(std::abs(st.norm_sq() - 1.0) <= 1e-12);
    }
}

TEST_CASE("random gates preserve inner products (unitarity spot-check)") {
    std::mt19937_64 rng(31);
    for (int rep = 0; rep < 20; ++rep) {
        StateVector a = random_state(3, rng);
        StateVector b = random_state(3, rng);
        const Complex before = inner_product(a, b);
        for (int g = 0; g < 25; ++g) {
            apply_random_gate(a, &b, rng);
        }
        CHECK(std::abs(inner_product(a, b) - before) <= 1e-12);
    }
}

TEST_CASE("gates match the dense matrix oracle on random 3-qubit circuits") {
    std::mt19937_64 rng(47);
    std::uniform_real_distribution<double> angle(-kPi, kPi);
    for (int rep = 0; rep < 10; ++rep) {
        std::vector<oracles::Gate> gates;
        StateVector st = qfd::qsim::init_state(3);
        for (int g = 0; g < 12; ++g) {
            const std::size_t q = rng() % 3;
            switch (rng() % 4) {
                case 0: {
                    const double t = angle(rng);
                    st.apply_ry(q, t);
                    gates.push_back({oracles::Gate::RY, q, 0, t});
                    break;
                }
                case 1: {
                    const double t = angle(rng);
                    st.apply_rz(q, t);
                    gates.push_back({oracles::Gate::RZ, q, 0, t});
                    break;
                }
                case 2: {
                    const double a = angle(rng), b = angle(rng), c = angle(rng);
                    st.apply_rot(q, a, b, c);
                    gates.push_back({oracles::Gate::ROT, q, 0, a, b, c});
                    break;
                }
                default: {
                    const std::size_t t = (q + 1 + rng() % 2) % 3;
                    st.apply_cnot(q, t);
                    gates.push_back({oracles::Gate::CNOT, q, t});
                    break;
                }
            }
        }
        check_amplitudes(st, oracles::run_circuit(3, gates));
    }
}

TEST_CASE("from_amplitudes validates shape and norm") {
    CHECK_THROWS_AS(StateVector::from_amplitudes(2, {Complex{1, 0}}), std::invalid_argument);
    CHECK_THROWS_AS(
        StateVector::from_amplitudes(1, {Complex{1, 0}, Complex{1, 0}}),
        std::invalid_argument);
}
