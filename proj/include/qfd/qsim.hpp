#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace qfd::qsim {

using Complex = std::complex<double>;

// Memory cap: 2^16 amplitudes. Large enough for every supported circuit,
// small enough that a runaway qubit count fails fast.
inline constexpr std::size_t kMaxQubits = 16;

// Dense statevector over n qubits. Bit ordering convention: qubit 0 is the
// MOST significant bit of the amplitude index, i.e. for n=2 the basis order
// is |00>, |01>, |10>, |11> with the left bit being qubit 0. Gates mutate
// the state in place and return *this so calls can be chained.
class StateVector {
public:
    // |00...0> on n_qubits wires. Throws std::invalid_argument outside [1, kMaxQubits].
    static StateVector init_state(std::size_t n_qubits);

    // Build from explicit amplitudes (test/oracle entry point). The vector must
    // have length 2^n_qubits and unit norm within 1e-12.
    static StateVector from_amplitudes(std::size_t n_qubits, std::vector<Complex> amps);

    std::size_t n_qubits() const { return n_qubits_; }
    std::size_t dim() const { return amps_.size(); }
    std::span<const Complex> amplitudes() const { return amps_; }

    // RY(theta) = [[cos(t/2), -sin(t/2)], [sin(t/2), cos(t/2)]] on qubit q.
    StateVector& apply_ry(std::size_t q, double theta);

    // RZ(phi) = diag(e^{-i phi/2}, e^{+i phi/2}) on qubit q.
    StateVector& apply_rz(std::size_t q, double phi);

    // Three-angle Euler rotation RZ(gamma) * RY(beta) * RZ(alpha), applied as
    // one fused 2x2 unitary.
    StateVector& apply_rot(std::size_t q, double alpha, double beta, double gamma);

    // Flips `target` wherever `control` is 1. control != target required.
    StateVector& apply_cnot(std::size_t control, std::size_t target);

    // <Z_q> = sum_k |amp_k|^2 * (+1 if bit q of k is 0 else -1). Read-only.
    double expect_z(std::size_t q) const;

    double norm_sq() const;

private:
    StateVector(std::size_t n_qubits, std::vector<Complex> amps)
        : n_qubits_(n_qubits), amps_(std::move(amps)) {}

    void check_qubit(std::size_t q, const char* who) const;
    void apply_single_qubit(std::size_t q, Complex u00, Complex u01, Complex u10, Complex u11);

    std::size_t n_qubits_;
    std::vector<Complex> amps_;
};

// Free-function spelling of StateVector::init_state.
inline StateVector init_state(std::size_t n_qubits) { return StateVector::init_state(n_qubits); }

} // namespace qfd::qsim
