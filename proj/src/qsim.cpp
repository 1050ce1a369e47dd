#include "qfd/qsim.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

namespace qfd::qsim {

StateVector StateVector::init_state(std::size_t n_qubits) {
    if (n_qubits < 1 || n_qubits > kMaxQubits) {
        throw std::invalid_argument("init_state: n_qubits must be in [1, " +
                                    std::to_string(kMaxQubits) + "], got " +
                                    std::to_string(n_qubits));
    }
    std::vector<Complex> amps(std::size_t{1} << n_qubits, Complex{0.0, 0.0});
    amps[0] = Complex{1.0, 0.0};
    return StateVector(n_qubits, std::move(amps));
}

StateVector StateVector::from_amplitudes(std::size_t n_qubits, std::vector<Complex> amps) {
    if (n_qubits < 1 || n_qubits > kMaxQubits) {
        throw std::invalid_argument("from_amplitudes: n_qubits must be in [1, " +
                                    std::to_string(kMaxQubits) + "]");
    }
    if (amps.size() != (std::size_t{1} << n_qubits)) {
        throw std::invalid_argument("from_amplitudes: expected 2^" + std::to_string(n_qubits) +
                                    " amplitudes, got " + std::to_string(amps.size()));
    }
    StateVector st(n_qubits, std::move(amps));
    if (std::abs(st.norm_sq() - 1.0) > 1e-12) {
        throw std::invalid_argument("from_amplitudes: amplitudes are not normalized");
    }
    return st;
}

void StateVector::check_qubit(std::size_t q, const char* who) const {
    if (q >= n_qubits_) {
        throw std::out_of_range(std::string(who) + ": qubit index " + std::to_string(q) +
                                " out of range for " + std::to_string(n_qubits_) + " qubits");
    }
}

// Shared kernel for all single-qubit gates. With qubit 0 as MSB, the bit of
// qubit q sits at position (n-1-q), giving stride 2^(n-1-q) between the
// paired amplitudes.
void StateVector::apply_single_qubit(std::size_t q, Complex u00, Complex u01,
                                     Complex u10, Complex u11) {
    const std::size_t stride = std::size_t{1} << (n_qubits_ - 1 - q);
    const std::size_t block = stride << 1;
    const std::size_t n = amps_.size();
    for (std::size_t base = 0; base < n; base += block) {
        for (std::size_t off = 0; off < stride; ++off) {
            const std::size_t i0 = base + off;
            const std::size_t i1 = i0 + stride;
            const Complex a = amps_[i0];
            const Complex b = amps_[i1];
            amps_[i0] = u00 * a + u01 * b;
            amps_[i1] = u10 * a + u11 * b;
        }
    }
}

StateVector& StateVector::apply_ry(std::size_t q, double theta) {
    check_qubit(q, "apply_ry");
    const double c = std::cos(theta / 2.0);
    const double s = std::sin(theta / 2.0);
    apply_single_qubit(q, Complex{c, 0.0}, Complex{-s, 0.0}, Complex{s, 0.0}, Complex{c, 0.0});
    return *this;
}

StateVector& StateVector::apply_rz(std::size_t q, double phi) {
    check_qubit(q, "apply_rz");
    const Complex e_neg = std::polar(1.0, -phi / 2.0);
    const Complex e_pos = std::polar(1.0, +phi / 2.0);
    // Diagonal gate: scale in place, no pairing needed.
    const std::size_t bit = std::size_t{1} << (n_qubits_ - 1 - q);
    for (std::size_t k = 0; k < amps_.size(); ++k) {
        amps_[k] *= (k & bit) ? e_pos : e_neg;
    }
    return *this;
}

StateVector& StateVector::apply_rot(std::size_t q, double alpha, double beta, double gamma) {
    check_qubit(q, "apply_rot");
    // RZ(gamma) * RY(beta) * RZ(alpha) composed into one 2x2 matrix:
    //   [ e^{-i(a+g)/2} cos(b/2)   -e^{ i(a-g)/2} sin(b/2) ]
    //   [ e^{-i(a-g)/2} sin(b/2)    e^{ i(a+g)/2} cos(b/2) ]
    const double cb = std::cos(beta / 2.0);
    const double sb = std::sin(beta / 2.0);
    const Complex u00 = std::polar(cb, -(alpha + gamma) / 2.0);
    const Complex u01 = -std::polar(sb, (alpha - gamma) / 2.0);
    const Complex u10 = std::polar(sb, -(alpha - gamma) / 2.0);
    const Complex u11 = std::polar(cb, (alpha + gamma) / 2.0);
    apply_single_qubit(q, u00, u01, u10, u11);
    return *this;
}

StateVector& StateVector::apply_cnot(std::size_t control, std::size_t target) {
    check_qubit(control, "apply_cnot");
    check_qubit(target, "apply_cnot");
    if (control == target) {
        throw std::invalid_argument("apply_cnot: control and target must differ");
    }
    const std::size_t cbit = std::size_t{1} << (n_qubits_ - 1 - control);
    const std::size_t tbit = std::size_t{1} << (n_qubits_ - 1 - target);
    for (std::size_t k = 0; k < amps_.size(); ++k) {
        // Visit each swapped pair once via the target=0 member.
        if ((k & cbit) && !(k & tbit)) {
            std::swap(amps_[k], amps_[k | tbit]);
        }
    }
    return *this;
}

double StateVector::expect_z(std::size_t q) const {
    check_qubit(q, "expect_z");
    const std::size_t bit = std::size_t{1} << (n_qubits_ - 1 - q);
    double acc = 0.0;
    for (std::size_t k = 0; k < amps_.size(); ++k) {
        const double p = std::norm(amps_[k]);
        acc += (k & bit) ? -p : p;
    }
    return acc;
}

double StateVector::norm_sq() const {
    double acc = 0.0;
    for (const Complex& a : amps_) {
        acc += std::norm(a);
    }
    return acc;
}

} // namespace qfd::qsim
