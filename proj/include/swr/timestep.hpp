#pragma once

#include "swr/operators.hpp"
#include "swr/reconstruct.hpp"

namespace swr {

struct NgfConfig {
    double dt = 0.45;
    double delta = 1e-8;         // stop when ||phi^{n+1} - phi^n|| <= delta
    bool antisymmetrize = false;
    bool normalize = true;
    double shift = 0.0;          // energy shift s: steps use H - s A
    int max_steps = 200000;

    void validate() const {
        require(dt > 0, "imaginary time step must be positive");
        require(delta > 0, "NGF tolerance must be positive");
    }
};

struct TdseConfig {
    double dt = 0.05;
    double T = 2.5;
    LaserField laser;
    bool field = true;

    void validate() const { require(dt > 0 && T > 0, "TDSE needs dt > 0 and T > 0"); }
    int steps() const { return static_cast<int>(std::lround(T / dt)); }
};

// Factorized implicit-Euler system (A + dt (Ht - s A)) c~ = A c + dt b.
class NgfStepper {
public:
    NgfStepper(const MatR& A, const MatR& Htilde, double dt, double shift = 0.0) : A_(A), dt_(dt) {
        const MatR lhs = A + dt * (Htilde - shift * A);
        lu_.compute(lhs);
        if (!(lu_.rcond() > 1e3 * std::numeric_limits<double>::epsilon()))
            throw Error("implicit Euler system is singular");
    }
    VecR step(const VecR& c, const VecR* b) const {
        VecR rhs = A_ * c;
        if (b) rhs += dt_ * *b;
        return lu_.solve(rhs);
    }

private:
    MatR A_;
    double dt_;
    Eigen::PartialPivLU<MatR> lu_;
};

inline VecR ngf_step(const MatR& A, const MatR& Htilde, const VecR& c, const VecR* b, double dt, double shift = 0.0) {
    return NgfStepper(A, Htilde, dt, shift).step(c, b);
}

// Crank-Nicolson:
// (A + i dt/2 (Ht + T1)) c1 = (A - i dt/2 (Ht + T0)) c0 + i dt/2 (b0 + b1)
inline VecC tdse_step(const MatR& A, const MatC& Htilde, const VecC& c, const MatR* T0, const MatR* T1, const VecC* b0,
                      const VecC* b1, double dt) {
    const cplx ih(0.0, 0.5 * dt);
    MatC m0 = Htilde, m1 = Htilde;
    if (T0) m0 += T0->cast<cplx>();
    if (T1) m1 += T1->cast<cplx>();
    const MatC lhs = A.cast<cplx>() + ih * m1;
    VecC rhs = A.cast<cplx>() * c - ih * (m0 * c);
    if (b0) rhs += ih * *b0;
    if (b1) rhs += ih * *b1;
    Eigen::PartialPivLU<MatC> lu(lhs);
    if (!(lu.rcond() > 1e3 * std::numeric_limits<double>::epsilon())) throw Error("Crank-Nicolson system is singular");
    return lu.solve(rhs);
}

// Divides every subdomain's coefficients by the norm of the reconstruction.
template <class S>
double normalize_global(const SubdomainLayout& lay, const std::vector<LocalBasis>& bases, std::vector<Vec<S>>& c) {
    const double n = field_norm(reconstruct_global<S>(lay, bases, c));
    if (!(n > 0)) throw Error("cannot normalize a zero field");
    for (auto& v : c) v /= n;
    return n;
}

}  // namespace swr
