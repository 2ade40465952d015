#include "otesim/dynamics.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace otesim::dyn {

namespace {

using std::complex;

MatrixXcd kron6(const Mat6& a, const Mat6& b) {
    MatrixXcd out(36, 36);
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) out.block<6, 6>(6 * i, 6 * j) = a(i, j) * b;
    return out;
}

const Mat6 kIdentity = Mat6::Identity();

// Superoperator for one Lindblad-shaped term c (A rho B - {B A, rho}/2).
MatrixXcd gksl_term(complex<double> c, const Mat6& a, const Mat6& b) {
    const Mat6 ba = b * a;
    return c * (kron6(b.transpose(), a) - 0.5 * kron6(kIdentity, ba) -
                0.5 * kron6(ba.transpose(), kIdentity));
}

}  // namespace

VectorXcd vec(const Mat6& rho) {
    VectorXcd v(36);
    for (int col = 0; col < 6; ++col)
        for (int row = 0; row < 6; ++row) v(6 * col + row) = rho(row, col);
    return v;
}

Mat6 unvec(const VectorXcd& v) {
    Mat6 rho;
    for (int col = 0; col < 6; ++col)
        for (int row = 0; row < 6; ++row) rho(row, col) = v(6 * col + row);
    return rho;
}

MatrixXcd sandwich(const Mat6& a, const Mat6& b) { return kron6(b.transpose(), a); }

MatrixXcd commutator_superop(const Mat6& h) {
    const complex<double> mi(0.0, -1.0);
    return mi * (kron6(kIdentity, h) - kron6(h.transpose(), kIdentity));
}

MatrixXcd local_dissipator(double gamma_plus, double gamma_minus, const Mat6& ladder) {
    if (gamma_plus < 0.0 || gamma_minus < 0.0)
        throw DomainError("local_dissipator: rates must be >= 0");
    const Mat6 raise = ladder.adjoint();
    return gksl_term(gamma_plus, ladder, raise) + gksl_term(gamma_minus, raise, ladder);
}

MatrixXcd nonlocal_dissipator(complex<double> gamma_d_plus, complex<double> gamma_d_minus,
                              const Mat6& sigma, const Mat6& kappa_r) {
    if (!std::isfinite(std::abs(gamma_d_plus)) || !std::isfinite(std::abs(gamma_d_minus)))
        throw DomainError("nonlocal_dissipator: rates must be finite");
    const Mat6 sigma_dag = sigma.adjoint();
    const Mat6 kappa_dag = kappa_r.adjoint();
    MatrixXcd d = gksl_term(gamma_d_plus, kappa_r, sigma_dag) +
                  gksl_term(gamma_d_minus, kappa_dag, sigma);
    d += gksl_term(std::conj(gamma_d_plus), sigma, kappa_dag) +
         gksl_term(std::conj(gamma_d_minus), sigma_dag, kappa_r);
    return d;
}

Mat6 Liouvillian::apply(const MatrixXcd& part, const Mat6& rho) {
    return unvec(part * vec(rho));
}

Liouvillian assemble(const atoms::SystemSpec& system, const env::RateSet& rates) {
    using atoms::Ladder;
    const Mat6 sigma = atoms::lowering_operator(Ladder::Body);
    const Mat6 kappa1 = atoms::lowering_operator(Ladder::Machine1);
    const Mat6 kappa2 = atoms::lowering_operator(Ladder::Machine2);
    const Mat6 kappa3 = atoms::lowering_operator(Ladder::Machine3);
    const Mat6 kappa_r = atoms::lowering_operator(system.machine.resonant);

    Liouvillian l;
    l.hamiltonian = commutator_superop(atoms::hamiltonian_total(system, rates.lambda));
    l.d_1 = local_dissipator(rates.gp(env::Channel::T1), rates.gm(env::Channel::T1), kappa1);
    l.d_2 = local_dissipator(rates.gp(env::Channel::T2), rates.gm(env::Channel::T2), kappa2);
    l.d_3 = local_dissipator(rates.gp(env::Channel::T3), rates.gm(env::Channel::T3), kappa3);
    l.d_body = local_dissipator(rates.gp(env::Channel::Body), rates.gm(env::Channel::Body), sigma);
    l.d_nonlocal = nonlocal_dissipator(rates.gamma_d_plus, rates.gamma_d_minus, sigma, kappa_r);
    l.total = l.hamiltonian + l.d_1 + l.d_2 + l.d_3 + l.d_body + l.d_nonlocal;
    return l;
}

std::complex<double> resonant_coherence(const Mat6& rho, const atoms::SystemSpec& system) {
    return rho(system.resonant_excited_index(), system.resonant_ground_index());
}

double max_offresonant_coherence(const Mat6& rho, const atoms::SystemSpec& system) {
    const int a = system.resonant_excited_index();
    const int b = system.resonant_ground_index();
    double worst = 0.0;
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) {
            if (i == j) continue;
            if ((i == a && j == b) || (i == b && j == a)) continue;
            worst = std::max(worst, std::abs(rho(i, j)));
        }
    return worst;
}

StationaryState steady_state(const Liouvillian& l, const atoms::SystemSpec& system,
                             const SolverOptions& options) {
    if (options.check_nullspace) {
        Eigen::BDCSVD<MatrixXcd> svd(l.total);
        const auto& sv = svd.singularValues();
        if (sv(34) < options.degeneracy_threshold * sv(0))
            throw DegenerateSteadyState("steady_state: numerical nullspace dimension != 1");
    }

    // Row 36*k+... indexed by vec: diagonal entries sit at 7*k. Trace
    // preservation makes the diagonal rows linearly dependent, so replacing
    // one of them (row 0) by the trace constraint keeps full rank.
    MatrixXcd m = l.total;
    for (int col = 0; col < 36; ++col) m(0, col) = 0.0;
    for (int k = 0; k < 6; ++k) m(0, 7 * k) = 1.0;
    VectorXcd b = VectorXcd::Zero(36);
    b(0) = 1.0;

    Eigen::PartialPivLU<MatrixXcd> lu(m);
    VectorXcd x = lu.solve(b);
    if (!x.allFinite()) throw SolverFailure("steady_state: LU solve produced non-finite values");

    Mat6 rho = unvec(x);
    rho = 0.5 * (rho + Mat6(rho.adjoint()));

    Eigen::SelfAdjointEigenSolver<Mat6> es(rho);
    const double min_eig = es.eigenvalues().minCoeff();
    if (min_eig < -options.negativity_limit)
        throw SolverFailure("steady_state: negativity beyond repair limit");
    if (min_eig < 0.0) {
        Eigen::Matrix<double, 6, 1> clipped = es.eigenvalues().cwiseMax(0.0);
        rho = es.eigenvectors() * clipped.asDiagonal() * es.eigenvectors().adjoint();
        rho /= rho.trace().real();
    }

    const double residual = (l.total * vec(rho)).cwiseAbs().maxCoeff();
    if (residual > options.tolerance)
        throw SolverFailure("steady_state: residual above solver tolerance");

    StationaryState st;
    st.rho = rho;
    st.c_r = resonant_coherence(rho, system);
    for (int i = 0; i < 6; ++i) st.populations[i] = rho(i, i).real();
    st.residual = residual;
    st.min_eigenvalue = min_eig;
    st.max_offresonant_coherence = max_offresonant_coherence(rho, system);
    return st;
}

double generator_norm(const Liouvillian& l) {
    double norm = 0.0;
    for (int i = 0; i < 36; ++i) norm = std::max(norm, l.total.row(i).cwiseAbs().sum());
    return norm;
}

Mat6 time_evolve(const Liouvillian& l, const Mat6& rho0, double t_final, double dt) {
    if (!(dt > 0.0) || !(t_final >= 0.0))
        throw DomainError("time_evolve: dt > 0 and t_final >= 0 required");
    const double bound = 0.1 / generator_norm(l);
    if (dt >= bound) throw StepTooLarge("time_evolve: dt violates the stability bound 0.1/||L||");

    VectorXcd v = vec(rho0);
    VectorXcd k1(36), k2(36), k3(36), k4(36);
    double t = 0.0;
    while (t < t_final) {
        const double h = std::min(dt, t_final - t);
        k1.noalias() = l.total * v;
        k2.noalias() = l.total * (v + 0.5 * h * k1);
        k3.noalias() = l.total * (v + 0.5 * h * k2);
        k4.noalias() = l.total * (v + h * k3);
        v += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        t += h;
    }
    return unvec(v);
}

double default_t_final(const env::RateSet& rates) {
    double min_rate = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 4; ++i) {
        if (rates.gamma_plus[i] > 0.0) min_rate = std::min(min_rate, rates.gamma_plus[i]);
        if (rates.gamma_minus[i] > 0.0) min_rate = std::min(min_rate, rates.gamma_minus[i]);
    }
    const double gdp = std::abs(rates.gamma_d_plus);
    const double gdm = std::abs(rates.gamma_d_minus);
    if (gdp > 0.0) min_rate = std::min(min_rate, gdp);
    if (gdm > 0.0) min_rate = std::min(min_rate, gdm);
    if (!std::isfinite(min_rate)) throw DomainError("default_t_final: no nonzero rates");
    return 50.0 / min_rate;
}

double trace_distance(const Mat6& a, const Mat6& b) {
    Eigen::SelfAdjointEigenSolver<Mat6> es(Mat6(a - b));
    return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

Mat6 gibbs_state(const Mat6& h, double t) {
    if (!(t > 0.0)) throw DomainError("gibbs_state: temperature must be > 0");
    // log-sum-exp against the ground energy keeps low temperatures stable
    double e_min = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 6; ++i) e_min = std::min(e_min, h(i, i).real());
    double z = 0.0;
    Mat6 rho = Mat6::Zero();
    for (int i = 0; i < 6; ++i) {
        const double w = std::exp(-(h(i, i).real() - e_min) / t);
        rho(i, i) = w;
        z += w;
    }
    return rho / z;
}

}  // namespace otesim::dyn
