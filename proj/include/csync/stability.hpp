#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "csync/partition.hpp"
#include "csync/transform.hpp"

namespace csync {

using VectorField = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;
using JacobianFn = std::function<Eigen::MatrixXd(const Eigen::VectorXd&)>;

/// Node dynamics x' = F(x) + sum_j A_ij H(x_j) on m-dimensional states.
/// Missing Jacobians fall back to central finite differences.
struct DynamicsSpec {
    std::string name;
    std::size_t m = 1;
    VectorField f;
    VectorField h;
    JacobianFn df;
    JacobianFn dh;

    Eigen::MatrixXd jacobian_f(const Eigen::VectorXd& x) const;
    Eigen::MatrixXd jacobian_h(const Eigen::VectorXd& x) const;
};

/// Central differences with step rel_step * max(1, |x_i|).
Eigen::MatrixXd finite_difference_jacobian(const VectorField& fn, const Eigen::VectorXd& x, double rel_step = 1e-6);

/// F(x) = a x, H(x) = h x, m = 1.
DynamicsSpec linear_dynamics(double a, double h);

/// Lorenz flow coupled through the first component: H(x) = (k x_1, 0, 0).
DynamicsSpec lorenz_dynamics(double sigma = 10.0, double rho = 28.0, double beta = 8.0 / 3.0, double k = 0.1);

/// "linear" (a, h) or "lorenz" (sigma, rho, beta, k). Unknown names or
/// parameters throw ValidationError.
DynamicsSpec make_dynamics(const std::string& name, const std::map<std::string, double>& params);

struct QuotientTrajectory {
    double dt = 0.0;
    std::vector<double> times;
    std::vector<Eigen::MatrixXd> states;  ///< C x m per grid point
    std::string scheme = "rk4";

    double t_end() const { return times.empty() ? 0.0 : times.back(); }
    /// Linear interpolation between grid points, clamped to the range.
    Eigen::MatrixXd at(double t) const;
};

/// Fixed-step RK4 for s_k' = F(s_k) + sum_l Q_kl H(s_l).
QuotientTrajectory quotient_integrate(const IndicatorSet& ind, const DynamicsSpec& dyn, const Eigen::MatrixXd& x0,
                                      double t_end, double dt);

/// Right-hand side of the full variational equation. dx holds N states of
/// size m in the cluster-contiguous node order of `ind`.
Eigen::VectorXd full_variational_rhs(const IndicatorSet& ind, const DynamicsSpec& dyn, const QuotientTrajectory& traj,
                                     double t, const Eigen::VectorXd& dx);

/// Same equation in transformed coordinates: eta_u' = DF(s_c(u)) eta_u +
/// sum_v B_uv DH(s_c(v)) eta_v, coordinates in the column order of ct.t.
Eigen::VectorXd transformed_variational_rhs(const CanonicalTransform& ct, const DynamicsSpec& dyn,
                                            const QuotientTrajectory& traj, double t, const Eigen::VectorXd& eta);

/// (T^T (x) I_m) dx.
Eigen::VectorXd to_transformed(const CanonicalTransform& ct, const Eigen::VectorXd& dx, std::size_t m);

using LinearRhs = std::function<Eigen::VectorXd(double, const Eigen::VectorXd&)>;

/// Fixed-step RK4 from t = 0; returns the state at every step, y0 first.
std::vector<Eigen::VectorXd> integrate_rk4(const LinearRhs& rhs, const Eigen::VectorXd& y0, double dt, std::size_t steps);

struct ExponentOptions {
    std::size_t qr_interval = 10;      ///< steps between re-orthonormalizations
    double transient_fraction = 0.2;   ///< leading share of the trajectory discarded
};

struct BlockExponents {
    std::size_t block = 0;
    BlockClass block_class = BlockClass::transverse;
    std::vector<double> exponents;  ///< descending, beta_k * m values
    bool includes_quotient = false;  ///< parallel block: exponents include the quotient's own

    double max_exponent() const { return exponents.empty() ? 0.0 : exponents.front(); }
};

/// Lyapunov exponents of block k along the quotient trajectory, by QR
/// re-orthonormalization of a full perturbation frame.
BlockExponents transverse_exponents(const CanonicalTransform& ct, const DynamicsSpec& dyn,
                                    const QuotientTrajectory& traj, std::size_t block,
                                    const ExponentOptions& options = {});

}  // namespace csync
