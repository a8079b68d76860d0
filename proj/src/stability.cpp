#include "csync/stability.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

#include "csync/errors.hpp"
#include "csync/kernels.hpp"

namespace csync {

Eigen::MatrixXd finite_difference_jacobian(const VectorField& fn, const Eigen::VectorXd& x, double rel_step) {
    const Eigen::Index m = x.size();
    Eigen::MatrixXd jac(m, m);
    Eigen::VectorXd xp = x, xm = x;
    for (Eigen::Index j = 0; j < m; ++j) {
        const double step = rel_step * std::max(1.0, std::fabs(x(j)));
        xp(j) = x(j) + step;
        xm(j) = x(j) - step;
        jac.col(j) = (fn(xp) - fn(xm)) / (2.0 * step);
        xp(j) = xm(j) = x(j);
    }
    return jac;
}

Eigen::MatrixXd DynamicsSpec::jacobian_f(const Eigen::VectorXd& x) const {
    return df ? df(x) : finite_difference_jacobian(f, x);
}

Eigen::MatrixXd DynamicsSpec::jacobian_h(const Eigen::VectorXd& x) const {
    return dh ? dh(x) : finite_difference_jacobian(h, x);
}

DynamicsSpec linear_dynamics(double a, double h) {
    DynamicsSpec d;
    d.name = "linear";
    d.m = 1;
    d.f = [a](const Eigen::VectorXd& x) -> Eigen::VectorXd { return a * x; };
    d.h = [h](const Eigen::VectorXd& x) -> Eigen::VectorXd { return h * x; };
    d.df = [a](const Eigen::VectorXd&) -> Eigen::MatrixXd { return Eigen::MatrixXd::Constant(1, 1, a); };
    d.dh = [h](const Eigen::VectorXd&) -> Eigen::MatrixXd { return Eigen::MatrixXd::Constant(1, 1, h); };
    return d;
}

DynamicsSpec lorenz_dynamics(double sigma, double rho, double beta, double k) {
    DynamicsSpec d;
    d.name = "lorenz";
    d.m = 3;
    d.f = [=](const Eigen::VectorXd& x) -> Eigen::VectorXd {
        return Eigen::Vector3d(sigma * (x(1) - x(0)), x(0) * (rho - x(2)) - x(1), x(0) * x(1) - beta * x(2));
    };
    d.h = [k](const Eigen::VectorXd& x) -> Eigen::VectorXd { return Eigen::Vector3d(k * x(0), 0.0, 0.0); };
    d.df = [=](const Eigen::VectorXd& x) -> Eigen::MatrixXd {
        Eigen::Matrix3d j;
        j << -sigma, sigma, 0.0, rho - x(2), -1.0, -x(0), x(1), x(0), -beta;
        return j;
    };
    d.dh = [k](const Eigen::VectorXd&) -> Eigen::MatrixXd {
        Eigen::Matrix3d j = Eigen::Matrix3d::Zero();
        j(0, 0) = k;
        return j;
    };
    return d;
}

DynamicsSpec make_dynamics(const std::string& name, const std::map<std::string, double>& params) {
    auto take = [&](std::map<std::string, double> known) {
        for (const auto& [key, value] : params) {
            auto it = known.find(key);
            if (it == known.end()) throw ValidationError("unknown parameter '" + key + "' for dynamics '" + name + "'");
            if (!std::isfinite(value)) throw ValidationError("parameter '" + key + "' must be finite");
            it->second = value;
        }
        return known;
    };
    if (name == "linear") {
        auto p = take({{"a", 0.1}, {"h", -0.5}});
        return linear_dynamics(p["a"], p["h"]);
    }
    if (name == "lorenz") {
        auto p = take({{"sigma", 10.0}, {"rho", 28.0}, {"beta", 8.0 / 3.0}, {"k", 0.1}});
        return lorenz_dynamics(p["sigma"], p["rho"], p["beta"], p["k"]);
    }
    throw ValidationError("unknown dynamics '" + name + "' (expected linear or lorenz)");
}

Eigen::MatrixXd QuotientTrajectory::at(double t) const {
    if (times.empty()) throw ValidationError("empty quotient trajectory");
    if (t <= times.front()) return states.front();
    if (t >= times.back()) return states.back();
    const double pos = (t - times.front()) / dt;
    auto k = static_cast<std::size_t>(pos);
    if (k + 1 >= times.size()) k = times.size() - 2;
    const double w = (t - times[k]) / dt;
    return (1.0 - w) * states[k] + w * states[k + 1];
}

namespace {

Eigen::MatrixXd quotient_rhs(const IndicatorSet& ind, const DynamicsSpec& dyn, const Eigen::MatrixXd& s) {
    const auto c = static_cast<Eigen::Index>(ind.cluster_count());
    Eigen::MatrixXd hs(c, static_cast<Eigen::Index>(dyn.m));
    Eigen::MatrixXd out(c, static_cast<Eigen::Index>(dyn.m));
    for (Eigen::Index k = 0; k < c; ++k) {
        const Eigen::VectorXd sk = s.row(k).transpose();
        hs.row(k) = dyn.h(sk).transpose();
        out.row(k) = dyn.f(sk).transpose();
    }
    out += ind.quotient * hs;
    return out;
}

struct ClusterJacobians {
    std::vector<Eigen::MatrixXd> df;
    std::vector<Eigen::MatrixXd> dh;
};

ClusterJacobians cluster_jacobians(const DynamicsSpec& dyn, const QuotientTrajectory& traj, double t) {
    const Eigen::MatrixXd s = traj.at(t);
    ClusterJacobians j;
    for (Eigen::Index k = 0; k < s.rows(); ++k) {
        const Eigen::VectorXd sk = s.row(k).transpose();
        j.df.push_back(dyn.jacobian_f(sk));
        j.dh.push_back(dyn.jacobian_h(sk));
    }
    return j;
}

/// out_u = DF(c(u)) x_u + sum_v W_uv DH(c(v)) x_v with x, out stored m x n.
Eigen::VectorXd coupled_rhs(const Eigen::MatrixXd& w, const std::vector<std::size_t>& cluster_of,
                            const ClusterJacobians& jac, std::size_t m, const Eigen::VectorXd& x) {
    const auto n = w.rows();
    const auto mi = static_cast<Eigen::Index>(m);
    if (x.size() != n * mi) throw ValidationError("state vector has the wrong length");
    const Eigen::Map<const Eigen::MatrixXd> xs(x.data(), mi, n);
    Eigen::MatrixXd hx(mi, n);
    Eigen::VectorXd out(n * mi);
    Eigen::Map<Eigen::MatrixXd> os(out.data(), mi, n);
    for (Eigen::Index v = 0; v < n; ++v) {
        const std::size_t c = cluster_of[static_cast<std::size_t>(v)];
        hx.col(v).noalias() = jac.dh[c] * xs.col(v);
        os.col(v).noalias() = jac.df[c] * xs.col(v);
    }
    const auto& table = kernels::active();
    for (Eigen::Index v = 0; v < n; ++v) {
        const double* src = hx.col(v).data();
        for (Eigen::Index u = 0; u < n; ++u) {
            const double wuv = w(u, v);
            if (wuv != 0.0) table.axpy(wuv, src, os.col(u).data(), m);
        }
    }
    return out;
}

}  // namespace

QuotientTrajectory quotient_integrate(const IndicatorSet& ind, const DynamicsSpec& dyn, const Eigen::MatrixXd& x0,
                                      double t_end, double dt) {
    if (!(dt > 0.0) || !(t_end > 0.0)) throw ValidationError("dt and t_end must be positive");
    if (x0.rows() != static_cast<Eigen::Index>(ind.cluster_count()) || x0.cols() != static_cast<Eigen::Index>(dyn.m))
        throw ValidationError("initial condition must be C x m");
    const auto steps = static_cast<std::size_t>(std::llround(t_end / dt));
    if (steps == 0) throw ValidationError("t_end shorter than one step");

    QuotientTrajectory traj;
    traj.dt = dt;
    traj.times.reserve(steps + 1);
    traj.states.reserve(steps + 1);
    traj.times.push_back(0.0);
    traj.states.push_back(x0);
    Eigen::MatrixXd s = x0;
    for (std::size_t k = 0; k < steps; ++k) {
        const Eigen::MatrixXd k1 = quotient_rhs(ind, dyn, s);
        const Eigen::MatrixXd k2 = quotient_rhs(ind, dyn, s + 0.5 * dt * k1);
        const Eigen::MatrixXd k3 = quotient_rhs(ind, dyn, s + 0.5 * dt * k2);
        const Eigen::MatrixXd k4 = quotient_rhs(ind, dyn, s + dt * k3);
        s += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        const double t = static_cast<double>(k + 1) * dt;
        if (!s.allFinite()) {
            std::ostringstream msg;
            msg << "quotient trajectory diverged at t = " << t;
            throw NumericalError(msg.str());
        }
        traj.times.push_back(t);
        traj.states.push_back(s);
    }
    return traj;
}

Eigen::VectorXd full_variational_rhs(const IndicatorSet& ind, const DynamicsSpec& dyn, const QuotientTrajectory& traj,
                                     double t, const Eigen::VectorXd& dx) {
    return coupled_rhs(ind.adjacency, ind.coord_cluster, cluster_jacobians(dyn, traj, t), dyn.m, dx);
}

Eigen::VectorXd transformed_variational_rhs(const CanonicalTransform& ct, const DynamicsSpec& dyn,
                                            const QuotientTrajectory& traj, double t, const Eigen::VectorXd& eta) {
    return coupled_rhs(ct.b, ct.coord_cluster, cluster_jacobians(dyn, traj, t), dyn.m, eta);
}

Eigen::VectorXd to_transformed(const CanonicalTransform& ct, const Eigen::VectorXd& dx, std::size_t m) {
    const auto mi = static_cast<Eigen::Index>(m);
    const auto n = ct.t.rows();
    if (dx.size() != n * mi) throw ValidationError("state vector has the wrong length");
    const Eigen::Map<const Eigen::MatrixXd> xs(dx.data(), mi, n);
    Eigen::VectorXd out(n * mi);
    Eigen::Map<Eigen::MatrixXd>(out.data(), mi, n).noalias() = xs * ct.t;
    return out;
}

std::vector<Eigen::VectorXd> integrate_rk4(const LinearRhs& rhs, const Eigen::VectorXd& y0, double dt, std::size_t steps) {
    std::vector<Eigen::VectorXd> out;
    out.reserve(steps + 1);
    out.push_back(y0);
    Eigen::VectorXd y = y0;
    for (std::size_t k = 0; k < steps; ++k) {
        const double t = static_cast<double>(k) * dt;
        const Eigen::VectorXd k1 = rhs(t, y);
        const Eigen::VectorXd k2 = rhs(t + 0.5 * dt, y + 0.5 * dt * k1);
        const Eigen::VectorXd k3 = rhs(t + 0.5 * dt, y + 0.5 * dt * k2);
        const Eigen::VectorXd k4 = rhs(t + dt, y + dt * k3);
        y += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        out.push_back(y);
    }
    return out;
}

BlockExponents transverse_exponents(const CanonicalTransform& ct, const DynamicsSpec& dyn,
                                    const QuotientTrajectory& traj, std::size_t block,
                                    const ExponentOptions& options) {
    if (block >= ct.block_count()) throw ValidationError("block index out of range");
    if (options.qr_interval == 0) throw ValidationError("qr_interval must be positive");
    if (!(options.transient_fraction >= 0.0 && options.transient_fraction < 1.0))
        throw ValidationError("transient_fraction must lie in [0, 1)");
    if (traj.times.size() < 2) throw ValidationError("quotient trajectory has no steps");

    BlockExponents res;
    res.block = block;
    res.block_class = ct.block_class[block];
    res.includes_quotient = res.block_class == BlockClass::parallel;

    const auto off = static_cast<Eigen::Index>(ct.block_offsets[block]);
    const auto beta = static_cast<Eigen::Index>(ct.block_sizes[block]);
    const auto m = static_cast<Eigen::Index>(dyn.m);
    const Eigen::Index dim = beta * m;
    const Eigen::MatrixXd b_hat = ct.b.block(off, off, beta, beta);
    std::vector<std::size_t> cluster(static_cast<std::size_t>(beta));
    for (Eigen::Index u = 0; u < beta; ++u) cluster[static_cast<std::size_t>(u)] = ct.coord_cluster[static_cast<std::size_t>(off + u)];

    auto system = [&](double t) {
        const ClusterJacobians jac = cluster_jacobians(dyn, traj, t);
        Eigen::MatrixXd mat = Eigen::MatrixXd::Zero(dim, dim);
        for (Eigen::Index u = 0; u < beta; ++u) {
            mat.block(u * m, u * m, m, m) += jac.df[cluster[static_cast<std::size_t>(u)]];
            for (Eigen::Index v = 0; v < beta; ++v)
                if (b_hat(u, v) != 0.0)
                    mat.block(u * m, v * m, m, m) += b_hat(u, v) * jac.dh[cluster[static_cast<std::size_t>(v)]];
        }
        return mat;
    };

    const double dt = traj.dt;
    const std::size_t steps = traj.times.size() - 1;
    const double transient = options.transient_fraction * traj.t_end();
    Eigen::MatrixXd y = Eigen::MatrixXd::Identity(dim, dim);
    Eigen::VectorXd sums = Eigen::VectorXd::Zero(dim);
    double elapsed = 0.0;
    double interval_start = 0.0;
    for (std::size_t k = 0; k < steps; ++k) {
        const double t = traj.times[k];
        const Eigen::MatrixXd m0 = system(t);
        const Eigen::MatrixXd mh = system(t + 0.5 * dt);
        const Eigen::MatrixXd m1 = system(t + dt);
        const Eigen::MatrixXd k1 = m0 * y;
        const Eigen::MatrixXd k2 = mh * (y + 0.5 * dt * k1);
        const Eigen::MatrixXd k3 = mh * (y + 0.5 * dt * k2);
        const Eigen::MatrixXd k4 = m1 * (y + dt * k3);
        y += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (!y.allFinite()) throw NumericalError("perturbation frame diverged");

        if ((k + 1) % options.qr_interval == 0 || k + 1 == steps) {
            Eigen::HouseholderQR<Eigen::MatrixXd> qr(y);
            Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(dim, dim);
            const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
            const double t_now = traj.times[k + 1];
            for (Eigen::Index i = 0; i < dim; ++i) {
                if (r(i, i) < 0.0) q.col(i) = -q.col(i);
                if (interval_start >= transient) sums(i) += std::log(std::fabs(r(i, i)));
            }
            if (interval_start >= transient) elapsed += t_now - interval_start;
            y = q;
            interval_start = t_now;
        }
    }
    if (!(elapsed > 0.0)) throw ValidationError("trajectory too short for the requested transient");
    res.exponents.resize(static_cast<std::size_t>(dim));
    for (Eigen::Index i = 0; i < dim; ++i) res.exponents[static_cast<std::size_t>(i)] = sums(i) / elapsed;
    std::sort(res.exponents.begin(), res.exponents.end(), std::greater<>());
    return res;
}

}  // namespace csync
