#pragma once

// Test-only reference GP: dense kernel matrices and a QR solve. Shares no
// code with the Cholesky path it checks, only the kernel definition, which
// it re-derives from the closed form.

#include <Eigen/Dense>

#include <cmath>
#include <random>
#include <vector>

namespace oracle {

struct Hyper {
    double c = 1.0, rq_l = 0.2, rq_alpha = 1.0, se_l = 1.0, rho = 1e-8, jitter = 1e-8;
};

inline double k(const Hyper& h, const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    double r2 = 0.0;
    for (Eigen::Index i = 0; i < a.size(); ++i) r2 += (a[i] - b[i]) * (a[i] - b[i]);
    return h.c + std::pow(1.0 + r2 / (2.0 * h.rq_alpha * h.rq_l * h.rq_l), -h.rq_alpha) +
           std::exp(-r2 / (2.0 * h.se_l * h.se_l));
}

struct Result {
    Eigen::VectorXd mean;
    double variance;
};

inline Result posterior(const Hyper& h, const std::vector<Eigen::VectorXd>& xs,
                        const Eigen::MatrixXd& y, const Eigen::VectorXd& probe) {
    const auto n = static_cast<Eigen::Index>(xs.size());
    Result r;
    if (n == 0) {
        r.mean = Eigen::VectorXd::Zero(y.cols());
        r.variance = k(h, probe, probe);
        return r;
    }
    Eigen::MatrixXd kk(n, n);
    Eigen::VectorXd ks(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) kk(i, j) = k(h, xs[i], xs[j]);
        kk(i, i) += h.rho + h.jitter;
        ks[i] = k(h, xs[i], probe);
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(kk);
    r.mean = (ks.transpose() * qr.solve(y)).transpose();
    r.variance = k(h, probe, probe) - ks.dot(qr.solve(ks));
    return r;
}

inline std::vector<Eigen::VectorXd> random_points(std::mt19937_64& rng, int n, int d,
                                                  double scale = 1.0) {
    std::normal_distribution<double> nd(0.0, scale);
    std::vector<Eigen::VectorXd> xs;
    for (int i = 0; i < n; ++i) {
        Eigen::VectorXd x(d);
        for (int j = 0; j < d; ++j) x[j] = nd(rng);
        xs.push_back(x);
    }
    return xs;
}

/// |a - b| <= tol * max(1, |a|, |b|).
inline bool close_rel(double a, double b, double tol) {
    return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace oracle
