#pragma once

// Independent reference computations used to check the library. They favor
// brute force over speed and share no code with the implementations they check.

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>

#include <Eigen/Dense>

namespace oracle {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

struct QpResult {
    Vec x;
    double objective = std::numeric_limits<double>::infinity();
};

// min 0.5 x'Hx + q'x  s.t. Gx <= h, Ex = b for positive definite H, by
// enumerating every subset of active inequalities and keeping the KKT point
// that is primal and dual feasible with the smallest objective.
inline std::optional<QpResult> active_set_qp(const Mat& H, const Vec& q, const Mat& G, const Vec& h,
                                             const Mat& E = Mat(), const Vec& b = Vec()) {
    const Eigen::Index n = H.rows();
    const Eigen::Index m = G.rows();
    const Eigen::Index p = E.rows();
    std::optional<QpResult> best;
    for (std::uint32_t mask = 0; mask < (1u << m); ++mask) {
        std::vector<Eigen::Index> active;
        for (Eigen::Index i = 0; i < m; ++i)
            if (mask & (1u << i)) active.push_back(i);
        const Eigen::Index k = static_cast<Eigen::Index>(active.size()) + p;
        if (k > n) continue;
        Mat kkt = Mat::Zero(n + k, n + k);
        Vec rhs = Vec::Zero(n + k);
        kkt.topLeftCorner(n, n) = H;
        rhs.head(n) = -q;
        for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(active.size()); ++j) {
            kkt.block(n + j, 0, 1, n) = G.row(active[static_cast<std::size_t>(j)]);
            kkt.block(0, n + j, n, 1) = G.row(active[static_cast<std::size_t>(j)]).transpose();
            rhs(n + j) = h(active[static_cast<std::size_t>(j)]);
        }
        for (Eigen::Index j = 0; j < p; ++j) {
            const Eigen::Index r = n + static_cast<Eigen::Index>(active.size()) + j;
            kkt.block(r, 0, 1, n) = E.row(j);
            kkt.block(0, r, n, 1) = E.row(j).transpose();
            rhs(r) = b(j);
        }
        Eigen::FullPivLU<Mat> lu(kkt);
        if (lu.rank() < n + k) continue;
        const Vec sol = lu.solve(rhs);
        const Vec x = sol.head(n);
        bool ok = true;
        for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(active.size()); ++j)
            if (sol(n + j) < -1e-9) ok = false;
        if (m > 0 && ((G * x - h).array() > 1e-9).any()) ok = false;
        if (!ok) continue;
        const double obj = 0.5 * x.dot(H * x) + q.dot(x);
        if (!best || obj < best->objective) best = QpResult{x, obj};
    }
    return best;
}

// Riccati value iteration from P = 0.
inline Mat value_iteration_dare(const Mat& A, const Mat& B, const Mat& Q, const Mat& R, int steps = 10000) {
    Mat P = Mat::Zero(A.rows(), A.cols());
    for (int i = 0; i < steps; ++i) {
        const Mat S = R + B.transpose() * P * B;
        const Mat BtPA = B.transpose() * P * A;
        Mat next = Q + A.transpose() * P * A - BtPA.transpose() * S.inverse() * BtPA;
        P = 0.5 * (next + next.transpose());
    }
    return P;
}

// 50-term Taylor series of exp(M / 2^s), squared s times.
inline Mat taylor_expm(const Mat& M, int terms = 50) {
    const double norm = M.cwiseAbs().rowwise().sum().maxCoeff();
    int s = 0;
    while (norm / std::ldexp(1.0, s) > 0.25) ++s;
    const Mat X = M / std::ldexp(1.0, s);
    Mat term = Mat::Identity(M.rows(), M.cols());
    Mat sum = term;
    for (int k = 1; k < terms; ++k) {
        term = term * X / static_cast<double>(k);
        sum += term;
    }
    for (int i = 0; i < s; ++i) sum = sum * sum;
    return sum;
}

// Random matrix with entries uniform in [-1, 1].
inline Mat random_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Mat m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = u(rng);
    return m;
}

inline Vec random_vector(std::mt19937_64& rng, Eigen::Index n, double scale = 1.0) {
    return random_matrix(rng, n, 1) * scale;
}

inline Mat random_spd(std::mt19937_64& rng, Eigen::Index n, double shift = 0.5) {
    const Mat M = random_matrix(rng, n, n);
    return M * M.transpose() + shift * Mat::Identity(n, n);
}

}  // namespace oracle
