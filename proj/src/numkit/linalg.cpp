#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "pathfg/numkit.hpp"

namespace pathfg::numkit {

bool is_symmetric(const Mat& m, double tol) {
    if (m.rows() != m.cols()) return false;
    return (m - m.transpose()).cwiseAbs().maxCoeff() <= tol * std::max(1.0, m.cwiseAbs().maxCoeff());
}

double min_eigenvalue_symmetric(const Mat& m) {
    if (m.size() == 0) return 0.0;
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

double spectral_radius(const Mat& m) {
    if (m.size() == 0) return 0.0;
    Eigen::EigenSolver<Mat> es(m, false);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

Mat expm(const Mat& m) {
    if (m.rows() != m.cols()) throw DimensionError("expm: matrix must be square");
    const Eigen::Index n = m.rows();
    if (n == 0) return m;

    const double norm1 = m.cwiseAbs().colwise().sum().maxCoeff();
    int squarings = 0;
    if (norm1 > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm1 / 0.5)));
    const Mat x = m / std::ldexp(1.0, squarings);

    static constexpr double c[] = {1.0,          1.0 / 2.0,     5.0 / 44.0,        1.0 / 66.0,
                                   1.0 / 792.0, 1.0 / 15840.0, 1.0 / 665280.0};
    const Mat id = Mat::Identity(n, n);
    Mat power = id;
    Mat num = c[0] * id;
    Mat den = c[0] * id;
    double sign = 1.0;
    for (int k = 1; k <= 6; ++k) {
        power = power * x;
        sign = -sign;
        num += c[k] * power;
        den += sign * c[k] * power;
    }
    Mat result = den.partialPivLu().solve(num);
    for (int i = 0; i < squarings; ++i) result = result * result;
    return result;
}

Mat kernel_basis(const Mat& m, double rank_tol) {
    Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeFullV);
    const Vec& sv = svd.singularValues();
    const double cutoff = rank_tol * std::max(1.0, sv.size() > 0 ? sv(0) : 0.0);
    Eigen::Index rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) > cutoff) ++rank;
    return svd.matrixV().rightCols(m.cols() - rank);
}

}  // namespace pathfg::numkit
