// regression.hpp
//
// Small weighted least-squares toolkit used by the empirical-Bayes fits and the
// ensemble family. Leave-one-out predictions come from rank-one downdating of
// the normal equations (the hat-matrix identity), O(n p^2) overall.
#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "assure/error.hpp"

namespace assure::detail {

struct WlsFit {
    Eigen::VectorXd coef;
    Eigen::MatrixXd normal_inverse; // (X' W X)^{-1}
    Eigen::VectorXd fitted;
    Eigen::VectorXd leverage;       // h_ii = w_i x_i' (X'WX)^{-1} x_i
};

/// Throws DomainError("rank_deficient") naming the columns that are linear
/// combinations of the others.
inline void require_full_rank(const Eigen::MatrixXd& x, const std::vector<std::string>& names) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
    qr.setThreshold(1e-10);
    const auto rank = qr.rank();
    if (rank == x.cols())
        return;
    std::string cols;
    const auto& perm = qr.colsPermutation().indices();
    for (Eigen::Index j = rank; j < x.cols(); ++j) {
        const auto c = static_cast<std::size_t>(perm(j));
        if (!cols.empty())
            cols += ", ";
        cols += c < names.size() ? names[c] : "column " + std::to_string(c + 1);
    }
    throw DomainError("design matrix is rank deficient; collinear column(s): " + cols, "rank_deficient");
}

inline WlsFit wls(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& w,
                  const std::vector<std::string>& names = {}) {
    const Eigen::VectorXd sw = w.array().sqrt();
    const Eigen::MatrixXd xw = sw.asDiagonal() * x;
    require_full_rank(xw, names);
    const Eigen::MatrixXd xtwx = xw.transpose() * xw;
    WlsFit fit;
    fit.normal_inverse = xtwx.ldlt().solve(Eigen::MatrixXd::Identity(x.cols(), x.cols()));
    fit.coef = fit.normal_inverse * (x.transpose() * (w.asDiagonal() * y));
    fit.fitted = x * fit.coef;
    fit.leverage.resize(x.rows());
    for (Eigen::Index i = 0; i < x.rows(); ++i)
        fit.leverage(i) = w(i) * x.row(i).dot(fit.normal_inverse * x.row(i).transpose());
    return fit;
}

/// Prediction for row i from the fit with row i removed:
///   yhat_i^{(-i)} = (yhat_i - h_ii y_i) / (1 - h_ii).
inline Eigen::VectorXd loo_predictions(const WlsFit& fit, const Eigen::VectorXd& y) {
    Eigen::VectorXd out(y.size());
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        const double h = fit.leverage(i);
        if (!(h < 1.0 - 1e-12))
            throw DomainError("leave-one-out refit undefined: row " + std::to_string(i) + " has leverage 1",
                              "rank_deficient");
        out(i) = (fit.fitted(i) - h * y(i)) / (1.0 - h);
    }
    return out;
}

} // namespace assure::detail
