#pragma once

#include <Eigen/Core>
#include <array>
#include <cmath>

#include "wawenet/dsp.hpp"
#include "wawenet/errors.hpp"

// Batched, matrix-shaped versions of the operations in dsp.hpp, used by the
// network forward pass and the trainer. A signal block is a channels × length
// column-major matrix: one column per time step, so a length-3 convolution is
// three shifted matrix products. Tests pin these against the reference
// implementations in dsp.hpp.
//
// Reductions that span a whole signal (channel statistics, offset gradients)
// accumulate in double; the matrix products themselves accumulate in the
// storage scalar, which keeps the hot path on the fast GEMM route.

namespace wawenet::kernels {

template <typename T>
using ConstRef = const Eigen::Ref<const Mat<T>>&;
template <typename T>
using MutRef = Eigen::Ref<Mat<T>>;

// y[:,k] = sum_d W[d] x[:,k+d-1] + offset, zero padded at both ends.
template <typename T>
void conv3(const std::array<Mat<T>, 3>& W, const Vec<T>& offset, ConstRef<T> X, MutRef<T> Y) {
    const Eigen::Index L = X.cols();
    if (Y.rows() != W[1].rows() || Y.cols() != L || W[1].cols() != X.rows())
        throw InvalidShape("conv3: dimension mismatch");
    Y.noalias() = W[1] * X;
    if (L > 1) {
        Y.middleCols(1, L - 1).noalias() += W[0] * X.middleCols(0, L - 1);
        Y.middleCols(0, L - 1).noalias() += W[2] * X.middleCols(1, L - 1);
    }
    Y.colwise() += offset;
}

// dX[:,j] = sum_d W[d]^T dY[:,j-d+1]
template <typename T>
void conv3_grad_input(const std::array<Mat<T>, 3>& W, ConstRef<T> dY, MutRef<T> dX) {
    const Eigen::Index L = dY.cols();
    dX.noalias() = W[1].transpose() * dY;
    if (L > 1) {
        dX.middleCols(0, L - 1).noalias() += W[0].transpose() * dY.middleCols(1, L - 1);
        dX.middleCols(1, L - 1).noalias() += W[2].transpose() * dY.middleCols(0, L - 1);
    }
}

// Accumulates dW[d] += sum_k dY[:,k] X[:,k+d-1]^T and doffset += row sums of dY.
template <typename T>
void conv3_grad_params(ConstRef<T> X, ConstRef<T> dY, std::array<Mat<T>, 3>& dW,
                       Eigen::Ref<Eigen::VectorXd> doffset) {
    const Eigen::Index L = X.cols();
    dW[1].noalias() += dY * X.transpose();
    if (L > 1) {
        dW[0].noalias() += dY.middleCols(1, L - 1) * X.middleCols(0, L - 1).transpose();
        dW[2].noalias() += dY.middleCols(0, L - 1) * X.middleCols(1, L - 1).transpose();
    }
    for (Eigen::Index j = 0; j < L; ++j)
        for (Eigen::Index c = 0; c < dY.rows(); ++c) doffset[c] += double(dY(c, j));
}

// Accumulates per-row sums and sums of squares over a column block in double,
// so statistics of a batch can be folded together item by item.
template <typename T>
void row_accumulate(ConstRef<T> X, Eigen::Ref<Eigen::VectorXd> sum,
                    Eigen::Ref<Eigen::VectorXd> sumsq) {
    for (Eigen::Index j = 0; j < X.cols(); ++j)
        for (Eigen::Index c = 0; c < X.rows(); ++c) {
            const double v = double(X(c, j));
            sum[c] += v;
            sumsq[c] += v * v;
        }
}

// Per-row mean and biased variance, accumulated in double.
template <typename T>
void row_stats(ConstRef<T> X, Eigen::VectorXd& mean, Eigen::VectorXd& var) {
    const Eigen::Index C = X.rows(), L = X.cols();
    mean.setZero(C);
    var.setZero(C);
    row_accumulate<T>(X, mean, var);
    mean /= double(L);
    var = (var / double(L) - mean.cwiseProduct(mean)).cwiseMax(0.0);
}

// x -> (x - mean) / sqrt(var + eps), row-wise, in place.
template <typename T>
void normalize_rows(MutRef<T> X, const Eigen::VectorXd& mean, const Eigen::VectorXd& var,
                    double eps) {
    const Eigen::Index C = X.rows(), L = X.cols();
    Vec<T> shift(C), scale(C);
    for (Eigen::Index c = 0; c < C; ++c) {
        const double inv = 1.0 / std::sqrt(var[c] + eps);
        scale[c] = T(inv);
        shift[c] = T(mean[c] * inv);
    }
    for (Eigen::Index j = 0; j < L; ++j)
        X.col(j) = X.col(j).cwiseProduct(scale) - shift;
}

// x -> a*x + b, row-wise, in place.
template <typename T>
void affine_rows(MutRef<T> X, const Vec<T>& a, const Vec<T>& b) {
    for (Eigen::Index j = 0; j < X.cols(); ++j)
        X.col(j) = X.col(j).cwiseProduct(a) + b;
}

template <typename T>
void hwr_rows(MutRef<T> X) {
    X = X.cwiseMax(T(0));
}

// Zeroes dY wherever the activation gamma*xhat + beta was not positive.
template <typename T>
void hwr_grad_rows(MutRef<T> dY, ConstRef<T> Xhat, const Vec<T>& gamma, const Vec<T>& beta) {
    for (Eigen::Index j = 0; j < dY.cols(); ++j)
        for (Eigen::Index c = 0; c < dY.rows(); ++c)
            if (!(gamma[c] * Xhat(c, j) + beta[c] > T(0))) dY(c, j) = T(0);
}

// Accumulates the per-channel sums the normalization backward needs:
// sum_dy += sum(dy), sum_dy_xhat += sum(dy .* xhat). These sums double as the
// beta and gamma gradients.
template <typename T>
void bn_backward_sums(ConstRef<T> dY, ConstRef<T> Xhat, Eigen::Ref<Eigen::VectorXd> sum_dy,
                      Eigen::Ref<Eigen::VectorXd> sum_dy_xhat) {
    for (Eigen::Index j = 0; j < dY.cols(); ++j)
        for (Eigen::Index c = 0; c < dY.rows(); ++c) {
            const double d = double(dY(c, j));
            sum_dy[c] += d;
            sum_dy_xhat[c] += d * double(Xhat(c, j));
        }
}

// In-place statistics-normalization backward once the sums over all n columns
// of the batch are known:
//   dx = gamma/sqrt(var+eps) * (dy - sum_dy/n - xhat * sum_dy_xhat/n)
template <typename T>
void bn_backward_apply(MutRef<T> dY, ConstRef<T> Xhat, const Vec<T>& gamma,
                       const Eigen::VectorXd& var, double eps, double n,
                       const Eigen::VectorXd& sum_dy, const Eigen::VectorXd& sum_dy_xhat) {
    const Eigen::Index C = dY.rows(), L = dY.cols();
    Vec<T> scale(C), m1(C), m2(C);
    for (Eigen::Index c = 0; c < C; ++c) {
        scale[c] = T(double(gamma[c]) / std::sqrt(var[c] + eps));
        m1[c] = T(sum_dy[c] / n);
        m2[c] = T(sum_dy_xhat[c] / n);
    }
    for (Eigen::Index j = 0; j < L; ++j)
        for (Eigen::Index c = 0; c < C; ++c)
            dY(c, j) = scale[c] * (dY(c, j) - m1[c] - Xhat(c, j) * m2[c]);
}

// Statistics-normalization backward over one block, in place on dY, with the
// means taken per channel over all n columns. Emits dgamma and dbeta.
template <typename T>
void bn_grad_rows(MutRef<T> dY, ConstRef<T> Xhat, const Vec<T>& gamma,
                  const Eigen::VectorXd& var, double eps, double n, Eigen::VectorXd& dgamma,
                  Eigen::VectorXd& dbeta) {
    const Eigen::Index C = dY.rows();
    Eigen::VectorXd sum_dy = Eigen::VectorXd::Zero(C);
    Eigen::VectorXd sum_dy_xhat = Eigen::VectorXd::Zero(C);
    bn_backward_sums<T>(dY, Xhat, sum_dy, sum_dy_xhat);
    dgamma += sum_dy_xhat;
    dbeta += sum_dy;
    bn_backward_apply<T>(dY, Xhat, gamma, var, eps, n, sum_dy, sum_dy_xhat);
}

// Non-overlapping means of m consecutive columns.
template <typename T>
void pool_cols(ConstRef<T> X, int m, MutRef<T> Y) {
    const Eigen::Index C = X.rows(), Lo = X.cols() / m;
    if (X.cols() % m != 0) throw InvalidLength("pool_cols: length not divisible by block");
    const double inv = 1.0 / m;
    for (Eigen::Index j = 0; j < Lo; ++j)
        for (Eigen::Index c = 0; c < C; ++c) {
            double acc = 0.0;
            for (int t = 0; t < m; ++t) acc += double(X(c, j * m + t));
            Y(c, j) = T(acc * inv);
        }
}

template <typename T>
void pool_grad_cols(ConstRef<T> dY, int m, MutRef<T> dX) {
    const T inv = T(1.0 / double(m));
    for (Eigen::Index j = 0; j < dY.cols(); ++j)
        for (int t = 0; t < m; ++t) dX.col(j * m + t) = dY.col(j) * inv;
}

}  // namespace wawenet::kernels
