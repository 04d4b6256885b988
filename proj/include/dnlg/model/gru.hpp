#pragma once

#include <Eigen/Dense>

namespace dnlg {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Gated recurrent unit with gates stacked row-wise as [update; reset; candidate]:
//
//   z  = sigmoid(W_z x + U_z h + b_z)
//   r  = sigmoid(W_r x + U_r h + b_r)
//   c  = tanh(W_c x + U_c (r * h) + b_c)
//   h' = z * h + (1 - z) * c
//
// The reset gate multiplies h before the candidate's recurrent product.
struct GruParams {
    Matrix W;  // 3H x input
    Matrix U;  // 3H x H
    Vector b;  // 3H

    Eigen::Index hidden() const { return U.cols(); }
    Eigen::Index input() const { return W.cols(); }
};

// Everything the backward pass needs from one forward step.
struct GruStep {
    Vector x;
    Vector h_prev;
    Vector z;
    Vector r;
    Vector c;
    Vector h;
};

GruStep gru_forward(const GruParams& p, const Vector& x, const Vector& h_prev);

// Accumulates parameter gradients into `grad` given dL/dh for the step's
// output. Writes dL/dx into dx (if non-null) and dL/dh_prev into dh_prev.
void gru_backward(const GruParams& p, const GruStep& step, const Vector& dh, GruParams& grad, Vector* dx,
                  Vector& dh_prev);

}  // namespace dnlg
