#include "dnlg/model/gru.hpp"

namespace dnlg {

namespace {

Vector sigmoid(const Vector& a) { return (1.0 + (-a.array()).exp()).inverse().matrix(); }

}  // namespace

GruStep gru_forward(const GruParams& p, const Vector& x, const Vector& h_prev) {
    const auto H = p.hidden();
    GruStep step;
    step.x = x;
    step.h_prev = h_prev;

    const Vector wx = p.W * x + p.b;
    const Vector uh = p.U.topRows(2 * H) * h_prev;
    step.z = sigmoid(wx.head(H) + uh.head(H));
    step.r = sigmoid(wx.segment(H, H) + uh.tail(H));
    const Vector rh = step.r.cwiseProduct(h_prev);
    step.c = (wx.tail(H) + p.U.bottomRows(H) * rh).array().tanh().matrix();
    step.h = step.z.cwiseProduct(h_prev) + (1.0 - step.z.array()).matrix().cwiseProduct(step.c);
    return step;
}

void gru_backward(const GruParams& p, const GruStep& step, const Vector& dh, GruParams& grad, Vector* dx,
                  Vector& dh_prev) {
    const auto H = p.hidden();
    const auto& z = step.z.array();
    const auto& r = step.r.array();
    const auto& c = step.c.array();
    const auto& h = step.h_prev.array();

    const Vector dz = (dh.array() * (h - c)).matrix();
    const Vector dc = (dh.array() * (1.0 - z)).matrix();
    dh_prev = (dh.array() * z).matrix();

    Vector da(3 * H);
    da.tail(H) = (dc.array() * (1.0 - c * c)).matrix();
    da.head(H) = (dz.array() * z * (1.0 - z)).matrix();

    const Vector rh = (r * h).matrix();
    const Vector d_rh = p.U.bottomRows(H).transpose() * da.tail(H);
    dh_prev.array() += d_rh.array() * r;
    da.segment(H, H) = (d_rh.array() * h * r * (1.0 - r)).matrix();

    grad.W.noalias() += da * step.x.transpose();
    grad.b += da;
    grad.U.topRows(2 * H).noalias() += da.head(2 * H) * step.h_prev.transpose();
    grad.U.bottomRows(H).noalias() += da.tail(H) * rh.transpose();

    dh_prev.noalias() += p.U.topRows(2 * H).transpose() * da.head(2 * H);
    if (dx) *dx = p.W.transpose() * da;
}

}  // namespace dnlg
