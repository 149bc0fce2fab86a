#include "surreal/losses.hpp"

#include <cmath>
#include <cstdio>

namespace surreal::loss {

void validate(const LossWeights& w)
{
    const std::pair<const char*, double> entries[] = {{"gamma", w.gamma}, {"kappa", w.kappa},   {"zeta", w.zeta},
                                                      {"lambda", w.lambda}, {"mu", w.mu}, {"eta", w.eta}};
    for (const auto& [name, value] : entries) {
        if (!std::isfinite(value) || value < 0.0) {
            throw ArgumentError(std::string("loss weight ") + name + " must be a nonnegative finite number");
        }
    }
}

std::string format_report(long long iteration, const LossReport& r)
{
    char buf[512];
    std::snprintf(buf, sizeof buf,
                  "iter=%lld gan_d=%.6g gan_f=%.6g change=%.6g decom=%.6g recons=%.6g ortho=%.6g mono=%.6g cn=%.6g "
                  "total_f=%.6g",
                  iteration, r.gan_d, r.gan_f, r.change, r.decom, r.recons, r.ortho, r.mono, r.cn, r.total_f);
    return buf;
}

std::vector<Matrix> component_deltas(const ModelBundle& bundle, const Matrix& x, const Matrix& z)
{
    require_shape(z, x.rows(), bundle.num_patterns, "component_deltas latent");
    const EncodedInput enc = encode_input(bundle, x);
    std::vector<Matrix> q;
    q.reserve(static_cast<std::size_t>(bundle.num_patterns));
    for (Eigen::Index i = 0; i < z.cols(); ++i) {
        Matrix masked = Matrix::Zero(z.rows(), z.cols());
        masked.col(i) = z.col(i);
        q.push_back(decode_latent(bundle, enc, masked).output() - x);
    }
    return q;
}

double cross_entropy(const Matrix& probs, Eigen::Index target, Matrix* grad_probs, int* clamped)
{
    if (target < 0 || target >= probs.cols()) {
        throw ShapeError("cross_entropy: target class out of range");
    }
    const double n = static_cast<double>(probs.rows());
    if (grad_probs != nullptr) {
        *grad_probs = Matrix::Zero(probs.rows(), probs.cols());
    }
    double total = 0.0;
    for (Eigen::Index r = 0; r < probs.rows(); ++r) {
        const double p = probs(r, target);
        if (p < kLogClamp) {
            total -= std::log(kLogClamp);
            if (clamped != nullptr) ++*clamped;
        } else {
            total -= std::log(p);
            if (grad_probs != nullptr) (*grad_probs)(r, target) = -1.0 / (p * n);
        }
    }
    return total / n;
}

AdversarialLosses adversarial_losses(const Matrix& d_real, const Matrix& d_syn)
{
    require_cols(d_real, 2, "adversarial_losses real probabilities");
    require_cols(d_syn, 2, "adversarial_losses synthetic probabilities");
    AdversarialLosses out;
    out.loss_d = cross_entropy(d_real, 1, nullptr, &out.clamped) + cross_entropy(d_syn, 0, nullptr, &out.clamped);
    out.loss_f_gan = cross_entropy(d_syn, 1, nullptr, &out.clamped);
    return out;
}

namespace {

double mean_l1(const Matrix& x, const Matrix& y, Matrix* grad_y, const char* what)
{
    require_shape(y, x.rows(), x.cols(), what);
    const double n = static_cast<double>(x.rows());
    const Matrix diff = y - x;
    if (grad_y != nullptr) {
        *grad_y = diff.unaryExpr([n](double v) { return v > 0.0 ? 1.0 / n : (v < 0.0 ? -1.0 / n : 0.0); });
    }
    return diff.cwiseAbs().sum() / n;
}

// Mean of row norms; grad (if requested) is d(mean)/d(diff).
double mean_row_l2(const Matrix& diff, Matrix* grad)
{
    const double n = static_cast<double>(diff.rows());
    const Vector norms = diff.rowwise().norm();
    if (grad != nullptr) {
        *grad = Matrix::Zero(diff.rows(), diff.cols());
        for (Eigen::Index r = 0; r < diff.rows(); ++r) {
            if (norms(r) > 0.0) grad->row(r) = diff.row(r) / (norms(r) * n);
        }
    }
    return norms.sum() / n;
}

}  // namespace

double change_loss(const Matrix& x, const Matrix& y, Matrix* grad_y)
{
    return mean_l1(x, y, grad_y, "change_loss");
}

double cn_loss(const Matrix& x, const Matrix& y_cn, Matrix* grad_y)
{
    return mean_l1(x, y_cn, grad_y, "cn_loss");
}

double decom_loss(const Matrix& g1_out, const std::vector<Matrix>& q, Matrix* grad_g1, std::vector<Matrix>* grad_q)
{
    if (q.empty()) {
        throw ShapeError("decom_loss: no component deltas");
    }
    const Eigen::Index s = q.front().cols();
    const Eigen::Index m = static_cast<Eigen::Index>(q.size());
    require_shape(g1_out, q.front().rows(), s * m, "decom_loss decomposer output");

    Matrix diff = g1_out;
    for (Eigen::Index k = 0; k < m; ++k) {
        require_shape(q[k], g1_out.rows(), s, "decom_loss component delta");
        diff.middleCols(k * s, s) -= q[k];
    }
    Matrix grad;
    const double value = mean_row_l2(diff, (grad_g1 != nullptr || grad_q != nullptr) ? &grad : nullptr);
    if (grad_q != nullptr) {
        grad_q->resize(q.size());
        for (Eigen::Index k = 0; k < m; ++k) {
            (*grad_q)[k] = -grad.middleCols(k * s, s);
        }
    }
    if (grad_g1 != nullptr) {
        *grad_g1 = std::move(grad);
    }
    return value;
}

double recons_loss(const Matrix& r, const Matrix& z, Matrix* grad_r)
{
    require_shape(r, z.rows(), z.cols(), "recons_loss");
    return mean_row_l2(r - z, grad_r);
}

double ortho_loss(const std::vector<Matrix>& q, std::vector<Matrix>* grad_q)
{
    if (q.empty()) {
        throw ShapeError("ortho_loss: no component deltas");
    }
    const Eigen::Index m = static_cast<Eigen::Index>(q.size());
    const Eigen::Index n = q.front().rows();
    const Eigen::Index s = q.front().cols();
    for (const auto& qi : q) {
        require_shape(qi, n, s, "ortho_loss component delta");
    }
    if (grad_q != nullptr) {
        grad_q->assign(q.size(), Matrix::Zero(n, s));
    }

    Matrix a(s, m);
    Vector norms(m);
    const Matrix eye = Matrix::Identity(m, m);
    double total = 0.0;
    for (Eigen::Index r = 0; r < n; ++r) {
        for (Eigen::Index k = 0; k < m; ++k) {
            const double norm = q[k].row(r).norm();
            norms(k) = norm > 0.0 ? norm : kNormFloor;
            a.col(k) = q[k].row(r).transpose().cwiseAbs() / norms(k);
        }
        const Matrix e = a.transpose() * a - eye;
        const double value = e.norm();
        total += value;
        if (grad_q == nullptr || value == 0.0) {
            continue;
        }
        const Matrix grad_a = (2.0 / (value * static_cast<double>(n))) * (a * e);
        for (Eigen::Index k = 0; k < m; ++k) {
            const Vector col = a.col(k);
            const Vector grad_abs = (grad_a.col(k) - col * col.dot(grad_a.col(k))) / norms(k);
            for (Eigen::Index j = 0; j < s; ++j) {
                const double v = q[k](r, j);
                (*grad_q)[k](r, j) = v > 0.0 ? grad_abs(j) : (v < 0.0 ? -grad_abs(j) : 0.0);
            }
        }
    }
    return total / static_cast<double>(n);
}

double mono_loss(const Matrix& x, const Matrix& y_z, const Matrix& y_zp, Matrix* grad_y_z, Matrix* grad_y_zp)
{
    require_shape(y_z, x.rows(), x.cols(), "mono_loss y_z");
    require_shape(y_zp, x.rows(), x.cols(), "mono_loss y_z'");
    const Matrix dz = y_z - x;
    const Matrix dzp = y_zp - x;
    const Matrix excess = (dz.cwiseAbs() - dzp.cwiseAbs()).cwiseMax(0.0);

    Matrix grad;
    const bool want_grad = grad_y_z != nullptr || grad_y_zp != nullptr;
    const double value = mean_row_l2(excess, want_grad ? &grad : nullptr);
    if (want_grad) {
        auto sign = [](double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); };
        if (grad_y_z != nullptr) {
            *grad_y_z = grad.cwiseProduct(dz.unaryExpr(sign));
        }
        if (grad_y_zp != nullptr) {
            *grad_y_zp = -grad.cwiseProduct(dzp.unaryExpr(sign));
        }
    }
    return value;
}

double total_generator_loss(const LossReport& r, const LossWeights& w)
{
    return r.gan_f + w.gamma * r.change + w.kappa * r.decom + w.zeta * r.recons + w.lambda * r.ortho +
           w.mu * r.mono + w.eta * r.cn;
}

}  // namespace surreal::loss
