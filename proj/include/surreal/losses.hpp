#pragma once

#include "surreal/networks.hpp"

#include <string>
#include <vector>

// Loss terms of the constrained objective. Each function returns the batch
// mean and, when the matching pointer is non-null, writes the gradient of
// that mean with respect to its inputs.
namespace surreal::loss {

inline constexpr double kLogClamp = 1e-12;
inline constexpr double kNormFloor = 1e-12;

struct LossWeights {
    double gamma = 6.0;    // change
    double kappa = 80.0;   // decomposition
    double zeta = 80.0;    // reconstruction
    double lambda = 0.2;   // orthogonality, chosen per run from a grid
    double mu = 500.0;     // monotonicity
    double eta = 6.0;      // cn
};

// Throws ArgumentError if any weight is negative or non-finite.
void validate(const LossWeights& weights);

struct LossReport {
    double gan_d = 0.0;
    double gan_f = 0.0;
    double change = 0.0;
    double decom = 0.0;
    double recons = 0.0;
    double ortho = 0.0;
    double mono = 0.0;
    double cn = 0.0;
    double total_f = 0.0;
};

// One structured log line: "iter=<n> gan_d=... total_f=...".
std::string format_report(long long iteration, const LossReport& report);

// q_i = f(x, a^i) - x where a^i keeps only column i of z.
std::vector<Matrix> component_deltas(const ModelBundle& bundle, const Matrix& x, const Matrix& z);

// Mean over rows of -ln(max(p[row, target], 1e-12)). Counts clamped rows.
double cross_entropy(const Matrix& probs, Eigen::Index target, Matrix* grad_probs = nullptr, int* clamped = nullptr);

struct AdversarialLosses {
    double loss_d = 0.0;      // CE(real -> class 1) + CE(synthetic -> class 0)
    double loss_f_gan = 0.0;  // CE(synthetic -> class 1), non-saturating form
    int clamped = 0;
};

AdversarialLosses adversarial_losses(const Matrix& d_real, const Matrix& d_syn);

// Mean row-wise L1 distance ||y - x||_1; gradient is with respect to y.
double change_loss(const Matrix& x, const Matrix& y, Matrix* grad_y = nullptr);
double cn_loss(const Matrix& x, const Matrix& y_cn, Matrix* grad_y = nullptr);

// Mean row-wise L2 distance between g1's output and [q_1, ..., q_M].
double decom_loss(const Matrix& g1_out, const std::vector<Matrix>& q, Matrix* grad_g1 = nullptr,
                  std::vector<Matrix>* grad_q = nullptr);

// Mean row-wise L2 distance ||r - z||_2; gradient is with respect to r.
double recons_loss(const Matrix& r, const Matrix& z, Matrix* grad_r = nullptr);

// Mean over rows of ||A^T A - I||_F, A[:, i] = |q_i| / ||q_i||_2.
double ortho_loss(const std::vector<Matrix>& q, std::vector<Matrix>* grad_q = nullptr);

// Mean row-wise ||max(|y_z - x| - |y_z' - x|, 0)||_2.
double mono_loss(const Matrix& x, const Matrix& y_z, const Matrix& y_zp, Matrix* grad_y_z = nullptr,
                 Matrix* grad_y_zp = nullptr);

// gan_f + gamma*change + kappa*decom + zeta*recons + lambda*ortho + mu*mono + eta*cn
double total_generator_loss(const LossReport& report, const LossWeights& weights);

}  // namespace surreal::loss
