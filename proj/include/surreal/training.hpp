#pragma once

#include "surreal/losses.hpp"
#include "surreal/networks.hpp"
#include "surreal/random.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace surreal {

struct TrainConfig {
    int num_patterns = 3;
    loss::LossWeights weights;
    double lr_d = 4e-5;
    double lr_fg = 2e-4;
    double clip_bound = 0.5;
    double batch_fraction = 0.125;  // of the PT sample size
    int batch_size = 0;             // > 0 overrides batch_fraction
    long long min_iterations = 100000;
    long long max_iterations = 300000;
    double recons_stop = 0.003;
    double mono_stop = 6e-4;
    double stop_smoothing = 0.999;  // EMA decay of the stopping losses
    std::uint64_t seed = 0;
    long long log_interval = 1000;
    // Divide the weights of terms measured across the S features (change,
    // decom, mono, cn) by S so they act per feature rather than per row.
    bool per_feature_weights = true;
    Architecture arch;
};

// Weights actually applied to the objective for S features.
loss::LossWeights effective_weights(const TrainConfig& config, int num_features);

// Throws ArgumentError naming the first offending field.
void validate(const TrainConfig& config);

int resolve_batch_size(const TrainConfig& config, Eigen::Index pt_rows);

struct Dataset {
    Matrix cn;  // reference rows, already preprocessed
    Matrix pt;  // patient rows, already preprocessed
};

// Latent samplers, one row per sample.
Matrix sample_latent(Eigen::Index n, Eigen::Index m, Rng& rng);               // U[0,1]^M
Matrix sample_severity_conditioned(const Matrix& z, Rng& rng);                 // z'_ij ~ U(z_ij, 1]
Matrix sample_cn_latent(Eigen::Index n, Eigen::Index m, Rng& rng);            // U(0, 0.05)^M

struct AdamStates {
    nn::AdamState d;
    nn::AdamState f;
    nn::AdamState g1;
    nn::AdamState g2;

    static AdamStates create(const ModelBundle& bundle, const TrainConfig& config);
};

struct GeneratorBatch {
    Matrix x;      // CN rows
    Matrix z;      // latent draws
    Matrix z_sev;  // severity-conditioned companions of z
    Matrix z_cn;   // near-zero latent draws
};

// Full objective of f on one batch with D, g1 and g2 held fixed. When f_grads
// is non-null it receives d(total_f)/d(f params). g1_cache and grad_g1_out
// expose g1's forward state and the gradient of decom with respect to g1's
// output, which the decomposer update reuses. adversarial_weight scales the
// gan_f term (1 in training).
loss::LossReport generator_objective(const ModelBundle& bundle, const GeneratorBatch& batch,
                                     const loss::LossWeights& weights, nn::GradientSet* f_grads = nullptr,
                                     DecomposerCache* g1_cache = nullptr, Matrix* grad_g1_out = nullptr,
                                     double adversarial_weight = 1.0);

enum class UpdatePhase { Discriminator, Transformation, Decomposer, Reconstructor };

using StepObserver = std::function<void(UpdatePhase, const ModelBundle&)>;

class TrainingDiverged : public std::runtime_error {
public:
    TrainingDiverged(const std::string& what, long long iteration, loss::LossReport last)
        : std::runtime_error(what), iteration_(iteration), last_(last)
    {
    }
    long long iteration() const { return iteration_; }
    const loss::LossReport& last_report() const { return last_; }

private:
    long long iteration_;
    loss::LossReport last_;
};

// One iteration: update D, resample z' and z_cn, update f on the full
// objective, then g1 on the decomposition loss and g2 on the reconstruction
// loss. f, g1 and g2 are clipped after their updates; D never is.
loss::LossReport train_step(ModelBundle& bundle, const Matrix& x_batch, const Matrix& y_batch,
                            const TrainConfig& config, Rng& rng, AdamStates& adam,
                            const StepObserver& observer = {});

// Exponential moving averages of the two stopping losses.
class StoppingMonitor {
public:
    explicit StoppingMonitor(double decay) : decay_(decay) {}
    void update(double recons, double mono);
    bool satisfied(long long completed_iterations, const TrainConfig& config) const;
    double recons() const { return recons_; }
    double mono() const { return mono_; }

private:
    double decay_;
    double recons_ = 0.0;
    double mono_ = 0.0;
    bool primed_ = false;
};

inline constexpr int kCheckpointVersion = 1;

struct Checkpoint {
    int format_version = kCheckpointVersion;
    ModelBundle bundle;
    TrainConfig config;
    long long iteration = 0;
    bool converged = false;
    loss::LossReport final_loss;
    double smoothed_recons = 0.0;
    double smoothed_mono = 0.0;
};

struct TrainingCallbacks {
    // Called every log_interval iterations and after the last one.
    std::function<void(long long iteration, const loss::LossReport&, const ModelBundle&)> on_log;
    // Called after every iteration; used by instrumentation tests.
    std::function<void(long long iteration, const loss::LossReport&, const ModelBundle&)> on_iteration;
};

Checkpoint train(const Dataset& dataset, const TrainConfig& config, const TrainingCallbacks& callbacks = {});

class ReplicaError : public std::runtime_error {
public:
    ReplicaError(std::size_t replica, const std::string& what)
        : std::runtime_error("replica " + std::to_string(replica) + ": " + what), replica_(replica)
    {
    }
    std::size_t replica() const { return replica_; }

private:
    std::size_t replica_;
};

// Replica i trains with seed base_seed + i. Up to `workers` replicas run at once.
std::vector<Checkpoint> train_replicas(const Dataset& dataset, const TrainConfig& config, int n_replicas,
                                       std::uint64_t base_seed, int workers = 1);

class CheckpointError : public std::runtime_error {
public:
    enum class Kind { Io, Version, Malformed, Shape };
    CheckpointError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

std::string checkpoint_to_string(const Checkpoint& checkpoint);
Checkpoint checkpoint_from_string(const std::string& text);
void save_checkpoint(const Checkpoint& checkpoint, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace surreal
