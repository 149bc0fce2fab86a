#include "surreal/training.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <iostream>
#include <mutex>
#include <numeric>
#include <thread>

namespace surreal {

void validate(const TrainConfig& c)
{
    auto fail = [](const std::string& msg) { throw ArgumentError("train config: " + msg); };
    if (c.num_patterns < 1 || c.num_patterns > kMaxPatterns) fail("num_patterns must be in [1, 8]");
    loss::validate(c.weights);
    if (!(c.lr_d >= 0.0) || !(c.lr_fg >= 0.0)) fail("learning rates must be nonnegative");
    if (!(c.clip_bound > 0.0)) fail("clip_bound must be positive");
    if (c.batch_size < 0) fail("batch_size must be nonnegative");
    if (c.batch_size == 0 && !(c.batch_fraction > 0.0 && c.batch_fraction <= 1.0)) {
        fail("batch_fraction must be in (0, 1]");
    }
    if (c.min_iterations < 0 || c.max_iterations < 0) fail("iteration counts must be nonnegative");
    if (c.min_iterations > c.max_iterations) fail("min_iterations exceeds max_iterations");
    if (!(c.recons_stop > 0.0) || !(c.mono_stop > 0.0)) fail("stopping thresholds must be positive");
    if (!(c.stop_smoothing >= 0.0 && c.stop_smoothing < 1.0)) fail("stop_smoothing must be in [0, 1)");
    if (c.log_interval < 1) fail("log_interval must be at least 1");
    if (c.arch.wide < 1 || c.arch.narrow < 1) fail("hidden widths must be positive");
}

loss::LossWeights effective_weights(const TrainConfig& config, int num_features)
{
    loss::LossWeights w = config.weights;
    if (config.per_feature_weights) {
        const double s = static_cast<double>(num_features);
        w.gamma /= s;
        w.kappa /= s;
        w.mu /= s;
        w.eta /= s;
    }
    return w;
}

int resolve_batch_size(const TrainConfig& config, Eigen::Index pt_rows)
{
    if (config.batch_size > 0) {
        return config.batch_size;
    }
    const auto m = static_cast<int>(std::floor(static_cast<double>(pt_rows) * config.batch_fraction));
    return std::max(1, m);
}

Matrix sample_latent(Eigen::Index n, Eigen::Index m, Rng& rng)
{
    if (n < 1 || m < 1) throw ArgumentError("sample_latent: n and M must be positive");
    Matrix z(n, m);
    for (Eigen::Index r = 0; r < n; ++r)
        for (Eigen::Index c = 0; c < m; ++c) z(r, c) = rng.uniform();
    return z;
}

Matrix sample_severity_conditioned(const Matrix& z, Rng& rng)
{
    Matrix out(z.rows(), z.cols());
    for (Eigen::Index r = 0; r < z.rows(); ++r) {
        for (Eigen::Index c = 0; c < z.cols(); ++c) {
            const double lo = z(r, c);
            if (lo < 0.0 || lo > 1.0) throw ArgumentError("sample_severity_conditioned: z outside [0, 1]");
            // 1 - u(1 - lo) with u in [0, 1) lands in (lo, 1].
            out(r, c) = 1.0 - rng.uniform() * (1.0 - lo);
        }
    }
    return out;
}

Matrix sample_cn_latent(Eigen::Index n, Eigen::Index m, Rng& rng)
{
    if (n < 1 || m < 1) throw ArgumentError("sample_cn_latent: n and M must be positive");
    Matrix z(n, m);
    for (Eigen::Index r = 0; r < n; ++r)
        for (Eigen::Index c = 0; c < m; ++c) z(r, c) = 0.05 * rng.uniform_open();
    return z;
}

AdamStates AdamStates::create(const ModelBundle& bundle, const TrainConfig& config)
{
    return AdamStates{nn::AdamState::for_params(bundle.d, config.lr_d),
                      nn::AdamState::for_params(bundle.f, config.lr_fg),
                      nn::AdamState::for_params(bundle.g1, config.lr_fg),
                      nn::AdamState::for_params(bundle.g2, config.lr_fg)};
}

namespace {

bool finite_report(const loss::LossReport& r)
{
    return std::isfinite(r.gan_d) && std::isfinite(r.gan_f) && std::isfinite(r.change) && std::isfinite(r.decom) &&
           std::isfinite(r.recons) && std::isfinite(r.ortho) && std::isfinite(r.mono) && std::isfinite(r.cn) &&
           std::isfinite(r.total_f);
}

}  // namespace

loss::LossReport generator_objective(const ModelBundle& bundle, const GeneratorBatch& batch,
                                     const loss::LossWeights& w, nn::GradientSet* f_grads, DecomposerCache* g1_cache,
                                     Matrix* grad_g1_out, double adversarial_weight)
{
    const Matrix& x = batch.x;
    const Matrix& z = batch.z;
    const Eigen::Index n = x.rows();
    const Eigen::Index m = bundle.num_patterns;
    require_shape(z, n, m, "generator_objective z");
    require_shape(batch.z_sev, n, m, "generator_objective z_sev");
    require_shape(batch.z_cn, n, m, "generator_objective z_cn");

    const EncodedInput enc = encode_input(bundle, x);
    const DecodedOutput dec_z = decode_latent(bundle, enc, z);
    const DecodedOutput dec_sev = decode_latent(bundle, enc, batch.z_sev);
    const DecodedOutput dec_cn = decode_latent(bundle, enc, batch.z_cn);
    const Matrix& y_syn = dec_z.output();
    std::vector<DecodedOutput> dec_parts;
    std::vector<Matrix> q;
    dec_parts.reserve(static_cast<std::size_t>(m));
    q.reserve(static_cast<std::size_t>(m));
    for (Eigen::Index i = 0; i < m; ++i) {
        Matrix masked = Matrix::Zero(n, m);
        masked.col(i) = z.col(i);
        dec_parts.push_back(decode_latent(bundle, enc, masked));
        q.push_back(dec_parts.back().output() - x);
    }

    std::vector<nn::DenseCache> d_cache;
    const Matrix p_fake = discriminate(bundle, y_syn, &d_cache);
    DecomposerCache local_g1;
    DecomposerCache& g1c = g1_cache != nullptr ? *g1_cache : local_g1;
    const Matrix blocks = decompose(bundle, y_syn, &g1c);
    ReconstructorCache g2_cache;
    const Matrix r_hat = reconstruct_from_blocks(bundle, blocks, &g2_cache);

    const bool want = f_grads != nullptr;
    Matrix grad_gan, grad_change, grad_blocks_decom, grad_r, grad_mono_z, grad_mono_sev, grad_cn;
    std::vector<Matrix> grad_q_decom, grad_q_ortho;
    loss::LossReport report;
    report.gan_f = loss::cross_entropy(p_fake, 1, want ? &grad_gan : nullptr);
    report.change = loss::change_loss(x, y_syn, want ? &grad_change : nullptr);
    report.decom = loss::decom_loss(blocks, q, &grad_blocks_decom, want ? &grad_q_decom : nullptr);
    report.recons = loss::recons_loss(r_hat, z, want ? &grad_r : nullptr);
    report.ortho = loss::ortho_loss(q, want && w.lambda != 0.0 ? &grad_q_ortho : nullptr);
    report.mono = loss::mono_loss(x, y_syn, dec_sev.output(), want ? &grad_mono_z : nullptr,
                                  want ? &grad_mono_sev : nullptr);
    report.cn = loss::cn_loss(x, dec_cn.output(), want ? &grad_cn : nullptr);
    report.total_f = loss::total_generator_loss(report, w) + (adversarial_weight - 1.0) * report.gan_f;
    if (grad_g1_out != nullptr) *grad_g1_out = grad_blocks_decom;
    if (!want) return report;

    // D, g1 and g2 act as fixed functions here; only input gradients flow.
    const Matrix grad_blocks =
        w.kappa * grad_blocks_decom + reconstruct_backward(bundle, g2_cache, w.zeta * grad_r, nullptr);
    Matrix grad_y_syn = discriminate_backward(bundle, d_cache, adversarial_weight * grad_gan, nullptr);
    grad_y_syn += w.gamma * grad_change + w.mu * grad_mono_z;
    grad_y_syn += decompose_backward(bundle, g1c, grad_blocks, nullptr);

    Matrix grad_code = decode_backward(bundle, enc, dec_z, grad_y_syn, *f_grads);
    grad_code += decode_backward(bundle, enc, dec_sev, w.mu * grad_mono_sev, *f_grads);
    grad_code += decode_backward(bundle, enc, dec_cn, w.eta * grad_cn, *f_grads);
    for (Eigen::Index i = 0; i < m; ++i) {
        Matrix grad_qi = w.kappa * grad_q_decom[static_cast<std::size_t>(i)];
        if (w.lambda != 0.0) grad_qi += w.lambda * grad_q_ortho[static_cast<std::size_t>(i)];
        grad_code += decode_backward(bundle, enc, dec_parts[static_cast<std::size_t>(i)], grad_qi, *f_grads);
    }
    encode_backward(bundle, enc, grad_code, *f_grads);
    return report;
}

loss::LossReport train_step(ModelBundle& bundle, const Matrix& x, const Matrix& y, const TrainConfig& config,
                            Rng& rng, AdamStates& adam, const StepObserver& observer)
{
    const Eigen::Index n = x.rows();
    const Eigen::Index m = bundle.num_patterns;
    if (n < 1 || y.rows() != n) {
        throw ShapeError("train_step: CN and PT batches must be non-empty and equally sized, got " +
                         std::to_string(n) + " and " + std::to_string(y.rows()));
    }
    require_cols(x, bundle.num_features, "train_step CN batch");
    require_cols(y, bundle.num_features, "train_step PT batch");
    const loss::LossWeights w = effective_weights(config, bundle.num_features);
    loss::LossReport report;
    double gan_d = 0.0;

    const Matrix z = sample_latent(n, m, rng);
    const Matrix y_syn = transform(bundle, x, z);

    // (1) discriminator on real vs synthetic
    {
        std::vector<nn::DenseCache> real_cache;
        std::vector<nn::DenseCache> syn_cache;
        const Matrix p_real = discriminate(bundle, y, &real_cache);
        const Matrix p_syn = discriminate(bundle, y_syn, &syn_cache);
        Matrix g_real;
        Matrix g_syn;
        gan_d = loss::cross_entropy(p_real, 1, &g_real) + loss::cross_entropy(p_syn, 0, &g_syn);
        nn::GradientSet d_grads = nn::zero_gradients(bundle.d);
        discriminate_backward(bundle, real_cache, g_real, &d_grads);
        discriminate_backward(bundle, syn_cache, g_syn, &d_grads);
        nn::adam_step(adam.d, bundle.d, d_grads);
        if (observer) observer(UpdatePhase::Discriminator, bundle);
    }

    // (2) companions of z
    const Matrix z_sev = sample_severity_conditioned(z, rng);
    const Matrix z_cn = sample_cn_latent(n, m, rng);

    // (3) transformation function on the full objective
    DecomposerCache g1_cache;
    Matrix grad_blocks_decom;
    {
        nn::GradientSet f_grads = nn::zero_gradients(bundle.f);
        report = generator_objective(bundle, GeneratorBatch{x, z, z_sev, z_cn}, w, &f_grads, &g1_cache,
                                     &grad_blocks_decom);
        report.gan_d = gan_d;
        if (!finite_report(report)) {
            throw TrainingDiverged("non-finite loss during train_step", 0, report);
        }
        nn::adam_step(adam.f, bundle.f, f_grads);
        nn::clip_weights(bundle.f, config.clip_bound);
        if (observer) observer(UpdatePhase::Transformation, bundle);
    }

    // (4) decomposer on its own loss; y' and q are the values computed above.
    {
        nn::GradientSet g1_grads = nn::zero_gradients(bundle.g1);
        decompose_backward(bundle, g1_cache, grad_blocks_decom, &g1_grads);
        nn::adam_step(adam.g1, bundle.g1, g1_grads);
        nn::clip_weights(bundle.g1, config.clip_bound);
        if (observer) observer(UpdatePhase::Decomposer, bundle);
    }

    // (5) reconstructor, fed by the freshly updated decomposer
    {
        const Matrix fresh_blocks = decompose(bundle, g1_cache.input);
        ReconstructorCache cache;
        const Matrix r = reconstruct_from_blocks(bundle, fresh_blocks, &cache);
        Matrix grad;
        loss::recons_loss(r, z, &grad);
        nn::GradientSet g2_grads = nn::zero_gradients(bundle.g2);
        reconstruct_backward(bundle, cache, grad, &g2_grads);
        nn::adam_step(adam.g2, bundle.g2, g2_grads);
        nn::clip_weights(bundle.g2, config.clip_bound);
        if (observer) observer(UpdatePhase::Reconstructor, bundle);
    }
    return report;
}

void StoppingMonitor::update(double recons, double mono)
{
    if (!primed_) {
        recons_ = recons;
        mono_ = mono;
        primed_ = true;
        return;
    }
    recons_ = decay_ * recons_ + (1.0 - decay_) * recons;
    mono_ = decay_ * mono_ + (1.0 - decay_) * mono;
}

bool StoppingMonitor::satisfied(long long completed_iterations, const TrainConfig& config) const
{
    return primed_ && completed_iterations >= config.min_iterations && recons_ < config.recons_stop &&
           mono_ < config.mono_stop;
}

namespace {

// Epoch-shuffled index stream over n rows.
class ShuffledIndices {
public:
    ShuffledIndices(Eigen::Index n, Rng& rng) : order_(static_cast<std::size_t>(n)), rng_(rng)
    {
        std::iota(order_.begin(), order_.end(), Eigen::Index{0});
        reshuffle();
    }

    std::vector<Eigen::Index> take(int count)
    {
        if (cursor_ + static_cast<std::size_t>(count) > order_.size()) {
            reshuffle();
        }
        std::vector<Eigen::Index> out(order_.begin() + static_cast<std::ptrdiff_t>(cursor_),
                                      order_.begin() + static_cast<std::ptrdiff_t>(cursor_) + count);
        cursor_ += static_cast<std::size_t>(count);
        return out;
    }

private:
    void reshuffle()
    {
        std::shuffle(order_.begin(), order_.end(), rng_.engine());
        cursor_ = 0;
    }

    std::vector<Eigen::Index> order_;
    Rng& rng_;
    std::size_t cursor_ = 0;
};

Matrix gather_rows(const Matrix& source, const std::vector<Eigen::Index>& rows)
{
    Matrix out(static_cast<Eigen::Index>(rows.size()), source.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out.row(static_cast<Eigen::Index>(i)) = source.row(rows[i]);
    }
    return out;
}

}  // namespace

Checkpoint train(const Dataset& data, const TrainConfig& config, const TrainingCallbacks& callbacks)
{
    validate(config);
    tune_allocator();
    if (data.cn.rows() < 1 || data.pt.rows() < 1) {
        throw ArgumentError("train: CN and PT partitions must both be non-empty");
    }
    if (data.cn.cols() != data.pt.cols() || data.cn.cols() < 1) {
        throw ShapeError("train: CN has " + std::to_string(data.cn.cols()) + " features, PT has " +
                         std::to_string(data.pt.cols()));
    }

    Checkpoint ckpt;
    ckpt.config = config;
    ckpt.bundle = init_bundle(config.num_patterns, static_cast<int>(data.pt.cols()), config.seed, config.arch);
    if (config.max_iterations == 0) {
        return ckpt;
    }

    const int batch = std::min<int>(resolve_batch_size(config, data.pt.rows()), static_cast<int>(data.pt.rows()));
    Rng rng(config.seed ^ 0x5DEECE66DULL);
    AdamStates adam = AdamStates::create(ckpt.bundle, config);
    ShuffledIndices pt_stream(data.pt.rows(), rng);
    const bool cn_with_replacement = data.cn.rows() < data.pt.rows() || data.cn.rows() < batch;
    std::optional<ShuffledIndices> cn_stream;
    if (!cn_with_replacement) {
        cn_stream.emplace(data.cn.rows(), rng);
    }

    StoppingMonitor monitor(config.stop_smoothing);
    loss::LossReport last;
    for (long long it = 1; it <= config.max_iterations; ++it) {
        const Matrix y_batch = gather_rows(data.pt, pt_stream.take(batch));
        std::vector<Eigen::Index> cn_rows;
        if (cn_with_replacement) {
            cn_rows.resize(static_cast<std::size_t>(batch));
            for (auto& r : cn_rows) r = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(data.cn.rows())));
        } else {
            cn_rows = cn_stream->take(batch);
        }
        const Matrix x_batch = gather_rows(data.cn, cn_rows);

        try {
            last = train_step(ckpt.bundle, x_batch, y_batch, config, rng, adam);
        } catch (const TrainingDiverged& e) {
            throw TrainingDiverged(std::string("training diverged at iteration ") + std::to_string(it), it,
                                   e.last_report());
        } catch (const TrainingFault& e) {
            throw TrainingDiverged(std::string(e.what()) + " at iteration " + std::to_string(it), it, last);
        }
        monitor.update(last.recons, last.mono);
        ckpt.iteration = it;
        ckpt.final_loss = last;
        ckpt.smoothed_recons = monitor.recons();
        ckpt.smoothed_mono = monitor.mono();

        const bool stop = monitor.satisfied(it, config);
        if (callbacks.on_iteration) callbacks.on_iteration(it, last, ckpt.bundle);
        if (callbacks.on_log && (it % config.log_interval == 0 || stop || it == config.max_iterations)) {
            callbacks.on_log(it, last, ckpt.bundle);
        }
        if (stop) {
            ckpt.converged = true;
            break;
        }
    }
    return ckpt;
}

std::vector<Checkpoint> train_replicas(const Dataset& dataset, const TrainConfig& config, int n_replicas,
                                       std::uint64_t base_seed, int workers)
{
    if (n_replicas < 1) throw ArgumentError("train_replicas: n_replicas must be positive");
    const std::size_t count = static_cast<std::size_t>(n_replicas);
    std::vector<std::optional<Checkpoint>> results(count);
    std::vector<std::exception_ptr> errors(count);
    std::atomic<std::size_t> next{0};

    auto worker = [&] {
        for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
            TrainConfig replica = config;
            replica.seed = base_seed + i;
            try {
                results[i] = train(dataset, replica);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };

    const int pool = std::clamp(workers, 1, n_replicas);
    if (pool == 1) {
        worker();
    } else {
        std::vector<std::thread> threads;
        for (int t = 0; t < pool; ++t) threads.emplace_back(worker);
        for (auto& t : threads) t.join();
    }

    std::vector<Checkpoint> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        if (errors[i]) {
            try {
                std::rethrow_exception(errors[i]);
            } catch (const std::exception& e) {
                throw ReplicaError(i, e.what());
            }
        }
        out.push_back(std::move(*results[i]));
    }
    return out;
}

}  // namespace surreal
