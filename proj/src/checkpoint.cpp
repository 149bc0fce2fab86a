#include "surreal/serialization.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace surreal {

namespace {

constexpr const char* kFormatTag = "surreal-gan-checkpoint";

template <typename T>
void read_if_present(const Json& j, const char* key, T& out)
{
    if (j.contains(key)) {
        out = j.at(key).get<T>();
    }
}

}  // namespace

void reject_unknown_keys(const Json& obj, std::initializer_list<const char*> allowed, const std::string& context)
{
    if (!obj.is_object()) {
        throw ArgumentError(context + ": expected an object");
    }
    for (const auto& item : obj.items()) {
        const bool known = std::any_of(allowed.begin(), allowed.end(),
                                       [&](const char* k) { return item.key() == k; });
        if (!known) {
            throw ArgumentError(context + ": unknown key '" + item.key() + "'");
        }
    }
}

Json to_json(const loss::LossWeights& w)
{
    return Json{{"gamma", w.gamma}, {"kappa", w.kappa}, {"zeta", w.zeta},
                {"lambda", w.lambda}, {"mu", w.mu},       {"eta", w.eta}};
}

loss::LossWeights loss_weights_from_json(const Json& j, loss::LossWeights w)
{
    reject_unknown_keys(j, {"gamma", "kappa", "zeta", "lambda", "mu", "eta"}, "weights");
    read_if_present(j, "gamma", w.gamma);
    read_if_present(j, "kappa", w.kappa);
    read_if_present(j, "zeta", w.zeta);
    read_if_present(j, "lambda", w.lambda);
    read_if_present(j, "mu", w.mu);
    read_if_present(j, "eta", w.eta);
    return w;
}

Json to_json(const loss::LossReport& r)
{
    return Json{{"gan_d", r.gan_d}, {"gan_f", r.gan_f}, {"change", r.change}, {"decom", r.decom},
                {"recons", r.recons}, {"ortho", r.ortho}, {"mono", r.mono},     {"cn", r.cn},
                {"total_f", r.total_f}};
}

loss::LossReport loss_report_from_json(const Json& j)
{
    loss::LossReport r;
    r.gan_d = j.at("gan_d").get<double>();
    r.gan_f = j.at("gan_f").get<double>();
    r.change = j.at("change").get<double>();
    r.decom = j.at("decom").get<double>();
    r.recons = j.at("recons").get<double>();
    r.ortho = j.at("ortho").get<double>();
    r.mono = j.at("mono").get<double>();
    r.cn = j.at("cn").get<double>();
    r.total_f = j.at("total_f").get<double>();
    return r;
}

Json to_json(const TrainConfig& c)
{
    return Json{{"num_patterns", c.num_patterns},
                {"weights", to_json(c.weights)},
                {"lr_d", c.lr_d},
                {"lr_fg", c.lr_fg},
                {"clip_bound", c.clip_bound},
                {"batch_fraction", c.batch_fraction},
                {"batch_size", c.batch_size},
                {"min_iterations", c.min_iterations},
                {"max_iterations", c.max_iterations},
                {"recons_stop", c.recons_stop},
                {"mono_stop", c.mono_stop},
                {"stop_smoothing", c.stop_smoothing},
                {"seed", c.seed},
                {"log_interval", c.log_interval},
                {"per_feature_weights", c.per_feature_weights},
                {"architecture", Json{{"wide", c.arch.wide}, {"narrow", c.arch.narrow}, {"residual", c.arch.residual}}}};
}

TrainConfig train_config_from_json(const Json& j, TrainConfig c)
{
    reject_unknown_keys(j,
                        {"num_patterns", "weights", "lr_d", "lr_fg", "clip_bound", "batch_fraction", "batch_size",
                         "min_iterations", "max_iterations", "recons_stop", "mono_stop", "stop_smoothing", "seed",
                         "log_interval", "per_feature_weights", "architecture"},
                        "training");
    read_if_present(j, "num_patterns", c.num_patterns);
    if (j.contains("weights")) c.weights = loss_weights_from_json(j.at("weights"), c.weights);
    read_if_present(j, "lr_d", c.lr_d);
    read_if_present(j, "lr_fg", c.lr_fg);
    read_if_present(j, "clip_bound", c.clip_bound);
    read_if_present(j, "batch_fraction", c.batch_fraction);
    read_if_present(j, "batch_size", c.batch_size);
    read_if_present(j, "min_iterations", c.min_iterations);
    read_if_present(j, "max_iterations", c.max_iterations);
    read_if_present(j, "recons_stop", c.recons_stop);
    read_if_present(j, "mono_stop", c.mono_stop);
    read_if_present(j, "stop_smoothing", c.stop_smoothing);
    read_if_present(j, "seed", c.seed);
    read_if_present(j, "log_interval", c.log_interval);
    read_if_present(j, "per_feature_weights", c.per_feature_weights);
    if (j.contains("architecture")) {
        const Json& a = j.at("architecture");
        reject_unknown_keys(a, {"wide", "narrow", "residual"}, "training.architecture");
        read_if_present(a, "wide", c.arch.wide);
        read_if_present(a, "narrow", c.arch.narrow);
        read_if_present(a, "residual", c.arch.residual);
    }
    return c;
}

Json to_json(const nn::Params& params)
{
    Json layers = Json::array();
    for (const auto& layer : params) {
        Json rows = Json::array();
        for (Eigen::Index r = 0; r < layer.weights.rows(); ++r) {
            Json row = Json::array();
            for (Eigen::Index c = 0; c < layer.weights.cols(); ++c) row.push_back(layer.weights(r, c));
            rows.push_back(std::move(row));
        }
        Json entry{{"in", layer.in_size()},
                   {"out", layer.out_size()},
                   {"bias", layer.has_bias},
                   {"activation", std::string(nn::activation_name(layer.activation))},
                   {"weights", std::move(rows)}};
        if (layer.has_bias) {
            entry["bias_values"] = std::vector<double>(layer.bias.data(), layer.bias.data() + layer.bias.size());
        }
        layers.push_back(std::move(entry));
    }
    return layers;
}

nn::Params params_from_json(const Json& j, const std::string& name)
{
    if (!j.is_array()) {
        throw CheckpointError(CheckpointError::Kind::Malformed, "network '" + name + "' is not a layer list");
    }
    nn::Params params;
    for (std::size_t i = 0; i < j.size(); ++i) {
        const Json& e = j[i];
        const std::string where = name + " layer " + std::to_string(i);
        const auto in = e.at("in").get<Eigen::Index>();
        const auto out = e.at("out").get<Eigen::Index>();
        nn::DenseLayer layer;
        layer.has_bias = e.at("bias").get<bool>();
        layer.activation = nn::activation_from_name(e.at("activation").get<std::string>());
        const Json& rows = e.at("weights");
        if (in < 1 || out < 1 || !rows.is_array() || static_cast<Eigen::Index>(rows.size()) != out) {
            throw CheckpointError(CheckpointError::Kind::Shape, where + ": declared " + shape_string(out, in) +
                                                                    " but found " + std::to_string(rows.size()) +
                                                                    " weight rows");
        }
        layer.weights.resize(out, in);
        for (Eigen::Index r = 0; r < out; ++r) {
            const Json& row = rows[static_cast<std::size_t>(r)];
            if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != in) {
                throw CheckpointError(CheckpointError::Kind::Shape,
                                      where + ": weight row " + std::to_string(r) + " does not have " +
                                          std::to_string(in) + " entries");
            }
            for (Eigen::Index c = 0; c < in; ++c) layer.weights(r, c) = row[static_cast<std::size_t>(c)].get<double>();
        }
        if (layer.has_bias) {
            const auto values = e.at("bias_values").get<std::vector<double>>();
            if (static_cast<Eigen::Index>(values.size()) != out) {
                throw CheckpointError(CheckpointError::Kind::Shape, where + ": bias has " +
                                                                        std::to_string(values.size()) +
                                                                        " entries, expected " + std::to_string(out));
            }
            layer.bias = Eigen::Map<const Vector>(values.data(), out);
        } else if (e.contains("bias_values")) {
            throw CheckpointError(CheckpointError::Kind::Shape, where + ": bias values on a bias-free layer");
        }
        params.push_back(std::move(layer));
    }
    return params;
}

Json to_json(const Checkpoint& ck)
{
    return Json{{"format", kFormatTag},
                {"version", ck.format_version},
                {"num_patterns", ck.bundle.num_patterns},
                {"num_features", ck.bundle.num_features},
                {"architecture", Json{{"wide", ck.bundle.arch.wide},
                                      {"narrow", ck.bundle.arch.narrow},
                                      {"residual", ck.bundle.arch.residual}}},
                {"config", to_json(ck.config)},
                {"seed", ck.config.seed},
                {"iteration", ck.iteration},
                {"converged", ck.converged},
                {"final_loss", to_json(ck.final_loss)},
                {"smoothed", Json{{"recons", ck.smoothed_recons}, {"mono", ck.smoothed_mono}}},
                {"networks", Json{{"f", to_json(ck.bundle.f)},
                                  {"d", to_json(ck.bundle.d)},
                                  {"g1", to_json(ck.bundle.g1)},
                                  {"g2", to_json(ck.bundle.g2)}}}};
}

Checkpoint checkpoint_from_json(const Json& j)
{
    if (!j.is_object() || !j.contains("format") || j.at("format") != kFormatTag) {
        throw CheckpointError(CheckpointError::Kind::Malformed, "not a checkpoint document");
    }
    const int version = j.at("version").get<int>();
    if (version != kCheckpointVersion) {
        throw CheckpointError(CheckpointError::Kind::Version, "unsupported checkpoint version " +
                                                                  std::to_string(version) + " (expected " +
                                                                  std::to_string(kCheckpointVersion) + ")");
    }
    Checkpoint ck;
    try {
        ck.config = train_config_from_json(j.at("config"));
        ck.bundle.num_patterns = j.at("num_patterns").get<int>();
        ck.bundle.num_features = j.at("num_features").get<int>();
        ck.bundle.arch.wide = j.at("architecture").at("wide").get<int>();
        ck.bundle.arch.narrow = j.at("architecture").at("narrow").get<int>();
        ck.bundle.arch.residual = j.at("architecture").at("residual").get<bool>();
        ck.iteration = j.at("iteration").get<long long>();
        ck.converged = j.at("converged").get<bool>();
        ck.final_loss = loss_report_from_json(j.at("final_loss"));
        ck.smoothed_recons = j.at("smoothed").at("recons").get<double>();
        ck.smoothed_mono = j.at("smoothed").at("mono").get<double>();
        const Json& nets = j.at("networks");
        ck.bundle.f = params_from_json(nets.at("f"), "f");
        ck.bundle.d = params_from_json(nets.at("d"), "d");
        ck.bundle.g1 = params_from_json(nets.at("g1"), "g1");
        ck.bundle.g2 = params_from_json(nets.at("g2"), "g2");
    } catch (const CheckpointError&) {
        throw;
    } catch (const std::exception& e) {
        throw CheckpointError(CheckpointError::Kind::Malformed, std::string("malformed checkpoint: ") + e.what());
    }
    try {
        validate_bundle(ck.bundle);
    } catch (const ShapeError& e) {
        throw CheckpointError(CheckpointError::Kind::Shape, e.what());
    }
    return ck;
}

std::string checkpoint_to_string(const Checkpoint& checkpoint)
{
    return to_json(checkpoint).dump(1) + "\n";
}

Checkpoint checkpoint_from_string(const std::string& text)
{
    Json j;
    try {
        j = Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw CheckpointError(CheckpointError::Kind::Malformed, std::string("checkpoint parse error: ") + e.what());
    }
    return checkpoint_from_json(j);
}

void save_checkpoint(const Checkpoint& checkpoint, const std::string& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw CheckpointError(CheckpointError::Kind::Io, "cannot open '" + path + "' for writing");
    }
    out << checkpoint_to_string(checkpoint);
    if (!out) {
        throw CheckpointError(CheckpointError::Kind::Io, "write failed for '" + path + "'");
    }
}

Checkpoint load_checkpoint(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw CheckpointError(CheckpointError::Kind::Io, "cannot open '" + path + "'");
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return checkpoint_from_string(buffer.str());
}

}  // namespace surreal
