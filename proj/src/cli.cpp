#include "surreal/cli.hpp"

#include "surreal/cohort_io.hpp"
#include "surreal/inference.hpp"
#include "surreal/metrics.hpp"
#include "surreal/preprocess.hpp"
#include "surreal/synthdata.hpp"

#include "CLI11.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>

namespace surreal::cli {

namespace fs = std::filesystem;

namespace {

template <typename T>
void read_if_present(const Json& j, const char* key, T& target)
{
    if (j.contains(key)) target = j.at(key).get<T>();
}

std::string read_text(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io::IoError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const fs::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io::IoError("cannot open '" + path.string() + "' for writing");
    out << text;
    if (!out) throw io::IoError("write failed for '" + path.string() + "'");
}

fs::path ensure_dir(const std::string& dir)
{
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw io::IoError("cannot create directory '" + dir + "': " + ec.message());
    return fs::path(dir);
}

std::string lambda_tag(double lambda)
{
    std::ostringstream ss;
    ss << lambda;
    return ss.str();
}

std::string cell_name(int m, double lambda) { return "M" + std::to_string(m) + "_lambda" + lambda_tag(lambda); }

// A cohort file with reference stats fitted on its CN rows.
struct PreparedCohort {
    io::CohortTable table;
    synth::ReferenceStats stats;
    Matrix features;  // all rows, preprocessed
};

synth::ReferenceStats fit_reference_stats(const io::CohortTable& table)
{
    synth::ReferenceStats stats;
    if (table.covariates.cols() > 0) {
        stats.residualizer =
            synth::fit_residualizer(table.features, table.covariates, table.is_cn, table.covariate_names);
    }
    stats.standardizer =
        synth::fit_standardizer(stats.residualizer.apply(table.features, table.covariates), table.is_cn);
    return stats;
}

PreparedCohort prepare_cohort(const std::string& path)
{
    PreparedCohort p;
    p.table = io::read_cohort_csv(path);
    p.stats = fit_reference_stats(p.table);
    p.features = p.stats.apply(p.table.features, p.table.covariates);
    return p;
}

Matrix select_rows(const Matrix& m, const std::vector<bool>& mask, bool want)
{
    Eigen::Index n = 0;
    for (bool b : mask) n += (b == want) ? 1 : 0;
    Matrix out(n, m.cols());
    Eigen::Index r = 0;
    for (std::size_t i = 0; i < mask.size(); ++i) {
        if (mask[i] == want) out.row(r++) = m.row(static_cast<Eigen::Index>(i));
    }
    return out;
}

Dataset dataset_of(const PreparedCohort& p)
{
    Dataset d{select_rows(p.features, p.table.is_cn, true), select_rows(p.features, p.table.is_cn, false)};
    if (d.cn.rows() == 0 || d.pt.rows() == 0) {
        throw io::DataError("cohort needs both CN and PT rows");
    }
    return d;
}

std::string require_path(const std::string& value, const char* flag)
{
    if (value.empty()) throw ArgumentError(std::string("missing ") + flag);
    return value;
}

// Stats given explicitly, else reference_stats.txt beside the checkpoint.
std::optional<synth::ReferenceStats> locate_stats(const std::string& explicit_path, const std::string& checkpoint)
{
    std::string path = explicit_path;
    if (path.empty()) {
        const fs::path beside = fs::path(checkpoint).parent_path() / "reference_stats.txt";
        if (!fs::exists(beside)) return std::nullopt;
        path = beside.string();
    }
    return synth::reference_stats_from_string(read_text(path));
}

// PT rows of the cohort mapped through the checkpoint; raw rows go through
// the persisted stats when available, otherwise they are used as given.
inference::RIndexMatrix infer_cohort(const Checkpoint& ck, const std::string& checkpoint_path,
                                     const io::CohortTable& table, const std::string& stats_path)
{
    const Matrix pt_raw = table.pt_rows();
    const Matrix pt_cov = select_rows(table.covariates, table.is_cn, false);
    const auto stats = locate_stats(stats_path, checkpoint_path);
    if (stats) return inference::infer_raw(ck, pt_raw, pt_cov, &*stats, table.pt_ids(), checkpoint_path);
    return inference::infer(ck, pt_raw, table.pt_ids(), checkpoint_path);
}

Matrix cn_features(const io::CohortTable& table, const std::optional<synth::ReferenceStats>& stats)
{
    const Matrix cn = table.cn_rows();
    if (!stats) return cn;
    return stats->apply(cn, select_rows(table.covariates, table.is_cn, true));
}

Json slack_json(const metrics::SlackSummary& s)
{
    return Json{{"k2", s.k2},
                {"min_slack", s.min_slack},
                {"mean_slack", s.mean_slack},
                {"samples", s.samples},
                {"violations", s.violations}};
}

Json mono_json(const metrics::MonotonicitySummary& s)
{
    return Json{{"mean_loss", s.mean_loss},
                {"violation_fraction", s.violation_fraction},
                {"max_violation", s.max_violation},
                {"samples", s.samples}};
}

TrainingCallbacks logging_callbacks(std::vector<std::string>& log, std::ostream* echo)
{
    TrainingCallbacks cb;
    cb.on_log = [&log, echo](long long it, const loss::LossReport& r, const ModelBundle&) {
        log.push_back(loss::format_report(it, r));
        if (echo) *echo << log.back() << '\n';
    };
    return cb;
}

// ---- commands ----

int cmd_generate(const RunConfig& c, std::ostream& out)
{
    const synth::Variant variant = synth::variant_from_name(c.variant);
    const synth::SyntheticCohort cohort = synth::make_cohort(variant, c.n_cn, c.n_pt, c.num_features, c.seed);
    const fs::path dir = ensure_dir(c.output_dir);
    io::write_cohort_csv((dir / "cohort.csv").string(), io::cohort_table(cohort));
    io::write_truth_csv((dir / "truth.csv").string(), io::truth_table(cohort));

    const synth::PatternSpec& s = cohort.spec;
    Json manifest{{"command", "generate"},
                  {"variant", std::string(synth::variant_name(variant))},
                  {"seed", c.seed},
                  {"n_cn", c.n_cn},
                  {"n_pt", c.n_pt},
                  {"num_features", s.num_features},
                  {"clamped_volumes", cohort.clamped},
                  {"pattern_spec",
                   {{"pattern_size", s.pattern_size},
                    {"overlap", s.overlap},
                    {"atrophy", s.atrophy},
                    {"noise", s.noise},
                    {"patterns", s.patterns}}},
                  {"files", {{"cohort", "cohort.csv"}, {"truth", "truth.csv"}}}};
    write_text(dir / "manifest.json", manifest.dump(2) + "\n");
    out << "generated " << c.n_cn << " CN + " << c.n_pt << " PT rows (" << synth::variant_name(variant) << ", seed "
        << c.seed << ") in " << dir.string() << '\n';
    return kExitOk;
}

int cmd_preprocess(const RunConfig& c, std::ostream& out)
{
    const PreparedCohort p = prepare_cohort(require_path(c.cohort, "--cohort"));
    io::CohortTable standardized = p.table;
    standardized.covariate_names.clear();
    standardized.covariates = Matrix(p.table.rows(), 0);
    standardized.features = p.features;
    const fs::path dir = ensure_dir(c.output_dir);
    io::write_cohort_csv((dir / "preprocessed.csv").string(), standardized);
    write_text(dir / "reference_stats.txt", synth::reference_stats_to_string(p.stats));
    out << "preprocessed " << p.table.rows() << " rows (" << p.table.covariates.cols() << " covariates) into "
        << dir.string() << '\n';
    return kExitOk;
}

int cmd_train(const RunConfig& c, std::ostream& out)
{
    const PreparedCohort p = prepare_cohort(require_path(c.cohort, "--cohort"));
    const Dataset data = dataset_of(p);
    TrainConfig tc = c.train;
    tc.seed = c.seed;
    std::vector<std::string> log;
    const Checkpoint ck = train(data, tc, logging_callbacks(log, &out));

    const fs::path dir = ensure_dir(c.output_dir);
    save_checkpoint(ck, (dir / "checkpoint.json").string());
    write_text(dir / "reference_stats.txt", synth::reference_stats_to_string(p.stats));
    std::string joined;
    for (const auto& line : log) joined += line + "\n";
    write_text(dir / "train_log.txt", joined);
    Json manifest{{"command", "train"}, {"config", to_json(c)}, {"iterations", ck.iteration},
                  {"converged", ck.converged}};
    write_text(dir / "manifest.json", manifest.dump(2) + "\n");
    out << "trained " << ck.iteration << " iterations, converged=" << (ck.converged ? "yes" : "no")
        << ", smoothed recons=" << ck.smoothed_recons << " mono=" << ck.smoothed_mono << '\n';
    return kExitOk;
}

int cmd_sweep(const RunConfig& c, std::ostream& out, std::ostream& err)
{
    const PreparedCohort p = prepare_cohort(require_path(c.cohort, "--cohort"));
    const Dataset data = dataset_of(p);
    const fs::path dir = ensure_dir(c.output_dir);
    write_text(dir / "reference_stats.txt", synth::reference_stats_to_string(p.stats));

    struct CellRun {
        int m;
        double lambda;
        std::vector<Checkpoint> replicas;
        std::string error;
    };
    std::vector<CellRun> runs;
    std::vector<metrics::GridCell> grid;
    std::vector<std::size_t> grid_to_run;
    for (int m : c.pattern_grid) {
        for (double lambda : c.lambda_grid) {
            CellRun run{m, lambda, {}, {}};
            TrainConfig tc = c.train;
            tc.num_patterns = m;
            tc.weights.lambda = lambda;
            try {
                run.replicas = train_replicas(data, tc, c.replicas, c.seed, c.workers);
                const fs::path cell_dir = ensure_dir((dir / cell_name(m, lambda)).string());
                metrics::GridCell cell{m, lambda, {}};
                for (std::size_t i = 0; i < run.replicas.size(); ++i) {
                    save_checkpoint(run.replicas[i], (cell_dir / ("replica_" + std::to_string(i) + ".json")).string());
                    cell.replica_indices.push_back(reconstruct_indices(run.replicas[i].bundle, data.pt));
                }
                grid.push_back(std::move(cell));
                grid_to_run.push_back(runs.size());
                out << "cell " << cell_name(m, lambda) << ": " << run.replicas.size() << " replicas trained\n";
            } catch (const std::exception& e) {
                run.error = e.what();
                err << "cell " << cell_name(m, lambda) << " failed: " << e.what() << '\n';
            }
            runs.push_back(std::move(run));
        }
    }
    if (grid.empty()) {
        err << "every sweep cell failed\n";
        return kExitConvergence;
    }

    const metrics::Selection sel = metrics::select_hyper(grid);
    std::ostringstream summary;
    summary << "num_patterns,lambda,status,mean_agreement\n";
    std::size_t g = 0;
    for (std::size_t r = 0; r < runs.size(); ++r) {
        summary << runs[r].m << ',' << lambda_tag(runs[r].lambda) << ',';
        if (g < grid_to_run.size() && grid_to_run[g] == r) {
            const metrics::AgreementTable& t = sel.tables[g];
            summary << "ok," << io::format_value(t.mean_pairwise) << '\n';
            std::vector<std::string> header{"replica"}, ids;
            for (Eigen::Index k = 0; k < t.pairwise.cols(); ++k) {
                header.push_back("replica_" + std::to_string(k));
                ids.push_back("replica_" + std::to_string(k));
            }
            io::write_matrix_csv((dir / ("agreement_" + cell_name(runs[r].m, runs[r].lambda) + ".csv")).string(),
                                 header, ids, t.pairwise);
            ++g;
        } else {
            std::string reason = runs[r].error;
            for (char& ch : reason) {
                if (ch == ',' || ch == '\n') ch = ';';
            }
            summary << "failed: " << reason << ",\n";
        }
    }
    write_text(dir / "sweep_summary.csv", summary.str());

    const CellRun& chosen = runs[grid_to_run[sel.cell]];
    const std::string chosen_rel = cell_name(chosen.m, chosen.lambda) + "/replica_" + std::to_string(sel.replica) + ".json";
    save_checkpoint(chosen.replicas[sel.replica], (dir / "selected_checkpoint.json").string());
    Json selection{{"num_patterns", sel.num_patterns},
                   {"lambda", sel.lambda},
                   {"replica", sel.replica},
                   {"checkpoint", chosen_rel},
                   {"mean_agreement", sel.tables[sel.cell].mean_pairwise},
                   {"config", to_json(c)}};
    write_text(dir / "selection.json", selection.dump(2) + "\n");
    out << "selected M=" << sel.num_patterns << " lambda=" << lambda_tag(sel.lambda) << " replica " << sel.replica
        << '\n';
    return kExitOk;
}

int cmd_infer(const RunConfig& c, const std::vector<std::string>& checkpoints, std::ostream& out)
{
    if (checkpoints.size() != 1) throw ArgumentError("infer takes exactly one --checkpoint");
    const Checkpoint ck = load_checkpoint(checkpoints[0]);
    const io::CohortTable table = io::read_cohort_csv(require_path(c.cohort, "--cohort"));
    const inference::RIndexMatrix r = infer_cohort(ck, checkpoints[0], table, c.stats);
    const fs::path dir = ensure_dir(c.output_dir);
    inference::write_rindex_csv((dir / "rindex.csv").string(), r);
    out << "wrote R-indices for " << r.values.rows() << " subjects to " << (dir / "rindex.csv").string() << '\n';
    return kExitOk;
}

int cmd_evaluate(const RunConfig& c, const std::vector<std::string>& checkpoints, std::ostream& out)
{
    if (checkpoints.empty()) throw ArgumentError("missing --checkpoint");
    const io::CohortTable table = io::read_cohort_csv(require_path(c.cohort, "--cohort"));
    std::vector<Matrix> indices;
    for (const auto& path : checkpoints) {
        indices.push_back(infer_cohort(load_checkpoint(path), path, table, c.stats).values);
    }
    std::optional<Matrix> truth;
    if (!c.truth.empty()) truth = io::align_truth(io::read_truth_csv(c.truth), table.pt_ids());

    Json report = evaluation_report(indices, truth ? &*truth : nullptr);
    const Checkpoint first = load_checkpoint(checkpoints[0]);
    const Matrix cn = cn_features(table, locate_stats(c.stats, checkpoints[0]));
    report["lemma1"] = slack_json(metrics::lemma1_diagnostic(first.bundle, cn, c.diagnostic_samples, c.seed));
    report["checkpoints"] = checkpoints;

    const fs::path dir = ensure_dir(c.output_dir);
    write_text(dir / "evaluation.json", report.dump(2) + "\n");
    out << report.dump(2) << '\n';
    return kExitOk;
}

int cmd_diagnose(const RunConfig& c, const std::vector<std::string>& checkpoints, std::ostream& out)
{
    if (checkpoints.size() != 1) throw ArgumentError("diagnose takes exactly one --checkpoint");
    const Checkpoint ck = load_checkpoint(checkpoints[0]);
    const io::CohortTable table = io::read_cohort_csv(require_path(c.cohort, "--cohort"));
    const Matrix cn = cn_features(table, locate_stats(c.stats, checkpoints[0]));
    Json report{
        {"checkpoint", checkpoints[0]},
        {"iteration", ck.iteration},
        {"converged", ck.converged},
        {"smoothed", {{"recons", ck.smoothed_recons}, {"mono", ck.smoothed_mono}}},
        {"max_abs_weight",
         {{"f", nn::max_abs_weight(ck.bundle.f)},
          {"g1", nn::max_abs_weight(ck.bundle.g1)},
          {"g2", nn::max_abs_weight(ck.bundle.g2)},
          {"d", nn::max_abs_weight(ck.bundle.d)}}},
        {"lemma1", slack_json(metrics::lemma1_diagnostic(ck.bundle, cn, c.diagnostic_samples, c.seed))},
        {"monotonicity", mono_json(metrics::monotonicity_diagnostic(ck.bundle, cn, c.diagnostic_samples, c.seed))}};
    const fs::path dir = ensure_dir(c.output_dir);
    write_text(dir / "diagnostics.json", report.dump(2) + "\n");
    out << report.dump(2) << '\n';
    return kExitOk;
}

}  // namespace

Json to_json(const RunConfig& c)
{
    return Json{{"seed", c.seed},
                {"output_dir", c.output_dir},
                {"data", {{"cohort", c.cohort}, {"truth", c.truth}, {"stats", c.stats}}},
                {"synth", {{"variant", c.variant}, {"n_cn", c.n_cn}, {"n_pt", c.n_pt}, {"num_features", c.num_features}}},
                {"sweep",
                 {{"replicas", c.replicas},
                  {"workers", c.workers},
                  {"lambda_grid", c.lambda_grid},
                  {"pattern_grid", c.pattern_grid}}},
                {"diagnostics", {{"samples", c.diagnostic_samples}}},
                {"training", surreal::to_json(c.train)}};
}

RunConfig run_config_from_json(const Json& j, RunConfig c)
{
    reject_unknown_keys(j, {"seed", "output_dir", "data", "synth", "sweep", "diagnostics", "training"}, "config");
    try {
        read_if_present(j, "seed", c.seed);
        read_if_present(j, "output_dir", c.output_dir);
        if (j.contains("data")) {
            const Json& d = j.at("data");
            reject_unknown_keys(d, {"cohort", "truth", "stats"}, "config.data");
            read_if_present(d, "cohort", c.cohort);
            read_if_present(d, "truth", c.truth);
            read_if_present(d, "stats", c.stats);
        }
        if (j.contains("synth")) {
            const Json& s = j.at("synth");
            reject_unknown_keys(s, {"variant", "n_cn", "n_pt", "num_features"}, "config.synth");
            read_if_present(s, "variant", c.variant);
            read_if_present(s, "n_cn", c.n_cn);
            read_if_present(s, "n_pt", c.n_pt);
            read_if_present(s, "num_features", c.num_features);
        }
        if (j.contains("sweep")) {
            const Json& s = j.at("sweep");
            reject_unknown_keys(s, {"replicas", "workers", "lambda_grid", "pattern_grid"}, "config.sweep");
            read_if_present(s, "replicas", c.replicas);
            read_if_present(s, "workers", c.workers);
            read_if_present(s, "lambda_grid", c.lambda_grid);
            read_if_present(s, "pattern_grid", c.pattern_grid);
        }
        if (j.contains("diagnostics")) {
            const Json& d = j.at("diagnostics");
            reject_unknown_keys(d, {"samples"}, "config.diagnostics");
            read_if_present(d, "samples", c.diagnostic_samples);
        }
    } catch (const Json::type_error& e) {
        throw ArgumentError(std::string("config: ") + e.what());
    }
    if (j.contains("training")) c.train = train_config_from_json(j.at("training"), c.train);
    return c;
}

RunConfig load_run_config(const std::string& path)
{
    const std::string text = read_text(path);
    Json j;
    try {
        j = Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw ArgumentError(path + ": " + e.what());
    }
    return run_config_from_json(j);
}

void validate(const RunConfig& c)
{
    if (c.replicas < 1) throw ArgumentError("replicas must be at least 1");
    if (c.workers < 1) throw ArgumentError("workers must be at least 1");
    if (c.lambda_grid.empty()) throw ArgumentError("lambda_grid is empty");
    if (c.pattern_grid.empty()) throw ArgumentError("pattern_grid is empty");
    for (int m : c.pattern_grid) {
        if (m < 1 || m > kMaxPatterns) throw ArgumentError("pattern_grid entry out of range: " + std::to_string(m));
    }
    for (double l : c.lambda_grid) {
        if (!(l >= 0.0) || !std::isfinite(l)) throw ArgumentError("lambda_grid entry must be finite and >= 0");
    }
    if (c.diagnostic_samples == 0) throw ArgumentError("diagnostics.samples must be positive");
    if (c.n_cn < 1 || c.n_pt < 1) throw ArgumentError("synth sizes must be positive");
    surreal::validate(c.train);
}

Json evaluation_report(const std::vector<Matrix>& r_indices, const Matrix* truth)
{
    if (r_indices.empty()) throw ArgumentError("evaluation needs at least one R-index matrix");
    Json report;
    report["subjects"] = r_indices[0].rows();
    report["num_patterns"] = r_indices[0].cols();
    if (truth != nullptr) {
        const metrics::AlignmentResult a = metrics::pattern_c_index(r_indices[0], *truth);
        report["mode"] = "truth";
        report["pattern_c_index"] = a.mean;
        report["per_dimension"] = a.per_dimension;
        report["permutation"] = a.permutation;
    } else {
        report["mode"] = "agreement-only";
    }
    if (r_indices.size() >= 2) {
        const metrics::AgreementTable t = metrics::agreement_table(r_indices);
        report["agreement"] = {{"mean_pairwise", t.mean_pairwise}, {"per_replica", t.per_replica}};
    }
    return report;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Semi-supervised representation learning of disease patterns"};
    app.name("surreal");
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir, variant, cohort, truth, stats;
    std::optional<int> replicas, workers, num_patterns;
    std::optional<double> lambda;
    std::vector<std::string> checkpoints;

    auto common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "JSON run config");
        sub->add_option("--seed", seed, "Random seed");
        sub->add_option("--out", out_dir, "Output directory");
    };
    auto with_data = [&](CLI::App* sub) { sub->add_option("--cohort", cohort, "Cohort CSV"); };
    auto with_training = [&](CLI::App* sub) {
        sub->add_option("--lambda", lambda, "Orthogonality weight");
        sub->add_option("--num-patterns", num_patterns, "Number of patterns M");
    };

    CLI::App* gen = app.add_subcommand("generate", "Write a synthetic cohort, truth and manifest");
    common(gen);
    gen->add_option("--variant", variant, "basic | large_overlap | scarce | noisy | mild");

    CLI::App* pre = app.add_subcommand("preprocess", "Residualize and standardize a cohort against its CN rows");
    common(pre);
    with_data(pre);

    CLI::App* trn = app.add_subcommand("train", "Train one model");
    common(trn);
    with_data(trn);
    with_training(trn);

    CLI::App* swp = app.add_subcommand("sweep", "Train replicas over the (M, lambda) grid and select a model");
    common(swp);
    with_data(swp);
    with_training(swp);
    swp->add_option("--replicas", replicas, "Replicas per grid cell");
    swp->add_option("--workers", workers, "Concurrent replica trainings");

    CLI::App* inf = app.add_subcommand("infer", "Write R-indices of the PT rows");
    common(inf);
    with_data(inf);
    inf->add_option("--checkpoint", checkpoints, "Checkpoint file")->required();
    inf->add_option("--stats", stats, "Reference stats (default: beside the checkpoint)");

    CLI::App* evl = app.add_subcommand("evaluate", "Pattern-c-index, agreement and slack report");
    common(evl);
    with_data(evl);
    evl->add_option("--checkpoint", checkpoints, "Checkpoint file; repeat for agreement")->required();
    evl->add_option("--truth", truth, "Planted severities CSV");
    evl->add_option("--stats", stats, "Reference stats (default: beside the checkpoint)");

    CLI::App* dia = app.add_subcommand("diagnose", "Lemma 1 slack, monotonicity and clipping diagnostics");
    common(dia);
    with_data(dia);
    dia->add_option("--checkpoint", checkpoints, "Checkpoint file")->required();
    dia->add_option("--stats", stats, "Reference stats (default: beside the checkpoint)");

    std::vector<std::string> argv_store{"surreal"};
    argv_store.insert(argv_store.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (auto& a : argv_store) argv.push_back(a.data());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitArgument;
    }

    try {
        RunConfig c = config_path.empty() ? RunConfig{} : load_run_config(config_path);
        if (seed) c.seed = *seed;
        if (out_dir) c.output_dir = *out_dir;
        if (variant) c.variant = *variant;
        if (cohort) c.cohort = *cohort;
        if (truth) c.truth = *truth;
        if (stats) c.stats = *stats;
        if (replicas) c.replicas = *replicas;
        if (workers) c.workers = *workers;
        if (num_patterns) {
            c.train.num_patterns = *num_patterns;
            c.pattern_grid = {*num_patterns};
        }
        if (lambda) {
            c.train.weights.lambda = *lambda;
            c.lambda_grid = {*lambda};
        }
        validate(c);

        if (gen->parsed()) return cmd_generate(c, out);
        if (pre->parsed()) return cmd_preprocess(c, out);
        if (trn->parsed()) return cmd_train(c, out);
        if (swp->parsed()) return cmd_sweep(c, out, err);
        if (inf->parsed()) return cmd_infer(c, checkpoints, out);
        if (evl->parsed()) return cmd_evaluate(c, checkpoints, out);
        if (dia->parsed()) return cmd_diagnose(c, checkpoints, out);
        return kExitArgument;
    } catch (const io::IoError& e) {
        err << "error: " << e.what() << '\n';
        return kExitIo;
    } catch (const io::DataError& e) {
        err << "error: " << e.what() << '\n';
        return kExitData;
    } catch (const CheckpointError& e) {
        err << "error: " << e.what() << '\n';
        return e.kind() == CheckpointError::Kind::Io ? kExitIo : kExitData;
    } catch (const TrainingDiverged& e) {
        err << "error: " << e.what() << '\n';
        return kExitConvergence;
    } catch (const ReplicaError& e) {
        err << "error: " << e.what() << '\n';
        return kExitConvergence;
    } catch (const metrics::UndefinedMetric& e) {
        err << "error: " << e.what() << '\n';
        return kExitData;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << '\n';
        return kExitArgument;
    } catch (const Json::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitData;
    }
}

}  // namespace surreal::cli
