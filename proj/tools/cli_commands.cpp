#include "cli_commands.hpp"

#include "gnrd/assignment.hpp"
#include "gnrd/checkpoint.hpp"
#include "gnrd/error.hpp"
#include "gnrd/metrics.hpp"

#include <fmt/format.h>
#include <fmt/ostream.h>

#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

namespace gnrd::cli {

using nlohmann::json;

namespace {

template <typename T>
T field(const json& j, const std::string& key, const std::string& where, T fallback) {
    if (!j.contains(key) || j.at(key).is_null()) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError("config field '" + where + key + "' has the wrong type");
    }
}

template <typename T>
T required(const json& j, const std::string& key, const std::string& where) {
    if (!j.contains(key) || j.at(key).is_null()) throw ConfigError("config field '" + where + key + "' is required");
    return field<T>(j, key, where, T{});
}

const json& section(const json& j, const std::string& key) {
    static const json empty = json::object();
    if (!j.contains(key)) return empty;
    if (!j.at(key).is_object()) throw ConfigError("config field '" + key + "' must be an object");
    return j.at(key);
}

int guarded(std::ostream& err, const std::function<int()>& body) {
    try {
        return body();
    } catch (const ConfigError& e) {
        fmt::print(err, "error: {}\n", e.what());
        return kExitConfig;
    } catch (const DataError& e) {
        fmt::print(err, "data error: {}\n", e.what());
        return kExitData;
    } catch (const NumericError& e) {
        fmt::print(err, "numeric error: {}\n", e.what());
        return kExitNumeric;
    } catch (const json::exception& e) {
        fmt::print(err, "error: malformed config: {}\n", e.what());
        return kExitConfig;
    } catch (const std::filesystem::filesystem_error& e) {
        fmt::print(err, "data error: {}\n", e.what());
        return kExitData;
    }
}

DiscriminatorSpec parse_discriminator(const json& j, const std::string& where) {
    DiscriminatorSpec s;
    s.kind = parse_discriminator_kind(required<std::string>(j, "kind", where));
    s.output_dim = field<Index>(j, "output_dim", where, s.kind == DiscriminatorKind::identity ? 0 : 32);
    s.hidden_dims = field<std::vector<Index>>(j, "hidden", where, {});
    if (s.kind == DiscriminatorKind::random_mlp && !j.contains("hidden")) s.hidden_dims = {64};
    s.leaky_slope = field<double>(j, "leaky_slope", where, 0.2);
    if (j.contains("weight_std") && !j.at("weight_std").is_null()) s.weight_std = field<double>(j, "weight_std", where, 0.0);
    return s;
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + path.string());
    return out;
}

void write_points_csv(const Matrix& points, const std::filesystem::path& path) {
    auto out = open_out(path);
    for (Index r = 0; r < points.rows(); ++r) fmt::print(out, "{}x{}", r == 0 ? "" : ",", r);
    out << '\n';
    for (Index i = 0; i < points.cols(); ++i) {
        for (Index r = 0; r < points.rows(); ++r) fmt::print(out, "{}{}", r == 0 ? "" : ",", points(r, i));
        out << '\n';
    }
}

// Tile `images` into the smallest near-square grid, padding with black tiles.
void write_grid(const Matrix& images, Index height, Index width, const std::filesystem::path& path) {
    const Index count = images.cols();
    const auto cols = static_cast<Index>(std::ceil(std::sqrt(static_cast<double>(count))));
    const Index rows = (count + cols - 1) / cols;
    Matrix tiles = Matrix::Zero(images.rows(), rows * cols);
    tiles.leftCols(count) = images;
    export_image_grid(tiles, rows, cols, height, width, path);
}

}  // namespace

void apply_overrides(json& config, const std::vector<std::string>& overrides) {
    for (const auto& item : overrides) {
        const auto eq = item.find('=');
        if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + item + "' must look like key.path=value");
        std::string pointer = "/" + item.substr(0, eq);
        for (auto& ch : pointer) {
            if (ch == '.') ch = '/';
        }
        const std::string raw = item.substr(eq + 1);
        json value;
        try {
            value = json::parse(raw);
        } catch (const json::exception&) {
            value = raw;
        }
        config[json::json_pointer(pointer)] = value;
    }
}

json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path.string());
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError("config file " + path.string() + " is not valid JSON: " + e.what());
    }
}

JobSeeds job_seeds(std::uint64_t seed) {
    return {derive_seed(seed, "data"), derive_seed(seed, "heldout")};
}

TrainJob parse_train_job(const json& config) {
    if (!config.is_object()) throw ConfigError("config must be a JSON object");
    TrainJob job;
    job.train.seed = field<std::uint64_t>(config, "seed", "", 0);
    job.output_dir = required<std::string>(config, "output_dir", "");
    if (config.contains("resume") && !config.at("resume").is_null()) job.resume = required<std::string>(config, "resume", "");

    const json& ds = section(config, "dataset");
    if (ds.empty()) throw ConfigError("config field 'dataset' is required");
    job.dataset.kind = required<std::string>(ds, "kind", "dataset.");
    if (job.dataset.kind == "idx") {
        job.dataset.path = required<std::string>(ds, "path", "dataset.");
    } else if (job.dataset.kind == "ring") {
        job.dataset.mixture = ring_mixture(field<Index>(ds, "components", "dataset.", 8),
                                           field<double>(ds, "radius", "dataset.", 2.0),
                                           field<double>(ds, "std", "dataset.", 0.05));
        job.dataset.count = field<Index>(ds, "count", "dataset.", 20000);
    } else if (job.dataset.kind == "mixture") {
        for (const auto& m : required<std::vector<std::vector<double>>>(ds, "means", "dataset.")) {
            if (m.size() != 2) throw ConfigError("config field 'dataset.means' entries must be 2D points");
            job.dataset.mixture.means.emplace_back(m[0], m[1]);
        }
        job.dataset.mixture.stddev = required<double>(ds, "std", "dataset.");
        job.dataset.mixture.weights = field<std::vector<double>>(ds, "weights", "dataset.", {});
        job.dataset.count = field<Index>(ds, "count", "dataset.", 20000);
    } else {
        throw ConfigError("config field 'dataset.kind' must be idx, ring, or mixture");
    }
    if (job.dataset.kind != "idx") {
        job.dataset.mixture.validate();
        if (job.dataset.count < 1) throw ConfigError("config field 'dataset.count' must be positive");
    }

    const json& gen = section(config, "generator");
    job.noise_dim = field<Index>(gen, "noise_dim", "generator.", 100);
    job.hidden = field<std::vector<Index>>(gen, "hidden", "generator.", {256, 256});
    const std::string default_output = job.dataset.kind == "idx" ? "sigmoid" : "identity";
    job.train.output = parse_output_activation(field<std::string>(gen, "output", "generator.", default_output));

    const json& tr = section(config, "train");
    auto& t = job.train;
    t.batch_size = field<Index>(tr, "batch_size", "train.", 100);
    t.max_iters = field<std::int64_t>(tr, "max_iters", "train.", 0);
    t.lr = field<double>(tr, "lr", "train.", 0.001);
    t.beta1 = field<double>(tr, "beta1", "train.", 0.5);
    t.beta2 = field<double>(tr, "beta2", "train.", 0.9);
    t.eps = field<double>(tr, "eps", "train.", 1e-8);
    t.assignment = parse_assign_method(field<std::string>(tr, "assignment", "train.", "hungarian"));
    t.schedule = parse_schedule(field<std::string>(tr, "schedule", "train.", "weighted"));
    t.eval_every = field<std::int64_t>(tr, "eval_every", "train.", 0);
    t.eval_count = field<Index>(tr, "eval_count", "train.", 512);
    t.checkpoint_every = field<std::int64_t>(tr, "checkpoint_every", "train.", 0);
    t.discriminators.clear();
    if (tr.contains("discriminators")) {
        const json& list = tr.at("discriminators");
        if (!list.is_array() || list.empty()) throw ConfigError("config field 'train.discriminators' must be a nonempty array");
        for (std::size_t k = 0; k < list.size(); ++k) {
            const std::string where = "train.discriminators[" + std::to_string(k) + "].";
            t.discriminators.push_back({parse_discriminator(list[k], where), field<double>(list[k], "weight", where, 1.0)});
        }
    } else {
        t.discriminators.push_back(WeightedDiscriminator{});
    }

    const json& grid = section(config, "grid");
    job.grid_rows = field<Index>(grid, "rows", "grid.", 8);
    job.grid_cols = field<Index>(grid, "cols", "grid.", 8);
    return job;
}

PreparedData prepare_data(TrainJob& job) {
    PreparedData out;
    const Index k = job.train.eval_count;
    if (job.dataset.kind == "idx") {
        Dataset all = load_idx_images(job.dataset.path);
        if (all.count() <= k) {
            throw DataError("dataset " + job.dataset.path.string() + " has " + std::to_string(all.count()) +
                            " images, need more than eval_count = " + std::to_string(k));
        }
        out.held_out = all.samples.rightCols(k);
        out.train = all;
        out.train.samples = all.samples.leftCols(all.count() - k);
    } else {
        const auto seeds = job_seeds(job.train.seed);
        Rng data_rng(seeds.data), held_rng(seeds.heldout);
        out.train = synth_gaussian_mixture(job.dataset.mixture, job.dataset.count, data_rng);
        out.held_out = synth_gaussian_mixture(job.dataset.mixture, k, held_rng).samples;
    }

    job.train.generator_dims = {job.noise_dim};
    job.train.generator_dims.insert(job.train.generator_dims.end(), job.hidden.begin(), job.hidden.end());
    job.train.generator_dims.push_back(out.train.dim());
    bind_data_dim(job.train, out.train.dim());
    job.train.validate();
    return out;
}

TrainOutcome run_train_job(TrainJob job) {
    PreparedData data = prepare_data(job);
    const TrainConfig& cfg = job.train;

    TrainState state;
    if (job.resume) {
        Checkpoint ckpt = load_checkpoint(*job.resume);
        if (ckpt.state.generator.layer_dims != cfg.generator_dims) {
            throw ConfigError("resume checkpoint architecture does not match the config");
        }
        if (ckpt.seed != cfg.seed) throw ConfigError("resume checkpoint was trained with a different seed");
        state = std::move(ckpt.state);
    } else {
        state = init_train_state(cfg);
    }

    std::filesystem::create_directories(job.output_dir);
    auto history_csv = open_out(job.output_dir / "history.csv");
    auto eval_csv = open_out(job.output_dir / "eval.csv");
    auto timing_csv = open_out(job.output_dir / "timing.csv");
    history_csv << "iter,loss,method\n";
    eval_csv << "iter,eval_ot_identity,eval_ot_random_feature\n";
    timing_csv << "iter,wall_ms\n";

    const bool is_image = data.train.kind == DatasetKind::image;
    auto checkpoint_of = [&](const TrainState& s) {
        return Checkpoint{s, cfg.seed, is_image ? data.train.image_rows : 0, is_image ? data.train.image_cols : 0};
    };

    TrainCallbacks cb;
    cb.on_step = [&](const StepRecord& r) {
        fmt::print(history_csv, "{},{},{}\n", r.iter, r.loss, to_string(r.method));
        fmt::print(timing_csv, "{},{:.3f}\n", r.iter, r.wall_ms);
        if (!std::isfinite(r.loss)) throw NumericError("loss became non-finite at iteration " + std::to_string(r.iter));
    };
    cb.on_eval = [&](const EvalRecord& r) {
        fmt::print(eval_csv, "{},{},{}\n", r.iter, r.ot_identity, r.ot_random_feature);
        eval_csv.flush();
    };
    cb.on_checkpoint = [&](const TrainState& s) {
        save_checkpoint(checkpoint_of(s), job.output_dir / fmt::format("checkpoint_{}.ckpt", s.step));
    };

    TrainOutcome outcome;
    outcome.history = train(cfg, data.train, state, &data.held_out, cb);
    save_checkpoint(checkpoint_of(state), job.output_dir / "final.ckpt");

    Rng sample_rng(derive_seed(cfg.seed, "samples"));
    if (is_image) {
        const Matrix z = sample_noise(cfg.generator_dims.front(), job.grid_rows * job.grid_cols, sample_rng);
        export_image_grid(gen_forward(state.generator, z), job.grid_rows, job.grid_cols, data.train.image_rows,
                          data.train.image_cols, job.output_dir / "samples.pgm");
    } else {
        write_points_csv(gen_forward(state.generator, eval_noise(cfg)), job.output_dir / "samples.csv");
    }
    outcome.state = std::move(state);
    return outcome;
}

Lemma1Job parse_lemma1_job(const json& config) {
    if (!config.is_object()) throw ConfigError("config must be a JSON object");
    Lemma1Job job;
    auto to_vector = [](const std::vector<double>& v) {
        Vector out(static_cast<Index>(v.size()));
        for (std::size_t i = 0; i < v.size(); ++i) out[static_cast<Index>(i)] = v[i];
        return out;
    };
    job.p = DiscreteDistribution(to_vector(required<std::vector<double>>(config, "p", "")));
    job.q = DiscreteDistribution(to_vector(required<std::vector<double>>(config, "q", "")));
    const Index m = job.p.size();

    const bool metric = field<bool>(config, "metric", "", true);
    Matrix c(m, m);
    if (config.contains("cost") && config.at("cost").is_string()) {
        if (config.at("cost").get<std::string>() != "abs_diff") throw ConfigError("config field 'cost' must be abs_diff or a matrix");
        for (Index i = 0; i < m; ++i)
            for (Index j = 0; j < m; ++j) c(i, j) = std::abs(static_cast<double>(i - j));
    } else {
        const auto rows = required<std::vector<std::vector<double>>>(config, "cost", "");
        if (static_cast<Index>(rows.size()) != m) throw ConfigError("config field 'cost' must be m x m");
        for (Index i = 0; i < m; ++i) {
            if (static_cast<Index>(rows[i].size()) != m) throw ConfigError("config field 'cost' must be m x m");
            for (Index j = 0; j < m; ++j) c(i, j) = rows[i][j];
        }
    }
    job.cost = CostMatrix(c, metric);
    job.n_values = field<std::vector<Index>>(config, "n_values", "", {1, 2, 4, 8, 16, 32, 64});
    job.options.trials = field<Index>(config, "trials", "", 10000);
    job.options.threads = field<unsigned>(config, "threads", "", 1);
    job.seed = field<std::uint64_t>(config, "seed", "", 0);
    if (job.options.trials < kMinLemma1Trials) {
        throw ConfigError("config field 'trials' must be at least " + std::to_string(kMinLemma1Trials));
    }
    return job;
}

void write_lemma1_csv(const Lemma1Report& report, std::ostream& out) {
    out << "n,mean_dist,std_err,true_dist,trials\n";
    for (std::size_t k = 0; k < report.n_values.size(); ++k) {
        fmt::print(out, "{},{},{},{},{}\n", report.n_values[k], report.mean_dist[k], report.std_err[k], report.true_dist,
                   report.trials);
    }
}

Matrix read_cost_csv(std::istream& in) {
    std::vector<std::vector<double>> rows;
    std::string line;
    Index line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        std::vector<double> row;
        std::stringstream cells(line);
        std::string cell;
        while (std::getline(cells, cell, ',')) {
            std::size_t used = 0;
            double v = 0.0;
            try {
                v = std::stod(cell, &used);
            } catch (const std::exception&) {
                throw DataError("cost CSV line " + std::to_string(line_no) + ": '" + cell + "' is not a number");
            }
            if (cell.find_first_not_of(" \t", used) != std::string::npos) {
                throw DataError("cost CSV line " + std::to_string(line_no) + ": '" + cell + "' is not a number");
            }
            row.push_back(v);
        }
        if (!rows.empty() && row.size() != rows.front().size()) {
            throw DataError("cost CSV line " + std::to_string(line_no) + " has " + std::to_string(row.size()) +
                            " entries, expected " + std::to_string(rows.front().size()));
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw DataError("cost CSV is empty");
    Matrix c(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
    for (Index i = 0; i < c.rows(); ++i)
        for (Index j = 0; j < c.cols(); ++j) c(i, j) = rows[i][j];
    return c;
}

int cmd_train(const std::filesystem::path& config_path, const std::vector<std::string>& overrides, std::ostream& out,
              std::ostream& err) {
    return guarded(err, [&] {
        json config = read_json_file(config_path);
        apply_overrides(config, overrides);
        TrainJob job = parse_train_job(config);
        const auto dir = job.output_dir;
        const auto outcome = run_train_job(std::move(job));
        fmt::print(out, "trained {} steps; outputs in {}\n", outcome.state.step, dir.string());
        if (!outcome.history.evals.empty()) {
            const auto& last = outcome.history.evals.back();
            fmt::print(out, "final eval_ot_identity {} eval_ot_random_feature {}\n", last.ot_identity,
                       last.ot_random_feature);
        }
        return kExitOk;
    });
}

int cmd_assign(const std::filesystem::path& cost_csv, const std::string& method, std::optional<double> epsilon,
               std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        std::ifstream in(cost_csv);
        if (!in) throw DataError("cannot read cost CSV " + cost_csv.string());
        const Matrix c = read_cost_csv(in);
        const AssignMethod m = parse_assign_method(method);
        const Assignment a = (m == AssignMethod::auction && epsilon) ? auction(c, *epsilon) : solve_assignment(c, m);
        std::string perm;
        for (std::size_t i = 0; i < a.perm.size(); ++i) perm += (i ? "," : "") + std::to_string(a.perm[i]);
        fmt::print(out, "perm: {}\ncost: {}\n", perm, a.cost);
        return kExitOk;
    });
}

int cmd_lemma1(const std::filesystem::path& config_path, const std::optional<std::filesystem::path>& out_path,
               std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const Lemma1Job job = parse_lemma1_job(read_json_file(config_path));
        const Lemma1Report report = lemma1_experiment(job.p, job.q, job.cost, job.n_values, job.options, Rng(job.seed));
        if (out_path) {
            auto file = open_out(*out_path);
            write_lemma1_csv(report, file);
        } else {
            write_lemma1_csv(report, out);
        }
        return kExitOk;
    });
}

int cmd_gen(const std::filesystem::path& checkpoint, Index count, const std::filesystem::path& out_path,
            std::uint64_t seed, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        if (count < 1) throw ConfigError("--count must be at least 1");
        const Checkpoint ckpt = load_checkpoint(checkpoint);
        if (!ckpt.state.generator.all_finite()) throw NumericError("checkpoint holds non-finite weights");
        Rng rng(seed);
        const Matrix z = sample_noise(ckpt.state.generator.noise_dim(), count, rng);
        const Matrix x = gen_forward(ckpt.state.generator, z);
        if (ckpt.image_rows > 0) {
            write_grid(x, ckpt.image_rows, ckpt.image_cols, out_path);
        } else {
            write_points_csv(x, out_path);
        }
        fmt::print(out, "wrote {} samples to {}\n", count, out_path.string());
        return kExitOk;
    });
}

}  // namespace gnrd::cli
