#include "cli_commands.hpp"

#include "gnrd/checkpoint.hpp"
#include "gnrd/error.hpp"
#include "gnrd/metrics.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>

namespace fs = std::filesystem;
using namespace gnrd;
using namespace gnrd::cli;
using nlohmann::json;

namespace {

struct ScratchDir {
    fs::path path;
    explicit ScratchDir(const std::string& name) {
        path = fs::path(testing::TempDir()) / ("gnrd_cli_" + name);
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~ScratchDir() { fs::remove_all(path); }
    fs::path operator/(const std::string& leaf) const { return path / leaf; }
};

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
}

std::string read_bytes(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

json tiny_ring_config(const fs::path& out_dir, std::int64_t iters) {
    return json{
        {"seed", 3},
        {"output_dir", out_dir.string()},
        {"dataset", {{"kind", "ring"}, {"components", 4}, {"radius", 1.0}, {"std", 0.1}, {"count", 200}}},
        {"generator", {{"noise_dim", 4}, {"hidden", {8}}}},
        {"train",
         {{"batch_size", 10},
          {"max_iters", iters},
          {"eval_count", 20},
          {"schedule", "alternate"},
          {"discriminators", json::array({json{{"kind", "identity"}},
                                          json{{"kind", "random_mlp"}, {"hidden", {6}}, {"output_dim", 5}}})}}}};
}

struct CmdResult {
    int code;
    std::string out;
    std::string err;
};

CmdResult run_train(const fs::path& config_path, const std::vector<std::string>& overrides = {}) {
    std::ostringstream out, err;
    const int code = cmd_train(config_path, overrides, out, err);
    return {code, out.str(), err.str()};
}

CmdResult run_assign(const fs::path& csv, const std::string& method, std::optional<double> eps = std::nullopt) {
    std::ostringstream out, err;
    const int code = cmd_assign(csv, method, eps, out, err);
    return {code, out.str(), err.str()};
}

CmdResult run_gen(const fs::path& ckpt, Index count, const fs::path& dest, std::uint64_t seed) {
    std::ostringstream out, err;
    const int code = cmd_gen(ckpt, count, dest, seed, out, err);
    return {code, out.str(), err.str()};
}

}  // namespace

TEST(CliAssign, TwoByTwoPicksTheSwap) {
    ScratchDir dir("assign2");
    write_text(dir / "c.csv", "1,2\n2,4\n");
    const CmdResult r = run_assign(dir / "c.csv", "hungarian");
    ASSERT_EQ(r.code, kExitOk) << r.err;
    EXPECT_NE(r.out.find("perm: 1,0"), std::string::npos) << r.out;
    EXPECT_NE(r.out.find("cost: 4\n"), std::string::npos) << r.out;
}

TEST(CliAssign, EveryMethodAgreesOnTheSmallCase) {
    ScratchDir dir("assign_methods");
    write_text(dir / "c.csv", "4,1,3\n2,0,5\n3,2,2\n");
    for (const std::string method : {"hungarian", "auction", "brute"}) {
        const CmdResult r = run_assign(dir / "c.csv", method);
        ASSERT_EQ(r.code, kExitOk) << method << ": " << r.err;
        EXPECT_NE(r.out.find("cost: 5\n"), std::string::npos) << method << ": " << r.out;
    }
    const CmdResult eps = run_assign(dir / "c.csv", "auction", 0.25);
    ASSERT_EQ(eps.code, kExitOk) << eps.err;
    EXPECT_NE(eps.out.find("cost: 5\n"), std::string::npos) << eps.out;
}

TEST(CliAssign, ZeroMatrixCostsNothing) {
    ScratchDir dir("assign_zero");
    write_text(dir / "c.csv", "0,0,0\n0,0,0\n0,0,0\n");
    const CmdResult r = run_assign(dir / "c.csv", "greedy");
    ASSERT_EQ(r.code, kExitOk) << r.err;
    EXPECT_NE(r.out.find("cost: 0\n"), std::string::npos) << r.out;
}

TEST(CliAssign, BruteForceRejectsTenByTen) {
    ScratchDir dir("assign_brute");
    std::string csv;
    for (int i = 0; i < 10; ++i) {
        for (int j = 0; j < 10; ++j) csv += (j ? "," : "") + std::to_string((i * 7 + j * 3) % 11);
        csv += "\n";
    }
    write_text(dir / "c.csv", csv);
    const CmdResult r = run_assign(dir / "c.csv", "brute");
    EXPECT_EQ(r.code, kExitConfig);
    EXPECT_FALSE(r.err.empty());
    EXPECT_EQ(run_assign(dir / "c.csv", "hungarian").code, kExitOk);
}

TEST(CliAssign, MalformedInputIsADataError) {
    ScratchDir dir("assign_bad");
    write_text(dir / "ragged.csv", "1,2\n3\n");
    write_text(dir / "text.csv", "1,x\n3,4\n");
    write_text(dir / "rect.csv", "1,2,3\n4,5,6\n");
    EXPECT_EQ(run_assign(dir / "ragged.csv", "hungarian").code, kExitData);
    EXPECT_EQ(run_assign(dir / "text.csv", "hungarian").code, kExitData);
    EXPECT_EQ(run_assign(dir / "missing.csv", "hungarian").code, kExitData);
    EXPECT_EQ(run_assign(dir / "rect.csv", "hungarian").code, kExitConfig);
    EXPECT_EQ(run_assign(dir / "ragged.csv", "simplex").code, kExitData);
    write_text(dir / "ok.csv", "1\n");
    EXPECT_EQ(run_assign(dir / "ok.csv", "simplex").code, kExitConfig);
}

TEST(CliLemma1, SingleStateGivesZeroDistances) {
    ScratchDir dir("lemma_single");
    write_text(dir / "cfg.json", R"({"p":[1.0],"q":[1.0],"cost":[[0.0]],"trials":100,"n_values":[1,4,16]})");
    std::ostringstream out, err;
    ASSERT_EQ(cmd_lemma1(dir / "cfg.json", dir / "report.csv", out, err), kExitOk) << err.str();
    std::istringstream report(read_bytes(dir / "report.csv"));
    std::string line;
    std::getline(report, line);
    EXPECT_EQ(line, "n,mean_dist,std_err,true_dist,trials");
    int rows = 0;
    while (std::getline(report, line)) {
        ++rows;
        std::stringstream cells(line);
        std::string n, mean;
        std::getline(cells, n, ',');
        std::getline(cells, mean, ',');
        EXPECT_EQ(mean, "0") << line;
    }
    EXPECT_EQ(rows, 3);
}

TEST(CliLemma1, DefaultConfigIsMonotoneWithinTwoStandardErrors) {
    std::ostringstream out, err;
    ASSERT_EQ(cmd_lemma1(fs::path(GNRD_SOURCE_DIR) / "configs/lemma1_default.json", std::nullopt, out, err), kExitOk)
        << err.str();
    std::istringstream report(out.str());
    std::string line;
    std::getline(report, line);
    std::vector<double> mean, se;
    while (std::getline(report, line)) {
        std::stringstream cells(line);
        std::string cell;
        std::vector<double> v;
        while (std::getline(cells, cell, ',')) v.push_back(std::stod(cell));
        ASSERT_EQ(v.size(), 5u);
        EXPECT_DOUBLE_EQ(v[3], 0.6);
        EXPECT_EQ(v[4], 10000);
        mean.push_back(v[1]);
        se.push_back(v[2]);
    }
    ASSERT_EQ(mean.size(), 7u);
    for (std::size_t k = 0; k + 1 < mean.size(); ++k) {
        EXPECT_LE(mean[k + 1], mean[k] + 2.0 * std::max(se[k], se[k + 1])) << "transition " << k;
    }
}

TEST(CliLemma1, RejectsTooFewTrialsAndBadMarginals) {
    ScratchDir dir("lemma_bad");
    std::ostringstream out, err;
    write_text(dir / "few.json", R"({"p":[0.5,0.5],"q":[0.5,0.5],"cost":"abs_diff","trials":99})");
    EXPECT_EQ(cmd_lemma1(dir / "few.json", std::nullopt, out, err), kExitConfig);
    EXPECT_NE(err.str().find("trials"), std::string::npos) << err.str();
    write_text(dir / "mass.json", R"({"p":[0.5,0.6],"q":[0.5,0.5],"cost":"abs_diff"})");
    EXPECT_EQ(cmd_lemma1(dir / "mass.json", std::nullopt, out, err), kExitConfig);
    write_text(dir / "cost.json", R"({"p":[0.5,0.5],"q":[0.5,0.5],"cost":[[0,1],[-1,0]],"metric":false})");
    EXPECT_EQ(cmd_lemma1(dir / "cost.json", std::nullopt, out, err), kExitConfig);
    write_text(dir / "syntax.json", "{not json");
    EXPECT_EQ(cmd_lemma1(dir / "syntax.json", std::nullopt, out, err), kExitConfig);
}

TEST(CliOverrides, NestedValuesAreParsedAsJson) {
    json config = {{"train", {{"max_iters", 10}}}};
    apply_overrides(config, {"train.max_iters=3", "train.assignment=greedy", "seed=42", "train.lr=0.5",
                             "generator.hidden=[4,5]"});
    EXPECT_EQ(config["train"]["max_iters"], 3);
    EXPECT_EQ(config["train"]["assignment"], "greedy");
    EXPECT_EQ(config["seed"], 42);
    EXPECT_DOUBLE_EQ(config["train"]["lr"].get<double>(), 0.5);
    EXPECT_EQ(config["generator"]["hidden"], json::array({4, 5}));
    EXPECT_THROW(apply_overrides(config, {"no_equals_sign"}), ConfigError);
    EXPECT_THROW(apply_overrides(config, {"=5"}), ConfigError);
}

TEST(CliTrain, ZeroIterationsEmitsTheInitialCheckpoint) {
    ScratchDir dir("train_zero");
    write_text(dir / "cfg.json", tiny_ring_config(dir / "out", 0).dump());
    const CmdResult r = run_train(dir / "cfg.json");
    ASSERT_EQ(r.code, kExitOk) << r.err;
    const Checkpoint ckpt = load_checkpoint(dir / "out/final.ckpt");
    EXPECT_EQ(ckpt.state.step, 0);
    EXPECT_EQ(ckpt.seed, 3u);
    EXPECT_EQ(ckpt.state.generator.layer_dims, (std::vector<Index>{4, 8, 2}));

    TrainJob job = parse_train_job(tiny_ring_config(dir / "out", 0));
    prepare_data(job);
    const TrainState fresh = init_train_state(job.train);
    for (std::size_t l = 0; l < fresh.generator.layers.size(); ++l) {
        EXPECT_EQ(ckpt.state.generator.layers[l].weight, fresh.generator.layers[l].weight);
    }
    EXPECT_EQ(read_bytes(dir / "out/history.csv"), "iter,loss,method\n");
    EXPECT_TRUE(fs::exists(dir / "out/samples.csv"));
}

TEST(CliTrain, MissingDatasetPathNamesTheField) {
    ScratchDir dir("train_nopath");
    json config = tiny_ring_config(dir / "out", 1);
    config["dataset"] = {{"kind", "idx"}};
    write_text(dir / "cfg.json", config.dump());
    const CmdResult r = run_train(dir / "cfg.json");
    EXPECT_NE(r.code, kExitOk);
    EXPECT_NE(r.err.find("dataset.path"), std::string::npos) << r.err;

    config["dataset"]["path"] = (dir / "nowhere.idx").string();
    write_text(dir / "cfg.json", config.dump());
    EXPECT_EQ(run_train(dir / "cfg.json").code, kExitData);
    EXPECT_EQ(run_train(dir / "absent.json").code, kExitConfig);
}

TEST(CliTrain, BadFieldsAreConfigErrors) {
    ScratchDir dir("train_badfields");
    write_text(dir / "cfg.json", tiny_ring_config(dir / "out", 1).dump());
    EXPECT_EQ(run_train(dir / "cfg.json", {"train.batch_size=\"ten\""}).code, kExitConfig);
    EXPECT_EQ(run_train(dir / "cfg.json", {"train.assignment=simplex"}).code, kExitConfig);
    EXPECT_EQ(run_train(dir / "cfg.json", {"train.discriminators=[]"}).code, kExitConfig);
    EXPECT_EQ(run_train(dir / "cfg.json", {"train.schedule=weighted"}).code, kExitConfig);
    EXPECT_EQ(run_train(dir / "cfg.json", {"dataset.kind=swiss_roll"}).code, kExitConfig);
}

TEST(CliTrain, WritesHistoryEvalAndCheckpoints) {
    ScratchDir dir("train_outputs");
    write_text(dir / "cfg.json", tiny_ring_config(dir / "out", 6).dump());
    const CmdResult r = run_train(dir / "cfg.json", {"train.eval_every=3", "train.checkpoint_every=2"});
    ASSERT_EQ(r.code, kExitOk) << r.err;
    for (const char* f : {"checkpoint_2.ckpt", "checkpoint_4.ckpt", "checkpoint_6.ckpt", "final.ckpt"}) {
        EXPECT_TRUE(fs::exists(dir / "out" / f)) << f;
    }
    std::istringstream history(read_bytes(dir / "out/history.csv"));
    std::string line;
    int rows = -1;
    while (std::getline(history, line)) ++rows;
    EXPECT_EQ(rows, 6);
    std::istringstream eval(read_bytes(dir / "out/eval.csv"));
    std::vector<std::string> iters;
    while (std::getline(eval, line)) iters.push_back(line.substr(0, line.find(',')));
    EXPECT_EQ(iters, (std::vector<std::string>{"iter", "0", "3", "6"}));
}

TEST(CliTrain, ResumingReproducesTheUninterruptedRun) {
    ScratchDir dir("train_resume");
    write_text(dir / "cfg.json", tiny_ring_config(dir / "full", 6).dump());
    ASSERT_EQ(run_train(dir / "cfg.json", {"train.checkpoint_every=3"}).code, kExitOk);
    const CmdResult resumed = run_train(dir / "cfg.json", {"output_dir=" + (dir / "resumed").string(),
                                                     "resume=" + (dir / "full/checkpoint_3.ckpt").string()});
    ASSERT_EQ(resumed.code, kExitOk) << resumed.err;
    EXPECT_EQ(read_bytes(dir / "full/final.ckpt"), read_bytes(dir / "resumed/final.ckpt"));

    const CmdResult other_seed = run_train(dir / "cfg.json", {"output_dir=" + (dir / "bad").string(), "seed=4",
                                                        "resume=" + (dir / "full/checkpoint_3.ckpt").string()});
    EXPECT_EQ(other_seed.code, kExitConfig);
}

TEST(CliTrain, ImageDatasetsProduceASampleGrid) {
    ScratchDir dir("train_images");
    Dataset images;
    images.kind = DatasetKind::image;
    images.image_rows = 3;
    images.image_cols = 2;
    Rng rng(5);
    images.samples = Matrix(6, 40);
    for (Index i = 0; i < images.samples.size(); ++i) images.samples.data()[i] = std::round(rng.uniform() * 255) / 255;
    write_idx_images(images, dir / "tiny.idx");
    json config = tiny_ring_config(dir / "out", 2);
    config["dataset"] = {{"kind", "idx"}, {"path", (dir / "tiny.idx").string()}};
    config["train"]["eval_count"] = 10;
    config["grid"] = {{"rows", 2}, {"cols", 3}};
    write_text(dir / "cfg.json", config.dump());

    const CmdResult r = run_train(dir / "cfg.json");
    ASSERT_EQ(r.code, kExitOk) << r.err;
    const std::string pgm = read_bytes(dir / "out/samples.pgm");
    const Index w = 3 * 2 + 4 * kGridGutter, h = 2 * 3 + 3 * kGridGutter;
    EXPECT_EQ(pgm.substr(0, pgm.find("255\n") + 4), "P5\n" + std::to_string(w) + " " + std::to_string(h) + "\n255\n");

    config["train"]["eval_count"] = 40;
    write_text(dir / "cfg.json", config.dump());
    EXPECT_EQ(run_train(dir / "cfg.json").code, kExitData);
}

class CliGen : public testing::Test {
protected:
    static void SetUpTestSuite() {
        scratch_ = new ScratchDir("gen");
        Rng rng(9);
        Checkpoint ckpt;
        TrainConfig cfg;
        cfg.generator_dims = {5, 7, 12};
        cfg.output = OutputActivation::sigmoid;
        cfg.discriminators[0].spec.input_dim = 12;
        ckpt.state = init_train_state(cfg);
        ckpt.image_rows = 4;
        ckpt.image_cols = 3;
        save_checkpoint(ckpt, *scratch_ / "image.ckpt");
        ckpt.image_rows = ckpt.image_cols = 0;
        save_checkpoint(ckpt, *scratch_ / "vector.ckpt");
    }
    static void TearDownTestSuite() { delete scratch_; }
    static ScratchDir* scratch_;
};
ScratchDir* CliGen::scratch_ = nullptr;

TEST_F(CliGen, CountOneMakesASingleTileGrid) {
    const CmdResult r = run_gen(*scratch_ / "image.ckpt", 1, *scratch_ / "one.pgm", 0);
    ASSERT_EQ(r.code, kExitOk) << r.err;
    const std::string pgm = read_bytes(*scratch_ / "one.pgm");
    const Index w = 3 + 2 * kGridGutter, h = 4 + 2 * kGridGutter;
    const std::string header = "P5\n" + std::to_string(w) + " " + std::to_string(h) + "\n255\n";
    EXPECT_EQ(pgm.substr(0, header.size()), header);
    EXPECT_EQ(pgm.size(), header.size() + static_cast<std::size_t>(w * h));
}

TEST_F(CliGen, GridIsNearSquareWithPadding) {
    ASSERT_EQ(run_gen(*scratch_ / "image.ckpt", 5, *scratch_ / "five.pgm", 0).code, kExitOk);
    const std::string pgm = read_bytes(*scratch_ / "five.pgm");
    const Index w = 3 * 3 + 4 * kGridGutter, h = 2 * 4 + 3 * kGridGutter;
    EXPECT_EQ(pgm.substr(0, pgm.find("255\n") + 4), "P5\n" + std::to_string(w) + " " + std::to_string(h) + "\n255\n");
}

TEST_F(CliGen, SameSeedSameFile) {
    ASSERT_EQ(run_gen(*scratch_ / "image.ckpt", 9, *scratch_ / "a.pgm", 17).code, kExitOk);
    ASSERT_EQ(run_gen(*scratch_ / "image.ckpt", 9, *scratch_ / "b.pgm", 17).code, kExitOk);
    ASSERT_EQ(run_gen(*scratch_ / "image.ckpt", 9, *scratch_ / "c.pgm", 18).code, kExitOk);
    EXPECT_EQ(read_bytes(*scratch_ / "a.pgm"), read_bytes(*scratch_ / "b.pgm"));
    EXPECT_NE(read_bytes(*scratch_ / "a.pgm"), read_bytes(*scratch_ / "c.pgm"));
}

TEST_F(CliGen, VectorCheckpointsWriteCsv) {
    ASSERT_EQ(run_gen(*scratch_ / "vector.ckpt", 3, *scratch_ / "pts.csv", 0).code, kExitOk);
    std::istringstream csv(read_bytes(*scratch_ / "pts.csv"));
    std::string line;
    std::getline(csv, line);
    EXPECT_EQ(line.substr(0, 6), "x0,x1,");
    int rows = 0;
    while (std::getline(csv, line)) ++rows;
    EXPECT_EQ(rows, 3);
}

TEST_F(CliGen, WrongVersionIsReported) {
    std::string bytes = read_bytes(*scratch_ / "image.ckpt");
    bytes[8] = 2;  // version field follows the 8-byte magic
    write_text(*scratch_ / "v2.ckpt", bytes);
    const CmdResult r = run_gen(*scratch_ / "v2.ckpt", 1, *scratch_ / "x.pgm", 0);
    EXPECT_EQ(r.code, kExitData);
    EXPECT_NE(r.err.find("version 2"), std::string::npos) << r.err;
    EXPECT_EQ(run_gen(*scratch_ / "image.ckpt", 0, *scratch_ / "x.pgm", 0).code, kExitConfig);
}
