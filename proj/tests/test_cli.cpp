#include "aggrolab/cli.hpp"
#include "aggrolab/io.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

using namespace aggrolab;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        const char* bin = std::getenv("AGGROLAB_BIN");
        ASSERT_NE(bin, nullptr) << "AGGROLAB_BIN is not set";
        bin_ = bin;
        root_ = fs::temp_directory_path() /
                ("aggrolab_cli_" + std::to_string(::getpid()) + "_" +
                 ::testing::UnitTest::GetInstance()->current_test_info()->name());
        fs::remove_all(root_);
        fs::create_directories(root_);
        unsetenv(cli::kWorkersEnv);
    }
    void TearDown() override {
        fs::remove_all(root_);
        unsetenv(cli::kWorkersEnv);
    }

    fs::path write_config(const std::string& name, const json& j) const {
        const fs::path p = root_ / name;
        std::ofstream(p) << j.dump(2);
        return p;
    }

    int run(const std::string& args) const {
        const std::string cmd = "'" + bin_ + "' " + args + " > '" + (root_ / "log.txt").string() + "' 2>&1";
        const int rc = std::system(cmd.c_str());
        return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
    }

    static std::string slurp(const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        std::ostringstream s;
        s << in.rdbuf();
        return s.str();
    }
    static json read(const fs::path& p) { return json::parse(slurp(p)); }

    std::string bin_;
    fs::path root_;
};

json diagnose_config() { return {{"diagnose", {{"alpha", 2.0}, {"beta", 0.5}, {"sigma", 1.0}}}}; }

json aggregate_config() {
    return {{"mixing", {{"type", "beta_type"}, {"p", 1.0}, {"q", 1.5}}},
            {"innovation", {{"type", "gaussian"}, {"sigma", 1.0}}},
            {"sizes", {{"N", 200}, {"n", 64}, {"replicates", 6}}}};
}

}  // namespace

TEST(Sha256, KnownAnswer) {
    const fs::path p = fs::temp_directory_path() / ("aggrolab_sha_" + std::to_string(::getpid()));
    std::ofstream(p, std::ios::binary) << "abc";
    EXPECT_EQ(sha256_file(p), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    fs::remove(p);
}

TEST(ParseConfig, RejectsUnknownAndMismatchedKeys) {
    json j = diagnose_config();
    j["out"] = "/tmp/x";
    EXPECT_NO_THROW(cli::parse_config(cli::Kind::Diagnose, j, "/"));
    j["colour"] = 1;
    EXPECT_THROW(cli::parse_config(cli::Kind::Diagnose, j, "/"), std::invalid_argument);
    j.erase("colour");
    j["kind"] = "field";
    EXPECT_THROW(cli::parse_config(cli::Kind::Diagnose, j, "/"), std::invalid_argument);
    j.erase("kind");
    j["diagnose"]["gamma"] = 1.0;
    EXPECT_THROW(cli::parse_config(cli::Kind::Diagnose, j, "/"), std::invalid_argument);
    json a = aggregate_config();
    a.erase("out");
    EXPECT_THROW(cli::parse_config(cli::Kind::Aggregate, a, "/"), std::invalid_argument);
    a["out"] = "o";
    a["mixing"]["type"] = "uniform";
    EXPECT_THROW(cli::parse_config(cli::Kind::Aggregate, a, "/"), std::invalid_argument);
}

TEST(ParseConfig, WorkerPrecedenceAndPaths) {
    unsetenv(cli::kWorkersEnv);
    json j = aggregate_config();
    j["out"] = "runs/a";
    j["workers"] = 3;
    auto c = cli::parse_config(cli::Kind::Aggregate, j, "/base");
    EXPECT_EQ(c.workers, 3u);
    EXPECT_EQ(c.out, fs::path("/base/runs/a"));
    setenv(cli::kWorkersEnv, "5", 1);
    EXPECT_EQ(cli::parse_config(cli::Kind::Aggregate, j, "/base").workers, 5u);
    cli::Overrides ov;
    ov.workers = 7;
    ov.seed = 99;
    ov.out = "/elsewhere";
    c = cli::parse_config(cli::Kind::Aggregate, j, "/base", ov);
    EXPECT_EQ(c.workers, 7u);
    EXPECT_EQ(c.seed, 99u);
    EXPECT_EQ(c.out, fs::path("/elsewhere"));
    EXPECT_EQ(c.echo.at("workers"), 7);
    setenv(cli::kWorkersEnv, "zero", 1);
    EXPECT_THROW(cli::parse_config(cli::Kind::Aggregate, j, "/base"), std::invalid_argument);
    unsetenv(cli::kWorkersEnv);
}

TEST(ParseConfig, EchoRoundTrips) {
    json j = aggregate_config();
    j["out"] = "/tmp/r";
    j["seed"] = 11;
    const auto c = cli::parse_config(cli::Kind::Aggregate, j, "/");
    const auto d = cli::parse_config(cli::Kind::Aggregate, c.echo, "/");
    EXPECT_EQ(c.echo, d.echo);
    EXPECT_EQ(to_json(*d.mixing), to_json(*c.mixing));
    EXPECT_EQ(d.sizes.replicates, 6u);
}

TEST_F(CliTest, DiagnoseWritesManifestWithHashes) {
    const auto cfg = write_config("d.json", diagnose_config());
    ASSERT_EQ(run("diagnose --config '" + cfg.string() + "' --out '" + (root_ / "run").string() + "'"), 0)
        << slurp(root_ / "log.txt");
    const json m = read(root_ / "run" / "manifest.json");
    EXPECT_EQ(m.at("status"), "ok");
    EXPECT_EQ(m.at("exit_code"), 0);
    EXPECT_TRUE(m.at("versions").contains("aggrolab"));
    ASSERT_FALSE(m.at("outputs").empty());
    for (const auto& f : m.at("outputs")) {
        const fs::path p = root_ / "run" / f.at("file").get<std::string>();
        ASSERT_TRUE(fs::exists(p)) << p;
        EXPECT_EQ(sha256_file(p), f.at("sha256").get<std::string>()) << p;
        EXPECT_EQ(fs::file_size(p), f.at("bytes").get<std::uintmax_t>());
    }
    const json r = read(root_ / "run" / "regime.json");
    EXPECT_EQ(r.at("memory"), "long");
    EXPECT_EQ(r.at("region"), "i");
    EXPECT_DOUBLE_EQ(r.at("H").get<double>(), 0.75);
    EXPECT_FALSE(fs::exists(root_ / "run" / ".aggrolab.lock"));
}

TEST_F(CliTest, InvalidInvocationsExitTwo) {
    json bad = diagnose_config();
    bad["colour"] = "red";
    const auto cfg = write_config("bad.json", bad);
    const std::string out = " --out '" + (root_ / "run").string() + "'";
    EXPECT_EQ(run("diagnose --config '" + cfg.string() + "'" + out), 2);
    EXPECT_EQ(run("diagnose --config '" + (root_ / "missing.json").string() + "'" + out), 2);
    EXPECT_EQ(run("transmogrify --config '" + cfg.string() + "'" + out), 2);
    EXPECT_EQ(run("diagnose" + out), 2);
    EXPECT_EQ(run("diagnose --config '" + write_config("ok.json", diagnose_config()).string() + "' --workers 0" + out), 2);
    std::ofstream(root_ / "broken.json") << "{ not json";
    EXPECT_EQ(run("diagnose --config '" + (root_ / "broken.json").string() + "'" + out), 2);
}

TEST_F(CliTest, HeldLockExitsThree) {
    fs::create_directories(root_ / "run");
    std::ofstream(root_ / "run" / ".aggrolab.lock") << "";
    const auto cfg = write_config("d.json", diagnose_config());
    EXPECT_EQ(run("diagnose --config '" + cfg.string() + "' --out '" + (root_ / "run").string() + "'"), 3);
    EXPECT_TRUE(fs::exists(root_ / "run" / ".aggrolab.lock"));
}

TEST_F(CliTest, ResourceCapExitsThreeWithManifest) {
    json j = {{"innovation", {{"type", "gaussian"}}},
              {"sizes", {{"N", 2}, {"L", 64}}},
              {"field", {{"fixed_a", 0.5}}},
              {"max_cells", 100}};
    const auto cfg = write_config("f.json", j);
    EXPECT_EQ(run("field --config '" + cfg.string() + "' --out '" + (root_ / "run").string() + "'"), 3);
    const json m = read(root_ / "run" / "manifest.json");
    EXPECT_EQ(m.at("status"), "resource-cap");
    EXPECT_EQ(m.at("error").at("type"), "resource_limit");
}

TEST_F(CliTest, ModuleFailureExitsFour) {
    json j = {{"mixing", {{"type", "beta_type"}, {"p", 2.0}, {"q", 3.0}}},
              {"innovation", {{"type", "gaussian"}}},
              {"sizes", {{"N", 2}, {"n", 4}}},
              {"disaggregate", {{"method", "beran"}, {"h", 0.4999}}}};
    const auto cfg = write_config("b.json", j);
    EXPECT_EQ(run("disaggregate --config '" + cfg.string() + "' --out '" + (root_ / "run").string() + "'"), 4);
    EXPECT_EQ(read(root_ / "run" / "manifest.json").at("status"), "numerical-failure");
}

TEST_F(CliTest, ReportIsIdempotentAndDetectsTampering) {
    const auto cfg = write_config("a.json", aggregate_config());
    const fs::path dir = root_ / "run";
    ASSERT_EQ(run("aggregate --config '" + cfg.string() + "' --seed 5 --out '" + dir.string() + "'"), 0);
    const std::string first = slurp(dir / "summary.txt");
    EXPECT_EQ(run("report --config '" + dir.string() + "'"), 0);
    EXPECT_EQ(slurp(dir / "summary.txt"), first);
    EXPECT_EQ(run("report --config '" + (dir / "manifest.json").string() + "'"), 0);
    EXPECT_EQ(slurp(dir / "summary.txt"), first);
    std::ofstream(dir / "aggregate.csv", std::ios::app) << "1,2\n";
    EXPECT_EQ(run("report --config '" + dir.string() + "'"), 4);
    EXPECT_EQ(run("report --config '" + (root_ / "nowhere").string() + "'"), 2);
}

TEST_F(CliTest, OutputsIdenticalAcrossWorkerCounts) {
    const auto cfg = write_config("a.json", aggregate_config());
    const fs::path a = root_ / "w1", b = root_ / "w8";
    ASSERT_EQ(run("aggregate --config '" + cfg.string() + "' --seed 42 --workers 1 --out '" + a.string() + "'"), 0);
    setenv(cli::kWorkersEnv, "8", 1);
    ASSERT_EQ(run("aggregate --config '" + cfg.string() + "' --seed 42 --out '" + b.string() + "'"), 0);
    unsetenv(cli::kWorkersEnv);
    EXPECT_EQ(read(b / "manifest.json").at("config").at("workers"), 8);
    const json ma = read(a / "manifest.json"), mb = read(b / "manifest.json");
    ASSERT_EQ(ma.at("outputs").size(), mb.at("outputs").size());
    for (std::size_t i = 0; i < ma.at("outputs").size(); ++i) {
        const auto& fa = ma.at("outputs")[i];
        EXPECT_EQ(fa.at("file"), mb.at("outputs")[i].at("file"));
        EXPECT_EQ(fa.at("sha256"), mb.at("outputs")[i].at("sha256")) << fa.at("file");
    }
}

TEST_F(CliTest, EveryKindRuns) {
    struct Case {
        std::string kind;
        json cfg;
        std::vector<std::string> files;
    };
    const json model = aggregate_config();
    std::vector<Case> cases;
    cases.push_back({"simulate", model, {"aggregate.csv", "results.json"}});
    json rob = model;
    rob["sizes"] = {{"N", 500}, {"n", 30}};
    rob["disaggregate"] = {{"method", "robinson"}, {"k_max", 5}};
    cases.push_back({"disaggregate", rob, {"moments.csv"}});
    json geg = model;
    geg["sizes"] = {{"N", 500}, {"n", 256}};
    geg["disaggregate"] = {{"method", "gegenbauer"}, {"alpha_weight", 1.0}, {"gamma_rate", 0.4}};
    cases.push_back({"disaggregate", geg, {"density.csv"}});
    json fld = {{"mixing", {{"type", "canonical_regvar"}, {"beta", 0.5}}},
                {"innovation", {{"type", "gaussian"}}},
                {"sizes", {{"N", 4}, {"L", 16}}},
                {"field", {{"variant", "2N"}}}};
    cases.push_back({"field", fld, {"field.f64", "coeffs.f64", "rectangle.csv"}});
    int i = 0;
    for (const auto& c : cases) {
        const fs::path dir = root_ / ("k" + std::to_string(i));
        const auto cfg = write_config("k" + std::to_string(i++) + ".json", c.cfg);
        ASSERT_EQ(run(c.kind + " --config '" + cfg.string() + "' --out '" + dir.string() + "'"), 0)
            << c.kind << ": " << slurp(root_ / "log.txt");
        for (const auto& f : c.files) EXPECT_TRUE(fs::exists(dir / f)) << c.kind << " " << f;
    }
}
