#include <gtest/gtest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

const std::string kCli = MORAN_CLI_PATH;
const fs::path kConfigs = MORAN_CONFIG_DIR;

struct CliRun {
    int status = -1;
    std::string out, err;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

class CliTest : public ::testing::Test {
protected:
    fs::path dir;
    void SetUp() override {
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        dir = fs::temp_directory_path() / (std::string("moran_cli_") + info->name() + "_" + std::to_string(::getpid()));
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    void TearDown() override { fs::remove_all(dir); }

    CliRun run(const std::string& args) const {
        const auto o = dir / "stdout.txt", e = dir / "stderr.txt";
        const std::string cmd = kCli + " " + args + " > " + o.string() + " 2> " + e.string();
        const int raw = std::system(cmd.c_str());
        CliRun r;
        r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
        r.out = slurp(o);
        r.err = slurp(e);
        return r;
    }

    fs::path write_config(const std::string& name, const nlohmann::json& doc) const {
        const auto p = dir / name;
        std::ofstream(p) << doc.dump(2);
        return p;
    }

    nlohmann::json example(const std::string& name) const { return nlohmann::json::parse(slurp(kConfigs / name)); }
};

}  // namespace

TEST_F(CliTest, DimsWritesReport) {
    const auto r = run("dims -c " + (kConfigs / "two_atom.json").string() + " -o " + (dir / "out").string());
    ASSERT_EQ(r.status, 0) << r.err;
    const auto j = nlohmann::json::parse(slurp(dir / "out" / "dims.json"));
    EXPECT_NEAR(j["report"]["hausdorff"].get<double>(), 0.694241913630617301738790266899, 1e-12);
    EXPECT_NEAR(j["report"]["delta_big"].get<double>(), 1.0, 1e-12);
    EXPECT_EQ(j["tool"], "moran");
    EXPECT_EQ(j["config_digest"].get<std::string>().size(), 16u);
    EXPECT_TRUE(j["lowerphi_audit"]["pass"].get<bool>());
}

TEST_F(CliTest, MissingWeightsGiveNullMeasureFields) {
    auto doc = example("two_atom.json");
    doc["ensemble"].erase("shared_weights");
    doc["ensemble"]["weight_mode"] = "dependent";
    const auto r = run("dims -c " + write_config("c.json", doc).string() + " -o " + (dir / "out").string());
    ASSERT_EQ(r.status, 0) << r.err;
    const auto j = nlohmann::json::parse(slurp(dir / "out" / "dims.json"));
    EXPECT_TRUE(j["report"]["measure_upper"].is_null());
    EXPECT_TRUE(j["report"]["ratio_table"].is_null());
    EXPECT_TRUE(j["lowerphi_audit"].is_null());
}

TEST_F(CliTest, AttainVerifiesEveryTarget) {
    const auto r = run("attain -c " + (kConfigs / "two_atom.json").string() + " -o " + (dir / "out").string());
    ASSERT_EQ(r.status, 0) << r.err;
    const auto j = nlohmann::json::parse(slurp(dir / "out" / "attain.json"));
    ASSERT_EQ(j["results"].size(), 5u);
    for (const auto& res : j["results"]) EXPECT_LE(res["verification"]["abs_error"].get<double>(), 1e-9);
}

TEST_F(CliTest, SampleRowCount) {
    auto doc = example("single_atom.json");
    doc["sample"] = {{"levels", 3}, {"svg", true}};
    const auto r = run("sample -c " + write_config("c.json", doc).string() + " -o " + (dir / "out").string());
    ASSERT_EQ(r.status, 0) << r.err;
    std::istringstream csv(slurp(dir / "out" / "sample.csv"));
    std::string line;
    std::getline(csv, line);
    EXPECT_EQ(line.rfind("# moran ", 0), 0u);
    std::getline(csv, line);
    EXPECT_EQ(line, "level,address,left,right,length,measure");
    int rows = 0;
    while (std::getline(csv, line)) ++rows;
    EXPECT_EQ(rows, 14);
    EXPECT_TRUE(fs::exists(dir / "out" / "sample.svg"));
}

TEST_F(CliTest, EstimateIsByteIdenticalAcrossRuns) {
    const std::string cfg = (kConfigs / "two_atom.json").string();
    ASSERT_EQ(run("estimate -c " + cfg + " --depth 400 -o " + (dir / "a").string()).status, 0);
    ASSERT_EQ(run("estimate -c " + cfg + " --depth 400 -o " + (dir / "b").string()).status, 0);
    std::size_t files = 0;
    for (const auto& f : fs::directory_iterator(dir / "a")) {
        EXPECT_EQ(slurp(f.path()), slurp(dir / "b" / f.path().filename())) << f.path().filename();
        ++files;
    }
    EXPECT_EQ(files, 4u);  // three csv files and estimate.json
    ASSERT_EQ(run("estimate -c " + cfg + " --depth 400 --seed 8 -o " + (dir / "c").string()).status, 0);
    EXPECT_NE(slurp(dir / "a" / "estimate.json"), slurp(dir / "c" / "estimate.json"));
}

TEST_F(CliTest, ValidationErrorsExitTwo) {
    auto doc = example("two_atom.json");
    doc["ensemble"]["tau"] = 0.2;
    const auto r = run("dims -c " + write_config("c.json", doc).string() + " -o " + (dir / "out").string());
    EXPECT_EQ(r.status, 2);
    EXPECT_NE(r.err.find("BoundViolation"), std::string::npos) << r.err;
}

TEST_F(CliTest, UnknownKeyExitsTwo) {
    auto doc = example("two_atom.json");
    doc["extra"] = 1;
    EXPECT_EQ(run("dims -c " + write_config("c.json", doc).string()).status, 2);
}

TEST_F(CliTest, UnreachableTargetExitsThree) {
    auto doc = example("two_atom.json");
    doc["targets"] = {{{"value", 0.9}, {"bound", "upper"}, {"regime", "independent"}}};
    const auto r = run("attain -c " + write_config("c.json", doc).string() + " -o " + (dir / "out").string());
    EXPECT_EQ(r.status, 3) << r.err;
}

TEST_F(CliTest, ShallowRealizationExitsFour) {
    const auto r = run("estimate -c " + (kConfigs / "two_atom.json").string() + " --depth 50 -o " +
                       (dir / "out").string());
    EXPECT_EQ(r.status, 4) << r.err;
}

TEST_F(CliTest, EnumerationCapExitsFourWithHint) {
    auto doc = example("single_atom.json");
    doc["sample"] = {{"levels", 30}};
    doc["depth"] = 40;
    const auto r = run("sample -c " + write_config("c.json", doc).string() + " -o " + (dir / "out").string());
    EXPECT_EQ(r.status, 4);
    EXPECT_NE(r.err.find("hint"), std::string::npos);
}

TEST_F(CliTest, LemmaExample) {
    const auto r = run("lemma -c " + (kConfigs / "lemma_uniform.json").string() + " -o " + (dir / "out").string());
    ASSERT_EQ(r.status, 0) << r.err;
    EXPECT_NE(r.out.find("|Upsilon_r| = 1"), std::string::npos) << r.out;
    EXPECT_NE(r.out.find("lemma: PASS"), std::string::npos);
    const auto j = nlohmann::json::parse(slurp(dir / "out" / "lemma.json"));
    EXPECT_TRUE(j["pass"].get<bool>());
}

TEST_F(CliTest, MissingSubcommandFails) { EXPECT_NE(run("").status, 0); }
