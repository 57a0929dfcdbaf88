#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include <gtest/gtest.h>
#include <json.hpp>

#include "oracles.hpp"

namespace fs = std::filesystem;

namespace {

struct Outcome {
    int code = -1;
    std::string out;
};

Outcome run_cli(const std::string& args) {
    const std::string cmd = std::string(QUADLAB_CLI) + " " + args + " 2>&1";
    Outcome o;
    FILE* p = popen(cmd.c_str(), "r");
    if (p == nullptr) {
        return o;
    }
    std::array<char, 4096> buf{};
    std::size_t n = 0;
    while ((n = fread(buf.data(), 1, buf.size(), p)) > 0) {
        o.out.append(buf.data(), n);
    }
    const int status = pclose(p);
    o.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return o;
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::path(QUADLAB_TEST_TMP) / "cli" / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

void write(const fs::path& p, const std::string& text) {
    std::ofstream(p) << text;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

std::vector<std::string> lines(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string l; std::getline(in, l);) {
        out.push_back(l);
    }
    return out;
}

const char* kTinyExperiment = R"({"a0": 1.6, "m0": 6, "epsilon": 0.01, "maxGenerations": 0})";

}  // namespace

TEST(CliOrbit, RowsMatchDirectIteration) {
    const Outcome o = run_cli("orbit --a 1.9 --n 12");
    ASSERT_EQ(o.code, 0) << o.out;
    const auto rows = lines(o.out);
    ASSERT_EQ(rows.size(), 14u);
    EXPECT_EQ(rows[0], "n,x,log_deriv,deriv_sign,location");
    double x = 0.0;
    for (int n = 0; n <= 12; ++n) {
        std::istringstream in(rows[static_cast<std::size_t>(n) + 1]);
        std::string cell;
        std::vector<std::string> cells;
        while (std::getline(in, cell, ',')) {
            cells.push_back(cell);
        }
        ASSERT_EQ(cells.size(), 5u);
        EXPECT_EQ(std::stoi(cells[0]), n);
        EXPECT_EQ(std::stod(cells[1]), x) << n;
        const double d = quadlab::testing::phase_product(1.9, n);
        EXPECT_NEAR(std::stod(cells[2]), std::log(std::abs(d)), 1e-12) << n;
        EXPECT_EQ(std::stoi(cells[3]), d < 0 ? -1 : 1) << n;
        x = 1.0 - 1.9 * x * x;
    }
}

TEST(CliOrbit, JsonCarriesTheSameValues) {
    const Outcome csv = run_cli("orbit --a 1.8 --n 6");
    const Outcome js = run_cli("orbit --a 1.8 --n 6 --emit json");
    ASSERT_EQ(js.code, 0) << js.out;
    const auto rows = nlohmann::json::parse(js.out);
    const auto csvRows = lines(csv.out);
    ASSERT_EQ(rows.size() + 1, csvRows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const std::string x = csvRows[i + 1].substr(csvRows[i + 1].find(',') + 1);
        EXPECT_EQ(rows[i]["x"].get<double>(), std::stod(x));
        EXPECT_EQ(rows[i]["location"].get<std::string>(), csvRows[i + 1].substr(csvRows[i + 1].rfind(',') + 1));
    }
}

TEST(CliOrbit, ExitCodes) {
    EXPECT_EQ(run_cli("orbit --a 3").code, 3);
    EXPECT_EQ(run_cli("orbit --a").code, 2);
    EXPECT_EQ(run_cli("orbit --a 1.9 --emit xml").code, 2);
    EXPECT_EQ(run_cli("frobnicate").code, 2);
    EXPECT_EQ(run_cli("--help").code, 0);
}

TEST(CliRates, LogStarAndCondensation) {
    const Outcome ls = run_cli("rates logstar --x 16");
    EXPECT_EQ(ls.code, 0);
    EXPECT_EQ(ls.out, "3\n");
    const Outcome c = run_cli("rates condense --a inv_square --q pow2 --K 10");
    EXPECT_EQ(c.code, 0);
    EXPECT_NE(c.out.find("sandwichHolds=true"), std::string::npos) << c.out;
    EXPECT_NE(c.out.find("alpha=2\n"), std::string::npos) << c.out;
    EXPECT_EQ(run_cli("rates condense --a inv_square --q cubes --K 10").code, 2);
    EXPECT_EQ(run_cli("rates admissible --rate power:2 --horizon 1000").code, 0);
    EXPECT_EQ(run_cli("rates partialsum --rate nlogn --tau 0.5 --N 1000").code, 0);
    EXPECT_EQ(run_cli("rates partialsum --rate nlogn --tau 1.5 --N 1000").code, 3);
}

TEST(CliExclude, ZeroGenerationsWritesOneRow) {
    const fs::path dir = scratch("zero");
    write(dir / "exp.json", kTinyExperiment);
    const Outcome o = run_cli("exclude " + (dir / "exp.json").string() + " --out " + (dir / "out").string());
    ASSERT_EQ(o.code, 0) << o.out;
    const auto rows = lines(slurp(dir / "out" / "generations.csv"));
    ASSERT_EQ(rows.size(), 3u);
    EXPECT_EQ(rows[0], "# schema: quadlab.generations/1");
    EXPECT_EQ(rows[2].substr(0, 2), "0,");
    const auto manifest = nlohmann::json::parse(slurp(dir / "out" / "manifest.json"));
    for (const char* key : {"configPath", "outputDir", "seed", "toolVersion", "started", "finished"}) {
        EXPECT_TRUE(manifest.contains(key)) << key;
    }
    EXPECT_TRUE(fs::exists(dir / "out" / "summary.json"));
}

TEST(CliExclude, ConfigErrorsNameTheField) {
    const fs::path dir = scratch("bad");
    write(dir / "exp.json", R"({"a0": 1.6, "tau": 1.2})");
    const Outcome o = run_cli("exclude " + (dir / "exp.json").string() + " --out " + (dir / "out").string());
    EXPECT_EQ(o.code, 2);
    EXPECT_NE(o.out.find("tau"), std::string::npos) << o.out;
    EXPECT_EQ(run_cli("exclude " + (dir / "missing.json").string()).code, 4);
}

TEST(CliExclude, UnwritableOutputIsAnIoError) {
    const fs::path dir = scratch("io");
    write(dir / "exp.json", kTinyExperiment);
    write(dir / "blocker", "file, not a directory");
    const Outcome o =
        run_cli("exclude " + (dir / "exp.json").string() + " --out " + (dir / "blocker" / "out").string());
    EXPECT_EQ(o.code, 4) << o.out;
}

TEST(CliExclude, RepeatRunsAreByteIdentical) {
    const fs::path dir = scratch("repeat");
    write(dir / "exp.json", R"({"a0": 1.6, "m0": 6, "epsilon": 0.01, "maxGenerations": 2})");
    for (const char* out : {"one", "two"}) {
        ASSERT_EQ(run_cli("exclude " + (dir / "exp.json").string() + " --out " + (dir / out).string()).code, 0);
    }
    EXPECT_EQ(slurp(dir / "one" / "generations.csv"), slurp(dir / "two" / "generations.csv"));
    EXPECT_EQ(slurp(dir / "one" / "summary.json"), slurp(dir / "two" / "summary.json"));
}

TEST(CliAudit, SubsetAndCorruptedFixtures) {
    const Outcome ok = run_cli("audit --check phase-param --check bound-period");
    EXPECT_EQ(ok.code, 0) << ok.out;
    EXPECT_NE(ok.out.find("bound-period"), std::string::npos);
    EXPECT_EQ(ok.out.find("decay"), std::string::npos);
    EXPECT_EQ(run_cli("audit --check no-such-check").code, 2);

    const fs::path dir = scratch("corrupt");
    for (const char* f : {"returns.json", "runs.json"}) {
        fs::copy_file(fs::path(QUADLAB_FIXTURE_DIR) / f, dir / f);
    }
    auto doc = nlohmann::json::parse(slurp(dir / "returns.json"));
    doc["returns"][0]["checksum"] = doc["returns"][0]["checksum"].get<double>() + 0.5;
    write(dir / "returns.json", doc.dump());
    const Outcome bad = run_cli("audit --fixtures " + dir.string() + " --check phase-param");
    EXPECT_EQ(bad.code, 2) << bad.out;
}
