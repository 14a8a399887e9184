#include "support.hpp"

#include "sorted_effects/cli/options.hpp"
#include "sorted_effects/cli/run.hpp"
#include "sorted_effects/cli/synth.hpp"
#include "sorted_effects/cli/table_io.hpp"
#include "sorted_effects/error.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

using namespace sorted_effects;
using namespace sorted_effects::cli;
namespace fs = std::filesystem;

namespace {

int invoke(std::vector<std::string> args, std::string* out = nullptr, std::string* err = nullptr) {
    args.insert(args.begin(), "sorted_effects");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream o, e;
    const int code = cli_main(static_cast<int>(argv.size()), argv.data(), o, e);
    if (out) *out = o.str();
    if (err) *err = e.str();
    return code;
}

}  // namespace

TEST_CASE("csv parsing") {
    const auto t = parse_csv("a,b,\"c d\"\r\n1, 2 ,\"x,y\"\n\nNA,,\"he said \"\"hi\"\"\"\n");
    CHECK(t.header == std::vector<std::string>{"a", "b", "c d"});
    REQUIRE(t.rows.size() == 2);
    CHECK(*t.rows[0][1] == "2");
    CHECK(*t.rows[0][2] == "x,y");
    CHECK_FALSE(t.rows[1][0].has_value());
    CHECK_FALSE(t.rows[1][1].has_value());
    CHECK(*t.rows[1][2] == "he said \"hi\"");
    CHECK_THROWS_AS(parse_csv("a,b\n1\n"), Error);
    CHECK_THROWS_AS(parse_csv("a,a\n1,2\n"), Error);
    CHECK_THROWS_AS(parse_csv("a\n\"open\n"), Error);
}

TEST_CASE("csv to dataset: factors, missing values, numbers") {
    const auto t = parse_csv("y,mode,w\n1,bus,1\n2,train,2\n3,bike,1\nNA,bus,1\n");
    ColumnSchema schema;
    schema.factors = {"mode"};
    schema.weight = "w";
    CHECK_THROWS_AS(table_to_dataset(t, schema, false, nullptr), Error);
    std::vector<std::string> warnings;
    const Dataset d = table_to_dataset(t, schema, true, &warnings);
    CHECK(d.rows() == 3);
    CHECK(warnings == std::vector<std::string>{"dropped 1 row with missing values"});
    CHECK(d.column("mode").levels == std::vector<std::string>{"bus", "train", "bike"});
    CHECK(d.sampling_weights() == Eigen::Vector3d(1, 2, 1));
    CHECK_THROWS_AS(table_to_dataset(parse_csv("y\nabc\n"), {}, false, nullptr), Error);
    ColumnSchema unknown;
    unknown.factors = {"nope"};
    CHECK_THROWS_AS(table_to_dataset(t, unknown, true, nullptr), Error);
}

TEST_CASE("number formatting") {
    CHECK(format_number(0.1234567) == "0.123457");
    CHECK(format_number(-0.0) == "0");
    CHECK(format_number(std::numeric_limits<double>::quiet_NaN()) == "NA");
    CHECK(format_number(std::numeric_limits<double>::infinity()) == "Inf");
    CHECK(csv_cell("a,b") == "\"a,b\"");
}

TEST_CASE("grid and list options") {
    CHECK(parse_grid("1:9/10").size() == 9);
    CHECK(parse_grid("1:9/10")[2] == 0.3);
    CHECK(parse_grid("0.1, 0.5,0.9") == std::vector<double>{0.1, 0.5, 0.9});
    CHECK(parse_grid("2:98/100").size() == 97);
    CHECK_THROWS_AS(parse_grid("9:1/10"), Error);
    CHECK_THROWS_AS(parse_grid("a:b"), Error);
    CHECK_FALSE(parse_optional_grid("none").has_value());
    CHECK(split_list("a, b c") == std::vector<std::string>{"a", "b", "c"});
}

TEST_CASE("subgroup expressions") {
    Dataset d;
    d.add_numeric("age", {25, 35, 45, 55});
    d.add_numeric("female", {1, 0, 1, 1});
    d.add_factor("ms", {"single", "married", "married", "single"});
    CHECK(parse_subgroup("female == 1 & age < 50", d) == RowMask{true, false, true, false});
    CHECK(parse_subgroup("ms == \"married\"", d) == RowMask{false, true, true, false});
    CHECK(parse_subgroup("ms != married & age >= 45", d) == RowMask{false, false, false, true});
    CHECK_THROWS_AS(parse_subgroup("ms < married", d), Error);
    CHECK_THROWS_AS(parse_subgroup("ms == widowed", d), Error);
    CHECK_THROWS_AS(parse_subgroup("height > 3", d), Error);
    CHECK_THROWS_AS(parse_subgroup("age >", d), Error);
}

TEST_CASE("synthetic designs") {
    const Dataset lin = synth("linear", 100, 3);
    for (double v : lin.column("true_pe").values) CHECK(v == 0.5);
    CHECK(dataset_csv(synth("logit-het", 50, 7)) == dataset_csv(synth("logit-het", 50, 7)));
    CHECK(dataset_csv(synth("logit-het", 50, 7)) != dataset_csv(synth("logit-het", 50, 8)));
    CHECK_THROWS_AS(synth("nope", 10, 1), Error);
    const auto round = table_to_dataset(parse_csv(dataset_csv(lin)), {}, false, nullptr);
    CHECK(round.column("x1").values == lin.column("x1").values);
}

TEST_CASE("command line errors map to categories") {
    std::string out, err;
    CHECK(invoke({"spe", "--data", "/nonexistent.csv", "--fm", "y ~ x", "--var", "x"}, &out, &err) ==
          exit_code(ErrorCategory::io));
    CHECK(nlohmann::json::parse(err)["error"]["category"] == "io");
    CHECK(invoke({"spe", "--fm", "y ~ x"}, &out, &err) == exit_code(ErrorCategory::config));
    CHECK(invoke({"bogus"}, &out, &err) == exit_code(ErrorCategory::config));
    CHECK(invoke({"--help"}, &out, &err) == 0);
    CHECK(out.find("spe") != std::string::npos);

    const auto dir = testing_support::scratch_dir("cli_errors");
    const auto csv = (dir / "d.csv").string();
    write_file(csv, "y,x\n1,2\n2,3\n4,4\n");
    CHECK(invoke({"spe", "--data", csv, "--fm", "y ~ x +", "--var", "x", "--out-dir", dir.string()}, &out, &err) ==
          exit_code(ErrorCategory::formula));
    CHECK(invoke({"spe", "--data", csv, "--fm", "y ~ x", "--var", "x", "--var-type", "binary", "--out-dir",
                  dir.string()},
                 &out, &err) != 0);
}

TEST_CASE("spe end to end on synthetic data") {
    const auto dir = testing_support::scratch_dir("cli_spe");
    const auto csv = (dir / "lh.csv").string();
    CHECK(invoke({"synth", "--dgp", "logit-het", "--n", "400", "--seed", "3", "-o", csv}) == 0);
    const auto out = (dir / "out").string();
    REQUIRE(invoke({"spe", "--data", csv, "--fm", "y ~ d * x", "--method", "logit", "--var", "d", "-b", "50",
                    "--out-dir", out}) == 0);
    for (const char* f : {"spe.csv", "ape.csv", "spe.json", "spe.svg", "meta.json"}) CHECK(fs::exists(fs::path(out) / f));
    const auto j = nlohmann::json::parse(read_file(out + "/spe.json"));
    CHECK(j["us"].size() == 9);
    CHECK(j["replicates"] == 50);
    const auto t = parse_csv(read_file(out + "/spe.csv"));
    CHECK(t.header == std::vector<std::string>{"u", "est", "se", "plb", "pub", "ulb", "uub"});
    CHECK(t.rows.size() == 9);
}

TEST_CASE("ca and subpop end to end") {
    const auto dir = testing_support::scratch_dir("cli_ca");
    const auto csv = (dir / "lh.csv").string();
    write_file(csv, dataset_csv(synth("logit-het", 400, 4)));
    const std::vector<std::string> common{"--data", csv, "--fm", "y ~ d * x", "--method", "logit", "--var", "d",
                                          "-b", "40"};
    auto with = [&](std::vector<std::string> head, std::vector<std::string> tail) {
        head.insert(head.end(), common.begin(), common.end());
        head.insert(head.end(), tail.begin(), tail.end());
        return head;
    };
    const auto d1 = (dir / "m").string(), d2 = (dir / "d").string(), d3 = (dir / "s").string();
    REQUIRE(invoke(with({"ca"}, {"--t", "y,x", "--cl", "diff", "--out-dir", d1})) == 0);
    const auto m = parse_csv(read_file(d1 + "/ca_moments.csv"));
    CHECK(m.header.front() == "variable");
    CHECK(m.rows.size() == 2);
    REQUIRE(invoke(with({"ca"}, {"--t", "x", "--interest", "dist", "--out-dir", d2})) == 0);
    CHECK(fs::exists(fs::path(d2) / "ca_dist_x.svg"));
    REQUIRE(invoke(with({"subpop"}, {"--varx", "x", "--vary", "y", "--out-dir", d3})) == 0);
    for (const char* f : {"subpop_members_most.csv", "subpop_members_least.csv", "subpop_sets.csv", "subpop_stats.csv",
                          "subpop_proj.svg", "subpop.json"}) {
        CHECK(fs::exists(fs::path(d3) / f));
    }
    const auto sets = parse_csv(read_file(d3 + "/subpop_sets.csv"));
    CHECK(sets.rows.size() == 400);
}
