#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "support/fixtures.hpp"
#include "threatfix/cli.hpp"
#include "threatfix/model.hpp"

using namespace threatfix;
using nlohmann::json;

namespace {

struct Outcome {
    int code = -1;
    std::string out;
    std::string err;
};

Outcome run(std::vector<std::string> args) {
    args.insert(args.begin(), "threatfix");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out;
    std::ostringstream err;
    Outcome r;
    r.code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

class Cli : public testing::Test {
protected:
    void SetUp() override {
        dir_ = std::filesystem::temp_directory_path() /
               ("threatfix-cli-" + std::to_string(::getpid()) + "-" +
                testing::UnitTest::GetInstance()->current_test_info()->name());
        std::filesystem::create_directories(dir_);
        unsetenv("THREATFIX_BUDGET");
    }
    void TearDown() override {
        std::filesystem::remove_all(dir_);
        unsetenv("THREATFIX_BUDGET");
    }
    std::string tmp(const std::string& name) const { return (dir_ / name).string(); }

    std::filesystem::path dir_;
};

const std::string kSmart = tftest::data_path("smarthome.json");
const std::string kIot = tftest::data_path("iot.tl");
const std::string kMot = tftest::data_path("motivating.json");
const std::string kTwo = tftest::data_path("two.tl");
const std::string kEnc = tftest::data_path("enc.csv");

}  // namespace

TEST_F(Cli, CheckSmartHomeJson) {
    const Outcome r = run({"check", "--model", kSmart, "--rules", kIot, "--format", "json"});
    EXPECT_EQ(r.code, kExitThreats) << r.err;
    const json j = json::parse(r.out);
    EXPECT_EQ(j["status"], "threats");
    bool firewall = false;
    for (const auto& rule : j["rules"]) {
        if (rule["name"] != "firewall-activity-logging") continue;
        firewall = true;
        EXPECT_EQ(rule["witnesses"], json::parse(R"([{"e": "46"}])"));
    }
    EXPECT_TRUE(firewall);
    EXPECT_NE(std::find(j["threats"].begin(), j["threats"].end(), "firewall-activity-logging"), j["threats"].end());
}

TEST_F(Cli, CheckCleanModelExitsZero) {
    std::ofstream(tmp("none.tl")) << "rule cloud : exists element e . type(e) = \"Cloud\"\n";
    const Outcome r = run({"check", "--model", kSmart, "--rules", tmp("none.tl")});
    EXPECT_EQ(r.code, kExitOk) << r.err;
    EXPECT_EQ(json::parse(r.out)["status"], "clean");
}

TEST_F(Cli, RepairMotivatingExact) {
    const Outcome r = run({"repair", "--mode", "exact", "--model", kMot, "--rules", kTwo, "--costs", kEnc});
    ASSERT_EQ(r.code, kExitOk) << r.err;
    const json j = json::parse(r.out);
    EXPECT_EQ(j["status"], "sat");
    EXPECT_EQ(j["mode"], "exact");
    EXPECT_EQ(j["totalCost"], 20);
    ASSERT_EQ(j["changes"].size(), 1U);
    EXPECT_EQ(j["changes"][0], json::parse(R"({"item": "ws", "attribute": "Data Encryption", "from": "None",
                                              "to": "Weak", "cost": 20})"));
    EXPECT_EQ(j["rules"]["repaired"], json::parse(R"(["threat-1"])"));
    EXPECT_EQ(j["rules"]["noThreat"], json::parse(R"(["threat-2"])"));
}

TEST_F(Cli, RepairDefaultsToPartial) {
    const Outcome r = run({"repair", "--model", kSmart, "--rules", kIot});
    ASSERT_EQ(r.code, kExitOk) << r.err;
    const json j = json::parse(r.out);
    EXPECT_EQ(j["mode"], "partial");
    ASSERT_EQ(j["rules"]["unrepairable"].size(), 1U);
    EXPECT_EQ(j["rules"]["unrepairable"][0]["name"], "ip-spoofing");
    EXPECT_EQ(j["rules"]["unrepairable"][0]["witnesses"], json::parse(R"([{"c": "c1", "e1": "2", "e2": "6"}])"));
}

TEST_F(Cli, ExactRepairOfStructuralThreatExitsOne) {
    const Outcome r = run({"repair", "--mode", "exact", "--model", kSmart, "--rules", kIot});
    EXPECT_EQ(r.code, kExitThreats) << r.err;
    EXPECT_EQ(json::parse(r.out)["status"], "unsat");
}

TEST_F(Cli, FractionalCostsPrintAsStrings) {
    std::ofstream(tmp("half.csv")) << "item,attribute,from,to,cost\nws,Data Encryption,None,Weak,3/2\n";
    const Outcome r = run({"repair", "--mode", "exact", "--model", kMot, "--rules", kTwo, "--costs", tmp("half.csv")});
    ASSERT_EQ(r.code, kExitOk) << r.err;
    const json j = json::parse(r.out);
    EXPECT_EQ(j["totalCost"], 1);  // logging Yes->No at the default cost beats 3/2
    std::ofstream(tmp("third.csv")) << "item,attribute,from,to,cost\nws,Data Encryption,None,Weak,1/3\n";
    const Outcome t = run({"repair", "--mode", "exact", "--model", kMot, "--rules", kTwo, "--costs", tmp("third.csv")});
    EXPECT_EQ(json::parse(t.out)["totalCost"], "1/3");
}

TEST_F(Cli, ExportIsDeterministic) {
    for (const char* name : {"a", "b"}) {
        const Outcome r = run({"export", "--model", kMot, "--rules", kTwo, "--costs", kEnc, "--smtlib",
                           tmp(std::string(name) + ".smt2"), "--wcnf", tmp(std::string(name) + ".wcnf")});
        ASSERT_EQ(r.code, kExitOk) << r.err;
    }
    EXPECT_FALSE(slurp(tmp("a.smt2")).empty());
    EXPECT_EQ(slurp(tmp("a.smt2")), slurp(tmp("b.smt2")));
    EXPECT_EQ(slurp(tmp("a.wcnf")), slurp(tmp("b.wcnf")));
}

TEST_F(Cli, WcnfRoundTripThroughImport) {
    ASSERT_EQ(run({"export", "--model", kMot, "--rules", kTwo, "--costs", kEnc, "--wcnf", tmp("m.wcnf")}).code, kExitOk);
    // Hand-written optimum: every cell keeps its value except ws encryption -> Weak.
    const SystemModel m = tftest::motivating_model();
    std::string answer = "o 20\nv";
    int var = 0;
    for (CellId c = 0; c < m.cells().size(); ++c) {
        const bool enc = m.id(m.cells()[c].item) == "ws" && m.meta().attribute(m.cells()[c].attr).name == "Data Encryption";
        const ValueId want = enc ? 1 : m.valuation()[c];
        for (ValueId x = 0; x < m.domain(c).size(); ++x) {
            ++var;
            answer += " " + std::to_string(x == want ? var : -var);
        }
    }
    std::ofstream(tmp("m.sol")) << answer << "\n";
    const Outcome r = run({"repair", "--model", kMot, "--rules", kTwo, "--costs", kEnc, "--import-wcnf", tmp("m.sol")});
    ASSERT_EQ(r.code, kExitOk) << r.err;
    EXPECT_EQ(json::parse(r.out)["totalCost"], 20);
}

TEST_F(Cli, ApplyWritesRepairedModel) {
    const Outcome r = run({"repair", "--model", kSmart, "--rules", kIot, "--apply", tmp("fixed.json")});
    ASSERT_EQ(r.code, kExitOk) << r.err;
    const SystemModel fixed = parse_model(slurp(tmp("fixed.json")));
    const auto cell = *fixed.cell(*fixed.find("46"), *fixed.meta().find_attribute("Activity Logging"));
    EXPECT_EQ(fixed.value_name(cell, fixed.valuation()[cell]), "Yes");
    const Outcome again = run({"check", "--model", tmp("fixed.json"), "--rules", kIot});
    const json j = json::parse(again.out);
    EXPECT_EQ(j["threats"], json::parse(R"(["ip-spoofing"])"));
}

TEST_F(Cli, OutFlagWritesFile) {
    const Outcome r = run({"check", "--model", kSmart, "--rules", kIot, "--out", tmp("report.json")});
    EXPECT_EQ(r.code, kExitThreats);
    EXPECT_TRUE(r.out.empty());
    EXPECT_EQ(json::parse(slurp(tmp("report.json")))["status"], "threats");
}

TEST_F(Cli, UsageErrorsExitTwo) {
    EXPECT_EQ(run({}).code, kExitUsage);
    EXPECT_EQ(run({"check", "--model", kSmart}).code, kExitUsage);
    EXPECT_EQ(run({"repair", "--model", kMot, "--rules", kTwo, "--mode", "greedy"}).code, kExitUsage);
    EXPECT_EQ(run({"check", "--model", kSmart, "--rules", kIot, "--mode", "exact"}).code, kExitUsage);
    EXPECT_EQ(run({"check", "--model", kSmart, "--rules", kIot, "--format", "xml"}).code, kExitUsage);
    EXPECT_EQ(run({"export", "--model", kSmart, "--rules", kIot}).code, kExitUsage);
    const Outcome missing = run({"check", "--model", tmp("nope.json"), "--rules", kIot});
    EXPECT_EQ(missing.code, kExitUsage);
    EXPECT_NE(missing.err.find("nope.json"), std::string::npos);
    EXPECT_EQ(std::count(missing.err.begin(), missing.err.end(), '\n'), 1);
}

TEST_F(Cli, ParseErrorsNameTheFile) {
    std::ofstream(tmp("bad.tl")) << "rule x : exists element e . type(e) = \n";
    const Outcome r = run({"check", "--model", kSmart, "--rules", tmp("bad.tl")});
    EXPECT_EQ(r.code, kExitUsage);
    EXPECT_NE(r.err.find("bad.tl:2:1: "), std::string::npos) << r.err;
    std::ofstream(tmp("bad.json")) << "{\"meta\": ";
    EXPECT_EQ(run({"check", "--model", tmp("bad.json"), "--rules", kIot}).code, kExitUsage);
}

TEST_F(Cli, HelpExitsZero) {
    const Outcome r = run({"--help"});
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("repair"), std::string::npos);
}

TEST_F(Cli, BudgetFromEnvironment) {
    setenv("THREATFIX_BUDGET", "0", 1);
    const Outcome r = run({"repair", "--mode", "exact", "--model", kMot, "--rules", kTwo, "--costs", kEnc});
    EXPECT_EQ(r.code, kExitUnknown) << r.out;
    EXPECT_EQ(json::parse(r.out)["status"], "unknown");
    // The flag wins over the environment.
    const Outcome f = run({"repair", "--mode", "exact", "--model", kMot, "--rules", kTwo, "--costs", kEnc, "--budget", "-1"});
    EXPECT_EQ(f.code, kExitOk);
    setenv("THREATFIX_BUDGET", "lots", 1);
    EXPECT_EQ(run({"check", "--model", kSmart, "--rules", kIot}).code, kExitUsage);
}

TEST_F(Cli, TextAndJsonAgree) {
    const Outcome j = run({"repair", "--model", kSmart, "--rules", kIot});
    const Outcome t = run({"repair", "--model", kSmart, "--rules", kIot, "--format", "text"});
    ASSERT_EQ(j.code, t.code);
    const json report = json::parse(j.out);
    EXPECT_NE(t.out.find("total cost: " + report["totalCost"].dump()), std::string::npos) << t.out;
    for (const auto& c : report["changes"]) {
        const std::string line = c["item"].get<std::string>() + " / " + c["attribute"].get<std::string>() + ": " +
                                 c["from"].get<std::string>() + " -> " + c["to"].get<std::string>();
        EXPECT_NE(t.out.find(line), std::string::npos) << line;
    }
    for (const auto& name : report["rules"]["repaired"]) {
        EXPECT_NE(t.out.find(name.get<std::string>()), std::string::npos);
    }
    EXPECT_NE(t.out.find("c=c1 e1=2 e2=6"), std::string::npos) << t.out;

    const Outcome cj = run({"check", "--model", kSmart, "--rules", kIot});
    const Outcome ct = run({"check", "--model", kSmart, "--rules", kIot, "--format", "text"});
    EXPECT_EQ(cj.code, ct.code);
    for (const auto& name : json::parse(cj.out)["threats"]) {
        EXPECT_NE(ct.out.find("! " + name.get<std::string>() + "\n"), std::string::npos);
    }
}

TEST_F(Cli, ExplainListsEveryRule) {
    const Outcome r = run({"explain", "--model", kSmart, "--rules", kIot});
    EXPECT_EQ(r.code, kExitThreats);
    const json j = json::parse(r.out);
    ASSERT_EQ(j["rules"].size(), tftest::iot_rules().size());
    for (const auto& rule : j["rules"]) {
        if (rule["name"] == "ip-spoofing") EXPECT_FALSE(rule["attributeRepairable"].get<bool>());
        if (rule["name"] == "firewall-activity-logging") EXPECT_TRUE(rule["attributeRepairable"].get<bool>());
    }
}

TEST_F(Cli, JobsAndSeedKeepOutputStable) {
    const Outcome a = run({"repair", "--mode", "heuristic", "--model", kSmart, "--rules", kIot});
    const Outcome b = run({"repair", "--mode", "heuristic", "--model", kSmart, "--rules", kIot, "--jobs", "4"});
    EXPECT_EQ(a.out, b.out);
    EXPECT_EQ(run({"check", "--model", kSmart, "--rules", kIot, "--jobs", "0"}).code, kExitUsage);
}
