#include "threatfix/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "threatfix/error.hpp"
#include "threatfix/export.hpp"
#include "threatfix/formula.hpp"
#include "threatfix/model.hpp"
#include "threatfix/repair.hpp"
#include "threatfix/report.hpp"

namespace threatfix {

namespace {

struct Options {
    std::string model;
    std::string rules;
    std::string costs;
    std::string format = "json";
    std::string out;
    unsigned jobs = 1;
    std::uint64_t seed = 0;
    std::optional<std::int64_t> budget;

    // repair
    std::string mode = "partial";
    std::string import_wcnf;
    std::string apply;

    // export (and optionally repair)
    std::string smtlib;
    std::string wcnf;
    std::string smt_mode = "repair";
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UsageError("cannot read '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f || !(f << text)) throw UsageError("cannot write '" + path + "'");
}

// Prefixes diagnostics from a file parser with the file name.
template <typename Fn>
auto with_path(const std::string& path, Fn&& fn) {
    try {
        return fn(read_file(path));
    } catch (const ParseError& e) {
        throw ParseError(path + ":" + e.what());
    } catch (const SchemaError& e) {
        throw SchemaError(path + ": " + e.what());
    } catch (const SortError& e) {
        throw SortError(path + ":" + e.what());
    }
}

std::int64_t default_budget() {
    const char* env = std::getenv("THREATFIX_BUDGET");
    if (env == nullptr || *env == '\0') return kDefaultConflictBudget;
    try {
        std::size_t used = 0;
        const std::int64_t v = std::stoll(env, &used);
        if (used == std::string(env).size()) return v;
    } catch (const std::exception&) {
    }
    throw UsageError(std::string("THREATFIX_BUDGET is not an integer: '") + env + "'");
}

void add_common(CLI::App* cmd, Options& o) {
    cmd->add_option("--model", o.model, "System model (JSON)")->required();
    cmd->add_option("--rules", o.rules, "Threat rules")->required();
    cmd->add_option("--costs", o.costs, "Change costs (CSV item,attribute,from,to,cost)");
    cmd->add_option("--format", o.format, "Report format")->check(CLI::IsMember({"text", "json"}));
    cmd->add_option("--out", o.out, "Write the report here instead of stdout");
    cmd->add_option("--jobs", o.jobs, "Parallel rule checks")->check(CLI::Range(1U, 1024U));
    cmd->add_option("--seed", o.seed, "Solver seed");
    cmd->add_option("--budget", o.budget, "Conflicts per solver call, negative for unlimited");
}

class Runner {
public:
    Runner(const Options& o, std::ostream& out) : o_(o), out_(out) {}

    void load() {
        model_ = with_path(o_.model, [](const std::string& t) { return parse_model(t); });
        if (!o_.costs.empty()) {
            model_ = with_path(o_.costs, [&](const std::string& t) { return load_costs(*model_, t); });
        }
        rules_ = with_path(o_.rules, [](const std::string& t) { return parse_rules(t); });
        config_.conflict_budget = o_.budget ? *o_.budget : default_budget();
        config_.seed = o_.seed;
        config_.jobs = o_.jobs;
    }

    int check(bool explain) {
        const auto checks = threatfix::check(*model_, rules_, config_);
        const bool json = o_.format == "json";
        if (explain) {
            emit(json ? explain_json(*model_, rules_, checks) : explain_text(*model_, rules_, checks));
        } else {
            emit(json ? check_json(*model_, checks) : check_text(*model_, checks));
        }
        bool unknown = false;
        for (const auto& c : checks) {
            if (c.verdict == SatResult::Sat) return kExitThreats;
            unknown = unknown || c.verdict == SatResult::Unknown;
        }
        return unknown ? kExitUnknown : kExitOk;
    }

    int repair() {
        config_.mode = *parse_mode(o_.mode);
        export_artifacts();
        const RepairReport report = o_.import_wcnf.empty()
                                        ? threatfix::repair(*model_, rules_, config_)
                                        : import_wcnf_solution(*model_, rules_, read_file(o_.import_wcnf), config_);
        if (!o_.apply.empty() && report.status == SatResult::Sat) {
            write_file(o_.apply, serialize_model(apply_repair(*model_, report)));
        }
        emit(o_.format == "json" ? repair_json(*model_, report) : repair_text(*model_, report));
        switch (report.status) {
            case SatResult::Sat: return kExitOk;
            case SatResult::Unsat: return kExitThreats;
            case SatResult::Unknown: return kExitUnknown;
        }
        return kExitUnknown;
    }

    int export_only() {
        if (o_.smtlib.empty() && o_.wcnf.empty()) throw UsageError("export needs --smtlib and/or --wcnf");
        export_artifacts();
        return kExitOk;
    }

private:
    void export_artifacts() {
        if (!o_.smtlib.empty()) {
            const SmtMode mode = o_.smt_mode == "check" ? SmtMode::Check : SmtMode::Repair;
            write_file(o_.smtlib, emit_smtlib(*model_, rules_, mode));
        }
        if (!o_.wcnf.empty()) write_file(o_.wcnf, emit_wcnf(*model_, rules_));
    }

    void emit(const std::string& text) {
        if (o_.out.empty()) {
            out_ << text;
        } else {
            write_file(o_.out, text);
        }
    }

    const Options& o_;
    std::ostream& out_;
    std::optional<SystemModel> model_;
    RuleSet rules_;
    EngineConfig config_;
};

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    Options o;
    CLI::App app{"Threat detection and minimum-cost attribute repair for system models", "threatfix"};
    app.require_subcommand(1);

    auto* check = app.add_subcommand("check", "Report the rules that match the model");
    add_common(check, o);
    auto* explain = app.add_subcommand("explain", "Per-rule verdicts, witnesses and translated formulas");
    add_common(explain, o);

    auto* repair = app.add_subcommand("repair", "Compute a minimum-cost attribute repair");
    add_common(repair, o);
    repair->add_option("--mode", o.mode, "Repair mode")->check(CLI::IsMember({"exact", "partial", "heuristic"}));
    repair->add_option("--smtlib", o.smtlib, "Also write the SMT-LIB2 repair script");
    repair->add_option("--wcnf", o.wcnf, "Also write the weighted CNF instance");
    repair->add_option("--import-wcnf", o.import_wcnf,
                       "Read an external MaxSAT solution for the --wcnf instance instead of solving");
    repair->add_option("--apply", o.apply, "Write the repaired model (JSON) here");

    auto* exp = app.add_subcommand("export", "Write solver input files");
    add_common(exp, o);
    exp->add_option("--smtlib", o.smtlib, "SMT-LIB2 script path");
    exp->add_option("--wcnf", o.wcnf, "Weighted CNF path");
    exp->add_option("--smt-mode", o.smt_mode, "SMT-LIB2 script kind")->check(CLI::IsMember({"check", "repair"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e, out, err);
        err << "threatfix: " << e.what() << "\n";
        return kExitUsage;
    }

    try {
        Runner runner(o, out);
        runner.load();
        if (check->parsed()) return runner.check(false);
        if (explain->parsed()) return runner.check(true);
        if (repair->parsed()) return runner.repair();
        return runner.export_only();
    } catch (const Error& e) {
        err << "threatfix: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::bad_alloc&) {
        err << "threatfix: out of memory\n";
        return kExitUsage;
    }
}

}  // namespace threatfix
