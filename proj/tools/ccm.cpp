// Command-line front end: one subcommand per experiment kind plus a scaling
// sweep.  Flags override values from --config; unrecognized knobs go through
// --set key=value into the experiment's params object.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "ccm/core.hpp"
#include "ccm/harness.hpp"

using nlohmann::json;

namespace {

std::size_t default_workers() {
    if (const char* env = std::getenv("CCM_WORKERS")) {
        char* end = nullptr;
        long v = std::strtol(env, &end, 10);
        if (end != env && v > 0) return static_cast<std::size_t>(v);
    }
    return 1;
}

json parse_value(const std::string& text) {
    json v = json::parse(text, nullptr, false);
    if (v.is_discarded()) return json(text);  // bare string
    return v;
}

struct CommonFlags {
    std::string config_path;
    std::string output_path;
    std::vector<std::string> sets;
    long long trials = -1;
    long long seed = -1;
    long long workers = -1;
    bool no_wall = false;
};

void add_common(CLI::App* cmd, CommonFlags& fl) {
    cmd->add_option("--config", fl.config_path, "JSON config file (flags override it)");
    cmd->add_option("--trials", fl.trials, "number of trials");
    cmd->add_option("--seed", fl.seed, "root RNG seed");
    cmd->add_option("--workers", fl.workers, "worker threads (default: CCM_WORKERS or 1)");
    cmd->add_option("--output", fl.output_path, "write per-trial JSONL here");
    cmd->add_option("--set", fl.sets, "extra param as key=value (value parsed as JSON)")
        ->take_all();
    cmd->add_flag("--no-wall", fl.no_wall, "omit wall-clock fields for byte-stable output");
}

ccm::ExperimentConfig build_config(const std::string& kind, const CommonFlags& fl) {
    json base = json::object();
    if (!fl.config_path.empty()) {
        std::ifstream in(fl.config_path);
        if (!in) throw std::runtime_error("cannot open config file: " + fl.config_path);
        in >> base;
    }
    if (!base.contains("kind")) base["kind"] = kind;
    ccm::ExperimentConfig cfg = ccm::ExperimentConfig::from_json(base);
    cfg.kind = kind;  // the subcommand wins
    if (fl.trials >= 0) cfg.trials = static_cast<std::size_t>(fl.trials);
    if (fl.seed >= 0) cfg.seed = static_cast<std::uint64_t>(fl.seed);
    cfg.workers = fl.workers > 0 ? static_cast<std::size_t>(fl.workers)
                                 : (base.contains("workers") ? cfg.workers : default_workers());
    if (!fl.output_path.empty()) cfg.output_path = fl.output_path;
    for (const std::string& kv : fl.sets) {
        auto eq = kv.find('=');
        if (eq == std::string::npos || eq == 0)
            throw std::runtime_error("--set expects key=value, got: " + kv);
        cfg.params[kv.substr(0, eq)] = parse_value(kv.substr(eq + 1));
    }
    return cfg;
}

int run_kind(const std::string& kind, const CommonFlags& fl) {
    ccm::ExperimentConfig cfg = build_config(kind, fl);
    ccm::ExperimentResult res = ccm::run_experiment(cfg, !fl.no_wall);
    if (cfg.output_path.empty())
        std::cout << res.jsonl;
    else
        std::cout << json{{"summary", res.summary}}.dump() << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"online-tampering experiment driver"};
    app.require_subcommand(1);

    static const char* kinds[] = {"tamper",    "oracle-check", "reduce-l1", "gauss-l2",
                                  "sphere",    "mcdiarmid",    "cointoss",  "lowerbound"};
    std::vector<std::pair<std::string, CommonFlags>> cmds;
    cmds.reserve(std::size(kinds) + 1);
    for (const char* kind : kinds) {
        cmds.emplace_back(kind, CommonFlags{});
        add_common(app.add_subcommand(kind, std::string("run ") + kind + " trials"),
                   cmds.back().second);
    }

    cmds.emplace_back("sweep", CommonFlags{});
    CommonFlags& sweep_fl = cmds.back().second;
    std::vector<std::size_t> sweep_ns;
    std::string sweep_kind = "tamper";
    CLI::App* sweep = app.add_subcommand("sweep", "budget scaling across n");
    add_common(sweep, sweep_fl);
    sweep->add_option("--n", sweep_ns, "at least 3 distinct n values")->required()->take_all();
    sweep->add_option("--kind", sweep_kind, "experiment kind to sweep (default tamper)");

    CLI11_PARSE(app, argc, argv);

    try {
        for (std::size_t i = 0; i < std::size(kinds); ++i)
            if (app.get_subcommand(kinds[i])->parsed()) return run_kind(kinds[i], cmds[i].second);
        if (sweep->parsed()) {
            ccm::ExperimentConfig base = build_config(sweep_kind, sweep_fl);
            ccm::SweepReport report = ccm::scaling_sweep(base, sweep_ns, !sweep_fl.no_wall);
            std::string text = report.to_json().dump();
            std::cout << text << '\n';
            if (!base.output_path.empty()) {
                std::ofstream out(base.output_path);
                out << text << '\n';
            }
            return 0;
        }
    } catch (const ccm::ContractViolation& e) {
        std::cerr << "contract violation: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
