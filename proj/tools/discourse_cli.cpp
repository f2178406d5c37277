#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "discourse/corpus.hpp"
#include "discourse/gateway/backend.hpp"
#include "discourse/pipeline.hpp"

namespace dp = discourse::pipeline;

namespace {

constexpr int kExitFatal = 1;
constexpr int kExitConfig = 2;
constexpr int kExitPrerequisite = 3;

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Talking points, prominent themes and partisan perspectives from a bias-coded news corpus."};
    app.set_version_flag("--version", "discourse 0.1.0");

    std::string command;
    std::string config_path;
    std::optional<std::string> event, issue, backend, output_dir;
    std::optional<std::uint64_t> seed;
    std::optional<double> membership_threshold;
    std::vector<std::string> overrides;

    app.add_option("command", command, "ingest | extract | cluster | perspectives | evaluate | snapshot | "
                                       "export-finetune | all")
        ->required()
        ->check(CLI::IsMember({"ingest", "extract", "cluster", "perspectives", "evaluate", "snapshot",
                               "export-finetune", "all"}));
    app.add_option("--config", config_path, "key = value configuration file")->required();
    app.add_option("--event", event, "only this event id");
    app.add_option("--issue", issue, "only events of this issue");
    app.add_option("--backend", backend, "model backend")->check(CLI::IsMember({"live", "mock"}));
    app.add_option("--seed", seed, "seed for placeholder order and sampling");
    app.add_option("--membership-threshold", membership_threshold, "cosine cut for PTP membership")
        ->check(CLI::Range(0.0, 1.0));
    app.add_option("--output-dir", output_dir, "artifact directory");
    app.add_option("--set", overrides, "override any config key, as key=value");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        auto config = dp::load_config(config_path);
        for (const auto& o : overrides) {
            const auto eq = o.find('=');
            if (eq == std::string::npos) throw dp::ConfigError("--set: expected key=value, got '" + o + "'");
            dp::apply_setting(config, o.substr(0, eq), o.substr(eq + 1), std::filesystem::current_path());
        }
        if (event) config.event = *event;
        if (issue) config.issue = *issue;
        if (backend) config.backend = *backend;
        if (output_dir) config.output_dir = *output_dir;
        if (seed) config.seed = *seed;
        if (membership_threshold) config.membership_threshold = *membership_threshold;
        config.validate();

        dp::Runner runner(config, dp::make_backends(config));
        const auto outcomes = runner.run(dp::expand_command(command), &std::cout);
        std::size_t diagnostics = 0;
        for (const auto& o : outcomes) diagnostics += o.diagnostics;
        if (diagnostics > 0)
            std::cerr << diagnostics << " diagnostics recorded under " << config.output_dir.string()
                      << "/**/diagnostics/\n";
        return 0;
    } catch (const dp::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const dp::MissingPrerequisite& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitPrerequisite;
    } catch (const discourse::gateway::AuthenticationError& e) {
        std::cerr << "authentication failed: " << e.what() << '\n';
        return kExitFatal;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitFatal;
    }
}
