#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "echonav/harness.hpp"
#include "echonav/wav.hpp"

namespace fs = std::filesystem;
using namespace echonav;

namespace {

ExperimentConfig load_or_default(const std::string& config_path, bool have_seed, uint64_t seed) {
    ExperimentConfig cfg =
        config_path.empty() ? default_config() : load_config(config_path);
    if (have_seed) cfg.master_seed = seed;
    cfg.validate();
    return cfg;
}

void print_summary(const MetricsSummary& m) {
    std::printf("%-7s %-8s episodes=%-4lld SR=%6.1f  SPL=%6.1f  SNA=%6.1f\n",
                m.scene_split.c_str(), m.sound_split.c_str(),
                static_cast<long long>(m.episodes), m.sr, m.spl, m.sna);
}

int cmd_simulate(const ExperimentConfig& cfg, const std::string& out_dir) {
    fs::create_directories(fs::path(out_dir) / "scenes");
    SceneSet scenes = build_scenes(cfg);
    SoundBank bank = build_bank(cfg);

    for (const auto& s : scenes.train)
        save_scene(s, (fs::path(out_dir) / "scenes" / (s.id + ".json")).string());
    for (const auto& s : scenes.test)
        save_scene(s, (fs::path(out_dir) / "scenes" / (s.id + ".json")).string());
    save_bank(bank, (fs::path(out_dir) / "bank.json").string());
    save_config(cfg, (fs::path(out_dir) / "config.json").string());

    // A short trajectory dump plus one RIR and one source render for inspection.
    Rng rng = Rng(cfg.master_seed).descend("simulate");
    CollectStats stats;
    auto buffer = collect_trajectories(cfg, scenes.train, bank, 4, rng, &stats);
    std::ofstream traj(fs::path(out_dir) / "trajectories.jsonl");
    for (const auto& st : buffer) {
        nlohmann::json j;
        j["scene_id"] = st.key.scene_id;
        j["cell"] = {st.key.cell.x, st.key.cell.y};
        j["heading"] = heading_name(st.key.heading);
        j["class_id"] = st.class_id;
        j["oracle_action"] = action_name(st.oracle_action);
        j["episode"] = st.episode_id;
        j["step"] = st.step_index;
        traj << j.dump() << "\n";
    }
    if (!buffer.empty()) {
        const auto& st = buffer.front();
        const GridScene& scene = scenes.by_id.at(st.key.scene_id);
        Rir rir = compute_rir(scene, {st.key.cell, st.key.heading}, cfg.acoustics,
                              bank.sample_rate);
        dump_rir(rir, (fs::path(out_dir) / "example_rir.json").string());
        SourceWaveform src = generate_sound(bank.by_id(bank.split.heard[0]), bank.sample_rate);
        save_wav((fs::path(out_dir) / "example_source.wav").string(), src.samples,
                 src.sample_rate);
        const int64_t n_pairs = std::min<int64_t>(4, static_cast<int64_t>(buffer.size()));
        PairBatch pairs = mine_pair_batch(buffer, n_pairs, bank.split.heard, rng, scenes.by_id,
                                          cfg.acoustics, cfg.stft, bank,
                                          MiningConfig{cfg.flags.distinct_positions});
        dump_pair_batch(pairs, (fs::path(out_dir) / "example_pair_batch").string());
    }
    std::printf("simulate: %d train + %d test scenes, %zu sound classes, %lld steps dumped to %s\n",
                cfg.scenes.train_count, cfg.scenes.test_count, bank.classes.size(),
                static_cast<long long>(stats.steps), out_dir.c_str());
    return 0;
}

int cmd_train(const ExperimentConfig& cfg, const std::string& out_dir) {
    fs::create_directories(out_dir);
    TrainResult result = train(cfg);
    save_checkpoint(result.checkpoint, (fs::path(out_dir) / "checkpoint.bin").string());
    write_train_metrics(result.metrics, (fs::path(out_dir) / "train_metrics.jsonl").string());
    save_config(cfg, (fs::path(out_dir) / "config.json").string());
    std::printf("train: %lld updates, final bc=%.4f sim=%.4f total=%.4f -> %s\n",
                static_cast<long long>(cfg.train.updates), result.metrics.back().bc_loss,
                result.metrics.back().sim_loss, result.metrics.back().total_loss,
                out_dir.c_str());
    return 0;
}

int cmd_eval(const ExperimentConfig& cfg, const std::string& checkpoint_path,
             const std::string& split, const std::string& out_dir) {
    Checkpoint ck = load_checkpoint(checkpoint_path);
    if (ck.params.dims.input != cfg.input_dim())
        throw std::runtime_error("eval: checkpoint input dim does not match config stft");

    SceneSet scenes = build_scenes(cfg);
    SoundBank bank = build_bank(cfg);

    std::vector<std::pair<bool, bool>> combos;
    if (split == "all") {
        combos = {{false, false}, {false, true}, {true, false}, {true, true}};
    } else {
        auto xpos = split.find('x');
        if (xpos == std::string::npos)
            throw std::runtime_error("eval: split must look like seenxheard or be 'all'");
        std::string scene_part = split.substr(0, xpos);
        std::string sound_part = split.substr(xpos + 1);
        if ((scene_part != "seen" && scene_part != "unseen") ||
            (sound_part != "heard" && sound_part != "unheard"))
            throw std::runtime_error("eval: split must be <seen|unseen>x<heard|unheard>");
        combos = {{scene_part == "unseen", sound_part == "unheard"}};
    }

    std::ofstream out;
    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        out.open(fs::path(out_dir) / "eval_metrics.jsonl");
    }
    for (auto [scene_unseen, sound_unheard] : combos) {
        MetricsSummary m = evaluate(ck.params, cfg, scenes, bank, scene_unseen, sound_unheard);
        print_summary(m);
        if (out) out << metrics_to_json(m) << "\n";
    }
    return 0;
}

int cmd_matrix(const ExperimentConfig& cfg, const std::string& out_dir) {
    MatrixReport report = run_experiment_matrix(cfg, out_dir);
    std::printf("%s\n\n", report.reference_note.c_str());
    for (size_t a = 0; a < report.arms.size(); ++a) {
        std::printf("[%s]\n", report.arms[a].c_str());
        for (const auto& m : report.means[a]) print_summary(m);
    }
    std::printf("\nunseen/unheard SPL delta (ours - baseline): %+.1f\n",
                report.unheard_unseen_spl_delta);
    std::printf("unseen/heard   SPL delta (ours - baseline): %+.1f\n",
                report.heard_unseen_spl_delta);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"echonav: desk-scale binaural audio-goal navigation laboratory"};
    app.require_subcommand(1);

    std::string config_path, out_dir = "out", checkpoint_path, split = "all";
    uint64_t seed = 0;
    bool have_seed = false;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "experiment config JSON");
        sub->add_option("--seed", seed, "override master seed")->each([&](const std::string&) {
            have_seed = true;
        });
    };

    CLI::App* sim = app.add_subcommand("simulate", "dump scenes, sound bank and sample trajectories");
    add_common(sim);
    sim->add_option("--out", out_dir, "output directory");

    CLI::App* tr = app.add_subcommand("train", "train a policy with the configured losses");
    add_common(tr);
    tr->add_option("--out", out_dir, "output directory");

    CLI::App* ev = app.add_subcommand("eval", "evaluate a checkpoint on a split");
    add_common(ev);
    ev->add_option("--checkpoint", checkpoint_path, "checkpoint file")->required();
    ev->add_option("--split", split, "<seen|unseen>x<heard|unheard> or 'all'");
    ev->add_option("--out", out_dir, "output directory (optional)")->default_val("");

    CLI::App* mx = app.add_subcommand("matrix", "baseline-vs-ours comparison across seeds");
    add_common(mx);
    mx->add_option("--out", out_dir, "output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        ExperimentConfig cfg = load_or_default(config_path, have_seed, seed);
        if (sim->parsed()) return cmd_simulate(cfg, out_dir);
        if (tr->parsed()) return cmd_train(cfg, out_dir);
        if (ev->parsed()) return cmd_eval(cfg, checkpoint_path, split, out_dir);
        if (mx->parsed()) return cmd_matrix(cfg, out_dir);
    } catch (const DivergenceError& e) {
        std::cerr << "divergence: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
