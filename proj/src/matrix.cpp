#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "echonav/harness.hpp"

namespace echonav {

using json = nlohmann::json;

namespace {

const char* kReferenceNote =
    "Published full-scale results for this regularizer (AV-NAV on Replica: SPL 38.2 -> 51.4; "
    "AV-WaN on MP3D: SPL 36.2 -> 48.4) require SoundSpaces rendering, the Replica/MP3D scans "
    "and RL training, and are not reproducible in this desk-scale substitute. The comparison "
    "below checks the direction of the unheard-sound effect only.";

ExperimentConfig arm_config(const ExperimentConfig& base, const std::string& arm,
                            uint64_t seed) {
    ExperimentConfig cfg = base;
    cfg.master_seed = seed;
    if (arm == "baseline") {
        cfg.flags.contrast_on = false;
        cfg.flags.reverse_on = false;
        cfg.flags.mixup_on = false;
    } else if (arm == "ours") {
        cfg.flags.contrast_on = true;
        cfg.flags.reverse_on = true;
        cfg.flags.mixup_on = true;
    } else if (arm == "contrast_only") {
        cfg.flags.contrast_on = true;
        cfg.flags.reverse_on = false;
        cfg.flags.mixup_on = false;
    } else if (arm == "augment_only") {
        cfg.flags.contrast_on = false;
        cfg.flags.reverse_on = true;
        cfg.flags.mixup_on = true;
    } else {
        throw std::runtime_error("unknown arm '" + arm + "'");
    }
    return cfg;
}

json summary_to_json(const MetricsSummary& m) {
    return json{{"scene_split", m.scene_split}, {"sound_split", m.sound_split},
                {"episodes", m.episodes},       {"sr", m.sr},
                {"spl", m.spl},                 {"sna", m.sna},
                {"seed", m.seed}};
}

} // namespace

MatrixReport run_experiment_matrix(const ExperimentConfig& cfg, const std::string& out_dir) {
    cfg.validate();
    namespace fs = std::filesystem;
    if (!out_dir.empty()) fs::create_directories(fs::path(out_dir) / "runs");

    MatrixReport report;
    report.reference_note = kReferenceNote;
    report.arms = {"baseline", "ours"};
    if (cfg.matrix.ablations) {
        report.arms.push_back("contrast_only");
        report.arms.push_back("augment_only");
    }
    for (int i = 0; i < cfg.matrix.seeds; ++i)
        report.seeds.push_back(cfg.master_seed + static_cast<uint64_t>(i));

    const bool split_flags[4][2] = {{false, false}, {false, true}, {true, false}, {true, true}};

    for (const auto& arm : report.arms) {
        for (uint64_t seed : report.seeds) {
            ExperimentConfig run_cfg = arm_config(cfg, arm, seed);
            TrainResult trained = train(run_cfg);

            if (!out_dir.empty()) {
                fs::path run_dir =
                    fs::path(out_dir) / "runs" / (arm + "_seed" + std::to_string(seed));
                fs::create_directories(run_dir);
                save_checkpoint(trained.checkpoint, (run_dir / "checkpoint.bin").string());
                write_train_metrics(trained.metrics, (run_dir / "train_metrics.jsonl").string());
            }

            SceneSet scenes = build_scenes(run_cfg);
            SoundBank bank = build_bank(run_cfg);
            ArmResult res;
            res.arm = arm;
            res.seed = seed;
            for (const auto& f : split_flags)
                res.splits.push_back(
                    evaluate(trained.checkpoint.params, run_cfg, scenes, bank, f[0], f[1]));
            report.runs.push_back(std::move(res));
        }
    }

    // Mean over seeds per arm and split.
    for (const auto& arm : report.arms) {
        std::vector<MetricsSummary> means(4);
        for (int s = 0; s < 4; ++s) {
            MetricsSummary mean;
            mean.scene_split = split_flags[s][0] ? "unseen" : "seen";
            mean.sound_split = split_flags[s][1] ? "unheard" : "heard";
            mean.seed = cfg.master_seed;
            int n = 0;
            for (const auto& run : report.runs) {
                if (run.arm != arm) continue;
                mean.sr += run.splits[s].sr;
                mean.spl += run.splits[s].spl;
                mean.sna += run.splits[s].sna;
                mean.episodes += run.splits[s].episodes;
                ++n;
            }
            mean.sr /= n;
            mean.spl /= n;
            mean.sna /= n;
            means[s] = mean;
        }
        report.means.push_back(std::move(means));
    }

    // Split index 3 = unseen/unheard, index 2 = unseen/heard.
    const auto& baseline = report.means[0];
    const auto& ours = report.means[1];
    report.unheard_unseen_spl_delta = ours[3].spl - baseline[3].spl;
    report.heard_unseen_spl_delta = ours[2].spl - baseline[2].spl;

    if (!out_dir.empty()) write_matrix_report(report, out_dir);
    return report;
}

void write_matrix_report(const MatrixReport& report, const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);

    json j;
    j["reference_note"] = report.reference_note;
    j["arms"] = report.arms;
    j["seeds"] = report.seeds;
    j["runs"] = json::array();
    for (const auto& run : report.runs) {
        json jr;
        jr["arm"] = run.arm;
        jr["seed"] = run.seed;
        jr["splits"] = json::array();
        for (const auto& s : run.splits) jr["splits"].push_back(summary_to_json(s));
        j["runs"].push_back(jr);
    }
    j["means"] = json::array();
    for (size_t a = 0; a < report.arms.size(); ++a) {
        json ja;
        ja["arm"] = report.arms[a];
        ja["splits"] = json::array();
        for (const auto& s : report.means[a]) ja["splits"].push_back(summary_to_json(s));
        j["means"].push_back(ja);
    }
    j["unheard_unseen_spl_delta"] = report.unheard_unseen_spl_delta;
    j["heard_unseen_spl_delta"] = report.heard_unseen_spl_delta;

    std::ofstream out(fs::path(out_dir) / "matrix_report.json");
    if (!out) throw std::runtime_error("write_matrix_report: cannot write report json");
    out << j.dump(2) << "\n";

    std::ofstream txt(fs::path(out_dir) / "matrix_report.txt");
    txt << report.reference_note << "\n\n";
    txt << "arm            scene   sound    SR      SPL     SNA   (mean over " << report.seeds.size()
        << " seeds)\n";
    char line[160];
    for (size_t a = 0; a < report.arms.size(); ++a)
        for (const auto& s : report.means[a]) {
            std::snprintf(line, sizeof(line), "%-14s %-7s %-8s %6.1f  %6.1f  %6.1f\n",
                          report.arms[a].c_str(), s.scene_split.c_str(), s.sound_split.c_str(),
                          s.sr, s.spl, s.sna);
            txt << line;
        }
    txt << "\nunseen-scene unheard-sound SPL delta (ours - baseline): "
        << report.unheard_unseen_spl_delta << "\n";
    txt << "unseen-scene heard-sound SPL delta (ours - baseline): "
        << report.heard_unseen_spl_delta << "\n";
}

} // namespace echonav
