use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use neuroq_core::gridworld::{Action, Direction, EnvConfig, Layout, PacmanEnv};
use neuroq_core::ilp::{learn, IlpTask, LearnerConfig};
use neuroq_core::symbolic::parse_rule;
use neuroq_core::trainer::{actions_line, discounted_return, sha256_hex, RunManifest, TrainConfig};

fn neuroq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_neuroq"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn train_writes_one_log_set_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let o = neuroq(&[
        "train",
        "--algo",
        "neuroq",
        "--map",
        "small",
        "--episodes",
        "120",
        "--batch-size",
        "40",
        "--seeds",
        "0,1,2,3,4",
        "--jobs",
        "2",
        "--out",
        path(&out),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let manifest = RunManifest::read(&out).unwrap();
    assert_eq!(manifest.seeds, [0, 1, 2, 3, 4]);
    assert_eq!(manifest.config.episodes, 120);
    for seed in 0..5 {
        let d = out.join(format!("seed_{seed}"));
        for f in [
            "episodes.csv",
            "batches.csv",
            "learner.csv",
            "actions.txt",
            "hypothesis_0.lp",
            "hypothesis_3.lp",
        ] {
            assert!(d.join(f).is_file(), "{f} missing for seed {seed}");
        }
        let episodes = fs::read_to_string(d.join("episodes.csv")).unwrap();
        assert_eq!(
            episodes.lines().next().unwrap(),
            "seed,episode,return,length,outcome"
        );
        assert_eq!(episodes.lines().count(), 121);
        let batches = fs::read_to_string(d.join("batches.csv")).unwrap();
        assert_eq!(
            batches.lines().next().unwrap(),
            "seed,batch,mean_return,total_s,learner_s,reasoner_s,rho,hamming"
        );
    }
}

#[test]
fn usage_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x");
    for args in [
        vec!["train", "--episodes", "5", "--out", path(&out)],
        vec![
            "train",
            "--map",
            "small",
            "--sigma",
            "0",
            "--out",
            path(&out),
        ],
        vec![
            "train",
            "--map",
            "small",
            "--algo",
            "dqn",
            "--out",
            path(&out),
        ],
        vec![
            "train",
            "--map",
            "small",
            "--epsilon",
            "1.5",
            "--out",
            path(&out),
        ],
        vec!["train", "--map", "small"],
        vec!["train", "--map", "no/such/map.lay", "--out", path(&out)],
        vec!["frobnicate"],
    ] {
        let o = neuroq(&args);
        assert_eq!(code(&o), 2, "{args:?}: {}", stderr(&o));
        assert!(!stderr(&o).is_empty());
    }
    assert!(!out.exists());
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("cfg.toml");
    fs::write(
        &file,
        "algorithm = \"approxq\"\nepisodes = 30\nbatch_size = 10\nsigma = 3\nmap = \"small\"\n\n[env]\nmax_steps = 200\n",
    )
    .unwrap();
    let out = dir.path().join("run");
    let o = neuroq(&[
        "train",
        "--config",
        path(&file),
        "--sigma",
        "4",
        "--out",
        path(&out),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let cfg = RunManifest::read(&out).unwrap().config;
    let want = TrainConfig {
        algorithm: neuroq_core::trainer::Algorithm::Approxq,
        episodes: 30,
        batch_size: 10,
        sigma: 4,
        env: EnvConfig {
            max_steps: 200,
            ..EnvConfig::default()
        },
        ..TrainConfig::default()
    };
    assert_eq!(cfg, want);

    fs::write(&file, "episodes = 30\nbogus = 1\n").unwrap();
    let o = neuroq(&[
        "train",
        "--config",
        path(&file),
        "--map",
        "small",
        "--out",
        path(&out),
    ]);
    assert_eq!(code(&o), 2);
}

#[test]
fn rerun_from_manifest_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("a");
    let o = neuroq(&[
        "train",
        "--map",
        "small",
        "--episodes",
        "80",
        "--batch-size",
        "20",
        "--seeds",
        "3,4",
        "--out",
        path(&first),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let second = dir.path().join("b");
    let o = neuroq(&[
        "train",
        "--from-manifest",
        path(&first),
        "--out",
        path(&second),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    for seed in [3, 4] {
        for f in [
            "episodes.csv",
            "actions.txt",
            "hypothesis_4.lp",
            "weights_4.txt",
        ] {
            let a = fs::read(first.join(format!("seed_{seed}")).join(f)).unwrap();
            let b = fs::read(second.join(format!("seed_{seed}")).join(f)).unwrap();
            assert_eq!(a, b, "seed {seed} {f}");
        }
    }
}

#[test]
fn dump_replay_and_missing_batches() {
    let dir = tempfile::tempdir().unwrap();
    let run = dir.path().join("run");
    let o = neuroq(&[
        "train",
        "--map",
        "small",
        "--episodes",
        "100",
        "--batch-size",
        "50",
        "--out",
        path(&run),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));

    let task_file = dir.path().join("dump").join("task_1.lp");
    let o = neuroq(&[
        "dump-ilp",
        "--run",
        path(&run),
        "--batch",
        "1",
        "--out",
        path(&task_file),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = fs::read_to_string(&task_file).unwrap();
    let task = IlpTask::parse(&text).unwrap();
    assert!(text.lines().any(|l| l.starts_with("#example ")));
    assert_eq!(task.space.len(), 391);

    let o = neuroq(&["dump-ilp", "--run", path(&run), "--batch", "9"]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("batch 9"));

    let o = neuroq(&["replay", "--run", path(&run), "--episode", "2"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let frames = String::from_utf8(o.stdout).unwrap();
    assert!(frames.contains('P') && frames.contains("episode 2:"));

    let o = neuroq(&["replay", "--run", path(&run), "--episode", "101"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn validate_map_reports_each_file() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.lay");
    fs::write(&bad, "%%%%\n%P %\n%%%%\n").unwrap();
    let o = neuroq(&["validate-map", "small", "large"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("small: ok 18x9") && text.contains("large: ok 25x26"));
    let o = neuroq(&["validate-map", "small", path(&bad)]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8(o.stdout).unwrap().contains("no food"));
}

const SERPENTINE: &str = "\
%%%%%%%%%%%
%P........%
%%%%%%%%%.%
%.........%
%.%%%%%%%%%
%.........%
%%%%%%%%%%%
";

/// Hand-assembled run directory in which every logged episode steps onto an
/// adjacent pellet; dumping its first batch must yield a task whose optimum
/// is the adjacent-food rule.
#[test]
fn greedy_food_run_dumps_the_adjacent_food_rule() {
    let dir = tempfile::tempdir().unwrap();
    let map = dir.path().join("serpentine.lay");
    fs::write(&map, SERPENTINE).unwrap();
    let run = dir.path().join("run");
    let seed_dir = run.join("seed_0");
    fs::create_dir_all(&seed_dir).unwrap();

    let cfg = TrainConfig {
        map: map.to_str().unwrap().to_owned(),
        episodes: 5,
        batch_size: 5,
        ..TrainConfig::default()
    };
    let layout = Layout::parse(SERPENTINE).unwrap();
    let env = PacmanEnv::new(std::sync::Arc::new(layout), cfg.env);
    let mut lines = String::new();
    let mut best = Vec::new();
    for episode in 1..=5 {
        let mut rng = neuroq_core::trainer::episode_rng(0, episode);
        let mut s = env.reset();
        let (mut acts, mut rewards) = (Vec::new(), Vec::new());
        while s.is_running() {
            let legal = env.legal_actions(&s);
            let Some(a) = Direction::ALL
                .iter()
                .map(|&d| Action::from_direction(d))
                .find(|&a| legal.contains(a) && s.food.contains(s.agent.offset(a.delta())))
            else {
                break;
            };
            let tr = env.step(&s, a, &mut rng);
            acts.push(a);
            rewards.push(tr.reward);
            s = tr.state;
        }
        lines.push_str(&actions_line(&acts));
        lines.push('\n');
        best.push((episode, discounted_return(&rewards, cfg.gamma)));
    }
    fs::write(seed_dir.join("actions.txt"), lines).unwrap();
    let eps: Vec<String> = best.iter().map(|(e, _)| e.to_string()).collect();
    let rets: Vec<String> = best.iter().map(|(_, r)| format!("{r:?}")).collect();
    fs::write(
        seed_dir.join("learner.csv"),
        format!(
            "seed,batch,after_episode,best_episodes,best_returns,examples,merged_examples,candidates,score,nodes,exhaustive,seconds\n\
             0,1,5,{},{},0,0,0,0,0,true,0\n",
            eps.join(" "),
            rets.join(" ")
        ),
    )
    .unwrap();
    let manifest = RunManifest {
        config: cfg,
        map_sha256: sha256_hex(SERPENTINE.as_bytes()),
        code_version: "test".into(),
        seeds: vec![0],
        out_dir: run.clone(),
    };
    manifest.write(&run).unwrap();

    let o = neuroq(&["dump-ilp", "--run", path(&run), "--batch", "1"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let task = IlpTask::parse(&String::from_utf8(o.stdout).unwrap()).unwrap();
    assert!(!task.examples.is_empty());
    let res = learn(&task.space, &task.examples, &LearnerConfig::default()).unwrap();
    let want = parse_rule("move(Dir) :- food_dist_leq(Dir,Dist,1).").unwrap();
    assert_eq!(res.hypothesis.rules(), [want]);
}
