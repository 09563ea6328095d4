use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::sync::Arc;

use neuroq_core::gridworld::PacmanEnv;
use neuroq_core::trainer::{
    discounted_return, read_actions, reconstruct_task, replay_episode, run_training_on, seed_dir,
    write_seed_logs, MapSource, RunManifest,
};
use rayon::prelude::*;

use crate::args::{DumpArgs, ReplayArgs, TrainArgs, ValidateArgs};
use crate::CliError;

pub fn train(args: &TrainArgs) -> Result<(), CliError> {
    let plan = args.plan()?;
    let map = MapSource::load(&plan.config.map).map_err(|e| CliError::Usage(e.to_string()))?;
    for w in plan.config.validate().unwrap_or_default() {
        eprintln!("warning: {w}");
    }
    let manifest = RunManifest::new(
        plan.config.clone(),
        &map,
        plan.seeds.clone(),
        plan.out.clone(),
    );
    manifest.write(&plan.out)?;

    let layout = Arc::new(map.layout);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(plan.jobs)
        .build()
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    let results: Vec<Result<String, CliError>> = pool.install(|| {
        manifest
            .seeds
            .par_iter()
            .map(|&seed| {
                let log = run_training_on(&manifest.config_for(seed), layout.clone())?;
                let dir = write_seed_logs(&plan.out, &log)?;
                let last = log.batches.last().map_or(0.0, |b| b.mean_return);
                let rules = log.final_hypothesis.as_ref().map_or(0, |h| h.rules().len());
                Ok(format!(
                    "seed {seed}: {} episodes, last batch mean return {last:.3}, {rules} rules -> {}",
                    log.episodes.len(),
                    dir.display()
                ))
            })
            .collect()
    });
    let mut failed = None;
    for r in results {
        match r {
            Ok(line) => println!("{line}"),
            Err(e) => {
                eprintln!("error: {e}");
                failed.get_or_insert(e);
            }
        }
    }
    failed.map_or(Ok(()), Err)
}

pub fn dump_ilp(args: &DumpArgs) -> Result<(), CliError> {
    let task = reconstruct_task(&args.run, args.seed, args.batch)?;
    match &args.out {
        Some(path) => {
            if let Some(parent) = path.parent() {
                fs::create_dir_all(parent)?;
            }
            fs::write(path, task.to_string())?;
            eprintln!(
                "{} rules, {} examples -> {}",
                task.space.len(),
                task.examples.len(),
                path.display()
            );
        }
        None => emit(&task.to_string())?,
    }
    Ok(())
}

pub fn replay(args: &ReplayArgs) -> Result<(), CliError> {
    let manifest = RunManifest::read(&args.run)?;
    let cfg = manifest.config_for(args.seed);
    let map = manifest.load_map()?;
    let actions = read_actions(&seed_dir(&args.run, args.seed))?;
    let acts = args
        .episode
        .checked_sub(1)
        .and_then(|i| actions.get(i))
        .ok_or_else(|| CliError::Runtime(format!("episode {} was not logged", args.episode)))?;
    let env = PacmanEnv::new(Arc::new(map.layout), cfg.env);
    let steps = replay_episode(&env, args.seed, args.episode, acts)?;

    let mut text = String::new();
    if !args.last {
        text.push_str(&env.render(&env.reset()));
    }
    let mut rewards = Vec::with_capacity(steps.len());
    for (t, (_, a, tr)) in steps.iter().enumerate() {
        rewards.push(tr.reward);
        if !args.last || t + 1 == steps.len() {
            let _ = writeln!(text, "t={} action={a} reward={}", t + 1, tr.reward);
            let _ = write!(text, "{}", env.render(&tr.state));
        }
    }
    let outcome = steps.last().map(|(_, _, tr)| tr.state.terminal);
    let _ = writeln!(
        text,
        "episode {}: {} steps, return {:.3}, end {:?}",
        args.episode,
        steps.len(),
        discounted_return(&rewards, cfg.gamma),
        outcome
    );
    emit(&text)
}

/// Writes to stdout; a reader that hangs up early (`| head`) is not an error.
fn emit(text: &str) -> Result<(), CliError> {
    match io::stdout().lock().write_all(text.as_bytes()) {
        Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

pub fn validate_map(args: &ValidateArgs) -> Result<(), CliError> {
    let mut bad = 0;
    for name in &args.maps {
        match MapSource::load(name) {
            Ok(m) => {
                let l = &m.layout;
                println!(
                    "{name}: ok {}x{}, {} food, {} capsules, {} ghosts, sha256 {}",
                    l.width,
                    l.height,
                    l.food.len(),
                    l.capsules.len(),
                    l.ghost_starts.len(),
                    m.sha256()
                );
            }
            Err(e) => {
                println!("{name}: invalid: {e}");
                bad += 1;
            }
        }
    }
    if bad > 0 {
        return Err(CliError::Runtime(format!(
            "{bad} of {} maps invalid",
            args.maps.len()
        )));
    }
    Ok(())
}
