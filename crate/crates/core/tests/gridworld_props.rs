use std::sync::Arc;

use neuroq_core::gridworld::{
    bundled, ghost_policy, Action, Direction, EnvConfig, GameState, GhostState, Layout, PacmanEnv,
    Pos, Terminal, Transition,
};
use proptest::prelude::*;
use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn small_env() -> PacmanEnv {
    PacmanEnv::new(
        Arc::new(Layout::parse(bundled("small").unwrap()).unwrap()),
        EnvConfig::default(),
    )
}

/// Plays uniformly random legal actions until the episode ends.
fn random_episode(env: &PacmanEnv, seed: u64) -> Vec<(GameState, Action, Transition)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut s = env.reset();
    let mut out = Vec::new();
    loop {
        let legal: Vec<Action> = env.legal_actions(&s).iter().collect();
        let a = *legal.choose(&mut rng).unwrap();
        let tr = env.step(&s, a, &mut rng);
        let done = tr.done;
        let next = tr.state.clone();
        out.push((s, a, tr));
        if done {
            return out;
        }
        s = next;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn rewards_decompose_into_events(seed in any::<u64>()) {
        let env = small_env();
        let ep = random_episode(&env, seed);
        let total: f64 = ep.iter().map(|(_, _, t)| t.reward).sum();
        let food = ep.iter().filter(|(_, _, t)| t.food_eaten).count() as f64;
        let ghosts: f64 = ep.iter().map(|(_, _, t)| t.ghosts_eaten as f64).sum();
        let end = &ep.last().unwrap().2.state;
        let won = (end.terminal == Terminal::Won) as u8 as f64;
        let lost = (end.terminal == Terminal::Lost) as u8 as f64;
        let expected = 10.0 * food + 200.0 * ghosts - ep.len() as f64 + 500.0 * won - 500.0 * lost;
        prop_assert_eq!(total, expected);
    }

    #[test]
    fn food_never_grows(seed in any::<u64>()) {
        let env = small_env();
        let mut prev = env.reset().food.len();
        for (_, _, t) in random_episode(&env, seed) {
            let now = t.state.food.len();
            prop_assert!(now <= prev);
            prop_assert_eq!(prev - now, t.food_eaten as usize);
            prev = now;
        }
    }

    #[test]
    fn same_seed_same_trajectory(seed in any::<u64>()) {
        let env = small_env();
        prop_assert_eq!(random_episode(&env, seed), random_episode(&env, seed));
    }

    #[test]
    fn agent_stays_on_open_cells(seed in any::<u64>()) {
        let env = small_env();
        for (s, a, t) in random_episode(&env, seed) {
            prop_assert!(env.legal_actions(&s).contains(a));
            prop_assert!(!env.layout().is_wall(t.state.agent));
            prop_assert!(t.state.tick == s.tick + 1);
        }
    }
}

/// 5×5 open room with a border.
const ROOM: &str = "%%%%%%%\n%P   .%\n%     %\n%     %\n%     %\n%    G%\n%%%%%%%\n";

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn scared_ghost_flees_to_the_farthest_cell(
        ax in 1i32..=5, ay in 1i32..=5, dir in 0usize..4, seed in any::<u64>(),
    ) {
        let layout = Layout::parse(ROOM).unwrap();
        let ghost = Pos::new(ax, ay).step(Direction::ALL[dir]);
        prop_assume!(!layout.is_wall(ghost));
        let cfg = EnvConfig { chase_prob: 1.0, ..EnvConfig::default() };
        let env = PacmanEnv::new(Arc::new(layout.clone()), cfg);
        let mut s = env.reset();
        s.agent = Pos::new(ax, ay);
        s.ghosts = vec![GhostState { pos: ghost, scared_remaining: 10 }];

        // Every open neighbour of the ghost, scored by distance to the agent;
        // the first of the farthest in north, south, east, west order wins.
        let mut best: Option<(u32, Direction)> = None;
        for d in [Direction::North, Direction::South, Direction::East, Direction::West] {
            let p = ghost.step(d);
            if layout.is_wall(p) {
                continue;
            }
            let dist = (p.x - ax).unsigned_abs() + (p.y - ay).unsigned_abs();
            if best.is_none_or(|(b, _)| dist > b) {
                best = Some((dist, d));
            }
        }
        let want = Action::from_direction(best.unwrap().1);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        prop_assert_eq!(ghost_policy(&layout, &cfg, &s, 0, &mut rng), want);
    }
}
