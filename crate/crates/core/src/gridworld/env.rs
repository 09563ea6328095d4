use std::fmt::Write as _;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::action::{Action, ActionSet, Direction};
use super::layout::{CellSet, Layout, Pos};

pub const FOOD_REWARD: f64 = 10.0;
pub const STEP_REWARD: f64 = -1.0;
pub const GHOST_REWARD: f64 = 200.0;
pub const WIN_REWARD: f64 = 500.0;
pub const LOSE_REWARD: f64 = -500.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Terminal {
    Running,
    Won,
    Lost,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GhostState {
    pub pos: Pos,
    /// Steps of fright left; 0 means the ghost is dangerous.
    pub scared_remaining: u32,
}

impl GhostState {
    pub fn is_scared(&self) -> bool {
        self.scared_remaining > 0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GameState {
    pub agent: Pos,
    pub ghosts: Vec<GhostState>,
    pub food: CellSet,
    pub capsules: CellSet,
    pub tick: u32,
    pub terminal: Terminal,
}

impl GameState {
    pub fn is_running(&self) -> bool {
        self.terminal == Terminal::Running
    }
}

/// Environment parameters left open by the game rules.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EnvConfig {
    /// Probability that a nearby ghost chases (or flees, while scared).
    pub chase_prob: f64,
    /// Manhattan radius inside which ghosts may chase.
    pub chase_radius: u32,
    pub scared_ticks: u32,
    /// Episodes are truncated after this many steps.
    pub max_steps: u32,
}

impl Default for EnvConfig {
    fn default() -> Self {
        EnvConfig {
            chase_prob: 0.8,
            chase_radius: 5,
            scared_ticks: 40,
            max_steps: 1000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub state: GameState,
    pub reward: f64,
    /// True on win, loss, or truncation.
    pub done: bool,
    /// Set when the horizon cut the episode; the state is still running.
    pub truncated: bool,
    /// Scared ghosts eaten during this step.
    pub ghosts_eaten: u32,
    pub food_eaten: bool,
}

#[derive(Debug, Clone)]
pub struct PacmanEnv {
    layout: Arc<Layout>,
    config: EnvConfig,
}

impl PacmanEnv {
    pub fn new(layout: Arc<Layout>, config: EnvConfig) -> Self {
        PacmanEnv { layout, config }
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn config(&self) -> &EnvConfig {
        &self.config
    }

    pub fn reset(&self) -> GameState {
        GameState {
            agent: self.layout.agent_start,
            ghosts: self
                .layout
                .ghost_starts
                .iter()
                .map(|&pos| GhostState {
                    pos,
                    scared_remaining: 0,
                })
                .collect(),
            food: self.layout.food.clone(),
            capsules: self.layout.capsules.clone(),
            tick: 0,
            terminal: Terminal::Running,
        }
    }

    /// `stop` plus every direction whose neighbouring cell is open.
    pub fn legal_actions(&self, s: &GameState) -> ActionSet {
        legal_from(&self.layout, s.agent)
    }

    /// Advances one tick: the agent moves, then every ghost in index order.
    ///
    /// Panics if `s` is terminal or `a` is illegal.
    pub fn step<R: Rng + ?Sized>(&self, s: &GameState, a: Action, rng: &mut R) -> Transition {
        assert!(s.is_running(), "step called on a terminal state");
        assert!(
            self.legal_actions(s).contains(a),
            "illegal action {a} at {}",
            s.agent
        );

        let mut next = s.clone();
        next.tick += 1;
        for g in &mut next.ghosts {
            g.scared_remaining = g.scared_remaining.saturating_sub(1);
        }

        let mut reward = STEP_REWARD;
        let mut ghosts_eaten = 0;
        next.agent = s.agent.offset(a.delta());

        let food_eaten = next.food.remove(next.agent);
        if food_eaten {
            reward += FOOD_REWARD;
            if next.food.is_empty() {
                next.terminal = Terminal::Won;
                return Transition {
                    state: next,
                    reward: reward + WIN_REWARD,
                    done: true,
                    truncated: false,
                    ghosts_eaten,
                    food_eaten,
                };
            }
        }
        if next.capsules.remove(next.agent) {
            for g in &mut next.ghosts {
                g.scared_remaining = self.config.scared_ticks;
            }
        }

        // The agent may walk straight into a ghost.
        for i in 0..next.ghosts.len() {
            if next.ghosts[i].pos == next.agent
                && !self.resolve_contact(&mut next, i, &mut reward, &mut ghosts_eaten)
            {
                return self.finish(next, reward, ghosts_eaten, food_eaten);
            }
        }

        for i in 0..next.ghosts.len() {
            let before = next.ghosts[i].pos;
            let ga = ghost_policy(&self.layout, &self.config, &next, i, rng);
            next.ghosts[i].pos = before.offset(ga.delta());
            // Pass-through swaps need the agent to enter the ghost's cell,
            // which the check above already caught.
            if next.ghosts[i].pos == next.agent
                && !self.resolve_contact(&mut next, i, &mut reward, &mut ghosts_eaten)
            {
                return self.finish(next, reward, ghosts_eaten, food_eaten);
            }
        }

        self.finish(next, reward, ghosts_eaten, food_eaten)
    }

    /// Returns false when the contact killed the agent.
    fn resolve_contact(
        &self,
        s: &mut GameState,
        ghost: usize,
        reward: &mut f64,
        eaten: &mut u32,
    ) -> bool {
        if s.ghosts[ghost].is_scared() {
            *reward += GHOST_REWARD;
            *eaten += 1;
            s.ghosts[ghost] = GhostState {
                pos: self.layout.ghost_starts[ghost],
                scared_remaining: 0,
            };
            true
        } else {
            *reward += LOSE_REWARD;
            s.terminal = Terminal::Lost;
            false
        }
    }

    fn finish(
        &self,
        state: GameState,
        reward: f64,
        ghosts_eaten: u32,
        food_eaten: bool,
    ) -> Transition {
        let terminal = !state.is_running();
        let truncated = !terminal && state.tick >= self.config.max_steps;
        Transition {
            state,
            reward,
            done: terminal || truncated,
            truncated,
            ghosts_eaten,
            food_eaten,
        }
    }

    /// ASCII frame of `s`, north at the top.
    pub fn render(&self, s: &GameState) -> String {
        let mut out = String::new();
        for y in (0..self.layout.height as i32).rev() {
            for x in 0..self.layout.width as i32 {
                let p = Pos::new(x, y);
                let ghost = s.ghosts.iter().find(|g| g.pos == p);
                let c = if p == s.agent {
                    'P'
                } else if let Some(g) = ghost {
                    if g.is_scared() {
                        'g'
                    } else {
                        'G'
                    }
                } else if self.layout.is_wall(p) {
                    '%'
                } else if s.food.contains(p) {
                    '.'
                } else if s.capsules.contains(p) {
                    'o'
                } else {
                    ' '
                };
                out.push(c);
            }
            out.push('\n');
        }
        let _ = writeln!(out, "tick {} {:?}", s.tick, s.terminal);
        out
    }
}

pub fn legal_from(layout: &Layout, p: Pos) -> ActionSet {
    let mut set = ActionSet::empty();
    for (d, _) in layout.open_neighbours(p) {
        set.insert(Action::from_direction(d));
    }
    set.insert(Action::Stop);
    set
}

/// Chooses the move of ghost `index`. Within the chase radius, with
/// probability `chase_prob`, the ghost takes the open move that minimises
/// Manhattan distance to the agent (maximises it while scared), ties going to
/// the first direction in canonical order. Otherwise it moves uniformly at
/// random. A ghost only stops when boxed in.
pub fn ghost_policy<R: Rng + ?Sized>(
    layout: &Layout,
    config: &EnvConfig,
    s: &GameState,
    index: usize,
    rng: &mut R,
) -> Action {
    let ghost = s.ghosts[index];
    let moves: Vec<(Direction, Pos)> = layout.open_neighbours(ghost.pos).collect();
    if moves.is_empty() {
        return Action::Stop;
    }
    let near = ghost.pos.manhattan(s.agent) <= config.chase_radius;
    if near && rng.random_bool(config.chase_prob) {
        let key = |p: Pos| p.manhattan(s.agent);
        let best = if ghost.is_scared() {
            moves.iter().map(|&(_, p)| key(p)).max()
        } else {
            moves.iter().map(|&(_, p)| key(p)).min()
        };
        let (d, _) = moves
            .iter()
            .find(|&&(_, p)| Some(key(p)) == best)
            .copied()
            .unwrap_or(moves[0]);
        return Action::from_direction(d);
    }
    let (d, _) = moves[rng.random_range(0..moves.len())];
    Action::from_direction(d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn env(text: &str) -> PacmanEnv {
        PacmanEnv::new(Arc::new(Layout::parse(text).unwrap()), EnvConfig::default())
    }

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(7)
    }

    #[test]
    fn corridor_allows_east_west_stop() {
        let e = env("%%%%%\n%.P.%\n%%%%%\n");
        let got: Vec<_> = e.legal_actions(&e.reset()).iter().collect();
        assert_eq!(got, vec![Action::East, Action::West, Action::Stop]);
    }

    #[test]
    fn open_room_centre_allows_all_actions() {
        let e = env("%%%%%\n%...%\n%.P.%\n%...%\n%%%%%\n");
        assert_eq!(e.legal_actions(&e.reset()).len(), 5);
    }

    #[test]
    fn dead_end_allows_west_and_stop() {
        let e = env("%%%%%\n%..P%\n%%%%%\n");
        let got: Vec<_> = e.legal_actions(&e.reset()).iter().collect();
        assert_eq!(got, vec![Action::West, Action::Stop]);
    }

    #[test]
    fn eating_food_pays_nine() {
        let e = env("%%%%%%\n%P..%%\n%%%%%%\n");
        let t = e.step(&e.reset(), Action::East, &mut rng());
        assert_eq!(t.reward, 9.0);
        assert!(!t.done);
        assert_eq!(t.state.food.len(), 1);
    }

    #[test]
    fn eating_last_food_wins() {
        let e = env("%%%%\n%P.%\n%%%%\n");
        let t = e.step(&e.reset(), Action::East, &mut rng());
        assert_eq!(t.reward, 509.0);
        assert!(t.done);
        assert_eq!(t.state.terminal, Terminal::Won);
    }

    #[test]
    fn walking_into_a_ghost_loses() {
        let e = env("%%%%%%\n%PG .%\n%%%%%%\n");
        let t = e.step(&e.reset(), Action::East, &mut rng());
        assert_eq!(t.reward, -501.0);
        assert_eq!(t.state.terminal, Terminal::Lost);
    }

    #[test]
    fn chasing_ghost_catches_standing_agent() {
        let layout = Layout::parse("%%%%%\n%PG.%\n%%%%%\n").unwrap();
        let cfg = EnvConfig {
            chase_prob: 1.0,
            ..EnvConfig::default()
        };
        let e = PacmanEnv::new(Arc::new(layout), cfg);
        let t = e.step(&e.reset(), Action::Stop, &mut rng());
        assert_eq!(t.state.terminal, Terminal::Lost);
        assert_eq!(t.reward, -501.0);
    }

    #[test]
    fn catching_a_scared_ghost_pays_and_respawns() {
        let e = env("%%%%%%%%%%\n%Po  .  G%\n%%%%%%%%%%\n");
        let mut r = rng();
        let t = e.step(&e.reset(), Action::East, &mut r);
        assert!(t.state.ghosts.iter().all(|g| g.scared_remaining == 40));
        let mut s = t.state;
        s.ghosts[0].pos = Pos::new(3, 1);
        let t = e.step(&s, Action::East, &mut r);
        assert_eq!(t.ghosts_eaten, 1);
        assert_eq!(t.reward, -1.0 + 200.0);
        assert_eq!(t.state.ghosts[0].scared_remaining, 0);
        assert!(t.state.is_running());
    }

    #[test]
    fn scared_timer_counts_down_by_one() {
        let e = env("%%%%%%%%\n%Po   G%\n%.     %\n%%%%%%%%\n");
        let mut r = rng();
        let mut s = e.step(&e.reset(), Action::East, &mut r).state;
        for expected in (35..40).rev() {
            s = e.step(&s, Action::Stop, &mut r).state;
            assert_eq!(s.ghosts[0].scared_remaining, expected);
        }
    }

    #[test]
    fn zero_chase_prob_moves_uniformly() {
        let layout = Layout::parse("%%%%%\n%...%\n%.G.%\n%.P.%\n%%%%%\n").unwrap();
        let cfg = EnvConfig {
            chase_prob: 0.0,
            ..EnvConfig::default()
        };
        let e = PacmanEnv::new(Arc::new(layout.clone()), cfg);
        let s = e.reset();
        let mut r = rng();
        let mut counts = [0usize; 5];
        let n = 40_000;
        for _ in 0..n {
            counts[ghost_policy(&layout, &cfg, &s, 0, &mut r).index()] += 1;
        }
        assert_eq!(counts[Action::Stop.index()], 0);
        for c in &counts[..4] {
            let freq = *c as f64 / n as f64;
            assert!((freq - 0.25).abs() < 0.01, "{counts:?}");
        }
    }

    #[test]
    fn adjacent_chasing_ghost_steps_onto_agent() {
        let layout = Layout::parse("%%%%%\n%...%\n%.G.%\n%.P.%\n%%%%%\n").unwrap();
        let cfg = EnvConfig {
            chase_prob: 1.0,
            ..EnvConfig::default()
        };
        let s = PacmanEnv::new(Arc::new(layout.clone()), cfg).reset();
        let a = ghost_policy(&layout, &cfg, &s, 0, &mut rng());
        assert_eq!(a, Action::South);
    }

    #[test]
    fn horizon_truncates_without_bonus() {
        let layout = Layout::parse("%%%%%\n%P .%\n%%%%%\n").unwrap();
        let cfg = EnvConfig {
            max_steps: 3,
            ..EnvConfig::default()
        };
        let e = PacmanEnv::new(Arc::new(layout), cfg);
        let mut s = e.reset();
        let mut r = rng();
        for i in 0..3 {
            let t = e.step(&s, Action::Stop, &mut r);
            assert_eq!(t.reward, -1.0);
            assert_eq!(t.done, i == 2);
            assert_eq!(t.truncated, i == 2);
            s = t.state;
        }
        assert!(s.is_running());
    }

    #[test]
    fn render_shows_agent_and_ghosts() {
        let e = env("%%%%%\n%P.G%\n%%%%%\n");
        assert!(e.render(&e.reset()).starts_with("%%%%%\n%P.G%\n"));
    }
}
