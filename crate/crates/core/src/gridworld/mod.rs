//! Pac-Man gridworld: layouts, game state, and seeded transition dynamics.

mod action;
mod env;
mod layout;

pub use action::{Action, ActionSet, Direction};
pub use env::{
    ghost_policy, legal_from, EnvConfig, GameState, GhostState, PacmanEnv, Terminal, Transition,
    FOOD_REWARD, GHOST_REWARD, LOSE_REWARD, STEP_REWARD, WIN_REWARD,
};
pub use layout::{bundled, CellSet, Layout, LayoutError, Pos};
