use std::collections::VecDeque;
use std::fmt;

use fixedbitset::FixedBitSet;
use thiserror::Error;

use super::action::Direction;

/// Grid coordinate. `y = 0` is the bottom row of the map text, so north is `y + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pos {
    pub x: i32,
    pub y: i32,
}

impl Pos {
    pub const fn new(x: i32, y: i32) -> Self {
        Pos { x, y }
    }

    pub fn offset(self, (dx, dy): (i32, i32)) -> Pos {
        Pos::new(self.x + dx, self.y + dy)
    }

    pub fn step(self, d: Direction) -> Pos {
        self.offset(d.delta())
    }

    pub fn manhattan(self, other: Pos) -> u32 {
        self.x.abs_diff(other.x) + self.y.abs_diff(other.y)
    }
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.x, self.y)
    }
}

/// A set of cells of a fixed-size grid, stored as a bitset.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CellSet {
    width: usize,
    height: usize,
    bits: FixedBitSet,
}

impl CellSet {
    pub fn new(width: usize, height: usize) -> Self {
        CellSet {
            width,
            height,
            bits: FixedBitSet::with_capacity(width * height),
        }
    }

    fn index(&self, p: Pos) -> Option<usize> {
        if p.x < 0 || p.y < 0 || p.x as usize >= self.width || p.y as usize >= self.height {
            None
        } else {
            Some(p.y as usize * self.width + p.x as usize)
        }
    }

    pub fn contains(&self, p: Pos) -> bool {
        self.index(p).is_some_and(|i| self.bits.contains(i))
    }

    /// Returns false when `p` is out of bounds.
    pub fn insert(&mut self, p: Pos) -> bool {
        match self.index(p) {
            Some(i) => {
                self.bits.insert(i);
                true
            }
            None => false,
        }
    }

    /// Returns whether `p` was present.
    pub fn remove(&mut self, p: Pos) -> bool {
        match self.index(p) {
            Some(i) if self.bits.contains(i) => {
                self.bits.set(i, false);
                true
            }
            _ => false,
        }
    }

    pub fn len(&self) -> usize {
        self.bits.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_clear()
    }

    pub fn iter(&self) -> impl Iterator<Item = Pos> + '_ {
        let w = self.width;
        self.bits
            .ones()
            .map(move |i| Pos::new((i % w) as i32, (i / w) as i32))
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LayoutError {
    #[error("line {line}, column {column}: unknown glyph {glyph:?}")]
    UnknownGlyph {
        line: usize,
        column: usize,
        glyph: char,
    },
    #[error("line {line}: row has {found} cells, expected {expected}")]
    RaggedRow {
        line: usize,
        found: usize,
        expected: usize,
    },
    #[error("layout is empty")]
    Empty,
    #[error("layout must contain exactly one agent start `P`, found {0}")]
    AgentStart(usize),
    #[error("no food")]
    NoFood,
    #[error("cell {0} is not reachable from the agent start")]
    Unreachable(Pos),
}

/// Immutable map description.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Layout {
    pub width: usize,
    pub height: usize,
    pub walls: CellSet,
    pub food: CellSet,
    pub capsules: CellSet,
    pub ghost_starts: Vec<Pos>,
    pub agent_start: Pos,
}

impl Layout {
    /// Parses the ASCII map format: `%` wall, `.` food, `o` capsule,
    /// `G` ghost start, `P` agent start, space empty. Out-of-grid cells count
    /// as walls, so a missing border is allowed.
    pub fn parse(text: &str) -> Result<Layout, LayoutError> {
        let lines: Vec<&str> = text
            .lines()
            .map(|l| l.strip_suffix('\r').unwrap_or(l))
            .collect();
        let end = lines
            .iter()
            .rposition(|l| !l.is_empty())
            .ok_or(LayoutError::Empty)?;
        let rows = &lines[..=end];
        let height = rows.len();
        let width = rows[0].chars().count();
        if width == 0 {
            return Err(LayoutError::Empty);
        }

        let mut walls = CellSet::new(width, height);
        let mut food = CellSet::new(width, height);
        let mut capsules = CellSet::new(width, height);
        let mut ghost_starts = Vec::new();
        let mut agents = Vec::new();

        for (row, line) in rows.iter().enumerate() {
            let found = line.chars().count();
            if found != width {
                return Err(LayoutError::RaggedRow {
                    line: row + 1,
                    found,
                    expected: width,
                });
            }
            let y = (height - 1 - row) as i32;
            for (col, glyph) in line.chars().enumerate() {
                let p = Pos::new(col as i32, y);
                match glyph {
                    '%' => {
                        walls.insert(p);
                    }
                    '.' => {
                        food.insert(p);
                    }
                    'o' => {
                        capsules.insert(p);
                    }
                    'G' => ghost_starts.push(p),
                    'P' => agents.push(p),
                    ' ' => {}
                    glyph => {
                        return Err(LayoutError::UnknownGlyph {
                            line: row + 1,
                            column: col + 1,
                            glyph,
                        })
                    }
                }
            }
        }

        if agents.len() != 1 {
            return Err(LayoutError::AgentStart(agents.len()));
        }
        // Ghost starts are listed in reading order (top row first).
        let layout = Layout {
            width,
            height,
            walls,
            food,
            capsules,
            ghost_starts,
            agent_start: agents[0],
        };
        layout.validate()?;
        Ok(layout)
    }

    fn validate(&self) -> Result<(), LayoutError> {
        if self.food.is_empty() {
            return Err(LayoutError::NoFood);
        }
        let dist = self.distances_from(self.agent_start);
        for y in 0..self.height as i32 {
            for x in 0..self.width as i32 {
                let p = Pos::new(x, y);
                if !self.is_wall(p) && dist[self.cell_index(p)].is_none() {
                    return Err(LayoutError::Unreachable(p));
                }
            }
        }
        Ok(())
    }

    pub fn in_bounds(&self, p: Pos) -> bool {
        p.x >= 0 && p.y >= 0 && (p.x as usize) < self.width && (p.y as usize) < self.height
    }

    /// Out-of-bounds cells are walls.
    pub fn is_wall(&self, p: Pos) -> bool {
        !self.in_bounds(p) || self.walls.contains(p)
    }

    pub fn cell_index(&self, p: Pos) -> usize {
        p.y as usize * self.width + p.x as usize
    }

    pub fn open_neighbours(&self, p: Pos) -> impl Iterator<Item = (Direction, Pos)> + '_ {
        Direction::ALL
            .into_iter()
            .map(move |d| (d, p.step(d)))
            .filter(|(_, q)| !self.is_wall(*q))
    }

    /// Maze (BFS) distance from `from` to every cell; `None` for walls and
    /// unreachable cells.
    pub fn distances_from(&self, from: Pos) -> Vec<Option<u32>> {
        let mut dist = vec![None; self.width * self.height];
        if self.is_wall(from) {
            return dist;
        }
        let mut queue = VecDeque::new();
        dist[self.cell_index(from)] = Some(0);
        queue.push_back(from);
        while let Some(p) = queue.pop_front() {
            let d = dist[self.cell_index(p)].unwrap_or(0);
            for (_, q) in self.open_neighbours(p) {
                let i = self.cell_index(q);
                if dist[i].is_none() {
                    dist[i] = Some(d + 1);
                    queue.push_back(q);
                }
            }
        }
        dist
    }

    /// Maze distance from `from` to the nearest member of `targets`.
    pub fn nearest_in(&self, from: Pos, targets: &CellSet) -> Option<u32> {
        if targets.contains(from) {
            return Some(0);
        }
        if targets.is_empty() || self.is_wall(from) {
            return None;
        }
        let mut seen = FixedBitSet::with_capacity(self.width * self.height);
        let mut queue = VecDeque::new();
        seen.insert(self.cell_index(from));
        queue.push_back((from, 0u32));
        while let Some((p, d)) = queue.pop_front() {
            for (_, q) in self.open_neighbours(p) {
                let i = self.cell_index(q);
                if seen.contains(i) {
                    continue;
                }
                if targets.contains(q) {
                    return Some(d + 1);
                }
                seen.insert(i);
                queue.push_back((q, d + 1));
            }
        }
        None
    }
}

const SMALL: &str = include_str!("layouts/small.lay");
const LARGE: &str = include_str!("layouts/large.lay");

/// Text of a bundled map by name (`small`, `small.lay`, `large`, `large.lay`).
pub fn bundled(name: &str) -> Option<&'static str> {
    match name.trim_end_matches(".lay") {
        "small" => Some(SMALL),
        "large" => Some(LARGE),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_map_without_food() {
        let text = "%%%\n%P%\n%%%\n";
        assert_eq!(Layout::parse(text), Err(LayoutError::NoFood));
    }

    #[test]
    fn unknown_glyph_reports_position() {
        let text = "%%%%\n%P?%\n%%%%\n";
        assert_eq!(
            Layout::parse(text),
            Err(LayoutError::UnknownGlyph {
                line: 2,
                column: 3,
                glyph: '?'
            })
        );
    }

    #[test]
    fn rejects_unreachable_pellet() {
        let text = "%%%%%\n%P%.%\n%%%%%\n";
        assert_eq!(
            Layout::parse(text),
            Err(LayoutError::Unreachable(Pos::new(3, 1)))
        );
    }

    #[test]
    fn rejects_ragged_rows() {
        let text = "%%%%\n%P.%\n%%%\n";
        assert!(matches!(
            Layout::parse(text),
            Err(LayoutError::RaggedRow { line: 3, .. })
        ));
    }

    #[test]
    fn rejects_missing_or_duplicate_agent() {
        assert_eq!(
            Layout::parse("%%%\n%.%\n%%%"),
            Err(LayoutError::AgentStart(0))
        );
        assert_eq!(
            Layout::parse("%%%%\n%PP%\n%.%%\n%%%%"),
            Err(LayoutError::AgentStart(2))
        );
    }

    #[test]
    fn bundled_small_map_matches_advertised_shape() {
        let layout = Layout::parse(bundled("small.lay").unwrap()).unwrap();
        assert_eq!((layout.width, layout.height), (18, 9));
        assert_eq!(layout.ghost_starts.len(), 2);
        assert_eq!(layout.capsules.len(), 2);
    }

    #[test]
    fn bundled_large_map_matches_advertised_shape() {
        let layout = Layout::parse(bundled("large").unwrap()).unwrap();
        assert_eq!((layout.width, layout.height), (25, 26));
        assert_eq!(layout.ghost_starts.len(), 4);
        assert_eq!(layout.capsules.len(), 4);
    }

    #[test]
    fn y_axis_points_north() {
        let layout = Layout::parse("%%%%\n%.P%\n% .%\n%%%%\n").unwrap();
        assert_eq!(layout.agent_start, Pos::new(2, 2));
        assert!(layout.food.contains(Pos::new(2, 1)));
        assert!(layout.is_wall(layout.agent_start.step(Direction::North)));
    }

    #[test]
    fn nearest_food_uses_maze_distance() {
        // Food is 2 cells away by Manhattan distance but 8 through the maze.
        let text = "%%%%%%\n%P   %\n%%%% %\n%.   %\n%%%%%%\n";
        let layout = Layout::parse(text).unwrap();
        assert_eq!(layout.nearest_in(layout.agent_start, &layout.food), Some(8));
        assert_eq!(layout.agent_start.manhattan(Pos::new(1, 1)), 2);
    }
}
