//! Deterministic key-and-door gridworld with a patrolling skull.
//!
//! The agent starts in the upper room and passes a gap into the lower room. The key sits
//! at the bottom-left (+100), reachable only by stepping into the end of the row patrolled
//! by a skull. The door is at the top-right (+300 with the key, ends the episode). Touching
//! the skull or running out of steps ends the episode with no reward.
//!
//! Layout grammar (one map row per line, all rows the same width):
//!
//! | char | meaning                                        |
//! |------|------------------------------------------------|
//! | `#`  | wall                                           |
//! | `.`  | floor                                          |
//! | `A`  | agent spawn (exactly one)                      |
//! | `K`  | key (exactly one)                              |
//! | `D`  | door (exactly one)                             |
//! | `L`  | ladder landmark (exactly two; leftmost is `ladder_bl`) |
//! | `S`  | skull patrol cell (one horizontal run, two or more cells) |
//!
//! Every non-`#` cell is walkable. The skull starts on the leftmost `S`, heading right.

use super::{ActionId, Environment, Location, StateId, StepOutcome};
use crate::critic::GoalTarget;
use crate::error::{check_index, Error, Result};
use crate::rng::RngStream;

pub const UP: ActionId = ActionId(0);
pub const DOWN: ActionId = ActionId(1);
pub const LEFT: ActionId = ActionId(2);
pub const RIGHT: ActionId = ActionId(3);

pub const KEY_REWARD: f64 = 100.0;
pub const DOOR_REWARD: f64 = 300.0;
pub const DEFAULT_STEP_LIMIT: usize = 500;

pub const DEFAULT_LAYOUT: &str = "\
############
#....A....D#
#..........#
#######..###
#..........#
#L.........#
###........#
#K.SSSSSS.L#
############";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EntityKind {
    Agent,
    Key,
    Door,
    Skull,
    LadderBottomLeft,
    LadderBottomRight,
}

impl EntityKind {
    pub fn name(self) -> &'static str {
        match self {
            EntityKind::Agent => "agent",
            EntityKind::Key => "key",
            EntityKind::Door => "door",
            EntityKind::Skull => "skull",
            EntityKind::LadderBottomLeft => "ladder_bl",
            EntityKind::LadderBottomRight => "ladder_br",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Entity {
    pub kind: EntityKind,
    pub position: (usize, usize),
    pub alive: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    Left,
    Right,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Layout {
    width: usize,
    height: usize,
    walls: Vec<bool>,
    spawn: (usize, usize),
    key: (usize, usize),
    door: (usize, usize),
    ladder_bl: (usize, usize),
    ladder_br: (usize, usize),
    patrol_row: usize,
    patrol_start: usize,
    patrol_len: usize,
}

impl Default for Layout {
    fn default() -> Self {
        Layout::parse(DEFAULT_LAYOUT).expect("built-in layout parses")
    }
}

impl Layout {
    pub fn parse(text: &str) -> Result<Self> {
        let rows: Vec<&str> = text
            .lines()
            .map(str::trim_end)
            .filter(|l| !l.is_empty())
            .collect();
        if rows.is_empty() {
            return Err(Error::Layout("empty map".into()));
        }
        let width = rows[0].chars().count();
        let height = rows.len();
        let mut walls = vec![false; width * height];
        let mut spawn = Vec::new();
        let mut key = Vec::new();
        let mut door = Vec::new();
        let mut ladders = Vec::new();
        let mut skull = Vec::new();
        for (y, row) in rows.iter().enumerate() {
            if row.chars().count() != width {
                return Err(Error::Layout(format!(
                    "row {} has width {}, expected {width}",
                    y + 1,
                    row.chars().count()
                )));
            }
            for (x, c) in row.chars().enumerate() {
                match c {
                    '#' => walls[y * width + x] = true,
                    '.' => {}
                    'A' => spawn.push((x, y)),
                    'K' => key.push((x, y)),
                    'D' => door.push((x, y)),
                    'L' => ladders.push((x, y)),
                    'S' => skull.push((x, y)),
                    other => {
                        return Err(Error::Layout(format!(
                            "row {}: unknown map character {other:?}",
                            y + 1
                        )))
                    }
                }
            }
        }
        let exactly_one = |v: &[(usize, usize)], what: &str| -> Result<(usize, usize)> {
            match v {
                [p] => Ok(*p),
                _ => Err(Error::Layout(format!("expected exactly one {what}, found {}", v.len()))),
            }
        };
        let spawn = exactly_one(&spawn, "spawn `A`")?;
        let key = exactly_one(&key, "key `K`")?;
        let door = exactly_one(&door, "door `D`")?;
        if ladders.len() != 2 {
            return Err(Error::Layout(format!(
                "expected exactly two ladders `L`, found {}",
                ladders.len()
            )));
        }
        ladders.sort_by_key(|&(x, y)| (x, y));
        if skull.len() < 2 {
            return Err(Error::Layout("skull patrol needs at least two `S` cells".into()));
        }
        let patrol_row = skull[0].1;
        let patrol_start = skull[0].0;
        let contiguous = skull
            .iter()
            .enumerate()
            .all(|(i, &(x, y))| y == patrol_row && x == patrol_start + i);
        if !contiguous {
            return Err(Error::Layout(
                "skull patrol must be one contiguous horizontal run".into(),
            ));
        }
        Ok(Self {
            width,
            height,
            walls,
            spawn,
            key,
            door,
            ladder_bl: ladders[0],
            ladder_br: ladders[1],
            patrol_row,
            patrol_start,
            patrol_len: skull.len(),
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn patrol_len(&self) -> usize {
        self.patrol_len
    }

    pub fn is_wall(&self, (x, y): (usize, usize)) -> bool {
        x >= self.width || y >= self.height || self.walls[y * self.width + x]
    }

    pub fn entity_cell(&self, kind: EntityKind) -> Option<(usize, usize)> {
        match kind {
            EntityKind::Key => Some(self.key),
            EntityKind::Door => Some(self.door),
            EntityKind::LadderBottomLeft => Some(self.ladder_bl),
            EntityKind::LadderBottomRight => Some(self.ladder_br),
            EntityKind::Agent | EntityKind::Skull => None,
        }
    }

    pub fn spawn(&self) -> (usize, usize) {
        self.spawn
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KeyDoorState {
    pub agent: (usize, usize),
    /// Offset of the skull within its patrol segment.
    pub skull_offset: usize,
    pub skull_dir: Direction,
    pub has_key: bool,
    pub steps_elapsed: usize,
}

#[derive(Debug, Clone)]
pub struct KeyDoorEnv {
    layout: Layout,
    step_limit: usize,
    state: KeyDoorState,
    terminal: bool,
}

impl Default for KeyDoorEnv {
    fn default() -> Self {
        Self::new(Layout::default(), DEFAULT_STEP_LIMIT)
    }
}

impl KeyDoorEnv {
    pub fn new(layout: Layout, step_limit: usize) -> Self {
        let state = Self::initial(&layout);
        Self {
            layout,
            step_limit,
            state,
            terminal: false,
        }
    }

    fn initial(layout: &Layout) -> KeyDoorState {
        KeyDoorState {
            agent: layout.spawn,
            skull_offset: 0,
            skull_dir: Direction::Right,
            has_key: false,
            steps_elapsed: 0,
        }
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn step_limit(&self) -> usize {
        self.step_limit
    }

    pub fn grid_state(&self) -> KeyDoorState {
        self.state
    }

    pub fn skull_cell(&self, state: &KeyDoorState) -> (usize, usize) {
        (
            self.layout.patrol_start + state.skull_offset,
            self.layout.patrol_row,
        )
    }

    /// Skull offset and heading after `steps` steps from reset.
    pub fn skull_after(&self, steps: usize) -> (usize, Direction) {
        let last = self.layout.patrol_len - 1;
        let phase = steps % (2 * last);
        if phase < last {
            (phase, Direction::Right)
        } else if phase == last {
            (last, Direction::Left)
        } else {
            (2 * last - phase, Direction::Left)
        }
    }

    pub fn encode(&self, s: &KeyDoorState) -> StateId {
        let (x, y) = s.agent;
        let cell = y * self.layout.width + x;
        let dir = match s.skull_dir {
            Direction::Left => 0,
            Direction::Right => 1,
        };
        StateId(((cell * self.layout.patrol_len + s.skull_offset) * 2 + dir) * 2 + s.has_key as usize)
    }

    /// Recover the state fields carried in a state id (`steps_elapsed` is not encoded).
    pub fn decode(&self, id: StateId) -> KeyDoorState {
        let mut rest = id.0;
        let has_key = rest % 2 == 1;
        rest /= 2;
        let skull_dir = if rest % 2 == 1 {
            Direction::Right
        } else {
            Direction::Left
        };
        rest /= 2;
        let skull_offset = rest % self.layout.patrol_len;
        let cell = rest / self.layout.patrol_len;
        KeyDoorState {
            agent: (cell % self.layout.width, cell / self.layout.width),
            skull_offset,
            skull_dir,
            has_key,
            steps_elapsed: 0,
        }
    }

    pub fn entities(&self) -> Vec<Entity> {
        self.entities_of(&self.state)
    }

    pub fn entities_of(&self, s: &KeyDoorState) -> Vec<Entity> {
        let l = &self.layout;
        vec![
            Entity {
                kind: EntityKind::Agent,
                position: s.agent,
                alive: true,
            },
            Entity {
                kind: EntityKind::Key,
                position: l.key,
                alive: !s.has_key,
            },
            Entity {
                kind: EntityKind::Door,
                position: l.door,
                alive: true,
            },
            Entity {
                kind: EntityKind::Skull,
                position: self.skull_cell(s),
                alive: true,
            },
            Entity {
                kind: EntityKind::LadderBottomLeft,
                position: l.ladder_bl,
                alive: true,
            },
            Entity {
                kind: EntityKind::LadderBottomRight,
                position: l.ladder_br,
                alive: true,
            },
        ]
    }

    fn advance_skull(&self, s: &mut KeyDoorState) {
        let last = self.layout.patrol_len - 1;
        match s.skull_dir {
            Direction::Right => s.skull_offset += 1,
            Direction::Left => s.skull_offset -= 1,
        }
        if s.skull_offset == last {
            s.skull_dir = Direction::Left;
        } else if s.skull_offset == 0 {
            s.skull_dir = Direction::Right;
        }
    }
}

impl Environment for KeyDoorEnv {
    fn name(&self) -> &'static str {
        "keydoor"
    }

    fn reset(&mut self, _rng: &mut RngStream) -> StateId {
        self.state = Self::initial(&self.layout);
        self.terminal = false;
        self.encode(&self.state)
    }

    fn step(&mut self, action: ActionId, _rng: &mut RngStream) -> Result<StepOutcome> {
        if self.terminal {
            return Err(Error::TerminalStep);
        }
        check_index("action", action.0, 4)?;
        let (x, y) = self.state.agent;
        let target = match action {
            UP => (x, y.wrapping_sub(1)),
            DOWN => (x, y + 1),
            LEFT => (x.wrapping_sub(1), y),
            _ => (x + 1, y),
        };
        let mut next = self.state;
        if !self.layout.is_wall(target) {
            next.agent = target;
        }
        let skull_before = self.skull_cell(&next);
        self.advance_skull(&mut next);
        let skull_after = self.skull_cell(&next);
        next.steps_elapsed += 1;

        let mut reward = 0.0;
        let mut terminal = false;
        // Contact with the skull at either end of its move (this also catches swaps).
        if next.agent == skull_before || next.agent == skull_after {
            terminal = true;
        } else {
            if !next.has_key && next.agent == self.layout.key {
                next.has_key = true;
                reward += KEY_REWARD;
            }
            if next.has_key && next.agent == self.layout.door {
                reward += DOOR_REWARD;
                terminal = true;
            }
            if next.steps_elapsed >= self.step_limit {
                terminal = true;
            }
        }
        self.state = next;
        self.terminal = terminal;
        Ok(StepOutcome {
            next_state: self.encode(&next),
            extrinsic_reward: reward,
            terminal,
        })
    }

    fn state_count(&self) -> usize {
        self.layout.width * self.layout.height * self.layout.patrol_len * 2 * 2
    }

    fn action_count(&self) -> usize {
        4
    }

    fn current_state(&self) -> StateId {
        self.encode(&self.state)
    }

    fn is_terminal(&self) -> bool {
        self.terminal
    }

    fn goal_targets(&self) -> Vec<GoalTarget> {
        [
            EntityKind::Key,
            EntityKind::Door,
            EntityKind::LadderBottomLeft,
            EntityKind::LadderBottomRight,
        ]
        .into_iter()
        .map(GoalTarget::Entity)
        .collect()
    }

    fn agent_location(&self, state: StateId) -> Location {
        let (x, y) = self.decode(state).agent;
        Location(x, y)
    }

    fn target_location(&self, target: &GoalTarget) -> Option<Location> {
        match *target {
            GoalTarget::Entity(kind) => self.layout.entity_cell(kind).map(|(x, y)| Location(x, y)),
            GoalTarget::State(_) => None,
        }
    }

    fn location_count(&self) -> usize {
        self.layout.width * self.layout.height
    }

    fn location_index(&self, loc: Location) -> usize {
        loc.1 * self.layout.width + loc.0
    }
}
