//! Lattice geometry: positions, directions and bounded moves.

use std::fmt;

/// A vertex of the `width × height` lattice, `x` the column and `y` the row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Position {
    pub x: i32,
    pub y: i32,
}

impl Position {
    pub const fn new(x: i32, y: i32) -> Self {
        Self { x, y }
    }

    pub fn chebyshev(self, other: Position) -> i32 {
        (self.x - other.x).abs().max((self.y - other.y).abs())
    }

    pub fn dist_sq(self, other: Position) -> i64 {
        let dx = (self.x - other.x) as i64;
        let dy = (self.y - other.y) as i64;
        dx * dx + dy * dy
    }

    pub fn euclidean(self, other: Position) -> f64 {
        (self.dist_sq(other) as f64).sqrt()
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// Direction of motion for one round. `Up` is `+y`, `Right` is `+x`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    Up,
    Down,
    Left,
    Right,
    Stay,
}

impl Direction {
    pub const ALL: [Direction; 5] = [
        Direction::Up,
        Direction::Down,
        Direction::Left,
        Direction::Right,
        Direction::Stay,
    ];

    /// The four moving directions, in the order random draws index them.
    pub const CARDINAL: [Direction; 4] = [
        Direction::Up,
        Direction::Down,
        Direction::Left,
        Direction::Right,
    ];

    pub fn delta(self) -> (i32, i32) {
        match self {
            Direction::Up => (0, 1),
            Direction::Down => (0, -1),
            Direction::Left => (-1, 0),
            Direction::Right => (1, 0),
            Direction::Stay => (0, 0),
        }
    }
}

/// Lattice dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Lattice {
    pub width: i32,
    pub height: i32,
}

impl Lattice {
    pub fn new(width: u32, height: u32) -> Self {
        assert!(width >= 1 && height >= 1, "lattice must be non-empty");
        Self {
            width: width as i32,
            height: height as i32,
        }
    }

    pub fn len(&self) -> usize {
        (self.width * self.height) as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn contains(&self, p: Position) -> bool {
        p.x >= 0 && p.y >= 0 && p.x < self.width && p.y < self.height
    }

    pub fn index(&self, p: Position) -> usize {
        debug_assert!(
            self.contains(p),
            "{p} outside {}x{}",
            self.width,
            self.height
        );
        (p.y * self.width + p.x) as usize
    }

    pub fn position(&self, index: usize) -> Position {
        let i = index as i32;
        Position::new(i % self.width, i / self.width)
    }

    pub fn positions(&self) -> impl Iterator<Item = Position> + '_ {
        (0..self.len()).map(|i| self.position(i))
    }

    /// One-cell move; a move that would leave the lattice keeps `pos`.
    pub fn apply_move(&self, pos: Position, dir: Direction) -> Position {
        let (dx, dy) = dir.delta();
        let next = Position::new(pos.x + dx, pos.y + dy);
        if self.contains(next) {
            next
        } else {
            pos
        }
    }

    pub fn is_blocked(&self, pos: Position, dir: Direction) -> bool {
        dir != Direction::Stay && self.apply_move(pos, dir) == pos
    }

    /// In-bounds vertices with Chebyshev distance at most `radius` from
    /// `center`, row-major from the lowest `(y, x)`.
    pub fn square(&self, center: Position, radius: i32) -> impl Iterator<Item = Position> + '_ {
        let x0 = (center.x - radius).max(0);
        let x1 = (center.x + radius).min(self.width - 1);
        let y0 = (center.y - radius).max(0);
        let y1 = (center.y + radius).min(self.height - 1);
        (y0..=y1).flat_map(move |y| (x0..=x1).map(move |x| Position::new(x, y)))
    }
}

/// Single 4-connected step from `from` toward `to`.
///
/// The axis with the larger remaining distance is reduced first; ties go
/// to the x axis.
pub fn step_toward(from: Position, to: Position) -> Direction {
    let dx = to.x - from.x;
    let dy = to.y - from.y;
    if dx == 0 && dy == 0 {
        Direction::Stay
    } else if dx.abs() >= dy.abs() {
        if dx > 0 {
            Direction::Right
        } else {
            Direction::Left
        }
    } else if dy > 0 {
        Direction::Up
    } else {
        Direction::Down
    }
}
