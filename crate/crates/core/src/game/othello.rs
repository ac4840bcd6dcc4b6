//! Bitboard Othello. Square index is `row * 8 + col` with `a1 = 0`, `h8 = 63`.

use std::fmt;

use crate::game::eval::EvalModel;
use crate::game::{Game, GameError, Side};

const NOT_A_FILE: u64 = 0xfefe_fefe_fefe_fefe;
const NOT_H_FILE: u64 = 0x7f7f_7f7f_7f7f_7f7f;

/// Exact score per disc of final margin.
pub const TERMINAL_PER_DISC: f64 = 100.0;
/// Exact score bonus for winning, on top of the margin term.
pub const TERMINAL_WIN: f64 = 10_000.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OthelloMove {
    Place(u8),
    Pass,
}

impl OthelloMove {
    /// Lowercase coordinate (`d3`) or `--` for a pass.
    pub fn to_notation(self) -> String {
        match self {
            OthelloMove::Pass => "--".to_string(),
            OthelloMove::Place(sq) => {
                let col = (b'a' + sq % 8) as char;
                let row = (b'1' + sq / 8) as char;
                format!("{col}{row}")
            }
        }
    }

    pub fn parse(s: &str) -> Result<Self, GameError> {
        if s == "--" {
            return Ok(OthelloMove::Pass);
        }
        let b = s.as_bytes();
        if b.len() != 2 || !(b'a'..=b'h').contains(&b[0]) || !(b'1'..=b'8').contains(&b[1]) {
            return Err(GameError::Parse(s.to_string()));
        }
        Ok(OthelloMove::Place((b[1] - b'1') * 8 + (b[0] - b'a')))
    }
}

impl fmt::Display for OthelloMove {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_notation())
    }
}

/// Parses a concatenated transcript such as `d3c5--f6`.
pub fn parse_transcript(s: &str) -> Result<Vec<OthelloMove>, GameError> {
    if s.len() % 2 != 0 {
        return Err(GameError::Parse(s.to_string()));
    }
    (0..s.len()).step_by(2).map(|i| OthelloMove::parse(&s[i..i + 2])).collect()
}

pub fn format_transcript(moves: &[OthelloMove]) -> String {
    moves.iter().map(|m| m.to_notation()).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Board {
    black: u64,
    white: u64,
    to_move: Side,
    passes: u8,
}

impl Default for Board {
    fn default() -> Self {
        Self::initial()
    }
}

#[inline]
fn shift(b: u64, dir: usize) -> u64 {
    match dir {
        0 => (b << 1) & NOT_A_FILE, // east
        1 => (b >> 1) & NOT_H_FILE, // west
        2 => b << 8,                // north (toward row 8)
        3 => b >> 8,                // south
        4 => (b << 9) & NOT_A_FILE,
        5 => (b << 7) & NOT_H_FILE,
        6 => (b >> 7) & NOT_A_FILE,
        _ => (b >> 9) & NOT_H_FILE,
    }
}

fn moves_mask(own: u64, opp: u64) -> u64 {
    let empty = !(own | opp);
    let mut moves = 0;
    for dir in 0..8 {
        let mut x = shift(own, dir) & opp;
        for _ in 0..5 {
            x |= shift(x, dir) & opp;
        }
        moves |= shift(x, dir) & empty;
    }
    moves
}

fn flips(own: u64, opp: u64, sq: u8) -> u64 {
    let bit = 1u64 << sq;
    let mut all = 0;
    for dir in 0..8 {
        let mut run = 0;
        let mut x = shift(bit, dir);
        while x & opp != 0 {
            run |= x;
            x = shift(x, dir);
        }
        if x & own != 0 {
            all |= run;
        }
    }
    all
}

impl Board {
    pub fn initial() -> Self {
        // d4, e5 white; e4, d5 black.
        let white = (1u64 << 27) | (1u64 << 36);
        let black = (1u64 << 28) | (1u64 << 35);
        Self { black, white, to_move: Side::First, passes: 0 }
    }

    /// Builds a board from 64 cells in `a1..h1, a2..h8` order: `X` black, `O`
    /// white, `.` empty. Whitespace is ignored.
    pub fn from_cells(cells: &str, to_move: Side) -> Result<Self, GameError> {
        let mut black = 0u64;
        let mut white = 0u64;
        let mut idx = 0usize;
        for ch in cells.chars().filter(|c| !c.is_whitespace()) {
            if idx >= 64 {
                return Err(GameError::Parse(cells.to_string()));
            }
            match ch {
                'X' | 'x' | 'B' | 'b' => black |= 1 << idx,
                'O' | 'o' | 'W' | 'w' => white |= 1 << idx,
                '.' | '-' => {}
                _ => return Err(GameError::Parse(cells.to_string())),
            }
            idx += 1;
        }
        if idx != 64 {
            return Err(GameError::Parse(cells.to_string()));
        }
        Ok(Self { black, white, to_move, passes: 0 })
    }

    pub fn from_bits(black: u64, white: u64, to_move: Side) -> Self {
        debug_assert_eq!(black & white, 0);
        Self { black, white, to_move, passes: 0 }
    }

    pub fn black(&self) -> u64 {
        self.black
    }

    pub fn white(&self) -> u64 {
        self.white
    }

    pub fn to_move(&self) -> Side {
        self.to_move
    }

    pub fn passes(&self) -> u8 {
        self.passes
    }

    pub fn disc_count(&self) -> u32 {
        (self.black | self.white).count_ones()
    }

    pub fn black_discs(&self) -> u32 {
        self.black.count_ones()
    }

    pub fn white_discs(&self) -> u32 {
        self.white.count_ones()
    }

    fn own_opp(&self, side: Side) -> (u64, u64) {
        match side {
            Side::First => (self.black, self.white),
            Side::Second => (self.white, self.black),
        }
    }

    pub fn moves_mask_for(&self, side: Side) -> u64 {
        let (own, opp) = self.own_opp(side);
        moves_mask(own, opp)
    }

    /// Flanking-rule placements for the side to move, ascending by square.
    /// Empty means the mover must pass (or the game is over).
    pub fn legal_moves(&self) -> Vec<u8> {
        let mut mask = self.moves_mask_for(self.to_move);
        let mut out = Vec::with_capacity(mask.count_ones() as usize);
        while mask != 0 {
            out.push(mask.trailing_zeros() as u8);
            mask &= mask - 1;
        }
        out
    }

    pub fn is_terminal(&self) -> bool {
        self.passes >= 2
            || (self.moves_mask_for(Side::First) == 0 && self.moves_mask_for(Side::Second) == 0)
    }

    /// Successor moves: placements, a forced pass, or nothing when terminal.
    pub fn successor_moves(&self) -> Vec<OthelloMove> {
        if self.is_terminal() {
            return Vec::new();
        }
        let placements = self.legal_moves();
        if placements.is_empty() {
            vec![OthelloMove::Pass]
        } else {
            placements.into_iter().map(OthelloMove::Place).collect()
        }
    }

    pub fn apply(&self, mv: OthelloMove) -> Result<Board, GameError> {
        let (own, opp) = self.own_opp(self.to_move);
        match mv {
            OthelloMove::Pass => {
                if self.is_terminal() || moves_mask(own, opp) != 0 {
                    return Err(GameError::IllegalMove(mv.to_notation()));
                }
                Ok(Board { to_move: self.to_move.opponent(), passes: self.passes + 1, ..*self })
            }
            OthelloMove::Place(sq) => {
                if sq >= 64 || moves_mask(own, opp) & (1u64 << sq) == 0 {
                    return Err(GameError::IllegalMove(mv.to_notation()));
                }
                let f = flips(own, opp, sq);
                let own = own | f | (1u64 << sq);
                let opp = opp & !f;
                let (black, white) = match self.to_move {
                    Side::First => (own, opp),
                    Side::Second => (opp, own),
                };
                Ok(Board { black, white, to_move: self.to_move.opponent(), passes: 0 })
            }
        }
    }

    /// Same position with the colors exchanged (including the side to move).
    pub fn swap_colors(&self) -> Board {
        Board {
            black: self.white,
            white: self.black,
            to_move: self.to_move.opponent(),
            passes: self.passes,
        }
    }

    /// Final disc margin from black's side, with empties going to the winner.
    pub fn final_margin(&self) -> i32 {
        let b = self.black_discs() as i32;
        let w = self.white_discs() as i32;
        let empties = 64 - b - w;
        match b.cmp(&w) {
            std::cmp::Ordering::Greater => b - w + empties,
            std::cmp::Ordering::Less => b - w - empties,
            std::cmp::Ordering::Equal => 0,
        }
    }

    pub fn cell(&self, sq: u8) -> char {
        let bit = 1u64 << sq;
        if self.black & bit != 0 {
            'X'
        } else if self.white & bit != 0 {
            'O'
        } else {
            '.'
        }
    }
}

impl fmt::Display for Board {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "  a b c d e f g h")?;
        for row in (0..8u8).rev() {
            write!(f, "{}", row + 1)?;
            for col in 0..8u8 {
                write!(f, " {}", self.cell(row * 8 + col))?;
            }
            writeln!(f)?;
        }
        let mover = match self.to_move {
            Side::First => "black (X)",
            Side::Second => "white (O)",
        };
        write!(f, "{} to move, {}-{}", mover, self.black_discs(), self.white_discs())
    }
}

/// Othello with a fixed static evaluator.
#[derive(Debug, Clone, Default)]
pub struct Othello {
    pub eval: EvalModel,
}

impl Othello {
    pub fn new(eval: EvalModel) -> Self {
        Self { eval }
    }
}

impl Game for Othello {
    type State = Board;
    type Move = OthelloMove;

    fn side_to_move(&self, state: &Board) -> Side {
        state.to_move()
    }

    fn successors(&self, state: &Board) -> Vec<OthelloMove> {
        state.successor_moves()
    }

    fn apply(&self, state: &Board, mv: OthelloMove) -> Result<Board, GameError> {
        state.apply(mv)
    }

    fn is_terminal(&self, state: &Board) -> bool {
        state.is_terminal()
    }

    fn terminal_score(&self, state: &Board) -> f64 {
        let margin = state.final_margin();
        TERMINAL_WIN * f64::from(margin.signum()) + TERMINAL_PER_DISC * f64::from(margin)
    }

    fn evaluate(&self, state: &Board) -> f64 {
        self.eval.evaluate(state)
    }

    fn phase(&self, state: &Board) -> u32 {
        state.disc_count()
    }

    fn move_label(&self, mv: OthelloMove) -> String {
        mv.to_notation()
    }
}
