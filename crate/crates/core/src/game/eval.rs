//! Static Othello evaluator: positional weights, mobility and a late-game disc
//! term, blended by game phase. Scores are from black's point of view.

use crate::game::othello::Board;
use crate::game::Side;

#[rustfmt::skip]
pub const CLASSIC_WEIGHTS: [f64; 64] = [
    100.0, -20.0,  10.0,   5.0,   5.0,  10.0, -20.0, 100.0,
    -20.0, -50.0,  -2.0,  -2.0,  -2.0,  -2.0, -50.0, -20.0,
     10.0,  -2.0,  -1.0,  -1.0,  -1.0,  -1.0,  -2.0,  10.0,
      5.0,  -2.0,  -1.0,  -1.0,  -1.0,  -1.0,  -2.0,   5.0,
      5.0,  -2.0,  -1.0,  -1.0,  -1.0,  -1.0,  -2.0,   5.0,
     10.0,  -2.0,  -1.0,  -1.0,  -1.0,  -1.0,  -2.0,  10.0,
    -20.0, -50.0,  -2.0,  -2.0,  -2.0,  -2.0, -50.0, -20.0,
    100.0, -20.0,  10.0,   5.0,   5.0,  10.0, -20.0, 100.0,
];

#[derive(Debug, Clone, PartialEq)]
pub struct EvalModel {
    pub weights: [f64; 64],
    /// Per legal move of mobility advantage, fading out as the disc term fades in.
    pub mobility_weight: f64,
    /// Per disc of material advantage at the end of the game.
    pub disc_weight: f64,
    /// Disc count at which the disc term starts ramping in.
    pub late_phase_start: u32,
}

impl Default for EvalModel {
    fn default() -> Self {
        Self {
            weights: CLASSIC_WEIGHTS,
            mobility_weight: 8.0,
            disc_weight: 10.0,
            late_phase_start: 44,
        }
    }
}

impl EvalModel {
    /// 0 before the late phase, rising linearly to 1 on a full board.
    fn late_ramp(&self, discs: u32) -> f64 {
        if discs <= self.late_phase_start {
            return 0.0;
        }
        let span = (64 - self.late_phase_start.min(63)) as f64;
        ((discs - self.late_phase_start) as f64 / span).min(1.0)
    }

    pub fn evaluate(&self, board: &Board) -> f64 {
        let mut positional = 0.0;
        let (mut black, mut white) = (board.black(), board.white());
        while black != 0 {
            positional += self.weights[black.trailing_zeros() as usize];
            black &= black - 1;
        }
        while white != 0 {
            positional -= self.weights[white.trailing_zeros() as usize];
            white &= white - 1;
        }
        let ramp = self.late_ramp(board.disc_count());
        let mobility = board.moves_mask_for(Side::First).count_ones() as f64
            - board.moves_mask_for(Side::Second).count_ones() as f64;
        let discs = board.black_discs() as f64 - board.white_discs() as f64;
        positional
            + self.mobility_weight * (1.0 - ramp) * mobility
            + self.disc_weight * ramp * discs
    }

    /// Upper bound on `|evaluate(b)|` over all boards.
    pub fn bound(&self) -> f64 {
        let positional: f64 = self.weights.iter().map(|w| w.abs()).sum();
        // At most 60 empties can be legal for one side.
        positional + 60.0 * self.mobility_weight.abs() + 64.0 * self.disc_weight.abs()
    }
}
