//! Othello tournaments between the two engines, the calibration driver and the
//! cost sweep.

pub mod report;

use std::time::{Duration, Instant};

use rand::seq::IndexedRandom;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::alphabeta::{alphabeta_search, AbConfig, MoveOrdering};
use crate::dist::OrderStats;
use crate::game::calibration::CalibrationConfig;
use crate::game::othello::format_transcript;
use crate::game::{calibrate_q, Board, CalibrationError, Othello, OthelloMove, PositionSample, QCalibration, Side};
use crate::voc::{mgss2_search, FMode, VocError, VocParams};

pub use report::{parse_report, render_report, render_transcripts, write_report, ReportError, ReportFormat};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("game count must be even and positive, got {0}")]
    OddGameCount(usize),
    #[error(transparent)]
    Voc(#[from] VocError),
    #[error(transparent)]
    Calibration(#[from] CalibrationError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum EngineSpec {
    Mgss2 {
        kappa: f64,
        f_mode: FMode,
        batch_sizes: Vec<usize>,
        max_evaluations: Option<usize>,
    },
    AlphaBeta {
        depth: u32,
        ordering: MoveOrdering,
    },
}

impl EngineSpec {
    pub fn mgss2(kappa: f64) -> Self {
        EngineSpec::Mgss2 { kappa, f_mode: FMode::Exact, batch_sizes: vec![1], max_evaluations: None }
    }

    pub fn alphabeta(depth: u32) -> Self {
        EngineSpec::AlphaBeta { depth, ordering: MoveOrdering::StaticEval }
    }

    /// Short name used in reports; never contains commas or whitespace.
    pub fn label(&self) -> String {
        match self {
            EngineSpec::Mgss2 { kappa, .. } => format!("mgss2[k={kappa}]"),
            EngineSpec::AlphaBeta { depth, .. } => format!("ab[{depth}]"),
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if let EngineSpec::Mgss2 { .. } = self {
            self.voc_params()?;
        }
        Ok(())
    }

    fn voc_params(&self) -> Result<VocParams<f64>, VocError> {
        let EngineSpec::Mgss2 { kappa, f_mode, batch_sizes, max_evaluations } = self else {
            unreachable!("not an mgss2 engine")
        };
        let mut p = VocParams::new(*kappa)?;
        p.f_mode = *f_mode;
        p.batch_sizes = batch_sizes.clone();
        p.max_evaluations = *max_evaluations;
        p.validate()?;
        Ok(p)
    }
}

/// Shared, read-only inputs of every search.
pub struct EngineContext<'a> {
    pub game: &'a Othello,
    pub stats: &'a OrderStats<f64>,
    pub calibration: &'a QCalibration,
}

/// What an engine did for one move.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MoveStats {
    /// 1 or 2, matching the tournament's engine order.
    pub engine: u8,
    pub evaluations: usize,
    pub candidates_scored: usize,
    pub stop: String,
}

/// Picks a move with `spec` and reports what it cost.
pub fn choose_move<R: Rng + ?Sized>(
    spec: &EngineSpec,
    ctx: &EngineContext<'_>,
    board: &Board,
    rng: &mut R,
) -> Result<(OthelloMove, MoveStats, Duration), HarnessError> {
    let started = Instant::now();
    let (mv, stats) = match spec {
        EngineSpec::AlphaBeta { depth, ordering } => {
            let cfg = AbConfig { depth: *depth, ordering: *ordering };
            let out = alphabeta_search(ctx.game, board, &cfg).expect("position is not terminal");
            let stop = if out.stats.nodes == 0 { "forced" } else { "depth-limit" };
            (out.best, MoveStats { engine: 0, evaluations: out.stats.nodes, candidates_scored: 0, stop: stop.into() })
        }
        EngineSpec::Mgss2 { .. } => {
            let params = spec.voc_params()?;
            let out = mgss2_search(ctx.game, board, ctx.stats, ctx.calibration, &params, rng)
                .expect("position is not terminal");
            (
                out.best,
                MoveStats {
                    engine: 0,
                    evaluations: out.stats.evaluations,
                    candidates_scored: out.stats.candidates_scored,
                    stop: out.stats.stop.label().into(),
                },
            )
        }
    };
    Ok((mv, stats, started.elapsed()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Winner {
    Black,
    White,
    Draw,
}

impl Winner {
    pub fn label(self) -> &'static str {
        match self {
            Winner::Black => "black",
            Winner::White => "white",
            Winner::Draw => "draw",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "black" => Some(Winner::Black),
            "white" => Some(Winner::White),
            "draw" => Some(Winner::Draw),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameRecord {
    pub game_id: usize,
    pub seed: u64,
    pub black_engine: String,
    pub white_engine: String,
    pub winner: Winner,
    pub black_discs: u32,
    pub white_discs: u32,
    pub engine1_nodes: u64,
    pub engine2_nodes: u64,
    /// Moves chosen by the engines, openings excluded.
    pub plies: usize,
    /// Every move of the game, opening included.
    pub transcript: String,
    pub moves: Vec<MoveStats>,
    /// Set when the game was aborted, e.g. on an illegal move.
    pub flag: Option<String>,
}

impl GameRecord {
    /// Points for engine 1 (1 per win, 1/2 per draw).
    pub fn engine1_points(&self) -> f64 {
        let engine1_black = self.game_id % 2 == 0;
        match (self.winner, engine1_black) {
            (Winner::Draw, _) => 0.5,
            (Winner::Black, true) | (Winner::White, false) => 1.0,
            _ => 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub algorithm: String,
    /// Points scored, draws counting one half.
    pub wins: f64,
    pub nodes: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Timing {
    pub total_ms: u64,
    pub engine1_ms: u64,
    pub engine2_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TournamentResult {
    pub engine1: String,
    pub engine2: String,
    pub seed: u64,
    pub opening_plies: usize,
    pub timing: Timing,
    pub games: Vec<GameRecord>,
    pub aggregate: Vec<AggregateRow>,
}

impl TournamentResult {
    pub fn from_games(
        engine1: String,
        engine2: String,
        seed: u64,
        opening_plies: usize,
        timing: Timing,
        mut games: Vec<GameRecord>,
    ) -> Self {
        games.sort_by_key(|g| g.game_id);
        let points1: f64 = games.iter().map(GameRecord::engine1_points).sum();
        let aggregate = vec![
            AggregateRow {
                algorithm: engine1.clone(),
                wins: points1,
                nodes: games.iter().map(|g| g.engine1_nodes).sum(),
            },
            AggregateRow {
                algorithm: engine2.clone(),
                wins: games.len() as f64 - points1,
                nodes: games.iter().map(|g| g.engine2_nodes).sum(),
            },
        ];
        Self { engine1, engine2, seed, opening_plies, timing, games, aggregate }
    }

    /// Engine 1's share of the points.
    pub fn engine1_score(&self) -> f64 {
        if self.games.is_empty() {
            return 0.0;
        }
        self.aggregate[0].wins / self.games.len() as f64
    }

    /// Engine 1's nodes over engine 2's.
    pub fn node_ratio(&self) -> f64 {
        self.aggregate[0].nodes as f64 / self.aggregate[1].nodes.max(1) as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TournamentConfig {
    pub engine1: EngineSpec,
    pub engine2: EngineSpec,
    /// Even: each opening is played once with each engine as black.
    pub games: usize,
    pub seed: u64,
    pub opening_plies: usize,
    /// Run games on the rayon pool.
    pub parallel: bool,
}

impl TournamentConfig {
    pub fn new(engine1: EngineSpec, engine2: EngineSpec, games: usize, seed: u64) -> Self {
        Self { engine1, engine2, games, seed, opening_plies: 4, parallel: true }
    }
}

/// Independent RNG for one purpose and index under the master seed.
fn stream_rng(seed: u64, purpose: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((purpose << 48) | index);
    rng
}

const OPENING_STREAM: u64 = 1;
const GAME_STREAM: u64 = 2;
const CALIBRATION_STREAM: u64 = 3;

/// Position after `plies` uniformly random legal moves, and those moves.
/// Retries when a game ends inside the opening.
pub fn random_opening<R: Rng + ?Sized>(plies: usize, rng: &mut R) -> (Board, Vec<OthelloMove>) {
    'attempt: loop {
        let mut board = Board::initial();
        let mut moves = Vec::with_capacity(plies);
        for _ in 0..plies {
            let legal = board.successor_moves();
            let Some(&mv) = legal.choose(rng) else {
                continue 'attempt;
            };
            board = board.apply(mv).expect("random opening move is legal");
            moves.push(mv);
        }
        if !board.is_terminal() {
            return (board, moves);
        }
    }
}

struct PlayedGame {
    record: GameRecord,
    engine1_time: Duration,
    engine2_time: Duration,
}

fn play_game(config: &TournamentConfig, ctx: &EngineContext<'_>, game_id: usize) -> Result<PlayedGame, HarnessError> {
    let pair = (game_id / 2) as u64;
    let (mut board, mut transcript) = random_opening(config.opening_plies, &mut stream_rng(config.seed, OPENING_STREAM, pair));
    let seed = stream_rng(config.seed, GAME_STREAM, game_id as u64).next_u64();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let engine1_black = game_id % 2 == 0;
    let (black, white) = if engine1_black {
        (&config.engine1, &config.engine2)
    } else {
        (&config.engine2, &config.engine1)
    };
    let mut moves = Vec::new();
    let mut nodes = [0u64; 2];
    let mut times = [Duration::ZERO; 2];
    let mut flag = None;
    let mut forfeit = None;
    while !board.is_terminal() {
        let engine1_moves = (board.to_move() == Side::First) == engine1_black;
        let (spec, engine_index) = if engine1_moves { (&config.engine1, 0usize) } else { (&config.engine2, 1usize) };
        let (mv, mut stats, spent) = choose_move(spec, ctx, &board, &mut rng)?;
        stats.engine = engine_index as u8 + 1;
        nodes[engine_index] += stats.evaluations as u64;
        times[engine_index] += spent;
        moves.push(stats);
        match board.apply(mv) {
            Ok(next) => {
                board = next;
                transcript.push(mv);
            }
            Err(e) => {
                flag = Some(format!("engine {} played an illegal move: {e}", engine_index + 1));
                forfeit = Some(board.to_move());
                break;
            }
        }
    }
    let winner = match forfeit {
        Some(Side::First) => Winner::White,
        Some(Side::Second) => Winner::Black,
        None => match board.final_margin().signum() {
            1 => Winner::Black,
            -1 => Winner::White,
            _ => Winner::Draw,
        },
    };
    Ok(PlayedGame {
        record: GameRecord {
            game_id,
            seed,
            black_engine: black.label(),
            white_engine: white.label(),
            winner,
            black_discs: board.black_discs(),
            white_discs: board.white_discs(),
            engine1_nodes: nodes[0],
            engine2_nodes: nodes[1],
            plies: moves.len(),
            transcript: format_transcript(&transcript),
            moves,
            flag,
        },
        engine1_time: times[0],
        engine2_time: times[1],
    })
}

/// Plays the configured games: consecutive game ids share an opening with
/// colors swapped. Deterministic for a given config apart from `timing`.
pub fn run_tournament(config: &TournamentConfig, ctx: &EngineContext<'_>) -> Result<TournamentResult, HarnessError> {
    if config.games == 0 || config.games % 2 != 0 {
        return Err(HarnessError::OddGameCount(config.games));
    }
    config.engine1.validate()?;
    config.engine2.validate()?;
    let started = Instant::now();
    let played: Vec<PlayedGame> = if config.parallel {
        (0..config.games)
            .into_par_iter()
            .map(|id| play_game(config, ctx, id))
            .collect::<Result<_, _>>()?
    } else {
        (0..config.games).map(|id| play_game(config, ctx, id)).collect::<Result<_, _>>()?
    };
    let timing = Timing {
        total_ms: started.elapsed().as_millis() as u64,
        engine1_ms: played.iter().map(|p| p.engine1_time).sum::<Duration>().as_millis() as u64,
        engine2_ms: played.iter().map(|p| p.engine2_time).sum::<Duration>().as_millis() as u64,
    };
    Ok(TournamentResult::from_games(
        config.engine1.label(),
        config.engine2.label(),
        config.seed,
        config.opening_plies,
        timing,
        played.into_iter().map(|p| p.record).collect(),
    ))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationRun {
    pub games: usize,
    pub seed: u64,
    /// Chance of a uniformly random move; otherwise the mover plays the best
    /// move by one-ply static value.
    pub explore: f64,
    pub buckets: CalibrationConfig,
}

impl CalibrationRun {
    pub fn new(games: usize, seed: u64) -> Self {
        Self { games, seed, explore: 0.25, buckets: CalibrationConfig::default() }
    }
}

/// Successor statistics gathered from noisy greedy self-play.
pub fn collect_samples(game: &Othello, run: &CalibrationRun) -> Vec<PositionSample> {
    let mut samples = Vec::new();
    for g in 0..run.games {
        let mut rng = stream_rng(run.seed, CALIBRATION_STREAM, g as u64);
        let mut board = Board::initial();
        while !board.is_terminal() {
            let sample = PositionSample::from_state(game, &board).expect("not terminal");
            let moves = board.successor_moves();
            let mv = if rng.random_bool(run.explore) {
                *moves.choose(&mut rng).expect("not terminal")
            } else {
                let best = sample.children.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let i = sample.children.iter().position(|&c| c == best).expect("nonempty");
                moves[i]
            };
            samples.push(sample);
            board = board.apply(mv).expect("chosen from legal moves");
        }
    }
    samples
}

/// Plays calibration games and fits q. With too few samples for any bucket the
/// result holds only the global fit.
pub fn run_calibration(game: &Othello, stats: &OrderStats<f64>, run: &CalibrationRun) -> Result<QCalibration, HarnessError> {
    let samples = collect_samples(game, run);
    let calibration = calibrate_q(&samples, stats, &run.buckets)?;
    if calibration.buckets.is_empty() {
        eprintln!(
            "warning: {} positions are too few for any bucket; only the global fit is written",
            samples.len()
        );
    }
    Ok(calibration)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub kappa: f64,
    /// MGSS2's share of the points against the baseline.
    pub score: f64,
    pub mgss2_nodes: u64,
    pub baseline_nodes: u64,
    pub mgss2_moves: usize,
}

impl SweepRow {
    pub fn nodes_per_move(&self) -> f64 {
        self.mgss2_nodes as f64 / self.mgss2_moves.max(1) as f64
    }

    pub fn node_ratio(&self) -> f64 {
        self.mgss2_nodes as f64 / self.baseline_nodes.max(1) as f64
    }
}

/// Mini-tournaments of MGSS2 (built from `base` with each κ) against
/// `baseline`.
pub fn sweep_cost(
    base: &EngineSpec,
    baseline: &EngineSpec,
    kappas: &[f64],
    games: usize,
    seed: u64,
    ctx: &EngineContext<'_>,
) -> Result<Vec<SweepRow>, HarnessError> {
    kappas
        .iter()
        .map(|&kappa| {
            let mut spec = base.clone();
            if let EngineSpec::Mgss2 { kappa: k, .. } = &mut spec {
                *k = kappa;
            }
            let result = run_tournament(&TournamentConfig::new(spec, baseline.clone(), games, seed), ctx)?;
            Ok(SweepRow {
                kappa,
                score: result.engine1_score(),
                mgss2_nodes: result.aggregate[0].nodes,
                baseline_nodes: result.aggregate[1].nodes,
                mgss2_moves: result.games.iter().flat_map(|g| &g.moves).filter(|m| m.engine == 1).count(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests;
