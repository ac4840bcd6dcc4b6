//! Tournament reports: CSV with a trailing aggregate block, JSON-lines records,
//! and one-line-per-game transcripts.
//!
//! Wall-clock timings only ever appear in the header line, so two runs of the
//! same configuration differ in that line at most.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{AggregateRow, GameRecord, Timing, TournamentResult, Winner};

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("cannot write report: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("unknown report format {0:?}")]
    UnknownFormat(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Records,
}

impl FromStr for ReportFormat {
    type Err = ReportError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "records" => Ok(ReportFormat::Records),
            _ => Err(ReportError::UnknownFormat(s.into())),
        }
    }
}

pub const CSV_COLUMNS: &str =
    "game_id,seed,black_engine,white_engine,winner,black_discs,white_discs,engine1_nodes,engine2_nodes,plies,transcript,flag";
pub const AGGREGATE_COLUMNS: &str = "algorithm,wins,nodes";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Header {
    engine1: String,
    engine2: String,
    seed: u64,
    opening_plies: usize,
    timing: Timing,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum Record {
    Header(Header),
    Game(GameRecord),
    Aggregate(AggregateRow),
}

fn header_of(result: &TournamentResult) -> Header {
    Header {
        engine1: result.engine1.clone(),
        engine2: result.engine2.clone(),
        seed: result.seed,
        opening_plies: result.opening_plies,
        timing: result.timing,
    }
}

pub fn render_report(result: &TournamentResult, format: ReportFormat) -> String {
    match format {
        ReportFormat::Csv => render_csv(result),
        ReportFormat::Records => render_records(result),
    }
}

pub fn write_report(result: &TournamentResult, format: ReportFormat, path: &Path) -> Result<(), ReportError> {
    std::fs::write(path, render_report(result, format))?;
    Ok(())
}

pub fn parse_report(text: &str, format: ReportFormat) -> Result<TournamentResult, ReportError> {
    match format {
        ReportFormat::Csv => parse_csv(text),
        ReportFormat::Records => parse_records(text),
    }
}

fn render_csv(r: &TournamentResult) -> String {
    let t = r.timing;
    let mut out = format!(
        "# engine1={} engine2={} seed={} opening_plies={} wall_ms={} engine1_ms={} engine2_ms={}\n",
        r.engine1, r.engine2, r.seed, r.opening_plies, t.total_ms, t.engine1_ms, t.engine2_ms
    );
    out.push_str(CSV_COLUMNS);
    out.push('\n');
    for g in &r.games {
        let flag = g.flag.as_deref().unwrap_or("").replace([',', '\n'], ";");
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            g.game_id,
            g.seed,
            g.black_engine,
            g.white_engine,
            g.winner.label(),
            g.black_discs,
            g.white_discs,
            g.engine1_nodes,
            g.engine2_nodes,
            g.plies,
            g.transcript,
            flag
        )
        .unwrap();
    }
    out.push('\n');
    out.push_str(AGGREGATE_COLUMNS);
    out.push('\n');
    for a in &r.aggregate {
        writeln!(out, "{},{},{}", a.algorithm, a.wins, a.nodes).unwrap();
    }
    out
}

fn perr(line: usize, msg: impl Into<String>) -> ReportError {
    ReportError::Parse { line: line + 1, msg: msg.into() }
}

fn field<T: FromStr>(line: usize, name: &str, s: &str) -> Result<T, ReportError> {
    s.parse().map_err(|_| perr(line, format!("bad {name} {s:?}")))
}

/// Inverse of the CSV rendering. Per-move statistics are not part of the CSV,
/// so the parsed games have empty `moves`.
fn parse_csv(text: &str) -> Result<TournamentResult, ReportError> {
    let mut lines = text.lines().enumerate();
    let (n, header) = lines.next().ok_or_else(|| perr(0, "empty report"))?;
    let header = header.strip_prefix("# ").ok_or_else(|| perr(n, "missing header"))?;
    let kv = |key: &str| -> Result<&str, ReportError> {
        header
            .split(' ')
            .find_map(|p| p.strip_prefix(key).and_then(|r| r.strip_prefix('=')))
            .ok_or_else(|| perr(n, format!("header lacks {key}")))
    };
    let engine1 = kv("engine1")?.to_string();
    let engine2 = kv("engine2")?.to_string();
    let seed = field(n, "seed", kv("seed")?)?;
    let opening_plies = field(n, "opening_plies", kv("opening_plies")?)?;
    let timing = Timing {
        total_ms: field(n, "wall_ms", kv("wall_ms")?)?,
        engine1_ms: field(n, "engine1_ms", kv("engine1_ms")?)?,
        engine2_ms: field(n, "engine2_ms", kv("engine2_ms")?)?,
    };
    match lines.next() {
        Some((_, l)) if l == CSV_COLUMNS => {}
        Some((n, _)) => return Err(perr(n, "unexpected column header")),
        None => return Err(perr(n + 1, "missing column header")),
    }

    let mut games = Vec::new();
    for (n, line) in lines.by_ref() {
        if line.is_empty() {
            break;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 12 {
            return Err(perr(n, format!("expected 12 fields, got {}", f.len())));
        }
        games.push(GameRecord {
            game_id: field(n, "game_id", f[0])?,
            seed: field(n, "seed", f[1])?,
            black_engine: f[2].into(),
            white_engine: f[3].into(),
            winner: Winner::parse(f[4]).ok_or_else(|| perr(n, format!("bad winner {:?}", f[4])))?,
            black_discs: field(n, "black_discs", f[5])?,
            white_discs: field(n, "white_discs", f[6])?,
            engine1_nodes: field(n, "engine1_nodes", f[7])?,
            engine2_nodes: field(n, "engine2_nodes", f[8])?,
            plies: field(n, "plies", f[9])?,
            transcript: f[10].into(),
            moves: Vec::new(),
            flag: (!f[11].is_empty()).then(|| f[11].to_string()),
        });
    }

    match lines.next() {
        Some((_, l)) if l == AGGREGATE_COLUMNS => {}
        Some((n, _)) => return Err(perr(n, "expected aggregate block")),
        None => return Err(perr(0, "missing aggregate block")),
    }
    let mut aggregate = Vec::new();
    for (n, line) in lines {
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 3 {
            return Err(perr(n, "aggregate rows have 3 fields"));
        }
        aggregate.push(AggregateRow {
            algorithm: f[0].into(),
            wins: field(n, "wins", f[1])?,
            nodes: field(n, "nodes", f[2])?,
        });
    }
    Ok(TournamentResult { engine1, engine2, seed, opening_plies, timing, games, aggregate })
}

fn render_records(r: &TournamentResult) -> String {
    let mut out = String::new();
    let mut push = |rec: Record| {
        out.push_str(&serde_json::to_string(&rec).expect("records serialize"));
        out.push('\n');
    };
    push(Record::Header(header_of(r)));
    r.games.iter().cloned().for_each(|g| push(Record::Game(g)));
    r.aggregate.iter().cloned().for_each(|a| push(Record::Aggregate(a)));
    out
}

fn parse_records(text: &str) -> Result<TournamentResult, ReportError> {
    let mut header = None;
    let mut games = Vec::new();
    let mut aggregate = Vec::new();
    for (n, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        match serde_json::from_str(line).map_err(|e| perr(n, e.to_string()))? {
            Record::Header(h) => header = Some(h),
            Record::Game(g) => games.push(g),
            Record::Aggregate(a) => aggregate.push(a),
        }
    }
    let h = header.ok_or_else(|| perr(0, "no header record"))?;
    Ok(TournamentResult {
        engine1: h.engine1,
        engine2: h.engine2,
        seed: h.seed,
        opening_plies: h.opening_plies,
        timing: h.timing,
        games,
        aggregate,
    })
}

/// One line per game: seed, engines, result and the full move list.
pub fn render_transcripts(r: &TournamentResult) -> String {
    let mut out = String::new();
    for g in &r.games {
        writeln!(
            out,
            "seed={} black={} white={} result={} score={}-{} moves={}",
            g.seed,
            g.black_engine,
            g.white_engine,
            g.winner.label(),
            g.black_discs,
            g.white_discs,
            g.transcript
        )
        .unwrap();
    }
    out
}
