use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use mgss::alphabeta::MoveOrdering;
use mgss::game::{Game, Othello, QCalibration, Side};
use mgss::harness::{
    choose_move, random_opening, render_report, render_transcripts, run_calibration, run_tournament, sweep_cost,
    CalibrationRun, EngineContext, EngineSpec, ReportFormat, TournamentConfig,
};
use mgss::voc::{mgss2_search, Decision, FMode};
use mgss::{OrderStats64, VocParams64};

#[derive(Parser)]
#[command(name = "mgss", version, about = "Selective game-tree search vs alpha-beta on Othello")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Paired-opening match between MGSS2 and alpha-beta.
    Tournament(TournamentArgs),
    /// Self-play games to fit the successor-value model.
    Calibrate(CalibrateArgs),
    /// Mini-tournaments over a grid of computation costs.
    SweepCost(SweepArgs),
    /// One verbose game.
    Play(PlayArgs),
    /// Candidate scores at every step of one move decision.
    VocTrace(TraceArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Records,
}

#[derive(Clone, Copy, ValueEnum)]
enum FModeArg {
    Exact,
    SingleStage,
}

#[derive(Args, Clone)]
struct EngineArgs {
    /// Cost of one successor evaluation.
    #[arg(long, default_value_t = 2.0)]
    kappa: f64,
    #[arg(long, value_enum, default_value_t = FModeArg::Exact)]
    f_mode: FModeArg,
    /// Successor counts per computation, comma-separated; 0 means "all".
    #[arg(long, default_value = "1", value_delimiter = ',')]
    batch: Vec<usize>,
    /// Per-move evaluation budget for MGSS2.
    #[arg(long)]
    max_evals: Option<usize>,
    #[arg(long, default_value_t = 2)]
    ab_depth: u32,
    /// Calibration file; fitted from fresh self-play when absent.
    #[arg(long)]
    calibration: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 4)]
    opening_plies: usize,
}

impl EngineArgs {
    fn mgss2(&self) -> EngineSpec {
        EngineSpec::Mgss2 {
            kappa: self.kappa,
            f_mode: match self.f_mode {
                FModeArg::Exact => FMode::Exact,
                FModeArg::SingleStage => FMode::SingleStage,
            },
            batch_sizes: self.batch.iter().map(|&b| if b == 0 { usize::MAX } else { b }).collect(),
            max_evaluations: self.max_evals,
        }
    }

    fn alphabeta(&self) -> EngineSpec {
        EngineSpec::AlphaBeta { depth: self.ab_depth, ordering: MoveOrdering::StaticEval }
    }

    fn calibration(&self, game: &Othello, stats: &OrderStats64) -> Result<QCalibration, String> {
        match &self.calibration {
            Some(path) => QCalibration::load(path).map_err(|e| format!("{}: {e}", path.display())),
            None => {
                eprintln!("no --calibration given; fitting one from 200 self-play games");
                run_calibration(game, stats, &CalibrationRun::new(200, self.seed)).map_err(|e| e.to_string())
            }
        }
    }
}

#[derive(Args)]
struct TournamentArgs {
    #[command(flatten)]
    engine: EngineArgs,
    #[arg(long, default_value_t = 20)]
    games: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
    /// Also write one transcript line per game here.
    #[arg(long)]
    transcripts: Option<PathBuf>,
}

#[derive(Args)]
struct CalibrateArgs {
    #[arg(long, default_value_t = 200)]
    games: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value = "calibration.txt")]
    out: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    engine: EngineArgs,
    #[arg(long, default_value = "0.25,0.5,1,2,4,8,16", value_delimiter = ',')]
    kappas: Vec<f64>,
    #[arg(long, default_value_t = 10)]
    games: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PlayArgs {
    #[command(flatten)]
    engine: EngineArgs,
    /// Give MGSS2 the white pieces.
    #[arg(long)]
    mgss2_white: bool,
}

#[derive(Args)]
struct TraceArgs {
    #[command(flatten)]
    engine: EngineArgs,
    /// Print the final search tree.
    #[arg(long)]
    dump_tree: bool,
    /// Candidates listed per step.
    #[arg(long, default_value_t = 10)]
    top: usize,
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), String> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| format!("{}: {e}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn tournament(args: &TournamentArgs) -> Result<(), String> {
    let game = Othello::default();
    let stats = OrderStats64::default();
    let calibration = args.engine.calibration(&game, &stats)?;
    let ctx = EngineContext { game: &game, stats: &stats, calibration: &calibration };
    let mut config = TournamentConfig::new(args.engine.mgss2(), args.engine.alphabeta(), args.games, args.engine.seed);
    config.opening_plies = args.engine.opening_plies;
    let result = run_tournament(&config, &ctx).map_err(|e| e.to_string())?;
    let format = match args.format {
        FormatArg::Csv => ReportFormat::Csv,
        FormatArg::Records => ReportFormat::Records,
    };
    emit(&render_report(&result, format), args.out.as_deref())?;
    if let Some(path) = &args.transcripts {
        emit(&render_transcripts(&result), Some(path))?;
    }
    eprintln!(
        "{}: {} points, {} nodes | {}: {} points, {} nodes | ratio {:.3}",
        result.aggregate[0].algorithm,
        result.aggregate[0].wins,
        result.aggregate[0].nodes,
        result.aggregate[1].algorithm,
        result.aggregate[1].wins,
        result.aggregate[1].nodes,
        result.node_ratio()
    );
    Ok(())
}

fn calibrate(args: &CalibrateArgs) -> Result<(), String> {
    let game = Othello::default();
    let stats = OrderStats64::default();
    let cal = run_calibration(&game, &stats, &CalibrationRun::new(args.games, args.seed)).map_err(|e| e.to_string())?;
    cal.save(&args.out).map_err(|e| format!("{}: {e}", args.out.display()))?;
    eprintln!(
        "global dmu={:.3} sigma={:.3} from {} positions; {} buckets",
        cal.global.dmu,
        cal.global.sigma,
        cal.global.count,
        cal.buckets.len()
    );
    Ok(())
}

fn sweep(args: &SweepArgs) -> Result<(), String> {
    let game = Othello::default();
    let stats = OrderStats64::default();
    let calibration = args.engine.calibration(&game, &stats)?;
    let ctx = EngineContext { game: &game, stats: &stats, calibration: &calibration };
    let rows = sweep_cost(&args.engine.mgss2(), &args.engine.alphabeta(), &args.kappas, args.games, args.engine.seed, &ctx)
        .map_err(|e| e.to_string())?;
    let mut text = String::from("kappa,score,mgss2_nodes,baseline_nodes,nodes_per_move,node_ratio\n");
    for r in &rows {
        text.push_str(&format!(
            "{},{:.3},{},{},{:.1},{:.4}\n",
            r.kappa,
            r.score,
            r.mgss2_nodes,
            r.baseline_nodes,
            r.nodes_per_move(),
            r.node_ratio()
        ));
    }
    emit(&text, args.out.as_deref())
}

fn play(args: &PlayArgs) -> Result<(), String> {
    let game = Othello::default();
    let stats = OrderStats64::default();
    let calibration = args.engine.calibration(&game, &stats)?;
    let ctx = EngineContext { game: &game, stats: &stats, calibration: &calibration };
    let mut rng = ChaCha8Rng::seed_from_u64(args.engine.seed);
    let (mut board, opening) = random_opening(args.engine.opening_plies, &mut rng);
    let opening: Vec<String> = opening.iter().map(|m| m.to_notation()).collect();
    println!("opening: {}", opening.join(" "));
    let (mgss2, ab) = (args.engine.mgss2(), args.engine.alphabeta());
    let (black, white) = if args.mgss2_white { (&ab, &mgss2) } else { (&mgss2, &ab) };
    while !board.is_terminal() {
        let spec = if board.to_move() == Side::First { black } else { white };
        let (mv, stats, spent) = choose_move(spec, &ctx, &board, &mut rng).map_err(|e| e.to_string())?;
        println!(
            "{:<16} {:>4}  evals={:<6} stop={} ({:.1} ms)",
            spec.label(),
            mv.to_notation(),
            stats.evaluations,
            stats.stop,
            spent.as_secs_f64() * 1e3
        );
        board = board.apply(mv).map_err(|e| e.to_string())?;
        println!("{board}");
    }
    println!("final {}-{}", board.black_discs(), board.white_discs());
    Ok(())
}

fn voc_trace(args: &TraceArgs) -> Result<(), String> {
    let game = Othello::default();
    let stats = OrderStats64::default();
    let calibration = args.engine.calibration(&game, &stats)?;
    let mut rng = ChaCha8Rng::seed_from_u64(args.engine.seed);
    let (board, _) = random_opening(args.engine.opening_plies, &mut rng);
    println!("{board}");
    let EngineSpec::Mgss2 { kappa, f_mode, batch_sizes, max_evaluations } = args.engine.mgss2() else {
        unreachable!()
    };
    let mut params = VocParams64::new(kappa).map_err(|e| e.to_string())?;
    params.f_mode = f_mode;
    params.batch_sizes = batch_sizes;
    params.max_evaluations = max_evaluations;
    params.trace = true;
    params.validate().map_err(|e| e.to_string())?;
    let out = mgss2_search(&game, &board, &stats, &calibration, &params, &mut rng).ok_or("position is terminal")?;
    let label = |id: usize| match out.tree.top_level_nodes().iter().position(|&c| c == id) {
        Some(i) => game.move_label(out.root_moves[i]),
        None => String::new(),
    };
    for step in &out.trace {
        let action = match &step.decision {
            Decision::Expand(c) => format!("expand #{} x{}", c.node, c.steps),
            Decision::Stop(r) => format!("stop ({})", r.label()),
        };
        println!("step {}: {} of {} candidates -> {action}", step.iteration, step.candidates.len().min(args.top), step.candidates.len());
        for c in step.candidates.iter().take(args.top) {
            println!(
                "  #{:<5} depth={} {:?}/{:?}{} benefit={:.5} steps={} net={:.5}",
                c.node,
                c.depth,
                c.tag.kind,
                c.tag.case,
                if c.tag.under_best { " best" } else { "" },
                c.benefit,
                c.steps,
                c.net_value
            );
        }
    }
    println!(
        "chose {} value={:.3} evaluations={} stop={}",
        game.move_label(out.best),
        out.value,
        out.stats.evaluations,
        out.stats.stop.label()
    );
    if args.dump_tree {
        print!("{}", out.tree.dump(label));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Tournament(a) => tournament(a),
        Command::Calibrate(a) => calibrate(a),
        Command::SweepCost(a) => sweep(a),
        Command::Play(a) => play(a),
        Command::VocTrace(a) => voc_trace(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
