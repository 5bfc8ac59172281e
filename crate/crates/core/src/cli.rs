//! The `qce` command-line front end.
//!
//! Exit codes: 0 when the checked property holds (or the requested object was
//! produced), 1 when it fails and the report carries a certificate, 2 on
//! malformed input or usage errors.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::analyzer::{
    build_deviation_family, check_player_qce, check_qce, verdict_for_family, PlayerVerdict,
};
use crate::error::QceError;
use crate::gamecore::{classical_ce_check, lift_diagonal, lift_pure, DensityState, StrategicGame};
use crate::hermlin::DEFAULT_TOL;
use crate::instances::uniform_row_instance;
use crate::io::{parse_distribution, parse_game, parse_state, write_game, write_state};
use crate::optimizer::{bound_m_lambda, bound_positive_eigs, epsilon_certificate, max_gain};
use crate::report::{BoundsSection, ClassicalReport, GainSection, PlayerReport, ReportDocument};
use crate::synthesis::{synthesize_best_deviation, synthesize_unitary};

pub const EXIT_HOLDS: i32 = 0;
pub const EXIT_FAILS: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "qce",
    version,
    about = "Quantum correlated equilibrium checks for strategic games"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct ReportOptions {
    /// Numerical tolerance.
    #[arg(long, env = "QCE_TOL", default_value_t = DEFAULT_TOL, value_parser = parse_tol)]
    pub tol: f64,
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Add wall-clock time to the report (makes it non-deterministic).
    #[arg(long)]
    pub timing: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LiftMode {
    Diag,
    Pure,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decide whether the state is a quantum correlated equilibrium.
    Check {
        game: PathBuf,
        state: PathBuf,
        /// Restrict the check to one player (1-based).
        #[arg(long)]
        player: Option<usize>,
        #[command(flatten)]
        opts: ReportOptions,
    },
    /// Produce an explicit profitable deviation for one player.
    Deviate {
        game: PathBuf,
        state: PathBuf,
        #[arg(long)]
        player: usize,
        #[command(flatten)]
        opts: ReportOptions,
    },
    /// Exact maximum gain with a dual certificate.
    Maxgain {
        game: PathBuf,
        state: PathBuf,
        #[arg(long)]
        player: usize,
        #[command(flatten)]
        opts: ReportOptions,
    },
    /// Spectral upper bounds on the maximum gain.
    Bounds {
        game: PathBuf,
        state: PathBuf,
        #[arg(long)]
        player: usize,
        #[command(flatten)]
        opts: ReportOptions,
    },
    /// Turn a classical distribution into a state file.
    Lift {
        distribution: PathBuf,
        #[arg(long, value_enum)]
        mode: LiftMode,
        /// Write the state here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Classical correlated-equilibrium check of a distribution.
    CeCheck {
        game: PathBuf,
        distribution: PathBuf,
        #[command(flatten)]
        opts: ReportOptions,
    },
    /// Write the uniform-row example (game.json, state.json) for an m×n game.
    Example {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        out_dir: PathBuf,
    },
}

fn parse_tol(s: &str) -> Result<f64, String> {
    match s.trim().parse::<f64>() {
        Ok(t) if t.is_finite() && t > 0.0 => Ok(t),
        Ok(t) => Err(format!("tolerance must be positive and finite, got {t}")),
        Err(e) => Err(format!("not a number: {e}")),
    }
}

/// A failure that ends the command with exit code 2.
#[derive(Debug)]
struct InputError(String);

impl From<QceError> for InputError {
    fn from(e: QceError) -> Self {
        InputError(e.to_string())
    }
}

type CmdResult = Result<i32, InputError>;

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            let code = e.exit_code();
            let sink: &mut dyn Write = if code == 0 { stdout } else { stderr };
            let _ = sink.write_all(text.as_bytes());
            return if code == 0 { EXIT_HOLDS } else { EXIT_INPUT };
        }
    };
    match execute(cli.command, stdout) {
        Ok(code) => code,
        Err(InputError(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            EXIT_INPUT
        }
    }
}

fn execute(command: Command, stdout: &mut dyn Write) -> CmdResult {
    let started = Instant::now();
    match command {
        Command::Check {
            game,
            state,
            player,
            opts,
        } => {
            let (g, rho) = load_pair(&game, &state)?;
            let mut doc = ReportDocument::new("check");
            let verdicts = match player {
                Some(p) => vec![check_player_qce(&rho, &g, player_index(&g, p)?, opts.tol)?],
                None => check_qce(&rho, &g, opts.tol)?.players,
            };
            let is_qce = verdicts.iter().all(|v| v.is_qce);
            doc.is_qce = Some(is_qce);
            doc.players = verdicts.iter().map(PlayerReport::from).collect();
            emit(doc, &opts, started, stdout)?;
            Ok(exit_for(is_qce))
        }
        Command::Deviate {
            game,
            state,
            player,
            opts,
        } => {
            let (g, rho) = load_pair(&game, &state)?;
            let p = player_index(&g, player)?;
            let verdict = check_player_qce(&rho, &g, p, opts.tol)?;
            let mut section = PlayerReport::from(&verdict);
            let code = if verdict.is_qce {
                EXIT_FAILS
            } else {
                let dev = synthesize_best_deviation(&rho, &g, p, opts.tol)?;
                section.deviation = Some((&dev).into());
                EXIT_HOLDS
            };
            let mut doc = ReportDocument::new("deviate");
            doc.is_qce = Some(verdict.is_qce);
            doc.players.push(section);
            emit(doc, &opts, started, stdout)?;
            Ok(code)
        }
        Command::Maxgain {
            game,
            state,
            player,
            opts,
        } => {
            let (g, rho) = load_pair(&game, &state)?;
            let p = player_index(&g, player)?;
            let fam = build_deviation_family(&rho, &g, p)?;
            let verdict = verdict_for_family(&fam, opts.tol)?;
            let mut section = PlayerReport::from(&verdict);
            let code = match hermitian_deviation(&rho, &g, &verdict, opts.tol)? {
                Some(dev) => {
                    section.deviation = Some(dev);
                    EXIT_FAILS
                }
                None => {
                    let report = max_gain(&fam, opts.tol)?;
                    section.gain = Some(GainSection::from(&report));
                    section.bounds = Some(BoundsSection {
                        m_lambda: report.bound_m_lambda,
                        positive_eigs: report.bound_positive_eigs,
                        epsilon_certificate: report.epsilon_certificate,
                    });
                    EXIT_HOLDS
                }
            };
            let mut doc = ReportDocument::new("maxgain");
            doc.is_qce = Some(verdict.is_qce);
            doc.players.push(section);
            emit(doc, &opts, started, stdout)?;
            Ok(code)
        }
        Command::Bounds {
            game,
            state,
            player,
            opts,
        } => {
            let (g, rho) = load_pair(&game, &state)?;
            let p = player_index(&g, player)?;
            let fam = build_deviation_family(&rho, &g, p)?;
            let verdict = verdict_for_family(&fam, opts.tol)?;
            let mut section = PlayerReport::from(&verdict);
            let code = match hermitian_deviation(&rho, &g, &verdict, opts.tol)? {
                Some(dev) => {
                    section.deviation = Some(dev);
                    EXIT_FAILS
                }
                None => {
                    section.bounds = Some(BoundsSection {
                        m_lambda: bound_m_lambda(&fam, opts.tol)?,
                        positive_eigs: bound_positive_eigs(&fam, opts.tol)?,
                        epsilon_certificate: epsilon_certificate(&fam, opts.tol)?,
                    });
                    EXIT_HOLDS
                }
            };
            let mut doc = ReportDocument::new("bounds");
            doc.is_qce = Some(verdict.is_qce);
            doc.players.push(section);
            emit(doc, &opts, started, stdout)?;
            Ok(code)
        }
        Command::Lift {
            distribution,
            mode,
            out,
        } => {
            let p =
                parse_distribution(&read(&distribution)?).map_err(|e| in_file(&distribution, e))?;
            let rho = match mode {
                LiftMode::Diag => lift_diagonal(&p),
                LiftMode::Pure => lift_pure(&p),
            };
            write_output(&write_state(&rho)?, out.as_deref(), stdout)?;
            Ok(EXIT_HOLDS)
        }
        Command::CeCheck {
            game,
            distribution,
            opts,
        } => {
            let g = parse_game(&read(&game)?).map_err(|e| in_file(&game, e))?;
            let p =
                parse_distribution(&read(&distribution)?).map_err(|e| in_file(&distribution, e))?;
            let check = classical_ce_check(&p, &g, opts.tol)?;
            let mut doc = ReportDocument::new("ce-check");
            doc.classical = Some(ClassicalReport::from(&check));
            emit(doc, &opts, started, stdout)?;
            Ok(exit_for(check.holds))
        }
        Command::Example { m, n, out_dir } => {
            if m == 0 || n == 0 || m.checked_mul(n).is_none_or(|d| d > 4096) {
                return Err(InputError(format!(
                    "--m and --n must be positive with m·n ≤ 4096, got {m} and {n}"
                )));
            }
            let (g, rho) = uniform_row_instance(m, n);
            fs::create_dir_all(&out_dir)
                .map_err(|e| InputError(format!("{}: {e}", out_dir.display())))?;
            for (name, bytes) in [
                ("game.json", write_game(&g)?),
                ("state.json", write_state(&rho)?),
            ] {
                let path = out_dir.join(name);
                fs::write(&path, bytes)
                    .map_err(|e| InputError(format!("{}: {e}", path.display())))?;
                writeln!(stdout, "{}", path.display()).map_err(|e| InputError(e.to_string()))?;
            }
            Ok(EXIT_HOLDS)
        }
    }
}

/// When the Hermitian condition fails no exact SDP is defined for the
/// family; return the unitary deviation that certifies this instead.
fn hermitian_deviation(
    rho: &DensityState,
    game: &StrategicGame,
    verdict: &PlayerVerdict,
    tol: f64,
) -> Result<Option<crate::report::DeviationReport>, InputError> {
    match &verdict.hermitian_condition.violation {
        Some(v) => {
            let dev = synthesize_unitary(rho, game, verdict.player, v.i1, v.i2, tol)?;
            Ok(Some((&dev).into()))
        }
        None => Ok(None),
    }
}

fn exit_for(holds: bool) -> i32 {
    if holds {
        EXIT_HOLDS
    } else {
        EXIT_FAILS
    }
}

fn player_index(game: &StrategicGame, player: usize) -> Result<usize, InputError> {
    if player == 0 || player > game.player_count() {
        return Err(InputError(format!(
            "--player must be between 1 and {}, got {player}",
            game.player_count()
        )));
    }
    Ok(player - 1)
}

fn read(path: &Path) -> Result<Vec<u8>, InputError> {
    fs::read(path).map_err(|e| InputError(format!("{}: {e}", path.display())))
}

fn in_file(path: &Path, e: QceError) -> InputError {
    InputError(format!("{}: {e}", path.display()))
}

fn load_pair(game: &Path, state: &Path) -> Result<(StrategicGame, DensityState), InputError> {
    let g = parse_game(&read(game)?).map_err(|e| in_file(game, e))?;
    let rho = parse_state(&read(state)?).map_err(|e| in_file(state, e))?;
    if rho.dim() != g.joint_dim() {
        return Err(InputError(format!(
            "{}: dimension {} does not match the {} joint strategies of {}",
            state.display(),
            rho.dim(),
            g.joint_dim(),
            game.display()
        )));
    }
    Ok((g, rho))
}

fn emit(
    mut doc: ReportDocument,
    opts: &ReportOptions,
    started: Instant,
    stdout: &mut dyn Write,
) -> Result<(), InputError> {
    if opts.timing {
        doc.timing_ms = Some(started.elapsed().as_secs_f64() * 1e3);
    }
    write_output(&doc.to_json()?, opts.out.as_deref(), stdout)
}

fn write_output(
    bytes: &[u8],
    out: Option<&Path>,
    stdout: &mut dyn Write,
) -> Result<(), InputError> {
    match out {
        Some(path) => {
            fs::write(path, bytes).map_err(|e| InputError(format!("{}: {e}", path.display())))
        }
        None => stdout
            .write_all(bytes)
            .map_err(|e| InputError(e.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(
            std::iter::once("qce").chain(args.iter().copied()),
            &mut out,
            &mut err,
        );
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(run_args(&[]).0, EXIT_INPUT);
        assert_eq!(
            run_args(&["check", "a.json", "b.json", "--tol", "-1"]).0,
            EXIT_INPUT
        );
        assert_eq!(
            run_args(&["check", "/nonexistent/g.json", "/nonexistent/s.json"]).0,
            EXIT_INPUT
        );
        assert_eq!(run_args(&["--help"]).0, EXIT_HOLDS);
    }

    #[test]
    fn tolerance_parser() {
        assert_eq!(parse_tol("1e-7"), Ok(1e-7));
        assert!(parse_tol("0").is_err());
        assert!(parse_tol("nan").is_err());
        assert!(parse_tol("abc").is_err());
    }
}
