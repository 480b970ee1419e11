//! The four subcommands. Each writes its reports into `out` and returns the
//! one-line verdict printed on stdout.

use std::path::Path;

use collapse_core::apparatus::{MacroLabel, ReservoirPrep};
use collapse_core::experiments::{
    kick_statistics, run_anamnesis, run_conservation_chain, run_trials, special_state_search,
    AnamnesisReport, ExperimentScript, FrequencyTable, KickDistribution, KickStatistics,
    LedgerReport, SearchGrid, ServerRecord, SpecialStateResult,
};
use collapse_core::rng::{derive_seed, seeded};
use collapse_core::schemes::{born_probability, SchemeKind};
use collapse_core::spin::{axis_eigenstate, state_from_bloch, BlochVector, Sign};
use serde::Serialize;

use crate::config::RunConfig;
use crate::CliError;

/// Bound on |ΔJ| that the unitary scheme must respect.
const CONSERVATION_BOUND: f64 = 1e-10;

#[derive(Serialize)]
struct Envelope<'a, R> {
    version: &'static str,
    config: &'a RunConfig,
    #[serde(flatten)]
    report: R,
}

fn write_json<R: Serialize>(cfg: &RunConfig, name: &str, report: R) -> Result<(), CliError> {
    let env = Envelope {
        version: env!("CARGO_PKG_VERSION"),
        config: cfg,
        report,
    };
    let text =
        serde_json::to_string_pretty(&env).map_err(|e| CliError::Invariant(e.to_string()))?;
    let path = cfg.out.join(name);
    std::fs::write(&path, text + "\n").map_err(|e| io_err(&path, e))
}

fn write_csv<S: Serialize>(
    cfg: &RunConfig,
    name: &str,
    rows: impl IntoIterator<Item = S>,
) -> Result<(), CliError> {
    let path = cfg.out.join(name);
    let mut w = csv::Writer::from_path(&path).map_err(|e| io_err(&path, e))?;
    for r in rows {
        w.serialize(r).map_err(|e| io_err(&path, e))?;
    }
    w.flush().map_err(|e| io_err(&path, e))
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

#[derive(Serialize)]
struct TrialRow<'a> {
    seed: u64,
    step: usize,
    device: &'a str,
    outcome: MacroLabel,
    p: f64,
    #[serde(rename = "dJx")]
    djx: f64,
    #[serde(rename = "dJy")]
    djy: f64,
    #[serde(rename = "dJz")]
    djz: f64,
}

#[derive(Serialize)]
struct TrialSummary {
    count: u64,
    max_abs_delta: f64,
    /// Relative frequency of each observed label sequence.
    sequences: Vec<(String, f64)>,
}

#[derive(Serialize)]
struct ConservationOut<'a> {
    ledger: &'a LedgerReport<f64>,
    record: &'a ServerRecord<f64>,
    trials: TrialSummary,
}

pub fn conservation(cfg: &RunConfig) -> Result<String, CliError> {
    let script = cfg.build_script()?;
    let (ledger, record) = run_conservation_chain(&script, &cfg.scheme, &mut seeded(cfg.seed()))?;
    let trials = run_trials(&script, &cfg.scheme, cfg.trials, cfg.seed(), true)?;

    let mut rows = Vec::new();
    let mut max_abs_delta: f64 = 0.0;
    let mut sequences: Vec<(String, u64)> = Vec::new();
    for t in &trials {
        let key = t
            .labels()
            .iter()
            .map(|l| l.as_str())
            .collect::<Vec<_>>()
            .join(",");
        match sequences.iter_mut().find(|(k, _)| *k == key) {
            Some((_, n)) => *n += 1,
            None => sequences.push((key, 1)),
        }
        for s in &t.steps {
            let d = s.delta.unwrap_or(BlochVector::zero());
            max_abs_delta = max_abs_delta.max(d.max_abs_diff(&BlochVector::zero()));
            rows.push(TrialRow {
                seed: t.seed,
                step: s.step,
                device: &s.device,
                outcome: s.label,
                p: s.probability,
                djx: d.sx,
                djy: d.sy,
                djz: d.sz,
            });
        }
    }
    sequences.sort();
    let summary = TrialSummary {
        count: cfg.trials,
        max_abs_delta,
        sequences: sequences
            .into_iter()
            .map(|(k, n)| (k, n as f64 / cfg.trials as f64))
            .collect(),
    };

    if matches!(cfg.scheme, SchemeKind::Unitary)
        && ledger.max_delta.max(max_abs_delta) > CONSERVATION_BOUND
    {
        return Err(CliError::Invariant(format!(
            "unitary scheme changed total angular momentum by {:.3e}",
            ledger.max_delta.max(max_abs_delta)
        )));
    }
    if !ledger.branches.is_empty() {
        let total: f64 = ledger.branches.iter().map(|b| b.weight).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(CliError::Invariant(format!(
                "branch weights sum to {total}"
            )));
        }
    }

    write_csv(cfg, "trials.csv", rows)?;
    let verdict = format!(
        "conservation scheme={} max|dJ|={:.3e} (sample run {:.3e}, {} trials)",
        cfg.scheme.name(),
        ledger.max_delta.max(max_abs_delta),
        ledger.max_delta,
        cfg.trials
    );
    write_json(
        cfg,
        "ledger.json",
        ConservationOut {
            ledger: &ledger,
            record: &record,
            trials: summary,
        },
    )?;
    Ok(verdict)
}

pub fn anamnesis(cfg: &RunConfig) -> Result<String, CliError> {
    let script = cfg.build_script()?;
    let report: AnamnesisReport<f64> = run_anamnesis(&script, &cfg.scheme)?;
    if matches!(cfg.scheme, SchemeKind::Unitary) && !report.consistent {
        return Err(CliError::Invariant(
            "unitary backward evolution failed to reproduce the history".into(),
        ));
    }
    let verdict = match &report.first_inconsistency {
        None => format!(
            "anamnesis scheme={} consistent={} checkpoints={}",
            cfg.scheme.name(),
            report.consistent,
            report.checkpoints.len()
        ),
        Some(c) => format!(
            "anamnesis scheme={} consistent=false first inconsistency t={} fidelity={:.12}",
            cfg.scheme.name(),
            c.t,
            c.fidelity
        ),
    };
    #[derive(Serialize)]
    struct Out<'a> {
        anamnesis: &'a AnamnesisReport<f64>,
    }
    write_json(cfg, "anamnesis.json", Out { anamnesis: &report })?;
    Ok(verdict)
}

#[derive(Serialize)]
struct SpecialRow {
    kick: f64,
    preparation: String,
    score: f64,
    label: MacroLabel,
}

pub fn special_search(cfg: &RunConfig) -> Result<String, CliError> {
    let system = state_from_bloch(&cfg.initial_bloch())?;
    let axis = cfg.axis();
    if cfg.reservoir == 0 {
        return Err(CliError::Config(
            "special-search needs a reservoir (--reservoir ≥ 2)".into(),
        ));
    }
    let grid = SearchGrid::standard(cfg.grid_points);
    let found: Vec<SpecialStateResult<f64>> =
        special_state_search(&system, &axis, &grid, cfg.reservoir, cfg.tolerance)?;
    let kicks: Option<KickStatistics<f64>> = match cfg.distribution {
        Some(d) => Some(kick_statistics(
            &system,
            &axis,
            d,
            ReservoirPrep::Singlets,
            cfg.reservoir,
            cfg.trials,
            cfg.seed(),
            cfg.tolerance,
        )?),
        None => None,
    };

    let rows = found
        .iter()
        .map(|r| {
            Ok(SpecialRow {
                kick: r.kick,
                preparation: serde_json::to_string(&r.preparation)
                    .map_err(|e| CliError::Invariant(e.to_string()))?,
                score: r.score,
                label: r.label,
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    write_csv(cfg, "special.csv", rows)?;
    if let Some(k) = &kicks {
        write_csv(cfg, "kicks.csv", &k.samples)?;
    }

    #[derive(Serialize)]
    struct KickTable {
        distribution: KickDistribution,
        trials: u64,
        counts: FrequencyTable,
        frequencies: [f64; 3],
        born: [f64; 2],
    }
    #[derive(Serialize)]
    struct Out<'a> {
        grid_points: usize,
        special_states: &'a [SpecialStateResult<f64>],
        kick_statistics: Option<KickTable>,
    }
    let table = kicks.as_ref().map(|k| KickTable {
        distribution: k.distribution,
        trials: k.trials,
        counts: k.counts,
        frequencies: k.frequencies,
        born: k.born,
    });
    let mut verdict = format!(
        "special-search found {} of {} grid points",
        found.len(),
        grid.len()
    );
    if let Some(k) = &kicks {
        let [u, d, s] = k.frequencies;
        verdict += &format!(
            "; kicks up={u:.4} down={d:.4} superposed={s:.4} vs born up={:.4} down={:.4}",
            k.born[0], k.born[1]
        );
    }
    write_json(
        cfg,
        "special.json",
        Out {
            grid_points: grid.len(),
            special_states: &found,
            kick_statistics: table,
        },
    )?;
    Ok(verdict)
}

#[derive(Serialize)]
struct BornRow {
    theta: f64,
    born_up: f64,
    freq_up: f64,
    freq_down: f64,
    freq_failed: f64,
    sigma: f64,
    within_4sigma: bool,
}

pub fn born_check(cfg: &RunConfig) -> Result<String, CliError> {
    if matches!(cfg.scheme, SchemeKind::Unitary) {
        return Err(CliError::Config(
            "born-check samples outcomes; use a collapse scheme".into(),
        ));
    }
    let axis = cfg.axis();
    let up = axis_eigenstate(&axis, Sign::Up);
    let n = cfg.grid_points;
    let mut rows = Vec::with_capacity(n);
    for i in 0..n {
        let theta = if n == 1 {
            0.0
        } else {
            std::f64::consts::PI * i as f64 / (n - 1) as f64
        };
        let input = BlochVector::new(0.5 * theta.sin(), 0.0, 0.5 * theta.cos());
        let born_up = born_probability(&state_from_bloch(&input)?, &up)?;
        let mut script =
            ExperimentScript::single_z(input).with_reservoir(0, ReservoirPrep::Singlets);
        script.steps[0].axis = axis;
        script.tolerance = cfg.tolerance;
        let trials = run_trials(
            &script,
            &cfg.scheme,
            cfg.trials,
            derive_seed(cfg.seed(), i as u64),
            false,
        )?;
        let count = |l: MacroLabel| {
            trials.iter().filter(|t| t.steps[0].label == l).count() as f64 / cfg.trials as f64
        };
        let (freq_up, freq_down, freq_failed) = (
            count(MacroLabel::Up),
            count(MacroLabel::Down),
            count(MacroLabel::Failed),
        );
        let sigma = (born_up * (1.0 - born_up) / cfg.trials as f64).sqrt();
        let within_4sigma = match &cfg.scheme {
            SchemeKind::Instrumentalist(_) => true,
            _ => (freq_up - born_up).abs() <= 4.0 * sigma + 1e-12,
        };
        rows.push(BornRow {
            theta,
            born_up,
            freq_up,
            freq_down,
            freq_failed,
            sigma,
            within_4sigma,
        });
    }
    let within = rows.iter().filter(|r| r.within_4sigma).count();
    let verdict = format!(
        "born-check scheme={} {within}/{n} tilts within 4 sigma of the Born weight",
        cfg.scheme.name()
    );
    #[derive(Serialize)]
    struct Out<'a> {
        rows: &'a [BornRow],
    }
    write_json(cfg, "born.json", Out { rows: &rows })?;
    write_csv(cfg, "born.csv", rows)?;
    Ok(verdict)
}
