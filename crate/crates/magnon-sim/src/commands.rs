//! Batch experiment commands: thin orchestration over the simulation and
//! estimation modules, one function per CLI subcommand.
//!
//! Every command takes a validated [`Config`] and an output directory,
//! runs its simulation blocks with monotone trial and stream counters (so
//! a fixed seed reproduces output files byte for byte, on any number of
//! threads), writes CSV and/or JSON reports, and returns the report
//! struct. CSV tables round to six significant digits; JSON keeps full
//! precision.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::entanglement::{
    photonic_concurrence_from_experiment, ConcurrenceEstimate, EntanglementError, ReadoutYields,
};
use crate::plan::{Config, ConfigError, PlanMode};
use crate::polarization::{Basis, PolarizationState};
use crate::records::{
    counts_from_csv, fmt_sig6, read_records, write_json, write_records, RecordError,
};
use crate::sim::rng::StreamAllocator;
use crate::sim::{AnalyzerMode, HeraldMode, ProtocolTiming, TrialContext, TrialRecord};
use crate::stats::{
    conditional_g2, success_rate_projection, tally, G2Summary, RateProjection, StatsError,
};
use crate::tomography::{
    fidelity_report, reconstruct, theta_sweep, BasisCounts, FidelityReport, SweepResult,
    ThetaSample, TomographyError, TomographyResult, CLASSICAL_FIDELITY_LIMIT,
};
use crate::ValueWithError;

#[derive(Debug, Error)]
pub enum CommandError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Record(#[from] RecordError),
    #[error(transparent)]
    Tomography(#[from] TomographyError),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error(transparent)]
    Entanglement(#[from] EntanglementError),
    #[error("maximum-likelihood reconstruction did not converge for input {0}")]
    NonConvergence(String),
    #[error("mode {0:?} does not match this command")]
    WrongMode(PlanMode),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CommandError {
    /// Process exit code: 2 config, 3 insufficient statistics,
    /// 4 non-convergence, 1 anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CommandError::Config(_) | CommandError::WrongMode(_) => 2,
            CommandError::Record(RecordError::Malformed { .. }) => 2,
            CommandError::Record(RecordError::MissingBasis(_)) => 3,
            CommandError::Tomography(TomographyError::EmptyBasis(_))
            | CommandError::Tomography(TomographyError::DegenerateFit(_)) => 3,
            CommandError::Tomography(_) => 2,
            CommandError::Stats(_) => 3,
            CommandError::Entanglement(EntanglementError::InsufficientCounts(_)) => 3,
            CommandError::NonConvergence(_) => 4,
            _ => 1,
        }
    }
}

/// Which report files a command writes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    Csv,
    Json,
    #[default]
    Both,
}

impl OutputFormat {
    fn csv(&self) -> bool {
        matches!(self, OutputFormat::Csv | OutputFormat::Both)
    }

    fn json(&self) -> bool {
        matches!(self, OutputFormat::Json | OutputFormat::Both)
    }
}

#[derive(Debug, Clone)]
pub struct OutputOptions {
    pub out_dir: PathBuf,
    pub format: OutputFormat,
}

impl OutputOptions {
    pub fn new(out_dir: impl Into<PathBuf>) -> Self {
        Self {
            out_dir: out_dir.into(),
            format: OutputFormat::Both,
        }
    }

    fn prepare(&self) -> Result<(), CommandError> {
        fs::create_dir_all(&self.out_dir).map_err(|source| CommandError::Io {
            path: self.out_dir.display().to_string(),
            source,
        })
    }

    fn path(&self, name: &str) -> PathBuf {
        self.out_dir.join(name)
    }
}

fn write_csv(path: &Path, text: &str) -> Result<(), CommandError> {
    fs::write(path, text).map_err(|source| CommandError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Sequential allocator of simulation blocks. Blocks are reserved in a
/// fixed order before any parallel work starts, which keeps the record
/// stream independent of scheduling.
struct SimRunner<'a> {
    cfg: &'a Config,
    timing: ProtocolTiming,
    trial_counter: u64,
    streams: StreamAllocator,
}

impl<'a> SimRunner<'a> {
    fn new(cfg: &'a Config) -> Self {
        Self {
            cfg,
            timing: cfg.timing(),
            trial_counter: 0,
            streams: StreamAllocator::new(),
        }
    }

    fn context(
        &self,
        input: PolarizationState,
        analyzer: AnalyzerMode,
        herald: HeraldMode,
    ) -> TrialContext {
        TrialContext {
            input,
            analyzer,
            flip_ports: self.cfg.plan.flip_ports,
            noise: self.cfg.noise,
            timing: self.timing,
            herald,
            read_unheralded: true,
        }
    }

    fn block(
        &mut self,
        input: PolarizationState,
        analyzer: AnalyzerMode,
        herald: HeraldMode,
        count: u64,
    ) -> Vec<TrialRecord> {
        let ctx = self.context(input, analyzer, herald);
        let stream_base = self.streams.reserve(count);
        let trial_base = self.trial_counter;
        self.trial_counter += count;
        crate::sim::run_block(&ctx, trial_base, count, self.cfg.plan.seed, stream_base)
    }

    fn herald_mode(&self) -> HeraldMode {
        if self.cfg.plan.condition_on_herald {
            HeraldMode::Forced
        } else {
            HeraldMode::Sample
        }
    }

    /// Background acquisition shared by all input states: per basis, the
    /// configured number of herald-suppressed windows.
    fn acquire_background(&mut self) -> [(f64, f64); 3] {
        let windows = self.cfg.plan.background_windows_per_basis;
        let mut out = [(0.0, 0.0); 3];
        for basis in Basis::ALL {
            let records = self.block(
                crate::polarization::FiducialState::H.state(),
                AnalyzerMode::Basis(basis),
                HeraldMode::Suppressed,
                windows,
            );
            let plus: u64 = records.iter().map(|r| r.d2() as u64).sum();
            let minus: u64 = records.iter().map(|r| r.d3() as u64).sum();
            out[basis.stokes_axis()] = (plus as f64, minus as f64);
        }
        out
    }

    /// Tomography acquisition for one input state, with the shared
    /// background attached.
    fn acquire_counts(
        &mut self,
        input: PolarizationState,
        background: &[(f64, f64); 3],
    ) -> [BasisCounts; 3] {
        let reads = self.cfg.plan.reads_per_basis;
        let norm = reads as f64 / self.cfg.plan.background_windows_per_basis as f64;
        let herald = self.herald_mode();
        let mut counts = Vec::with_capacity(3);
        for basis in [Basis::Hv, Basis::St, Basis::Lr] {
            let records = self.block(input, AnalyzerMode::Basis(basis), herald, reads);
            let plus: u64 = records.iter().map(|r| r.d2() as u64).sum();
            let minus: u64 = records.iter().map(|r| r.d3() as u64).sum();
            let (bg_plus, bg_minus) = background[basis.stokes_axis()];
            counts.push(BasisCounts {
                basis,
                n_plus: plus as f64,
                n_minus: minus as f64,
                background_plus: bg_plus,
                background_minus: bg_minus,
                background_norm: norm,
            });
        }
        [counts[0], counts[1], counts[2]]
    }
}

// ---------------------------------------------------------------------------
// fiducials

/// One line of the six-fiducial table.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FiducialRow {
    pub input: String,
    pub report: FidelityReport,
    /// Detected analyzer events entering the reconstruction.
    pub detected_events: f64,
    pub tomography: TomographyResult,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FiducialsReport {
    pub rows: Vec<FiducialRow>,
    pub mean_fidelity: ValueWithError,
    pub mean_fidelity_bgsub: ValueWithError,
}

/// Six-fiducial storage-fidelity table (tomography per input state).
pub fn cmd_fiducials(cfg: &Config, out: &OutputOptions) -> Result<FiducialsReport, CommandError> {
    if cfg.plan.mode != PlanMode::Fiducials {
        return Err(CommandError::WrongMode(cfg.plan.mode));
    }
    out.prepare()?;

    let mut rows = Vec::new();
    if let Some(counts_path) = &cfg.plan.counts {
        // Analyze an external count table against the first input.
        let counts = counts_from_csv(counts_path, cfg.plan.background_norm.unwrap_or(1.0))?;
        let input = &cfg.plan.inputs[0];
        rows.push(score_state(&input.label(), &input.state(), &counts)?);
    } else {
        let mut runner = SimRunner::new(cfg);
        let background = runner.acquire_background();
        for input in &cfg.plan.inputs {
            let counts = runner.acquire_counts(input.state(), &background);
            rows.push(score_state(&input.label(), &input.state(), &counts)?);
        }
    }

    let mean_fidelity = mean_with_error(rows.iter().map(|r| r.report.fidelity));
    let mean_fidelity_bgsub = mean_with_error(rows.iter().map(|r| r.report.fidelity_bgsub));
    let report = FiducialsReport {
        rows,
        mean_fidelity,
        mean_fidelity_bgsub,
    };

    if out.format.csv() {
        let mut text = String::from(
            "input,fidelity,fidelity_err,p_out,p_out_err,fidelity_bgsub,fidelity_bgsub_err,\
             p_out_bgsub,p_out_bgsub_err,exceeds_classical_limit\n",
        );
        for row in &report.rows {
            let r = &row.report;
            text.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{}\n",
                row.input,
                fmt_sig6(r.fidelity.value),
                fmt_sig6(r.fidelity.sigma),
                fmt_sig6(r.degree_of_polarization.value),
                fmt_sig6(r.degree_of_polarization.sigma),
                fmt_sig6(r.fidelity_bgsub.value),
                fmt_sig6(r.fidelity_bgsub.sigma),
                fmt_sig6(r.degree_of_polarization_bgsub.value),
                fmt_sig6(r.degree_of_polarization_bgsub.sigma),
                r.exceeds_classical_limit,
            ));
        }
        write_csv(&out.path("fiducials.csv"), &text)?;
    }
    if out.format.json() {
        write_json(&out.path("fiducials.json"), &report)?;
    }
    Ok(report)
}

fn score_state(
    label: &str,
    target: &PolarizationState,
    counts: &[BasisCounts; 3],
) -> Result<FiducialRow, CommandError> {
    let tomography = reconstruct(counts)?;
    if !tomography.mle_converged {
        return Err(CommandError::NonConvergence(label.to_string()));
    }
    let report = fidelity_report(&tomography, target);
    Ok(FiducialRow {
        input: label.to_string(),
        report,
        detected_events: counts.iter().map(|c| c.total()).sum(),
        tomography,
    })
}

fn mean_with_error(values: impl Iterator<Item = ValueWithError>) -> ValueWithError {
    let values: Vec<ValueWithError> = values.collect();
    let n = values.len() as f64;
    let mean = values.iter().map(|v| v.value).sum::<f64>() / n;
    let var = values.iter().map(|v| v.sigma * v.sigma).sum::<f64>() / (n * n);
    ValueWithError::new(mean, var.sqrt())
}

// ---------------------------------------------------------------------------
// theta sweep

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ThetaFidelity {
    pub theta: f64,
    pub report: FidelityReport,
    /// Set when the raw fidelity does not clear the classical limit.
    pub at_or_below_classical: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ThetaSweepReport {
    pub fidelities: Vec<ThetaFidelity>,
    pub sweep: SweepResult,
    /// Largest minus smallest raw fidelity across the sweep.
    pub fidelity_spread: f64,
    /// 1σ of that difference (the two extremes combined in quadrature).
    pub spread_sigma: f64,
}

/// Zenith-angle sweep at φ = 0: per-θ fidelity plus the six fitted
/// projection curves.
pub fn cmd_theta_sweep(
    cfg: &Config,
    out: &OutputOptions,
) -> Result<ThetaSweepReport, CommandError> {
    if cfg.plan.mode != PlanMode::ThetaSweep {
        return Err(CommandError::WrongMode(cfg.plan.mode));
    }
    out.prepare()?;

    let mut runner = SimRunner::new(cfg);
    let background = runner.acquire_background();
    let mut samples = Vec::new();
    let mut fidelities = Vec::new();
    for &theta in &cfg.plan.thetas {
        let input = PolarizationState::new(theta, 0.0);
        let counts = runner.acquire_counts(input, &background);
        let tomography = reconstruct(&counts)?;
        if !tomography.mle_converged {
            return Err(CommandError::NonConvergence(format!("theta={theta}")));
        }
        let report = fidelity_report(&tomography, &input);
        fidelities.push(ThetaFidelity {
            theta,
            report,
            at_or_below_classical: report.fidelity.value <= CLASSICAL_FIDELITY_LIMIT,
        });
        samples.push(ThetaSample { theta, counts });
    }
    let sweep = theta_sweep(&samples)?;

    let max = fidelities
        .iter()
        .max_by(|a, b| a.report.fidelity.value.total_cmp(&b.report.fidelity.value))
        .expect("at least five thetas");
    let min = fidelities
        .iter()
        .min_by(|a, b| a.report.fidelity.value.total_cmp(&b.report.fidelity.value))
        .expect("at least five thetas");
    let fidelity_spread = max.report.fidelity.value - min.report.fidelity.value;
    let spread_sigma =
        (max.report.fidelity.sigma.powi(2) + min.report.fidelity.sigma.powi(2)).sqrt();

    let report = ThetaSweepReport {
        fidelities,
        sweep,
        fidelity_spread,
        spread_sigma,
    };

    if out.format.csv() {
        let mut points = String::from("theta,basis,port,probability,sigma\n");
        for fit in &report.sweep.fits {
            for p in &fit.points {
                points.push_str(&format!(
                    "{},{},{},{},{}\n",
                    fmt_sig6(p.theta),
                    fit.basis.label(),
                    fit.port.label(),
                    fmt_sig6(p.probability),
                    fmt_sig6(p.sigma),
                ));
            }
        }
        write_csv(&out.path("sweep_points.csv"), &points)?;

        let mut fid = String::from("theta,fidelity,fidelity_err,p_out,p_out_err,flagged\n");
        for f in &report.fidelities {
            fid.push_str(&format!(
                "{},{},{},{},{},{}\n",
                fmt_sig6(f.theta),
                fmt_sig6(f.report.fidelity.value),
                fmt_sig6(f.report.fidelity.sigma),
                fmt_sig6(f.report.degree_of_polarization.value),
                fmt_sig6(f.report.degree_of_polarization.sigma),
                f.at_or_below_classical,
            ));
        }
        write_csv(&out.path("sweep_fidelity.csv"), &fid)?;
    }
    if out.format.json() {
        write_json(&out.path("sweep.json"), &report)?;
    }
    Ok(report)
}

// ---------------------------------------------------------------------------
// g2

/// Conditional autocorrelation of the retrieved field.
pub fn cmd_g2(cfg: &Config, out: &OutputOptions) -> Result<G2Summary, CommandError> {
    if cfg.plan.mode != PlanMode::G2 {
        return Err(CommandError::WrongMode(cfg.plan.mode));
    }
    out.prepare()?;

    let records = if let Some(path) = &cfg.plan.records {
        read_records(path)?
    } else {
        let mut runner = SimRunner::new(cfg);
        let herald = runner.herald_mode();
        let input = cfg.plan.inputs[0].state();
        runner.block(input, AnalyzerMode::Balanced, herald, cfg.plan.trials)
    };
    let t = tally(&records);
    let g2 = conditional_g2(&t)?;
    let summary = G2Summary::new(&t, g2);

    if out.format.json() {
        // One-line summary.
        let mut line = serde_json::to_string(&summary).expect("summary serializes");
        line.push('\n');
        write_csv(&out.path("g2.json"), &line)?;
    }
    if out.format.csv() {
        let text = format!(
            "g2,err,N1,N12,N13,N123,herald_rate\n{},{},{},{},{},{},{}\n",
            fmt_sig6(summary.g2),
            fmt_sig6(summary.err),
            summary.n1,
            summary.n12,
            summary.n13,
            summary.n123,
            fmt_sig6(summary.herald_rate),
        );
        write_csv(&out.path("g2.csv"), &text)?;
    }
    Ok(summary)
}

// ---------------------------------------------------------------------------
// concurrence

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConcurrenceRow {
    pub input: String,
    pub estimate: ConcurrenceEstimate,
    pub p_single: f64,
    pub p_double: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConcurrenceReport {
    pub rows: Vec<ConcurrenceRow>,
}

/// Photonic concurrence per input state: three-basis tomography for the
/// coherence plus a balanced run for singles and doubles yields.
pub fn cmd_concurrence(
    cfg: &Config,
    out: &OutputOptions,
) -> Result<ConcurrenceReport, CommandError> {
    if cfg.plan.mode != PlanMode::Concurrence {
        return Err(CommandError::WrongMode(cfg.plan.mode));
    }
    out.prepare()?;

    let mut runner = SimRunner::new(cfg);
    let herald = runner.herald_mode();
    let mut rows = Vec::new();
    for input in &cfg.plan.inputs {
        let state = input.state();
        let counts = {
            let background = [(0.0, 0.0); 3];
            runner.acquire_counts(state, &background)
        };
        let tomography = reconstruct(&counts)?;
        if !tomography.mle_converged {
            return Err(CommandError::NonConvergence(input.label()));
        }
        let balanced = runner.block(state, AnalyzerMode::Balanced, herald, cfg.plan.trials);
        let yields = ReadoutYields::from_tally(&tally(&balanced));
        let estimate = photonic_concurrence_from_experiment(&tomography, &yields)?;
        rows.push(ConcurrenceRow {
            input: input.label(),
            estimate,
            p_single: yields.p_single(),
            p_double: yields.p_double(),
        });
    }
    let report = ConcurrenceReport { rows };

    if out.format.csv() {
        let mut text = String::from("input,concurrence,concurrence_err,p_single,p_double\n");
        for row in &report.rows {
            text.push_str(&format!(
                "{},{},{},{},{}\n",
                row.input,
                fmt_sig6(row.estimate.concurrence.value),
                fmt_sig6(row.estimate.concurrence.sigma),
                fmt_sig6(row.p_single),
                fmt_sig6(row.p_double),
            ));
        }
        write_csv(&out.path("concurrence.csv"), &text)?;
    }
    if out.format.json() {
        write_json(&out.path("concurrence.json"), &report)?;
    }
    Ok(report)
}

// ---------------------------------------------------------------------------
// rate projection

/// Herald-probability and success-rate arithmetic; no simulation.
pub fn cmd_rate(cfg: &Config, out: &OutputOptions) -> Result<RateProjection, CommandError> {
    if cfg.plan.mode != PlanMode::RateProjection {
        return Err(CommandError::WrongMode(cfg.plan.mode));
    }
    out.prepare()?;
    let projection = success_rate_projection(&cfg.noise, cfg.plan.trials_per_second);

    if out.format.csv() {
        let text = format!(
            "herald_probability,success_rate,trials_per_second\n{},{},{}\n",
            fmt_sig6(projection.herald_probability),
            fmt_sig6(projection.success_rate),
            fmt_sig6(projection.trials_per_second),
        );
        write_csv(&out.path("rate.csv"), &text)?;
    }
    if out.format.json() {
        write_json(&out.path("rate.json"), &projection)?;
    }
    Ok(projection)
}

// ---------------------------------------------------------------------------
// run

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunSummary {
    pub trials: u64,
    pub heralds: u64,
    pub herald_rate: f64,
    pub d1_clicks: u64,
    pub d2_clicks: u64,
    pub d3_clicks: u64,
    pub sequences: u64,
}

/// Raw trial run: settings rotate per trial over the three bases, records
/// stream to `records.csv`, totals to `summary.json`.
pub fn cmd_run(cfg: &Config, out: &OutputOptions) -> Result<RunSummary, CommandError> {
    if cfg.plan.mode != PlanMode::Run {
        return Err(CommandError::WrongMode(cfg.plan.mode));
    }
    out.prepare()?;

    let mut runner = SimRunner::new(cfg);
    let herald = runner.herald_mode();
    let input = cfg.plan.inputs[0].state();
    let contexts: Vec<TrialContext> = Basis::ALL
        .iter()
        .map(|&b| runner.context(input, AnalyzerMode::Basis(b), herald))
        .collect();
    let trials = cfg.plan.trials;
    let stream_base = runner.streams.reserve(trials);
    let records = crate::sim::run_sequence(&contexts, trials, cfg.plan.seed, stream_base);

    let heralds = records.iter().filter(|r| r.heralded).count() as u64;
    let summary = RunSummary {
        trials,
        heralds,
        herald_rate: heralds as f64 / trials.max(1) as f64,
        d1_clicks: records.iter().map(|r| r.d1() as u64).sum(),
        d2_clicks: records.iter().map(|r| r.d2() as u64).sum(),
        d3_clicks: records.iter().map(|r| r.d3() as u64).sum(),
        sequences: trials.div_ceil(runner.timing.trials_per_sequence),
    };

    write_records(&out.path("records.csv"), &records)?;
    if out.format.json() {
        write_json(&out.path("summary.json"), &summary)?;
    }
    Ok(summary)
}

// ---------------------------------------------------------------------------

/// Dispatch on the plan's mode.
pub fn run_plan(cfg: &Config, out: &OutputOptions) -> Result<(), CommandError> {
    match cfg.plan.mode {
        PlanMode::Fiducials => cmd_fiducials(cfg, out).map(|_| ()),
        PlanMode::ThetaSweep => cmd_theta_sweep(cfg, out).map(|_| ()),
        PlanMode::G2 => cmd_g2(cfg, out).map(|_| ()),
        PlanMode::Concurrence => cmd_concurrence(cfg, out).map(|_| ()),
        PlanMode::RateProjection => cmd_rate(cfg, out).map(|_| ()),
        PlanMode::Run => cmd_run(cfg, out).map(|_| ()),
    }
}
