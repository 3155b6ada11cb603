//! Scenario execution and file output.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use curvband::operator::max_entry_difference;
use curvband::{
    build_tangential, decoupling_check, eigen_solve, eval_geometry, evolve, hermiticity_report,
    is_coulomb_gauge, total_energy, HermiticityReport, OperatorMode, RadialGrid, Spectrum,
    SurfaceProfile, TangentialOperator, VectorPotentialSpec,
};

use crate::config::{serialize_config, ModeKey, RunConfig};
use crate::error::{CliError, CliResult, Context};

pub const SUMMARY_FILE: &str = "run_summary.txt";
pub const ERROR_MARKER: &str = "# error:";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Geometry,
    GaugeCheck,
    Spectrum,
    Evolve,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Geometry => "geometry",
            Command::GaugeCheck => "gauge-check",
            Command::Spectrum => "spectrum",
            Command::Evolve => "evolve",
        }
    }
}

/// Command-line values that replace the matching config keys.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub output: Option<PathBuf>,
    pub mode: Option<OperatorMode>,
    pub m_list: Option<Vec<i32>>,
    pub n_points: Option<usize>,
    pub dt: Option<f64>,
    pub steps: Option<usize>,
}

impl Overrides {
    pub fn apply(&self, config: &mut RunConfig) -> CliResult<()> {
        if let Some(out) = &self.output {
            config.output_path = out.to_string_lossy().into_owned();
        }
        if let Some(mode) = self.mode {
            config.mode = ModeKey::from(mode);
        }
        if let Some(m) = &self.m_list {
            config.m_list = m.clone();
        }
        if let Some(n) = self.n_points {
            config.grid.n_points = n;
        }
        if self.dt.is_some() {
            config.dt = self.dt;
        }
        if self.steps.is_some() {
            config.steps = self.steps;
        }
        config.validate()
    }
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

/// A CSV file that is either completed or terminated by an error marker line.
struct CsvSink {
    path: PathBuf,
    out: BufWriter<File>,
}

impl CsvSink {
    fn create(path: PathBuf, header: &str) -> CliResult<Self> {
        let file = File::create(&path).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        })?;
        let mut sink = Self {
            path,
            out: BufWriter::new(file),
        };
        sink.line(header)?;
        Ok(sink)
    }

    fn line(&mut self, text: &str) -> CliResult<()> {
        writeln!(self.out, "{text}").map_err(|source| CliError::Io {
            path: self.path.clone(),
            source,
        })
    }

    fn finish(mut self) -> CliResult<()> {
        self.out.flush().map_err(|source| CliError::Io {
            path: self.path.clone(),
            source,
        })
    }

    fn abort(mut self, err: &CliError) {
        let _ = writeln!(self.out, "{ERROR_MARKER} {}", err.to_string().replace('\n', " "));
        let _ = self.out.flush();
    }

    /// Streams rows produced by `rows`; a failing row ends the file with the
    /// error marker and returns the error.
    fn write_rows<I>(path: PathBuf, header: &str, rows: I) -> CliResult<()>
    where
        I: IntoIterator<Item = CliResult<String>>,
    {
        let mut sink = Self::create(path, header)?;
        for row in rows {
            match row.and_then(|r| sink.line(&r)) {
                Ok(()) => {}
                Err(e) => {
                    sink.abort(&e);
                    return Err(e);
                }
            }
        }
        sink.finish()
    }
}

struct Scenario {
    config: RunConfig,
    profile: SurfaceProfile,
    field: VectorPotentialSpec,
    grid: RadialGrid,
    out_dir: PathBuf,
}

impl Scenario {
    fn new(config: &RunConfig) -> CliResult<Self> {
        let profile = config.profile()?;
        let field = config.field()?;
        let grid = RadialGrid::new(config.grid.n_points, config.surface.rho_max)
            .context(|| "grid".to_string())?;
        let out_dir = PathBuf::from(&config.output_path);
        std::fs::create_dir_all(&out_dir).map_err(|source| CliError::Io {
            path: out_dir.clone(),
            source,
        })?;
        Ok(Self {
            config: config.clone(),
            profile,
            field,
            grid,
            out_dir,
        })
    }

    fn file(&self, name: &str) -> PathBuf {
        self.out_dir.join(name)
    }

    fn operator(&self, m: i32, mode: OperatorMode) -> CliResult<TangentialOperator> {
        build_tangential(&self.profile, &self.field, m, &self.grid, mode, self.config.charge_e)
            .context(|| format!("building operator for m = {m}"))
    }

    /// Runs `work` for every requested `m`, in parallel, keeping input order.
    fn per_channel<T, F>(&self, work: F) -> CliResult<Vec<CliResult<T>>>
    where
        T: Send,
        F: Fn(i32) -> CliResult<T> + Sync,
    {
        let pool = channel_pool()?;
        Ok(pool.install(|| self.config.m_list.par_iter().map(|&m| work(m)).collect()))
    }
}

fn channel_pool() -> CliResult<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(raw) = std::env::var("CURVBAND_THREADS") {
        match raw.trim().parse::<usize>() {
            Ok(n) if n > 0 => builder = builder.num_threads(n),
            _ => log::warn!("ignoring CURVBAND_THREADS={raw:?}; expected a positive integer"),
        }
    }
    builder
        .build()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))
}

fn write_hermiticity(summary: &mut String, m: i32, r: &HermiticityReport) {
    let _ = writeln!(
        summary,
        "m = {m}: hermiticity max_asymmetry = {} relative = {} anti_hermitian_norm = {} \
         coupling_mismatch = {} matches_coupling = {} hermitian = {} tolerance = {}",
        num(r.max_asymmetry),
        num(r.relative_asymmetry),
        num(r.anti_hermitian_norm),
        num(r.coupling_mismatch),
        r.matches_coupling,
        r.is_hermitian,
        num(r.tolerance),
    );
}

struct ChannelReport {
    m: i32,
    hermiticity: HermiticityReport,
    mode_discrepancy: f64,
}

impl Scenario {
    fn channel_report(&self, m: i32, op: &TangentialOperator) -> CliResult<ChannelReport> {
        let other = match op.mode() {
            OperatorMode::AsWritten => OperatorMode::HermitianCorrected,
            OperatorMode::HermitianCorrected => OperatorMode::AsWritten,
        };
        Ok(ChannelReport {
            m,
            hermiticity: hermiticity_report(op),
            mode_discrepancy: max_entry_difference(op, &self.operator(m, other)?),
        })
    }

    fn write_channel(&self, summary: &mut String, report: &ChannelReport) {
        write_hermiticity(summary, report.m, &report.hermiticity);
        let _ = writeln!(
            summary,
            "m = {}: max entry difference between modes = {}",
            report.m,
            num(report.mode_discrepancy)
        );
    }

    fn decoupling(&self, summary: &mut String) -> CliResult<()> {
        if let Some(omega) = self.config.omega {
            let d = decoupling_check(omega, &self.field, &self.profile, &self.grid)
                .context(|| "decoupling check".to_string())?;
            let _ = writeln!(
                summary,
                "decoupling: omega = {} q* = {} confinement = {} neglected = {} ratio = {} passed = {}",
                num(d.omega),
                num(d.q_star),
                num(d.confinement),
                num(d.neglected_term),
                num(d.ratio),
                d.passed
            );
        }
        Ok(())
    }

    fn geometry(&self, summary: &mut String) -> CliResult<()> {
        let path = self.file("geometry.csv");
        let rows = self.grid.nodes().map(|rho| {
            let g = eval_geometry(&self.profile, rho).context(|| format!("geometry at rho = {rho}"))?;
            Ok([rho, g.z, g.mean_curvature, g.gaussian_curvature, g.h2_minus_k(), g.jacobian_factor(0.0)]
                .iter()
                .map(|v| num(*v))
                .collect::<Vec<_>>()
                .join(","))
        });
        CsvSink::write_rows(path, "rho,Z,H,K,Hsq_minus_K,F_at_q0", rows)?;
        let _ = writeln!(summary, "wrote geometry.csv ({} nodes)", self.grid.n_points());
        Ok(())
    }

    fn gauge_check(&self, summary: &mut String) -> CliResult<()> {
        let report = is_coulomb_gauge(&self.field, &self.profile, &self.grid, self.config.gauge_tol);
        let rows = report
            .divergence
            .iter()
            .map(|(rho, d)| Ok(format!("{},{}", num(*rho), num(*d))));
        CsvSink::write_rows(self.file("gauge.csv"), "rho,divergence", rows)?;
        let _ = writeln!(
            summary,
            "gauge: passed = {} max_violation = {} at_rho = {} tolerance = {}",
            report.passed,
            num(report.max_violation),
            num(report.at_rho),
            num(report.tolerance)
        );
        for f in &report.failures {
            let _ = writeln!(summary, "gauge: evaluation failure: {f}");
        }
        Ok(())
    }

    fn spectrum(&self, summary: &mut String) -> CliResult<()> {
        let mode = self.config.mode();
        let k = self.config.k_eigen;
        let results = self.per_channel(|m| {
            let op = self.operator(m, mode)?;
            let spectrum = eigen_solve(&op, k).context(|| format!("spectrum for m = {m}"))?;
            Ok((self.channel_report(m, &op)?, spectrum))
        })?;
        self.decoupling(summary)?;
        for result in results {
            let (report, spectrum) = result?;
            self.write_channel(summary, &report);
            self.write_spectrum(&spectrum)?;
            let _ = writeln!(
                summary,
                "m = {}: {} eigenvalues via {:?}, lowest = {} {:+.16e}i",
                spectrum.m,
                spectrum.len(),
                spectrum.method,
                num(spectrum.eigenvalues[0].re),
                spectrum.eigenvalues[0].im
            );
            if let Some(omega) = self.config.omega {
                let pairs: Vec<(usize, u32)> = (0..=self.config.n_normal).map(|n| (0, n)).collect();
                let levels = total_energy(&spectrum, omega, &pairs).context(|| "combined levels".into())?;
                for l in levels {
                    let _ = writeln!(
                        summary,
                        "m = {}: E(t = 0, n = {}) = {} {:+.16e}i",
                        spectrum.m,
                        l.normal_level,
                        num(l.total.re),
                        l.total.im
                    );
                }
            }
        }
        Ok(())
    }

    fn write_spectrum(&self, s: &Spectrum) -> CliResult<()> {
        let rows = s.eigenvalues.iter().zip(&s.residuals).enumerate().map(|(i, (e, r))| {
            Ok(format!("{},{},{},{},{}", s.m, i, num(e.re), num(e.im), num(*r)))
        });
        CsvSink::write_rows(self.file(&format!("spectrum_m{}.csv", s.m)), "m,index,re_E,im_E,residual", rows)
    }

    fn evolve(&self, summary: &mut String) -> CliResult<()> {
        let dt = self.config.dt.ok_or_else(|| CliError::Config("dt: required by evolve".into()))?;
        let steps = self
            .config
            .steps
            .ok_or_else(|| CliError::Config("steps: required by evolve".into()))?;
        let mode = self.config.mode();
        let results = self.per_channel(|m| {
            let op = self.operator(m, mode)?;
            let ground = eigen_solve(&op.hermitian_part(), 1)
                .context(|| format!("initial state for m = {m}"))?;
            let trace = evolve(&op, &ground.eigenvectors[0], dt, steps)
                .context(|| format!("evolution for m = {m}"))?;
            Ok((self.channel_report(m, &op)?, trace))
        })?;
        self.decoupling(summary)?;
        for result in results {
            let (report, trace) = result?;
            self.write_channel(summary, &report);
            let rows = trace
                .times
                .iter()
                .zip(&trace.norms)
                .map(|(t, n)| Ok(format!("{},{},{}", num(*t), num(*n), num(n.ln()))));
            CsvSink::write_rows(self.file(&format!("trace_m{}.csv", report.m)), "t,norm,log_norm", rows)?;
            for w in &trace.warnings {
                let _ = writeln!(summary, "m = {}: warning: {w}", report.m);
            }
            let _ = writeln!(
                summary,
                "m = {}: log-norm slope = {} final norm ratio = {} initial <e A3 H> = {}",
                report.m,
                num(trace.log_norm_slope),
                num(trace.final_norm_ratio()),
                num(trace.mean_coupling[0])
            );
        }
        Ok(())
    }
}

/// Executes `command` and writes its CSV files and the run summary into the
/// configured output directory. The summary is written even when the command
/// fails and then ends with the error.
pub fn run_command(config: &RunConfig, command: Command) -> CliResult<PathBuf> {
    config.validate()?;
    let scenario = Scenario::new(config)?;
    let mut summary = String::new();
    let _ = writeln!(summary, "command: {}", command.name());
    let _ = writeln!(summary, "mode: {}", config.mode());
    let _ = writeln!(summary, "profile: {}", scenario.profile.name());
    let _ = writeln!(summary, "field: {}", scenario.field.label());
    let _ = writeln!(summary, "--- config ---");
    summary.push_str(&serialize_config(config));
    let _ = writeln!(summary, "--- results ---");

    let result = match command {
        Command::Geometry => scenario.geometry(&mut summary),
        Command::GaugeCheck => scenario.gauge_check(&mut summary),
        Command::Spectrum => scenario.spectrum(&mut summary),
        Command::Evolve => scenario.evolve(&mut summary),
    };
    match &result {
        Ok(()) => summary.push_str("status: ok\n"),
        Err(e) => {
            let _ = writeln!(summary, "status: error: {e}");
        }
    }
    let path = scenario.file(SUMMARY_FILE);
    std::fs::write(&path, summary).map_err(|source| CliError::Io {
        path: path.clone(),
        source,
    })?;
    result.map(|()| scenario.out_dir.clone())
}

/// Reads and parses a config file.
pub fn load_config(path: &Path) -> CliResult<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    crate::config::parse_config(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn failed_row_terminates_csv_with_marker() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        let rows = vec![Ok("1,2".to_string()), Err(CliError::Config("boom".into())), Ok("3,4".into())];
        assert!(CsvSink::write_rows(path.clone(), "a,b", rows).is_err());
        let text = std::fs::read_to_string(path).unwrap();
        assert_eq!(text, "a,b\n1,2\n# error: config: boom\n");
    }

    #[test]
    fn numbers_carry_seventeen_digits() {
        assert_eq!(num(0.1), "1.0000000000000001e-1");
        assert_eq!(num(-2.0), "-2.0000000000000000e0");
    }
}
