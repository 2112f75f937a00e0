//! Batch commands behind the `qhalfline` binary.
//!
//! Every command computes all of its results before touching the output
//! directory, so a configuration error never leaves partial files behind.

mod config;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::covariant_povm::{
    build_povm, covariance_defect, element_report, fourier_density, optimal_kernel, random_gram_kernel,
    random_state, risk, DeviationSpec, Kernel, State, COMPLETENESS_TOL,
};
use crate::grid::{make_grid, DomainKind, MomentumGrid};
use crate::measurement::{
    analytic_distribution, kraus_equivalence, measured_distribution, odd_ground_state, povm_from_kraus,
    system_hamiltonian, KrausFamily, Potential,
};
use crate::operators::{DeficiencyAnalyzer, OperatorSpec};
use crate::{Error, Result};

pub use config::{load, RunConfig};

/// Largest accepted `max |measured - oracle| / peak` for `distribution`.
pub const DISTRIBUTION_TOL: f64 = 1e-2;
/// Largest accepted elementwise deviation for `kraus-equiv`.
pub const KRAUS_TOL: f64 = 1e-10;
/// Largest accepted covariance defect for `povm-check`.
pub const COVARIANCE_TOL: f64 = 1e-10;
/// Slack allowed when comparing risks of the optimal and random kernels.
pub const RISK_SLACK: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Deficiency,
    Distribution,
    Risk,
    PovmCheck,
    KrausEquiv,
}

#[derive(Debug, Parser)]
#[command(name = "qhalfline", about = "Covariant momentum measurement on a half line")]
pub struct Args {
    pub command: Command,
    /// TOML file with run parameters.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Parameter overrides as `--key value` pairs.
    #[arg(trailing_var_arg = true, allow_hyphen_values = true)]
    pub overrides: Vec<String>,
}

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const CONFIG: i32 = 2;
    pub const INCONCLUSIVE: i32 = 3;
    pub const VIOLATION: i32 = 4;
}

/// Exit code for a library error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::InvalidParameter(_)
        | Error::Configuration(_)
        | Error::Aliasing { .. }
        | Error::InvalidDeviation(_)
        | Error::Shape(_) => exit::CONFIG,
        Error::Inconclusive(_) => exit::INCONCLUSIVE,
        _ => exit::VIOLATION,
    }
}

/// Files produced by a command and whether every checked property held.
pub struct Outcome {
    files: Vec<(String, String)>,
    pub passed: bool,
    pub summary: String,
}

impl Outcome {
    fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)
            .map_err(|e| Error::Configuration(format!("cannot create {}: {e}", dir.display())))?;
        for (name, body) in &self.files {
            let path = dir.join(name);
            std::fs::write(&path, body)
                .map_err(|e| Error::Configuration(format!("cannot write {}: {e}", path.display())))?;
        }
        Ok(())
    }

    pub fn file(&self, name: &str) -> Option<&str> {
        self.files.iter().find(|(n, _)| n == name).map(|(_, b)| b.as_str())
    }
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv(header: &str, rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut out = String::from(header);
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { exit::CONFIG } else { exit::OK };
        }
    };
    let env_outdir = std::env::var("QHALFLINE_OUTDIR").ok();
    let result = load(args.config.as_deref(), &args.overrides, env_outdir.as_deref())
        .and_then(|cfg| execute(args.command, &cfg).and_then(|out| out.write(&cfg.outdir).map(|_| out)));
    match result {
        Ok(out) => {
            println!("{}", out.summary);
            if out.passed {
                exit::OK
            } else {
                eprintln!("property check failed");
                exit::VIOLATION
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

/// Runs a command without writing anything.
pub fn execute(command: Command, cfg: &RunConfig) -> Result<Outcome> {
    match command {
        Command::Deficiency => deficiency(cfg),
        Command::Distribution => distribution(cfg),
        Command::Risk => risk_table(cfg),
        Command::PovmCheck => povm_check(cfg),
        Command::KrausEquiv => kraus_equiv(cfg),
    }
}

fn deficiency(cfg: &RunConfig) -> Result<Outcome> {
    let analyzer = DeficiencyAnalyzer { length: cfg.deficiency_length, ..DeficiencyAnalyzer::default() };
    let mut rows = Vec::new();
    for &gamma in &cfg.gammas {
        for spec in OperatorSpec::ALL {
            let r = analyzer.analyze(spec, gamma)?;
            rows.push(vec![
                spec.name().to_string(),
                num(gamma),
                r.n_plus.to_string(),
                r.n_minus.to_string(),
                r.classification.as_str().to_string(),
                r.extension_family().unwrap_or_default().replace(',', ";"),
            ]);
        }
    }
    let summary = format!("deficiency: {} rows", rows.len());
    let body = csv("operator,gamma,n_plus,n_minus,classification,note", rows);
    Ok(Outcome { files: vec![("deficiency.csv".into(), body)], passed: true, summary })
}

fn distribution(cfg: &RunConfig) -> Result<Outcome> {
    let mut files = Vec::new();
    let mut summary_rows = Vec::new();
    let mut passed = true;
    let mut sweep = Vec::new();
    for &omega in &cfg.omega_sweep {
        let params = cfg.model_at(omega);
        let grid = make_grid(DomainKind::HalfLine, cfg.length * params.length_scale(), cfg.n)?;
        params.validate(&grid)?;
        let dist = measured_distribution(&params, &grid)?;
        let dp = dist.momenta.dp();

        let oracle: Vec<f64> = match params.potential {
            Potential::Harmonic if omega > 0.0 => dist
                .momenta
                .values()
                .into_iter()
                .map(|p| analytic_distribution(p, &params))
                .collect::<Result<_>>()?,
            _ => {
                // broad-window limit: the ground-state spectrum shifted to p_true
                let shift = params.p_true / dp;
                if (shift - shift.round()).abs() > 1e-9 {
                    return Err(Error::Configuration(format!(
                        "p_true = {} must be a multiple of the outcome spacing {dp} for this potential",
                        params.p_true
                    )));
                }
                let (_, spectrum) = fourier_density(dist.ground())?;
                let total: f64 = spectrum.iter().sum::<f64>() * dp;
                let n = spectrum.len() as i64;
                (0..n)
                    .map(|j| spectrum[(j - shift.round() as i64).rem_euclid(n) as usize] / total)
                    .collect()
            }
        };
        let peak = oracle.iter().copied().fold(0.0, f64::max);
        let mut max_err = 0.0f64;
        let rows: Vec<Vec<String>> = (0..dist.momenta.len())
            .map(|j| {
                let err = (dist.density[j] - oracle[j]).abs();
                max_err = max_err.max(err);
                vec![num(dist.momenta.p(j)), num(dist.density[j]), num(oracle[j]), num(err)]
            })
            .collect();
        let rel = max_err / peak;
        passed &= rel <= DISTRIBUTION_TOL;
        let (lo, hi) = dist.peaks(params.p_true);
        let mut body = csv("p,measured_density,analytic_density,abs_error", rows);
        writeln!(
            body,
            "# mean={},variance={},peak_lo={},peak_hi={}",
            num(dist.mean()),
            num(dist.variance()),
            num(lo),
            num(hi)
        )
        .expect("writing to a String");
        files.push((format!("distribution_omega_{omega}.csv"), body));
        let m_omega = params.mass * omega;
        sweep.push((omega, dist.variance()));
        summary_rows.push(vec![
            num(omega),
            num(dist.mean()),
            num(dist.variance()),
            if m_omega > 0.0 { num(dist.variance() / m_omega) } else { "nan".into() },
            num(lo),
            num(hi),
            num(rel),
        ]);
    }
    let mut summary_body =
        csv("omega,mean,variance,variance_over_m_omega,peak_lo,peak_hi,max_rel_error", summary_rows);
    if sweep.len() >= 2 {
        let m = sweep.len() as f64;
        let (sx, sy) = sweep.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
        let sxx: f64 = sweep.iter().map(|(x, _)| x * x).sum();
        let sxy: f64 = sweep.iter().map(|(x, y)| x * y).sum();
        let slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
        let intercept = (sy - slope * sx) / m;
        writeln!(summary_body, "# slope={},intercept={}", num(slope), num(intercept)).expect("writing to a String");
    }
    files.push(("distribution_summary.csv".into(), summary_body));
    let summary = format!("distribution: {} frequencies, pass={passed}", cfg.omega_sweep.len());
    Ok(Outcome { files, passed, summary })
}

fn risk_table(cfg: &RunConfig) -> Result<Outcome> {
    let grid = make_grid(DomainKind::WholeLine, cfg.povm_length, cfg.povm_n)?;
    let momenta = MomentumGrid::nyquist(&grid);
    let deviations: Vec<DeviationSpec> =
        cfg.deviation_scales.iter().map(|&s| DeviationSpec::gaussian(s, 1.0)).collect();
    for dev in &deviations {
        dev.validate(grid.dx())?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let psi = random_state(&grid, 1, &mut rng)?;
    let mut kernels = vec![optimal_kernel(&psi)];
    for _ in 0..cfg.n_random_kernels {
        kernels.push(random_gram_kernel(&grid, 1, 4, 2.0, &mut rng)?);
    }
    let state = State::from(psi);
    let mut rows = Vec::new();
    let mut passed = true;
    for (dev, &scale) in deviations.iter().zip(&cfg.deviation_scales) {
        let risks: Vec<f64> = kernels
            .iter()
            .map(|k| risk(&build_povm(k.clone(), momenta.clone(), &grid)?, &state, dev))
            .collect::<Result<_>>()?;
        let best_other = risks[1..].iter().copied().fold(f64::INFINITY, f64::min);
        let optimal_min = risks[0] <= best_other + RISK_SLACK;
        passed &= optimal_min;
        for (id, r) in risks.iter().enumerate() {
            let is_min = if id == 0 { optimal_min } else { *r < risks[0] - RISK_SLACK };
            rows.push(vec![id.to_string(), num(scale), num(*r), is_min.to_string()]);
        }
    }
    let summary = format!("risk: {} kernels x {} scales, pass={passed}", kernels.len(), deviations.len());
    let body = csv("kernel_id,deviation_scale,risk,is_optimal_min", rows);
    Ok(Outcome { files: vec![("risk.csv".into(), body)], passed, summary })
}

fn povm_check(cfg: &RunConfig) -> Result<Outcome> {
    let whole = make_grid(DomainKind::WholeLine, cfg.povm_length, cfg.povm_n)?;
    let half = make_grid(DomainKind::HalfLine, cfg.povm_length, cfg.povm_n)?;
    let ground = odd_ground_state(&cfg.model_at(cfg.model.omega), &half)?.half;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let cases: Vec<(&str, Kernel, _)> = vec![
        ("all_ones", Kernel::all_ones(whole.len()), whole.clone()),
        ("optimal_ground", optimal_kernel(&ground), half.clone()),
        ("random_gram", random_gram_kernel(&whole, 1, 4, 2.0, &mut rng)?, whole.clone()),
    ];
    let mut rows = Vec::new();
    let mut passed = true;
    let mut push = |name: String, value: f64, tol: f64, ok: bool| {
        passed &= ok;
        rows.push(vec![name, num(value), num(tol), ok.to_string()]);
    };
    for (label, kernel, grid) in cases {
        let momenta = MomentumGrid::nyquist(&grid);
        let dp = momenta.dp();
        let povm = build_povm(kernel, momenta, &grid)?;
        let report = element_report(&povm)?;
        push(format!("{label}.hermiticity"), report.max_hermiticity_defect, 1e-12, report.max_hermiticity_defect < 1e-12);
        push(format!("{label}.min_eigenvalue"), report.min_eigenvalue, -1e-10, report.min_eigenvalue >= -1e-10);
        push(
            format!("{label}.completeness"),
            report.completeness_residual,
            COMPLETENESS_TOL,
            report.completeness_residual <= COMPLETENESS_TOL,
        );
        let mut cov = 0.0f64;
        for k in 1..=10 {
            cov = cov.max(covariance_defect(&povm, k as f64 * dp)?);
        }
        push(format!("{label}.covariance"), cov, COVARIANCE_TOL, cov <= COVARIANCE_TOL);
    }
    let summary = format!("povm-check: {} properties, pass={passed}", rows.len());
    let body = csv("property,value,tolerance,pass", rows);
    Ok(Outcome { files: vec![("povm_check.csv".into(), body)], passed, summary })
}

fn kraus_equiv(cfg: &RunConfig) -> Result<Outcome> {
    let params = cfg.model_at(cfg.model.omega);
    let grid = make_grid(DomainKind::HalfLine, cfg.povm_length, cfg.povm_n)?;
    params.validate(&grid)?;
    let ham = system_hamiltonian(&params, &grid)?;
    let ground = odd_ground_state(&params, &grid)?.half;
    let momenta = MomentumGrid::nyquist(&grid);
    let optimal = build_povm(optimal_kernel(&ground), momenta.clone(), &grid)?;
    let family = KrausFamily::new(&ham, &ground, params.coupling, momenta)?;
    let report = kraus_equivalence(&povm_from_kraus(family), &optimal)?;
    let passed = report.max_deviation <= KRAUS_TOL;
    let body = csv(
        "sign,max_deviation,other_sign_deviation,singular_points,tolerance,pass",
        [vec![
            report.sign.to_string(),
            num(report.max_deviation),
            num(report.other_sign_deviation),
            report.singular_points.to_string(),
            num(KRAUS_TOL),
            passed.to_string(),
        ]],
    );
    let summary = format!("kraus-equiv: sign {} deviation {:e}, pass={passed}", report.sign, report.max_deviation);
    Ok(Outcome { files: vec![("kraus_equiv.csv".into(), body)], passed, summary })
}
