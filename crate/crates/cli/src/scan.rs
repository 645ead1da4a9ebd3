//! Parameter scans driven by a JSON configuration.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Deserialize;
use twistkit::expansion::psi_shifted;
use twistkit::fields::{electric_field, magnetic_field, psi, vector_potential};
use twistkit::matrix_elements::{
    dipole_amplitude, icm0, suppression_factor, symbolic_channels, triple_bessel, DipoleCoupling,
};
use twistkit::quadrature::fd_curl;
use twistkit::{CenterOfMassState, CylPoint, Error, Interaction, InternalState, ModeKind, ModeSpec, PlanarVec};

use crate::args::{CmKind, OutputFormat, ScanArgs};
use crate::commands::{channel_cells, CHANNEL_COLUMNS};
use crate::error::{CliError, CliResult};
use crate::table::{Cell, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    Field,
    ExpansionError,
    ChannelTable,
    DipoleAmplitude,
    Icm0,
    TripleBessel,
    Suppression,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Range {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl Range {
    fn value(&self, i: usize) -> f64 {
        if self.count <= 1 {
            self.start
        } else {
            self.start + (self.stop - self.start) * i as f64 / (self.count - 1) as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub path: Option<PathBuf>,
    #[serde(default = "default_format")]
    pub format: OutputFormat,
}

fn default_format() -> OutputFormat {
    OutputFormat::Csv
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Largest admissible difference between the two semi-infinite methods.
    pub oracle_agreement: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CmProfileKind {
    #[default]
    Trapped,
    Free,
}

impl From<CmKind> for CmProfileKind {
    fn from(k: CmKind) -> Self {
        match k {
            CmKind::Trapped => CmProfileKind::Trapped,
            CmKind::Free => CmProfileKind::Free,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanConfig {
    pub quantity: Quantity,
    #[serde(default)]
    pub grid: BTreeMap<String, Range>,
    #[serde(default)]
    pub fixed: BTreeMap<String, f64>,
    #[serde(default = "default_kind")]
    pub mode_kind: String,
    #[serde(default = "default_interaction")]
    pub interaction: Interaction,
    #[serde(default)]
    pub cm_profile: CmProfileKind,
    #[serde(default)]
    pub output: Option<OutputSpec>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub samples: Option<usize>,
    #[serde(default)]
    pub jobs: Option<usize>,
}

fn default_kind() -> String {
    "tm".into()
}

fn default_interaction() -> Interaction {
    Interaction::Dipole
}

#[derive(Debug, Clone, Copy)]
pub struct Param {
    pub name: &'static str,
    pub integer: bool,
    pub default: f64,
}

const fn real(name: &'static str, default: f64) -> Param {
    Param { name, integer: false, default }
}

const fn int(name: &'static str, default: f64) -> Param {
    Param { name, integer: true, default }
}

const FIELD_PARAMS: [Param; 7] = [
    int("m", 1.0),
    real("k_perp", 1.0),
    real("k_z", 1.0),
    real("rho", 0.5),
    real("phi", 0.0),
    real("z", 0.0),
    real("t", 0.0),
];

const EXPANSION_ERROR_PARAMS: [Param; 7] = [
    int("m", 1.0),
    real("k_perp", 1.0),
    real("big_r", 2.0),
    real("big_phi", 0.3),
    real("q", 0.5),
    real("q_phi", 1.1),
    int("v_max", 0.0),
];

const CHANNEL_TABLE_PARAMS: [Param; 2] = [int("m", 1.0), int("max_multipole", 0.0)];

const DIPOLE_AMPLITUDE_PARAMS: [Param; 14] = [
    int("m", 1.0),
    real("k_perp", 1.0),
    real("k_z", 1.0),
    real("alpha", 1.0),
    int("n_bar_in", 0.0),
    int("n_bar_out", 0.0),
    int("m_cm_in", 0.0),
    int("m_cm_out", 0.0),
    real("k_perp_cm_in", 1.0),
    real("k_perp_cm_out", 1.0),
    real("k_z_cm_in", 0.0),
    int("m_r_in", 1.0),
    real("charge", -1.0),
    real("energy_gap", 0.375),
];

const ICM0_PARAMS: [Param; 10] = [
    real("k_perp", 1.0),
    real("k_z", 0.0),
    real("alpha", 1.0),
    int("n_bar_in", 0.0),
    int("n_bar_out", 0.0),
    int("m_cm_in", 0.0),
    int("order", 0.0),
    real("k_perp_cm_in", 1.0),
    real("k_perp_cm_out", 1.0),
    real("k_z_cm_in", 0.0),
];

const TRIPLE_BESSEL_PARAMS: [Param; 6] = [
    real("k_perp", 1.0),
    real("k_perp_r", 1.0),
    real("k_perp_out", 1.5),
    int("m", 0.0),
    int("m_r", 0.0),
    int("n", 0.0),
];

const SUPPRESSION_PARAMS: [Param; 2] = [real("k_perp", 1.0), real("alpha", 1.0)];

impl Quantity {
    pub fn params(self) -> &'static [Param] {
        match self {
            Quantity::Field => &FIELD_PARAMS,
            Quantity::ExpansionError => &EXPANSION_ERROR_PARAMS,
            Quantity::ChannelTable => &CHANNEL_TABLE_PARAMS,
            Quantity::DipoleAmplitude => &DIPOLE_AMPLITUDE_PARAMS,
            Quantity::Icm0 => &ICM0_PARAMS,
            Quantity::TripleBessel => &TRIPLE_BESSEL_PARAMS,
            Quantity::Suppression => &SUPPRESSION_PARAMS,
        }
    }

    /// Output columns followed by error-estimate columns.
    fn columns(self) -> (Vec<&'static str>, Vec<&'static str>) {
        match self {
            Quantity::Field => (
                [
                    "A_x_re", "A_x_im", "A_y_re", "A_y_im", "A_z_re", "A_z_im", "E_x_re", "E_x_im", "E_y_re", "E_y_im",
                    "E_z_re", "E_z_im", "B_x_re", "B_x_im", "B_y_re", "B_y_im", "B_z_re", "B_z_im",
                ]
                .to_vec(),
                vec!["curl_residual"],
            ),
            Quantity::ExpansionError => (
                vec!["direct_re", "direct_im", "series_re", "series_im"],
                vec!["abs_error", "rel_error", "truncation_estimate"],
            ),
            Quantity::ChannelTable => (CHANNEL_COLUMNS.to_vec(), vec![]),
            Quantity::DipoleAmplitude => (vec!["channels", "amplitude_re", "amplitude_im", "amplitude_abs"], vec![]),
            Quantity::Icm0 => {
                (vec!["value_re", "value_im", "gaussian_factor", "candidate", "closed_form"], vec!["uncertainty"])
            }
            Quantity::TripleBessel => {
                (vec!["value", "regime", "candidate", "partial_scale"], vec!["uncertainty", "method_difference"])
            }
            Quantity::Suppression => (vec!["value"], vec![]),
        }
    }
}

/// Resolved scan: configuration merged with command-line overrides.
#[derive(Debug, Clone)]
pub struct Plan {
    pub quantity: Quantity,
    pub kind: ModeKind,
    pub interaction: Interaction,
    pub cm_profile: CmProfileKind,
    pub tolerances: Tolerances,
    pub points: Vec<Vec<f64>>,
    pub output: Option<PathBuf>,
    pub format: OutputFormat,
    pub jobs: usize,
}

pub fn load_config(path: &Path) -> CliResult<ScanConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("invalid config {}: {e}", path.display())))
}

fn check_integer(name: &str, v: f64) -> CliResult<f64> {
    let r = v.round();
    if (v - r).abs() > 1e-9 || !r.is_finite() {
        return Err(CliError::Usage(format!("parameter {name} takes integer values, got {v}")));
    }
    Ok(r)
}

pub fn plan(config: &ScanConfig, args: Option<&ScanArgs>) -> CliResult<Plan> {
    let params = config.quantity.params();
    let known = |name: &str| params.iter().any(|p| p.name == name);
    for name in config.grid.keys().chain(config.fixed.keys()) {
        if !known(name) {
            let names: Vec<_> = params.iter().map(|p| p.name).collect();
            return Err(CliError::Usage(format!(
                "unknown parameter {name:?} for {:?}; expected one of {names:?}",
                config.quantity
            )));
        }
    }
    for name in config.grid.keys() {
        if config.fixed.contains_key(name) {
            return Err(CliError::Usage(format!("parameter {name:?} is both gridded and fixed")));
        }
    }
    for (name, r) in &config.grid {
        if r.count < 1 {
            return Err(CliError::Usage(format!("grid {name}: count must be >= 1")));
        }
        if !(r.start <= r.stop) || !r.start.is_finite() || !r.stop.is_finite() {
            return Err(CliError::Usage(format!("grid {name}: need finite start <= stop")));
        }
    }
    let kind: ModeKind = config.mode_kind.parse().map_err(|e: Error| CliError::Usage(e.to_string()))?;
    let seed = args.and_then(|a| a.seed).unwrap_or(config.seed);
    let samples = args.and_then(|a| a.samples).or(config.samples);

    let dims: Vec<(usize, Range)> =
        params.iter().enumerate().filter_map(|(i, p)| config.grid.get(p.name).map(|r| (i, *r))).collect();
    let base: Vec<f64> = params.iter().map(|p| config.fixed.get(p.name).copied().unwrap_or(p.default)).collect();
    let mut points = Vec::new();
    match samples {
        Some(0) => return Err(CliError::Usage("samples must be >= 1".into())),
        Some(n) => {
            for i in 0..n {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(i as u64);
                let mut p = base.clone();
                for &(slot, r) in &dims {
                    p[slot] = if params[slot].integer {
                        rng.gen_range(r.start.ceil() as i64..=r.stop.floor() as i64) as f64
                    } else if r.start == r.stop {
                        r.start
                    } else {
                        rng.gen_range(r.start..=r.stop)
                    };
                }
                points.push(p);
            }
        }
        None => {
            let total: usize = dims.iter().map(|d| d.1.count).product();
            for flat in 0..total {
                let mut p = base.clone();
                let mut rem = flat;
                for &(slot, r) in dims.iter().rev() {
                    p[slot] = r.value(rem % r.count);
                    rem /= r.count;
                }
                points.push(p);
            }
        }
    }
    for p in &points {
        for (v, param) in p.iter().zip(params) {
            if param.integer {
                check_integer(param.name, *v)?;
            }
        }
    }
    let requested = config.output.clone().unwrap_or(OutputSpec { path: None, format: OutputFormat::Csv });
    let output = match args.and_then(|a| a.output.clone()).or(requested.path) {
        Some(p) if p.as_os_str() == "-" => None,
        other => other,
    };
    let format = args.and_then(|a| a.format).unwrap_or(requested.format);
    let jobs = args
        .and_then(|a| a.jobs)
        .or(config.jobs)
        .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1));
    if jobs == 0 {
        return Err(CliError::Usage("jobs must be >= 1".into()));
    }
    if let Some(tol) = config.tolerances.oracle_agreement {
        if !(tol >= 0.0) {
            return Err(CliError::Usage(format!("tolerances.oracle_agreement must be >= 0, got {tol}")));
        }
    }
    Ok(Plan {
        quantity: config.quantity,
        kind,
        interaction: config.interaction,
        cm_profile: config.cm_profile,
        tolerances: config.tolerances,
        points,
        output,
        format,
        jobs,
    })
}

struct Point<'a> {
    params: &'static [Param],
    values: &'a [f64],
}

impl Point<'_> {
    fn get(&self, name: &str) -> f64 {
        let i = self.params.iter().position(|p| p.name == name).expect("declared parameter");
        self.values[i]
    }

    fn int(&self, name: &str) -> i32 {
        self.get(name).round() as i32
    }

    fn uint(&self, name: &str) -> twistkit::Result<u32> {
        let v = self.int(name);
        u32::try_from(v).map_err(|_| Error::InvalidArgument(format!("{name} must be >= 0, got {v}")))
    }

    fn describe(&self) -> String {
        self.params
            .iter()
            .zip(self.values)
            .map(|(p, v)| if p.integer { format!("{}={}", p.name, v.round()) } else { format!("{}={v}", p.name) })
            .collect::<Vec<_>>()
            .join(", ")
    }

    fn cells(&self) -> Vec<Cell> {
        self.params
            .iter()
            .zip(self.values)
            .map(|(p, v)| if p.integer { Cell::Int(v.round() as i64) } else { Cell::Real(*v) })
            .collect()
    }
}

fn cm_state(plan: &Plan, m: i32, n_bar: u32, alpha: f64, k_perp: f64, k_z: f64) -> twistkit::Result<CenterOfMassState> {
    match plan.cm_profile {
        CmProfileKind::Trapped => CenterOfMassState::trapped(m, n_bar, alpha, k_z),
        CmProfileKind::Free => CenterOfMassState::free(m, k_perp, k_z),
    }
}

fn evaluate(plan: &Plan, p: &Point) -> twistkit::Result<Vec<Vec<Cell>>> {
    let one = |c: Vec<Cell>| Ok(vec![c]);
    match plan.quantity {
        Quantity::Suppression => one(vec![suppression_factor(p.get("k_perp"), p.get("alpha")).into()]),
        Quantity::Field => {
            let mode = ModeSpec::new(plan.kind, p.int("m"), p.get("k_perp"), p.get("k_z"))?;
            mode.check()?;
            let point = CylPoint::new(p.get("rho"), p.get("phi"), p.get("z"), p.get("t"))?;
            let a = vector_potential(&mode, &point)?;
            let e = electric_field(&mode, &point)?;
            let b = magnetic_field(&mode, &point)?;
            let h = 1e-4 / mode.omega();
            let potential = |x: [f64; 3]| {
                let q = CylPoint::from_cartesian(x[0], x[1], x[2]).with_time(point.t);
                vector_potential(&mode, &q)
                    .map(|s| s.to_array())
                    .unwrap_or([twistkit::Complex64::new(f64::NAN, 0.0); 3])
            };
            let curl = fd_curl(potential, &point, h);
            let scale = b.norm().max(mode.omega() * a.norm()).max(f64::MIN_POSITIVE);
            let residual = curl.iter().zip(b.to_array()).map(|(c, bi)| (c - bi).norm()).fold(0.0, f64::max) / scale;
            let mut row = Vec::new();
            for s in [a, e, b] {
                for z in s.to_array() {
                    row.push(z.re.into());
                    row.push(z.im.into());
                }
            }
            row.push(residual.into());
            one(row)
        }
        Quantity::ExpansionError => {
            let (m, k) = (p.int("m"), p.get("k_perp"));
            let big = PlanarVec::new(p.get("big_r"), p.get("big_phi"))?;
            let small = PlanarVec::new(p.get("q"), p.get("q_phi"))?;
            let rel = big - small;
            let direct = psi(m, k, rel.r, rel.phi);
            let v_max = match p.uint("v_max")? {
                0 => None,
                v => Some(v as usize),
            };
            let series = psi_shifted(m, k, big, small, v_max)?.series;
            let err = (series.value - direct).norm();
            one(vec![
                direct.re.into(),
                direct.im.into(),
                series.value.re.into(),
                series.value.im.into(),
                err.into(),
                (err / direct.norm()).into(),
                series.truncation_estimate.into(),
            ])
        }
        Quantity::ChannelTable => {
            let channels = symbolic_channels(p.int("m"), plan.kind, plan.interaction, p.uint("max_multipole")?)?;
            Ok(channels.iter().map(channel_cells).collect())
        }
        Quantity::DipoleAmplitude => {
            let mode = ModeSpec::new(plan.kind, p.int("m"), p.get("k_perp"), p.get("k_z"))?;
            let alpha = p.get("alpha");
            let kz_in = p.get("k_z_cm_in");
            let cm_in = cm_state(plan, p.int("m_cm_in"), p.uint("n_bar_in")?, alpha, p.get("k_perp_cm_in"), kz_in)?;
            let cm_out = cm_state(
                plan,
                p.int("m_cm_out"),
                p.uint("n_bar_out")?,
                alpha,
                p.get("k_perp_cm_out"),
                kz_in - mode.k_z,
            )?;
            let int_in = InternalState::hydrogen_2p(p.int("m_r_in"))?;
            let int_out = InternalState::hydrogen_1s();
            let coupling = DipoleCoupling { charge: p.get("charge"), energy_gap: p.get("energy_gap") };
            let amps = dipole_amplitude(&mode, &cm_in, &cm_out, &int_in, &int_out, &coupling)?;
            let total: twistkit::Complex64 = amps.iter().map(|a| a.amplitude).sum();
            one(vec![(amps.len() as i64).into(), total.re.into(), total.im.into(), total.norm().into()])
        }
        Quantity::Icm0 => {
            let alpha = p.get("alpha");
            let kz_in = p.get("k_z_cm_in");
            let m_in = p.int("m_cm_in");
            let order = p.int("order");
            let cm_in = cm_state(plan, m_in, p.uint("n_bar_in")?, alpha, p.get("k_perp_cm_in"), kz_in)?;
            let cm_out = cm_state(
                plan,
                m_in - order,
                p.uint("n_bar_out")?,
                alpha,
                p.get("k_perp_cm_out"),
                kz_in - p.get("k_z"),
            )?;
            let c = icm0(&cm_in, &cm_out, p.get("k_perp"), p.get("k_z"), order)?;
            one(vec![
                c.value.re.into(),
                c.value.im.into(),
                c.gaussian_factor.unwrap_or(f64::NAN).into(),
                c.candidate.unwrap_or(f64::NAN).into(),
                c.closed_form.unwrap_or(f64::NAN).into(),
                c.uncertainty.into(),
            ])
        }
        Quantity::TripleBessel => {
            let r = triple_bessel(
                p.get("k_perp"),
                p.get("k_perp_r"),
                p.get("k_perp_out"),
                p.int("m"),
                p.int("m_r"),
                p.uint("n")?,
            )?;
            let difference = r.eps_regularized.map(|er| (er.value - r.zero_partition.value).abs()).unwrap_or(f64::NAN);
            if let (Some(tol), Some(er)) = (plan.tolerances.oracle_agreement, r.eps_regularized) {
                if difference > tol {
                    return Err(Error::OracleInconsistency {
                        first: r.zero_partition.value,
                        second: er.value,
                        allowed: tol,
                    });
                }
            }
            let regime = format!("{:?}", r.regime).to_lowercase();
            one(vec![
                r.value.into(),
                regime.into(),
                r.candidate.unwrap_or(f64::NAN).into(),
                r.partial_scale.into(),
                r.uncertainty.into(),
                difference.into(),
            ])
        }
    }
}

/// Evaluates every point of the plan; rows come out in point order.
pub fn run_plan(plan: &Plan) -> CliResult<Table> {
    let params = plan.quantity.params();
    let (outputs, errors) = plan.quantity.columns();
    let header = params.iter().map(|p| p.name).chain(outputs).chain(errors);
    let mut table = Table::new(header);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(plan.jobs)
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start {} workers: {e}", plan.jobs)))?;
    log::info!("scan {:?}: {} points on {} workers", plan.quantity, plan.points.len(), plan.jobs);
    let results: Vec<twistkit::Result<Vec<Vec<Cell>>>> =
        pool.install(|| plan.points.par_iter().map(|values| evaluate(plan, &Point { params, values })).collect());
    for (index, (values, result)) in plan.points.iter().zip(results).enumerate() {
        let point = Point { params, values };
        match result {
            Ok(rows) => {
                for row in rows {
                    let mut cells = point.cells();
                    cells.extend(row);
                    table.push(cells);
                }
            }
            Err(source) => {
                let described = point.describe();
                log::error!("grid point {index} ({described}): {source}");
                return Err(CliError::AtPoint { index, point: described, source });
            }
        }
    }
    Ok(table)
}

fn render(table: &Table, format: OutputFormat, out: impl Write) -> std::io::Result<()> {
    match format {
        OutputFormat::Csv => table.write_csv(out),
        OutputFormat::Json => table.write_json(out),
    }
}

pub fn run(args: &ScanArgs) -> CliResult<()> {
    let config = load_config(&args.config)?;
    let plan = plan(&config, Some(args))?;
    match &plan.output {
        Some(path) => {
            let shown = path.display().to_string();
            let file =
                File::create(path).map_err(|e| CliError::Usage(format!("output {shown} is not writable: {e}")))?;
            let table = match run_plan(&plan) {
                Ok(t) => t,
                Err(e) => {
                    drop(file);
                    let _ = std::fs::remove_file(path);
                    return Err(e);
                }
            };
            render(&table, plan.format, std::io::BufWriter::new(file)).map_err(|e| CliError::io(shown.clone(), e))?;
            log::info!("wrote {} rows to {shown}", table.rows.len());
        }
        None => {
            let table = run_plan(&plan)?;
            let stdout = std::io::stdout();
            render(&table, plan.format, stdout.lock()).map_err(|e| CliError::io("stdout", e))?;
        }
    }
    Ok(())
}
