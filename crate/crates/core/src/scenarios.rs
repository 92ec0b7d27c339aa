//! Scenario configurations: a current, its domain and a list of checks.
//!
//! Configs are TOML. A minimal surface scenario:
//!
//! ```toml
//! name = "charged-plane"
//! kind = "surface"            # surface | string | point | mixed
//!
//! [level_sets]
//! phi = "z"                   # surface and mixed-surface: phi; string: phi, psi
//!
//! [densities]                 # fields of t, x, y, z in the original chart
//! sigma = "2"
//! i1 = "0"
//! i2 = "0"
//!
//! [domain]                    # test box; these are the defaults
//! t = [0.0, 1.0]
//! x = [-1.5, 1.5]
//! y = [-1.5, 1.5]
//! z = [-1.5, 1.5]
//!
//! [quadrature]                # optional overrides
//! order = 16
//! epsilon = 0.01
//!
//! [[checks]]
//! kind = "charge"
//! time = 0.5
//! reference = 18.0
//! tolerance = 1e-6
//! ```
//!
//! Densities per kind:
//!
//! * `surface`: `sigma`, `i1`, `i2` on `phi = 0`;
//! * `string`: `sigma`, `j` on `phi = psi = 0`;
//! * `point`: `q` and `worldline = ["x0(t)", "y0(t)", "z0(t)"]`;
//! * `mixed`: a surface or point current plus a `[bulk]` table with `rho`
//!   and `j = ["jx", "jy", "jz"]`.
//!
//! Surface and string densities are written in the original coordinates and
//! must not depend on the level-set coordinates of the adapted chart.
//!
//! Check kinds and their fields (tolerances have defaults):
//!
//! | kind         | fields                                   |
//! |--------------|------------------------------------------|
//! | `charge`     | `time`, `reference`, `tolerance`         |
//! | `oracle`     | `time`, `tolerance`                      |
//! | `residual`   | `expect` (`conserved`/`violated`), `tolerance` |
//! | `mixed`      | `expect`, `tolerance`                    |
//! | `law`        | `expect`, `tolerance`                    |
//! | `stokes`     | `tolerance`                              |
//! | `flux`       | `axis` (`x`/`y`/`z`), `at`, `reference`, `tolerance` |
//! | `invariance` | `maps`, `time`, `tolerance`              |
//!
//! For `expect = "violated"` the tolerance is a lower bound the residual
//! must exceed.

use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::chains::{collapse_integrate, mollified_integrate, total_charge, transversality_check, QuadratureSpec};
use crate::chart::AdaptedChart;
use crate::conservation::{
    aligned_test_family, assemble_string, assemble_surface, bulk_current, current_residual,
    domain_box, extract_string_densities, extract_surface_densities, flux_chain, mixed_residual,
    point_current_on, point_densities, point_law_residual, random_distortion, spatial_box,
    standard_test_family, stokes_check, string_law_residual, surface_law_residual, DensityBundle,
    StringDensities, SurfaceDensities,
};
use crate::error::{Error, Result};
use crate::exterior::{Region, RegularForm, SmoothMap, DIM};
use crate::expr::Expr;
use crate::parse::parse_expr;
use crate::singular::{string_current, surface_current, SingularForm};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Surface,
    String,
    Point,
    Mixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Expect {
    #[default]
    Conserved,
    Violated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    fn index(self) -> usize {
        match self {
            Axis::X => 1,
            Axis::Y => 2,
            Axis::Z => 3,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LevelSetConfig {
    pub phi: Option<String>,
    pub psi: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensityConfig {
    pub sigma: Option<String>,
    pub i1: Option<String>,
    pub i2: Option<String>,
    pub j: Option<String>,
    pub q: Option<String>,
    pub worldline: Option<[String; 3]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BulkConfig {
    #[serde(default = "zero_string")]
    pub rho: String,
    pub j: [String; 3],
}

fn zero_string() -> String {
    "0".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainConfig {
    #[serde(default = "unit_interval")]
    pub t: [f64; 2],
    #[serde(default = "spatial_interval")]
    pub x: [f64; 2],
    #[serde(default = "spatial_interval")]
    pub y: [f64; 2],
    #[serde(default = "spatial_interval")]
    pub z: [f64; 2],
}

fn unit_interval() -> [f64; 2] {
    [0.0, 1.0]
}

fn spatial_interval() -> [f64; 2] {
    [-1.5, 1.5]
}

impl Default for DomainConfig {
    fn default() -> Self {
        DomainConfig {
            t: unit_interval(),
            x: spatial_interval(),
            y: spatial_interval(),
            z: spatial_interval(),
        }
    }
}

impl DomainConfig {
    pub fn region(&self) -> Region {
        let b = [self.t, self.x, self.y, self.z];
        Region::new(std::array::from_fn(|i| b[i][0]), std::array::from_fn(|i| b[i][1]))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureConfig {
    pub order: Option<usize>,
    pub epsilon: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum CheckConfig {
    Charge {
        time: f64,
        reference: f64,
        #[serde(default = "tol_charge")]
        tolerance: f64,
    },
    Oracle {
        time: Option<f64>,
        #[serde(default = "tol_oracle")]
        tolerance: f64,
    },
    Residual {
        #[serde(default)]
        expect: Expect,
        tolerance: Option<f64>,
    },
    Mixed {
        #[serde(default)]
        expect: Expect,
        tolerance: Option<f64>,
    },
    Law {
        #[serde(default)]
        expect: Expect,
        tolerance: Option<f64>,
    },
    Stokes {
        #[serde(default = "tol_stokes")]
        tolerance: f64,
    },
    Flux {
        axis: Axis,
        at: f64,
        reference: f64,
        #[serde(default = "tol_stokes")]
        tolerance: f64,
    },
    Invariance {
        #[serde(default = "default_maps")]
        maps: usize,
        time: Option<f64>,
        #[serde(default = "tol_stokes")]
        tolerance: f64,
    },
}

fn tol_charge() -> f64 {
    1e-6
}
fn tol_oracle() -> f64 {
    1e-4
}
fn tol_stokes() -> f64 {
    1e-5
}
fn default_maps() -> usize {
    5
}

/// Lower bound a deliberately violated residual must exceed.
pub const VIOLATION_THRESHOLD: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    pub kind: Kind,
    #[serde(default)]
    pub description: String,
    #[serde(default)]
    pub level_sets: LevelSetConfig,
    #[serde(default)]
    pub densities: DensityConfig,
    pub bulk: Option<BulkConfig>,
    #[serde(default)]
    pub domain: DomainConfig,
    #[serde(default)]
    pub quadrature: QuadratureConfig,
    #[serde(default)]
    pub checks: Vec<CheckConfig>,
}

/// Parses a TOML scenario config. Errors name the offending field.
pub fn parse_config(text: &str) -> Result<ScenarioConfig> {
    toml::from_str(text).map_err(|e| {
        let msg = e.message().to_string();
        let field = msg
            .split('`')
            .nth(1)
            .map(str::to_string)
            .unwrap_or_else(|| "config".into());
        Error::config(field, msg)
    })
}

/// Parses a coordinate change written as four expressions in `t, x, y, z`,
/// separated by `;` or newlines (`#` starts a comment), and validates it on
/// `region`.
pub fn parse_map(text: &str, region: &Region) -> Result<SmoothMap> {
    let parts: Vec<&str> = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or(""))
        .flat_map(|l| l.split(';'))
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .collect();
    if parts.len() != DIM {
        return Err(Error::config(
            "map",
            format!("expected 4 components, found {}", parts.len()),
        ));
    }
    let mut comps = Vec::with_capacity(DIM);
    for (i, p) in parts.iter().enumerate() {
        comps.push(expr(&format!("map[{i}]"), p)?);
    }
    SmoothMap::new(comps.try_into().expect("four components"), region)
}

fn expr(field: &str, text: &str) -> Result<Expr> {
    parse_expr(text).map_err(|source| Error::Parse {
        field: field.into(),
        source,
    })
}

fn required<'a>(value: &'a Option<String>, field: &str) -> Result<&'a str> {
    value
        .as_deref()
        .ok_or_else(|| Error::config(field, "required for this kind"))
}

fn optional(value: &Option<String>, field: &str) -> Result<Expr> {
    value.as_deref().map_or(Ok(Expr::zero()), |s| expr(field, s))
}

/// Rewrites a density in adapted coordinates and rejects dependence on
/// the level-set slots.
fn adapted_density(chart: &AdaptedChart, f: &Expr, field: &str) -> Result<Expr> {
    let g = chart.to_adapted_field(f);
    if chart.level_slots().iter().any(|&v| g.depends_on(v)) {
        return Err(Error::config(
            field,
            "must not depend on the coordinates transverse to the level set",
        ));
    }
    Ok(g)
}

/// A built scenario: the current, the charts it lives on and the checks.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub config: ScenarioConfig,
    pub current: SingularForm,
    pub bulk: Option<RegularForm>,
    pub chart: Option<AdaptedChart>,
    pub densities: DensityBundle,
    pub domain: Region,
    pub spec: QuadratureSpec,
}

enum Carrier {
    Surface,
    String,
    Point,
}

pub fn build_scenario(config: &ScenarioConfig) -> Result<Scenario> {
    let domain = config.domain.region();
    domain_box(&domain).map_err(|e| Error::config("domain", e.to_string()))?;
    let mut spec = QuadratureSpec::default();
    if let Some(n) = config.quadrature.order {
        spec.order = n;
    }
    if let Some(e) = config.quadrature.epsilon {
        spec.epsilon = e;
    }
    spec.validate()
        .map_err(|e| Error::config("quadrature", e.to_string()))?;

    let d = &config.densities;
    let carrier = match config.kind {
        Kind::Surface => Carrier::Surface,
        Kind::String => Carrier::String,
        Kind::Point => Carrier::Point,
        Kind::Mixed if d.worldline.is_some() => Carrier::Point,
        Kind::Mixed => Carrier::Surface,
    };
    let bulk = match (config.kind, &config.bulk) {
        (Kind::Mixed, Some(b)) => {
            let rho = expr("bulk.rho", &b.rho)?;
            let j = [
                expr("bulk.j[0]", &b.j[0])?,
                expr("bulk.j[1]", &b.j[1])?,
                expr("bulk.j[2]", &b.j[2])?,
            ];
            Some(bulk_current(&rho, &j))
        }
        (Kind::Mixed, None) => return Err(Error::config("bulk", "required for kind mixed")),
        (_, Some(_)) => return Err(Error::config("bulk", "only allowed for kind mixed")),
        (_, None) => None,
    };
    let box4 = domain_box(&domain)?;

    let (current, chart, densities) = match carrier {
        Carrier::Surface => {
            let phi = expr("level_sets.phi", required(&config.level_sets.phi, "level_sets.phi")?)?;
            check_transversal(std::slice::from_ref(&phi), &box4, "level_sets.phi")?;
            let chart = AdaptedChart::surface(&phi)?;
            let adapted = SurfaceDensities {
                sigma: adapted_density(&chart, &optional(&d.sigma, "densities.sigma")?, "densities.sigma")?,
                i1: adapted_density(&chart, &optional(&d.i1, "densities.i1")?, "densities.i1")?,
                i2: adapted_density(&chart, &optional(&d.i2, "densities.i2")?, "densities.i2")?,
            };
            let l = assemble_surface(&adapted).pullback(chart.to_adapted());
            let j = surface_current(&l, &phi)?;
            (j, Some(chart), DensityBundle::Surface(adapted))
        }
        Carrier::String => {
            let phi = expr("level_sets.phi", required(&config.level_sets.phi, "level_sets.phi")?)?;
            let psi = expr("level_sets.psi", required(&config.level_sets.psi, "level_sets.psi")?)?;
            check_transversal(&[phi.clone(), psi.clone()], &box4, "level_sets")?;
            let chart = AdaptedChart::string(&phi, &psi)?;
            let adapted = StringDensities {
                sigma: adapted_density(&chart, &optional(&d.sigma, "densities.sigma")?, "densities.sigma")?,
                j: adapted_density(&chart, &optional(&d.j, "densities.j")?, "densities.j")?,
            };
            let k = assemble_string(&adapted).pullback(chart.to_adapted());
            let j = string_current(&k, &phi, &psi)?;
            (j, Some(chart), DensityBundle::String(adapted))
        }
        Carrier::Point => {
            let q = expr("densities.q", required(&d.q, "densities.q")?)?;
            if (1..DIM).any(|v| q.depends_on(v)) {
                return Err(Error::config("densities.q", "may depend on t only"));
            }
            let w = d
                .worldline
                .as_ref()
                .ok_or_else(|| Error::config("densities.worldline", "required for this kind"))?;
            let worldline = [
                expr("densities.worldline[0]", &w[0])?,
                expr("densities.worldline[1]", &w[1])?,
                expr("densities.worldline[2]", &w[2])?,
            ];
            let fields: Vec<Expr> = (0..3).map(|a| Expr::var(a + 1).sub(&worldline[a])).collect();
            check_transversal(&fields, &box4, "densities.worldline")?;
            let j = point_current_on(&q, &worldline)?;
            (j, None, DensityBundle::Point(point_densities(&q, &worldline)))
        }
    };
    Ok(Scenario {
        config: config.clone(),
        current,
        bulk,
        chart,
        densities,
        domain,
        spec,
    })
}

fn check_transversal(fields: &[Expr], box4: &crate::chains::Chain, field: &str) -> Result<()> {
    let report = transversality_check(fields, box4, true)?;
    if !report.passed() {
        return Err(Error::Transversality(format!(
            "{field}: minor {:e}, spatial gradient {:?} on the domain",
            report.min_minor, report.min_spatial_gradient
        )));
    }
    Ok(())
}

/// One line of a scenario report.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckRow {
    pub check: String,
    pub value: f64,
    pub reference: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub scenario: String,
    pub seed: u64,
    pub spec: QuadratureSpec,
    pub rows: Vec<CheckRow>,
}

pub const CSV_HEADER: &str = "scenario,check,value,reference,tolerance,status";

impl Report {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    /// Comment line carrying the seed and quadrature settings.
    pub fn header_line(&self) -> String {
        format!(
            "# seed={} order={} epsilon={:e}",
            self.seed, self.spec.order, self.spec.epsilon
        )
    }

    pub fn csv_rows(&self) -> String {
        let mut out = String::new();
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{:.12e},{:.12e},{:.3e},{}",
                self.scenario,
                r.check,
                r.value,
                r.reference,
                r.tolerance,
                if r.pass { "pass" } else { "fail" }
            );
        }
        out
    }

    pub fn to_csv(&self) -> String {
        format!("{}\n{}\n{}", self.header_line(), CSV_HEADER, self.csv_rows())
    }

    /// Human-readable table.
    pub fn table(&self) -> String {
        let mut out = format!("scenario {} ({})\n", self.scenario, self.header_line());
        let _ = writeln!(
            out,
            "  {:<28} {:>20} {:>20} {:>10}  status",
            "check", "value", "reference", "tolerance"
        );
        for r in &self.rows {
            let _ = writeln!(
                out,
                "  {:<28} {:>20.12e} {:>20.12e} {:>10.1e}  {}",
                r.check,
                r.value,
                r.reference,
                r.tolerance,
                if r.pass { "pass" } else { "FAIL" }
            );
        }
        out
    }
}

fn expectation_row(name: &str, value: f64, expect: Expect, tolerance: Option<f64>, conserved: f64) -> CheckRow {
    match expect {
        Expect::Conserved => {
            let tol = tolerance.unwrap_or(conserved);
            CheckRow {
                check: name.into(),
                value,
                reference: 0.0,
                tolerance: tol,
                pass: value < tol,
            }
        }
        Expect::Violated => {
            let tol = tolerance.unwrap_or(VIOLATION_THRESHOLD);
            CheckRow {
                check: format!("{name}(violated)"),
                value,
                reference: 0.0,
                tolerance: tol,
                pass: value > tol,
            }
        }
    }
}

impl Scenario {
    fn mid_time(&self) -> f64 {
        0.5 * (self.domain.lo[0] + self.domain.hi[0])
    }

    /// Adapted-coordinate conservation law residual on a grid of the domain.
    pub fn law_residual(&self) -> Result<f64> {
        let grid = self.domain.grid(5);
        match (&self.densities, &self.chart) {
            (DensityBundle::Surface(_), Some(chart)) => {
                let l = self.current.regular().pullback(chart.to_original());
                let d = extract_surface_densities(&l)?;
                let pts = grid
                    .iter()
                    .map(|p| chart.to_adapted().apply(p))
                    .collect::<Result<Vec<_>>>()?;
                surface_law_residual(&d, &pts)
            }
            (DensityBundle::String(_), Some(chart)) => {
                let k = self.current.regular().pullback(chart.to_original());
                let d = extract_string_densities(&k)?;
                let pts = grid
                    .iter()
                    .map(|p| chart.to_adapted().apply(p))
                    .collect::<Result<Vec<_>>>()?;
                string_law_residual(&d, &pts)
            }
            (DensityBundle::Point(d), _) => point_law_residual(d, &grid),
            _ => Err(Error::UnsupportedChart("no adapted chart for this scenario".into())),
        }
    }

    fn run_check(&self, check: &CheckConfig, seed: u64) -> Result<Vec<CheckRow>> {
        let spec = &self.spec;
        Ok(match check {
            CheckConfig::Charge {
                time,
                reference,
                tolerance,
            } => {
                let q = total_charge(&self.current, &spatial_box(&self.domain, *time)?, spec)?;
                vec![CheckRow {
                    check: format!("charge(t={time})"),
                    value: q,
                    reference: *reference,
                    tolerance: *tolerance,
                    pass: (q - reference).abs() < *tolerance,
                }]
            }
            CheckConfig::Oracle { time, tolerance } => {
                let t = time.unwrap_or_else(|| self.mid_time());
                let chain = spatial_box(&self.domain, t)?;
                let a = collapse_integrate(&self.current, &chain, spec)?.value;
                let b = mollified_integrate(&self.current, &chain, spec)?;
                vec![CheckRow {
                    check: format!("oracle_gap(t={t})"),
                    value: (a - b).abs(),
                    reference: 0.0,
                    tolerance: *tolerance,
                    pass: (a - b).abs() < *tolerance,
                }]
            }
            CheckConfig::Residual { expect, tolerance } => {
                let family = standard_test_family(&self.domain, seed)?;
                let r = current_residual(&self.current, &family, spec)?;
                vec![expectation_row("current_residual", r, *expect, *tolerance, 1e-6)]
            }
            CheckConfig::Mixed { expect, tolerance } => {
                let bulk = self
                    .bulk
                    .as_ref()
                    .ok_or_else(|| Error::config("checks.mixed", "scenario has no bulk current"))?;
                let family = aligned_test_family(&self.domain, seed)?;
                let r = mixed_residual(&self.current, bulk, &family, spec)?;
                vec![expectation_row("mixed_residual", r, *expect, *tolerance, 1e-5)]
            }
            CheckConfig::Law { expect, tolerance } => {
                let r = self.law_residual()?;
                vec![expectation_row("law_residual", r, *expect, *tolerance, 1e-10)]
            }
            CheckConfig::Stokes { tolerance } => {
                let m4 = domain_box(&self.domain)?;
                let r = stokes_check(&self.current, &m4, &m4.boundary()?, spec)?;
                vec![
                    CheckRow {
                        check: "stokes_gap".into(),
                        value: r.gap,
                        reference: 0.0,
                        tolerance: *tolerance,
                        pass: r.gap < *tolerance,
                    },
                    CheckRow {
                        check: "stokes_lhs".into(),
                        value: r.lhs,
                        reference: r.rhs,
                        tolerance: *tolerance,
                        pass: r.gap < *tolerance,
                    },
                ]
            }
            CheckConfig::Flux {
                axis,
                at,
                reference,
                tolerance,
            } => {
                let chain = flux_chain(&self.domain, axis.index(), *at)?;
                let f = total_charge(&self.current, &chain, spec)?;
                vec![CheckRow {
                    check: format!("flux({:?}={at})", axis).to_lowercase(),
                    value: f,
                    reference: *reference,
                    tolerance: *tolerance,
                    pass: (f - reference).abs() < *tolerance,
                }]
            }
            CheckConfig::Invariance {
                maps,
                time,
                tolerance,
            } => {
                let t = time.unwrap_or_else(|| self.mid_time());
                let chain = spatial_box(&self.domain, t)?;
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut worst = 0.0f64;
                for _ in 0..*maps {
                    let m = random_distortion(&self.domain, &mut rng)?;
                    let pulled = total_charge(&self.current.pullback(&m)?, &chain, spec)?;
                    let pushed = total_charge(&self.current, &chain.compose(&m)?, spec)?;
                    worst = worst.max((pulled - pushed).abs());
                }
                vec![CheckRow {
                    check: format!("invariance(maps={maps})"),
                    value: worst,
                    reference: 0.0,
                    tolerance: *tolerance,
                    pass: worst < *tolerance,
                }]
            }
        })
    }
}

fn check_name(check: &CheckConfig) -> &'static str {
    match check {
        CheckConfig::Charge { .. } => "charge",
        CheckConfig::Oracle { .. } => "oracle",
        CheckConfig::Residual { .. } => "residual",
        CheckConfig::Mixed { .. } => "mixed",
        CheckConfig::Law { .. } => "law",
        CheckConfig::Stokes { .. } => "stokes",
        CheckConfig::Flux { .. } => "flux",
        CheckConfig::Invariance { .. } => "invariance",
    }
}

/// Runs every check in order. The same scenario and seed give identical reports.
pub fn run_scenario(s: &Scenario, seed: u64) -> Result<Report> {
    let mut rows = Vec::new();
    for (i, check) in s.config.checks.iter().enumerate() {
        let produced = s
            .run_check(check, seed)
            .map_err(|e| e.in_check(&format!("{}#{i}", check_name(check))))?;
        rows.extend(produced);
    }
    Ok(Report {
        scenario: s.config.name.clone(),
        seed,
        spec: s.spec,
        rows,
    })
}

/// Built-in scenarios as `(name, TOML config)`.
pub const BUILTINS: &[(&str, &str)] = &[
    ("charged-plane", include_str!("builtins/charged-plane.toml")),
    ("charged-plane-conserving", include_str!("builtins/charged-plane-conserving.toml")),
    ("charged-plane-violated", include_str!("builtins/charged-plane-violated.toml")),
    ("tilted-moving-plane", include_str!("builtins/tilted-moving-plane.toml")),
    ("straight-string", include_str!("builtins/straight-string.toml")),
    (
        "string-with-longitudinal-current",
        include_str!("builtins/string-with-longitudinal-current.toml"),
    ),
    ("string-violated", include_str!("builtins/string-violated.toml")),
    ("uniform-moving-point", include_str!("builtins/uniform-moving-point.toml")),
    ("static-point", include_str!("builtins/static-point.toml")),
    ("point-violated", include_str!("builtins/point-violated.toml")),
    ("absorbing-surface", include_str!("builtins/absorbing-surface.toml")),
    ("absorbing-surface-violated", include_str!("builtins/absorbing-surface-violated.toml")),
    ("dissolving-point", include_str!("builtins/dissolving-point.toml")),
];

pub fn builtin_names() -> Vec<&'static str> {
    BUILTINS.iter().map(|b| b.0).collect()
}

pub fn builtin(name: &str) -> Option<ScenarioConfig> {
    BUILTINS
        .iter()
        .find(|b| b.0 == name)
        .map(|b| parse_config(b.1).expect("built-in configs parse"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_parse_and_match_their_names() {
        for (name, text) in BUILTINS {
            let c = parse_config(text).unwrap();
            assert_eq!(&c.name, name);
            assert!(!c.checks.is_empty());
        }
    }

    #[test]
    fn config_errors_name_the_field() {
        let err = parse_config("name = \"a\"\nkind = \"blob\"\n").unwrap_err();
        assert!(matches!(err, Error::Config { .. }));
        let err = parse_config("name = \"a\"\nkind = \"surface\"\nbogus = 1\n").unwrap_err();
        assert!(err.to_string().contains("bogus"), "{err}");
        let c = parse_config("name = \"a\"\nkind = \"surface\"\n[densities]\nsigma = \"1\"\n").unwrap();
        let err = build_scenario(&c).unwrap_err();
        assert!(err.to_string().contains("level_sets.phi"), "{err}");
        let c = parse_config(
            "name = \"a\"\nkind = \"surface\"\n[level_sets]\nphi = \"z\"\n[densities]\nsigma = \"z\"\n",
        )
        .unwrap();
        let err = build_scenario(&c).unwrap_err();
        assert!(err.to_string().contains("densities.sigma"), "{err}");
        let c = parse_config(
            "name = \"a\"\nkind = \"surface\"\n[level_sets]\nphi = \"z +\"\n",
        )
        .unwrap();
        assert!(matches!(build_scenario(&c), Err(Error::Parse { .. })));
    }

    #[test]
    fn map_syntax() {
        let r = Region::cube(1.0);
        let m = parse_map("t; x + 0.1*y^2; y\nz # last", &r).unwrap();
        assert_eq!(m.apply(&[0.0, 1.0, 2.0, 3.0]).unwrap(), [0.0, 1.4, 2.0, 3.0]);
        assert!(parse_map("t; x; y", &r).is_err());
        assert!(parse_map("t; x; y; 0*z", &r).is_err());
        assert!(matches!(parse_map("t; x; y; z)", &r), Err(Error::Parse { .. })));
    }

    #[test]
    fn charged_plane_passes() {
        let s = build_scenario(&builtin("charged-plane").unwrap()).unwrap();
        let r = run_scenario(&s, 1).unwrap();
        assert!(r.passed(), "{}", r.table());
    }
}
