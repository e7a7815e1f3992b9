//! Run configuration: a line-oriented `key = value` format with `[section]` headers.
//!
//! ```text
//! [run]
//! mode = verify                      # scatter | bounds | optimize | verify
//!
//! [potential]
//! kind = square_barrier              # square_barrier | gaussian | poschl_teller | free | tabulated
//! v0 = 1
//! width = 1
//!
//! [energies]
//! values = 0.5, 2, 5                 # or: range = 0.5:5:10
//!
//! [gauges]
//! list = constant, wkb, special_delta@constant, antiphase@wkb
//! ```
//!
//! Unknown sections or keys are parse errors; values that parse but make no sense are
//! validation errors naming the offending field as `section.key`.

use crate::error::{Error, Result};
use crate::gauges::{
    gauge_antiphase, gauge_blend, gauge_constant, gauge_special_delta, gauge_wkb, gauge_with_chi, GaugeTriple,
};
use crate::potentials::{DomainGrid, EnergySpec, PotentialProfile, WaveNumberField, DEFAULT_TAIL_TOLERANCE};
use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Scatter,
    Bounds,
    Optimize,
    Verify,
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "scatter" => Ok(Mode::Scatter),
            "bounds" => Ok(Mode::Bounds),
            "optimize" => Ok(Mode::Optimize),
            "verify" => Ok(Mode::Verify),
            other => Err(format!("unknown mode `{other}` (expected scatter, bounds, optimize or verify)")),
        }
    }
}

/// A gauge described in config text. Modifiers wrap a base with `@`; a bare modifier
/// applies to `constant`.
#[derive(Debug, Clone, PartialEq)]
pub enum GaugeSpec {
    /// `constant` or `constant(k_ref)`; the default `k_ref` is the left asymptotic wavenumber.
    Constant(Option<f64>),
    Wkb,
    Blend(f64),
    SpecialDelta(Box<GaugeSpec>),
    Antiphase(Box<GaugeSpec>),
    Chi(f64, Box<GaugeSpec>),
}

impl GaugeSpec {
    pub fn build(&self, w: &WaveNumberField, grid: &DomainGrid) -> Result<GaugeTriple> {
        let g = match self {
            GaugeSpec::Constant(k) => gauge_constant(k.unwrap_or(w.k_left))?,
            GaugeSpec::Wkb => gauge_wkb(w, grid)?,
            GaugeSpec::Blend(s) => gauge_blend(w, grid, w.k_left, *s)?,
            GaugeSpec::SpecialDelta(base) => gauge_special_delta(&base.build(w, grid)?, w, grid)?,
            GaugeSpec::Antiphase(base) => gauge_antiphase(&base.build(w, grid)?),
            GaugeSpec::Chi(c, base) => gauge_with_chi(&base.build(w, grid)?, *c),
        };
        Ok(g.with_id(self.to_string()))
    }
}

impl fmt::Display for GaugeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GaugeSpec::Constant(None) => write!(f, "constant"),
            GaugeSpec::Constant(Some(k)) => write!(f, "constant({k})"),
            GaugeSpec::Wkb => write!(f, "wkb"),
            GaugeSpec::Blend(s) => write!(f, "blend({s})"),
            GaugeSpec::SpecialDelta(b) => write!(f, "special_delta@{b}"),
            GaugeSpec::Antiphase(b) => write!(f, "antiphase@{b}"),
            GaugeSpec::Chi(c, b) => write!(f, "chi({c})@{b}"),
        }
    }
}

/// `name` or `name(number)`.
fn call(text: &str) -> std::result::Result<(&str, Option<f64>), String> {
    match text.split_once('(') {
        None => Ok((text, None)),
        Some((name, rest)) => {
            let arg = rest.strip_suffix(')').ok_or_else(|| format!("missing `)` in `{text}`"))?;
            let v = arg.trim().parse::<f64>().map_err(|e| format!("`{arg}`: {e}"))?;
            Ok((name.trim(), Some(v)))
        }
    }
}

impl FromStr for GaugeSpec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let s = s.trim();
        let (head, base) = match s.split_once('@') {
            Some((h, rest)) => (h.trim(), Some(rest.parse::<GaugeSpec>()?)),
            None => (s, None),
        };
        let (name, arg) = call(head)?;
        let wrap = |b: Option<GaugeSpec>| Box::new(b.unwrap_or(GaugeSpec::Constant(None)));
        let need_base = |spec: GaugeSpec| {
            if base.is_some() {
                Err(format!("`{name}` is not a modifier and cannot take `@`"))
            } else {
                Ok(spec)
            }
        };
        match (name, arg) {
            ("constant", k) => need_base(GaugeSpec::Constant(k)),
            ("wkb", None) => need_base(GaugeSpec::Wkb),
            ("blend", Some(v)) => need_base(GaugeSpec::Blend(v)),
            ("special_delta", None) => Ok(GaugeSpec::SpecialDelta(wrap(base))),
            ("antiphase", None) => Ok(GaugeSpec::Antiphase(wrap(base))),
            ("chi", Some(c)) => Ok(GaugeSpec::Chi(c, wrap(base))),
            _ => Err(format!("unknown gauge `{s}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub ode_tol: f64,
    pub quad_tol: f64,
    pub tail_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { ode_tol: 1e-12, quad_tol: 1e-10, tail_tol: DEFAULT_TAIL_TOLERANCE }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Outputs {
    pub csv_path: Option<PathBuf>,
    pub plot_data_path: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerSettings {
    pub scan_points: usize,
    pub s_tol: f64,
}

impl Default for OptimizerSettings {
    fn default() -> Self {
        Self { scan_points: 33, s_tol: 1e-6 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub mode: Mode,
    pub potential: PotentialProfile,
    pub hbar: f64,
    pub mass: f64,
    /// Sorted ascending, no duplicates.
    pub energies: Vec<f64>,
    pub gauges: Vec<GaugeSpec>,
    pub tolerances: Tolerances,
    pub outputs: Outputs,
    pub optimizer: OptimizerSettings,
}

impl RunConfig {
    pub fn energy_spec(&self, energy: f64) -> EnergySpec {
        EnergySpec { energy, hbar: self.hbar, mass: self.mass }
    }
}

const SECTIONS: &[(&str, &[&str])] = &[
    ("run", &["mode"]),
    ("potential", &["kind", "v0", "width", "center", "sigma", "ell", "scale", "file"]),
    ("units", &["hbar", "mass"]),
    ("energies", &["values", "range"]),
    ("gauges", &["list"]),
    ("tolerances", &["ode_tol", "quad_tol", "tail_tol"]),
    ("outputs", &["csv_path", "plot_data_path"]),
    ("optimizer", &["scan_points", "s_tol"]),
];

/// `section.key -> (value, line)`.
type Entries = BTreeMap<String, (String, usize)>;

fn tokenize(text: &str) -> Result<Entries> {
    let mut entries = Entries::new();
    let mut section: Option<&'static (&'static str, &'static [&'static str])> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let parse_err = |message: String| Error::Parse { line: line_no, message };
        if let Some(name) = line.strip_prefix('[') {
            let name = name.strip_suffix(']').ok_or_else(|| parse_err(format!("malformed header `{line}`")))?;
            let name = name.trim();
            section = Some(
                SECTIONS
                    .iter()
                    .find(|(s, _)| *s == name)
                    .ok_or_else(|| parse_err(format!("unknown section `[{name}]`")))?,
            );
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| parse_err(format!("expected `key = value`, got `{line}`")))?;
        let key = key.trim();
        let (sec, keys) = section.ok_or_else(|| parse_err(format!("`{key}` appears before any section header")))?;
        if !keys.contains(&key) {
            return Err(parse_err(format!("unknown key `{key}` in [{sec}]")));
        }
        let full = format!("{sec}.{key}");
        if entries.contains_key(&full) {
            return Err(parse_err(format!("duplicate key `{full}`")));
        }
        entries.insert(full, (value.trim().to_string(), line_no));
    }
    Ok(entries)
}

fn invalid(field: &str, message: impl Into<String>) -> Error {
    Error::Validation { field: field.to_string(), message: message.into() }
}

struct Reader {
    entries: Entries,
}

impl Reader {
    fn text(&mut self, field: &str) -> Option<String> {
        self.entries.remove(field).map(|(v, _)| v)
    }

    fn number(&mut self, field: &str) -> Result<Option<f64>> {
        match self.text(field) {
            None => Ok(None),
            Some(v) => {
                let x = v.parse::<f64>().map_err(|e| invalid(field, format!("`{v}`: {e}")))?;
                if !x.is_finite() {
                    return Err(invalid(field, "must be finite"));
                }
                Ok(Some(x))
            }
        }
    }

    fn positive(&mut self, field: &str, default: f64) -> Result<f64> {
        let v = self.number(field)?.unwrap_or(default);
        if v > 0.0 {
            Ok(v)
        } else {
            Err(invalid(field, format!("must be positive, got {v}")))
        }
    }

    fn required(&mut self, field: &str) -> Result<f64> {
        self.number(field)?.ok_or_else(|| invalid(field, "required for this potential kind"))
    }
}

fn parse_potential(r: &mut Reader, base_dir: &Path) -> Result<PotentialProfile> {
    let kind = r.text("potential.kind").ok_or_else(|| invalid("potential.kind", "missing"))?;
    let rewrap = |field: &'static str| move |e: Error| invalid(field, e.to_string());
    let p = match kind.as_str() {
        "square_barrier" => {
            let v0 = r.required("potential.v0")?;
            let width = r.required("potential.width")?;
            let center = r.number("potential.center")?.unwrap_or(0.0);
            PotentialProfile::square_barrier(v0, width, center).map_err(rewrap("potential.width"))?
        }
        "gaussian" => {
            let v0 = r.required("potential.v0")?;
            let sigma = r.required("potential.sigma")?;
            let center = r.number("potential.center")?.unwrap_or(0.0);
            PotentialProfile::gaussian(v0, sigma, center).map_err(rewrap("potential.sigma"))?
        }
        "poschl_teller" => {
            let ell = r.required("potential.ell")?;
            if ell < 1.0 || ell.fract() != 0.0 || ell > u32::MAX as f64 {
                return Err(invalid("potential.ell", format!("must be a positive integer, got {ell}")));
            }
            let scale = r.number("potential.scale")?.unwrap_or(1.0);
            PotentialProfile::poschl_teller(ell as u32, scale).map_err(rewrap("potential.scale"))?
        }
        "free" => PotentialProfile::free(),
        "tabulated" => {
            let file = r.text("potential.file").ok_or_else(|| invalid("potential.file", "required for tabulated"))?;
            let path = base_dir.join(file);
            PotentialProfile::from_table_file(&path).map_err(rewrap("potential.file"))?
        }
        other => return Err(invalid("potential.kind", format!("unknown kind `{other}`"))),
    };
    if let Some(field) = r.entries.keys().find(|k| k.starts_with("potential.")).cloned() {
        return Err(invalid(&field, format!("not used by `{kind}` potentials")));
    }
    Ok(p)
}

fn parse_energies(r: &mut Reader) -> Result<Vec<f64>> {
    let values = r.text("energies.values");
    let range = r.text("energies.range");
    let mut energies = match (values, range) {
        (Some(_), Some(_)) => return Err(invalid("energies", "give either `values` or `range`, not both")),
        (None, None) => return Err(invalid("energies", "at least one energy is required")),
        (Some(v), None) => v
            .split(',')
            .map(|s| {
                let s = s.trim();
                s.parse::<f64>().map_err(|e| invalid("energies.values", format!("`{s}`: {e}")))
            })
            .collect::<Result<Vec<_>>>()?,
        (None, Some(v)) => {
            let parts: Vec<&str> = v.split(':').map(str::trim).collect();
            if parts.len() != 3 {
                return Err(invalid("energies.range", "expected start:stop:count"));
            }
            let num = |s: &str| s.parse::<f64>().map_err(|e| invalid("energies.range", format!("`{s}`: {e}")));
            let (start, stop) = (num(parts[0])?, num(parts[1])?);
            let count = parts[2]
                .parse::<usize>()
                .map_err(|e| invalid("energies.range", format!("count `{}`: {e}", parts[2])))?;
            match count {
                0 => return Err(invalid("energies.range", "count must be at least 1")),
                1 => vec![start],
                n => (0..n).map(|i| start + (stop - start) * i as f64 / (n - 1) as f64).collect(),
            }
        }
    };
    if let Some(e) = energies.iter().find(|e| !e.is_finite()) {
        return Err(invalid("energies", format!("non-finite energy {e}")));
    }
    energies.sort_by(f64::total_cmp);
    energies.dedup();
    Ok(energies)
}

/// Parses a configuration; relative table paths resolve against `base_dir`.
pub fn parse_config_in(text: &str, base_dir: &Path) -> Result<RunConfig> {
    let mut r = Reader { entries: tokenize(text)? };
    let mode = match r.text("run.mode") {
        None => Mode::Scatter,
        Some(m) => m.parse().map_err(|e: String| invalid("run.mode", e))?,
    };
    let potential = parse_potential(&mut r, base_dir)?;
    let hbar = r.positive("units.hbar", 1.0)?;
    let mass = r.positive("units.mass", 0.5)?;
    let energies = parse_energies(&mut r)?;
    let gauges = match r.text("gauges.list") {
        None => vec![GaugeSpec::Constant(None)],
        Some(list) => list
            .split(',')
            .map(|s| s.parse::<GaugeSpec>().map_err(|e| invalid("gauges.list", e)))
            .collect::<Result<Vec<_>>>()?,
    };
    if gauges.is_empty() {
        return Err(invalid("gauges.list", "at least one gauge is required"));
    }
    let d = Tolerances::default();
    let tolerances = Tolerances {
        ode_tol: r.positive("tolerances.ode_tol", d.ode_tol)?,
        quad_tol: r.positive("tolerances.quad_tol", d.quad_tol)?,
        tail_tol: r.positive("tolerances.tail_tol", d.tail_tol)?,
    };
    let outputs = Outputs {
        csv_path: r.text("outputs.csv_path").map(|p| base_dir.join(p)),
        plot_data_path: r.text("outputs.plot_data_path").map(|p| base_dir.join(p)),
    };
    let scan_points = match r.number("optimizer.scan_points")? {
        None => OptimizerSettings::default().scan_points,
        Some(n) if n >= 2.0 && n.fract() == 0.0 => n as usize,
        Some(n) => return Err(invalid("optimizer.scan_points", format!("must be an integer >= 2, got {n}"))),
    };
    let optimizer = OptimizerSettings {
        scan_points,
        s_tol: r.positive("optimizer.s_tol", OptimizerSettings::default().s_tol)?,
    };
    Ok(RunConfig { mode, potential, hbar, mass, energies, gauges, tolerances, outputs, optimizer })
}

pub fn parse_config(text: &str) -> Result<RunConfig> {
    parse_config_in(text, Path::new("."))
}

pub fn read_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)?;
    parse_config_in(&text, path.parent().unwrap_or(Path::new(".")))
}
