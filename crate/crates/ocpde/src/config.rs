//! Run configuration: a flat key-value text format with bracketed section
//! headers. No nesting, no quoting; values are whitespace-separated tokens.
//!
//! ```text
//! [domain]
//! lower = 0
//! upper = 1
//! cells = 64
//!
//! [pde]
//! m = 1
//! k = inf
//! K = 1
//! F1 = (D[1]u1)^2
//! f1 = 1
//!
//! [solver]
//! schedule = 0.1 0.01 0.001
//! degree = 1
//! box = -10 10
//! seed = 1
//!
//! [output]
//! out_dir = runs/eikonal
//! ```
//!
//! `schedule = harmonic N` expands to 1, 1/2, ..., 1/N. `box` gives one
//! (lo, hi) pair broadcast to every jet slot; `box_lo` / `box_hi` set the
//! slots individually. Unset solver keys fall back to the module defaults,
//! which the report echoes.

use std::collections::BTreeMap;

use crate::expr::JetSpec;
use crate::grid::Grid;
use crate::nlsc::Smoothness;
use crate::pde::PdeSystem;
use crate::solver::{EpsSchedule, SolverParams};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("[{section}] {key}: {message}")]
    BadValue {
        section: String,
        key: String,
        message: String,
    },
    #[error("missing required key [{section}] {key}")]
    Missing { section: String, key: String },
    #[error("unknown key [{section}] {key}")]
    Unknown { section: String, key: String },
    #[error("grid: {0}")]
    Grid(#[from] crate::grid::GridError),
    #[error("pde: {0}")]
    Pde(#[from] crate::pde::PdeError),
    #[error("solver: {0}")]
    Solver(#[from] crate::solver::SolverError),
}

/// A fully validated run: grid, system, schedule, solver knobs, output.
#[derive(Debug)]
pub struct RunConfig {
    pub grid: Grid,
    pub system: PdeSystem,
    pub schedule: EpsSchedule,
    pub params: SolverParams,
    pub out_dir: Option<String>,
    /// Write per-epsilon NLSCF dumps alongside the report.
    pub write_dumps: bool,
}

type Sections = BTreeMap<String, BTreeMap<String, (String, usize)>>;

/// First pass: raw sections and keys, with line numbers kept for messages.
fn scan_sections(text: &str) -> Result<Sections, ConfigError> {
    let mut sections: Sections = BTreeMap::new();
    let mut current: Option<String> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let t = raw.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        if let Some(name) = t.strip_prefix('[') {
            let Some(name) = name.strip_suffix(']') else {
                return Err(ConfigError::Syntax {
                    line,
                    message: "unterminated section header".into(),
                });
            };
            let name = name.trim().to_string();
            current = Some(name.clone());
            sections.entry(name).or_default();
            continue;
        }
        let Some((key, value)) = t.split_once('=') else {
            return Err(ConfigError::Syntax {
                line,
                message: format!("expected `key = value`, got `{t}`"),
            });
        };
        let Some(section) = current.clone() else {
            return Err(ConfigError::Syntax {
                line,
                message: "key appears before any [section] header".into(),
            });
        };
        let key = key.trim().to_string();
        let prev = sections
            .get_mut(&section)
            .expect("section inserted above")
            .insert(key.clone(), (value.trim().to_string(), line));
        if prev.is_some() {
            return Err(ConfigError::Syntax {
                line,
                message: format!("duplicate key `{key}` in [{section}]"),
            });
        }
    }
    Ok(sections)
}

struct Section<'a> {
    name: &'a str,
    keys: BTreeMap<String, (String, usize)>,
}

impl<'a> Section<'a> {
    fn take(&mut self, key: &str) -> Option<String> {
        self.keys.remove(key).map(|(v, _)| v)
    }

    fn require(&mut self, key: &str) -> Result<String, ConfigError> {
        self.take(key).ok_or_else(|| ConfigError::Missing {
            section: self.name.to_string(),
            key: key.to_string(),
        })
    }

    fn bad(&self, key: &str, message: impl Into<String>) -> ConfigError {
        ConfigError::BadValue {
            section: self.name.to_string(),
            key: key.to_string(),
            message: message.into(),
        }
    }

    fn parse_list<T: std::str::FromStr>(&self, key: &str, value: &str) -> Result<Vec<T>, ConfigError> {
        value
            .split_whitespace()
            .map(|tok| {
                tok.parse::<T>()
                    .map_err(|_| self.bad(key, format!("cannot parse `{tok}`")))
            })
            .collect()
    }

    fn parse_one<T: std::str::FromStr>(&self, key: &str, value: &str) -> Result<T, ConfigError> {
        value
            .trim()
            .parse::<T>()
            .map_err(|_| self.bad(key, format!("cannot parse `{}`", value.trim())))
    }

    /// Everything must be consumed; leftovers are typos.
    fn finish(self) -> Result<(), ConfigError> {
        if let Some(key) = self.keys.into_keys().next() {
            return Err(ConfigError::Unknown {
                section: self.name.to_string(),
                key,
            });
        }
        Ok(())
    }
}

fn section<'a>(sections: &mut Sections, name: &'a str) -> Section<'a> {
    Section {
        name,
        keys: sections.remove(name).unwrap_or_default(),
    }
}

pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let mut sections = scan_sections(text)?;

    let mut dom = section(&mut sections, "domain");
    let lower: Vec<f64> = {
        let v = dom.require("lower")?;
        dom.parse_list("lower", &v)?
    };
    let upper: Vec<f64> = {
        let v = dom.require("upper")?;
        dom.parse_list("upper", &v)?
    };
    let cells: Vec<usize> = {
        let v = dom.require("cells")?;
        dom.parse_list("cells", &v)?
    };
    dom.finish()?;
    let grid = Grid::new(lower, upper, cells)?;

    let mut pde = section(&mut sections, "pde");
    let m: u32 = {
        let v = pde.require("m")?;
        pde.parse_one("m", &v)?
    };
    let big_k: usize = {
        let v = pde.require("K")?;
        pde.parse_one("K", &v)?
    };
    let smooth = match pde.take("k") {
        None => Smoothness::Infinite,
        Some(v) if v.trim() == "inf" => Smoothness::Infinite,
        Some(v) => Smoothness::Finite(pde.parse_one("k", &v)?),
    };
    let mut operators = Vec::with_capacity(big_k);
    let mut rhs = Vec::with_capacity(big_k);
    for j in 1..=big_k {
        operators.push(pde.require(&format!("F{j}"))?);
        rhs.push(pde.require(&format!("f{j}"))?);
    }
    pde.finish()?;
    let spec = JetSpec::new(grid.dim(), big_k, m);
    let op_refs: Vec<&str> = operators.iter().map(String::as_str).collect();
    let rhs_refs: Vec<&str> = rhs.iter().map(String::as_str).collect();
    let system = PdeSystem::new(spec, &op_refs, &rhs_refs, smooth)?;

    let mut sol = section(&mut sections, "solver");
    let schedule = {
        let v = sol.require("schedule")?;
        let toks: Vec<&str> = v.split_whitespace().collect();
        if toks.first() == Some(&"harmonic") {
            if toks.len() != 2 {
                return Err(sol.bad("schedule", "harmonic takes one count"));
            }
            let n: usize = sol.parse_one("schedule", toks[1])?;
            if n == 0 {
                return Err(sol.bad("schedule", "harmonic count must be positive"));
            }
            EpsSchedule::harmonic(n)
        } else {
            EpsSchedule::new(sol.parse_list("schedule", &v)?)?
        }
    };
    let slots = system.spec().total_len();
    let mut params = SolverParams::for_slots(slots);
    if let Some(v) = sol.take("degree") {
        params.degree = sol.parse_one("degree", &v)?;
    }
    if params.degree < m {
        return Err(sol.bad("degree", format!("degree {} is below the operator order {m}", params.degree)));
    }
    if let Some(v) = sol.take("box") {
        let pair: Vec<f64> = sol.parse_list("box", &v)?;
        if pair.len() != 2 || !(pair[0] < pair[1]) {
            return Err(sol.bad("box", "expected `lo hi` with lo < hi"));
        }
        params.box_lo = vec![pair[0]; slots];
        params.box_hi = vec![pair[1]; slots];
    }
    if let Some(v) = sol.take("box_lo") {
        params.box_lo = sol.parse_list("box_lo", &v)?;
    }
    if let Some(v) = sol.take("box_hi") {
        params.box_hi = sol.parse_list("box_hi", &v)?;
    }
    if params.box_lo.len() != slots || params.box_hi.len() != slots {
        return Err(sol.bad("box_lo", format!("jet box needs {slots} slots")));
    }
    if let Some(v) = sol.take("samples") {
        params.samples = sol.parse_one("samples", &v)?;
    }
    if let Some(v) = sol.take("seed") {
        params.seed = sol.parse_one("seed", &v)?;
    }
    if let Some(v) = sol.take("density") {
        params.density = sol.parse_one("density", &v)?;
    }
    if let Some(v) = sol.take("verify_factor") {
        params.verify_factor = sol.parse_one("verify_factor", &v)?;
    }
    if let Some(v) = sol.take("max_refine") {
        params.max_refine = sol.parse_one("max_refine", &v)?;
    }
    sol.finish()?;

    let mut out = section(&mut sections, "output");
    let out_dir = out.take("out_dir");
    let write_dumps = match out.take("dumps") {
        None => true,
        Some(v) => match v.trim() {
            "true" => true,
            "false" => false,
            other => return Err(out.bad("dumps", format!("expected true or false, got `{other}`"))),
        },
    };
    out.finish()?;

    if let Some(name) = sections.into_keys().next() {
        return Err(ConfigError::Syntax {
            line: 0,
            message: format!("unknown section [{name}]"),
        });
    }

    Ok(RunConfig {
        grid,
        system,
        schedule,
        params,
        out_dir,
        write_dumps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const EIKONAL: &str = "\
[domain]
lower = 0
upper = 1
cells = 64

[pde]
m = 1
K = 1
F1 = (D[1]u1)^2
f1 = 1

[solver]
schedule = 0.1 0.01 0.001
degree = 1
seed = 1

[output]
dumps = false
";

    #[test]
    fn eikonal_config_round_trips_the_important_fields() {
        let cfg = parse_config(EIKONAL).unwrap();
        assert_eq!(cfg.grid.cells_per_axis(), &[64]);
        assert_eq!(cfg.grid.lower(), &[0.0]);
        assert_eq!(cfg.schedule.values(), &[0.1, 0.01, 0.001]);
        assert_eq!(cfg.params.seed, 1);
        assert_eq!(cfg.params.degree, 1);
        assert!(!cfg.write_dumps);
        assert!(cfg.out_dir.is_none());
        // defaults filled in
        assert_eq!(cfg.params.density, 3);
        assert_eq!(cfg.params.box_lo, vec![-10.0, -10.0]);
    }

    #[test]
    fn harmonic_schedule_expands() {
        let text = EIKONAL.replace("schedule = 0.1 0.01 0.001", "schedule = harmonic 4");
        let cfg = parse_config(&text).unwrap();
        assert_eq!(cfg.schedule.values(), &[1.0, 0.5, 1.0 / 3.0, 0.25]);
    }

    #[test]
    fn missing_required_keys_are_named() {
        let text = EIKONAL.replace("cells = 64\n", "");
        let err = parse_config(&text).unwrap_err();
        assert!(err.to_string().contains("[domain] cells"), "{err}");

        let text = EIKONAL.replace("f1 = 1\n", "");
        let err = parse_config(&text).unwrap_err();
        assert!(err.to_string().contains("[pde] f1"), "{err}");
    }

    #[test]
    fn unknown_keys_and_sections_are_rejected() {
        let text = EIKONAL.replace("seed = 1", "sede = 1");
        let err = parse_config(&text).unwrap_err();
        assert!(err.to_string().contains("unknown key [solver] sede"), "{err}");

        let text = format!("{EIKONAL}\n[plot]\ncolor = red\n");
        let err = parse_config(&text).unwrap_err();
        assert!(err.to_string().contains("unknown section [plot]"), "{err}");
    }

    #[test]
    fn syntax_errors_carry_line_numbers() {
        let err = parse_config("[domain\nlower = 0\n").unwrap_err();
        assert!(matches!(err, ConfigError::Syntax { line: 1, .. }), "{err}");

        let err = parse_config("lower = 0\n").unwrap_err();
        assert!(matches!(err, ConfigError::Syntax { line: 1, .. }), "{err}");

        let err = parse_config("[domain]\nlower 0\n").unwrap_err();
        assert!(matches!(err, ConfigError::Syntax { line: 2, .. }), "{err}");

        let err = parse_config("[domain]\nlower = 0\nlower = 1\n").unwrap_err();
        assert!(matches!(err, ConfigError::Syntax { line: 3, .. }), "{err}");
    }

    #[test]
    fn schedule_and_degree_invariants_enforced() {
        let text = EIKONAL.replace("schedule = 0.1 0.01 0.001", "schedule = 0.1 0.1");
        assert!(parse_config(&text).is_err());

        let text = EIKONAL.replace("degree = 1", "degree = 0");
        let err = parse_config(&text).unwrap_err();
        assert!(err.to_string().contains("below the operator order"), "{err}");
    }

    #[test]
    fn bad_expression_is_a_config_error() {
        let text = EIKONAL.replace("F1 = (D[1]u1)^2", "F1 = (D[3]u1)^2");
        let err = parse_config(&text).unwrap_err();
        assert!(matches!(err, ConfigError::Pde(_)), "{err}");
    }

    #[test]
    fn per_slot_boxes_must_match_jet_length() {
        let text = EIKONAL.replace("seed = 1", "seed = 1\nbox_lo = -1\nbox_hi = 1");
        let err = parse_config(&text).unwrap_err();
        assert!(err.to_string().contains("slots"), "{err}");

        let text = EIKONAL.replace("seed = 1", "seed = 1\nbox = -2 2");
        let cfg = parse_config(&text).unwrap();
        assert_eq!(cfg.params.box_lo, vec![-2.0, -2.0]);
        assert_eq!(cfg.params.box_hi, vec![2.0, 2.0]);
    }
}
