//! Scenario catalog: named filter questions with expected answers.
//!
//! A catalog is a text file, one scenario per line:
//!
//! ```text
//! name | base-expression | predicate | expected
//! ```
//!
//! Blank lines and lines starting with `#` are skipped. The base expression
//! grammar mirrors the filter kinds:
//!
//! ```text
//! base  := neighborhood(SYM [, trace])
//!        | sequence_tail(FAMILY)
//!        | principal(SET)
//!        | meet(base, base) | product(base, base)
//!        | image(base, MAP) | trace_q(base)
//!        | completion_point(SYM) | plane_completion_point(SYM, SYM)
//! FAMILY := 1/n | (-1)^n | approx_sqrt2 | const(SYM) | (FAMILY, FAMILY)
//! SET   := { SYM, ... } | { (SYM, SYM), ... }
//!        | interval(SYM, SYM [, rational]) | tail_set(FAMILY)
//! MAP   := proj1 | proj2 | include_q | diag
//! pred  := converges_completed_line(SYM)
//!        | converges_completed_plane(SYM, SYM)
//!        | converges_product_of_lines(SYM, SYM)
//!        | cauchy_metric | refines(base) | adherence_contains(SYM [, SYM])
//! ```
//!
//! `SYM` literals are the exact constants of the symbolic layer: rationals,
//! `sqrt2`, `pi`, `e` and rational multiples like `sqrt2/2`. Every verdict
//! is computed exactly; a scenario fails only when the exact answer differs
//! from the expected column.

use std::fmt::Write as _;

use crate::lab::filter::{
    completion_point_base, converges_in_completed_line, converges_in_completed_plane,
    converges_in_product_of_completed_lines, filter_refines, is_cauchy_metric, FilterBase,
    LabError, MapKind,
};
use crate::lab::set::{Density, Interval, Range, SeqFamily, SeqTail, TaggedSet, TaggedSet1, TaggedSet2};
use crate::lab::sym::{parse_sym, SymReal};

/// The catalog shipped with the binary: the two completion counterexamples
/// plus sanity rows exercising every base kind and predicate.
pub const DEFAULT_CATALOG: &str = "\
# Convergence in the completed rational line.
full_neighborhood_misses_completion | neighborhood(sqrt2) | converges_completed_line(sqrt2) | false
completion_base_reflexive | completion_point(sqrt2) | converges_completed_line(sqrt2) | true
approximants_with_point_converge | meet(sequence_tail(approx_sqrt2), principal({sqrt2})) | converges_completed_line(sqrt2) | true
traced_neighborhood_converges | neighborhood(sqrt2, trace) | converges_completed_line(sqrt2) | true

# The pair sequence (1/n, pi): the product of two completed lines sees a
# limit, the completed plane does not.
pair_converges_in_product | sequence_tail((1/n, const(pi))) | converges_product_of_lines(0, pi) | true
pair_fails_in_completed_plane | sequence_tail((1/n, const(pi))) | converges_completed_plane(0, pi) | false

# Sanity: convergence predicates.
principal_pair_converges_in_product | principal({(0, 0)}) | converges_product_of_lines(0, 0) | true
principal_pair_converges_in_plane | principal({(0, pi)}) | converges_completed_plane(0, pi) | true
alternating_projection_blocks_product | sequence_tail((1/n, (-1)^n)) | converges_product_of_lines(0, 1) | false
rational_pair_converges_in_plane | sequence_tail((1/n, 1/n)) | converges_completed_plane(0, 0) | true
diagonal_tail_converges_in_plane | image(sequence_tail(1/n), diag) | converges_completed_plane(0, 0) | true

# Sanity: refinement.
tail_refines_traced_neighborhood | sequence_tail(1/n) | refines(neighborhood(0, trace)) | true
point_filter_refines_neighborhoods | principal({0}) | refines(neighborhood(0)) | true
full_interval_never_fits_trace | neighborhood(0) | refines(completion_point(0)) | false
projection_recovers_line_base | image(sequence_tail((1/n, const(pi))), proj1) | refines(neighborhood(0, trace)) | true

# Sanity: metric Cauchy property.
traced_sqrt2_neighborhood_cauchy | neighborhood(sqrt2, trace) | cauchy_metric | true
principal_interval_not_cauchy | principal(interval(0, 1)) | cauchy_metric | false
product_of_cauchy_is_cauchy | product(neighborhood(0, trace), neighborhood(1, trace)) | cauchy_metric | true
alternating_tail_not_cauchy | sequence_tail((-1)^n) | cauchy_metric | false
pair_tail_cauchy_in_max_metric | sequence_tail((1/n, const(pi))) | cauchy_metric | true
trace_of_full_neighborhood_cauchy | trace_q(neighborhood(sqrt2)) | cauchy_metric | true

# Sanity: adherence.
rational_interval_closure_reaches_sqrt2_half | principal(interval(0, 1, rational)) | adherence_contains(sqrt2/2) | true
reciprocal_values_accumulate_at_zero | principal(tail_set(1/n)) | adherence_contains(0) | true
closure_does_not_reach_outside | principal(interval(0, 1)) | adherence_contains(2) | false
";

#[derive(Debug, Clone, thiserror::Error)]
#[error("catalog line {line}: {message}")]
pub struct CatalogError {
    pub line: usize,
    pub message: String,
}

/// Predicate column of a scenario.
#[derive(Debug, Clone)]
pub enum Predicate {
    ConvergesCompletedLine(SymReal),
    ConvergesCompletedPlane(SymReal, SymReal),
    ConvergesProductOfLines(SymReal, SymReal),
    CauchyMetric,
    Refines(FilterBase),
    AdherenceContains(Vec<SymReal>),
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub base: FilterBase,
    pub predicate: Predicate,
    pub expected: bool,
}

/// One evaluated row.
#[derive(Debug, Clone)]
pub struct RowOutcome {
    pub name: String,
    pub expected: bool,
    pub got: bool,
}

impl RowOutcome {
    pub fn passed(&self) -> bool {
        self.expected == self.got
    }
}

#[derive(Debug, Clone, Default)]
pub struct CatalogReport {
    pub rows: Vec<RowOutcome>,
}

impl CatalogReport {
    pub fn all_passed(&self) -> bool {
        self.rows.iter().all(RowOutcome::passed)
    }

    /// Fixed-width pass/fail table, one line per scenario.
    pub fn render(&self) -> String {
        let width = self
            .rows
            .iter()
            .map(|r| r.name.len())
            .max()
            .unwrap_or(8)
            .max(8);
        let mut out = String::new();
        let _ = writeln!(out, "{:width$}  expected  got    verdict", "scenario");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{:width$}  {:8}  {:5}  {}",
                r.name,
                r.expected,
                r.got,
                if r.passed() { "pass" } else { "FAIL" }
            );
        }
        let passed = self.rows.iter().filter(|r| r.passed()).count();
        let _ = writeln!(out, "{passed}/{} scenarios passed", self.rows.len());
        out
    }
}

/// Splits `args` of a call at top-level commas (parentheses and braces
/// nest).
fn split_args(s: &str) -> Vec<&str> {
    let mut parts = Vec::new();
    let mut depth = 0usize;
    let mut start = 0usize;
    for (i, c) in s.char_indices() {
        match c {
            '(' | '{' => depth += 1,
            ')' | '}' => depth = depth.saturating_sub(1),
            ',' if depth == 0 => {
                parts.push(s[start..i].trim());
                start = i + 1;
            }
            _ => {}
        }
    }
    let last = s[start..].trim();
    if !last.is_empty() || !parts.is_empty() {
        parts.push(last);
    }
    parts
}

/// Splits `call(...)` into the name and the raw argument text.
fn split_call(s: &str) -> Option<(&str, &str)> {
    let open = s.find('(')?;
    if !s.ends_with(')') {
        return None;
    }
    let name = s[..open].trim();
    let args = &s[open + 1..s.len() - 1];
    Some((name, args))
}

fn bad(line: usize, message: impl Into<String>) -> CatalogError {
    CatalogError {
        line,
        message: message.into(),
    }
}

fn parse_sym_at(line: usize, text: &str) -> Result<SymReal, CatalogError> {
    parse_sym(text).map_err(|e| bad(line, e.to_string()))
}

fn parse_family(line: usize, text: &str) -> Result<SeqFamily, CatalogError> {
    let t = text.trim();
    match t {
        "1/n" => Ok(SeqFamily::Recip),
        "(-1)^n" => Ok(SeqFamily::AlternatingSign),
        "approx_sqrt2" => Ok(SeqFamily::SqrtTwoApprox),
        _ => {
            if let Some((name, args)) = split_call(t) {
                if name == "const" {
                    return Ok(SeqFamily::Const(parse_sym_at(line, args)?));
                }
            }
            Err(bad(line, format!("unknown sequence family `{t}`")))
        }
    }
}

/// A family argument is either one family or a parenthesized pair.
fn parse_family_arg(line: usize, text: &str) -> Result<(SeqFamily, Option<SeqFamily>), CatalogError> {
    let t = text.trim();
    // A pair looks like (A, B) with two top-level pieces inside; note that
    // (-1)^n also starts with a parenthesis but has no top-level comma.
    if t.starts_with('(') && t.ends_with(')') && t != "(-1)^n" {
        let inner = &t[1..t.len() - 1];
        let parts = split_args(inner);
        if parts.len() == 2 {
            return Ok((
                parse_family(line, parts[0])?,
                Some(parse_family(line, parts[1])?),
            ));
        }
    }
    Ok((parse_family(line, t)?, None))
}

fn parse_set(line: usize, text: &str) -> Result<TaggedSet, CatalogError> {
    let t = text.trim();
    if t.starts_with('{') && t.ends_with('}') {
        let inner = &t[1..t.len() - 1];
        let items = split_args(inner);
        let pairs = items
            .iter()
            .all(|it| it.starts_with('(') && it.ends_with(')'));
        if pairs && !items.is_empty() && !items[0].is_empty() {
            let mut s = TaggedSet2::empty();
            for it in items {
                let coords = split_args(&it[1..it.len() - 1]);
                if coords.len() != 2 {
                    return Err(bad(line, format!("expected a coordinate pair, got `{it}`")));
                }
                s.points.push((
                    parse_sym_at(line, coords[0])?,
                    parse_sym_at(line, coords[1])?,
                ));
            }
            return Ok(TaggedSet::Two(s.canonical()));
        }
        let mut s = TaggedSet1::empty();
        for it in items {
            if it.is_empty() {
                continue;
            }
            s.points.push(parse_sym_at(line, it)?);
        }
        return Ok(TaggedSet::One(s.canonical()));
    }
    let Some((name, args)) = split_call(t) else {
        return Err(bad(line, format!("unknown set expression `{t}`")));
    };
    match name {
        "interval" => {
            let parts = split_args(args);
            let density = match parts.as_slice() {
                [_, _] => Density::Full,
                [_, _, d] if d.trim() == "rational" => Density::RationalOnly,
                _ => {
                    return Err(bad(
                        line,
                        "interval takes (lo, hi) or (lo, hi, rational)",
                    ))
                }
            };
            let lo = parse_sym_at(line, parts[0])?;
            let hi = parse_sym_at(line, parts[1])?;
            Ok(TaggedSet::One(TaggedSet1::interval(Interval {
                range: Range::open(lo, hi),
                density,
            })))
        }
        "tail_set" => {
            let (fam, pair) = parse_family_arg(line, args)?;
            if pair.is_some() {
                return Err(bad(line, "tail_set takes a one-variable family"));
            }
            Ok(TaggedSet::One(TaggedSet1::tail(SeqTail::new(fam, 1))))
        }
        _ => Err(bad(line, format!("unknown set expression `{t}`"))),
    }
}

fn parse_map(line: usize, text: &str) -> Result<MapKind, CatalogError> {
    match text.trim() {
        "proj1" => Ok(MapKind::Proj1),
        "proj2" => Ok(MapKind::Proj2),
        "include_q" => Ok(MapKind::IncludeRationals),
        "diag" => Ok(MapKind::Diagonal),
        other => Err(bad(line, format!("unknown map `{other}`"))),
    }
}

fn lab_err(line: usize, e: LabError) -> CatalogError {
    bad(line, e.to_string())
}

pub fn parse_base(line: usize, text: &str) -> Result<FilterBase, CatalogError> {
    let t = text.trim();
    let Some((name, args)) = split_call(t) else {
        return Err(bad(line, format!("unknown base expression `{t}`")));
    };
    let parts = split_args(args);
    match name {
        "neighborhood" => {
            let trace = match parts.as_slice() {
                [_] => false,
                [_, flag] if flag.trim() == "trace" => true,
                _ => {
                    return Err(bad(
                        line,
                        "neighborhood takes (center) or (center, trace)",
                    ))
                }
            };
            Ok(FilterBase::neighborhood(
                parse_sym_at(line, parts[0])?,
                trace,
            ))
        }
        "sequence_tail" => {
            if parts.len() != 1 {
                return Err(bad(line, "sequence_tail takes one family"));
            }
            let (fx, fy) = parse_family_arg(line, parts[0])?;
            Ok(match fy {
                Some(fy) => FilterBase::sequence_tail2(fx, fy, 1),
                None => FilterBase::sequence_tail(fx, 1),
            })
        }
        "principal" => {
            if parts.len() != 1 {
                return Err(bad(line, "principal takes one set"));
            }
            FilterBase::principal(parse_set(line, parts[0])?).map_err(|e| lab_err(line, e))
        }
        "meet" => {
            if parts.len() != 2 {
                return Err(bad(line, "meet takes two bases"));
            }
            FilterBase::meet(parse_base(line, parts[0])?, parse_base(line, parts[1])?)
                .map_err(|e| lab_err(line, e))
        }
        "product" => {
            if parts.len() != 2 {
                return Err(bad(line, "product takes two bases"));
            }
            FilterBase::product(parse_base(line, parts[0])?, parse_base(line, parts[1])?)
                .map_err(|e| lab_err(line, e))
        }
        "image" => {
            if parts.len() != 2 {
                return Err(bad(line, "image takes a base and a map"));
            }
            FilterBase::image(parse_base(line, parts[0])?, parse_map(line, parts[1])?)
                .map_err(|e| lab_err(line, e))
        }
        "trace_q" => {
            if parts.len() != 1 {
                return Err(bad(line, "trace_q takes one base"));
            }
            FilterBase::trace_rationals(parse_base(line, parts[0])?)
                .map_err(|e| lab_err(line, e))
        }
        "completion_point" => {
            if parts.len() != 1 {
                return Err(bad(line, "completion_point takes one point"));
            }
            completion_point_base(&parse_sym_at(line, parts[0])?).map_err(|e| lab_err(line, e))
        }
        "plane_completion_point" => {
            if parts.len() != 2 {
                return Err(bad(line, "plane_completion_point takes two coordinates"));
            }
            crate::lab::filter::plane_completion_point_base(
                &parse_sym_at(line, parts[0])?,
                &parse_sym_at(line, parts[1])?,
            )
            .map_err(|e| lab_err(line, e))
        }
        _ => Err(bad(line, format!("unknown base expression `{t}`"))),
    }
}

fn parse_predicate(line: usize, text: &str) -> Result<Predicate, CatalogError> {
    let t = text.trim();
    if t == "cauchy_metric" {
        return Ok(Predicate::CauchyMetric);
    }
    let Some((name, args)) = split_call(t) else {
        return Err(bad(line, format!("unknown predicate `{t}`")));
    };
    let parts = split_args(args);
    match name {
        "converges_completed_line" => {
            if parts.len() != 1 {
                return Err(bad(line, "converges_completed_line takes one point"));
            }
            Ok(Predicate::ConvergesCompletedLine(parse_sym_at(
                line, parts[0],
            )?))
        }
        "converges_completed_plane" => {
            if parts.len() != 2 {
                return Err(bad(line, "converges_completed_plane takes two coordinates"));
            }
            Ok(Predicate::ConvergesCompletedPlane(
                parse_sym_at(line, parts[0])?,
                parse_sym_at(line, parts[1])?,
            ))
        }
        "converges_product_of_lines" => {
            if parts.len() != 2 {
                return Err(bad(
                    line,
                    "converges_product_of_lines takes two coordinates",
                ));
            }
            Ok(Predicate::ConvergesProductOfLines(
                parse_sym_at(line, parts[0])?,
                parse_sym_at(line, parts[1])?,
            ))
        }
        "refines" => Ok(Predicate::Refines(parse_base(line, args)?)),
        "adherence_contains" => {
            if parts.is_empty() || parts.len() > 2 {
                return Err(bad(line, "adherence_contains takes one or two coordinates"));
            }
            let coords = parts
                .iter()
                .map(|p| parse_sym_at(line, p))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(Predicate::AdherenceContains(coords))
        }
        _ => Err(bad(line, format!("unknown predicate `{t}`"))),
    }
}

pub fn parse_catalog(text: &str) -> Result<Vec<Scenario>, CatalogError> {
    let mut scenarios = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split('|').map(str::trim).collect();
        if fields.len() != 4 {
            return Err(bad(
                line,
                format!("expected 4 fields separated by `|`, got {}", fields.len()),
            ));
        }
        let expected = match fields[3] {
            "true" => true,
            "false" => false,
            other => return Err(bad(line, format!("expected `true` or `false`, got `{other}`"))),
        };
        scenarios.push(Scenario {
            name: fields[0].to_string(),
            base: parse_base(line, fields[1])?,
            predicate: parse_predicate(line, fields[2])?,
            expected,
        });
    }
    Ok(scenarios)
}

/// Evaluates one scenario to its exact boolean.
pub fn evaluate(s: &Scenario) -> Result<bool, LabError> {
    match &s.predicate {
        Predicate::ConvergesCompletedLine(x) => converges_in_completed_line(&s.base, x),
        Predicate::ConvergesCompletedPlane(x, y) => {
            converges_in_completed_plane(&s.base, x, y)
        }
        Predicate::ConvergesProductOfLines(x, y) => {
            converges_in_product_of_completed_lines(&s.base, x, y)
        }
        Predicate::CauchyMetric => is_cauchy_metric(&s.base),
        Predicate::Refines(g) => filter_refines(&s.base, g),
        Predicate::AdherenceContains(coords) => {
            let FilterBase::Principal { set } = &s.base else {
                return Err(LabError::Unsupported(
                    "adherence_contains needs a principal base holding the set".into(),
                ));
            };
            set.closure_contains_point(coords).map_err(Into::into)
        }
    }
}

/// Runs every scenario. Evaluation errors are structural (an unsupported
/// construction slipped into the catalog), so they surface as errors rather
/// than row failures.
pub fn run_catalog(scenarios: &[Scenario]) -> Result<CatalogReport, CatalogError> {
    let mut rows = Vec::with_capacity(scenarios.len());
    for s in scenarios {
        let got = evaluate(s).map_err(|e| CatalogError {
            line: 0,
            message: format!("scenario `{}`: {e}", s.name),
        })?;
        rows.push(RowOutcome {
            name: s.name.clone(),
            expected: s.expected,
            got,
        });
    }
    Ok(CatalogReport { rows })
}
