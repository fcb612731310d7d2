//! Text serialization for cellwise functions (the NLSCF format).
//!
//! Version 1 layout:
//!
//! ```text
//! NLSCF 1 <dim> <degree> <cells per axis...>
//! DOMAIN <lower...> <upper...>
//! <cell multi-index> FIN <coeffs in graded-lex order, padded to degree>
//! <cell multi-index> INF +|-
//! SINGULAR
//! F <face index>
//! V <cell index> <variety coeffs>
//! P <coords>
//! ```
//!
//! All reals use 17 significant digits, which round-trips every f64
//! bit-exactly. Cell lines appear in flat row-major order and polynomial
//! pieces are centered at their cell centers, so writing what was parsed
//! reproduces the input byte for byte. Only polynomial and infinite
//! pieces are representable; composite evaluators and selector pieces
//! (from `apply_t` or a lattice combination with a sign crossing) do not
//! fit the format and are reported as such. The same goes for the upper
//! singular rule: a parsed dump always evaluates with the regularized
//! (lower) rule, so writing an upper-rule function would silently change
//! its values at faces.

use thiserror::Error;

use crate::grid::Grid;
use crate::nlsc::{InfSign, NlscError, NlscFunction, Piece, SingularRule, SingularSet, Smoothness};
use crate::poly::{binomial, Poly};

#[derive(Debug, Error)]
pub enum DumpError {
    #[error("cell {cell}: {why}")]
    NotRepresentable { cell: usize, why: String },
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error(transparent)]
    Function(#[from] NlscError),
}

/// 17 significant digits: enough to reproduce any f64 bit-exactly.
pub(crate) fn fmt_real(x: f64) -> String {
    format!("{:.16e}", x)
}

/// Serialize a cellwise function. Fails on pieces outside the format
/// (composite evaluators, selector nodes, off-center polynomials) and on
/// upper-rule functions.
pub fn write_dump(u: &NlscFunction) -> Result<String, DumpError> {
    if u.rule() != SingularRule::Lower {
        return Err(DumpError::NotRepresentable {
            cell: 0,
            why: "upper singular rule has no dump encoding; regularize first".into(),
        });
    }
    let grid = u.grid();
    let dim = grid.dim();
    let degree = u
        .pieces()
        .iter()
        .filter_map(|p| p.as_poly().map(|q| q.degree()))
        .max()
        .unwrap_or(0);
    let coeff_len = binomial(dim + degree as usize, dim);

    let mut out = String::new();
    out.push_str(&format!("NLSCF 1 {} {}", dim, degree));
    for &c in grid.cells_per_axis() {
        out.push_str(&format!(" {}", c));
    }
    out.push('\n');
    out.push_str("DOMAIN");
    for &v in grid.lower() {
        out.push_str(&format!(" {}", fmt_real(v)));
    }
    for &v in grid.upper() {
        out.push_str(&format!(" {}", fmt_real(v)));
    }
    out.push('\n');

    for (cell, piece) in u.pieces().iter().enumerate() {
        let multi = grid.multi_index(cell);
        for (k, &m) in multi.iter().enumerate() {
            if k > 0 {
                out.push(' ');
            }
            out.push_str(&m.to_string());
        }
        match piece {
            Piece::Poly(p) => {
                if p.center() != grid.cell_center(cell).as_slice() {
                    return Err(DumpError::NotRepresentable {
                        cell,
                        why: "polynomial is not centered at its cell center".into(),
                    });
                }
                out.push_str(" FIN");
                for i in 0..coeff_len {
                    let c = p.coeffs().get(i).copied().unwrap_or(0.0);
                    out.push(' ');
                    out.push_str(&fmt_real(c));
                }
            }
            Piece::Inf(sign) => {
                out.push_str(match sign {
                    InfSign::Plus => " INF +",
                    InfSign::Minus => " INF -",
                });
            }
            Piece::Expr { .. } => {
                return Err(DumpError::NotRepresentable {
                    cell,
                    why: "closed-form piece; sample and fit it before dumping".into(),
                })
            }
            Piece::Jet(_) => {
                return Err(DumpError::NotRepresentable {
                    cell,
                    why: "composite operator piece has no finite coefficient list".into(),
                })
            }
            Piece::Max(..) | Piece::Min(..) => {
                return Err(DumpError::NotRepresentable {
                    cell,
                    why: "selector piece from a sign crossing; dump the inputs instead".into(),
                })
            }
        }
        out.push('\n');
    }

    out.push_str("SINGULAR\n");
    for face in u.singular().faces() {
        out.push_str(&format!("F {}\n", face));
    }
    for (cell, poly) in u.singular().varieties() {
        if poly.center() != grid.cell_center(*cell).as_slice() {
            return Err(DumpError::NotRepresentable {
                cell: *cell,
                why: "variety polynomial is not centered at its cell center".into(),
            });
        }
        out.push_str(&format!("V {}", cell));
        for &c in poly.coeffs() {
            out.push(' ');
            out.push_str(&fmt_real(c));
        }
        out.push('\n');
    }
    for point in u.singular().points() {
        out.push('P');
        for &c in point {
            out.push(' ');
            out.push_str(&fmt_real(c));
        }
        out.push('\n');
    }
    Ok(out)
}

fn syntax(line: usize, message: impl Into<String>) -> DumpError {
    DumpError::Syntax {
        line,
        message: message.into(),
    }
}

fn parse_real(tok: &str, line: usize) -> Result<f64, DumpError> {
    let v: f64 = tok
        .parse()
        .map_err(|_| syntax(line, format!("bad real '{}'", tok)))?;
    if v.is_nan() {
        return Err(syntax(line, "NaN is not a value"));
    }
    Ok(v)
}

fn parse_usize(tok: &str, line: usize) -> Result<usize, DumpError> {
    tok.parse()
        .map_err(|_| syntax(line, format!("bad integer '{}'", tok)))
}

/// Degree whose graded-lex coefficient count in `dim` variables equals
/// `count`, if any.
fn degree_for_count(dim: usize, count: usize) -> Option<u32> {
    let mut d = 0u32;
    loop {
        let len = binomial(dim + d as usize, dim);
        if len == count {
            return Some(d);
        }
        if len > count {
            return None;
        }
        d += 1;
    }
}

/// Parse a version-1 dump back into a cellwise function. The result
/// always carries the regularized rule and infinite smoothness off its
/// singular set.
pub fn parse_dump(text: &str) -> Result<NlscFunction, DumpError> {
    let mut lines = text.lines().enumerate();

    let (lno, header) = lines.next().ok_or_else(|| syntax(1, "empty input"))?;
    let toks: Vec<&str> = header.split_whitespace().collect();
    if toks.len() < 4 || toks[0] != "NLSCF" {
        return Err(syntax(lno + 1, "expected 'NLSCF 1 <dim> <degree> <cells...>'"));
    }
    if toks[1] != "1" {
        return Err(syntax(lno + 1, format!("unsupported version '{}'", toks[1])));
    }
    let dim = parse_usize(toks[2], lno + 1)?;
    let degree = parse_usize(toks[3], lno + 1)? as u32;
    if dim == 0 || toks.len() != 4 + dim {
        return Err(syntax(lno + 1, format!("expected {} cell counts", dim)));
    }
    let cells: Vec<usize> = toks[4..]
        .iter()
        .map(|t| parse_usize(t, lno + 1))
        .collect::<Result<_, _>>()?;

    let (lno, domain) = lines.next().ok_or_else(|| syntax(2, "missing DOMAIN line"))?;
    let toks: Vec<&str> = domain.split_whitespace().collect();
    if toks.len() != 1 + 2 * dim || toks[0] != "DOMAIN" {
        return Err(syntax(lno + 1, "expected 'DOMAIN <lower...> <upper...>'"));
    }
    let lower: Vec<f64> = toks[1..=dim]
        .iter()
        .map(|t| parse_real(t, lno + 1))
        .collect::<Result<_, _>>()?;
    let upper: Vec<f64> = toks[dim + 1..]
        .iter()
        .map(|t| parse_real(t, lno + 1))
        .collect::<Result<_, _>>()?;
    let grid = Grid::new(lower, upper, cells)
        .map_err(|e| syntax(lno + 1, format!("bad domain: {}", e)))?;

    let coeff_len = binomial(dim + degree as usize, dim);
    let mut pieces = Vec::with_capacity(grid.cell_count());
    for expect in 0..grid.cell_count() {
        let (lno, line) = lines
            .next()
            .ok_or_else(|| syntax(expect + 3, "dump truncated inside the cell section"))?;
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() < dim + 1 {
            return Err(syntax(lno + 1, "cell line too short"));
        }
        let multi: Vec<usize> = toks[..dim]
            .iter()
            .map(|t| parse_usize(t, lno + 1))
            .collect::<Result<_, _>>()?;
        for (axis, &m) in multi.iter().enumerate() {
            if m >= grid.cells_per_axis()[axis] {
                return Err(syntax(lno + 1, format!("cell index {} out of range", m)));
            }
        }
        let flat = grid.flat_index(&multi);
        if flat != expect {
            return Err(syntax(
                lno + 1,
                format!("cells out of order: expected flat index {}, got {}", expect, flat),
            ));
        }
        match toks[dim] {
            "FIN" => {
                let coeffs: Vec<f64> = toks[dim + 1..]
                    .iter()
                    .map(|t| parse_real(t, lno + 1))
                    .collect::<Result<_, _>>()?;
                if coeffs.len() != coeff_len {
                    return Err(syntax(
                        lno + 1,
                        format!("expected {} coefficients, got {}", coeff_len, coeffs.len()),
                    ));
                }
                let poly = Poly::new(grid.cell_center(flat), degree, coeffs)
                    .map_err(|e| syntax(lno + 1, e.to_string()))?;
                pieces.push(Piece::Poly(poly));
            }
            "INF" => {
                let sign = toks
                    .get(dim + 1)
                    .ok_or_else(|| syntax(lno + 1, "INF needs a sign"))?;
                match *sign {
                    "+" => pieces.push(Piece::Inf(InfSign::Plus)),
                    "-" => pieces.push(Piece::Inf(InfSign::Minus)),
                    other => return Err(syntax(lno + 1, format!("bad sign '{}'", other))),
                }
                if toks.len() > dim + 2 {
                    return Err(syntax(lno + 1, "trailing tokens after INF sign"));
                }
            }
            other => return Err(syntax(lno + 1, format!("expected FIN or INF, got '{}'", other))),
        }
    }

    let (lno, line) = lines
        .next()
        .ok_or_else(|| syntax(grid.cell_count() + 3, "missing SINGULAR section"))?;
    if line.trim() != "SINGULAR" {
        return Err(syntax(lno + 1, "expected 'SINGULAR'"));
    }
    let mut singular = SingularSet::empty();
    for (lno, line) in lines {
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.is_empty() {
            continue;
        }
        match toks[0] {
            "F" => {
                if toks.len() != 2 {
                    return Err(syntax(lno + 1, "expected 'F <face index>'"));
                }
                let face = parse_usize(toks[1], lno + 1)?;
                if face >= grid.face_count() {
                    return Err(syntax(lno + 1, format!("face index {} out of range", face)));
                }
                singular.add_face(face);
            }
            "V" => {
                if toks.len() < 3 {
                    return Err(syntax(lno + 1, "expected 'V <cell> <coeffs>'"));
                }
                let cell = parse_usize(toks[1], lno + 1)?;
                if cell >= grid.cell_count() {
                    return Err(syntax(lno + 1, format!("cell index {} out of range", cell)));
                }
                let coeffs: Vec<f64> = toks[2..]
                    .iter()
                    .map(|t| parse_real(t, lno + 1))
                    .collect::<Result<_, _>>()?;
                let vdeg = degree_for_count(dim, coeffs.len()).ok_or_else(|| {
                    syntax(
                        lno + 1,
                        format!("{} coefficients match no degree in {} variables", coeffs.len(), dim),
                    )
                })?;
                let poly = Poly::new(grid.cell_center(cell), vdeg, coeffs)
                    .map_err(|e| syntax(lno + 1, e.to_string()))?;
                singular
                    .add_variety(cell, poly)
                    .map_err(|e| syntax(lno + 1, e.to_string()))?;
            }
            "P" => {
                if toks.len() != 1 + dim {
                    return Err(syntax(lno + 1, format!("expected {} coordinates", dim)));
                }
                let point: Vec<f64> = toks[1..]
                    .iter()
                    .map(|t| parse_real(t, lno + 1))
                    .collect::<Result<_, _>>()?;
                singular.add_point(point);
            }
            other => return Err(syntax(lno + 1, format!("unknown record '{}'", other))),
        }
    }

    Ok(NlscFunction::new(grid, pieces, singular, Smoothness::Infinite)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::SampleSet;
    use crate::nlsc::random_cellwise;
    use rand::rngs::StdRng;
    use rand::SeedableRng;
    use std::sync::Arc;

    #[test]
    fn seventeen_digits_round_trip_awkward_reals() {
        for &x in &[0.1, 1.0 / 3.0, 1e-300, -2.5e300, 0.05, std::f64::consts::PI] {
            let s = fmt_real(x);
            let back: f64 = s.parse().unwrap();
            assert_eq!(back.to_bits(), x.to_bits(), "{}", s);
        }
    }

    #[test]
    fn write_parse_write_is_byte_identical() {
        let mut rng = StdRng::seed_from_u64(11);
        for trial in 0..20 {
            let grid = if trial % 2 == 0 {
                Grid::new(vec![0.0], vec![1.0], vec![5]).unwrap()
            } else {
                Grid::new(vec![-1.0, 0.5], vec![1.0, 2.0], vec![3, 2]).unwrap()
            };
            let u = random_cellwise(&grid, 2, 0.15, &mut rng);
            let s1 = write_dump(&u).unwrap();
            let v = parse_dump(&s1).unwrap();
            let s2 = write_dump(&v).unwrap();
            assert_eq!(s1, s2);
            let samples = SampleSet::from_grid(&grid, 3);
            for x in samples.points() {
                assert_eq!(u.eval(x).unwrap(), v.eval(x).unwrap());
            }
        }
    }

    #[test]
    fn mixed_degrees_pad_to_the_header_degree() {
        let grid = Grid::new(vec![0.0], vec![1.0], vec![2]).unwrap();
        let p0 = Poly::constant(grid.cell_center(0), 4.0);
        let p2 = Poly::new(grid.cell_center(1), 2, vec![1.0, 2.0, 3.0]).unwrap();
        let u = NlscFunction::from_cell_polys(grid.clone(), vec![p0, p2]).unwrap();
        let s = write_dump(&u).unwrap();
        assert!(s.starts_with("NLSCF 1 1 2 2\n"));
        let v = parse_dump(&s).unwrap();
        for x in SampleSet::from_grid(&grid, 4).points() {
            assert_eq!(u.eval(x).unwrap(), v.eval(x).unwrap());
        }
    }

    #[test]
    fn singular_records_survive_the_round_trip() {
        let grid = Grid::new(vec![0.0], vec![1.0], vec![4]).unwrap();
        let polys = (0..4)
            .map(|c| Poly::constant(grid.cell_center(c), c as f64))
            .collect();
        let mut u = NlscFunction::from_cell_polys(grid.clone(), polys).unwrap();
        let mut singular = u.singular().clone();
        singular
            .add_variety(1, Poly::new(grid.cell_center(1), 1, vec![0.0, 2.0]).unwrap())
            .unwrap();
        singular.add_point(vec![0.77]);
        u = NlscFunction::new(grid, u.pieces().to_vec(), singular, Smoothness::Infinite).unwrap();
        let s = write_dump(&u).unwrap();
        let v = parse_dump(&s).unwrap();
        assert_eq!(v.singular().face_count(), 3);
        assert_eq!(v.singular().varieties().len(), 1);
        assert_eq!(v.singular().points(), &[vec![0.77]]);
        assert_eq!(write_dump(&v).unwrap(), s);
    }

    #[test]
    fn infinite_pieces_use_inf_lines() {
        let grid = Grid::new(vec![0.0], vec![1.0], vec![3]).unwrap();
        let u = NlscFunction::new(
            grid.clone(),
            vec![
                Piece::Poly(Poly::constant(grid.cell_center(0), 1.0)),
                Piece::Inf(InfSign::Plus),
                Piece::Inf(InfSign::Minus),
            ],
            SingularSet::skeleton(&grid),
            Smoothness::Infinite,
        )
        .unwrap();
        let s = write_dump(&u).unwrap();
        assert!(s.contains("1 INF +\n"));
        assert!(s.contains("2 INF -\n"));
        let v = parse_dump(&s).unwrap();
        assert_eq!(write_dump(&v).unwrap(), s);
    }

    #[test]
    fn composite_and_upper_rule_functions_are_rejected() {
        let grid = Grid::new(vec![0.0], vec![1.0], vec![2]).unwrap();
        let expr = Arc::new(crate::expr::Expr::Num(3.0));
        let u = NlscFunction::from_expression(grid.clone(), expr, 0.0);
        assert!(matches!(
            write_dump(&u),
            Err(DumpError::NotRepresentable { .. })
        ));
        let polys = (0..2)
            .map(|c| Poly::constant(grid.cell_center(c), 0.0))
            .collect();
        let w = NlscFunction::from_cell_polys(grid, polys).unwrap();
        assert!(matches!(
            write_dump(&w.baire_upper()),
            Err(DumpError::NotRepresentable { .. })
        ));
        assert!(write_dump(&w.baire_lower()).is_ok());
    }

    #[test]
    fn parse_rejects_malformed_input() {
        let grid = Grid::new(vec![0.0], vec![1.0], vec![2]).unwrap();
        let polys = (0..2)
            .map(|c| Poly::constant(grid.cell_center(c), 1.5))
            .collect();
        let u = NlscFunction::from_cell_polys(grid, polys).unwrap();
        let good = write_dump(&u).unwrap();

        let cases: Vec<String> = vec![
            "BOGUS 1 1 0 2\n".into(),
            "NLSCF 2 1 0 2\n".into(),
            good.lines().take(3).collect::<Vec<_>>().join("\n"),
            good.replace("0 FIN", "5 FIN"),
            good.replace("SINGULAR", "SINGULAR\nQ 1"),
            good.replace("1.5000000000000000e0", "1.5e0 9.0e0"),
            good.replace("SINGULAR", "SINGULAR\nF 99"),
            good.replace("SINGULAR", "SINGULAR\nV 0 0.0 0.0"),
        ];
        for (i, text) in cases.iter().enumerate() {
            assert!(parse_dump(text).is_err(), "case {} parsed: {}", i, text);
        }
    }

    #[test]
    fn cells_listed_out_of_order_are_rejected() {
        let grid = Grid::new(vec![0.0], vec![1.0], vec![2]).unwrap();
        let polys = (0..2)
            .map(|c| Poly::constant(grid.cell_center(c), 1.0))
            .collect();
        let u = NlscFunction::from_cell_polys(grid, polys).unwrap();
        let good = write_dump(&u).unwrap();
        let mut lines: Vec<&str> = good.lines().collect();
        lines.swap(2, 3);
        let swapped = lines.join("\n");
        assert!(parse_dump(&swapped).is_err());
    }
}
