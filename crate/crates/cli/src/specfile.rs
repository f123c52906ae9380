//! TOML spec files.
//!
//! ```toml
//! kind = "mth-root"          # or "decomposable"
//! dimension = 3
//! degree = 3                 # mth-root only
//! mode = "exact"             # optional
//! points = ["0,0,0", "1/2,1,-1"]
//!
//! [tolerances]               # optional
//! abs = 1e-12
//! rel = 1e-9
//!
//! [[coefficient]]            # mth-root: a_{index}, 1-based, any order
//! index = [1, 2, 3]
//! expr = "exp(x1)"
//!
//! [[gamma]]                  # decomposable: gamma_{ij}, unset entries are 0
//! index = [1, 1]
//! expr = "1"
//! b = ["1", "0", "0"]        # decomposable
//! ```

use std::fmt;
use std::ops::Range;

use finsler_core::decomp::DecompSpec;
use finsler_core::finsler::MetricSpec;
use finsler_core::scalar::parse_rational;
use finsler_core::{Expr, Mode, Rational, Tolerance};
use serde::Deserialize;
use toml::Spanned;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpecError {
    pub line: Option<usize>,
    pub column: Option<usize>,
    pub message: String,
}

impl fmt::Display for SpecError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.line, self.column) {
            (Some(l), Some(c)) => write!(f, "line {l}, column {c}: {}", self.message),
            _ => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for SpecError {}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.rfind('\n').map_or(before.len(), |i| before.len() - i - 1) + 1;
    (line, col)
}

struct Located<'a> {
    text: &'a str,
}

impl Located<'_> {
    fn at(&self, span: Range<usize>, message: impl Into<String>) -> SpecError {
        let (line, column) = line_col(self.text, span.start);
        SpecError { line: Some(line), column: Some(column), message: message.into() }
    }

    /// Parses an expression stored as a TOML basic string, locating errors
    /// inside the string.
    fn expr(&self, s: &Spanned<String>, n: usize) -> Result<Expr, SpecError> {
        Expr::parse(s.get_ref(), n).map_err(|e| {
            let raw = &self.text[s.span()];
            let offset = if raw.starts_with('"') || raw.starts_with('\'') { 1 } else { 0 };
            let (line, column) = line_col(self.text, s.span().start + offset + e.pos);
            SpecError { line: Some(line), column: Some(column), message: format!("in expression: {}", e.message) }
        })
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEntry {
    index: Spanned<Vec<usize>>,
    expr: Spanned<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTolerances {
    abs: Option<f64>,
    rel: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    kind: Spanned<String>,
    dimension: Spanned<usize>,
    degree: Option<Spanned<usize>>,
    mode: Option<Spanned<String>>,
    #[serde(default)]
    points: Vec<Spanned<String>>,
    tolerances: Option<RawTolerances>,
    #[serde(default)]
    coefficient: Vec<RawEntry>,
    #[serde(default)]
    gamma: Vec<RawEntry>,
    b: Option<Spanned<Vec<Spanned<String>>>>,
}

#[derive(Debug, Clone)]
pub enum MetricKind {
    MthRoot(MetricSpec),
    Decomposable(DecompSpec),
}

#[derive(Debug, Clone)]
pub struct SpecFile {
    pub metric: MetricKind,
    pub points: Vec<Vec<Rational>>,
    pub mode: Option<Mode>,
    pub tolerance: Option<Tolerance>,
}

impl SpecFile {
    pub fn dimension(&self) -> usize {
        match &self.metric {
            MetricKind::MthRoot(m) => m.dimension(),
            MetricKind::Decomposable(d) => d.dimension(),
        }
    }

    /// The m-th root form of the metric.
    pub fn metric_spec(&self) -> MetricSpec {
        match &self.metric {
            MetricKind::MthRoot(m) => m.clone(),
            MetricKind::Decomposable(d) => d.to_metric_spec(),
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self.metric {
            MetricKind::MthRoot(_) => "mth-root",
            MetricKind::Decomposable(_) => "decomposable",
        }
    }
}

/// Parses `"v1,...,vn"` with rational entries.
pub fn parse_point(text: &str, n: usize) -> Result<Vec<Rational>, String> {
    let values: Vec<Rational> = text
        .split(',')
        .map(|s| parse_rational(s.trim()).ok_or_else(|| format!("`{}` is not a rational number", s.trim())))
        .collect::<Result<_, _>>()?;
    if values.len() != n {
        return Err(format!("point `{text}` has {} coordinates, expected {n}", values.len()));
    }
    Ok(values)
}

pub fn parse(text: &str) -> Result<SpecFile, SpecError> {
    let raw: RawSpec = toml::from_str(text).map_err(|e| {
        let (line, column) = e.span().map(|s| line_col(text, s.start)).unzip();
        SpecError { line, column, message: e.message().to_string() }
    })?;
    let loc = Located { text };
    let n = *raw.dimension.get_ref();
    if !(2..=4).contains(&n) {
        return Err(loc.at(raw.dimension.span(), format!("dimension {n} not in 2..=4")));
    }

    let metric = match raw.kind.get_ref().as_str() {
        "mth-root" => {
            let degree = raw.degree.as_ref().ok_or_else(|| loc.at(raw.kind.span(), "mth-root spec needs `degree`"))?;
            if !raw.gamma.is_empty() || raw.b.is_some() {
                return Err(loc.at(raw.kind.span(), "`gamma` and `b` belong to decomposable specs"));
            }
            let mut spec = MetricSpec::new(n, *degree.get_ref()).map_err(|e| loc.at(degree.span(), e.to_string()))?;
            for entry in &raw.coefficient {
                let index = zero_based(&loc, &entry.index)?;
                let e = loc.expr(&entry.expr, n)?;
                spec.insert(&index, e).map_err(|e| loc.at(entry.index.span(), e.to_string()))?;
            }
            MetricKind::MthRoot(spec)
        }
        "decomposable" => {
            if raw.degree.is_some() || !raw.coefficient.is_empty() {
                return Err(loc.at(raw.kind.span(), "`degree` and `coefficient` belong to mth-root specs"));
            }
            let mut gamma: Vec<Vec<Option<Expr>>> = vec![vec![None; n]; n];
            for entry in &raw.gamma {
                let index = zero_based(&loc, &entry.index)?;
                let [i, j] = index[..] else {
                    return Err(loc.at(entry.index.span(), "gamma index needs two entries"));
                };
                if i >= n || j >= n {
                    return Err(loc.at(entry.index.span(), format!("index out of range 1..{n}")));
                }
                if gamma[i][j].is_some() {
                    return Err(loc.at(entry.index.span(), format!("duplicate gamma_{}{}", i.min(j) + 1, i.max(j) + 1)));
                }
                let e = loc.expr(&entry.expr, n)?;
                gamma[i][j] = Some(e.clone());
                gamma[j][i] = Some(e);
            }
            let b_raw = raw.b.as_ref().ok_or_else(|| loc.at(raw.kind.span(), "decomposable spec needs `b`"))?;
            if b_raw.get_ref().len() != n {
                return Err(loc.at(b_raw.span(), format!("b has {} entries, expected {n}", b_raw.get_ref().len())));
            }
            let b = b_raw.get_ref().iter().map(|s| loc.expr(s, n)).collect::<Result<Vec<_>, _>>()?;
            let gamma = gamma.into_iter().map(|r| r.into_iter().map(|e| e.unwrap_or_else(Expr::zero)).collect()).collect();
            MetricKind::Decomposable(DecompSpec::new(gamma, b).map_err(|e| loc.at(raw.kind.span(), e.to_string()))?)
        }
        other => return Err(loc.at(raw.kind.span(), format!("unknown kind `{other}` (expected mth-root|decomposable)"))),
    };

    let points = raw
        .points
        .iter()
        .map(|p| parse_point(p.get_ref(), n).map_err(|m| loc.at(p.span(), m)))
        .collect::<Result<_, _>>()?;
    let mode = raw
        .mode
        .as_ref()
        .map(|m| m.get_ref().parse::<Mode>().map_err(|msg| loc.at(m.span(), msg)))
        .transpose()?;
    let tolerance = raw.tolerances.map(|t| {
        let d = Tolerance::default();
        Tolerance::new(t.abs.unwrap_or(d.abs), t.rel.unwrap_or(d.rel))
    });
    Ok(SpecFile { metric, points, mode, tolerance })
}

fn zero_based(loc: &Located<'_>, index: &Spanned<Vec<usize>>) -> Result<Vec<usize>, SpecError> {
    index
        .get_ref()
        .iter()
        .map(|&i| i.checked_sub(1).ok_or_else(|| loc.at(index.span(), "indices are 1-based")))
        .collect()
}
