//! Metric specifications, evaluation points, and metric jets.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::{Arc, OnceLock};

use nalgebra::DMatrix;
use num::{BigRational, ToPrimitive};
use serde::{Deserialize, Serialize};

use super::expr::{Expr, NODE_CAP};
use super::parser::{parse_expr, parse_rational};
use crate::error::{Error, Result};
use crate::jet::{Jet, JetSpace, JetTensor};
use crate::tensor::{MetricAtPoint, Variance};

/// Highest metric derivative order kept in the symbolic table; enough for
/// the third covariant derivative of the Riemann tensor.
pub const MAX_METRIC_ORDER: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Signature {
    /// Diagonal-style charts with one negative direction.
    MostlyPlus,
    /// Charts with a null coordinate pair.
    NullAdapted,
}

impl Signature {
    pub fn name(self) -> &'static str {
        match self {
            Signature::MostlyPlus => "mostly-plus",
            Signature::NullAdapted => "null-adapted",
        }
    }
}

/// A coordinate chart with closed-form metric components.
#[derive(Clone)]
pub struct MetricSpec {
    dim: usize,
    coords: Vec<String>,
    /// Full `n×n` array; `(i,j)` and `(j,i)` share one tree.
    components: Vec<Expr>,
    signature: Option<Signature>,
    derivs: Arc<OnceLock<Result<Arc<DerivTable>>>>,
}

impl std::fmt::Debug for MetricSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MetricSpec")
            .field("dim", &self.dim)
            .field("coords", &self.coords)
            .field("components", &self.components)
            .finish()
    }
}

/// Symbolic partial derivatives of the upper-triangle components, indexed by
/// the multi-indices of a [`JetSpace`].
struct DerivTable {
    space: Arc<JetSpace>,
    /// `table[c][m]`: derivative `∂^m` of upper-triangle component `c`.
    table: Vec<Vec<Expr>>,
    max_nodes: usize,
}

impl MetricSpec {
    /// Builds a spec from an upper triangle given row by row; entries for
    /// `i > j` are ignored.
    pub fn new(coords: Vec<String>, components: Vec<Expr>, signature: Option<Signature>) -> Result<Self> {
        let dim = coords.len();
        if components.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: components.len(),
            });
        }
        if dim < 3 {
            return Err(Error::WrongDimension {
                required: 3,
                found: dim,
            });
        }
        let mut full = components;
        for i in 0..dim {
            for j in 0..i {
                full[i * dim + j] = full[j * dim + i].clone();
            }
        }
        for e in &full {
            if let Some(v) = e.max_var() {
                if v >= dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        found: v + 1,
                    });
                }
            }
        }
        Ok(MetricSpec {
            dim,
            coords,
            components: full,
            signature,
            derivs: Arc::new(OnceLock::new()),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coords(&self) -> &[String] {
        &self.coords
    }

    pub fn signature(&self) -> Option<Signature> {
        self.signature
    }

    pub fn component(&self, i: usize, j: usize) -> &Expr {
        &self.components[i * self.dim + j]
    }

    pub fn parse_expr(&self, text: &str) -> Result<Expr> {
        parse_expr(text, &self.coords)
    }

    /// Metric and inverse at `p`, with non-degeneracy and signature checks.
    pub fn at(&self, p: &Point) -> Result<MetricAtPoint> {
        self.check_point(p)?;
        let n = self.dim;
        let mut g = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let e = self.component(i, j);
                let v = e.eval(&p.values).map_err(|err| match err {
                    Error::Domain { reason, .. } => Error::Domain {
                        expr: format!("g[{i}][{j}] = {}", e.display_with(&self.coords)),
                        reason,
                    },
                    other => other,
                })?;
                g[(i, j)] = v;
                g[(j, i)] = v;
            }
        }
        MetricAtPoint::new(g)
    }

    pub fn check_point(&self, p: &Point) -> Result<()> {
        if p.values.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: p.values.len(),
            });
        }
        Ok(())
    }

    fn deriv_table(&self) -> Result<Arc<DerivTable>> {
        self.derivs
            .get_or_init(|| build_table(self).map(Arc::new))
            .clone()
    }

    /// Largest node count among the cached symbolic derivatives.
    pub fn derivative_node_count(&self) -> Result<usize> {
        Ok(self.deriv_table()?.max_nodes)
    }

    /// Jet of the covariant metric at `p` to the given order, from the cached
    /// symbolic derivatives.
    pub fn metric_jet(&self, p: &Point, order: usize) -> Result<JetTensor> {
        if order > MAX_METRIC_ORDER {
            return Err(Error::OrderTooHigh(order));
        }
        self.check_point(p)?;
        let t = self.deriv_table()?;
        let n = self.dim;
        let len = t.space.len(order);
        let monos = t.space.monomials();
        let mut upper = Vec::with_capacity(t.table.len());
        for derivs in &t.table {
            let mut c = Vec::with_capacity(len);
            for (m, e) in derivs[..len].iter().enumerate() {
                c.push(e.eval(&p.values)? / t.space.multi_factorial(&monos[m]));
            }
            upper.push(Jet::from_coeffs(&t.space, c));
        }
        let mut comps = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let (a, b) = if i <= j { (i, j) } else { (j, i) };
                comps.push(upper[tri_index(n, a, b)].clone());
            }
        }
        Ok(JetTensor {
            dim: n,
            variance: vec![Variance::Down; 2],
            comps,
        })
    }

    /// Same jet computed by evaluating the component trees in jet arithmetic.
    pub fn metric_jet_direct(&self, p: &Point, order: usize) -> Result<JetTensor> {
        self.check_point(p)?;
        let space = self.jet_space()?;
        let vars = coordinate_jets(&space, p, order);
        let n = self.dim;
        let mut comps = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                comps.push(self.component(i, j).eval_jet(&vars)?);
            }
        }
        Ok(JetTensor {
            dim: n,
            variance: vec![Variance::Down; 2],
            comps,
        })
    }

    /// The jet space used for this chart.
    pub fn jet_space(&self) -> Result<Arc<JetSpace>> {
        Ok(self.deriv_table()?.space.clone())
    }

    /// Serializes to the line-based metric-file format.
    pub fn to_metric_file(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "dim = {}", self.dim);
        let _ = writeln!(s, "coords = {}", self.coords.join(" "));
        if let Some(sig) = self.signature {
            let _ = writeln!(s, "signature = {}", sig.name());
        }
        for i in 0..self.dim {
            for j in i..self.dim {
                let e = self.component(i, j);
                if !e.is_zero() {
                    let _ = writeln!(s, "g[{i}][{j}] = {}", e.display_with(&self.coords));
                }
            }
        }
        s
    }
}

fn tri_index(n: usize, i: usize, j: usize) -> usize {
    // Row-major upper triangle, i ≤ j.
    i * n - i * i.saturating_sub(1) / 2 + (j - i)
}

fn build_table(m: &MetricSpec) -> Result<DerivTable> {
    let n = m.dim;
    let space = JetSpace::new(n, MAX_METRIC_ORDER);
    let monos = space.monomials().to_vec();
    let mut table = Vec::new();
    let mut max_nodes = 0;
    for i in 0..n {
        for j in i..n {
            let mut derivs: Vec<Expr> = Vec::with_capacity(monos.len());
            for (k, mono) in monos.iter().enumerate() {
                if k == 0 {
                    derivs.push(m.component(i, j).clone());
                    continue;
                }
                // Differentiate the parent obtained by removing one power of
                // the last variable present.
                let var = mono.iter().rposition(|&d| d > 0).expect("non-constant monomial");
                let mut parent = mono.clone();
                parent[var] -= 1;
                let pi = space.monomial_index(&parent).expect("parent monomial");
                let d = derivs[pi].diff_checked(var)?;
                max_nodes = max_nodes.max(d.size());
                derivs.push(d);
            }
            table.push(derivs);
        }
    }
    if max_nodes > NODE_CAP {
        return Err(Error::NodeCap {
            nodes: max_nodes,
            cap: NODE_CAP,
        });
    }
    Ok(DerivTable {
        space,
        table,
        max_nodes,
    })
}

/// Jets of the coordinate functions at `p`.
pub fn coordinate_jets(space: &Arc<JetSpace>, p: &Point, order: usize) -> Vec<Jet> {
    (0..space.nvars())
        .map(|i| Jet::variable(space, i, p.values[i], order))
        .collect()
}

/// A point in a chart, with an exact representation when every coordinate
/// was given as a rational literal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub values: Vec<f64>,
    #[serde(skip)]
    pub exact: Option<Vec<BigRational>>,
}

impl Point {
    pub fn new(values: Vec<f64>) -> Self {
        Point { values, exact: None }
    }

    pub fn exact(values: Vec<BigRational>) -> Self {
        Point {
            values: values.iter().map(|q| q.to_f64().unwrap_or(f64::NAN)).collect(),
            exact: Some(values),
        }
    }

    /// Parses `name=value,name=value,...`; every coordinate must appear once.
    pub fn parse(text: &str, coords: &[String]) -> Result<Self> {
        let mut vals: Vec<Option<BigRational>> = vec![None; coords.len()];
        for part in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (name, value) = part
                .split_once('=')
                .ok_or_else(|| Error::Usage(format!("point entry `{part}` is not name=value")))?;
            let name = name.trim();
            let idx = coords
                .iter()
                .position(|c| c == name)
                .ok_or_else(|| Error::Usage(format!("unknown coordinate `{name}` in point")))?;
            if vals[idx].is_some() {
                return Err(Error::Usage(format!("coordinate `{name}` given twice")));
            }
            vals[idx] = Some(parse_rational(value)?);
        }
        let mut out = Vec::with_capacity(coords.len());
        for (c, v) in coords.iter().zip(vals) {
            out.push(v.ok_or_else(|| Error::Usage(format!("point is missing coordinate `{c}`")))?);
        }
        Ok(Point::exact(out))
    }

    pub fn display_with(&self, coords: &[String]) -> String {
        coords
            .iter()
            .zip(&self.values)
            .map(|(c, v)| format!("{c}={v}"))
            .collect::<Vec<_>>()
            .join(",")
    }
}

/// Parses the line-based metric-file format.
pub fn parse_metric(text: &str) -> Result<MetricSpec> {
    let mut dim: Option<usize> = None;
    let mut coords: Option<Vec<String>> = None;
    let mut signature = None;
    // (i, j) with i ≤ j → (source text, expr, line)
    let mut entries: BTreeMap<(usize, usize), (String, Expr)> = BTreeMap::new();
    let mut pending: Vec<(usize, usize, usize, String)> = Vec::new();
    for (ln, raw) in text.lines().enumerate() {
        let line_no = ln + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (lhs, rhs) = line.split_once('=').ok_or_else(|| Error::MetricFile {
            line: line_no,
            message: "expected `key = value`".into(),
        })?;
        let (lhs, rhs) = (lhs.trim(), rhs.trim());
        if lhs == "dim" {
            let n: usize = rhs.parse().map_err(|_| Error::MetricFile {
                line: line_no,
                message: format!("invalid dimension `{rhs}`"),
            })?;
            dim = Some(n);
        } else if lhs == "coords" {
            coords = Some(rhs.split_whitespace().map(str::to_string).collect());
        } else if lhs == "signature" {
            signature = Some(match rhs {
                "mostly-plus" => Signature::MostlyPlus,
                "null-adapted" => Signature::NullAdapted,
                _ => {
                    return Err(Error::MetricFile {
                        line: line_no,
                        message: format!("unknown signature `{rhs}`"),
                    })
                }
            });
        } else if let Some((i, j)) = parse_component_key(lhs) {
            pending.push((line_no, i, j, rhs.to_string()));
        } else {
            return Err(Error::MetricFile {
                line: line_no,
                message: format!("unknown key `{lhs}`"),
            });
        }
    }
    let coords = coords.ok_or(Error::MetricFile {
        line: 0,
        message: "missing `coords` line".into(),
    })?;
    let n = dim.unwrap_or(coords.len());
    if coords.len() != n {
        return Err(Error::MetricFile {
            line: 0,
            message: format!("dim = {n} but {} coordinate names given", coords.len()),
        });
    }
    for (line, i, j, src) in pending {
        if i >= n || j >= n {
            return Err(Error::MetricFile {
                line,
                message: format!("component index g[{i}][{j}] out of range for dim {n}"),
            });
        }
        let e = parse_expr(&src, &coords).map_err(|e| Error::MetricFile {
            line,
            message: e.to_string(),
        })?;
        let key = (i.min(j), i.max(j));
        if let Some((first, prev)) = entries.get(&key) {
            if prev.fold() != e.fold() {
                return Err(Error::ConflictingAssignment {
                    i: key.0,
                    j: key.1,
                    first: first.clone(),
                    second: src,
                });
            }
            continue;
        }
        entries.insert(key, (src, e));
    }
    let mut comps = vec![Expr::zero(); n * n];
    for ((i, j), (_, e)) in entries {
        comps[i * n + j] = e;
    }
    MetricSpec::new(coords, comps, signature)
}

fn parse_component_key(lhs: &str) -> Option<(usize, usize)> {
    let rest = lhs.strip_prefix("g[")?;
    let (i, rest) = rest.split_once(']')?;
    let rest = rest.strip_prefix('[')?;
    let (j, tail) = rest.split_once(']')?;
    if !tail.trim().is_empty() {
        return None;
    }
    Some((i.trim().parse().ok()?, j.trim().parse().ok()?))
}

#[cfg(test)]
mod tests {
    use super::*;

    const PPWAVE: &str = "\
# pp-wave
dim = 4
coords = u v x y
g[0][0] = x^2 - y^2
g[0][1] = 1
g[2][2] = 1
g[3][3] = 1
";

    #[test]
    fn minkowski_file() {
        let m = parse_metric("dim = 4\ncoords = t x y z\ng[0][0] = -1\ng[1][1] = 1\ng[2][2]=1\ng[3][3] = 1\n").unwrap();
        let nonzero = (0..4)
            .flat_map(|i| (0..4).map(move |j| (i, j)))
            .filter(|&(i, j)| !m.component(i, j).is_zero())
            .count();
        assert_eq!(nonzero, 4);
    }

    #[test]
    fn ppwave_matches_hand_expansion() {
        let m = parse_metric(PPWAVE).unwrap();
        let p = Point::new(vec![0.3, -1.0, 2.0, 0.5]);
        let g = m.at(&p).unwrap().matrix();
        let h = 2.0f64.powi(2) - 0.5f64.powi(2);
        let mut want = DMatrix::zeros(4, 4);
        want[(0, 0)] = h;
        want[(0, 1)] = 1.0;
        want[(1, 0)] = 1.0;
        want[(2, 2)] = 1.0;
        want[(3, 3)] = 1.0;
        assert!((g - want).abs().max() < 1e-15);
    }

    #[test]
    fn conflicting_symmetric_assignment() {
        let r = parse_metric("dim = 3\ncoords = u v x\ng[0][1] = u\ng[1][0] = v\ng[2][2] = 1\n");
        assert!(matches!(r, Err(Error::ConflictingAssignment { i: 0, j: 1, .. })));
    }

    #[test]
    fn dim_coords_mismatch() {
        assert!(parse_metric("dim = 4\ncoords = u v x\n").is_err());
    }

    #[test]
    fn metric_file_round_trip() {
        let m = parse_metric(PPWAVE).unwrap();
        let again = parse_metric(&m.to_metric_file()).unwrap();
        let p = Point::new(vec![0.1, 0.2, 0.7, -0.4]);
        assert_eq!(m.at(&p).unwrap(), again.at(&p).unwrap());
    }

    #[test]
    fn upper_triangle_indexing() {
        let n = 5;
        let mut k = 0;
        for i in 0..n {
            for j in i..n {
                assert_eq!(tri_index(n, i, j), k);
                k += 1;
            }
        }
    }

    #[test]
    fn symbolic_and_direct_jets_agree() {
        let m = parse_metric(
            "dim = 4\ncoords = t r a b\ng[0][0] = -(1 - 2/r)\ng[1][1] = 1/(1 - 2/r)\ng[2][2] = r^2\ng[3][3] = r^2*sin(a)^2\n",
        )
        .unwrap();
        let p = Point::new(vec![0.0, 3.0, 1.1, 0.0]);
        let a = m.metric_jet(&p, 5).unwrap();
        let b = m.metric_jet_direct(&p, 5).unwrap();
        for (x, y) in a.comps.iter().zip(&b.comps) {
            for (u, v) in x.coeffs().iter().zip(y.coeffs()) {
                assert!((u - v).abs() <= 1e-12 * (1.0 + u.abs()), "{u} vs {v}");
            }
        }
        assert!(m.derivative_node_count().unwrap() < NODE_CAP);
    }

    #[test]
    fn point_parsing() {
        let c: Vec<String> = ["t", "r"].iter().map(|s| s.to_string()).collect();
        let p = Point::parse("r=3, t=1/2", &c).unwrap();
        assert_eq!(p.values, vec![0.5, 3.0]);
        assert!(Point::parse("r=3", &c).is_err());
        assert!(Point::parse("r=3,q=1,t=0", &c).is_err());
    }
}
