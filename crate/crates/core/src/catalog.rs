//! Built-in metrics with a designated null vector field, a safe coordinate
//! box and reference properties that the pipeline re-derives.

use std::sync::OnceLock;

use rand::Rng;
use serde::Serialize;

use crate::alignment::{boost_order, AlignmentLabel, Tolerances};
use crate::congruence::{kappa_rho, CongruenceLabel, CONGRUENCE_TOL};
use crate::error::{Error, Result};
use crate::frames::JetFrame;
use crate::geometry::{Geometry, TensorFieldExpr};
use crate::jet::JetTensor;
use crate::metric_ir::{parse_metric, MetricSpec, Point};
use crate::tensor::Variance;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Property {
    Flat,
    Vacuum,
    ConformallyFlat,
    WeylType { label: AlignmentLabel },
    RicciType { label: AlignmentLabel },
    Congruence { label: CongruenceLabel },
    /// `S` of boost order 0 with `λ` not an eigenvalue of `[S_ij]`.
    GenericTypeII,
    /// `S = λ(uu − h/3)`.
    TachyonicRicci,
}

#[derive(Debug, Clone, Serialize)]
pub struct Reference {
    pub property: Property,
    /// Where the expected value comes from.
    pub source: &'static str,
}

#[derive(Debug, Serialize)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub description: &'static str,
    pub coords: Vec<&'static str>,
    /// Contravariant components of the designated null field.
    pub k: &'static str,
    /// Coordinate ranges inside which evaluation is regular.
    pub bounds: Vec<(f64, f64)>,
    pub center: Vec<f64>,
    pub reference: Vec<Reference>,
    #[serde(skip)]
    text: String,
    #[serde(skip)]
    spec: OnceLock<MetricSpec>,
}

impl CatalogEntry {
    /// Shared parsed metric; its derivative cache is reused across calls.
    pub fn metric(&self) -> &MetricSpec {
        self.spec
            .get_or_init(|| parse_metric(&self.text).expect("catalog metric parses"))
    }

    pub fn metric_file(&self) -> &str {
        &self.text
    }

    pub fn k_field(&self) -> Result<TensorFieldExpr> {
        TensorFieldExpr::parse_vector(self.k, self.metric(), Variance::Up)
    }

    pub fn center_point(&self) -> Point {
        Point::new(self.center.clone())
    }

    pub fn sample_point<R: Rng>(&self, rng: &mut R) -> Point {
        Point::new(self.bounds.iter().map(|&(a, b)| rng.gen_range(a..=b)).collect())
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }
}

struct Def {
    name: &'static str,
    description: &'static str,
    coords: &'static str,
    comps: &'static [(usize, usize, &'static str)],
    k: &'static str,
    bounds: &'static [(f64, f64)],
    center: &'static [f64],
    reference: Vec<Reference>,
}

fn build(d: Def) -> CatalogEntry {
    let coords: Vec<&'static str> = d.coords.split_whitespace().collect();
    let mut text = format!("dim = {}\ncoords = {}\n", coords.len(), d.coords);
    for (i, j, e) in d.comps {
        text.push_str(&format!("g[{i}][{j}] = {e}\n"));
    }
    CatalogEntry {
        name: d.name,
        description: d.description,
        coords,
        k: d.k,
        bounds: d.bounds.to_vec(),
        center: d.center.to_vec(),
        reference: d.reference,
        text,
        spec: OnceLock::new(),
    }
}

fn r(property: Property, source: &'static str) -> Reference {
    Reference { property, source }
}

fn entries() -> Vec<CatalogEntry> {
    use AlignmentLabel as A;
    use CongruenceLabel as C;
    use Property as P;
    vec![
        build(Def {
            name: "minkowski3",
            description: "flat space, dimension 3",
            coords: "t x y",
            comps: &[(0, 0, "-1"), (1, 1, "1"), (2, 2, "1")],
            k: "1,1,0",
            bounds: &[(-1.0, 1.0), (-1.0, 1.0), (-1.0, 1.0)],
            center: &[0.0, 0.0, 0.0],
            reference: vec![r(P::Flat, "closed form"), r(P::Congruence { label: C::Kundt }, "closed form")],
        }),
        build(Def {
            name: "minkowski4",
            description: "flat space, dimension 4",
            coords: "t x y z",
            comps: &[(0, 0, "-1"), (1, 1, "1"), (2, 2, "1"), (3, 3, "1")],
            k: "1,1,0,0",
            bounds: &[(-1.0, 1.0), (-1.0, 1.0), (-1.0, 1.0), (-1.0, 1.0)],
            center: &[0.0, 0.0, 0.0, 0.0],
            reference: vec![r(P::Flat, "closed form"), r(P::Congruence { label: C::Kundt }, "closed form")],
        }),
        build(Def {
            name: "ppwave4",
            description: "vacuum pp-wave 2 du dv + (x^2 - y^2) du^2 + dx^2 + dy^2",
            coords: "u v x y",
            comps: &[(0, 0, "x^2 - y^2"), (0, 1, "1"), (2, 2, "1"), (3, 3, "1")],
            k: "0,1,0,0",
            bounds: &[(-1.0, 1.0), (-1.0, 1.0), (-1.5, 1.5), (-1.5, 1.5)],
            center: &[0.0, 0.0, 1.0, 1.0],
            reference: vec![
                r(P::Vacuum, "closed form"),
                r(P::WeylType { label: A::N }, "known solution"),
                r(P::Congruence { label: C::Kundt }, "covariantly constant k"),
            ],
        }),
        build(Def {
            name: "nullfluid4",
            description: "pp-wave with null dust, H = x^2 + y^2 + x*y",
            coords: "u v x y",
            comps: &[(0, 0, "x^2 + y^2 + x*y"), (0, 1, "1"), (2, 2, "1"), (3, 3, "1")],
            k: "0,1,0,0",
            bounds: &[(-1.0, 1.0), (-1.0, 1.0), (-1.5, 1.5), (-1.5, 1.5)],
            center: &[0.0, 0.0, 0.5, -0.5],
            reference: vec![
                r(P::RicciType { label: A::N }, "Ric = -(H_xx + H_yy)/2 du^2"),
                r(P::Congruence { label: C::Kundt }, "covariantly constant k"),
            ],
        }),
        build(Def {
            name: "kundt4",
            description: "Kundt metric 2 du (dv + H du + W dx) + dx^2 + dy^2 with v-independent H, W",
            coords: "u v x y",
            comps: &[(0, 0, "2*(x^2 + u*y^2 + x*y)"), (0, 1, "1"), (0, 2, "y^2 + u*x*y"), (2, 2, "1"), (3, 3, "1")],
            k: "0,1,0,0",
            bounds: &[(-1.0, 1.0), (-1.0, 1.0), (-1.5, 1.5), (-1.5, 1.5)],
            center: &[0.3, 0.0, 0.7, 0.9],
            reference: vec![
                r(P::WeylType { label: A::III }, "v-independent W with W_y != 0"),
                r(P::RicciType { label: A::III }, "v-independent W with W_y != 0"),
                r(P::Congruence { label: C::Kundt }, "Kundt form"),
            ],
        }),
        build(Def {
            name: "cylinder4",
            description: "flat space with the shearing geodesic field of cylindrical null cones",
            coords: "t x y z",
            comps: &[(0, 0, "-1"), (1, 1, "1"), (2, 2, "1"), (3, 3, "1")],
            k: "1,x/sqrt(x^2 + y^2),y/sqrt(x^2 + y^2),0",
            bounds: &[(-1.0, 1.0), (0.5, 1.5), (0.5, 1.5), (-1.0, 1.0)],
            center: &[0.0, 0.8, 0.6, 0.0],
            reference: vec![r(P::Flat, "closed form"), r(P::Congruence { label: C::GeodesicOnly }, "gradient of t - sqrt(x^2 + y^2)")],
        }),
        build(Def {
            name: "twisted4",
            description: "flat space with the non-geodesic field (1, cos y, sin y, 0)",
            coords: "t x y z",
            comps: &[(0, 0, "-1"), (1, 1, "1"), (2, 2, "1"), (3, 3, "1")],
            k: "1,cos(y),sin(y),0",
            bounds: &[(-1.0, 1.0), (-1.0, 1.0), (-1.0, 1.0), (-1.0, 1.0)],
            center: &[0.0, 0.0, 0.4, 0.0],
            reference: vec![r(P::Flat, "closed form"), r(P::Congruence { label: C::Generic }, "nabla_k k = sin(y) (0, -sin y, cos y, 0)")],
        }),
        build(Def {
            name: "schwarzschild",
            description: "Schwarzschild exterior, M = 1",
            coords: "t r th ph",
            comps: &[(0, 0, "-(1 - 2/r)"), (1, 1, "1/(1 - 2/r)"), (2, 2, "r^2"), (3, 3, "r^2*sin(th)^2")],
            k: "1/(1 - 2/r),1,0,0",
            bounds: &[(-1.0, 1.0), (2.5, 10.0), (0.4, 2.7), (0.0, 6.0)],
            center: &[0.0, 3.0, 1.2, 0.0],
            reference: vec![
                r(P::Vacuum, "known solution"),
                r(P::WeylType { label: A::II }, "radial k is a double principal null direction"),
                r(P::Congruence { label: C::RobinsonTrautman }, "known solution"),
            ],
        }),
        build(Def {
            name: "warped4",
            description: "warped product dx^2 + e^(x^2) (-dt^2 + dy^2 + dz^2)",
            coords: "x t y z",
            comps: &[(0, 0, "1"), (1, 1, "-exp(x^2)"), (2, 2, "exp(x^2)"), (3, 3, "exp(x^2)")],
            k: "0,1,1,0",
            bounds: &[(-1.0, 1.0), (-1.0, 1.0), (-1.0, 1.0), (-1.0, 1.0)],
            center: &[0.6, 0.0, 0.0, 0.0],
            reference: vec![
                r(P::ConformallyFlat, "warped product with flat fibre"),
                r(P::TachyonicRicci, "u = dx"),
                r(P::RicciType { label: A::II }, "k orthogonal to u"),
                r(P::Congruence { label: C::Kundt }, "closed form"),
            ],
        }),
        build(Def {
            name: "ppwave3",
            description: "pp-wave in dimension 3, 2 du dv + (x^2 + u x^3) du^2 + dx^2",
            coords: "u v x",
            comps: &[(0, 0, "x^2 + u*x^3"), (0, 1, "1"), (2, 2, "1")],
            k: "0,1,0",
            bounds: &[(-1.0, 1.0), (-1.0, 1.0), (-1.5, 1.5)],
            center: &[0.2, 0.0, 0.5],
            reference: vec![
                r(P::RicciType { label: A::N }, "Ric = -H_xx/2 du^2"),
                r(P::Congruence { label: C::Kundt }, "covariantly constant k"),
            ],
        }),
        build(Def {
            name: "confflat4",
            description: "conformally flat (1 + t^2 + x^2/2) (-dt^2 + dx^2 + dy^2 + dz^2)",
            coords: "t x y z",
            comps: &[
                (0, 0, "-(1 + t^2 + x^2/2)"),
                (1, 1, "1 + t^2 + x^2/2"),
                (2, 2, "1 + t^2 + x^2/2"),
                (3, 3, "1 + t^2 + x^2/2"),
            ],
            k: "1,1,0,0",
            bounds: &[(-1.0, 1.0), (-1.0, 1.0), (-1.0, 1.0), (-1.0, 1.0)],
            center: &[0.3, 0.4, 0.0, 0.0],
            reference: vec![r(P::ConformallyFlat, "conformal to flat space")],
        }),
        build(Def {
            name: "accel4",
            description: "conformally flat psi^-2 (dx^2 - dt^2 + dy^2 + dz^2), psi = 1 + x^2 + (y^2 + z^2 - t^2)/2",
            coords: "x t y z",
            comps: &[
                (0, 0, "1/(1 + x^2 + (y^2 + z^2 - t^2)/2)^2"),
                (1, 1, "-1/(1 + x^2 + (y^2 + z^2 - t^2)/2)^2"),
                (2, 2, "1/(1 + x^2 + (y^2 + z^2 - t^2)/2)^2"),
                (3, 3, "1/(1 + x^2 + (y^2 + z^2 - t^2)/2)^2"),
            ],
            k: "0,1,0,1",
            bounds: &[(-1.0, 1.0), (-1.0, 1.0), (-1.0, 1.0), (-1.0, 1.0)],
            center: &[0.3, 0.0, 0.8, 0.0],
            reference: vec![
                r(P::ConformallyFlat, "conformal to flat space"),
                r(P::TachyonicRicci, "Hessian of psi is 2 dx^2 plus a multiple of the flat metric"),
            ],
        }),
        build(Def {
            name: "cfkundt4",
            description: "conformally flat Kundt metric psi^2 (2 du dv + dx^2 + dy^2), psi = 1 + x^2/2 + u x/3",
            coords: "u v x y",
            comps: &[
                (0, 1, "(1 + x^2/2 + u*x/3)^2"),
                (2, 2, "(1 + x^2/2 + u*x/3)^2"),
                (3, 3, "(1 + x^2/2 + u*x/3)^2"),
            ],
            k: "0,1,0,0",
            bounds: &[(-1.0, 1.0), (-1.0, 1.0), (-1.0, 1.0), (-1.0, 1.0)],
            center: &[0.3, 0.0, 0.5, 0.2],
            reference: vec![
                r(P::ConformallyFlat, "conformal to flat space"),
                r(P::RicciType { label: A::II }, "v-independent conformal factor"),
                r(P::Congruence { label: C::Kundt }, "k(psi) = 0 keeps the flat Kundt field expansion-free"),
            ],
        }),
        build(Def {
            name: "ds2r2",
            description: "two-dimensional de Sitter times a flat plane, 2 du dv + v^2 du^2 + dx^2 + dy^2",
            coords: "u v x y",
            comps: &[(0, 0, "v^2"), (0, 1, "1"), (2, 2, "1"), (3, 3, "1")],
            k: "0,1,0,0",
            bounds: &[(-1.0, 1.0), (-1.0, 1.0), (-1.0, 1.0), (-1.0, 1.0)],
            center: &[0.0, 0.5, 0.0, 0.0],
            reference: vec![
                r(P::GenericTypeII, "S = K/2 (g2 - g_flat)"),
                r(P::Congruence { label: C::Kundt }, "closed form"),
            ],
        }),
    ]
}

static CATALOG: OnceLock<Vec<CatalogEntry>> = OnceLock::new();

pub fn list() -> Vec<&'static str> {
    all().iter().map(|e| e.name).collect()
}

pub fn all() -> &'static [CatalogEntry] {
    CATALOG.get_or_init(entries)
}

pub fn get(name: &str) -> Result<&'static CatalogEntry> {
    all()
        .iter()
        .find(|e| e.name == name)
        .ok_or_else(|| Error::UnknownMetric(name.to_string()))
}

/// Geometry at a point together with the jet of the designated field.
pub fn field_at(entry: &CatalogEntry, p: &Point, order: usize) -> Result<(Geometry, JetTensor)> {
    let geo = Geometry::new(entry.metric(), p)?;
    let k = geo.field_jet(&entry.k_field()?, order)?;
    Ok((geo, k))
}

#[derive(Debug, Clone, Serialize)]
pub struct AuditLine {
    pub property: Property,
    pub measured: String,
    pub ok: bool,
}

/// Recomputes every reference property at the center point.
pub fn audit(entry: &CatalogEntry) -> Result<Vec<AuditLine>> {
    let (geo, k) = field_at(entry, &entry.center_point(), 2)?;
    let at = &geo.at;
    let tol = Tolerances::default();
    let f = JetFrame::complete(&k, &geo.g, at, None)?.value();
    let mut out = Vec::new();
    for rp in &entry.reference {
        let (measured, ok) = match rp.property {
            Property::Flat => {
                let m = geo.riemann.value().max_abs();
                (format!("|Rm| = {m:.3e}"), m <= 1e-10)
            }
            Property::Vacuum => {
                let m = geo.ricci.value().max_abs();
                (format!("|Ric| = {m:.3e}"), m <= 1e-10)
            }
            Property::ConformallyFlat => {
                let m = geo.weyl.value().max_abs();
                (format!("|C| = {m:.3e}"), m <= 1e-10)
            }
            Property::WeylType { label } => {
                let rep = boost_order(&geo.weyl.value(), &f, at, tol)?;
                (rep.label.as_str().to_string(), rep.label == label)
            }
            Property::RicciType { label } => {
                let rep = boost_order(&geo.tracefree_ricci.value(), &f, at, tol)?;
                (rep.label.as_str().to_string(), rep.label == label)
            }
            Property::Congruence { label } => {
                let rep = kappa_rho(&geo, &k, &f, CONGRUENCE_TOL)?;
                (rep.label.as_str().to_string(), rep.label == label)
            }
            Property::GenericTypeII => {
                let s = crate::alignment::s_eigenstructure(&geo.tracefree_ricci.value(), at, &f, tol)?;
                (format!("dim E_lambda = {}", s.dim_e_lambda), s.generic_type_ii)
            }
            Property::TachyonicRicci => {
                let t = crate::alignment::tachyonic_form(&geo.tracefree_ricci.value().all_down(at)?, at);
                let res = t.as_ref().map_or(f64::INFINITY, |t| t.residual);
                (format!("residual = {res:.3e}"), res <= 1e-9)
            }
        };
        out.push(AuditLine {
            property: rp.property,
            measured,
            ok,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_entry_passes_its_audit() {
        for e in all() {
            for line in audit(e).unwrap() {
                assert!(line.ok, "{}: {:?} measured {}", e.name, line.property, line.measured);
            }
        }
    }

    #[test]
    fn metric_files_round_trip() {
        for e in all() {
            let again = parse_metric(&e.metric().to_metric_file()).unwrap();
            let p = e.center_point();
            let a = e.metric().at(&p).unwrap();
            let b = again.at(&p).unwrap();
            assert!(a.g.max_diff(&b.g) < 1e-15, "{}", e.name);
        }
    }

    #[test]
    fn unknown_name() {
        assert!(matches!(get("nope"), Err(Error::UnknownMetric(_))));
    }
}
