//! Optical scalars of a null vector field and the resulting congruence type.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::bilinear::nabla_vector;
use crate::error::{Error, Result};
use crate::frames::{frame_components, NullFrame};
use crate::geometry::Geometry;
use crate::jet::{Jet, JetTensor};
use crate::tensor::{MetricAtPoint, TensorValue, Variance};

pub const CONGRUENCE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CongruenceLabel {
    Generic,
    GeodesicOnly,
    RobinsonTrautman,
    Kundt,
}

impl CongruenceLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            CongruenceLabel::Generic => "generic",
            CongruenceLabel::GeodesicOnly => "geodesic-only",
            CongruenceLabel::RobinsonTrautman => "Robinson-Trautman",
            CongruenceLabel::Kundt => "Kundt",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CongruenceFlags {
    pub geodesic: bool,
    pub twist_free: bool,
    pub shear_free: bool,
    pub expansion_free: bool,
    pub kundt: bool,
    pub robinson_trautman: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CongruenceReport {
    pub kappa: Vec<f64>,
    /// `ρ_{ij} = m_i · ∇_{m_j} k`, row `i`.
    pub rho: Vec<Vec<f64>>,
    pub theta: f64,
    pub sigma: Vec<Vec<f64>>,
    pub omega: Vec<Vec<f64>>,
    pub flags: CongruenceFlags,
    pub label: CongruenceLabel,
    pub tol: f64,
    /// Some quantity deciding a flag lies within a factor 10 of `tol`.
    pub marginal: bool,
    pub frame: String,
}

fn max_abs(rows: &[Vec<f64>]) -> f64 {
    rows.iter().flatten().fold(0.0, |m, x| m.max(x.abs()))
}

fn near(x: f64, tol: f64) -> bool {
    x > tol / 10.0 && x <= tol * 10.0
}

/// Checks that `g(k,k)` vanishes to first order at the point.
pub fn check_null_field(geo: &Geometry, k: &JetTensor) -> Result<()> {
    let n = geo.dim();
    if k.variance != [Variance::Up] {
        return Err(Error::VarianceClash(0, 0));
    }
    let order = k.order().min(1);
    let kc: Vec<Jet> = k.comps.iter().map(|j| j.truncate(order)).collect();
    let k0: Vec<f64> = kc.iter().map(Jet::value).collect();
    let knorm = k0.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if knorm == 0.0 {
        return Err(Error::ZeroVector);
    }
    let mut gkk = Jet::zero(geo.g.space(), order);
    for a in 0..n {
        for b in 0..n {
            gkk = &gkk + &(&(&geo.g.comps[a * n + b].truncate(order) * &kc[a]) * &kc[b]);
        }
    }
    let scale = knorm * knorm * geo.at.g.max_abs().max(1.0);
    let worst = gkk.coeffs().iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if worst > 1e-10 * scale {
        return Err(Error::NotNull(worst));
    }
    Ok(())
}

/// `κ_i` and `ρ_{ij}` of the field `k` in a frame completing `k(p)`.
pub fn kappa_rho(geo: &Geometry, k: &JetTensor, f: &NullFrame, tol: f64) -> Result<CongruenceReport> {
    check_null_field(geo, k)?;
    let n = geo.dim();
    let k0: Vec<f64> = k.comps.iter().map(Jet::value).collect();
    let dev = k0.iter().zip(f.k()).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    if dev > 1e-12 * (1.0 + k0.iter().fold(0.0f64, |m, x| m.max(x.abs()))) {
        return Err(Error::NotNull(dev));
    }
    let dk = nabla_vector(k, geo)?;
    let along = |x: &[f64]| -> Vec<f64> { (0..n).map(|a| (0..n).map(|b| dk[(a, b)] * x[b]).sum()).collect() };
    let at = &geo.at;
    let nkk = along(f.k());
    let kappa: Vec<f64> = (2..n).map(|i| at.dot(f.m(i), &nkk)).collect();
    let rho: Vec<Vec<f64>> = (2..n)
        .map(|i| (2..n).map(|j| at.dot(f.m(i), &along(f.m(j)))).collect())
        .collect();
    Ok(report_from(kappa, rho, tol, f.fingerprint()))
}

/// Builds the report and flags from `κ` and `ρ`.
pub fn report_from(kappa: Vec<f64>, rho: Vec<Vec<f64>>, tol: f64, frame: String) -> CongruenceReport {
    let d = rho.len();
    let theta = if d == 0 {
        0.0
    } else {
        (0..d).map(|i| rho[i][i]).sum::<f64>() / d as f64
    };
    let sigma: Vec<Vec<f64>> = (0..d)
        .map(|i| {
            (0..d)
                .map(|j| 0.5 * (rho[i][j] + rho[j][i]) - if i == j { theta } else { 0.0 })
                .collect()
        })
        .collect();
    let omega: Vec<Vec<f64>> = (0..d)
        .map(|i| (0..d).map(|j| 0.5 * (rho[i][j] - rho[j][i])).collect())
        .collect();
    let kmax = kappa.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let (smax, wmax) = (max_abs(&sigma), max_abs(&omega));
    let geodesic = kmax <= tol;
    let twist_free = wmax <= tol;
    let shear_free = smax <= tol;
    let expansion_free = theta.abs() <= tol;
    let kundt = geodesic && max_abs(&rho) <= tol;
    let robinson_trautman = geodesic && twist_free && shear_free && !expansion_free;
    let flags = CongruenceFlags {
        geodesic,
        twist_free,
        shear_free,
        expansion_free,
        kundt,
        robinson_trautman,
    };
    let marginal = [kmax, smax, wmax, theta.abs()].iter().any(|&x| near(x, tol));
    CongruenceReport {
        kappa,
        rho,
        theta,
        sigma,
        omega,
        label: classify_congruence(&flags),
        flags,
        tol,
        marginal,
        frame,
    }
}

pub fn classify_congruence(flags: &CongruenceFlags) -> CongruenceLabel {
    if flags.kundt {
        CongruenceLabel::Kundt
    } else if flags.robinson_trautman {
        CongruenceLabel::RobinsonTrautman
    } else if flags.geodesic {
        CongruenceLabel::GeodesicOnly
    } else {
        CongruenceLabel::Generic
    }
}

/// `k_{[a} ∇_{b]} k_{[c} k_{d]}` at the point, all slots down.
pub fn kundt_tensor_residual(geo: &Geometry, k: &JetTensor) -> Result<TensorValue> {
    check_null_field(geo, k)?;
    let n = geo.dim();
    let at = &geo.at;
    let k0: Vec<f64> = k.comps.iter().map(Jet::value).collect();
    let kd = at.lower(&k0);
    let dk = nabla_vector(k, geo)?;
    // ∇_b k_c = g_{ce} (∇_b k)^e
    let g: DMatrix<f64> = at.matrix();
    let dkd = g * &dk; // [c][b]
    let mut t = TensorValue::zeros(n, vec![Variance::Down; 4]);
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    t.set(&[a, b, c, d], kd[a] * dkd[(c, b)] * kd[d]);
                }
            }
        }
    }
    t.antisymmetrize(&[0, 1])?.antisymmetrize(&[2, 3])
}

/// `4‖·‖∞` of the frame components of the Kundt tensor; equals
/// `max(|κ|, |ρ|)` for a frame completing `k`.
pub fn kundt_frame_norm(t: &TensorValue, f: &NullFrame, m: &MetricAtPoint) -> Result<f64> {
    Ok(4.0 * frame_components(t, f, m)?.max_abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frames::complete_null_frame;
    use crate::geometry::TensorFieldExpr;
    use crate::metric_ir::{parse_metric, Point};

    fn case(metric: &str, k: &str, p: Vec<f64>) -> (Geometry, JetTensor, NullFrame) {
        let spec = parse_metric(metric).unwrap();
        let geo = Geometry::new(&spec, &Point::new(p)).unwrap();
        let kf = TensorFieldExpr::parse_vector(k, &spec, Variance::Up).unwrap();
        let kj = geo.field_jet(&kf, 2).unwrap();
        let f = complete_null_frame(&kj.value().components().to_vec(), &geo.at, None).unwrap();
        (geo, kj, f)
    }

    const SCHW: &str = "dim = 4\ncoords = t r th ph\ng[0][0] = -(1 - 2/r)\ng[1][1] = 1/(1 - 2/r)\ng[2][2] = r^2\ng[3][3] = r^2*sin(th)^2\n";

    #[test]
    fn ppwave_is_kundt() {
        let (geo, k, f) = case(
            "dim = 4\ncoords = u v x y\ng[0][0] = x^2 - y^2\ng[0][1] = 1\ng[2][2] = 1\ng[3][3] = 1\n",
            "0,1,0,0",
            vec![0.1, 0.2, 0.3, 0.4],
        );
        let r = kappa_rho(&geo, &k, &f, CONGRUENCE_TOL).unwrap();
        assert_eq!(r.label, CongruenceLabel::Kundt);
        assert!(kundt_tensor_residual(&geo, &k).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn schwarzschild_radial_is_robinson_trautman() {
        let (geo, k, f) = case(SCHW, "1/(1 - 2/r),1,0,0", vec![0.0, 3.0, 1.0, 0.0]);
        let r = kappa_rho(&geo, &k, &f, CONGRUENCE_TOL).unwrap();
        assert_eq!(r.label, CongruenceLabel::RobinsonTrautman, "{r:?}");
        // θ = 1/r for this affinely parametrized k
        assert!((r.theta - 1.0 / 3.0).abs() < 1e-12);
        let kt = kundt_tensor_residual(&geo, &k).unwrap();
        let norm = kundt_frame_norm(&kt, &f, &geo.at).unwrap();
        assert!((norm - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn rescaling_keeps_flags() {
        let (geo, k, f) = case(SCHW, "exp(t + r*th)*(1/(1 - 2/r)),exp(t + r*th),0,0", vec![0.2, 3.0, 1.0, 0.0]);
        let r = kappa_rho(&geo, &k, &f, CONGRUENCE_TOL).unwrap();
        assert!(r.flags.geodesic && r.flags.robinson_trautman);
        assert!(r.kappa.iter().all(|x| x.abs() < 1e-9));
    }

    #[test]
    fn non_null_field_rejected() {
        let (geo, _, _) = case(SCHW, "1/(1 - 2/r),1,0,0", vec![0.0, 3.0, 1.0, 0.0]);
        let spec = parse_metric(SCHW).unwrap();
        let kf = TensorFieldExpr::parse_vector("3,1,0,0", &spec, Variance::Up).unwrap();
        let kj = geo.field_jet(&kf, 2).unwrap();
        assert!(matches!(check_null_field(&geo, &kj), Err(Error::NotNull(_))));
    }

    #[test]
    fn labels() {
        let zero = report_from(vec![0.0, 0.0], vec![vec![0.0; 2]; 2], 1e-9, String::new());
        assert_eq!(zero.label, CongruenceLabel::Kundt);
        let rt = report_from(vec![0.0, 0.0], vec![vec![0.1, 0.0], vec![0.0, 0.1]], 1e-9, String::new());
        assert_eq!(rt.label, CongruenceLabel::RobinsonTrautman);
        let g = report_from(vec![0.3, 0.0], vec![vec![0.0; 2]; 2], 1e-9, String::new());
        assert_eq!(g.label, CongruenceLabel::Generic);
    }
}
