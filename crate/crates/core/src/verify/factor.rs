//! Covariant derivatives of aligned tensors factor through `∇k` and the
//! bracket.

use crate::alignment::Tolerances;
use crate::bilinear::factorization_check;
use crate::error::Result;
use crate::metric_ir::Point;

use super::subjects::{kulkarni_nomizu, outer, sym_outer, Site};
use super::{Fixture, Gate, Hypothesis, Recorder, IDENTITY_BUDGET};

pub(super) const ANCHORS: &[(&str, &str)] = &[
    ("factorization/vanishing", "nabla_beta T_alpha = 0 for bw(alpha) >= s+2"),
    ("factorization/leading-weight", "nabla_beta T_alpha = (nabla_beta k)^j w_j(alpha) for bw(alpha) = s+1"),
    ("factorization/random-pairs", "X^a nabla_a T . Q = pi(nabla_X k) . <T|k|Q> for random X and Q in B^(-s-1)"),
];

pub(super) fn run(fx: &Fixture, p: &Point, _seed: u64, rec: &mut Recorder) -> Result<()> {
    let site = Site::at(fx, p)?;
    let geo = &site.geo;
    let mut subjects = vec![
        ("S".to_string(), geo.tracefree_ricci.clone()),
        ("Rm".to_string(), geo.riemann.clone()),
        ("nabla Rm".to_string(), geo.nabla_riemann(1)?.clone()),
    ];
    let k = site.k_lower();
    let m2 = site.frame_lower(2);
    subjects.push(("k k".into(), outer(&k, &k)));
    subjects.push(("(k m2 + m2 k) o g".into(), kulkarni_nomizu(&sym_outer(&k, &m2), &geo.g)));
    for (name, t) in subjects {
        let rep = factorization_check(geo, &t, &site.k, None, Tolerances::default())?;
        let mut gate = Gate::default();
        gate = match (&rep.skipped, rep.s) {
            (Some(why), _) => gate.with((Hypothesis::Fails, format!("{name}: {why}"))),
            (None, Some(s)) => {
                let status = if rep.neighbourhood_hypothesis { Hypothesis::Holds } else { Hypothesis::Fails };
                gate.with((status, format!("bo({name}) = {s} near the point: {}", status.as_str())))
            }
            (None, None) => gate.with((Hypothesis::Fails, format!("{name}: zero tensor"))),
        };
        rec.record("factorization/vanishing", &name, &gate, rep.vanishing_residual, IDENTITY_BUDGET);
        rec.record("factorization/leading-weight", &name, &gate, rep.component_residual, IDENTITY_BUDGET);
        rec.record("factorization/random-pairs", &name, &gate, rep.random_residual, IDENTITY_BUDGET);
    }
    Ok(())
}
