//! Geodesic and Kundt conclusions for tensors of type III or N, with the
//! component identities behind them.

use crate::alignment::Tolerances;
use crate::error::Result;
use crate::metric_ir::Point;

use super::subjects::{bound, kulkarni_nomizu, outer, rel, sym_outer, Site, Subject};
use super::{Fixture, Gate, Recorder, CONCLUSION_BUDGET, IDENTITY_BUDGET};

pub(super) const K_III: &[(&str, &str)] = &[
    ("k-iii/second-derivative", "nabla_j nabla_i k_0 = -rho_lj rho_li when bo(nabla k) <= 0"),
    ("k-iii/geodesic", "bo(nabla k) <= 0 implies kappa = 0"),
    ("k-iii/kundt", "bo(nabla k), bo(nabla nabla k) <= 0 imply kappa = rho = 0"),
];

pub(super) const RIC_III: &[(&str, &str)] = &[
    ("ric-iii/k-derivative-transverse", "nabla_0 S_ij = kappa_i v_j + kappa_j v_i"),
    ("ric-iii/k-derivative-trace", "nabla_0 S_01 = -kappa^j v_j"),
    ("ric-iii/second-derivative", "nabla_k nabla_j S_i0 = -(rho_lj rho_ik + rho_lk rho_ij) v_l - rho_lk rho_lj v_i"),
    ("ric-iii/geodesic", "bo(S) = -1, bo(nabla S) <= 0 imply kappa = 0"),
    ("ric-iii/kundt", "additionally bo(nabla nabla S) <= 0 implies rho = 0"),
];

pub(super) const RIC_N: &[(&str, &str)] = &[
    ("ric-n/second-derivative-expansion", "nabla_0 nabla_0 S_ij = -kappa^m nabla_m S_ij + kappa_i nabla_0 S_1j + kappa_j nabla_0 S_i1"),
    ("ric-n/second-derivative", "nabla_0 nabla_0 S_ij = 2 kappa_i kappa_j S_11"),
    ("ric-n/third-derivative", "nabla_l nabla_k nabla_j S_i0 = -(rho_il rho_mk rho_mj + rho_ml rho_ik rho_mj + rho_ml rho_mk rho_ij) S_11"),
    ("ric-n/geodesic", "bo(S) = -2, bo(nabla nabla S) <= 0 imply kappa = 0"),
    ("ric-n/kundt", "additionally bo(nabla^3 S) <= 0 implies rho = 0"),
];

pub(super) const WEYL_III: &[(&str, &str)] = &[
    ("weyl-iii/k-derivative-ijkl", "nabla_0 W_ijkl = kappa_i Psi_jkl - kappa_j Psi_ikl + kappa_k Psi_lij - kappa_l Psi_kij"),
    ("weyl-iii/k-derivative-01ij", "nabla_0 W_01ij = kappa^m Psi_mij - kappa_i Psi_j + kappa_j Psi_i"),
    ("weyl-iii/k-derivative-0i1j", "nabla_0 W_0i1j = -kappa^m Psi_jmi - kappa_i Psi_j"),
    ("weyl-iii/second-derivative-ijk0", "nabla_m nabla_l W_ijk0 in terms of rho rho Psi"),
    ("weyl-iii/second-derivative-i010", "nabla_m nabla_l W_i010 in terms of rho rho Psi"),
    ("weyl-iii/geodesic", "bo(W) = -1, bo(nabla W) <= 0 imply kappa = 0"),
    ("weyl-iii/kundt", "additionally bo(nabla nabla W) <= 0 implies rho = 0"),
];

pub(super) const WEYL_N: &[(&str, &str)] = &[
    ("weyl-n/second-derivative", "nabla_0 nabla_0 W_0i1j = 2 kappa_i kappa^k Psi_kj - kappa^k kappa_k Psi_ij"),
    ("weyl-n/third-derivative-ijk0", "nabla_l nabla_l nabla_l W_ijk0 along one spatial direction l"),
    ("weyl-n/third-derivative-i010", "nabla_l nabla_l nabla_l W_i010 along one spatial direction l"),
    ("weyl-n/geodesic", "bo(W) = -2, bo(nabla nabla W) <= 0 imply kappa = 0"),
    ("weyl-n/kundt", "additionally bo(nabla^3 W) <= 0 implies rho = 0"),
];

fn tol() -> Tolerances {
    Tolerances::default()
}

fn conclusions(rec: &mut Recorder, site: &Site, subject: &str, anchors: (&'static str, &'static str), geod: &Gate, kundt: &Gate) {
    let kmax = site.kappa.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let rmax = site.rho.iter().flatten().fold(kmax, |m, x| m.max(x.abs()));
    rec.record(anchors.0, subject, geod, kmax, CONCLUSION_BUDGET);
    rec.record(anchors.1, subject, kundt, rmax, CONCLUSION_BUDGET);
}

pub(super) fn run_k_iii(fx: &Fixture, p: &Point, rec: &mut Recorder) -> Result<()> {
    let site = Site::at(fx, p)?;
    let sub = Subject::new(&site, "k", site.k_lower(), 2)?;
    let g1 = Gate::default().with(bound(&site, &sub, 1, 0, false, tol())?);
    let mut res = 0.0f64;
    for i in site.spatial() {
        for j in site.spatial() {
            let lhs = sub.c(2, &[j, i, 0]);
            let mut rhs = site.r(i, j) * sub.c(1, &[1, 0]);
            for l in site.spatial() {
                rhs -= site.r(l, j) * site.r(l, i);
            }
            res = res.max(rel(lhs, rhs));
        }
    }
    rec.record("k-iii/second-derivative", "k", &g1, res, IDENTITY_BUDGET);
    let g2 = g1.clone().with(bound(&site, &sub, 2, 0, false, tol())?);
    conclusions(rec, &site, "k", ("k-iii/geodesic", "k-iii/kundt"), &g1, &g2);
    Ok(())
}

fn rank2_subjects(rec: &mut Recorder, site: &Site, type_n: bool, depth: usize) -> Result<Vec<Subject>> {
    let mut out = vec![Subject::new(site, "S", site.geo.tracefree_ricci.clone(), depth)?];
    if site.dim() >= 3 {
        let k = site.k_lower();
        let t = if type_n {
            ("k k", outer(&k, &k))
        } else {
            ("k m2 + m2 k", sym_outer(&k, &site.frame_lower(2)))
        };
        rec.synthetic(t.0);
        out.push(Subject::new(site, t.0, t.1, depth)?);
    }
    Ok(out)
}

fn double_form_subjects(rec: &mut Recorder, site: &Site, type_n: bool, depth: usize) -> Result<Vec<Subject>> {
    let mut out = vec![Subject::new(site, "C", site.geo.weyl.clone(), depth)?];
    if site.dim() >= 3 {
        let k = site.k_lower();
        let m2 = site.frame_lower(2);
        let t = if type_n {
            ("k k o m2 m2", kulkarni_nomizu(&outer(&k, &k), &outer(&m2, &m2)))
        } else {
            ("(k m2 + m2 k) o g", kulkarni_nomizu(&sym_outer(&k, &m2), &site.geo.g))
        };
        rec.synthetic(t.0);
        out.push(Subject::new(site, t.0, t.1, depth)?);
    }
    Ok(out)
}

pub(super) fn run_ric_iii(fx: &Fixture, p: &Point, rec: &mut Recorder) -> Result<()> {
    let site = Site::at(fx, p)?;
    let sp: Vec<usize> = site.spatial().collect();
    for sub in rank2_subjects(rec, &site, false, 2)? {
        let g0 = Gate::default().with(bound(&site, &sub, 0, -1, true, tol())?);
        let v = |i: usize| sub.c(0, &[1, i]);
        let kap = |i: usize| site.kap(i);
        let mut res = 0.0f64;
        for &i in &sp {
            for &j in &sp {
                res = res.max(rel(sub.c(1, &[0, i, j]), kap(i) * v(j) + kap(j) * v(i)));
            }
        }
        rec.record("ric-iii/k-derivative-transverse", &sub.name, &g0, res, IDENTITY_BUDGET);
        let rhs: f64 = -sp.iter().map(|&j| kap(j) * v(j)).sum::<f64>();
        rec.record("ric-iii/k-derivative-trace", &sub.name, &g0, rel(sub.c(1, &[0, 0, 1]), rhs), IDENTITY_BUDGET);

        let g1 = g0.clone().with(bound(&site, &sub, 1, 0, false, tol())?);
        let mut res = 0.0f64;
        for &i in &sp {
            for &j in &sp {
                for &k in &sp {
                    let mut rhs = 0.0;
                    for &l in &sp {
                        rhs -= (site.r(l, j) * site.r(i, k) + site.r(l, k) * site.r(i, j)) * v(l);
                        rhs -= site.r(l, k) * site.r(l, j) * v(i);
                    }
                    res = res.max(rel(sub.c(2, &[k, j, i, 0]), rhs));
                }
            }
        }
        rec.record("ric-iii/second-derivative", &sub.name, &g1, res, IDENTITY_BUDGET);
        let g2 = g1.clone().with(bound(&site, &sub, 2, 0, false, tol())?);
        conclusions(rec, &site, &sub.name, ("ric-iii/geodesic", "ric-iii/kundt"), &g1, &g2);
    }
    Ok(())
}

pub(super) fn run_ric_n(fx: &Fixture, p: &Point, rec: &mut Recorder) -> Result<()> {
    let site = Site::at(fx, p)?;
    let sp: Vec<usize> = site.spatial().collect();
    for sub in rank2_subjects(rec, &site, true, 3)? {
        let g0 = Gate::default().with(bound(&site, &sub, 0, -2, true, tol())?);
        let s11 = sub.c(0, &[1, 1]);
        let kap = |i: usize| site.kap(i);
        let g1 = g0.clone().with(bound(&site, &sub, 1, 0, false, tol())?);
        let (mut r_exp, mut r_fin) = (0.0f64, 0.0f64);
        for &i in &sp {
            for &j in &sp {
                let lhs = sub.c(2, &[0, 0, i, j]);
                let mut mid = kap(i) * sub.c(1, &[0, 1, j]) + kap(j) * sub.c(1, &[0, i, 1]);
                for &m in &sp {
                    mid -= kap(m) * sub.c(1, &[m, i, j]);
                }
                r_exp = r_exp.max(rel(lhs, mid));
                r_fin = r_fin.max(rel(lhs, 2.0 * kap(i) * kap(j) * s11));
            }
        }
        rec.record("ric-n/second-derivative-expansion", &sub.name, &g1, r_exp, IDENTITY_BUDGET);
        rec.record("ric-n/second-derivative", &sub.name, &g1, r_fin, IDENTITY_BUDGET);

        let g2 = g0
            .clone()
            .with(bound(&site, &sub, 1, -1, false, tol())?)
            .with(bound(&site, &sub, 2, 0, false, tol())?);
        let r = |a: usize, b: usize| site.r(a, b);
        let mut res = 0.0f64;
        for &i in &sp {
            for &j in &sp {
                for &k in &sp {
                    for &l in &sp {
                        let mut rhs = 0.0;
                        for &m in &sp {
                            rhs -= (r(i, l) * r(m, k) * r(m, j) + r(m, l) * r(i, k) * r(m, j) + r(m, l) * r(m, k) * r(i, j)) * s11;
                        }
                        res = res.max(rel(sub.c(3, &[l, k, j, i, 0]), rhs));
                    }
                }
            }
        }
        rec.record("ric-n/third-derivative", &sub.name, &g2, res, IDENTITY_BUDGET);
        let geod = g0.clone().with(bound(&site, &sub, 2, 0, false, tol())?);
        let kundt = geod.clone().with(bound(&site, &sub, 3, 0, false, tol())?);
        conclusions(rec, &site, &sub.name, ("ric-n/geodesic", "ric-n/kundt"), &geod, &kundt);
    }
    Ok(())
}

pub(super) fn run_weyl_iii(fx: &Fixture, p: &Point, rec: &mut Recorder) -> Result<()> {
    let site = Site::at(fx, p)?;
    let sp: Vec<usize> = site.spatial().collect();
    for sub in double_form_subjects(rec, &site, false, 2)? {
        let g0 = Gate::default().with(bound(&site, &sub, 0, -1, true, tol())?);
        let psi3 = |i: usize, j: usize, k: usize| sub.c(0, &[1, i, j, k]);
        let psi1 = |i: usize| sub.c(0, &[1, 0, 1, i]);
        let kap = |i: usize| site.kap(i);
        let r = |a: usize, b: usize| site.r(a, b);
        let (mut ra, mut rb, mut rc) = (0.0f64, 0.0f64, 0.0f64);
        for &i in &sp {
            for &j in &sp {
                for &k in &sp {
                    for &l in &sp {
                        let rhs = kap(i) * psi3(j, k, l) - kap(j) * psi3(i, k, l) + kap(k) * psi3(l, i, j) - kap(l) * psi3(k, i, j);
                        ra = ra.max(rel(sub.c(1, &[0, i, j, k, l]), rhs));
                    }
                }
                let mut b = -kap(i) * psi1(j) + kap(j) * psi1(i);
                let mut c = -kap(i) * psi1(j);
                for &m in &sp {
                    b += kap(m) * psi3(m, i, j);
                    c -= kap(m) * psi3(j, m, i);
                }
                rb = rb.max(rel(sub.c(1, &[0, 0, 1, i, j]), b));
                rc = rc.max(rel(sub.c(1, &[0, 0, i, 1, j]), c));
            }
        }
        rec.record("weyl-iii/k-derivative-ijkl", &sub.name, &g0, ra, IDENTITY_BUDGET);
        rec.record("weyl-iii/k-derivative-01ij", &sub.name, &g0, rb, IDENTITY_BUDGET);
        rec.record("weyl-iii/k-derivative-0i1j", &sub.name, &g0, rc, IDENTITY_BUDGET);

        let g1 = g0.clone().with(bound(&site, &sub, 1, 0, false, tol())?);
        let (mut ra, mut rb) = (0.0f64, 0.0f64);
        for &l in &sp {
            for &m in &sp {
                for &i in &sp {
                    for &j in &sp {
                        for &k in &sp {
                            let mut e = (r(k, l) * r(i, m) + r(k, m) * r(i, l)) * psi1(j) - (r(k, l) * r(j, m) + r(k, m) * r(j, l)) * psi1(i);
                            for &q in &sp {
                                e += (r(q, l) * r(j, m) + r(q, m) * r(j, l)) * psi3(i, k, q);
                                e -= (r(q, l) * r(i, m) + r(q, m) * r(i, l)) * psi3(j, k, q);
                                e -= (r(q, l) * r(k, m) + r(q, m) * r(k, l)) * psi3(q, i, j);
                                e += r(q, l) * r(q, m) * psi3(k, i, j);
                            }
                            ra = ra.max(rel(sub.c(2, &[m, l, i, j, k, 0]), e));
                        }
                        let _ = j;
                    }
                    let mut e = 0.0;
                    for &q in &sp {
                        e -= 2.0 * (r(q, l) * r(i, m) + r(q, m) * r(i, l)) * psi1(q);
                        e += r(q, l) * r(q, m) * psi1(i);
                        for &s in &sp {
                            e += (r(q, l) * r(s, m) + r(q, m) * r(s, l)) * psi3(q, i, s);
                        }
                    }
                    rb = rb.max(rel(sub.c(2, &[m, l, i, 0, 1, 0]), e));
                }
            }
        }
        rec.record("weyl-iii/second-derivative-ijk0", &sub.name, &g1, ra, IDENTITY_BUDGET);
        rec.record("weyl-iii/second-derivative-i010", &sub.name, &g1, rb, IDENTITY_BUDGET);
        let g2 = g1.clone().with(bound(&site, &sub, 2, 0, false, tol())?);
        conclusions(rec, &site, &sub.name, ("weyl-iii/geodesic", "weyl-iii/kundt"), &g1, &g2);
    }
    Ok(())
}

/// `∇_l∇_l∇_l W_{ijk0}` and `∇_l∇_l∇_l W_{i010}` are these multiples of
/// the differences of the two sides of the displayed relations.
const WN_A: f64 = 3.0;
const WN_B: f64 = -3.0;

pub(super) fn weyl_n_third(site: &Site, sub: &Subject, l: usize) -> (Vec<(f64, f64)>, Vec<(f64, f64)>) {
    let sp: Vec<usize> = site.spatial().collect();
    let rho = |i: usize| site.r(i, l);
    let psi = |i: usize, j: usize| sub.c(0, &[1, i, 1, j]);
    let rr: f64 = sp.iter().map(|&q| rho(q) * rho(q)).sum();
    let mut a = Vec::new();
    for &i in &sp {
        for &j in &sp {
            for &k in &sp {
                let mut e = rr * (rho(i) * psi(j, k) - rho(j) * psi(i, k));
                for &q in &sp {
                    e -= 2.0 * rho(k) * rho(q) * (rho(i) * psi(j, q) - rho(j) * psi(i, q));
                }
                a.push((sub.c(3, &[l, l, l, i, j, k, 0]), WN_A * e));
            }
        }
    }
    let mut b = Vec::new();
    for &i in &sp {
        let mut e = 0.0;
        for &k in &sp {
            e += rr * rho(k) * psi(i, k);
            for &j in &sp {
                e -= 2.0 * rho(i) * rho(j) * rho(k) * psi(j, k);
            }
        }
        b.push((sub.c(3, &[l, l, l, i, 0, 1, 0]), WN_B * e));
    }
    (a, b)
}

pub(super) fn run_weyl_n(fx: &Fixture, p: &Point, rec: &mut Recorder) -> Result<()> {
    let site = Site::at(fx, p)?;
    let sp: Vec<usize> = site.spatial().collect();
    for sub in double_form_subjects(rec, &site, true, 3)? {
        let g0 = Gate::default().with(bound(&site, &sub, 0, -2, true, tol())?);
        let psi = |i: usize, j: usize| sub.c(0, &[1, i, 1, j]);
        let kap = |i: usize| site.kap(i);
        let kk: f64 = sp.iter().map(|&q| kap(q) * kap(q)).sum();
        let g1 = g0.clone().with(bound(&site, &sub, 1, 0, false, tol())?);
        let mut res = 0.0f64;
        for &i in &sp {
            for &j in &sp {
                let mut rhs = -kk * psi(i, j);
                for &k in &sp {
                    rhs += 2.0 * kap(i) * kap(k) * psi(k, j);
                }
                res = res.max(rel(sub.c(2, &[0, 0, 0, i, 1, j]), rhs));
            }
        }
        rec.record("weyl-n/second-derivative", &sub.name, &g1, res, IDENTITY_BUDGET);

        let g2 = g0
            .clone()
            .with(bound(&site, &sub, 1, -1, false, tol())?)
            .with(bound(&site, &sub, 2, 0, false, tol())?);
        let (mut ra, mut rb) = (0.0f64, 0.0f64);
        for &l in &sp {
            let (a, b) = weyl_n_third(&site, &sub, l);
            ra = a.iter().fold(ra, |m, &(x, y)| m.max(rel(x, y)));
            rb = b.iter().fold(rb, |m, &(x, y)| m.max(rel(x, y)));
        }
        rec.record("weyl-n/third-derivative-ijk0", &sub.name, &g2, ra, IDENTITY_BUDGET);
        rec.record("weyl-n/third-derivative-i010", &sub.name, &g2, rb, IDENTITY_BUDGET);
        let geod = g0.clone().with(bound(&site, &sub, 2, 0, false, tol())?);
        let kundt = geod.clone().with(bound(&site, &sub, 3, 0, false, tol())?);
        conclusions(rec, &site, &sub.name, ("weyl-n/geodesic", "weyl-n/kundt"), &geod, &kundt);
    }
    Ok(())
}
