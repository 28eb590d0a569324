use super::atoms::diagonal_np;
use super::{check_eps, TestKind, TestOutcome, CONSTRAINT_TOL};
use crate::divergence::SUPPORT_TOL;
use crate::ext::ExtReal;
use crate::operator::{check_dims, projector_mass, DensityOperator, Eigen, Projector};
use crate::Result;

const SEARCH_TOL: f64 = 1e-12;
const MAX_SEARCH_STEPS: usize = 200;
const FALLBACK_GRID: usize = 64;

/// `D_ψ − t·D_φ` diagonalized, with both states' weights on its eigenvectors.
struct Pencil {
    t: f64,
    eig: Eigen,
    psi_w: Vec<f64>,
    phi_w: Vec<f64>,
}

impl Pencil {
    fn at(psi: &DensityOperator, phi: &DensityOperator, t: f64) -> Result<Self> {
        let h = psi.op().lin_comb(1.0, phi.op(), -t)?;
        let eig = Eigen::of(&h)?;
        Ok(Pencil {
            t,
            psi_w: eig.quad_forms(psi.op()),
            phi_w: eig.quad_forms(phi.op()),
            eig,
        })
    }

    fn scale(&self) -> f64 {
        1.0f64.max(self.t)
    }

    /// `Ψ` mass of the strictly positive part.
    fn positive_mass(&self) -> f64 {
        let tol = SEARCH_TOL * self.scale();
        self.eig
            .values()
            .iter()
            .zip(&self.psi_w)
            .filter(|(l, _)| **l > tol)
            .map(|(_, w)| *w)
            .sum()
    }
}

fn kernel_projector(phi: &DensityOperator) -> Result<(Eigen, Projector)> {
    let eig = Eigen::of(phi.op())?;
    let k = eig.projector_where(|l| l <= SUPPORT_TOL);
    Ok((eig, k))
}

/// Threshold `t*` at which `Ψ(P_{>0}(D_ψ − t·D_φ))` crosses `1 − ε`.
fn threshold_search(psi: &DensityOperator, phi: &DensityOperator, phi_eig: &Eigen, target: f64) -> Result<Pencil> {
    let lmax_psi = Eigen::of(psi.op())?.values()[0].max(0.0);
    let lmin_phi = phi_eig
        .values()
        .iter()
        .copied()
        .filter(|&l| l > SUPPORT_TOL)
        .fold(f64::INFINITY, f64::min);
    let mut lo = Pencil::at(psi, phi, 0.0)?;
    let mut hi = Pencil::at(psi, phi, lmax_psi / lmin_phi + 1.0)?;
    let mut history = vec![(lo.t, lo.positive_mass()), (hi.t, hi.positive_mass())];
    let mut doublings = 0;
    while hi.positive_mass() >= target {
        doublings += 1;
        assert!(doublings < 64, "threshold bracket did not close");
        hi = Pencil::at(psi, phi, 2.0 * hi.t)?;
        history.push((hi.t, hi.positive_mass()));
    }
    assert!(lo.positive_mass() >= target, "bracket lower end infeasible");

    let (mut f_lo, mut f_hi) = (lo.positive_mass() - target, hi.positive_mass() - target);
    let mut side = 0i8;
    for step in 0..MAX_SEARCH_STEPS {
        if hi.t - lo.t <= SEARCH_TOL * hi.t.max(1e-300) {
            break;
        }
        let mid = 0.5 * (lo.t + hi.t);
        let t = if step % 2 == 0 && f_lo > f_hi {
            let s = lo.t + (hi.t - lo.t) * f_lo / (f_lo - f_hi);
            let margin = 0.05 * (hi.t - lo.t);
            s.clamp(lo.t + margin, hi.t - margin)
        } else {
            mid
        };
        let p = Pencil::at(psi, phi, t)?;
        let f = p.positive_mass() - target;
        history.push((t, f + target));
        if f.abs() <= SEARCH_TOL && f >= 0.0 {
            return Ok(p);
        }
        if f >= 0.0 {
            lo = p;
            f_lo = f;
            if side == 1 {
                f_hi *= 0.5;
            }
            side = 1;
        } else {
            hi = p;
            f_hi = f;
            if side == -1 {
                f_lo *= 0.5;
            }
            side = -1;
        }
        assert!(f_lo >= 0.0 || lo.t == 0.0, "bracket invariant broken");
    }

    history.sort_by(|a, b| a.0.total_cmp(&b.0));
    if history.windows(2).any(|w| w[1].1 > w[0].1 + 1e-9) {
        return grid_fallback(psi, phi, lo.t, hi.t, target);
    }
    Ok(hi)
}

/// Coarse scan of the bracket when the sampled mass curve is not monotone.
fn grid_fallback(psi: &DensityOperator, phi: &DensityOperator, lo: f64, hi: f64, target: f64) -> Result<Pencil> {
    let mut best = Pencil::at(psi, phi, lo)?;
    for k in 1..=FALLBACK_GRID {
        let t = lo + (hi - lo) * k as f64 / FALLBACK_GRID as f64;
        let p = Pencil::at(psi, phi, t)?;
        if p.positive_mass() >= target {
            best = p;
        }
    }
    Ok(best)
}

/// The randomized test at the found threshold: the strictly positive part
/// plus weight `γ` on eigenvectors within `δ` of zero.
fn randomized(p: &Pencil, target: f64) -> (f64, f64, f64) {
    let mut delta = SEARCH_TOL * p.scale();
    for _ in 0..12 {
        let (mut a, mut b, mut qa, mut qb) = (0.0, 0.0, 0.0, 0.0);
        for (k, &l) in p.eig.values().iter().enumerate() {
            if l > delta {
                a += p.psi_w[k];
                qa += p.phi_w[k];
            } else if l >= -delta {
                b += p.psi_w[k];
                qb += p.phi_w[k];
            }
        }
        if a >= target {
            return (qa, a, 0.0);
        }
        if a + b >= target {
            let gamma = ((target - a) / b).clamp(0.0, 1.0);
            return (qa + gamma * qb, a + gamma * b, gamma);
        }
        delta *= 10.0;
    }
    let (mut a, mut qa) = (0.0, 0.0);
    for (k, &l) in p.eig.values().iter().enumerate() {
        if l >= -delta {
            a += p.psi_w[k];
            qa += p.phi_w[k];
        }
    }
    (qa, a, 1.0)
}

fn diagonal_pair(psi: &DensityOperator, phi: &DensityOperator) -> bool {
    psi.op().is_diagonal(0.0) && phi.op().is_diagonal(0.0)
}

/// `min Tr(D_φ T)` over tests `0 ≤ T ≤ 1` with `Tr(D_ψ T) ≥ 1 − ε`.
pub fn np_relaxed_beta(psi: &DensityOperator, phi: &DensityOperator, eps: f64) -> Result<TestOutcome> {
    check_eps(eps)?;
    check_dims(psi.dim(), phi.dim())?;
    if diagonal_pair(psi, phi) {
        return Ok(diagonal_np(&psi.op().diag(), &phi.op().diag(), eps).0);
    }
    let target = 1.0 - eps;
    let (phi_eig, kernel) = kernel_projector(phi)?;
    let on_kernel = projector_mass(psi, &kernel)?;
    if on_kernel >= target - CONSTRAINT_TOL {
        return Ok(TestOutcome {
            value: ExtReal::NegInf,
            type1_error: 1.0 - on_kernel,
            log_threshold: ExtReal::PosInf,
            gamma: 0.0,
            kind: TestKind::Relaxed,
        });
    }
    let pencil = threshold_search(psi, phi, &phi_eig, target)?;
    let (q, p, gamma) = randomized(&pencil, target);
    Ok(TestOutcome {
        value: ExtReal::ln(q.max(0.0)),
        type1_error: (1.0 - p).max(0.0),
        log_threshold: ExtReal::ln(pencil.t),
        gamma,
        kind: TestKind::Relaxed,
    })
}

/// A projection `q` with `Ψ(q) ≥ 1 − ε`, rounded from the relaxed optimum:
/// the strictly positive part of `D_ψ − t*·D_φ`, then boundary eigenvectors
/// by increasing `Φ` weight, then the rest by decreasing eigenvalue.
pub fn np_projection_beta(
    psi: &DensityOperator,
    phi: &DensityOperator,
    eps: f64,
) -> Result<(TestOutcome, Projector)> {
    check_eps(eps)?;
    check_dims(psi.dim(), phi.dim())?;
    if diagonal_pair(psi, phi) {
        let (_, det, weights) = diagonal_np(&psi.op().diag(), &phi.op().diag(), eps);
        let idx: Vec<usize> = (0..weights.len()).filter(|&i| weights[i] > 0.0).collect();
        return Ok((det, Projector::coordinate(psi.dim(), &idx)));
    }
    let target = 1.0 - eps;
    let (phi_eig, kernel) = kernel_projector(phi)?;
    let on_kernel = projector_mass(psi, &kernel)?;
    if on_kernel >= target - CONSTRAINT_TOL {
        let out = TestOutcome {
            value: ExtReal::NegInf,
            type1_error: 1.0 - on_kernel,
            log_threshold: ExtReal::PosInf,
            gamma: 0.0,
            kind: TestKind::Projection,
        };
        return Ok((out, kernel));
    }
    let pencil = threshold_search(psi, phi, &phi_eig, target)?;
    let delta = SEARCH_TOL * pencil.scale();
    let values = pencil.eig.values();
    let d = values.len();
    let mut chosen: Vec<usize> = (0..d).filter(|&k| values[k] > delta).collect();
    let mut boundary: Vec<usize> = (0..d).filter(|&k| values[k].abs() <= delta).collect();
    boundary.sort_by(|&a, &b| pencil.phi_w[a].total_cmp(&pencil.phi_w[b]).then(a.cmp(&b)));
    let rest = (0..d).filter(|&k| values[k] < -delta);
    let mut mass: f64 = chosen.iter().map(|&k| pencil.psi_w[k]).sum();
    for k in boundary.into_iter().chain(rest) {
        if mass >= target - CONSTRAINT_TOL {
            break;
        }
        chosen.push(k);
        mass += pencil.psi_w[k];
    }
    chosen.sort_unstable();
    let projector = pencil.eig.projector(&chosen);
    let q_mass: f64 = chosen.iter().map(|&k| pencil.phi_w[k]).sum();
    let out = TestOutcome {
        value: ExtReal::ln(q_mass.max(0.0)),
        type1_error: (1.0 - mass).max(0.0),
        log_threshold: ExtReal::ln(pencil.t),
        gamma: 0.0,
        kind: TestKind::Projection,
    };
    Ok((out, projector))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::HermitianOperator;

    fn rotated(theta: f64, diag: [f64; 2]) -> DensityOperator {
        let (c, s) = (theta.cos(), theta.sin());
        let rows = vec![
            vec![c * c * diag[0] + s * s * diag[1], c * s * (diag[0] - diag[1])],
            vec![c * s * (diag[0] - diag[1]), s * s * diag[0] + c * c * diag[1]],
        ];
        DensityOperator::new(HermitianOperator::from_real_rows(&rows).unwrap()).unwrap()
    }

    #[test]
    fn equal_states() {
        let r = rotated(0.3, [0.7, 0.3]);
        let out = np_relaxed_beta(&r, &r, 0.4).unwrap();
        assert!((out.value.to_f64() - 0.6f64.ln()).abs() < 1e-9, "{:?}", out);
        let mm = DensityOperator::maximally_mixed(2);
        let (out, q) = np_projection_beta(&mm, &mm, 0.4).unwrap();
        assert_eq!(q.rank(), 2);
        assert!(out.value.to_f64().abs() < 1e-12);
    }

    #[test]
    fn diagonal_examples() {
        let p = DensityOperator::from_diagonal(&[0.5, 0.5]).unwrap();
        let q = DensityOperator::from_diagonal(&[0.25, 0.75]).unwrap();
        let r = np_relaxed_beta(&p, &q, 0.4).unwrap();
        assert!((r.value.to_f64() + 0.916291).abs() < 1e-6);
        let (d, proj) = np_projection_beta(&p, &q, 0.4).unwrap();
        assert_eq!(d.value.to_f64(), 0.0);
        assert_eq!(proj.rank(), 2);
    }

    #[test]
    fn orthogonal_pure_states() {
        let p = DensityOperator::pure_real(&[0.6, 0.8]).unwrap();
        let q = DensityOperator::pure_real(&[0.8, -0.6]).unwrap();
        assert_eq!(np_relaxed_beta(&p, &q, 0.1).unwrap().value, ExtReal::NegInf);
        let (out, proj) = np_projection_beta(&p, &q, 0.1).unwrap();
        assert_eq!(out.value, ExtReal::NegInf);
        assert!(projector_mass(&p, &proj).unwrap() > 1.0 - 1e-12);
    }

    #[test]
    fn non_commuting_pair_meets_constraint() {
        let p = rotated(0.0, [0.9, 0.1]);
        let q = rotated(0.4, [0.6, 0.4]);
        for eps in [0.05, 0.2, 0.5] {
            let r = np_relaxed_beta(&p, &q, eps).unwrap();
            assert!((r.type1_error - eps).abs() < 1e-9, "{r:?}");
            let (d, proj) = np_projection_beta(&p, &q, eps).unwrap();
            assert!(d.type1_error <= eps + 1e-9);
            assert!(d.value >= ExtReal::Finite(r.value.to_f64() - 1e-9));
            let m = projector_mass(&p, &proj).unwrap();
            assert!(m >= 1.0 - eps - 1e-9);
        }
    }

    #[test]
    fn rejects_bad_eps() {
        let r = DensityOperator::maximally_mixed(2);
        assert!(np_relaxed_beta(&r, &r, 0.0).is_err());
        assert!(np_relaxed_beta(&r, &r, 1.0).is_err());
    }
}
