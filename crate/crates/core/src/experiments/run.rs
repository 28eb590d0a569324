use std::f64::consts::LN_2;

use super::config::{ExperimentConfig, ExperimentKind};
use super::record::{signed_gap, RunRecord, Value};
use crate::classical::ClassicalFrame;
use crate::divergence::{overline_s, relative_entropy, relative_entropy_rate, underline_s};
use crate::ext::ExtReal;
use crate::neyman_pearson::{
    classical_beta_frame, converse_from_divergence, hp_probe_with, np_projection_beta,
    np_relaxed_beta, HpOptions, TestOutcome, Verdict,
};
use crate::operator::DEFAULT_DIM_GUARD;
use crate::source::{ergodic_components, marginal_density_within, mixing_report, SourceModel};
use crate::typicality::{
    relative_aep_mass_within, slice_sanov_projector_within, universal_typical_projector_within, RATE_N_MAX,
};
use crate::Result;

/// Slack allowed on every converse check.
pub const CONVERSE_SLACK: f64 = 1e-9;

/// Records of one experiment with their column layout.
#[derive(Clone, Debug)]
pub struct Experiment {
    pub kind: ExperimentKind,
    pub columns: Vec<&'static str>,
    pub records: Vec<RunRecord>,
}

impl Experiment {
    /// Whether every row passes its checks: the converse bound everywhere,
    /// plus the member masses and slice bound (`sanov`), the mass trend (`aep`) and a
    /// non-violated probe verdict (`mixing_audit`).
    pub fn passed(&self) -> bool {
        self.records.iter().all(|r| r.ok)
    }

    pub fn failures(&self) -> impl Iterator<Item = &RunRecord> {
        self.records.iter().filter(|r| !r.ok)
    }
}

pub fn run(cfg: &ExperimentConfig) -> Result<Experiment> {
    cfg.validate()?;
    match cfg.kind()? {
        ExperimentKind::Stein => run_stein(cfg),
        ExperimentKind::Sanov => run_sanov(cfg),
        ExperimentKind::Aep => run_aep(cfg),
        ExperimentKind::MixingAudit => run_mixing_audit(cfg),
        ExperimentKind::Stationary => run_stationary(cfg),
    }
}

struct Rows<'a> {
    cfg: &'a ExperimentConfig,
    hash: String,
    kind: &'static str,
    records: Vec<RunRecord>,
}

impl<'a> Rows<'a> {
    fn new(cfg: &'a ExperimentConfig, kind: ExperimentKind) -> Self {
        Rows {
            cfg,
            hash: cfg.hash(),
            kind: kind.name(),
            records: Vec::new(),
        }
    }

    fn push(
        &mut self,
        n: usize,
        quantities: Vec<(&'static str, Value)>,
        compared: Option<(ExtReal, ExtReal)>,
        ok: bool,
    ) {
        self.records.push(RunRecord {
            kind: self.kind,
            n,
            quantities,
            target: compared.map(|(_, t)| t),
            gap: compared.map(|(q, t)| signed_gap(q, t)),
            seed: self.cfg.seed,
            config_hash: self.hash.clone(),
            ok,
        });
    }

    fn finish(self, kind: ExperimentKind, columns: &[&'static str]) -> Experiment {
        Experiment {
            kind,
            columns: columns.to_vec(),
            records: self.records,
        }
    }
}

fn converse_ok(test: &TestOutcome, s_n: ExtReal) -> bool {
    respects_converse(test.value, 1.0 - test.type1_error, s_n)
}

/// `ln Φ(T) ≥ −(S + ln 2)/Ψ(T)`.
fn respects_converse(log_q: ExtReal, p_mass: f64, s_n: ExtReal) -> bool {
    if p_mass <= 0.0 {
        return true;
    }
    match s_n {
        ExtReal::Finite(s) => log_q.to_f64() >= -(s + LN_2) / p_mass - CONVERSE_SLACK,
        _ => true,
    }
}

/// `S(P^(n) ‖ Q^(n))`.
pub fn divergence_n(p: &SourceModel, q: &SourceModel, n: usize, max_dim: usize) -> Result<ExtReal> {
    if p.is_classical() && q.is_classical() {
        return Ok(ClassicalFrame::new(&[p, q], n)?.relative_entropy(0, 1));
    }
    relative_entropy(&marginal_density_within(p, n, max_dim)?, &marginal_density_within(q, n, max_dim)?)
}

pub const STEIN_COLUMNS: [&str; 7] = [
    "eps",
    "beta_relaxed_over_n",
    "beta_projection_over_n",
    "type1_relaxed",
    "type1_projection",
    "converse_over_n",
    "converse_ok",
];

struct SteinPoint {
    relaxed: TestOutcome,
    projection: TestOutcome,
    s_n: ExtReal,
}

fn stein_point(p: &SourceModel, q: &SourceModel, n: usize, eps: f64, max_dim: usize) -> Result<SteinPoint> {
    if p.is_classical() && q.is_classical() {
        let frame = ClassicalFrame::new(&[p, q], n)?;
        let b = classical_beta_frame(&frame, 0, 1, eps)?;
        return Ok(SteinPoint {
            relaxed: b.relaxed,
            projection: b.deterministic,
            s_n: frame.relative_entropy(0, 1),
        });
    }
    let psi = marginal_density_within(p, n, max_dim)?;
    let phi = marginal_density_within(q, n, max_dim)?;
    Ok(SteinPoint {
        relaxed: np_relaxed_beta(&psi, &phi, eps)?,
        projection: np_projection_beta(&psi, &phi, eps)?.0,
        s_n: relative_entropy(&psi, &phi)?,
    })
}

/// Relaxed and projection `β_{ε,n}/n` against `−s(P, Q)`.
pub fn run_stein(cfg: &ExperimentConfig) -> Result<Experiment> {
    let (p, q) = (cfg.model("null")?, cfg.model("reference")?);
    let target = -relative_entropy_rate(&p, &q, RATE_N_MAX)?.value;
    let mut rows = Rows::new(cfg, ExperimentKind::Stein);
    for (i, &n) in cfg.n_values.iter().enumerate() {
        let eps = cfg.eps.at(i);
        let pt = stein_point(&p, &q, n, eps, cfg.max_dim)?;
        let per = |x: ExtReal| x.per(n as f64);
        let ok = converse_ok(&pt.relaxed, pt.s_n) && converse_ok(&pt.projection, pt.s_n);
        let relaxed = per(pt.relaxed.value);
        rows.push(
            n,
            vec![
                ("eps", eps.into()),
                ("beta_relaxed_over_n", relaxed.into()),
                ("beta_projection_over_n", per(pt.projection.value).into()),
                ("type1_relaxed", pt.relaxed.type1_error.into()),
                ("type1_projection", pt.projection.type1_error.into()),
                ("converse_over_n", per(converse_from_divergence(pt.s_n, eps)).into()),
                ("converse_ok", ok.into()),
            ],
            Some((relaxed, target)),
            ok,
        );
    }
    Ok(rows.finish(ExperimentKind::Stein, &STEIN_COLUMNS))
}

pub const SANOV_COLUMNS: [&str; 9] = [
    "eta",
    "member_masses",
    "min_mass",
    "mass_ok",
    "ref_log_mass",
    "log_rank_over_n",
    "s_ref",
    "bound_ok",
    "converse_ok",
];

/// Slice projections of the null family against the reference. A row
/// passes when every member keeps mass `1 − ε` and the reference mass is
/// below the target.
pub fn run_sanov(cfg: &ExperimentConfig) -> Result<Experiment> {
    let omega = cfg
        .omega_names()
        .iter()
        .map(|name| cfg.model(name))
        .collect::<Result<Vec<_>>>()?;
    let q = cfg.model("reference")?;
    let mut rows = Rows::new(cfg, ExperimentKind::Sanov);
    for (i, &n) in cfg.n_values.iter().enumerate() {
        let sp = slice_sanov_projector_within(&omega, &q, n, cfg.m_slices, cfg.eta, cfg.max_dim)?;
        let eta = sp.spec.eta;
        let target = match sp.spec.s_ref {
            ExtReal::Finite(s) => ExtReal::Finite(-s + eta),
            _ => ExtReal::Finite(-1.0 / eta),
        };
        let masses: Vec<f64> = (0..omega.len()).map(|k| sp.masses[&format!("omega[{k}]")]).collect();
        let mut conv = true;
        for (k, member) in omega.iter().enumerate() {
            let s_n = divergence_n(member, &q, n, cfg.max_dim)?;
            conv &= respects_converse(sp.ref_log_mass.checked_scale(n as f64).unwrap_or(ExtReal::NegInf), masses[k], s_n);
        }
        let joined = masses.iter().map(f64::to_string).collect::<Vec<_>>().join(";");
        let bound_ok = sp.ref_log_mass <= target;
        let mass_ok = sp.min_mass() >= 1.0 - cfg.eps.at(i);
        rows.push(
            n,
            vec![
                ("eta", eta.into()),
                ("member_masses", joined.into()),
                ("min_mass", sp.min_mass().into()),
                ("mass_ok", mass_ok.into()),
                ("ref_log_mass", sp.ref_log_mass.into()),
                ("log_rank_over_n", sp.log_rank.per(n as f64).into()),
                ("s_ref", sp.spec.s_ref.into()),
                ("bound_ok", bound_ok.into()),
                ("converse_ok", conv.into()),
            ],
            Some((sp.ref_log_mass, target)),
            conv && bound_ok && mass_ok,
        );
    }
    Ok(rows.finish(ExperimentKind::Sanov, &SANOV_COLUMNS))
}

pub const AEP_COLUMNS: [&str; 4] = ["eps", "mass", "center", "trend_ok"];

/// `Ψ^(n)`-mass of the reference window around `s(Ψ) + s(Ψ, Φ)`.
pub fn run_aep(cfg: &ExperimentConfig) -> Result<Experiment> {
    let (p, q) = (cfg.model("null")?, cfg.model("reference")?);
    let mut rows = Rows::new(cfg, ExperimentKind::Aep);
    let mut prev = f64::NEG_INFINITY;
    for (i, &n) in cfg.n_values.iter().enumerate() {
        let eps = cfg.eps.at(i);
        let a = relative_aep_mass_within(&p, &q, n, eps, cfg.max_dim)?;
        let trend = a.mass >= prev - 1e-12;
        prev = a.mass;
        rows.push(
            n,
            vec![
                ("eps", eps.into()),
                ("mass", a.mass.into()),
                ("center", a.center.into()),
                ("trend_ok", trend.into()),
            ],
            Some((ExtReal::Finite(a.mass), ExtReal::Finite(1.0))),
            trend,
        );
    }
    Ok(rows.finish(ExperimentKind::Aep, &AEP_COLUMNS))
}

pub const MIXING_COLUMNS: [&str; 8] = [
    "row",
    "model",
    "l",
    "alpha",
    "not_star_mixing",
    "beta_over_n",
    "converse_floor",
    "verdict",
];

/// `α̂(l)` of the reference, then a Stein probe of every other model
/// against it. Probe rows with verdict `violated` fail.
pub fn run_mixing_audit(cfg: &ExperimentConfig) -> Result<Experiment> {
    let q = cfg.model("reference")?;
    let report = mixing_report(&q, &cfg.l_values, 1)?;
    let not_star = report.not_star_mixing();
    let mut rows = Rows::new(cfg, ExperimentKind::MixingAudit);
    for (&l, &alpha) in report.l_values.iter().zip(&report.alpha) {
        rows.push(
            0,
            vec![
                ("row", "alpha".into()),
                ("model", "reference".into()),
                ("l", l.into()),
                ("alpha", alpha.into()),
                ("not_star_mixing", not_star.into()),
                ("beta_over_n", Value::Missing),
                ("converse_floor", Value::Missing),
                ("verdict", Value::Missing),
            ],
            None,
            true,
        );
    }
    for name in cfg.models.keys().filter(|k| *k != "reference") {
        let p = cfg.model(name)?;
        let eps = cfg.eps.at(0);
        let opts = HpOptions {
            tolerance: cfg.tolerance,
            max_dim: cfg.max_dim,
        };
        let hp = hp_probe_with(&p, &q, eps, &cfg.n_values, opts)?;
        let verdict = match hp.verdict {
            Verdict::Consistent => "consistent",
            Verdict::Inconclusive => "inconclusive",
            Verdict::Violated => "violated",
        };
        for (i, &n) in hp.n_values.iter().enumerate() {
            let b = hp.beta_over_n[i];
            let ok = b.to_f64() >= hp.floor[i].to_f64() - crate::neyman_pearson::UNDERCUT_TOL;
            rows.push(
                n,
                vec![
                    ("row", "hp".into()),
                    ("model", name.as_str().into()),
                    ("l", Value::Missing),
                    ("alpha", Value::Missing),
                    ("not_star_mixing", not_star.into()),
                    ("beta_over_n", b.into()),
                    ("converse_floor", hp.floor[i].into()),
                    ("verdict", verdict.into()),
                ],
                Some((b, hp.target)),
                ok,
            );
        }
    }
    Ok(rows.finish(ExperimentKind::MixingAudit, &MIXING_COLUMNS))
}

pub const STATIONARY_COLUMNS: [&str; 7] = [
    "eps",
    "beta_over_n",
    "underline_s",
    "overline_s",
    "log_rank_over_n",
    "universal_min_mass",
    "converse_ok",
];

/// Stein exponent and typical-subspace growth for a stationary, non-ergodic
/// null state, against the extreme rates of its ergodic components.
pub fn run_stationary(cfg: &ExperimentConfig) -> Result<Experiment> {
    let (p, q) = (cfg.model("null")?, cfg.model("reference")?);
    let low = underline_s(&p, &q, cfg.block_len, RATE_N_MAX)?;
    let high = overline_s(&p, cfg.block_len)?;
    let comps = ergodic_components(&p, cfg.block_len)?;
    let members: Vec<SourceModel> = comps.essential().map(|(_, c)| c.clone()).collect();
    let bl = comps.block_len;
    let target = -low;
    let mut rows = Rows::new(cfg, ExperimentKind::Stationary);
    for (i, &n) in cfg.n_values.iter().enumerate() {
        let eps = cfg.eps.at(i);
        let delta = cfg.delta.at(i);
        let pt = stein_point(&p, &q, n, eps, cfg.max_dim)?;
        let ok = converse_ok(&pt.relaxed, pt.s_n);
        let beta = pt.relaxed.value.per(n as f64);
        let (log_rank, min_mass) = if n % bl == 0 && high.is_finite() {
            let level = high.to_f64() * bl as f64 + delta;
            let u = universal_typical_projector_within(&members, n / bl, level, delta, cfg.max_dim)?;
            let min_mass = u.masses.iter().copied().fold(1.0, f64::min);
            (Value::from(u.log_rank.per(n as f64)), Value::from(min_mass))
        } else {
            (Value::Missing, Value::Missing)
        };
        rows.push(
            n,
            vec![
                ("eps", eps.into()),
                ("beta_over_n", beta.into()),
                ("underline_s", low.into()),
                ("overline_s", high.into()),
                ("log_rank_over_n", log_rank),
                ("universal_min_mass", min_mass),
                ("converse_ok", ok.into()),
            ],
            Some((beta, target)),
            ok,
        );
    }
    Ok(rows.finish(ExperimentKind::Stationary, &STATIONARY_COLUMNS))
}

/// Relaxed `β` of the `n`-site marginals with the default dimension guard,
/// checked against the converse bound.
pub fn checked_beta(p: &SourceModel, q: &SourceModel, n: usize, eps: f64) -> Result<(TestOutcome, bool)> {
    let pt = stein_point(p, q, n, eps, DEFAULT_DIM_GUARD)?;
    Ok((pt.relaxed, converse_ok(&pt.relaxed, pt.s_n)))
}
