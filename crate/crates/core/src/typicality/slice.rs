use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::{atoms_json, ergodic_rate, Backend, Band, SpectralWindow, TestProjector, DEFAULT_ETA, RATE_N_MAX};
use crate::divergence::relative_entropy_rate;
use crate::ext::ExtReal;
use crate::operator::{csv::write_operator, DEFAULT_DIM_GUARD};
use crate::source::SourceModel;
use crate::{Error, Result};

/// Sidecars list classical atoms only up to this many.
const SIDECAR_ATOM_LIMIT: usize = 1 << 16;

/// The slice grid: `s_1 < … < s_{m+1}` with step `η` and the rate
/// intervals of the reference spectrum they induce.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SliceSpec {
    pub s_values: Vec<f64>,
    pub eta: f64,
    pub s_ref: ExtReal,
    pub intervals: Vec<Band>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SliceInfo {
    pub index: usize,
    pub interval: Band,
    /// Level of the universal projector paired with the slice.
    pub level: ExtReal,
    pub log_rank: ExtReal,
    #[serde(skip)]
    pub projector: TestProjector,
}

/// `p_n = Σ r_{n,i}` with its slices and masses.
#[derive(Debug, Clone)]
pub struct SeparatingProjection {
    pub n: usize,
    pub projector: TestProjector,
    pub slices: Vec<SliceInfo>,
    /// Mass of `p_n` under each null state, keyed `omega[k]`.
    pub masses: BTreeMap<String, f64>,
    /// `(1/n) ln Φ^(n)(p_n)`.
    pub ref_log_mass: ExtReal,
    pub log_rank: ExtReal,
    pub spec: SliceSpec,
}

#[derive(Serialize)]
struct Sidecar<'a> {
    n: usize,
    spec: &'a SliceSpec,
    slices: &'a [SliceInfo],
    masses: &'a BTreeMap<String, f64>,
    ref_log_mass: ExtReal,
    log_rank: ExtReal,
    #[serde(skip_serializing_if = "Option::is_none")]
    atoms: Option<serde_json::Value>,
}

impl SeparatingProjection {
    pub fn min_mass(&self) -> f64 {
        self.masses.values().copied().fold(1.0, f64::min)
    }

    pub fn sidecar_json(&self) -> serde_json::Value {
        let atoms = match &self.projector {
            TestProjector::Classical { selection, atoms } if selection.len() <= SIDECAR_ATOM_LIMIT => {
                Some(atoms_json(atoms, selection.weights()))
            }
            _ => None,
        };
        serde_json::to_value(Sidecar {
            n: self.n,
            spec: &self.spec,
            slices: &self.slices,
            masses: &self.masses,
            ref_log_mass: self.ref_log_mass,
            log_rank: self.log_rank,
            atoms,
        })
        .expect("sidecar is plain data")
    }

    /// Writes the projector matrix to `path` (dense case only) and the
    /// metadata to `path` with a `.json` extension. Returns the files written.
    pub fn write(&self, path: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
        let path = path.as_ref();
        let mut written = Vec::new();
        if let TestProjector::Dense(p) = &self.projector {
            write_operator(path, p.op())?;
            written.push(path.to_path_buf());
        }
        let sidecar = path.with_extension("json");
        let text = serde_json::to_string_pretty(&self.sidecar_json())?;
        std::fs::write(&sidecar, text).map_err(|e| Error::io(&sidecar, e))?;
        written.push(sidecar);
        Ok(written)
    }
}

/// Separating projection of the null family `omega` against `q`.
///
/// With `s_ref = min_Ψ s(Ψ, Φ)` finite, the reference spectrum is cut into
/// slices of width `η` around `s_i + s_ref` and each slice is intersected
/// with a universal projector of level `s_i + η`. With `s_ref = ∞` the
/// result is `u_{Φ^(n)}^η(∞)`.
pub fn slice_sanov_projector(
    omega: &[SourceModel],
    q: &SourceModel,
    n: usize,
    m_slices: usize,
    eta_override: Option<f64>,
) -> Result<SeparatingProjection> {
    slice_sanov_projector_within(omega, q, n, m_slices, eta_override, DEFAULT_DIM_GUARD)
}

pub fn slice_sanov_projector_within(
    omega: &[SourceModel],
    q: &SourceModel,
    n: usize,
    m_slices: usize,
    eta_override: Option<f64>,
    max_dim: usize,
) -> Result<SeparatingProjection> {
    if omega.is_empty() {
        return Err(Error::invalid("empty null family"));
    }
    if m_slices == 0 {
        return Err(Error::invalid("need at least one slice"));
    }
    if let Some(eta) = eta_override {
        if !(eta > 0.0 && eta.is_finite()) {
            return Err(Error::invalid("eta must be positive and finite"));
        }
    }
    let rates = omega.iter().map(ergodic_rate).collect::<Result<Vec<_>>>()?;
    let s_ref = omega
        .iter()
        .map(|m| relative_entropy_rate(m, q, RATE_N_MAX).map(|r| r.value))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(ExtReal::PosInf, ExtReal::min);

    let mut models: Vec<&SourceModel> = omega.iter().collect();
    models.push(q);
    let be = Backend::within(&models, n, max_dim)?;
    let qi = omega.len();

    let (s_values, eta, parts) = match s_ref {
        ExtReal::Finite(s_ref) => {
            let s_min = rates.iter().copied().fold(f64::INFINITY, f64::min);
            let s_max = rates.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let (eta, m) = if s_max - s_min <= 1e-12 {
                (eta_override.unwrap_or(DEFAULT_ETA), 1)
            } else {
                ((s_max - s_min) / m_slices as f64, m_slices)
            };
            let s_values: Vec<f64> = (0..=m).map(|i| s_min + i as f64 * eta).collect();
            let edges: Vec<ExtReal> = (0..=m)
                .map(|i| ExtReal::Finite(s_min + s_ref + (i as f64 - 0.5) * eta))
                .chain([ExtReal::PosInf])
                .collect();
            let bands: Vec<Band> = edges.windows(2).map(|w| Band { lo: w[0], hi: w[1] }).collect();
            let mut parts = Vec::with_capacity(m + 1);
            for (i, band) in bands.into_iter().enumerate() {
                let level = s_values[i] + eta;
                let members: Vec<usize> = (0..omega.len()).filter(|&k| rates[k] < level).collect();
                // levels increase, so these projectors ascend without extra joins
                let p = be.universal(&members, &rates, level, f64::INFINITY)?;
                let u = be.window(qi, band);
                parts.push((band, ExtReal::Finite(level), be.separate(&u, &p)?));
            }
            (s_values, eta, parts)
        }
        _ => {
            let eta = eta_override.unwrap_or(DEFAULT_ETA);
            let band = SpectralWindow::new(ExtReal::PosInf, eta, n)?.band();
            (Vec::new(), eta, vec![(band, ExtReal::PosInf, be.window(qi, band))])
        }
    };

    let intervals = parts.iter().map(|(b, _, _)| *b).collect();
    let projector = be.sum(&parts.iter().map(|(_, _, r)| r.clone()).collect::<Vec<_>>())?;
    let slices = parts
        .into_iter()
        .enumerate()
        .map(|(i, (interval, level, r))| SliceInfo {
            index: i + 1,
            interval,
            level,
            log_rank: be.log_rank(&r),
            projector: r,
        })
        .collect();
    let masses = (0..omega.len())
        .map(|k| Ok((format!("omega[{k}]"), be.mass(k, &projector)?)))
        .collect::<Result<BTreeMap<_, _>>>()?;
    Ok(SeparatingProjection {
        n,
        ref_log_mass: be.log_mass(qi, &projector)?.per(n as f64),
        log_rank: be.log_rank(&projector),
        projector,
        slices,
        masses,
        spec: SliceSpec {
            s_values,
            eta,
            s_ref,
            intervals,
        },
    })
}
