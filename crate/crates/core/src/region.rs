//! Controllability-region families.
//!
//! Under `‖u_k‖∞ ≤ 1` the states reachable from the origin in `N` steps form
//! the zonotope generated by the columns of `B, AB, …, A^{N−1}B`; the states
//! that can be steered back to the origin in `N` steps are generated by
//! `A⁻¹B, …, A^{−N}B`. Both are stored as nested stages `R(1) ⊂ … ⊂ R(N)`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::linalg::{self, rank, RANK_TOL};
use crate::model::{inverse_a, ConstraintSpec, LdtSystem};
use crate::zonotope::{ShapeReport, Zonotope};
use crate::{Error, Exec, Result};

/// Generator entries above this abort region construction.
pub const GROWTH_GUARD: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RegionKind {
    /// States reachable from the origin.
    Reach,
    /// States that can be steered to the origin.
    Recover,
}

impl std::str::FromStr for RegionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "reach" => Ok(RegionKind::Reach),
            "recover" => Ok(RegionKind::Recover),
            other => Err(Error::InvalidConfig(format!("unknown region kind {other:?}"))),
        }
    }
}

/// `[M^0 B₀, M^1 B₀, …]` with `(M, B₀) = (A, B)` for reach and
/// `(A⁻¹, A⁻¹B)` for recover, guarded against divergence.
pub(crate) fn generator_blocks(
    sys: &LdtSystem,
    kind: RegionKind,
    steps: usize,
    amplitude: f64,
) -> Result<Vec<DMatrix<f64>>> {
    let (step_matrix, first) = match kind {
        RegionKind::Reach => (sys.a().clone(), sys.b() * amplitude),
        RegionKind::Recover => {
            let inv = inverse_a(sys)?;
            let first = &inv * sys.b() * amplitude;
            (inv, first)
        }
    };
    let mut blocks = Vec::with_capacity(steps);
    let mut cur = first;
    for step in 0..steps {
        let magnitude = linalg::max_abs(&cur);
        if magnitude > GROWTH_GUARD || !magnitude.is_finite() {
            return Err(Error::UnstableGrowth { step, magnitude });
        }
        let next = &step_matrix * &cur;
        blocks.push(cur);
        cur = next;
    }
    Ok(blocks)
}

/// Nested regions `R(1..=N)` of one system.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionFamily {
    system: LdtSystem,
    kind: RegionKind,
    stages: Vec<Zonotope>,
}

impl RegionFamily {
    pub fn build(sys: &LdtSystem, kind: RegionKind, horizon: usize, constraint: &ConstraintSpec) -> Result<Self> {
        if horizon == 0 {
            return Err(Error::BadRange(0, 0, 0));
        }
        let amplitude = constraint.amplitude()?;
        let blocks = generator_blocks(sys, kind, horizon, amplitude)?;
        let n = sys.n();
        let stages = (1..=horizon)
            .map(|k| Zonotope::new(linalg::hstack(&blocks[..k], n)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            system: sys.clone(),
            kind,
            stages,
        })
    }

    pub fn system(&self) -> &LdtSystem {
        &self.system
    }

    pub fn kind(&self) -> RegionKind {
        self.kind
    }

    pub fn horizon(&self) -> usize {
        self.stages.len()
    }

    /// `R(k)` for `1 ≤ k ≤ N`.
    pub fn stage(&self, k: usize) -> &Zonotope {
        &self.stages[k - 1]
    }

    pub fn stages(&self) -> &[Zonotope] {
        &self.stages
    }

    /// The full family's export record.
    pub fn summary(&self, exec: Exec) -> RegionSummary {
        let last = self.stage(self.horizon());
        let shape = last.shape_report_with(exec);
        let volume_by_stage = self.stages.iter().map(|z| z.volume_with(exec)).collect();
        let vertex_count_by_stage = exec.map(&self.stages, |z| z.vertex_signs().len());
        RegionSummary {
            kind: self.kind,
            n: self.horizon(),
            rank: shape.rank,
            volume_by_stage,
            side_lengths: shape.side_lengths.clone(),
            shape_factors: shape,
            vertex_count_by_stage,
        }
    }
}

/// Region summary export record.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct RegionSummary {
    pub kind: RegionKind,
    #[serde(rename = "N")]
    pub n: usize,
    pub rank: usize,
    pub volume_by_stage: Vec<f64>,
    pub side_lengths: Vec<f64>,
    pub shape_factors: ShapeReport,
    pub vertex_count_by_stage: Vec<usize>,
}

/// Reach family `R^d(1..=N)`, identical to the broad region.
pub fn reach_region(sys: &LdtSystem, horizon: usize) -> Result<RegionFamily> {
    RegionFamily::build(sys, RegionKind::Reach, horizon, &ConstraintSpec::default())
}

/// Recover family `R^c(1..=N)`; needs an invertible `A`.
pub fn recover_region(sys: &LdtSystem, horizon: usize) -> Result<RegionFamily> {
    RegionFamily::build(sys, RegionKind::Recover, horizon, &ConstraintSpec::default())
}

/// Rank of `P_N = [B, AB, …, A^{N−1}B]` and the spectrum floor of the
/// Grammian `G_N = P_N P_Nᵀ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ControllabilityReport {
    pub rank_pn: usize,
    pub grammian_min_eigen: f64,
    pub controllable: bool,
    /// Controllability index `n_c = rank P_N`.
    pub nc: usize,
}

pub fn controllability_report(sys: &LdtSystem, horizon: usize) -> Result<ControllabilityReport> {
    let n = sys.n();
    if horizon < n {
        return Err(Error::HorizonTooShort { horizon, n });
    }
    let mut blocks = Vec::with_capacity(horizon);
    let mut cur = sys.b().clone();
    for _ in 0..horizon {
        let next = sys.a() * &cur;
        blocks.push(cur);
        cur = next;
    }
    let pn = linalg::hstack(&blocks, n);
    let rank_pn = rank(&pn, RANK_TOL);
    let grammian = &pn * pn.transpose();
    let grammian_min_eigen = linalg::min_symmetric_eigenvalue(&grammian).max(0.0);
    Ok(ControllabilityReport {
        rank_pn,
        grammian_min_eigen,
        controllable: rank_pn == n,
        nc: rank_pn,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExpansionVerdict {
    /// `R(N₁)` lies in the interior of `R(N₂)`.
    StrictlyExpanding,
    /// The boundaries touch: `direction` is orthogonal to every generator
    /// added between the stages, and `contact` is a point of `∂R(N₁)` that
    /// stays on `∂R(N₂)`.
    WeaklyExpanding {
        direction: DVector<f64>,
        contact: DVector<f64>,
    },
}

impl ExpansionVerdict {
    pub fn is_strict(&self) -> bool {
        matches!(self, ExpansionVerdict::StrictlyExpanding)
    }
}

pub fn expansion_check(fam: &RegionFamily, n1: usize, n2: usize) -> Result<ExpansionVerdict> {
    if n1 == 0 || n1 >= n2 || n2 > fam.horizon() {
        return Err(Error::BadRange(n1, n2, fam.horizon()));
    }
    let r = fam.system.r();
    let full = fam.stage(n2).generators();
    let added = full.columns(n1 * r, (n2 - n1) * r).into_owned();
    let n = fam.system.n();
    // The added block is M^N1 times the first N2−N1 steps' block (M = A or
    // A⁻¹). Powers of M squash it toward the dominant eigenvector, so for an
    // invertible A the rank is read off the unpowered block instead.
    let window = if rank(fam.system.a(), RANK_TOL) == n {
        full.columns(0, (n2 - n1) * r).into_owned()
    } else {
        added.clone()
    };
    if rank(&window, RANK_TOL) == n {
        return Ok(ExpansionVerdict::StrictlyExpanding);
    }
    let direction = linalg::left_null_direction(&added);
    let inner = fam.stage(n1);
    let signs: Vec<i8> = inner
        .generators()
        .tr_mul(&direction)
        .iter()
        .map(|&v| if v < 0.0 { -1 } else { 1 })
        .collect();
    let contact = inner.point(&signs);
    Ok(ExpansionVerdict::WeaklyExpanding { direction, contact })
}
