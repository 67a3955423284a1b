//! System models and variable normalization.
//!
//! Physical plants are compared only after every input and state has been
//! rescaled to the symmetric interval `[-1, 1]`. With `P = diag(x*)` and
//! input ratings `u*`, the normalized model is `(P⁻¹ A P, P⁻¹ B diag(u*))`.

use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Linear discrete-time plant `x_{k+1} = A x_k + B u_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct LdtSystem {
    name: String,
    a: DMatrix<f64>,
    b: DMatrix<f64>,
}

impl LdtSystem {
    pub fn new(name: impl Into<String>, a: DMatrix<f64>, b: DMatrix<f64>) -> Result<Self> {
        if a.nrows() == 0 || a.nrows() != a.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "A must be square and nonempty, got {}x{}",
                a.nrows(),
                a.ncols()
            )));
        }
        if b.ncols() == 0 || b.nrows() != a.nrows() {
            return Err(Error::DimensionMismatch(format!(
                "B must have {} rows and at least one column, got {}x{}",
                a.nrows(),
                b.nrows(),
                b.ncols()
            )));
        }
        if a.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("A"));
        }
        if b.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("B"));
        }
        Ok(Self {
            name: name.into(),
            a,
            b,
        })
    }

    /// Builds a system from row-major nested rows.
    pub fn from_rows(name: impl Into<String>, a: &[Vec<f64>], b: &[Vec<f64>]) -> Result<Self> {
        Self::new(name, matrix_from_rows(a, "A")?, matrix_from_rows(b, "B")?)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn b(&self) -> &DMatrix<f64> {
        &self.b
    }

    /// State dimension.
    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    /// Input dimension.
    pub fn r(&self) -> usize {
        self.b.ncols()
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }
}

pub(crate) fn matrix_from_rows(rows: &[Vec<f64>], what: &str) -> Result<DMatrix<f64>> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    if nrows == 0 || ncols == 0 {
        return Err(Error::DimensionMismatch(format!("{what} is empty")));
    }
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::DimensionMismatch(format!("{what} has ragged rows")));
    }
    Ok(DMatrix::from_fn(nrows, ncols, |i, j| rows[i][j]))
}

pub(crate) fn matrix_to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

/// Rated (and optionally expected) symmetric bounds of inputs and states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizationSpec {
    pub input_rated: Vec<f64>,
    pub state_rated: Vec<f64>,
    pub state_target: Option<Vec<f64>>,
}

impl NormalizationSpec {
    /// The normalization that leaves a system with `n` states and `r` inputs unchanged.
    pub fn identity(n: usize, r: usize) -> Self {
        Self {
            input_rated: vec![1.0; r],
            state_rated: vec![1.0; n],
            state_target: None,
        }
    }

    fn check(&self, sys: &LdtSystem) -> Result<()> {
        check_bounds("input rating", &self.input_rated, sys.r())?;
        check_bounds("state rating", &self.state_rated, sys.n())?;
        if let Some(t) = &self.state_target {
            check_bounds("state target", t, sys.n())?;
        }
        Ok(())
    }
}

fn check_bounds(what: &'static str, v: &[f64], len: usize) -> Result<()> {
    if v.len() != len {
        return Err(Error::DimensionMismatch(format!(
            "{what} has {} entries, expected {len}",
            v.len()
        )));
    }
    for (index, &value) in v.iter().enumerate() {
        if !(value.is_finite() && value > 0.0) {
            return Err(Error::NonPositiveBound { what, index, value });
        }
    }
    Ok(())
}

/// Input constraint families. Only [`ConstraintKind::UnitAmplitude`] is
/// supported by the region and control code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConstraintKind {
    /// `‖u_k‖∞ ≤ U` at every step.
    UnitAmplitude,
    /// `‖U_N‖₁ ≤ U` over the whole sequence.
    UnitTotalFuel,
    /// `‖U_N‖₂ ≤ U` over the whole sequence.
    UnitTotalEnergy,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstraintSpec {
    pub kind: ConstraintKind,
    pub bound: f64,
}

impl Default for ConstraintSpec {
    fn default() -> Self {
        Self {
            kind: ConstraintKind::UnitAmplitude,
            bound: 1.0,
        }
    }
}

impl ConstraintSpec {
    pub fn new(kind: ConstraintKind, bound: f64) -> Result<Self> {
        if !(bound.is_finite() && bound > 0.0) {
            return Err(Error::NonPositiveBound {
                what: "constraint bound",
                index: 0,
                value: bound,
            });
        }
        Ok(Self { kind, bound })
    }

    /// Returns the amplitude bound, or `NotImplemented` for fuel/energy budgets.
    pub fn amplitude(&self) -> Result<f64> {
        match self.kind {
            ConstraintKind::UnitAmplitude => Ok(self.bound),
            ConstraintKind::UnitTotalFuel => Err(Error::NotImplemented("unit total fuel")),
            ConstraintKind::UnitTotalEnergy => Err(Error::NotImplemented("unit total energy")),
        }
    }
}

/// `Σ(A, B·diag(u*))`: rescales each input column by its rating.
pub fn normalize_input_only(sys: &LdtSystem, input_rated: &[f64]) -> Result<LdtSystem> {
    check_bounds("input rating", input_rated, sys.r())?;
    let mut b = sys.b.clone();
    for (j, &u) in input_rated.iter().enumerate() {
        b.column_mut(j).scale_mut(u);
    }
    LdtSystem::new(sys.name.clone(), sys.a.clone(), b)
}

/// `Σ(P⁻¹AP, P⁻¹B·diag(u*))` with `P = diag(state_rated)`, or
/// `diag(state_target)` when `use_target` is set.
pub fn normalize_full(sys: &LdtSystem, spec: &NormalizationSpec, use_target: bool) -> Result<LdtSystem> {
    spec.check(sys)?;
    let p = if use_target {
        spec.state_target.as_ref().ok_or(Error::MissingTarget)?
    } else {
        &spec.state_rated
    };
    let n = sys.n();
    let a = DMatrix::from_fn(n, n, |i, j| sys.a[(i, j)] * p[j] / p[i]);
    let b = DMatrix::from_fn(n, sys.r(), |i, j| sys.b[(i, j)] * spec.input_rated[j] / p[i]);
    LdtSystem::new(sys.name.clone(), a, b)
}

/// Outcome of [`validate`]; findings are reported, never raised.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub finite: bool,
    pub square: bool,
    pub determinant: f64,
    /// `|det A| / Π‖row_i‖`; zero when some row vanishes.
    pub det_ratio: f64,
    pub invertible: bool,
}

/// `|det A|` relative to the product of row norms below this flags singular.
pub const SINGULAR_RATIO: f64 = 1e-12;

pub fn validate(sys: &LdtSystem) -> ValidationReport {
    let finite = sys.a.iter().chain(sys.b.iter()).all(|v| v.is_finite());
    let square = sys.a.is_square();
    let determinant = sys.a.clone().lu().determinant();
    let row_norms: f64 = sys.a.row_iter().map(|r| r.norm()).product();
    let det_ratio = if row_norms > 0.0 {
        determinant.abs() / row_norms
    } else {
        0.0
    };
    ValidationReport {
        finite,
        square,
        determinant,
        det_ratio,
        invertible: finite && square && det_ratio >= SINGULAR_RATIO,
    }
}

/// `A⁻¹`, or `SingularA` when [`validate`] flags the matrix.
pub fn inverse_a(sys: &LdtSystem) -> Result<DMatrix<f64>> {
    if !validate(sys).invertible {
        return Err(Error::SingularA);
    }
    sys.a.clone().try_inverse().ok_or(Error::SingularA)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatedBounds {
    pub u: Vec<f64>,
    pub x: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetBounds {
    pub x: Vec<f64>,
}

/// On-disk model: `{"name", "A", "B", "rated": {"u", "x"}, "target": {"x"}}`
/// with row-major matrices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub name: String,
    #[serde(rename = "A")]
    pub a: Vec<Vec<f64>>,
    #[serde(rename = "B")]
    pub b: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rated: Option<RatedBounds>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<TargetBounds>,
}

impl ModelFile {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Schema(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }

    pub fn system(&self) -> Result<LdtSystem> {
        LdtSystem::from_rows(self.name.clone(), &self.a, &self.b)
    }

    /// Normalization bounds; `None` when the file carries no ratings.
    pub fn spec(&self) -> Option<NormalizationSpec> {
        self.rated.as_ref().map(|r| NormalizationSpec {
            input_rated: r.u.clone(),
            state_rated: r.x.clone(),
            state_target: self.target.as_ref().map(|t| t.x.clone()),
        })
    }

    /// A model file for an already normalized system: all bounds are one.
    pub fn normalized(sys: &LdtSystem, with_target: bool) -> Self {
        Self {
            name: sys.name().to_string(),
            a: matrix_to_rows(sys.a()),
            b: matrix_to_rows(sys.b()),
            rated: Some(RatedBounds {
                u: vec![1.0; sys.r()],
                x: vec![1.0; sys.n()],
            }),
            target: with_target.then(|| TargetBounds {
                x: vec![1.0; sys.n()],
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn dc() -> LdtSystem {
        LdtSystem::from_rows(
            "dc",
            &[
                vec![0.0, 1.0, 0.0],
                vec![0.0, 0.0, 1.0],
                vec![0.69527, -2.3565, 2.660],
            ],
            &[vec![0.0], vec![0.0], vec![8.74]],
        )
        .unwrap()
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(matches!(
            LdtSystem::from_rows("x", &[vec![1.0, 0.0]], &[vec![1.0]]),
            Err(Error::DimensionMismatch(_))
        ));
        assert!(matches!(
            LdtSystem::from_rows("x", &[vec![1.0]], &[vec![1.0], vec![2.0]]),
            Err(Error::DimensionMismatch(_))
        ));
        assert_eq!(
            LdtSystem::from_rows("x", &[vec![f64::NAN]], &[vec![1.0]]),
            Err(Error::NonFinite("A"))
        );
    }

    #[test]
    fn input_only_scales_columns() {
        let sys = LdtSystem::from_rows("s", &[vec![1.0, 0.0], vec![0.0, 1.0]], &[vec![1.0], vec![0.0]]).unwrap();
        let out = normalize_input_only(&sys, &[24.0]).unwrap();
        assert_eq!(out.b()[(0, 0)], 24.0);
        assert_eq!(out.b()[(1, 0)], 0.0);
        assert_eq!(out.a(), sys.a());
        assert_eq!(normalize_input_only(&sys, &[1.0]).unwrap(), sys);
        assert!(matches!(
            normalize_input_only(&sys, &[0.0]),
            Err(Error::NonPositiveBound { .. })
        ));
        assert!(matches!(
            normalize_input_only(&sys, &[1.0, 2.0]),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn dc_input_only() {
        let out = normalize_input_only(&dc(), &[24.0]).unwrap();
        // 24 · 8.74
        assert_relative_eq!(out.b()[(2, 0)], 209.76, max_relative = 1e-12);
    }

    #[test]
    fn missing_target() {
        let spec = NormalizationSpec {
            input_rated: vec![24.0],
            state_rated: vec![30.0, 200.0, 30.0],
            state_target: None,
        };
        assert_eq!(normalize_full(&dc(), &spec, true), Err(Error::MissingTarget));
    }

    #[test]
    fn validation() {
        let eye = LdtSystem::from_rows("i", &[vec![1.0, 0.0], vec![0.0, 1.0]], &[vec![1.0], vec![0.0]]).unwrap();
        assert!(validate(&eye).invertible);
        let sing = LdtSystem::from_rows("s", &[vec![0.0, 0.0], vec![0.0, 1.0]], &[vec![1.0], vec![0.0]]).unwrap();
        assert!(!validate(&sing).invertible);
        let rep = validate(&dc());
        assert!(rep.invertible);
        assert_relative_eq!(rep.determinant, 0.69527, max_relative = 1e-12);
    }

    #[test]
    fn constraint_kinds() {
        assert_eq!(ConstraintSpec::default().amplitude(), Ok(1.0));
        let fuel = ConstraintSpec::new(ConstraintKind::UnitTotalFuel, 1.0).unwrap();
        assert!(matches!(fuel.amplitude(), Err(Error::NotImplemented(_))));
        let energy = ConstraintSpec::new(ConstraintKind::UnitTotalEnergy, 1.0).unwrap();
        assert!(matches!(energy.amplitude(), Err(Error::NotImplemented(_))));
        assert!(ConstraintSpec::new(ConstraintKind::UnitAmplitude, -1.0).is_err());
    }

    #[test]
    fn model_file_parses() {
        let text = r#"{"name":"m","A":[[1,0],[0,1]],"B":[[1],[0]],"rated":{"u":[2],"x":[1,3]}}"#;
        let m = ModelFile::from_json(text).unwrap();
        let sys = m.system().unwrap();
        assert_eq!((sys.n(), sys.r()), (2, 1));
        let spec = m.spec().unwrap();
        assert_eq!(spec.state_target, None);
        assert!(ModelFile::from_json(r#"{"name":"m","A":[[1,0]]}"#).is_err());
        let ragged = r#"{"name":"m","A":[[1,0],[0]],"B":[[1],[0]]}"#;
        assert!(ModelFile::from_json(ragged).unwrap().system().is_err());
    }
}
