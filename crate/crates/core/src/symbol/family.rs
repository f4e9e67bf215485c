//! Parameter-dependent symbol families L(a, ξ̃) = Σ ξ̃j Aj(a).

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::expr::{self, Expr};
use crate::error::{Error, Result};
use crate::matrix::{c, linalg, random, CMatrix};
use crate::sampling::ParamBox;

/// How the coefficient `a` of the model examples depends on the x-slot.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ASlot {
    Const(f64),
    X,
    AbsPow(f64),
}

impl ASlot {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            ASlot::Const(a) => a,
            ASlot::X => x,
            ASlot::AbsPow(alpha) => x.abs().powf(alpha),
        }
    }
}

/// Declarative description of a family; this is what configs contain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum FamilySpec {
    /// 3×3 model with det = τ(τ² − ξ² − x²η²); parameter `x`.
    Example1 {
        a_slot: ASlot,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        params: Option<ParamBox>,
    },
    /// 4×4 model with blocks Ω, aJ, 2Ω; parameter `x`.
    Example2 {
        a_slot: ASlot,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        params: Option<ParamBox>,
    },
    /// A0 = Id and random hermitian A1..Ad.
    Friedrichs { n: usize, d: usize, seed: u64 },
    /// Coefficient matrices given entrywise as expressions in the parameters.
    Expr {
        name: String,
        n: usize,
        d: usize,
        params: ParamBox,
        /// coefficients[j][row][col]
        coefficients: Vec<Vec<Vec<String>>>,
    },
    /// L(ν)⁻¹ L(ξ̃) for a base family.
    Reduced { base: Box<FamilySpec>, nu: Vec<f64> },
}

#[derive(Clone, Debug)]
enum Kind {
    Example1(ASlot),
    Example2(ASlot),
    Constant(Vec<CMatrix>),
    Expr(Vec<Vec<Expr>>),
    Reduced(Box<SymbolFamily>, Vec<f64>),
}

#[derive(Clone, Debug)]
pub struct SymbolFamily {
    pub name: String,
    pub n: usize,
    pub d: usize,
    pub params: ParamBox,
    spec: FamilySpec,
    kind: Kind,
}

fn default_x_box() -> ParamBox {
    ParamBox::interval("x", -1.0, 1.0, 21)
}

impl SymbolFamily {
    pub fn from_spec(spec: &FamilySpec) -> Result<Self> {
        let (name, n, d, params, kind) = match spec {
            FamilySpec::Example1 { a_slot, params } => {
                ("example1".to_string(), 3, 2, params.clone().unwrap_or_else(default_x_box), Kind::Example1(*a_slot))
            }
            FamilySpec::Example2 { a_slot, params } => {
                ("example2".to_string(), 4, 2, params.clone().unwrap_or_else(default_x_box), Kind::Example2(*a_slot))
            }
            FamilySpec::Friedrichs { n, d, seed } => {
                if *n == 0 || *d == 0 {
                    return Err(Error::Invalid("friedrichs family needs n, d ≥ 1".into()));
                }
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let mut coeffs = vec![linalg::identity(*n)];
                for _ in 0..*d {
                    coeffs.push(random::hermitian(&mut rng, *n));
                }
                ("friedrichs".to_string(), *n, *d, ParamBox::empty(), Kind::Constant(coeffs))
            }
            FamilySpec::Expr { name, n, d, params, coefficients } => {
                params.validate().map_err(Error::Invalid)?;
                if coefficients.len() != d + 1 {
                    return Err(Error::Dimension(format!("expected {} coefficient matrices, got {}", d + 1, coefficients.len())));
                }
                let mut compiled = Vec::new();
                for (j, m) in coefficients.iter().enumerate() {
                    if m.len() != *n || m.iter().any(|row| row.len() != *n) {
                        return Err(Error::Dimension(format!("coefficient {j} is not {n}x{n}")));
                    }
                    let mut entries = Vec::with_capacity(n * n);
                    for row in m {
                        for text in row {
                            entries.push(expr::parse(text, &params.names)?);
                        }
                    }
                    compiled.push(entries);
                }
                (name.clone(), *n, *d, params.clone(), Kind::Expr(compiled))
            }
            FamilySpec::Reduced { base, nu } => {
                let base = SymbolFamily::from_spec(base)?;
                if nu.len() != base.d + 1 {
                    return Err(Error::Dimension("direction length must be d + 1".into()));
                }
                (
                    format!("{}-reduced", base.name),
                    base.n,
                    base.d,
                    base.params.clone(),
                    Kind::Reduced(Box::new(base), nu.clone()),
                )
            }
        };
        params.validate().map_err(Error::Invalid)?;
        if let Kind::Example1(_) | Kind::Example2(_) = kind {
            if params.dim() != 1 {
                return Err(Error::Invalid("example families take exactly one parameter (x)".into()));
            }
        }
        Ok(SymbolFamily { name, n, d, params, spec: spec.clone(), kind })
    }

    pub fn example1(a_slot: ASlot) -> Self {
        Self::from_spec(&FamilySpec::Example1 { a_slot, params: None }).expect("valid builtin")
    }

    pub fn example2(a_slot: ASlot) -> Self {
        Self::from_spec(&FamilySpec::Example2 { a_slot, params: None }).expect("valid builtin")
    }

    pub fn with_params(mut self, params: ParamBox) -> Result<Self> {
        let spec = match self.spec.clone() {
            FamilySpec::Example1 { a_slot, .. } => FamilySpec::Example1 { a_slot, params: Some(params) },
            FamilySpec::Example2 { a_slot, .. } => FamilySpec::Example2 { a_slot, params: Some(params) },
            FamilySpec::Expr { name, n, d, coefficients, .. } => FamilySpec::Expr { name, n, d, params, coefficients },
            _ => return Err(Error::Invalid("this family has no adjustable parameters".into())),
        };
        self = Self::from_spec(&spec)?;
        Ok(self)
    }

    pub fn spec(&self) -> &FamilySpec {
        &self.spec
    }

    /// Coefficients A0(a), …, Ad(a).
    pub fn coefficients(&self, a: &[f64]) -> Result<Vec<CMatrix>> {
        if !self.params.contains(a) {
            return Err(Error::OutsideDomain { point: a.to_vec() });
        }
        Ok(self.coefficients_unchecked(a))
    }

    fn coefficients_unchecked(&self, a: &[f64]) -> Vec<CMatrix> {
        match &self.kind {
            Kind::Example1(slot) => {
                let x = a[0];
                let av = slot.eval(x);
                let a0 = linalg::identity(3);
                let a1 = linalg::from_real_rows(3, &[0.0, 1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
                let a2 = linalg::from_real_rows(
                    3,
                    &[0.0, x * av, x, -x * av, 0.0, 0.0, x * (1.0 + av * av), 0.0, 0.0],
                );
                vec![a0, a1, a2]
            }
            Kind::Example2(slot) => {
                let x = a[0];
                let av = slot.eval(x);
                let a0 = linalg::identity(4);
                let mut a1 = CMatrix::zeros(4, 4);
                a1[(0, 0)] = c(1.0, 0.0);
                a1[(1, 1)] = c(-1.0, 0.0);
                a1[(2, 2)] = c(2.0, 0.0);
                a1[(3, 3)] = c(-2.0, 0.0);
                let mut a2 = CMatrix::zeros(4, 4);
                a2[(0, 1)] = c(x, 0.0);
                a2[(1, 0)] = c(x, 0.0);
                a2[(2, 3)] = c(2.0 * x, 0.0);
                a2[(3, 2)] = c(2.0 * x, 0.0);
                a2[(0, 2)] = c(av * x, 0.0);
                vec![a0, a1, a2]
            }
            Kind::Constant(m) => m.clone(),
            Kind::Expr(entries) => entries
                .iter()
                .map(|e| CMatrix::from_fn(self.n, self.n, |i, j| e[i * self.n + j].eval(a)))
                .collect(),
            Kind::Reduced(base, nu) => {
                let cs = base.coefficients_unchecked(a);
                let j = combine(&cs, nu);
                match j.try_inverse() {
                    Some(ji) => cs.iter().map(|m| &ji * m).collect(),
                    None => cs.iter().map(|m| m * c(f64::NAN, 0.0)).collect(),
                }
            }
        }
    }

    /// L(a, ξ̃).
    pub fn eval(&self, a: &[f64], xi: &[f64]) -> Result<CMatrix> {
        if xi.len() != self.d + 1 {
            return Err(Error::Dimension(format!("frequency has length {}, expected {}", xi.len(), self.d + 1)));
        }
        let cs = self.coefficients(a)?;
        let m = combine(&cs, xi);
        linalg::check_finite(&m)?;
        Ok(m)
    }
}

pub fn combine(coeffs: &[CMatrix], xi: &[f64]) -> CMatrix {
    let n = coeffs[0].nrows();
    let mut m = CMatrix::zeros(n, n);
    for (a, &x) in coeffs.iter().zip(xi) {
        if x != 0.0 {
            m += a * c(x, 0.0);
        }
    }
    m
}

/// Convenience alias matching the operation name.
pub fn eval_symbol(fam: &SymbolFamily, a: &[f64], xi: &[f64]) -> Result<CMatrix> {
    fam.eval(a, xi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_frequency_gives_zero() {
        let f = SymbolFamily::example1(ASlot::Const(0.3));
        assert_eq!(f.eval(&[0.4], &[0.0, 0.0, 0.0]).unwrap(), CMatrix::zeros(3, 3));
    }

    #[test]
    fn example1_matrix_entries() {
        let (a, x, tau, xi, eta) = (0.5, 0.8, 0.3, -1.1, 2.0);
        let f = SymbolFamily::example1(ASlot::Const(a));
        let m = f.eval(&[x], &[tau, xi, eta]).unwrap();
        let expect = linalg::from_real_rows(
            3,
            &[
                tau,
                xi + x * a * eta,
                x * eta,
                xi - x * a * eta,
                tau,
                0.0,
                x * (1.0 + a * a) * eta,
                0.0,
                tau,
            ],
        );
        assert_eq!(m, expect);
    }

    #[test]
    fn outside_domain_is_error() {
        let f = SymbolFamily::example1(ASlot::X);
        assert!(matches!(f.eval(&[1.5], &[1.0, 0.0, 0.0]), Err(Error::OutsideDomain { .. })));
    }

    #[test]
    fn expression_family_matches_builtin() {
        let spec = FamilySpec::Expr {
            name: "ex1".into(),
            n: 3,
            d: 2,
            params: ParamBox::interval("x", -1.0, 1.0, 5),
            coefficients: vec![
                vec![vec!["1".into(), "0".into(), "0".into()], vec!["0".into(), "1".into(), "0".into()], vec!["0".into(), "0".into(), "1".into()]],
                vec![vec!["0".into(), "1".into(), "0".into()], vec!["1".into(), "0".into(), "0".into()], vec!["0".into(), "0".into(), "0".into()]],
                vec![
                    vec!["0".into(), "x*abs(x)^0.5".into(), "x".into()],
                    vec!["-x*abs(x)^0.5".into(), "0".into(), "0".into()],
                    vec!["x*(1 + abs(x))".into(), "0".into(), "0".into()],
                ],
            ],
        };
        let f = SymbolFamily::from_spec(&spec).unwrap();
        let g = SymbolFamily::example1(ASlot::AbsPow(0.5));
        let xi = [0.2, -0.7, 1.3];
        let d = f.eval(&[0.36], &xi).unwrap() - g.eval(&[0.36], &xi).unwrap();
        assert!(d.norm() < 1e-14);
        let text = serde_json::to_string(f.spec()).unwrap();
        let back: FamilySpec = serde_json::from_str(&text).unwrap();
        assert_eq!(&back, f.spec());
        assert_eq!(serde_json::to_string(&back).unwrap(), text);
    }
}
