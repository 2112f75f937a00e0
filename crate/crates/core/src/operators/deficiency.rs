//! Semi-analytic deficiency indices of first-order momentum operators.
//!
//! A finite Hermitian matrix cannot tell a symmetric operator from a
//! self-adjoint one, so the classifier works with the differential
//! expression of the adjoint directly: it integrates `A†ψ = ±iγψ` from the
//! origin across a truncated domain and declares the solution square
//! integrable when its tail carries a negligible share of the norm.

use std::fmt;

use crate::{Error, Result, C64};

/// First-order operators the classifier understands.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum OperatorSpec {
    /// `(1/i) d/dx` on the half line with `ψ(0) = 0`.
    HalfLineMomentum,
    /// `-(1/i) d/dx` on the half line with `ψ(0) = 0`.
    NegatedHalfLineMomentum,
    /// `p+ ⊗ |0⟩⟨0| - p+ ⊗ |1⟩⟨1|` on `H+ ⊗ C²`.
    ExtendedMomentum,
    /// `(1/i) d/dx` on the whole line.
    WholeLineMomentum,
}

impl OperatorSpec {
    pub const ALL: [OperatorSpec; 4] = [
        OperatorSpec::HalfLineMomentum,
        OperatorSpec::NegatedHalfLineMomentum,
        OperatorSpec::ExtendedMomentum,
        OperatorSpec::WholeLineMomentum,
    ];

    pub fn name(self) -> &'static str {
        match self {
            OperatorSpec::HalfLineMomentum => "p+",
            OperatorSpec::NegatedHalfLineMomentum => "-p+",
            OperatorSpec::ExtendedMomentum => "extended",
            OperatorSpec::WholeLineMomentum => "whole-line",
        }
    }

    /// Independent pieces: (sign of the derivative, half line?).
    fn components(self) -> Vec<Component> {
        use Component::*;
        match self {
            OperatorSpec::HalfLineMomentum => vec![Half { sign: 1.0 }],
            OperatorSpec::NegatedHalfLineMomentum => vec![Half { sign: -1.0 }],
            OperatorSpec::ExtendedMomentum => vec![Half { sign: 1.0 }, Half { sign: -1.0 }],
            OperatorSpec::WholeLineMomentum => vec![Whole { sign: 1.0 }],
        }
    }
}

impl fmt::Display for OperatorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug)]
enum Component {
    Half { sign: f64 },
    Whole { sign: f64 },
}

impl Component {
    fn describe(self) -> String {
        match self {
            Component::Half { sign } if sign > 0.0 => "(1/i)d/dx on [0,inf)".into(),
            Component::Half { .. } => "-(1/i)d/dx on [0,inf)".into(),
            Component::Whole { .. } => "(1/i)d/dx on R".into(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Classification {
    SelfAdjoint,
    SelfAdjointExtendable,
    NoSelfAdjointExtension,
}

impl Classification {
    pub fn from_indices(n_plus: usize, n_minus: usize) -> Self {
        if n_plus == 0 && n_minus == 0 {
            Classification::SelfAdjoint
        } else if n_plus == n_minus {
            Classification::SelfAdjointExtendable
        } else {
            Classification::NoSelfAdjointExtension
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Classification::SelfAdjoint => "self-adjoint",
            Classification::SelfAdjointExtendable => "self-adjoint-extendable",
            Classification::NoSelfAdjointExtension => "no-self-adjoint-extension",
        }
    }
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Decay diagnostic for one candidate solution.
#[derive(Clone, Debug, PartialEq)]
pub struct TailDiagnostic {
    pub component: String,
    /// `+1` for `A†ψ = +iγψ`, `-1` for `-iγψ`.
    pub sign: i8,
    pub tail_ratio: f64,
    pub normalizable: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DeficiencyReport {
    pub operator: OperatorSpec,
    pub n_plus: usize,
    pub n_minus: usize,
    pub gamma: f64,
    pub classification: Classification,
    pub tail_ratios: Vec<TailDiagnostic>,
}

impl DeficiencyReport {
    /// Parametrization of the self-adjoint extensions, when there are any.
    pub fn extension_family(&self) -> Option<String> {
        match (self.classification, self.n_plus) {
            (Classification::SelfAdjointExtendable, 1) => {
                Some("U(1): psi(0+) = exp(i theta) psi(0-)".into())
            }
            (Classification::SelfAdjointExtendable, k) => Some(format!("U({k})")),
            _ => None,
        }
    }
}

/// Truncated-domain integrator for the deficiency equations.
#[derive(Clone, Debug)]
pub struct DeficiencyAnalyzer {
    /// Half-extent of the integration domain.
    pub length: f64,
    pub steps: usize,
    /// Solutions with `tail_ratio` below this are square integrable.
    pub threshold: f64,
}

impl Default for DeficiencyAnalyzer {
    fn default() -> Self {
        Self { length: 40.0, steps: 4000, threshold: 1e-3 }
    }
}

/// Classical RK4 march of `ψ' = rate·ψ` from `ψ(0) = 1`; returns samples
/// at `k·h`, `k = 0..=steps`.
fn integrate(rate: C64, h: f64, steps: usize) -> Vec<C64> {
    let f = |y: C64| rate * y;
    let mut y = C64::new(1.0, 0.0);
    let mut out = Vec::with_capacity(steps + 1);
    out.push(y);
    for _ in 0..steps {
        let k1 = f(y);
        let k2 = f(y + k1 * (h / 2.0));
        let k3 = f(y + k2 * (h / 2.0));
        let k4 = f(y + k3 * h);
        y += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        out.push(y);
    }
    out
}

fn norm_sq(samples: &[C64]) -> f64 {
    samples.iter().map(|z| z.norm_sqr()).sum()
}

impl DeficiencyAnalyzer {
    pub fn analyze(&self, spec: OperatorSpec, gamma: f64) -> Result<DeficiencyReport> {
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(Error::InvalidParameter(format!("gamma must be positive, got {gamma}")));
        }
        if !(self.length > 0.0) || self.steps < 4 || !(self.threshold > 0.0) {
            return Err(Error::InvalidParameter("invalid deficiency analyzer settings".into()));
        }
        let h = self.length / self.steps as f64;
        let half = self.steps / 2;
        let mut tails = Vec::new();
        let (mut n_plus, mut n_minus) = (0, 0);

        for component in spec.components() {
            for sign in [1i8, -1] {
                // s·(1/i)ψ' = σ·iγ·ψ  ⇒  ψ' = -σγ/s · ψ
                let s = match component {
                    Component::Half { sign } | Component::Whole { sign } => sign,
                };
                let rate = C64::new(-(sign as f64) * gamma / s, 0.0);
                let ratio = match component {
                    Component::Half { .. } => {
                        let psi = integrate(rate, h, self.steps);
                        (norm_sq(&psi[half..]) / norm_sq(&psi[..half])).sqrt()
                    }
                    Component::Whole { .. } => {
                        let right = integrate(rate, h, self.steps);
                        let left = integrate(-rate, h, self.steps);
                        let core = norm_sq(&right[..half]) + norm_sq(&left[1..half]);
                        let r = (norm_sq(&right[half..]) / core).sqrt();
                        let l = (norm_sq(&left[half..]) / core).sqrt();
                        r.max(l)
                    }
                };
                if ratio > self.threshold / 10.0 && ratio < self.threshold * 10.0 {
                    return Err(Error::Inconclusive(format!(
                        "{spec}: tail ratio {ratio:e} is within a decade of the threshold {:e}; \
                         increase the domain length",
                        self.threshold
                    )));
                }
                let normalizable = ratio < self.threshold;
                if normalizable {
                    if sign > 0 {
                        n_plus += 1;
                    } else {
                        n_minus += 1;
                    }
                }
                tails.push(TailDiagnostic {
                    component: component.describe(),
                    sign,
                    tail_ratio: ratio,
                    normalizable,
                });
            }
        }

        Ok(DeficiencyReport {
            operator: spec,
            n_plus,
            n_minus,
            gamma,
            classification: Classification::from_indices(n_plus, n_minus),
            tail_ratios: tails,
        })
    }
}

/// Deficiency indices with the default analyzer.
pub fn deficiency_indices(spec: OperatorSpec, gamma: f64) -> Result<DeficiencyReport> {
    DeficiencyAnalyzer::default().analyze(spec, gamma)
}
