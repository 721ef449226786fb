//! Norms of `D^p_s`, `M_α(D^p_s)`, `F(p, q, s)`, `F_log` and weighted Bloch
//! spaces, the admissible-range gate, little-o profiles and the weight
//! regularity constant.

mod norms;
mod weight;

pub use norms::{
    dps_norm, f_family_norm, f_family_norm_with, littleo_profile, littleo_profile_with, mads_norm, mads_norm_with, mads_seminorm, mads_seminorm_with,
    weighted_bloch_norm, BlochWeight, NormOptions, SpaceSelector,
};
pub use weight::{log_weight, weight_regularity_constant, WeightSample};

use crate::quadrature::{QuadratureResult, SupProfile};
use serde::{Deserialize, Serialize};

/// Parameters `(p, s, α)` of `M_α(D^p_s)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpaceParams {
    pub p: f64,
    pub s: f64,
    pub alpha: f64,
}

/// Where a parameter triple falls.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    /// `α ≥ (s - (p - 2))/p`: the space coincides with `D^p_s`.
    CollapsedToDps,
    /// Inside the admissible range.
    ProperMalpha,
    Invalid,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Admissibility {
    pub admissible: bool,
    pub classification: Classification,
}

impl SpaceParams {
    pub fn new(p: f64, s: f64, alpha: f64) -> Self {
        SpaceParams { p, s, alpha }
    }

    /// `(s - (p - 2))/p`, the threshold above which `M_α = D^p_s`.
    pub fn alpha_threshold(&self) -> f64 {
        (self.s - (self.p - 2.0)) / self.p
    }

    /// `σ = s - (p(α + 1) - 2)`, the box/kernel exponent.
    pub fn sigma(&self) -> f64 {
        self.s - (self.p * (self.alpha + 1.0) - 2.0)
    }

    /// Kernel exponent that makes the kernel form coincide with the
    /// invariant form: `β = s - (p - 2) + pα`.
    pub fn matching_beta(&self) -> f64 {
        self.s - (self.p - 2.0) + self.p * self.alpha
    }

    pub fn is_admissible(&self) -> bool {
        admissible_check(*self).admissible
    }
}

/// Admissible range: `1 < p < ∞`, `0 ≤ α < (s - (p - 2))/p`, and either
/// `p ≥ 2, s > p - 2` or `1 < p < 2, s ≥ 0`. Triples with `s ≥ p - 2` and
/// `α ≥ (s - (p - 2))/p` are reported as collapsed to `D^p_s`.
pub fn admissible_check(params: SpaceParams) -> Admissibility {
    let SpaceParams { p, s, alpha } = params;
    let invalid = Admissibility {
        admissible: false,
        classification: Classification::Invalid,
    };
    if !(p.is_finite() && s.is_finite() && alpha.is_finite()) || p <= 1.0 || alpha < 0.0 || s < p - 2.0 {
        return invalid;
    }
    if alpha >= params.alpha_threshold() {
        return Admissibility {
            admissible: false,
            classification: Classification::CollapsedToDps,
        };
    }
    let base = (p >= 2.0 && s > p - 2.0) || (p < 2.0 && s >= 0.0);
    if base {
        Admissibility {
            admissible: true,
            classification: Classification::ProperMalpha,
        }
    } else {
        invalid
    }
}

/// Which functional produced a [`NormEstimate`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormForm {
    /// `(1 - |a|²)^α ‖f∘φ_a - f(a)‖_{D^p_s}`.
    Invariant,
    /// `((1 - |a|²)^{-σ} ∫_{S(a)} |f'|^p (1 - |z|²)^s dA)^{1/p}`.
    Box,
    /// `(∫ |f'|^p (1 - |z|²)^s (1 - |a|²)^β / |1 - āz|^{σ+β} dA)^{1/p}`.
    Kernel,
    /// `D^p_s` norm (no supremum).
    Dps,
    /// `F(p, q, s)` or `F_log(p, q, s)` supremum.
    FFamily,
    /// Weighted Bloch supremum.
    Bloch,
}

/// Aggregate quadrature diagnostics over all integrals behind an estimate.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct QuadratureMeta {
    pub integrals: usize,
    pub total_cells: usize,
    /// Largest relative error bound among the integrals.
    pub max_rel_error: f64,
    pub max_radius_reached: f64,
    pub tol: f64,
}

impl QuadratureMeta {
    pub(crate) fn absorb(&mut self, q: &QuadratureResult) {
        self.integrals += 1;
        self.total_cells += q.cells_used;
        let rel = if q.value != 0.0 { q.error_bound / q.value.abs() } else { q.error_bound };
        self.max_rel_error = self.max_rel_error.max(rel);
        self.max_radius_reached = self.max_radius_reached.max(q.max_radius_reached);
    }
}

/// A norm value with the profile and grid data it was derived from.
///
/// `value = f0_term + global_sup^{exponent}` where `global_sup` is the
/// supremum recorded in `profile`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormEstimate {
    pub value: f64,
    pub form: NormForm,
    pub f0_term: f64,
    /// Power applied to the raw supremum (`1/p` or `1`).
    pub exponent: f64,
    pub profile: SupProfile,
    pub quadrature_meta: QuadratureMeta,
    pub params: Option<SpaceParams>,
    /// Convention for `S(a)`, recorded for box-sensitive results.
    pub box_convention: String,
}

pub(crate) const BOX_CONVENTION: &str = "S(a) = S(I_a), I_a centred at a/|a| with |I_a| = 1 - |a| (|T| = 1); S(0) = D";

impl NormEstimate {
    pub fn to_json(&self) -> crate::error::Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> crate::error::Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    /// Checks `value = f0_term + global_sup^exponent`.
    pub fn is_consistent(&self) -> bool {
        let expect = self.f0_term + self.profile.global_sup.max(0.0).powf(self.exponent);
        (expect - self.value).abs() <= 1e-12 * self.value.abs().max(1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn truth_table() {
        use Classification::*;
        let table = [
            ((2.0, 1.0, 0.0), true, ProperMalpha),
            ((2.0, 1.0, 0.25), true, ProperMalpha),
            ((2.0, 1.0, 0.5), false, CollapsedToDps),
            ((2.0, 1.0, 0.75), false, CollapsedToDps),
            ((3.0, 1.0, 0.0), false, CollapsedToDps),
            ((1.5, 0.0, 0.0), true, ProperMalpha),
            ((1.5, -0.2, 0.0), false, Invalid),
            ((1.0, 1.0, 0.0), false, Invalid),
            ((3.0, 0.5, 0.0), false, Invalid),
        ];
        for ((p, s, a), adm, class) in table {
            let r = admissible_check(SpaceParams::new(p, s, a));
            assert_eq!(r.admissible, adm, "({p},{s},{a})");
            assert_eq!(r.classification, class, "({p},{s},{a})");
        }
    }

    #[test]
    fn beta_matches_invariant_exponent() {
        let q = SpaceParams::new(3.0, 1.5, 0.1);
        // kernel denominator exponent σ + β equals 2(s - (p - 2))
        assert!((q.sigma() + q.matching_beta() - 2.0 * (q.s - (q.p - 2.0))).abs() < 1e-15);
    }
}
