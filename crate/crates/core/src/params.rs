use rug::Rational;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::Real;

/// Viscosity ν, dispersion α and fractional-Laplacian exponent γ.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelParams {
    pub nu: Real,
    pub alpha: Real,
    pub gamma: Real,
}

impl ModelParams {
    pub fn new(nu: Real, alpha: Real, gamma: Real) -> Result<Self> {
        if nu.is_negative() {
            return Err(Error::invalid(format!("nu must be nonnegative, got {nu}")));
        }
        if alpha.is_negative() {
            return Err(Error::invalid(format!("alpha must be nonnegative, got {alpha}")));
        }
        if gamma.is_negative() || gamma.is_zero() {
            return Err(Error::invalid(format!("gamma must be positive, got {gamma}")));
        }
        if nu.is_zero() && alpha.is_zero() {
            return Err(Error::invalid("nu and alpha cannot both be zero"));
        }
        Ok(Self { nu, alpha, gamma })
    }

    /// Complex Burgers: α = 0, γ = 1.
    pub fn burgers(nu: Real) -> Result<Self> {
        Self::new(nu, Real::int(0), Real::int(1))
    }

    /// Complex KdV–Burgers with the ordinary Laplacian.
    pub fn kdvb(nu: Real, alpha: Real) -> Result<Self> {
        Self::new(nu, alpha, Real::int(1))
    }

    pub fn is_exact(&self) -> bool {
        self.nu.as_rational().is_some() && self.alpha.as_rational().is_some() && self.gamma.as_rational().is_some()
    }

    /// The exponomial constructions only exist for γ = 1.
    pub fn require_exponomial(&self) -> Result<()> {
        let one = match &self.gamma {
            Real::Exact(g) => *g == 1,
            Real::Approx(g) => *g == 1.0,
        };
        if !one {
            return Err(Error::invalid(format!(
                "exponomial series need gamma = 1, got {}",
                self.gamma
            )));
        }
        Ok(())
    }

    pub fn summary(&self) -> ParamSummary {
        ParamSummary {
            nu: self.nu.to_string(),
            alpha: self.alpha.to_string(),
            gamma: self.gamma.to_string(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ParamSummary {
    pub nu: String,
    pub alpha: String,
    pub gamma: String,
}

/// `U(k) = k² − 2k + 2`, the largest h (or m) reachable by the recursion.
pub fn gap_h(k: u32) -> u32 {
    k * k + 2 - 2 * k
}

/// `V(k) = k³ − 3k² + 3k`, the largest l reachable by the recursion.
pub fn gap_l(k: u32) -> u32 {
    k * k * k + 3 * k - 3 * k * k
}

pub(crate) fn positive_rational(x: &Rational, what: &str) -> Result<()> {
    if x.cmp0() != std::cmp::Ordering::Greater {
        return Err(Error::invalid(format!("{what} must be positive, got {x}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_degenerate_symbols() {
        assert!(ModelParams::kdvb(Real::int(0), Real::int(0)).is_err());
        assert!(ModelParams::new(Real::int(1), Real::int(0), Real::int(0)).is_err());
        assert!(ModelParams::kdvb(Real::int(-1), Real::int(1)).is_err());
        let p = ModelParams::new(Real::int(1), Real::int(0), Real::ratio(3, 4)).unwrap();
        assert!(p.require_exponomial().is_err());
    }

    #[test]
    fn gap_indices() {
        assert_eq!(gap_h(1), 1);
        assert_eq!(gap_h(4), 10);
        assert_eq!(gap_l(2), 2);
        assert_eq!(gap_l(3), 9);
    }
}
