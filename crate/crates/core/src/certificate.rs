//! Membership certificates shared by the two spectral-picture oracles.

use serde::Serialize;

/// The inequality family a violation belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    /// `μ_j ≥ λ_j(S_V⁻¹)`.
    Mayor2d,
    /// `μ_{d−i+1} ≤ λ_{2d−n−i+1}(S_V⁻¹)` when `n < 2d`.
    Menor2d,
    /// Horn–Klyachko inequality indexed by an LR tuple.
    Klyachko,
    /// `tr μ = τ`.
    Trace,
    /// Strict positivity `μ_d > 0`.
    Positivity,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub family: Family,
    /// 1-based inequality index where meaningful.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub index: Option<usize>,
    /// The LR tuple `(J_0, …, J_m)` with 1-based entries.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tuple: Option<Vec<Vec<usize>>>,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Certificate {
    pub member: bool,
    pub violated: Option<Violation>,
}

impl Certificate {
    pub fn member() -> Self {
        Certificate {
            member: true,
            violated: None,
        }
    }

    pub fn violation(v: Violation) -> Self {
        Certificate {
            member: false,
            violated: Some(v),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_shape() {
        let cert = Certificate::violation(Violation {
            family: Family::Mayor2d,
            index: Some(3),
            tuple: None,
            lhs: 0.5,
            rhs: 1.0,
        });
        let js = serde_json::to_value(&cert).unwrap();
        assert_eq!(js["member"], false);
        assert_eq!(js["violated"]["family"], "mayor2d");
        assert_eq!(js["violated"]["index"], 3);
        assert!(js["violated"].get("tuple").is_none());
        let ok = serde_json::to_value(Certificate::member()).unwrap();
        assert!(ok["violated"].is_null());
    }
}
