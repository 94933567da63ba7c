//! Numerical verification of the sequence-factorization identities on
//! exhaustively enumerable spaces: the joint KL over a product target
//! distribution decomposes into per-element KLs, and the IAML loss equals
//! that KL plus the (constant) entropy of the target.

use alloc::vec;
use core::fmt;

use crate::math;
use crate::payoff::{kl, DiscreteDistribution, PayoffError};

/// Joint outcomes above this bound are refused rather than enumerated.
pub const MAX_JOINT_OUTCOMES: u64 = 1_000_000;

#[derive(Clone, Debug, PartialEq)]
pub enum IdentityError {
    /// q and p must pair up element by element.
    LengthMismatch,
    /// Component distributions must share supports.
    Payoff(PayoffError),
    /// Product space too large to enumerate.
    SupportTooLarge { outcomes: u64 },
    /// Empty element list.
    Empty,
}

impl fmt::Display for IdentityError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IdentityError::LengthMismatch => write!(f, "q and p element counts differ"),
            IdentityError::Payoff(e) => write!(f, "{e}"),
            IdentityError::SupportTooLarge { outcomes } => {
                write!(f, "joint support of {outcomes} outcomes exceeds the enumeration guard")
            }
            IdentityError::Empty => write!(f, "no element distributions given"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for IdentityError {}

impl From<PayoffError> for IdentityError {
    fn from(e: PayoffError) -> Self {
        IdentityError::Payoff(e)
    }
}

/// Exhaustive-enumeration measurements of the two identities.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IdentityReport {
    /// KL of the joint product target against the factorized model.
    pub joint_kl: f64,
    /// Sum of per-element KL divergences.
    pub kl_sum: f64,
    /// `|joint_kl − kl_sum|`.
    pub kl_residual: f64,
    /// Joint IAML loss `−Σ q(y~) ln p(y~)`.
    pub iaml_loss: f64,
    /// Entropy of the joint target.
    pub entropy: f64,
    /// `|iaml_loss − (joint_kl + entropy)|`.
    pub loss_residual: f64,
}

/// Enumerate the product space of per-element targets `q_i` against a
/// factorized model `p_i` (prefix-independent in this fixture) and measure
/// both identity residuals.
pub fn verify_kl_decomposition(
    qs: &[DiscreteDistribution<usize>],
    ps: &[DiscreteDistribution<usize>],
) -> Result<IdentityReport, IdentityError> {
    if qs.is_empty() {
        return Err(IdentityError::Empty);
    }
    if qs.len() != ps.len() {
        return Err(IdentityError::LengthMismatch);
    }
    let mut outcomes: u64 = 1;
    for (q, p) in qs.iter().zip(ps) {
        if q.support() != p.support() {
            return Err(IdentityError::Payoff(PayoffError::SupportMismatch));
        }
        outcomes = outcomes.saturating_mul(q.len() as u64);
        if outcomes > MAX_JOINT_OUTCOMES {
            return Err(IdentityError::SupportTooLarge { outcomes });
        }
    }

    let kl_sum: f64 = qs
        .iter()
        .zip(ps)
        .map(|(q, p)| kl(q, p))
        .sum::<Result<f64, _>>()?;

    // Mixed-radix walk over every joint outcome.
    let mut idx = vec![0usize; qs.len()];
    let mut joint_kl = 0.0;
    let mut iaml_loss = 0.0;
    let mut entropy = 0.0;
    loop {
        let mut qj = 1.0;
        let mut pj = 1.0;
        for (i, &k) in idx.iter().enumerate() {
            qj *= qs[i].probs()[k];
            pj *= ps[i].probs()[k];
        }
        if qj > 0.0 {
            if pj <= 0.0 {
                return Err(IdentityError::Payoff(PayoffError::ZeroDenominator));
            }
            joint_kl += qj * math::ln(qj / pj);
            iaml_loss -= qj * math::ln(pj);
            entropy -= qj * math::ln(qj);
        }
        // Advance the counter.
        let mut carry = true;
        for (i, k) in idx.iter_mut().enumerate() {
            if !carry {
                break;
            }
            *k += 1;
            if *k == qs[i].len() {
                *k = 0;
            } else {
                carry = false;
            }
        }
        if carry {
            break;
        }
    }

    Ok(IdentityReport {
        joint_kl,
        kl_sum,
        kl_residual: math::abs(joint_kl - kl_sum),
        iaml_loss,
        entropy,
        loss_residual: math::abs(iaml_loss - (joint_kl + entropy)),
    })
}
