//! Influence functions and their log-envelope certificates.
//!
//! Every admissible influence function sits between
//! `lower(x) = -ln(1 - x + x²/2)` and `upper(x) = ln(1 + x + x²/2)`.
//! The improved envelope replaces `x²/2` by `(1 - eta) x²/2` away from
//! the origin; [`PsiFunction::compute_eta`] finds the largest such `eta`.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Smallest eta the default bisection resolves; also its tolerance.
pub const ETA_RESOLUTION: f64 = 1e-6;
/// Tolerance for the base envelope check.
pub const BASE_TOLERANCE: f64 = 1e-12;
/// Upper end of the improved-envelope grid.
pub const ETA_GRID_MAX: f64 = 50.0;
/// Points in the improved-envelope grid.
pub const ETA_GRID_POINTS: usize = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PsiKind {
    /// `x - x³/6` on `|x| <= sqrt 2`, flat at `2 sqrt(2) / 3` beyond.
    ClippedCubicSqrt2,
    /// `x - x³/6` on `|x| <= 1`, flat at `5/6` beyond.
    ClippedCubicOne,
    /// Odd extension of the upper envelope.
    CatoniUpperLog,
    /// Odd extension of the lower envelope on `[0, 1]`, flat at `ln 2` beyond.
    CatoniLowerLog,
}

impl PsiKind {
    pub const ALL: [PsiKind; 4] =
        [PsiKind::ClippedCubicSqrt2, PsiKind::ClippedCubicOne, PsiKind::CatoniUpperLog, PsiKind::CatoniLowerLog];

    pub fn eval<T: Real>(self, x: T) -> T {
        let two = T::lit(2.0);
        let six = T::lit(6.0);
        let a = x.abs();
        let odd = |v: T| if x < T::zero() { -v } else { v };
        match self {
            PsiKind::ClippedCubicSqrt2 => {
                let r2 = two.sqrt();
                if a <= r2 {
                    x - x * x * x / six
                } else {
                    odd(two * r2 / T::lit(3.0))
                }
            }
            PsiKind::ClippedCubicOne => {
                if a <= T::one() {
                    x - x * x * x / six
                } else {
                    odd(T::lit(5.0) / six)
                }
            }
            PsiKind::CatoniUpperLog => odd((a + a * a / two).ln_1p()),
            PsiKind::CatoniLowerLog => {
                let c = a.min(T::one());
                odd(-(-c + c * c / two).ln_1p())
            }
        }
    }

    /// `sup |psi|`, or `None` when unbounded.
    pub fn sup_abs<T: Real>(self) -> Option<T> {
        match self {
            PsiKind::ClippedCubicSqrt2 => Some(T::lit(2.0 * std::f64::consts::SQRT_2 / 3.0)),
            PsiKind::ClippedCubicOne => Some(T::lit(5.0 / 6.0)),
            PsiKind::CatoniUpperLog => None,
            PsiKind::CatoniLowerLog => Some(T::LN_2()),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            PsiKind::ClippedCubicSqrt2 => "clipped-cubic-sqrt2",
            PsiKind::ClippedCubicOne => "clipped-cubic-one",
            PsiKind::CatoniUpperLog => "catoni-upper-log",
            PsiKind::CatoniLowerLog => "catoni-lower-log",
        }
    }
}

impl std::str::FromStr for PsiKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PsiKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown psi kind `{s}`")))
    }
}

/// `ln(1 + x + (1 - eta) x²/2)`; `None` where the argument is not positive.
pub fn upper_envelope<T: Real>(x: T, eta: T) -> Option<T> {
    let arg = x + (T::one() - eta) * x * x / T::lit(2.0);
    (arg > -T::one()).then(|| arg.ln_1p())
}

/// `-ln(1 - x + (1 - eta) x²/2)`; `None` where the argument is not positive.
pub fn lower_envelope<T: Real>(x: T, eta: T) -> Option<T> {
    let arg = -x + (T::one() - eta) * x * x / T::lit(2.0);
    (arg > -T::one()).then(|| -arg.ln_1p())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConstraintReport<T> {
    pub points_checked: usize,
    pub violations: usize,
    /// Largest amount by which either envelope was crossed (0 if none).
    pub max_violation: T,
    pub first_violation_at: Option<T>,
}

impl<T: Real> ConstraintReport<T> {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// Checks `lower(x) - tol <= f(x) <= upper(x) + tol` on every grid point,
/// using the `eta`-tightened envelopes.
pub fn verify_envelope_fn<T: Real>(f: impl Fn(T) -> T, grid: &[T], eta: T, tol: T) -> ConstraintReport<T> {
    let mut report = ConstraintReport {
        points_checked: grid.len(),
        violations: 0,
        max_violation: T::zero(),
        first_violation_at: None,
    };
    for &x in grid {
        let v = f(x);
        let excess = match (lower_envelope(x, eta), upper_envelope(x, eta)) {
            (Some(lo), Some(hi)) => (lo - v).max(v - hi),
            _ => T::infinity(),
        };
        if excess > tol || excess.is_nan() {
            report.violations += 1;
            report.first_violation_at.get_or_insert(x);
            report.max_violation = report.max_violation.max(excess);
        }
    }
    report
}

/// `n` equally spaced points covering `[lo, hi]`.
pub fn uniform_grid<T: Real>(lo: T, hi: T, n: usize) -> Vec<T> {
    assert!(n >= 2, "grid needs at least two points");
    let step = (hi - lo) / T::from_usize_lossy(n - 1);
    (0..n).map(|i| if i == n - 1 { hi } else { lo + step * T::from_usize_lossy(i) }).collect()
}

fn geometric_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let ratio = (hi / lo).ln() / (n - 1) as f64;
    let mut g: Vec<f64> = (0..n).map(|i| lo * (ratio * i as f64).exp()).collect();
    g[0] = lo;
    g[n - 1] = hi;
    for knot in [1.0, std::f64::consts::SQRT_2] {
        if knot > lo && knot < hi {
            g.push(knot);
        }
    }
    g
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EtaCertificate<T> {
    pub beta: T,
    pub eta: T,
}

type EtaKey = (PsiKind, u64, u64);

fn eta_cache() -> &'static Mutex<HashMap<EtaKey, Option<f64>>> {
    static CACHE: OnceLock<Mutex<HashMap<EtaKey, Option<f64>>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

fn eta_feasible(kind: PsiKind, eta: f64, grid: &[f64]) -> bool {
    // Oddness reduces both envelopes on x < 0 to the x > 0 checks.
    grid.iter().all(|&x| {
        let v = kind.eval(x);
        match (lower_envelope(x, eta), upper_envelope(x, eta)) {
            (Some(lo), Some(hi)) => lo <= v && v <= hi,
            _ => false,
        }
    })
}

fn solve_eta(kind: PsiKind, beta: f64, tol: f64) -> Option<f64> {
    let grid = geometric_grid(beta / 2.0, ETA_GRID_MAX.max(beta), ETA_GRID_POINTS);
    if !eta_feasible(kind, tol, &grid) {
        return None;
    }
    let (mut lo, mut hi) = (tol, 1.0);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if eta_feasible(kind, mid, &grid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(lo)
}

/// An influence function together with the improved-envelope certificates
/// computed for it so far.
#[derive(Clone, Debug, PartialEq)]
pub struct PsiFunction<T> {
    kind: PsiKind,
    certificates: Vec<EtaCertificate<T>>,
}

impl<T: Real> PsiFunction<T> {
    pub fn new(kind: PsiKind) -> Self {
        Self { kind, certificates: Vec::new() }
    }

    pub fn kind(&self) -> PsiKind {
        self.kind
    }

    pub fn eval(&self, x: T) -> T {
        self.kind.eval(x)
    }

    pub fn sup_abs(&self) -> Option<T> {
        self.kind.sup_abs()
    }

    pub fn certificates(&self) -> &[EtaCertificate<T>] {
        &self.certificates
    }

    /// Base envelope check on an arbitrary grid.
    pub fn verify_base_constraint(&self, grid: &[T]) -> ConstraintReport<T> {
        let tol = T::lit(BASE_TOLERANCE).max(T::epsilon() * T::lit(8.0));
        verify_envelope_fn(|x| self.eval(x), grid, T::zero(), tol)
    }

    /// Improved envelope check restricted to grid points with `|x| >= beta/2`.
    pub fn verify_improved_constraint(&self, beta: T, eta: T, grid: &[T]) -> ConstraintReport<T> {
        let half = beta / T::lit(2.0);
        let pts: Vec<T> = grid.iter().copied().filter(|x| x.abs() >= half).collect();
        verify_envelope_fn(|x| self.eval(x), &pts, eta, T::zero())
    }

    /// Largest eta (to within `1e-6`) such that the improved envelope holds
    /// for `|x| >= beta/2`.
    pub fn compute_eta(&self, beta: T) -> Result<T> {
        self.compute_eta_with_tolerance(beta, T::lit(ETA_RESOLUTION))
    }

    /// As [`compute_eta`](Self::compute_eta) with a custom bisection
    /// tolerance, which is also the smallest eta reported. The search always
    /// runs in `f64`.
    pub fn compute_eta_with_tolerance(&self, beta: T, tol: T) -> Result<T> {
        let b = beta.to_f64_lossy();
        let t = tol.to_f64_lossy();
        if !(b > 0.0 && b.is_finite()) {
            return Err(Error::InvalidBeta(b));
        }
        if !(t > 0.0 && t < 1.0) {
            return Err(Error::InvalidParameter(format!("eta tolerance {t} outside (0, 1)")));
        }
        let key = (self.kind, b.to_bits(), t.to_bits());
        let cached = eta_cache().lock().expect("eta cache poisoned").get(&key).copied();
        let eta = match cached {
            Some(v) => v,
            None => {
                let v = solve_eta(self.kind, b, t);
                eta_cache().lock().expect("eta cache poisoned").insert(key, v);
                v
            }
        };
        eta.map(T::lit).ok_or(Error::NoImprovedSlack { beta: b })
    }

    /// Returns a copy carrying the certificate for `beta`.
    pub fn with_eta_certificate(mut self, beta: T) -> Result<Self> {
        let eta = self.compute_eta(beta)?;
        self.certificates.retain(|c| c.beta != beta);
        self.certificates.push(EtaCertificate { beta, eta });
        Ok(self)
    }
}
